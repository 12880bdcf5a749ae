"""Declarative problem files: a TOML-subset reader and the Problem model.

The file format supports exactly what problem declarations need: `[table]`
and `[table.name]` headers, `key = value` pairs with string, number, boolean
and (nested) array values, and `#` comments.  Duplicate tables or keys are
rejected rather than merged.

Blocks: [bundle], [lagrangian], [connection.NAME], [vectorfield.NAME],
[section.NAME], [jetfield.NAME], [diffeo.NAME], [numeric].  Expressions are
strings in the engine's grammar and may reference jet coordinates d(y,x).
Tables of expressions are nested arrays in fiber-major order: connection
`gamma[A][mu]`, jet field `F[A][rho]` and `G[A][rho][mu]`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import expr as ex
from .chart import SectionE, make_chart
from .connection import Connection, JetField2
from .errors import (
    DuplicateDefinition,
    MissingArgument,
    ParseError,
    UnknownCoordinate,
)
from .forms import FiberedMap, VectorField, total_space
from .lagrangian import Lagrangian


# ---------------------------------------------------------------------------
# TOML-subset reader
# ---------------------------------------------------------------------------

class _Reader:
    def __init__(self, text):
        self.text = text
        self.pos = 0
        self.line = 1
        self.col = 1

    def error(self, msg):
        raise ParseError(msg, self.line, self.col)

    def peek(self):
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def advance(self):
        c = self.text[self.pos]
        self.pos += 1
        if c == "\n":
            self.line += 1
            self.col = 1
        else:
            self.col += 1
        return c

    def skip_ws(self, newlines=False):
        while self.pos < len(self.text):
            c = self.peek()
            if c == "#":
                while self.pos < len(self.text) and self.peek() != "\n":
                    self.advance()
            elif c in " \t\r" or (newlines and c == "\n"):
                self.advance()
            else:
                break

    def read_bare(self):
        start = self.pos
        while self.pos < len(self.text) and (self.peek().isalnum()
                                             or self.peek() in "_-."):
            self.advance()
        if start == self.pos:
            self.error(f"expected a name, found {self.peek()!r}")
        return self.text[start:self.pos]

    def read_string(self):
        self.advance()  # opening quote
        out = []
        while True:
            if self.pos >= len(self.text) or self.peek() == "\n":
                self.error("unterminated string")
            c = self.advance()
            if c == '"':
                return "".join(out)
            out.append(c)

    def read_value(self):
        self.skip_ws()
        c = self.peek()
        if c == '"':
            return self.read_string()
        if c == "[":
            self.advance()
            arr = []
            while True:
                self.skip_ws(newlines=True)
                if self.peek() == "]":
                    self.advance()
                    return arr
                arr.append(self.read_value())
                self.skip_ws(newlines=True)
                if self.peek() == ",":
                    self.advance()
                elif self.peek() != "]":
                    self.error("expected ',' or ']' in array")
        token = []
        while self.pos < len(self.text) and self.peek() not in " \t\r\n#,]":
            token.append(self.advance())
        token = "".join(token)
        if token in ("true", "false"):
            return token == "true"
        try:
            if any(s in token for s in ".eE") and not token.lstrip("+-").isdigit():
                return float(token)
            return int(token)
        except ValueError:
            self.error(f"cannot read value {token!r}")


def parse_toml_subset(text):
    rd = _Reader(text)
    root = {}
    current = root
    current_path = ()
    while True:
        rd.skip_ws(newlines=True)
        if rd.pos >= len(rd.text):
            return root
        if rd.peek() == "[":
            rd.advance()
            rd.skip_ws()
            name = rd.read_bare()
            rd.skip_ws()
            if rd.peek() != "]":
                rd.error("expected ']' after table name")
            rd.advance()
            parts = tuple(name.split("."))
            node = root
            for i, part in enumerate(parts):
                if i == len(parts) - 1:
                    if part in node:
                        raise DuplicateDefinition(
                            f"table [{name}] defined twice")
                    node[part] = {}
                    node = node[part]
                else:
                    node = node.setdefault(part, {})
                    if not isinstance(node, dict):
                        rd.error(f"{part!r} is not a table")
            current = node
            current_path = parts
            continue
        key = rd.read_bare()
        rd.skip_ws()
        if rd.peek() != "=":
            rd.error(f"expected '=' after key {key!r}")
        rd.advance()
        value = rd.read_value()
        if key in current:
            where = ".".join(current_path) or "top level"
            raise DuplicateDefinition(f"key {key!r} defined twice in {where}")
        current[key] = value


# ---------------------------------------------------------------------------
# problem model
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Guard:
    expr: object
    op: str         # '>' or '<'
    threshold: float

    def holds(self, point):
        v = ex.evaluate_numeric(self.expr, point)
        return v > self.threshold if self.op == ">" else v < self.threshold


def parse_guard(chart, text):
    for op in (">", "<"):
        if op in text:
            left, right = text.split(op, 1)
            try:
                thr = float(right.strip())
            except ValueError:
                raise ParseError(f"guard threshold {right.strip()!r} is not a number")
            return Guard(chart.parse(left.strip()), op, thr)
    raise ParseError(f"guard {text!r} needs '>' or '<'")


@dataclass(frozen=True)
class NumericSettings:
    seed: int = 20240808
    samples: int = 100
    tol: float = 1e-9
    tol_fd: float = 1e-6
    symmetry_samples: int = 200
    box: dict = field(default_factory=dict, compare=False)   # var -> (lo, hi)
    guards: tuple = ()

    def interval(self, name):
        return self.box.get(name, (-1.0, 1.0))


@dataclass(frozen=True)
class VectorFieldDecl:
    vf: VectorField
    symmetry: object = None   # True/False expectation, or None
    check: str = "symbolic"   # or "numeric"


@dataclass(frozen=True)
class SectionDecl:
    section: SectionE
    solution: object = None   # True/False expectation, or None


@dataclass(frozen=True)
class JetFieldDecl:
    jf: JetField2
    el_solution: object = None
    integral_sections: tuple = ()


@dataclass(frozen=True)
class DiffeoDecl:
    diffeo: FiberedMap
    symmetry: object = None


@dataclass(frozen=True)
class Problem:
    chart: object
    lagrangian: Lagrangian
    connections: dict = field(default_factory=dict, compare=False)
    vectorfields: dict = field(default_factory=dict, compare=False)
    sections: dict = field(default_factory=dict, compare=False)
    jetfields: dict = field(default_factory=dict, compare=False)
    diffeos: dict = field(default_factory=dict, compare=False)
    numeric: NumericSettings = NumericSettings()


def _expr_rows(chart, rows, what, shape):
    """Parse a nested array of expression strings, checking its shape."""
    if len(rows) != shape[0]:
        raise ParseError(f"{what}: expected {shape[0]} rows, found {len(rows)}")
    out = []
    for row in rows:
        if len(shape) == 1:
            if not isinstance(row, str):
                raise ParseError(f"{what}: expected expression strings")
            out.append(chart.parse(row))
        else:
            if not isinstance(row, list):
                raise ParseError(f"{what}: expected nested arrays")
            out.append(_expr_rows(chart, row, what, shape[1:]))
    return out


def _build_connection(chart, body, name):
    rows = body.get("gamma")
    if rows is None:
        raise MissingArgument(f"[connection.{name}] needs a gamma table")
    table = _expr_rows(chart, rows, f"connection {name}",
                       (chart.n_fields, chart.n_plus_1))
    gamma = {}
    for yi, y in enumerate(chart.fiber_names):
        for xi, x in enumerate(chart.base_names):
            gamma[(y, x)] = table[yi][xi]
    return Connection(chart, gamma)


def _build_vectorfield(chart, body, name):
    base = body.get("base", ["0"] * chart.n_plus_1)
    fiber = body.get("fiber", ["0"] * chart.n_fields)
    alphas = _expr_rows(chart, base, f"vectorfield {name} base", (chart.n_plus_1,))
    betas = _expr_rows(chart, fiber, f"vectorfield {name} fiber", (chart.n_fields,))
    comps = {}
    allowed = set(chart.e_coords())
    for x, a in zip(chart.base_names, alphas):
        comps[x] = a
    for y, b in zip(chart.fiber_names, betas):
        comps[y] = b
    for c in comps.values():
        if ex.free_vars(c) - allowed:
            raise UnknownCoordinate(
                f"vectorfield {name} components must live on the total space")
    vf = VectorField(total_space(chart), comps)
    return VectorFieldDecl(vf, body.get("symmetry"),
                           body.get("check", "symbolic"))


def _build_section(chart, body, name):
    comps = body.get("components")
    if comps is None:
        raise MissingArgument(f"[section.{name}] needs components")
    parsed = _expr_rows(chart, comps, f"section {name}", (chart.n_fields,))
    return SectionDecl(SectionE(chart, tuple(parsed)), body.get("solution"))


def _build_jetfield(chart, body, name):
    frows = body.get("F")
    if frows is None:
        raise MissingArgument(f"[jetfield.{name}] needs an F table")
    ftab = _expr_rows(chart, frows, f"jetfield {name} F",
                      (chart.n_fields, chart.n_plus_1))
    F = {(y, x): ftab[yi][xi]
         for yi, y in enumerate(chart.fiber_names)
         for xi, x in enumerate(chart.base_names)}
    G = {}
    if "G" in body:
        gtab = _expr_rows(chart, body["G"], f"jetfield {name} G",
                          (chart.n_fields, chart.n_plus_1, chart.n_plus_1))
        for yi, y in enumerate(chart.fiber_names):
            for ri, xr in enumerate(chart.base_names):
                for mi, xm in enumerate(chart.base_names):
                    G[(y, xr, xm)] = gtab[yi][ri][mi]
    return JetFieldDecl(JetField2(chart, F, G), body.get("el_solution"),
                        tuple(body.get("integral_sections", [])))


def _build_diffeo(chart, body, name):
    base = body.get("base", [x for x in chart.base_names])
    base = [b if isinstance(b, str) else b for b in base]
    fiber = body.get("fiber")
    if fiber is None:
        raise MissingArgument(f"[diffeo.{name}] needs fiber components")
    base_exprs = _expr_rows(chart, list(base), f"diffeo {name} base",
                            (chart.n_plus_1,))
    fiber_exprs = _expr_rows(chart, fiber, f"diffeo {name} fiber",
                             (chart.n_fields,))
    inverse = None
    if "base_inverse" in body:
        inv = _expr_rows(chart, body["base_inverse"], f"diffeo {name} inverse",
                         (chart.n_plus_1,))
        inverse = dict(zip(chart.base_names, inv))
    fmap = FiberedMap(chart,
                      dict(zip(chart.base_names, base_exprs)),
                      dict(zip(chart.fiber_names, fiber_exprs)),
                      base_inverse=inverse)
    return DiffeoDecl(fmap, body.get("symmetry"))


def build_problem(tree):
    bundle = tree.get("bundle")
    if not bundle or "base" not in bundle or "fiber" not in bundle:
        raise ParseError("a [bundle] block with base and fiber is required")
    chart = make_chart(bundle["base"], bundle["fiber"])

    lag_block = tree.get("lagrangian")
    if not lag_block or "L" not in lag_block:
        raise ParseError("a [lagrangian] block with L is required")
    lag = Lagrangian(chart, chart.parse(lag_block["L"]))

    connections = {n: _build_connection(chart, body, n)
                   for n, body in sorted(tree.get("connection", {}).items())}
    vectorfields = {n: _build_vectorfield(chart, body, n)
                    for n, body in sorted(tree.get("vectorfield", {}).items())}
    sections = {n: _build_section(chart, body, n)
                for n, body in sorted(tree.get("section", {}).items())}
    jetfields = {n: _build_jetfield(chart, body, n)
                 for n, body in sorted(tree.get("jetfield", {}).items())}
    diffeos = {n: _build_diffeo(chart, body, n)
               for n, body in sorted(tree.get("diffeo", {}).items())}
    for jname, decl in jetfields.items():
        for sname in decl.integral_sections:
            if sname not in sections:
                raise MissingArgument(
                    f"jetfield {jname} references unknown section {sname!r}")

    num = tree.get("numeric", {})
    box = {}
    for entry in num.get("box", []):
        if (not isinstance(entry, list) or len(entry) != 3
                or not isinstance(entry[0], str)):
            raise ParseError("numeric box entries are [\"name\", lo, hi]")
        chart.canonical_name(entry[0])
        box[entry[0]] = (float(entry[1]), float(entry[2]))
    guards = tuple(parse_guard(chart, g) for g in num.get("require", []))
    numeric = NumericSettings(
        seed=int(num.get("seed", 20240808)),
        samples=int(num.get("samples", 100)),
        tol=float(num.get("tol", 1e-9)),
        tol_fd=float(num.get("tol_fd", 1e-6)),
        symmetry_samples=int(num.get("symmetry_samples", 200)),
        box=box,
        guards=guards)

    return Problem(chart, lag, connections, vectorfields, sections,
                   jetfields, diffeos, numeric)


def parse_problem(path):
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return build_problem(parse_toml_subset(text))
