"""Immutable symbolic scalar expressions with a fixed canonical form.

Every coefficient in the geometric layers is an ``Expr``.  The normal form is
deliberately small and predictable:

* exact rational arithmetic (arbitrary-precision ``Fraction``),
* sums flattened, like terms merged, terms sorted by a total structural order,
* products flattened, distributed over sums (an explicit expand pass),
  same-base powers merged by adding exponents,
* powers carry rational exponents with denominator a power of two
  (``sqrt`` is represented as exponent 1/2),
* function applications at rational arguments fold when exact
  (sin(0) -> 0, abs(-3) -> 3, sqrt(4) -> 2, ...).

Nothing else is rewritten: no trig identities, no rational-function
cancellation such as (x^2-1)/(x-1).  Structural equality of normal forms is
the engine's notion of symbolic equality.

Differentiation of ``abs`` has no symbolic rule and raises, except through
even roots: d sqrt(abs(u)) = u' * sign(u) / (2*sqrt(abs(u))), with ``sign``
kept as an opaque factor that numeric evaluation resolves.  ``sign`` itself
differentiates to 0 (its jump at 0 is ignored; numeric checks sample away
from it with guards).
"""

from __future__ import annotations

import math
from fractions import Fraction

from .errors import (
    DomainFunction,
    NumericDomain,
    ParseError,
    UnboundVariable,
    UnknownVariable,
)

FUNCTIONS = ("sin", "cos", "exp", "log", "abs", "sign")

# Names the parser treats as syntax rather than ordinary identifiers.
RESERVED_NAMES = frozenset(FUNCTIONS) | {"sqrt", "d", "dd", "a", "b"}


class Expr:
    """Base class; concrete nodes are Rat, Var, Add, Mul, Pow, Func."""

    __slots__ = ("_skey", "_fvs", "_h")

    def key(self):
        # (rank, payload, children) nested tuples: a total structural order.
        k = getattr(self, "_skey", None)
        if k is None:
            k = self._make_key()
            object.__setattr__(self, "_skey", k)
        return k

    def fvs(self):
        s = getattr(self, "_fvs", None)
        if s is None:
            if isinstance(self, Rat):
                s = frozenset()
            elif isinstance(self, Var):
                s = frozenset((self.name,))
            elif isinstance(self, Add):
                s = frozenset().union(*(t.fvs() for t in self.terms))
            elif isinstance(self, Mul):
                s = frozenset().union(*(f.fvs() for f in self.factors))
            elif isinstance(self, Pow):
                s = self.base.fvs()
            else:
                s = self.arg.fvs()
            object.__setattr__(self, "_fvs", s)
        return s

    def __eq__(self, other):
        return isinstance(other, Expr) and self.key() == other.key()

    def __hash__(self):
        h = getattr(self, "_h", None)
        if h is None:
            h = hash(self.key())
            object.__setattr__(self, "_h", h)
        return h

    def __repr__(self):
        return f"Expr[{to_text(self)}]"

    def is_zero(self):
        return isinstance(self, Rat) and self.value == 0


class Rat(Expr):
    __slots__ = ("value",)

    def __init__(self, value):
        object.__setattr__(self, "value", Fraction(value))

    def __setattr__(self, name, value):
        raise AttributeError("Expr nodes are immutable")

    def _make_key(self):
        return (0, str(self.value), ())


class Var(Expr):
    __slots__ = ("name",)

    def __init__(self, name):
        if not name or not isinstance(name, str):
            raise UnknownVariable(f"invalid variable name: {name!r}")
        object.__setattr__(self, "name", name)

    def __setattr__(self, name, value):
        raise AttributeError("Expr nodes are immutable")

    def _make_key(self):
        return (1, self.name, ())


class Func(Expr):
    __slots__ = ("fname", "arg")

    def __init__(self, fname, arg):
        object.__setattr__(self, "fname", fname)
        object.__setattr__(self, "arg", arg)

    def __setattr__(self, name, value):
        raise AttributeError("Expr nodes are immutable")

    def _make_key(self):
        return (2, self.fname, (self.arg.key(),))


class Pow(Expr):
    __slots__ = ("base", "exponent")

    def __init__(self, base, exponent):
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "exponent", Fraction(exponent))

    def __setattr__(self, name, value):
        raise AttributeError("Expr nodes are immutable")

    def _make_key(self):
        return (3, str(self.exponent), (self.base.key(),))


class Mul(Expr):
    __slots__ = ("factors",)

    def __init__(self, factors):
        object.__setattr__(self, "factors", tuple(factors))

    def __setattr__(self, name, value):
        raise AttributeError("Expr nodes are immutable")

    def _make_key(self):
        return (4, "", tuple(f.key() for f in self.factors))


class Add(Expr):
    __slots__ = ("terms",)

    def __init__(self, terms):
        object.__setattr__(self, "terms", tuple(terms))

    def __setattr__(self, name, value):
        raise AttributeError("Expr nodes are immutable")

    def _make_key(self):
        return (5, "", tuple(t.key() for t in self.terms))


ZERO = Rat(0)
ONE = Rat(1)
MINUS_ONE = Rat(-1)
HALF = Rat(Fraction(1, 2))


def rat(p, q=1):
    return Rat(Fraction(p, q))


def var(name):
    return Var(name)


# ---------------------------------------------------------------------------
# canonicalizing constructors
# ---------------------------------------------------------------------------

def _split_coeff(e):
    """Split a canonical term into (rational coefficient, monic part)."""
    if isinstance(e, Rat):
        return e.value, ONE
    if isinstance(e, Mul) and isinstance(e.factors[0], Rat):
        rest = e.factors[1:]
        monic = rest[0] if len(rest) == 1 else Mul(rest)
        return e.factors[0].value, monic
    return Fraction(1), e


def add(*terms):
    """Canonical sum: flatten, merge like terms, sort, drop zeros."""
    flat = []
    stack = list(terms)
    while stack:
        t = stack.pop()
        if isinstance(t, Add):
            stack.extend(t.terms)
        else:
            flat.append(t)
    coeffs = {}
    monics = {}
    for t in flat:
        c, m = _split_coeff(t)
        if c == 0:
            continue
        k = m.key()
        coeffs[k] = coeffs.get(k, Fraction(0)) + c
        monics[k] = m
    out = []
    for k in sorted(coeffs):
        c = coeffs[k]
        if c == 0:
            continue
        m = monics[k]
        if isinstance(m, Rat):  # the pure-number bucket (monic is ONE)
            out.append(Rat(c))
        elif c == 1:
            out.append(m)
        else:
            out.append(_attach_coeff(c, m))
    if not out:
        return ZERO
    if len(out) == 1:
        return out[0]
    out.sort(key=lambda e: e.key())
    return Add(out)


def _attach_coeff(c, monic):
    if isinstance(monic, Mul):
        return Mul((Rat(c),) + monic.factors)
    return Mul((Rat(c), monic))


def _base_exp(f):
    """View a canonical factor as (base, exponent)."""
    if isinstance(f, Pow):
        return f.base, f.exponent
    return f, Fraction(1)


def mul(*factors):
    """Canonical product: flatten, distribute over sums, merge powers."""
    flat = []
    coeff = Fraction(1)
    stack = list(factors)
    while stack:
        f = stack.pop()
        if isinstance(f, Mul):
            stack.extend(f.factors)
        elif isinstance(f, Rat):
            coeff *= f.value
        else:
            flat.append(f)
    if coeff == 0:
        return ZERO

    sums = [f for f in flat if isinstance(f, Add)]
    if sums:
        # expand pass: distribute the whole product over every sum factor
        rest = [f for f in flat if not isinstance(f, Add)]
        products = [[Rat(coeff)] + rest]
        for s in sums:
            products = [p + [t] for p in products for t in s.terms]
        return add(*(mul(*p) for p in products))

    # merge same-base powers
    by_base = {}
    order = []
    for f in flat:
        b, e = _base_exp(f)
        k = b.key()
        if k in by_base:
            by_base[k] = (b, by_base[k][1] + e, None)
        else:
            by_base[k] = (b, e, f)
            order.append(k)
    out = []
    for k in order:
        b, e, orig = by_base[k]
        if orig is not None:  # untouched canonical factor
            out.append(orig)
            continue
        if e == 0:
            continue
        p = pow_(b, e)
        c, m = _split_coeff(p)
        coeff *= c
        if isinstance(m, Mul):
            out.extend(m.factors)
        elif not isinstance(m, Rat) or m.value != 1:
            out.append(m)
    if coeff == 0:
        return ZERO
    # pow_ folding can reintroduce merged bases; settle by one more pass
    seen = {}
    for f in out:
        b, e = _base_exp(f)
        k = b.key()
        seen[k] = (b, seen[k][1] + e) if k in seen else (b, e)
    if len(seen) != len(out):
        return mul(Rat(coeff), *[pow_(b, e) for b, e in seen.values()])

    out.sort(key=lambda e: e.key())
    if not out:
        return Rat(coeff)
    if coeff == 1 and len(out) == 1:
        return out[0]
    if coeff == 1:
        return Mul(out)
    return Mul([Rat(coeff)] + out)


def _nth_root_exact(fr, n):
    """Exact n-th root of a nonnegative Fraction, or None."""
    def iroot(m):
        if m in (0, 1):
            return m
        r = round(m ** (1.0 / n))
        for cand in (r - 1, r, r + 1):
            if cand >= 0 and cand ** n == m:
                return cand
        return None

    p = iroot(fr.numerator)
    q = iroot(fr.denominator)
    if p is None or q is None:
        return None
    return Fraction(p, q)


def pow_(base, exponent):
    """Canonical power with rational exponent."""
    e = Fraction(exponent)
    if e == 0:
        return ONE
    if e == 1:
        return base

    if isinstance(base, Rat):
        v = base.value
        if e.denominator == 1:
            if v == 0 and e < 0:
                raise NumericDomain("0 raised to a negative power")
            return Rat(v ** e.numerator) if e > 0 else Rat(Fraction(1) / v ** (-e.numerator))
        if v >= 0:
            root = _nth_root_exact(v, e.denominator)
            if root is not None:
                return pow_(Rat(root), Fraction(e.numerator))
        return Pow(base, e)

    if isinstance(base, Pow):
        inner, ei = base.base, base.exponent
        if ei.denominator == 1 and ei.numerator % 2 == 0 and e.denominator != 1:
            # (u^even)^(p/q) == (|u|^even)^(p/q); keep the abs explicit
            return pow_(Func("abs", inner), ei * e)
        return pow_(inner, ei * e)

    if isinstance(base, Mul):
        if e.denominator == 1:
            return mul(*(pow_(f, e) for f in base.factors))
        return Pow(base, e)

    if isinstance(base, Add):
        if e.denominator == 1 and e > 0:
            result = ONE
            for _ in range(e.numerator):
                result = mul(result, base)
            return result
        return Pow(base, e)

    return Pow(base, e)


_EXACT_AT = {
    "sin": {Fraction(0): Fraction(0)},
    "cos": {Fraction(0): Fraction(1)},
    "exp": {Fraction(0): Fraction(1)},
    "log": {Fraction(1): Fraction(0)},
}


def func(fname, arg):
    """Canonical function application; sqrt lowers to exponent 1/2."""
    if fname == "sqrt":
        return pow_(arg, Fraction(1, 2))
    if fname not in FUNCTIONS:
        raise ParseError(f"unknown function {fname!r}")
    if isinstance(arg, Rat):
        table = _EXACT_AT.get(fname)
        if table is not None and arg.value in table:
            return Rat(table[arg.value])
        if fname == "abs":
            return Rat(abs(arg.value))
        if fname == "sign":
            v = arg.value
            return Rat(0 if v == 0 else (1 if v > 0 else -1))
    if fname == "abs" and isinstance(arg, Func) and arg.fname == "abs":
        return arg
    return Func(fname, arg)


def sub(a, b):
    return add(a, mul(MINUS_ONE, b))


def div(a, b):
    return mul(a, pow_(b, Fraction(-1)))


def normalize(e):
    """Rebuild bottom-up through the canonicalizing constructors.

    Idempotent: normal forms pass through unchanged.
    """
    if isinstance(e, (Rat, Var)):
        return e
    if isinstance(e, Add):
        return add(*(normalize(t) for t in e.terms))
    if isinstance(e, Mul):
        return mul(*(normalize(f) for f in e.factors))
    if isinstance(e, Pow):
        return pow_(normalize(e.base), e.exponent)
    if isinstance(e, Func):
        return func(e.fname, normalize(e.arg))
    raise TypeError(f"not an Expr: {e!r}")


def free_vars(e):
    return e.fvs()


# ---------------------------------------------------------------------------
# calculus
# ---------------------------------------------------------------------------

def differentiate(e, name, declared=None):
    """Exact partial derivative with respect to the variable `name`.

    Other variables are constants.  When `declared` is given, `name` must be
    in it.  ``abs`` admits no symbolic rule and raises DomainFunction unless
    its argument does not depend on `name`; rational powers of ``abs`` use
    the sign-factor rule (see module docstring).
    """
    if declared is not None and name not in declared:
        raise UnknownVariable(f"{name!r} is not a declared variable")
    return _diff(e, name)


def _diff(e, x):
    if x not in e.fvs():
        return ZERO
    if isinstance(e, Var):
        return ONE
    if isinstance(e, Add):
        return add(*(_diff(t, x) for t in e.terms))
    if isinstance(e, Mul):
        pieces = []
        for i, f in enumerate(e.factors):
            df = _diff(f, x)
            if df.is_zero():
                continue
            others = e.factors[:i] + e.factors[i + 1:]
            pieces.append(mul(df, *others))
        return add(*pieces) if pieces else ZERO
    if isinstance(e, Pow):
        b, n = e.base, e.exponent
        if isinstance(b, Func) and b.fname == "abs":
            du = _diff(b.arg, x)
            if du.is_zero():
                return ZERO
            return mul(Rat(n), pow_(b, n - 1), func("sign", b.arg), du)
        db = _diff(b, x)
        if db.is_zero():
            return ZERO
        return mul(Rat(n), pow_(b, n - 1), db)
    if isinstance(e, Func):
        du = _diff(e.arg, x)
        if e.fname == "sign":
            return ZERO
        if du.is_zero():
            return ZERO
        if e.fname == "sin":
            return mul(func("cos", e.arg), du)
        if e.fname == "cos":
            return mul(MINUS_ONE, func("sin", e.arg), du)
        if e.fname == "exp":
            return mul(e, du)
        if e.fname == "log":
            return mul(pow_(e.arg, Fraction(-1)), du)
        if e.fname == "abs":
            raise DomainFunction(
                "abs has no symbolic derivative rule (only even roots of abs do)")
    raise TypeError(f"not an Expr: {e!r}")


def substitute(e, bindings):
    """Simultaneous substitution of variables by expressions, normalized."""
    if not bindings:
        return normalize(e)
    return _subst(e, bindings)


def _subst(e, b):
    if isinstance(e, Rat):
        return e
    if isinstance(e, Var):
        return b.get(e.name, e)
    if isinstance(e, Add):
        return add(*(_subst(t, b) for t in e.terms))
    if isinstance(e, Mul):
        return mul(*(_subst(f, b) for f in e.factors))
    if isinstance(e, Pow):
        return pow_(_subst(e.base, b), e.exponent)
    if isinstance(e, Func):
        return func(e.fname, _subst(e.arg, b))
    raise TypeError(f"not an Expr: {e!r}")


def evaluate_numeric(e, point):
    """IEEE double evaluation; every free variable must be bound."""
    try:
        return _eval(e, point)
    except OverflowError as exc:
        raise NumericDomain(f"overflow: {exc}") from exc


def _eval(e, p):
    if isinstance(e, Rat):
        return float(e.value)
    if isinstance(e, Var):
        try:
            return float(p[e.name])
        except KeyError:
            raise UnboundVariable(f"no value bound for {e.name!r}") from None
    if isinstance(e, Add):
        return math.fsum(_eval(t, p) for t in e.terms)
    if isinstance(e, Mul):
        out = 1.0
        for f in e.factors:
            out *= _eval(f, p)
        return out
    if isinstance(e, Pow):
        b = _eval(e.base, p)
        n = e.exponent
        if n.denominator == 1:
            if b == 0.0 and n < 0:
                raise NumericDomain("division by zero")
            return b ** n.numerator
        if b < 0.0:
            raise NumericDomain(f"even root of negative value {b}")
        if b == 0.0 and n < 0:
            raise NumericDomain("division by zero")
        return b ** (n.numerator / n.denominator)
    if isinstance(e, Func):
        u = _eval(e.arg, p)
        if e.fname == "sin":
            return math.sin(u)
        if e.fname == "cos":
            return math.cos(u)
        if e.fname == "exp":
            return math.exp(u)
        if e.fname == "log":
            if u <= 0.0:
                raise NumericDomain(f"log of non-positive value {u}")
            return math.log(u)
        if e.fname == "abs":
            return abs(u)
        if e.fname == "sign":
            return float((u > 0.0) - (u < 0.0))
    raise TypeError(f"not an Expr: {e!r}")


# ---------------------------------------------------------------------------
# text form
# ---------------------------------------------------------------------------

def _paren(s):
    return f"({s})"


def _print_pow(e):
    num, den = e.exponent.numerator, e.exponent.denominator
    base = to_text(e.base)
    if isinstance(e.base, (Add, Mul)) or (isinstance(e.base, Rat)
                                          and (e.base.value < 0
                                               or e.base.value.denominator != 1)):
        base = _paren(base)
    if den == 1:
        return f"{base}^{num}"
    inner = base if num == 1 else f"{base}^{num}"
    while den > 1:
        if den % 2:
            raise ValueError(f"unprintable exponent denominator {den}")
        inner = f"sqrt({inner})"
        den //= 2
    return inner


def _print_factor(e):
    if isinstance(e, (Add,)):
        return _paren(to_text(e))
    if isinstance(e, Rat) and (e.value < 0):
        return _paren(to_text(e))
    if isinstance(e, Mul):
        return _paren(to_text(e))
    return to_text(e)


def to_text(e):
    """Canonical text; re-parses to a structurally equal expression."""
    if isinstance(e, Rat):
        return str(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Func):
        return f"{e.fname}({to_text(e.arg)})"
    if isinstance(e, Pow):
        return _print_pow(e)
    if isinstance(e, Mul):
        c, m = _split_coeff(e)
        if c < 0:
            return "-" + to_text(m if -c == 1 else _attach_coeff(-c, m))
        return "*".join(_print_factor(f) for f in e.factors)
    if isinstance(e, Add):
        parts = []
        for i, t in enumerate(e.terms):
            c, m = _split_coeff(t)
            if c < 0:
                body = to_text(_attach_coeff(-c, m) if -c != 1 or isinstance(m, Rat) else m)
                if isinstance(m, Rat):
                    body = str(-c * m.value)
                parts.append(("-" if i == 0 else " - ") + body)
            else:
                parts.append(("" if i == 0 else " + ") + to_text(t))
        return "".join(parts)
    raise TypeError(f"not an Expr: {e!r}")


# ---------------------------------------------------------------------------
# parser for the expression grammar
# ---------------------------------------------------------------------------
#
#   expr   := ['-'] term (('+'|'-') term)*
#   term   := factor (('*'|'/') factor)*
#   factor := base ('^' signed_int)?
#   base   := number | ident | func '(' expr ')' | jet '(' ident,... ')'
#           | '(' expr ')'
#
# Jet coordinate references d(y,x), dd(y,x,x), a(y,x), b(y,x,x) parse to
# variables with exactly that spelling; a chart may canonicalize them later.

_JET_ARITY = {"d": 2, "a": 2, "dd": 3, "b": 3}


class _Tokens:
    def __init__(self, text):
        self.text = text
        self.pos = 0
        self.toks = []
        self._scan()
        self.i = 0

    def _loc(self, pos):
        line = self.text.count("\n", 0, pos) + 1
        col = pos - (self.text.rfind("\n", 0, pos) + 1) + 1
        return line, col

    def _scan(self):
        t, n = self.text, len(self.text)
        i = 0
        while i < n:
            ch = t[i]
            if ch.isspace():
                i += 1
                continue
            if ch.isdigit():
                j = i + 1
                while j < n and t[j].isdigit():
                    j += 1
                if j < n and t[j] == ".":
                    j += 1
                    while j < n and t[j].isdigit():
                        j += 1
                if j < n and t[j] in "eE":
                    k = j + 1
                    if k < n and t[k] in "+-":
                        k += 1
                    if k < n and t[k].isdigit():
                        j = k + 1
                        while j < n and t[j].isdigit():
                            j += 1
                self.toks.append(("num", t[i:j], i))
                i = j
                continue
            if ch.isalpha() or ch == "_":
                j = i + 1
                while j < n and (t[j].isalnum() or t[j] == "_"):
                    j += 1
                self.toks.append(("ident", t[i:j], i))
                i = j
                continue
            if ch in "+-*/^(),":
                self.toks.append((ch, ch, i))
                i += 1
                continue
            line, col = self._loc(i)
            raise ParseError(f"unexpected character {ch!r}", line, col)
        self.toks.append(("end", "", n))

    def peek(self):
        return self.toks[self.i]

    def next(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, kind):
        tok = self.next()
        if tok[0] != kind:
            line, col = self._loc(tok[2])
            raise ParseError(f"expected {kind!r}, found {tok[1]!r}", line, col)
        return tok

    def error(self, msg, tok):
        line, col = self._loc(tok[2])
        raise ParseError(msg, line, col)


def parse(text, validate=None):
    """Parse expression text to a canonical Expr.

    `validate` is an optional callable invoked on every plain variable or jet
    reference name; it may raise, or return a canonical replacement name
    (used by charts to symmetrize second-jet index order).
    """
    toks = _Tokens(text)
    e = _parse_expr(toks, validate)
    tail = toks.peek()
    if tail[0] != "end":
        toks.error(f"unexpected trailing input {tail[1]!r}", tail)
    return e


def _parse_expr(toks, val):
    negate = False
    if toks.peek()[0] == "-":
        toks.next()
        negate = True
    e = _parse_term(toks, val)
    if negate:
        e = mul(MINUS_ONE, e)
    while toks.peek()[0] in ("+", "-"):
        op = toks.next()[0]
        t = _parse_term(toks, val)
        e = add(e, t) if op == "+" else sub(e, t)
    return e


def _parse_term(toks, val):
    e = _parse_factor(toks, val)
    while toks.peek()[0] in ("*", "/"):
        op = toks.next()[0]
        f = _parse_factor(toks, val)
        e = mul(e, f) if op == "*" else div(e, f)
    return e


def _parse_factor(toks, val):
    e = _parse_base(toks, val)
    if toks.peek()[0] == "^":
        toks.next()
        sign = 1
        if toks.peek()[0] == "-":
            toks.next()
            sign = -1
        tok = toks.expect("num")
        if not tok[1].isdigit():
            toks.error(f"exponent must be an integer, found {tok[1]!r}", tok)
        e = pow_(e, sign * int(tok[1]))
    return e


def _parse_base(toks, val):
    tok = toks.next()
    kind, text = tok[0], tok[1]
    if kind == "num":
        return Rat(Fraction(text))
    if kind == "(":
        e = _parse_expr(toks, val)
        toks.expect(")")
        return e
    if kind == "ident":
        if toks.peek()[0] == "(":
            if text == "sqrt" or text in FUNCTIONS:
                toks.next()
                arg = _parse_expr(toks, val)
                toks.expect(")")
                return func(text, arg)
            if text in _JET_ARITY:
                toks.next()
                args = [toks.expect("ident")[1]]
                for _ in range(_JET_ARITY[text] - 1):
                    toks.expect(",")
                    args.append(toks.expect("ident")[1])
                toks.expect(")")
                name = f"{text}({','.join(args)})"
                if val is not None:
                    name = val(name) or name
                return Var(name)
            toks.error(f"unknown function {text!r}", tok)
        if text in RESERVED_NAMES:
            toks.error(f"{text!r} is reserved and cannot stand alone", tok)
        if val is not None:
            text = val(text) or text
        return Var(text)
    toks.error(f"unexpected token {text!r}", tok)
