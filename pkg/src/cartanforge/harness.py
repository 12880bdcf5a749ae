"""Numeric verification layer and the executable identity catalog.

Checks are deterministic: every sample stream comes from ``random.Random``
seeded from the problem's numeric settings, variables are drawn in sorted
order, and reports render with sorted keys, so two runs with the same seed
produce byte-identical output.

Points violating a declared guard (for example a determinant kept away from
zero) are redrawn; domain errors outside the guards propagate with the
offending point attached.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field

from . import expr as ex
from .canonical import contact_basis, contact_reduce, prolong_diffeo
from .chart import prolong_section
from .connection import integral_residual2
from .errors import NumericDomain
from .forms import (
    Form,
    bracket,
    exterior_d,
    jet_space,
    pullback,
    pullback_by_section,
    volume_form,
)
from .lagrangian import cartan_forms, energy_density, legendre_difference, jetfield_el
from .noether import check_conservation, noether_current, total_variation


@dataclass(frozen=True)
class IdentityCheck:
    name: str
    lhs: object                 # Expr or Form
    rhs: object
    box: dict = field(default_factory=dict, compare=False)
    samples: int = 100
    tol: float = 1e-9
    seed: int = 20240808
    guards: tuple = ()


@dataclass(frozen=True)
class CheckResult:
    name: str
    status: str                 # pass | fail | skip
    max_dev: object = None      # float for numeric checks
    witness: dict = field(default_factory=dict, compare=False)
    detail: str = ""

    def as_json_obj(self):
        return {"name": self.name, "status": self.status,
                "max_dev": self.max_dev, "witness": self.witness}


def draw_point(rng, names, box, guards=(), max_tries=1000):
    for _ in range(max_tries):
        pt = {n: rng.uniform(*box.get(n, (-1.0, 1.0))) for n in sorted(names)}
        if all(g.holds(pt) for g in guards):
            return pt
    raise NumericDomain("could not draw a sample point satisfying the guards")


def _free_names(obj):
    if isinstance(obj, Form):
        out = set()
        for c in obj.coeffs.values():
            out |= ex.free_vars(c)
        return out
    return set(ex.free_vars(obj))


def _deviation(lhs, rhs, pt):
    if isinstance(lhs, Form) or isinstance(rhs, Form):
        keys = set(lhs.coeffs) | set(rhs.coeffs)
        dev = 0.0
        for k in keys:
            a = ex.evaluate_numeric(lhs.coeffs.get(k, ex.ZERO), pt)
            b = ex.evaluate_numeric(rhs.coeffs.get(k, ex.ZERO), pt)
            dev = max(dev, abs(a - b))
        return dev
    return abs(ex.evaluate_numeric(lhs, pt) - ex.evaluate_numeric(rhs, pt))


def numeric_check(check: IdentityCheck):
    """Sample both sides; pass iff the worst deviation stays within tol."""
    names = _free_names(check.lhs) | _free_names(check.rhs)
    for g in check.guards:
        names |= ex.free_vars(g.expr)
    rng = random.Random(check.seed)
    worst = 0.0
    witness = {}
    for _ in range(check.samples):
        pt = draw_point(rng, names, check.box, check.guards)
        try:
            dev = _deviation(check.lhs, check.rhs, pt)
        except NumericDomain as err:
            raise NumericDomain(f"{err} at point {_round_point(pt)}") from err
        if dev > worst:
            worst, witness = dev, pt
    status = "pass" if worst <= check.tol else "fail"
    return CheckResult(check.name, status, worst, _round_point(witness))


def _round_point(pt):
    return {k: round(v, 12) for k, v in sorted(pt.items())}


def numeric_zero(e, settings, samples=None, tol=None, extra_names=()):
    """Seeded |e| <= tol sampling used as the fallback symmetry test."""
    chk = IdentityCheck("zero", e, ex.ZERO, box=settings.box,
                        samples=samples or settings.symmetry_samples,
                        tol=tol if tol is not None else settings.tol,
                        seed=settings.seed, guards=settings.guards)
    return numeric_check(chk)


# ---------------------------------------------------------------------------
# the identity catalog
# ---------------------------------------------------------------------------

def _sym(name, ok, detail=""):
    return CheckResult(name, "pass" if ok else "fail",
                       0.0 if ok else None, {}, detail)


def _skip(name, why):
    return CheckResult(name, "skip", None, {}, why)


def _central_difference(L, coord, pt, h=1e-5):
    hi = dict(pt)
    lo = dict(pt)
    hi[coord] += h
    lo[coord] -= h
    return (ex.evaluate_numeric(L, hi) - ex.evaluate_numeric(L, lo)) / (2 * h)


def _seeded_gamma_tables(problem, rng, count):
    ch = problem.chart
    names = list(ch.e_coords())
    tables = []
    for _ in range(count):
        table = {}
        for y in ch.fiber_names:
            for x in ch.base_names:
                terms = [ex.Rat(random_rational(rng))]
                for n in names:
                    terms.append(ex.mul(ex.Rat(random_rational(rng)), ex.var(n)))
                table[(y, x)] = ex.add(*terms)
        tables.append(table)
    return tables


def random_rational(rng, lo=-2, hi=2, dens=(1, 2)):
    from fractions import Fraction
    return Fraction(rng.randint(lo, hi), rng.choice(dens))


def run_identity_catalog(problem, seed=None, samples=None, tol=None):
    """Run every applicable identity for a problem; deterministic order."""
    num = problem.numeric
    seed = num.seed if seed is None else seed
    samples = num.samples if samples is None else samples
    tol = num.tol if tol is None else tol
    ch = problem.chart
    lag = problem.lagrangian
    entries = []

    # finite-difference validation of dL/dz for every jet coordinate
    rng = random.Random(seed)
    for coord in ch.jet_coords():
        name = f"finite-difference[dL/d{coord}]"
        sym = ex.differentiate(lag.L, coord, declared=ch.jet_coords())
        vars_needed = ex.free_vars(lag.L) | {coord}
        for g in num.guards:
            vars_needed |= ex.free_vars(g.expr)
        worst, witness = 0.0, {}
        for _ in range(samples):
            pt = draw_point(rng, vars_needed, num.box, num.guards)
            got = ex.evaluate_numeric(sym, pt)
            want = _central_difference(lag.L, coord, pt)
            dev = abs(got - want) / (1.0 + abs(want))
            if dev > worst:
                worst, witness = dev, pt
        status = "pass" if worst <= num.tol_fd else "fail"
        entries.append(CheckResult(name, status, worst, _round_point(witness)))

    # canonical forms: both construction paths and closedness of the
    # Poincare-Cartan sequence
    try:
        cf = cartan_forms(lag)
        entries.append(_sym("cartan-intrinsic-vs-display", True))
    except AssertionError as err:
        entries.append(_sym("cartan-intrinsic-vs-display", False, str(err)))
        return SuiteReport(tuple(entries))
    entries.append(_sym("cartan-domega-closed",
                        exterior_d(cf.omega).is_zero()))

    # contact annihilation for every declared section
    for sname, decl in sorted(problem.sections.items()):
        psi = prolong_section(decl.section)
        ok = all(pullback_by_section(psi, th).is_zero()
                 for th in contact_basis(ch))
        entries.append(_sym(f"contact-annihilation[{sname}]", ok))

    # energy and Legendre identities need at least one connection
    if problem.connections:
        rng_g = random.Random(seed + 1)
        gammas = _seeded_gamma_tables(problem, rng_g, 3)
        for cname, conn in sorted(problem.connections.items()):
            try:
                energy_density(lag, conn)  # asserts intrinsic == display
                entries.append(_sym(f"energy-intrinsic-vs-display[{cname}]", True))
            except AssertionError as err:
                entries.append(_sym(f"energy-intrinsic-vs-display[{cname}]",
                                    False, str(err)))
            ok = True
            for table in gammas:
                e0 = energy_density(lag, conn)
                e1 = energy_density(lag, conn.shift(table))
                shift = volume_form(jet_space(ch)).scale(ex.sub(e1.E, e0.E))
                ok = ok and (shift - legendre_difference(lag, table)).is_zero()
            entries.append(_sym(f"legendre-linearity[{cname}]", ok))

            frame = conn.horizontal_frame()
            from .connection import curvature
            R = curvature(conn)
            okc = True
            for i, xm in enumerate(ch.base_names):
                for j in range(i + 1, ch.n_plus_1):
                    br = bracket(frame[i], frame[j])
                    for y in ch.fiber_names:
                        okc = okc and ex.sub(
                            R.coefficient(y, xm, ch.base_names[j]),
                            br.component(y)).is_zero()
            entries.append(_sym(f"curvature-bracket[{cname}]", okc))
    else:
        entries.append(_skip("energy-intrinsic-vs-display", "no connections declared"))
        entries.append(_skip("legendre-linearity", "no connections declared"))
        entries.append(_skip("curvature-bracket", "no connections declared"))

    # sections marked as solutions (or explicitly not)
    from .lagrangian import derive_el
    el = derive_el(lag)
    for sname, decl in sorted(problem.sections.items()):
        if decl.solution is None:
            continue
        res = el.residuals_along(decl.section)
        vanished = all(r.is_zero() for r in res.values())
        name = f"el-solution[{sname}]"
        if decl.solution:
            entries.append(_sym(name, vanished,
                                "" if vanished else _residual_text(res)))
        else:
            entries.append(_sym(f"el-control[{sname}]", not vanished,
                                "control section unexpectedly solves the equations"
                                if vanished else ""))

    # symmetries and conservation
    sym_fields = []
    any_symmetry_decl = any(d.symmetry is not None
                            for d in problem.vectorfields.values())
    for vname_, decl in sorted(problem.vectorfields.items()):
        if decl.symmetry is None:
            continue
        rep = total_variation(lag, decl.vf)
        name = f"symmetry[{vname_}]"
        if decl.check == "numeric" and not rep.is_symmetry:
            nres = numeric_zero(rep.variation, num)
            got = nres.status == "pass"
            entries.append(CheckResult(name,
                                       "pass" if got == bool(decl.symmetry) else "fail",
                                       nres.max_dev, nres.witness,
                                       "numeric fallback"))
        else:
            got = rep.is_symmetry
            entries.append(_sym(name, got == bool(decl.symmetry),
                                "" if got == bool(decl.symmetry)
                                else f"delta = {ex.to_text(rep.variation)}"))
        if decl.symmetry and got:
            sym_fields.append((vname_, decl))
    if not any_symmetry_decl:
        entries.append(_skip("symmetry", "no symmetry expectations declared"))

    solutions = [(n, d) for n, d in sorted(problem.sections.items()) if d.solution]
    for vname_, decl in sym_fields:
        cur = noether_current(lag, decl.vf)
        for sname, sdecl in solutions:
            name = f"noether-conservation[{vname_},{sname}]"
            symrep = check_conservation(cur, sdecl.section)
            if not symrep.conserved and decl.check == "numeric":
                numrep = check_conservation(
                    cur, sdecl.section, mode="numeric",
                    samples=samples, tol=tol, seed=seed)
                entries.append(CheckResult(name, "pass" if numrep.conserved
                                           else "fail", numrep.max_dev,
                                           numrep.witness, "numeric fallback"))
            else:
                numrep = check_conservation(cur, sdecl.section, mode="numeric",
                                            samples=samples, tol=tol, seed=seed)
                ok = symrep.conserved and numrep.conserved
                entries.append(CheckResult(name, "pass" if ok else "fail",
                                           numrep.max_dev, numrep.witness))

    # declared jet fields
    prob_el = jetfield_el(lag)
    for jname, decl in sorted(problem.jetfields.items()):
        if decl.el_solution is None:
            continue
        rep = prob_el.check(decl.jf)
        ok = rep.solves() == bool(decl.el_solution)
        detail = "" if ok else (
            f"sopde={rep.is_sopde} omega_residual={rep.omega_residual.describe()}")
        entries.append(_sym(f"jetfield-el[{jname}]", ok, detail))
        for sname in decl.integral_sections:
            sdecl = problem.sections[sname]
            psi = prolong_section(sdecl.section)
            fr, gr = integral_residual2(decl.jf, psi)
            okk = all(v.is_zero() for v in fr.values()) and \
                all(v.is_zero() for v in gr.values())
            entries.append(_sym(f"jetfield-integral[{jname},{sname}]", okk))

    # declared diffeomorphisms preserve the contact module
    for dname, decl in sorted(problem.diffeos.items()):
        cm = prolong_diffeo(decl.diffeo)
        ok = all(contact_reduce(pullback(cm, th)).reduced.is_zero()
                 for th in contact_basis(ch))
        entries.append(_sym(f"diffeo-contact[{dname}]", ok))
        if decl.symmetry:
            pulled = pullback(cm, cf.theta)
            entries.append(_sym(f"diffeo-symmetry[{dname}]",
                                (pulled - cf.theta).is_zero()))

    return SuiteReport(tuple(entries))


def _residual_text(res):
    return "; ".join(f"{k}: {ex.to_text(v)}" for k, v in sorted(res.items()))


@dataclass(frozen=True)
class SuiteReport:
    entries: tuple

    @property
    def passed(self):
        return all(e.status != "fail" for e in self.entries)

    def to_text(self):
        lines = []
        for e in self.entries:
            mark = {"pass": "PASS", "fail": "FAIL", "skip": "skip"}[e.status]
            extra = ""
            if e.max_dev is not None:
                extra = f"  max_dev={e.max_dev:.3e}"
            if e.detail:
                extra += f"  ({e.detail})"
            lines.append(f"[{mark}] {e.name}{extra}")
        verdict = "all checks passed" if self.passed else "FAILURES present"
        lines.append(verdict)
        return "\n".join(lines)

    def to_json(self):
        return json.dumps({"suite": [e.as_json_obj() for e in self.entries]},
                          sort_keys=True, indent=2)
