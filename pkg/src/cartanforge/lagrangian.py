"""Lagrangian densities and the structures they induce.

Everything is phrased against the chart's volume form dx^0 ^ ... ^ dx^n.
The three canonical forms are built from the local expressions

    vartheta = p^A_mu theta^A ^ i(d/dx^mu) omega,   p^A_mu = dL/dv^A_mu
    Theta    = vartheta + L omega
    Omega    = -d Theta

and every construction with an independent intrinsic route (the contraction
through the vertical endomorphisms) is computed both ways and required to
agree, which pins the orientation conventions down mechanically.

Second-order jet symbols dd(y,x,x') are symmetric by construction, so the
Euler-Lagrange output is canonical in them and affine (quasi-linear) by
first-orderedness of the Lagrangian.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

from . import expr as ex
from .canonical import contact_form, vertical_endo_S, vertical_endo_V
from .chart import SectionE, v_name
from .connection import JetField2, jetfield_contract, sopde_project
from .errors import ChartMismatch, UnknownCoordinate
from .forms import (
    coordinate_field,
    exterior_d,
    interior,
    jet_space,
    scalar_form,
    volume_form,
    wedge,
    zero_form,
)


@dataclass(frozen=True)
class Lagrangian:
    chart: object
    L: object  # Expr over the jet coordinates

    def __post_init__(self):
        extra = ex.free_vars(self.L) - set(self.chart.jet_coords())
        if extra:
            raise UnknownCoordinate(
                f"Lagrangian references non-jet names {sorted(extra)}")

    def momentum(self, y, x):
        """p^A_mu = dL/dv^A_mu."""
        return ex.differentiate(self.L, v_name(y, x),
                                declared=self.chart.jet_coords())


@dataclass(frozen=True)
class CartanForms:
    vartheta: object
    theta: object   # Poincare-Cartan (n+1)-form
    omega: object   # Poincare-Cartan (n+2)-form


def vartheta_intrinsic(lag):
    """i(V) d(L omega) through honest contractions; the independent route."""
    return vertical_endo_V(lag.chart).contract_with_dL(lag.L)


@lru_cache(maxsize=64)
def cartan_forms(lag):
    """All three canonical forms; the display and intrinsic constructions of
    the first one are both evaluated and must agree."""
    ch = lag.chart
    js = jet_space(ch)
    om = volume_form(js)
    vt = zero_form(js, ch.n_plus_1)
    for y in ch.fiber_names:
        th = contact_form(ch, y)
        for x in ch.base_names:
            p = lag.momentum(y, x)
            if p.is_zero():
                continue
            vt = vt + wedge(th, interior(coordinate_field(js, x), om)).scale(p)
    if not (vt - vartheta_intrinsic(lag)).is_zero():
        raise AssertionError("vartheta construction paths disagree")
    big_theta = vt + om.scale(lag.L)
    big_omega = exterior_d(big_theta).scale(ex.MINUS_ONE)
    return CartanForms(vt, big_theta, big_omega)


# ---------------------------------------------------------------------------
# Euler-Lagrange system for sections
# ---------------------------------------------------------------------------

def total_derivative(chart, e, x):
    """Formal total derivative D_mu on the extended chart:
    d/dx^mu + v^B_mu d/dy^B + w^B_{nu,mu} d/dv^B_nu (symmetric w)."""
    declared = set(chart.extended_coords())
    out = ex.differentiate(e, x, declared=declared)
    for b in chart.fiber_names:
        out = ex.add(out, ex.mul(ex.var(v_name(b, x)),
                                 ex.differentiate(e, b, declared=declared)))
        for nu in chart.base_names:
            out = ex.add(out, ex.mul(ex.var(chart.w(b, nu, x)),
                                     ex.differentiate(e, v_name(b, nu),
                                                      declared=declared)))
    return out


@dataclass(frozen=True)
class ELSystem:
    chart: object
    components: dict = field(compare=False)  # fiber name -> Expr

    def residuals_along(self, phi: SectionE):
        """Substitute a section and its first and second derivatives."""
        ch = self.chart
        if phi.chart != ch:
            raise ChartMismatch("section lives on a different chart")
        sub = dict(phi.substitution())
        for y in ch.fiber_names:
            comp = phi.component(y)
            firsts = {}
            for x in ch.base_names:
                firsts[x] = ex.differentiate(comp, x, declared=ch.base_names)
                sub[v_name(y, x)] = firsts[x]
            for i, x1 in enumerate(ch.base_names):
                for x2 in ch.base_names[i:]:
                    sub[ch.w(y, x1, x2)] = ex.differentiate(
                        firsts[x1], x2, declared=ch.base_names)
        return {y: ex.substitute(c, sub) for y, c in self.components.items()}


def derive_el(lag):
    """EL_A = dL/dy^A - D_mu(dL/dv^A_mu) over the extended chart."""
    ch = lag.chart
    declared = set(ch.jet_coords())
    comps = {}
    for y in ch.fiber_names:
        e = ex.differentiate(lag.L, y, declared=declared)
        for x in ch.base_names:
            e = ex.sub(e, total_derivative(ch, lag.momentum(y, x), x))
        comps[y] = e
    return ELSystem(ch, comps)


# ---------------------------------------------------------------------------
# energy density and the Legendre difference
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EnergyDensity:
    chart: object
    connection: object
    E: object  # Expr over the jet coordinates

    def density(self):
        return volume_form(jet_space(self.chart)).scale(self.E)


def energy_density(lag, conn):
    """E = p^A_mu (v^A_mu - Gamma^A_mu) - L, checked against the contraction
    i(S - V) d(L omega) - L omega."""
    ch = lag.chart
    if conn.chart != ch:
        raise ChartMismatch("connection lives on a different chart")
    e = ex.mul(ex.MINUS_ONE, lag.L)
    for y in ch.fiber_names:
        for x in ch.base_names:
            e = ex.add(e, ex.mul(lag.momentum(y, x),
                                 ex.sub(ex.var(v_name(y, x)),
                                        conn.gamma[(y, x)])))
    diff = vertical_endo_S(ch, conn) - vertical_endo_V(ch)
    intrinsic = diff.contract_with_dL(lag.L) - volume_form(jet_space(ch)).scale(lag.L)
    if not (intrinsic - volume_form(jet_space(ch)).scale(e)).is_zero():
        raise AssertionError("energy construction paths disagree")
    return EnergyDensity(ch, conn, e)


def legendre_difference(lag, gamma_table):
    """The (n+1)-form  -gamma^A_mu p^A_mu omega;  equals the change of the
    energy density under nabla -> nabla + gamma for any base connection."""
    ch = lag.chart
    allowed = set(ch.e_coords())
    total = ex.ZERO
    for y in ch.fiber_names:
        for x in ch.base_names:
            g = gamma_table.get((y, x), ex.ZERO)
            if ex.free_vars(g) - allowed:
                raise UnknownCoordinate(
                    f"gamma[{y},{x}] must not depend on jet coordinates")
            total = ex.sub(total, ex.mul(g, lag.momentum(y, x)))
    return volume_form(jet_space(ch)).scale(total)


# ---------------------------------------------------------------------------
# Euler-Lagrange equations for jet fields
# ---------------------------------------------------------------------------

def g_unknown(y, x_rho, x_mu):
    return f"G({y},{x_rho},{x_mu})"


@dataclass(frozen=True)
class JetFieldReport:
    is_sopde: bool
    omega_residual: object          # the contracted Poincare-Cartan form
    omega_coefficients: dict = field(compare=False)
    reduced_residuals: dict = field(compare=False)
    curvature_residuals: dict = field(compare=False)

    def solves(self):
        return (self.is_sopde and self.omega_residual.is_zero()
                and all(v.is_zero() for v in self.curvature_residuals.values()))


@dataclass(frozen=True)
class LinearSolveReport:
    rank: int
    consistent: bool
    pivots: dict = field(compare=False)    # unknown -> Expr over frees + chart
    free: tuple = ()

    def is_unique(self):
        return self.consistent and not self.free


@dataclass(frozen=True)
class ELJetProblem:
    """Reduced equations for a second-order ansatz with the G-table unknown.

    Each equation is affine in the symbols G(y,x_rho,x_mu); `solve` runs a
    small fraction-free-ish elimination over the expression field and
    reports a parametrized solution set instead of failing on singular
    Hessians.
    """
    lagrangian: Lagrangian
    unknowns: tuple
    equations: dict = field(compare=False)  # fiber name -> Expr

    def solve(self):
        rows = []
        zero_sub = {u: ex.ZERO for u in self.unknowns}
        for y in sorted(self.equations):
            eq = self.equations[y]
            coeffs = [ex.differentiate(eq, u, declared=set(self.unknowns)
                                       | ex.free_vars(eq)) for u in self.unknowns]
            rhs = ex.mul(ex.MINUS_ONE, ex.substitute(eq, zero_sub))
            rows.append((coeffs, rhs))

        nuns = len(self.unknowns)
        pivot_cols = []
        used = [False] * len(rows)
        for col in range(nuns):
            pick = None
            for i, (coeffs, _) in enumerate(rows):
                if not used[i] and not coeffs[col].is_zero():
                    pick = i
                    break
            if pick is None:
                continue
            used[pick] = True
            pivot_cols.append((pick, col))
            pc = rows[pick][0][col]
            for j, (coeffs, rhs) in enumerate(rows):
                if j == pick or coeffs[col].is_zero():
                    continue
                factor = ex.div(coeffs[col], pc)
                newc = [ex.sub(c, ex.mul(factor, pcj))
                        for c, pcj in zip(coeffs, rows[pick][0])]
                newr = ex.sub(rhs, ex.mul(factor, rows[pick][1]))
                rows[j] = (newc, newr)

        consistent = True
        for i, (coeffs, rhs) in enumerate(rows):
            if not used[i] and all(c.is_zero() for c in coeffs) and not rhs.is_zero():
                consistent = False

        pivot_set = {col for _, col in pivot_cols}
        free = tuple(self.unknowns[c] for c in range(nuns) if c not in pivot_set)
        pivots = {}
        for i, col in pivot_cols:
            coeffs, rhs = rows[i]
            expr = rhs
            for c in range(nuns):
                if c == col or coeffs[c].is_zero():
                    continue
                expr = ex.sub(expr, ex.mul(coeffs[c], ex.var(self.unknowns[c])))
            pivots[self.unknowns[col]] = ex.div(expr, coeffs[col])
        return LinearSolveReport(len(pivot_cols), consistent, pivots, free)

    def check(self, yf: JetField2):
        """Full report for a candidate jet field."""
        from .connection import jetfield_curvature_residuals
        lag = self.lagrangian
        ch = lag.chart
        _, is_sopde = sopde_project(yf)
        omega_l = cartan_forms(lag).omega
        contracted = jetfield_contract(yf, omega_l)
        coeffs = {tuple(contracted.space.coords[i] for i in key): c
                  for key, c in contracted.coeffs.items()}
        gsub = {g_unknown(y, xr, xm): yf.G[(y, xr, xm)]
                for y in ch.fiber_names
                for xr in ch.base_names for xm in ch.base_names}
        reduced = {y: ex.substitute(eq, gsub) for y, eq in self.equations.items()}
        return JetFieldReport(is_sopde, contracted, coeffs, reduced,
                              jetfield_curvature_residuals(yf))


def jetfield_el(lag):
    """Equations dL/dy^A - D^Y_mu(dL/dv^A_mu) = 0 for a second-order field,
    with D^Y_mu = d/dx^mu + v^B_mu d/dy^B + G^B_{rho,mu} d/dv^B_rho."""
    ch = lag.chart
    declared = set(ch.jet_coords())
    unknowns = tuple(g_unknown(y, xr, xm)
                     for y in ch.fiber_names
                     for xr in ch.base_names for xm in ch.base_names)
    eqs = {}
    for y in ch.fiber_names:
        e = ex.differentiate(lag.L, y, declared=declared)
        for xm in ch.base_names:
            p = lag.momentum(y, xm)
            dp = ex.differentiate(p, xm, declared=declared)
            for b in ch.fiber_names:
                dp = ex.add(dp, ex.mul(ex.var(v_name(b, xm)),
                                       ex.differentiate(p, b, declared=declared)))
                for xr in ch.base_names:
                    dp = ex.add(dp, ex.mul(ex.var(g_unknown(b, xr, xm)),
                                           ex.differentiate(p, v_name(b, xr),
                                                            declared=declared)))
            e = ex.sub(e, dp)
        eqs[y] = e
    return ELJetProblem(lag, unknowns, eqs)
