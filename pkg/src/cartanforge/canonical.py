"""Canonical structures of the first jet space.

Contact forms theta^A = dy^A - v^A_mu dx^mu, the structure form, contact
reduction, the holonomy test, the two vertical endomorphisms, and canonical
prolongation of vector fields and fiber-preserving maps.

The S endomorphism is always embedded through a connection: its covector
slots are dy^A - Gamma^A_mu dx^mu.  The connection-free version exists only
against an abstract dual frame, which this representation has no room for;
connection-independence of everything built from V alone is a tested
property instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import expr as ex
from .chart import SectionE, SectionJ1, v_name
from .errors import ChartMismatch, NotOnEChart
from .forms import (
    CoordMap,
    Form,
    VectorField,
    VectorValuedForm,
    coordinate_field,
    d_coord,
    exterior_d,
    interior,
    jet_space,
    pullback,
    pullback_by_section,
    scalar_form,
    volume_form,
    wedge,
    zero_form,
)


def contact_form(chart, y):
    """theta^A = dy^A - v^A_mu dx^mu for the fiber coordinate y."""
    js = jet_space(chart)
    th = d_coord(js, y)
    for x in chart.base_names:
        th = th - d_coord(js, x).scale(ex.var(v_name(y, x)))
    return th


def contact_basis(chart):
    return tuple(contact_form(chart, y) for y in chart.fiber_names)


def structure_form(chart):
    """The vertical-bundle-valued 1-form with components theta^A."""
    return VectorValuedForm("d/dy", contact_basis(chart))


def vertical_differential(phi: SectionE, at=None):
    """Projector matrix of T_yE onto the vertical part along Im(phi).

    Rows and columns follow the total-space coordinate order (base, fiber);
    base columns carry -d(phi^A)/d(x^mu), fiber columns the identity.  `at`
    may bind base coordinates to expressions to anchor the matrix at one
    point of the image.
    """
    ch = phi.chart
    nb, nf = ch.n_plus_1, ch.n_fields
    size = nb + nf
    m = [[ex.ZERO] * size for _ in range(size)]
    for ai, y in enumerate(ch.fiber_names):
        row = nb + ai
        for mi, x in enumerate(ch.base_names):
            slope = ex.differentiate(phi.component(y), x, declared=ch.base_names)
            if at:
                slope = ex.substitute(slope, at)
            m[row][mi] = ex.mul(ex.MINUS_ONE, slope)
        m[row][nb + ai] = ex.ONE
    return m


def _replace_differentials(a, repl):
    """Rewrite each basis covector index through `repl` (index -> 1-form)."""
    out = zero_form(a.space, a.degree)
    for key, c in a.coeffs.items():
        piece = scalar_form(a.space, c)
        for idx in key:
            one = repl.get(idx)
            if one is None:
                one = Form(a.space, 1, {(idx,): ex.ONE})
            piece = wedge(piece, one)
            if piece.is_zero():
                break
        out = out + piece
    return out


@dataclass(frozen=True)
class ContactReduction:
    reduced: Form
    combination: dict = field(compare=False)  # fiber name -> Form

    def in_ideal(self):
        return self.reduced.is_zero()


def contact_reduce(a):
    """Split a jet-space form as  a = sum_A theta^A ^ combination[A] + reduced.

    `reduced` contains no dy^A differentials; a 1-form lies in the contact
    module iff reduced == 0, and a higher form built by wedging contact forms
    against anything lands entirely in the combination part.
    """
    sp = a.space
    ch = sp.chart
    if sp != jet_space(ch):
        raise ChartMismatch("contact reduction expects a jet-space form")
    if a.degree == 0:
        return ContactReduction(a, {y: zero_form(sp, 0) for y in ch.fiber_names})

    fiber_idx = {sp.index(y): y for y in ch.fiber_names}

    # dy^A -> [theta-marker at the same slot] + v^A_mu dx^mu
    to_contact = {}
    from_contact = {}
    for i, y in fiber_idx.items():
        vdx = zero_form(sp, 1)
        for x in ch.base_names:
            vdx = vdx + d_coord(sp, x).scale(ex.var(v_name(y, x)))
        marker = Form(sp, 1, {(i,): ex.ONE})
        to_contact[i] = marker + vdx
        from_contact[i] = marker - vdx

    rewritten = _replace_differentials(a, to_contact)

    reduced = {}
    combo = {y: zero_form(sp, a.degree - 1) for y in ch.fiber_names}
    for key, c in rewritten.coeffs.items():
        pos = next((p for p, idx in enumerate(key) if idx in fiber_idx), None)
        if pos is None:
            reduced[key] = c
            continue
        y = fiber_idx[key[pos]]
        rest = key[:pos] + key[pos + 1:]
        sign = ex.rat((-1) ** pos)
        piece = Form(sp, a.degree - 1, {rest: ex.mul(sign, c)})
        combo[y] = combo[y] + piece
    combo = {y: _replace_differentials(f, from_contact) for y, f in combo.items()}
    return ContactReduction(Form(sp, a.degree, reduced), combo)


@dataclass(frozen=True)
class HolonomyReport:
    holonomic: bool
    residuals: tuple  # one base-space 1-form per fiber coordinate


def is_holonomic(psi: SectionJ1):
    """psi annihilates the structure form iff it is a prolongation."""
    res = tuple(pullback_by_section(psi, th)
                for th in contact_basis(psi.chart))
    return HolonomyReport(all(r.is_zero() for r in res), res)


@dataclass(frozen=True)
class VerticalEndomorphism:
    """Covector-slot representation of S, V, or their difference.

    One 1-form per fiber coordinate; the output slots are the fixed pattern
    d/dv^A_nu (x) d/dx^nu summed over nu, which is all the contractions used
    anywhere in this package need.
    """
    kind: str
    chart: object
    covectors: tuple

    def component(self, y):
        return self.covectors[self.chart.fiber_names.index(y)]

    def __sub__(self, other):
        if self.chart != other.chart:
            raise ChartMismatch("endomorphisms on different charts")
        covs = tuple(a - b for a, b in zip(self.covectors, other.covectors))
        return VerticalEndomorphism(f"{self.kind}-{other.kind}", self.chart, covs)

    def contract_with_dL(self, lag_expr):
        """i(endo) d(L*omega), assembled through honest interior products.

        Contract the d/dv output slot against dL and the d/dx slot against
        the volume form, leaving covector ^ (n-form).
        """
        ch = self.chart
        js = jet_space(ch)
        dL = exterior_d(scalar_form(js, lag_expr))
        omega = volume_form(js)
        total = zero_form(js, ch.n_plus_1)
        for y, cov in zip(ch.fiber_names, self.covectors):
            for x in ch.base_names:
                slot = interior(coordinate_field(js, v_name(y, x)), dL).as_scalar()
                if slot.is_zero():
                    continue
                total = total + wedge(cov, interior(coordinate_field(js, x),
                                                    omega)).scale(slot)
        return total


def vertical_endo_V(chart):
    return VerticalEndomorphism("V", chart, contact_basis(chart))


def vertical_endo_S(chart, connection):
    if connection.chart != chart:
        raise ChartMismatch("connection lives on a different chart")
    js = jet_space(chart)
    covs = []
    for y in chart.fiber_names:
        cov = d_coord(js, y)
        for x in chart.base_names:
            cov = cov - d_coord(js, x).scale(connection.gamma[(y, x)])
        covs.append(cov)
    return VerticalEndomorphism("S", chart, tuple(covs))


def prolong_vectorfield(Z: VectorField):
    """Canonical prolongation of a vector field on the total space.

    v-components:  d(beta^A)/dx^mu
                 - v^A_rho (d(alpha^rho)/dx^mu + v^B_mu d(alpha^rho)/dy^B)
                 + v^B_mu d(beta^A)/dy^B
    which covers non-projectable fields; when alpha does not depend on y the
    projectable formula is recovered.
    """
    ch = Z.space.chart
    from .forms import total_space
    if Z.space != total_space(ch):
        raise NotOnEChart("prolongation expects a vector field on the total space")
    declared = set(ch.e_coords())
    alpha = {x: Z.component(x) for x in ch.base_names}
    beta = {y: Z.component(y) for y in ch.fiber_names}
    comps = dict(Z.comps)
    for y in ch.fiber_names:
        for mu in ch.base_names:
            g = ex.differentiate(beta[y], mu, declared=declared)
            for rho in ch.base_names:
                inner = ex.differentiate(alpha[rho], mu, declared=declared)
                for b in ch.fiber_names:
                    inner = ex.add(inner, ex.mul(
                        ex.var(v_name(b, mu)),
                        ex.differentiate(alpha[rho], b, declared=declared)))
                g = ex.sub(g, ex.mul(ex.var(v_name(y, rho)), inner))
            for b in ch.fiber_names:
                g = ex.add(g, ex.mul(ex.var(v_name(b, mu)),
                                     ex.differentiate(beta[y], b, declared=declared)))
            comps[v_name(y, mu)] = g
    return VectorField(jet_space(ch), comps)


def pullback_by_map(phi_map, a):
    """Pull a form back by a fiber-preserving map.

    Total-space forms use the map itself; jet-space forms use its canonical
    prolongation (which may require the declared base inverse).
    """
    from .forms import total_space
    ch = phi_map.chart
    if a.space == total_space(ch):
        return pullback(phi_map.total_map(), a)
    if a.space == jet_space(ch):
        return pullback(prolong_diffeo(phi_map), a)
    raise ChartMismatch("form lives on neither the total nor the jet space")


def prolong_diffeo(phi_map):
    """Jet-space coordinate map of a fiber-preserving diffeomorphism.

    v'^A_mu = (dPhi^A/dx^nu + dPhi^A/dy^B v^B_nu) * (J^-1)^nu_mu with J the
    Jacobian of the base part; strong maps need no declared inverse.
    """
    ch = phi_map.chart
    js = jet_space(ch)
    jinv = phi_map.inverse_base_jacobian()
    declared = set(ch.e_coords())
    comps = dict(phi_map.base_components)
    comps.update(phi_map.fiber_components)
    for y in ch.fiber_names:
        fy = phi_map.fiber_components[y]
        for mu in ch.base_names:
            total = ex.ZERO
            for nu in ch.base_names:
                slope = ex.differentiate(fy, nu, declared=declared)
                for b in ch.fiber_names:
                    slope = ex.add(slope, ex.mul(
                        ex.differentiate(fy, b, declared=declared),
                        ex.var(v_name(b, nu))))
                total = ex.add(total, ex.mul(slope, jinv[(nu, mu)]))
            comps[v_name(y, mu)] = total
    return CoordMap(js, js, comps)
