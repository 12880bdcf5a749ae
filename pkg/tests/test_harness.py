import os

import pytest

from cartanforge import expr as ex
from cartanforge import harness as hz
from cartanforge.errors import NumericDomain
from cartanforge.problem import Guard, parse_problem

PROBLEMS = os.path.join(os.path.dirname(__file__), "..", "problems")


def prob(name):
    return parse_problem(os.path.join(PROBLEMS, name + ".toml"))


def test_zero_equals_zero():
    chk = hz.IdentityCheck("zero", ex.ZERO, ex.ZERO)
    res = hz.numeric_check(chk)
    assert res.status == "pass" and res.max_dev == 0.0


def test_derivative_vs_finite_difference():
    x = ex.var("x")
    e = ex.pow_(x, 3)
    d = ex.differentiate(e, "x")
    # compare against a manual central difference through the check itself
    got = hz.numeric_check(hz.IdentityCheck(
        "cube", d, ex.mul(ex.rat(3), ex.pow_(x, 2)),
        box={"x": (-2.0, 2.0)}, samples=100, tol=1e-6))
    assert got.status == "pass"


def test_failing_identity_reports_witness():
    x = ex.var("x")
    chk = hz.IdentityCheck("not-an-identity", x, ex.pow_(x, 2),
                           box={"x": (0.0, 2.0)}, samples=200, tol=1e-9)
    res = hz.numeric_check(chk)
    assert res.status == "fail"
    assert res.max_dev > 0.5
    assert abs(res.witness["x"] - 2.0) < 0.6  # |x - x^2| peaks at the edge


def test_guards_redraw_points():
    x = ex.var("x")
    chk = hz.IdentityCheck("guarded-log", ex.func("log", x), ex.func("log", x),
                           box={"x": (-1.0, 1.0)}, samples=50,
                           guards=(Guard(x, ">", 0.1),))
    assert hz.numeric_check(chk).status == "pass"


def test_domain_error_propagates_with_point():
    x = ex.var("x")
    chk = hz.IdentityCheck("unguarded-log", ex.func("log", x),
                           ex.func("log", x), box={"x": (-1.0, -0.5)}, samples=5)
    with pytest.raises(NumericDomain) as err:
        hz.numeric_check(chk)
    assert "at point" in str(err.value)


def test_catalog_deterministic_bytes():
    p = prob("free_particle")
    a = hz.run_identity_catalog(p).to_json()
    b = hz.run_identity_catalog(p).to_json()
    assert a == b
    c = hz.run_identity_catalog(p, seed=99).to_json()
    assert isinstance(c, str)


def test_catalog_free_particle_all_pass():
    rep = hz.run_identity_catalog(prob("free_particle"))
    assert rep.passed
    assert all(e.status == "pass" for e in rep.entries)


def test_catalog_fault_injection(monkeypatch):
    # a curvature implementation returning a wrong coefficient must be caught
    # by the bracket comparison
    from cartanforge import connection as cn
    real = cn.curvature

    def broken(conn):
        R = real(conn)

        class Lying:
            form = R.form

            def coefficient(self, y, a, b):
                return ex.add(R.coefficient(y, a, b), ex.ONE)

            def is_zero(self):
                return False
        return Lying()

    monkeypatch.setattr(cn, "curvature", broken)
    rep = hz.run_identity_catalog(prob("wave_1p1"))
    assert not rep.passed
    failing = [e.name for e in rep.entries if e.status == "fail"]
    assert any(name.startswith("curvature-bracket") for name in failing)


def test_symbolic_pass_implies_numeric_pass():
    # every symbolic conservation pass in the catalog is re-sampled
    # numerically by the same entry; a pass therefore certifies both
    rep = hz.run_identity_catalog(prob("harmonic_oscillator"))
    cons = [e for e in rep.entries if e.name.startswith("noether-conservation")]
    assert cons and all(e.status == "pass" for e in cons)
    assert all(e.max_dev <= 1e-9 for e in cons)
