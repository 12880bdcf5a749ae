import json
import os

import pytest

from cartanforge import cli
from cartanforge import expr as ex

PROBLEMS = os.path.join(os.path.dirname(__file__), "..", "problems")


def prob(name):
    return os.path.join(PROBLEMS, name)


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_derive_el_free_particle(capsys):
    code, out, _ = run(capsys, "derive-el", prob("free_particle.toml"))
    assert code == 0
    assert "EL[q] = -dd(q,t,t)" in out


def test_derive_el_json_round_trips(capsys):
    code, out, _ = run(capsys, "derive-el", prob("wave_1p1.toml"),
                       "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["command"] == "derive-el"
    from cartanforge.problem import parse_problem
    chart = parse_problem(prob("wave_1p1.toml")).chart
    for r in doc["results"]:
        reparsed = chart.parse(r["expression"])
        assert ex.to_text(reparsed) == r["expression"]


def test_energy_requires_connection(capsys):
    code, _, err = run(capsys, "energy", prob("free_particle.toml"))
    assert code == 2
    assert "requires --connection" in err


def test_energy_with_connection(capsys):
    code, out, _ = run(capsys, "energy", prob("free_particle.toml"),
                       "--connection", "drift")
    assert code == 0
    assert "E = -3*d(q,t) + 1/2*d(q,t)^2" in out


def test_unknown_connection_name(capsys):
    code, _, err = run(capsys, "energy", prob("free_particle.toml"),
                       "--connection", "nope")
    assert code == 2 and "nope" in err


def test_curvature_command(capsys):
    code, out, _ = run(capsys, "curvature", prob("wave_1p1.toml"),
                       "--connection", "tilted")
    assert code == 0
    assert "flat = false" in out
    code, out, _ = run(capsys, "curvature", prob("wave_1p1.toml"),
                       "--connection", "flat")
    assert "flat = true" in out


def test_legendre_diff_command(capsys):
    code, out, _ = run(capsys, "legendre-diff", prob("free_particle.toml"),
                       "--connection", "drift")
    assert code == 0
    assert "-3*d(q,t)" in out


def test_check_section(capsys):
    code, out, _ = run(capsys, "check-section", prob("harmonic_oscillator.toml"),
                       "--section", "sine")
    assert code == 0
    assert "solves-field-equations = true" in out
    code, out, _ = run(capsys, "check-section", prob("harmonic_oscillator.toml"),
                       "--section", "drifting")
    assert "solves-field-equations = false" in out


def test_jetfield_el_solver(capsys):
    code, out, _ = run(capsys, "jetfield-el", prob("harmonic_oscillator.toml"))
    assert code == 0
    assert "solution[G(q,t,t)] = -q" in out


def test_jetfield_el_checker(capsys):
    code, out, _ = run(capsys, "jetfield-el", prob("harmonic_oscillator.toml"),
                       "--jetfield", "dynamics")
    assert code == 0
    assert "sopde = true" in out and "solves = true" in out


def test_symmetry_command(capsys):
    code, out, _ = run(capsys, "symmetry", prob("free_particle.toml"),
                       "--vectorfield", "dilation")
    assert code == 0
    assert "is-symmetry = false" in out


def test_noether_with_check_along_alias(capsys):
    code, out, _ = run(capsys, "noether", prob("free_particle.toml"),
                       "--vectorfield", "translation_q", "--check-along", "line")
    assert code == 0
    assert "current = (d(q,t))" in out
    assert "conserved-symbolic = true" in out
    assert "conserved-numeric = true" in out


def test_verify_passes_and_exit_code(capsys):
    code, out, _ = run(capsys, "verify", prob("free_particle.toml"))
    assert code == 0
    assert "all checks passed" in out


def test_verify_json_deterministic(capsys):
    a = run(capsys, "verify", prob("wave_1p1.toml"), "--format", "json",
            "--seed", "42")
    b = run(capsys, "verify", prob("wave_1p1.toml"), "--format", "json",
            "--seed", "42")
    assert a == b
    doc = json.loads(a[1])
    assert all(e["status"] in ("pass", "skip") for e in doc["suite"])


def test_verify_failure_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text("""
[bundle]
base = ["t"]
fiber = ["q"]

[lagrangian]
L = "1/2*d(q,t)^2"

[section.wrong]
components = ["t^2"]
solution = true
""")
    code, out, _ = run(capsys, "verify", str(bad))
    assert code == 1
    assert "FAIL" in out


def test_parse_error_exit_code(tmp_path, capsys):
    f = tmp_path / "broken.toml"
    f.write_text("[bundle\nbase = [\"t\"]\n")
    code, _, err = run(capsys, "verify", str(f))
    assert code == 2 and "error" in err


def test_missing_file_exit_code(capsys):
    code, _, err = run(capsys, "verify", "/nonexistent/problem.toml")
    assert code == 2


def test_empty_problem_skips(tmp_path, capsys):
    f = tmp_path / "empty.toml"
    f.write_text("""
[bundle]
base = ["t"]
fiber = ["q"]

[lagrangian]
L = "1/2*d(q,t)^2"
""")
    code, out, _ = run(capsys, "verify", str(f))
    assert code == 0
    assert "[skip] energy-intrinsic-vs-display" in out
    assert "[skip] symmetry" in out
