import math

import pytest

import potkit

BLASCHKE = [(1.0 - 2.0**-k, 0.0, 1) for k in range(1, 13)]


def test_constants():
    assert potkit.riesz_constant(2) == 1.0 / (2.0 * math.pi)
    assert potkit.ball_volume(2) == math.pi
    assert potkit.k_q(0.0, math.e) == pytest.approx(1.0)


def test_green_closed_form_and_walks():
    (e,) = potkit.green([[0.5, 0.0]])
    assert e["value"] == pytest.approx(math.log(2.0))
    (w,) = potkit.green([[0.3, 0.4]], pole=[0.2, 0.0], method="walk-on-spheres", samples=20000, seed=3)
    exact = potkit.green([[0.3, 0.4]], pole=[0.2, 0.0])[0]["value"]
    assert abs(w["value"] - exact) < 4 * w["std_error"] + 1e-9
    assert potkit.green([[2.0, 0.0]])[0]["value"] == 0.0


def test_potential_and_duality():
    atoms = [([0.4, 0.1], 0.5), ([-0.2, 0.5], 0.3), ([-0.3, -0.45], 0.2)]
    y = [1.3, -0.2]
    (v,) = potkit.potential(atoms, [y], pole=[0.0, 0.0])
    direct = sum(m * math.log(math.dist(p, y)) for p, m in atoms) - math.log(math.hypot(*y))
    assert v == pytest.approx(direct, abs=1e-12)
    r = potkit.duality_roundtrip(atoms)
    assert r["total_mass"] == pytest.approx(1.0, abs=0.02)
    assert abs(r["dirac_coefficient"]) < 0.05


def test_jensen():
    circle = [([0.5 * math.cos(t), 0.5 * math.sin(t)], 1 / 256) for t in (2 * math.pi * k / 256 for k in range(256))]
    assert potkit.jensen_verify(circle, probes=8)["passed"]
    assert not potkit.jensen_verify([([0.3, 0.0], 1.0)], probes=8)["passed"]


def test_glue_certificate():
    rep = potkit.glue(cls="sbh+0(or)", S="ball:0,0,0.1")
    assert all(c["passed"] for c in rep["certificate"]["clauses"])
    assert rep["B"] > 0


def test_zero_sets():
    pl = potkit.poincare_lelong([(0.3, 0.1, 1), (-0.4, 0.2, 2)])
    assert pl["max_relative_error"] < 0.05
    z = potkit.zeros_check(BLASCHKE, b_plus=2.0, size=3, h=1 / 48)
    assert z["margins"]["verdict"] == "consistent"
    assert z["margins"]["max_margin"] <= z["bound"] + 1e-6
    c = potkit.crit3(BLASCHKE, b_plus=2.0, size=3, h=1 / 48)
    assert c["z1"]["feasible"]


def test_errors_map_to_python():
    with pytest.raises(ValueError):
        potkit.green([[0.1, 0.1]], domain="nowhere")
