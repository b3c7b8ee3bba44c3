import math

import numpy as np
import pytest

import drp


def test_presets_and_config():
    assert "one_nitrogen" in drp.presets()
    cfg = drp.default_config("one_nitrogen")
    assert set(cfg) >= {"system", "field", "driving", "rates", "sweep", "output"}
    assert drp.normalize_config(cfg) == cfg


def test_bad_config_raises():
    with pytest.raises(Exception):
        drp.normalize_config({"rates": {"kb_0": 1.0}})
    with pytest.raises(ValueError):
        drp.parse_grid("0:1")


def test_grid():
    assert drp.parse_grid("-1:1:3") == [-1.0, 0.0, 1.0]


def test_trivial_decay():
    y = drp.yield_({"system": {"radicals": [[], []]}, "field": {"magnitude_mt": 0.0}})
    assert abs(y["phi_singlet"] - 2.0 / 3.0) < 1e-8


def test_chi_static_suppression():
    base = drp.chi({"system": {"preset": "one_nitrogen"}})
    strong = drp.chi({"system": {"preset": "one_nitrogen", "j0_mhz": 20.0}})
    assert base["chi"] > 10 * strong["chi"]
    assert abs(base["parallel"]["residual"]) < 1e-6


def test_orientation_map():
    verts, phis, gamma = drp.orientation_map({"system": {"preset": "one_nitrogen"}}, level=1)
    assert verts.shape == (42, 3)
    assert np.allclose(np.linalg.norm(verts, axis=1), 1.0)
    assert len(phis) == 42
    assert gamma == pytest.approx((max(phis) - min(phis)) / np.mean(phis))


def test_sweep_rows():
    cfg = {"sweep": {"j0_mhz": "0:10:2", "nu_d_mhz": [0.0, 3.0], "delta_d_angstrom": 2.0}}
    rows = drp.sweep(cfg, workers=1)
    assert len(rows) == 4
    assert [r["solver"] for r in rows] == ["static", "floquet", "static", "floquet"]
    assert drp.sweep(cfg, as_csv=True).splitlines()[0] == "j0_mhz,nu_d_mhz,delta_d_angstrom,chi,residual,solver"


def test_bessel_and_crossing():
    n = 256
    th = 2 * np.pi * np.arange(n) / n
    quad = np.mean(np.exp(-1.4 * 1.5 * (1 - np.cos(th))))
    assert drp.time_average_factor(1.4, 3.0) == pytest.approx(quad, abs=1e-12)
    assert drp.level_crossing() == pytest.approx(-11.6, abs=0.05)


def test_two_level_static_oracle():
    omega = 2 * math.pi * 1.4
    assert drp.two_level_efficiency(0.0, 3.0) == pytest.approx(2 * omega**2 / (1 + 4 * omega**2), rel=1e-8)


def test_measures():
    s = np.zeros((4, 4), dtype=complex)
    s[1, 1] = s[2, 2] = 0.5
    s[1, 2] = s[2, 1] = -0.5
    assert drp.measure("e_c", s) == pytest.approx(1.0)
    assert drp.measure("e_n", s) == pytest.approx(1.0)
    assert drp.measure("c_l1", s, "ud") == pytest.approx(1.0)


def test_control_small():
    r = drp.control_optimize(horizon_us=1.0, n_steps=40, n_samples=5, iterations=3, restarts=1)
    assert r["feasible"]
    assert all(b2 >= b1 for b1, b2 in zip(r["best_log"], r["best_log"][1:]))
    assert 0.0 <= min(r["steps"]) and max(r["steps"]) <= 3.0


def test_validate():
    assert all(c["passed"] for c in drp.validate())
