"""Python smoke tests for the extension module."""

import numpy as np
import pytest

import panelbreak as pb


def step_panel(m=8, n=120, shift=1.5, seed=5):
    return np.asarray(pb.gen_panel([0.0] * m, [shift] * m, 0.5, n, seed=seed))


def test_estimate_lse_recovers_a_clean_break():
    panel = step_panel()
    res = pb.estimate_lse(panel)
    assert abs(res["b_index"] - 60) <= 2
    assert res["tau_hat"] == pytest.approx(res["b_index"] / 120.0)
    assert len(res["profile"]) == 120 - 2 * 12 + 1
    assert res["gamma_L_sq"] > 0.0


def test_gaussian_equivalence_of_the_two_estimators():
    panel = step_panel(seed=9)
    lse = pb.estimate_lse(panel)
    mle = pb.estimate_mle(panel, "normal-known")
    assert lse["b_index"] == mle["b_index"]


def test_zip_equal_mean_break_is_mle_only():
    panel = np.asarray(
        pb.gen_family_panel("zip", [0.5, 2.0], [2.0 / 3.0, 3.0], 0.5, 40, 400, seed=3)
    )
    mle = pb.estimate_mle(panel, "zip")
    assert abs(mle["b_index"] - 200) <= 12


def test_adaptive_ci_is_deterministic_and_degenerate_on_strong_signal():
    panel = step_panel(m=30, n=200, shift=2.0, seed=11)
    a = pb.adaptive_ci(panel, replicates=120, seed=21)
    b = pb.adaptive_ci(panel, replicates=120, seed=21)
    assert a["h_draws"] == b["h_draws"]
    assert a["ci_index"][0] == a["ci_index"][1] == a["b_index"]


def test_limit_quantiles_are_monotone_and_symmetric():
    t = pb.limit_quantiles("b", replicates=600, seed=2, step=0.02, horizon=15.0)
    q = t["quantiles"]
    assert all(q[i] <= q[i + 1] for i in range(len(q) - 1))
    assert abs(q[0] + q[-1]) < 0.35 * abs(q[-1]) + 1.0


def test_error_mapping():
    with pytest.raises(ValueError):
        pb.estimate_lse(step_panel(), c_star=0.8)


def test_scenario_registry_roundtrip():
    names = pb.scenario_names()
    assert "zip-equal-mean" in names
    res = pb.run_scenario(
        "regime-a-degeneracy",
        {"n": 120.0, "m": 8.0, "replicates": 25.0, "shift": 2.0},
        seed=13,
    )
    assert res["pass"]
