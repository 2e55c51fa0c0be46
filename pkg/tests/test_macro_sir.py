from __future__ import annotations

import math

import numpy as np
import pytest

from plaguesim.macro_sir import (
    SirError,
    SirParams,
    compare_macro_micro,
    geometric_equivalent_stage,
    integrate_sir,
    macro_r0,
)


def params(beta=0.4, gamma=0.2, n=1000.0, i0=10.0, r0=0.0):
    return SirParams(beta_macro=beta, gamma=gamma, population_n=n, s0=n - i0 - r0, i0=i0, r0_count=r0)


def test_no_infected_means_no_dynamics():
    traj = integrate_sir(params(i0=0.0), dt=0.1, horizon=50)
    assert np.allclose(traj.s, traj.s[0])
    assert np.allclose(traj.i, 0.0)
    assert np.allclose(traj.r, 0.0)


def test_beta_zero_gives_exponential_decay():
    # I(t) = 10 * exp(-0.2 t); check at t = 10 within 1e-6.
    traj = integrate_sir(params(beta=0.0, gamma=0.2, i0=10.0), dt=0.01, horizon=10)
    expected = 10.0 * math.exp(-0.2 * 10.0)
    assert traj.i[-1] == pytest.approx(expected, abs=1e-6)


def test_initial_growth_sign_follows_r0_threshold():
    up = integrate_sir(params(beta=0.4, gamma=0.2), dt=0.01, horizon=1)
    down = integrate_sir(params(beta=0.1, gamma=0.2), dt=0.01, horizon=1)
    assert up.i[1] > up.i[0]      # beta/gamma = 2 -> dI/dt > 0 at t=0
    assert down.i[1] < down.i[0]  # beta/gamma = 0.5 -> dI/dt < 0


def test_conservation_and_monotone_s():
    traj = integrate_sir(params(), dt=0.05, horizon=200)
    totals = traj.s + traj.i + traj.r
    assert np.max(np.abs(totals - 1000.0)) <= 1e-9 * 1000.0
    assert np.all(np.diff(traj.s) <= 1e-12)
    assert np.min(traj.i) >= -1e-9


def test_fourth_order_convergence():
    # Richardson: halving dt should shrink the endpoint error ~16x.
    p = params()
    ref = integrate_sir(p, dt=0.003125, horizon=20).i[-1]
    e1 = abs(integrate_sir(p, dt=0.1, horizon=20).i[-1] - ref)
    e2 = abs(integrate_sir(p, dt=0.05, horizon=20).i[-1] - ref)
    assert e1 / e2 > 8.0


def test_macro_r0_is_the_quotient():
    assert macro_r0(params(beta=0.4, gamma=0.2)) == pytest.approx(2.0)
    assert macro_r0(params(beta=0.0, gamma=0.2)) == 0.0
    assert macro_r0(params(beta=0.21, gamma=0.2)) == pytest.approx(1.05)


def test_invalid_params_rejected():
    with pytest.raises(SirError, match="gamma"):
        integrate_sir(SirParams(beta_macro=0.4, gamma=0.0, population_n=10, s0=10, i0=0), dt=0.1, horizon=1)
    with pytest.raises(SirError, match="equal population_n"):
        integrate_sir(SirParams(beta_macro=0.4, gamma=0.2, population_n=10, s0=5, i0=0), dt=0.1, horizon=1)
    with pytest.raises(SirError, match="dt"):
        integrate_sir(params(), dt=5.0, horizon=1.0)


def test_identical_series_has_zero_gaps():
    traj = integrate_sir(params(), dt=1.0, horizon=30)
    ticks = list(range(31))
    micro_i = [float(traj.i[t]) for t in ticks]
    report = compare_macro_micro(traj, ticks, micro_i, micro_final_size=traj.final_size)
    assert report.mean_i_gap == pytest.approx(0.0, abs=1e-9)
    assert report.peak_time_gap == pytest.approx(0.0, abs=1e-9)
    assert report.final_size_gap == pytest.approx(0.0, abs=1e-9)


def test_mismatched_horizon_is_an_error():
    traj = integrate_sir(params(), dt=1.0, horizon=10)
    with pytest.raises(SirError, match="horizon"):
        compare_macro_micro(traj, list(range(20)), [0.0] * 20, micro_final_size=0.0)


def test_trajectory_csv_export():
    traj = integrate_sir(params(), dt=0.5, horizon=2)
    lines = traj.to_csv().splitlines()
    assert lines[0] == "time,s,i,r"
    assert len(lines) == 6  # header + 5 grid points
    t, s, i, r = lines[1].split(",")
    assert float(t) == 0.0 and float(s) == 990.0 and float(i) == 10.0


def test_geometric_equivalent_stage_bounds():
    assert geometric_equivalent_stage(1.0 / 3.0) == (1, 5)
    assert geometric_equivalent_stage(1.0) == (1, 1)
    assert geometric_equivalent_stage(0.25) == (1, 7)
    with pytest.raises(SirError):
        geometric_equivalent_stage(0.3)
