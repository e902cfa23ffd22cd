import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qbwg.dynamics import (
    SCHEMES,
    SolverConfig,
    long_time_amplitude,
    markovian_solution,
    observed_order,
    solve_scalar_pm,
    solve_volterra,
    steady_energy_formula,
)
from qbwg.errors import NumericalError
from qbwg.kernels import kernel_grid, markov_rates
from qbwg.model import SystemParams
from qbwg.spectrum import SpectrumResult, find_bound_states

GAMMA, DZ = 0.5, 0.1


def _p(w0, dz=DZ, g=GAMMA):
    return SystemParams(w0, g, dz)


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(dt=0.0)
    with pytest.raises(ValueError):
        SolverConfig(t_end=-1.0)
    with pytest.raises(ValueError):
        SolverConfig(scheme="euler")
    with pytest.raises(ValueError):
        SolverConfig(dt=0.02).check_resolution(_p(3.0))
    SolverConfig(dt=0.05).check_resolution(_p(1.0))


@pytest.mark.parametrize("scheme", SCHEMES)
def test_initial_condition(scheme):
    tr = solve_volterra(_p(1.0), SolverConfig(dt=0.02, t_end=1.0, scheme=scheme))
    assert tr.c1[0] == 1.0 and tr.c2[0] == 0.0
    assert tr.scheme == scheme and tr.dt == 0.02
    assert tr.times[-1] == pytest.approx(1.0)


def test_grid_mismatch_rejected():
    cfg = SolverConfig(dt=0.02, t_end=2.0)
    with pytest.raises(ValueError):
        solve_volterra(_p(1.0), cfg, kernel_grid(_p(1.0), 0.01, 400))
    with pytest.raises(ValueError):
        solve_volterra(_p(1.0), cfg, kernel_grid(_p(1.0), 0.02, 50))
    with pytest.raises(ValueError):
        solve_volterra(_p(1.0), cfg, kernel_grid(_p(1.0, dz=0.2), 0.02, 100))


def test_grid_shared_across_frequencies():
    cfg = SolverConfig(dt=0.02, t_end=10.0)
    grid = kernel_grid(_p(1.0), cfg.dt, cfg.n_steps)
    a = solve_volterra(_p(0.8), cfg, grid)
    b = solve_volterra(_p(0.8), cfg)
    np.testing.assert_array_equal(a.c2, b.c2)


@pytest.mark.parametrize("scheme", SCHEMES)
@pytest.mark.parametrize("w0, dz", [(1.0, 0.1), (1.4, 0.6), (0.6, 0.0), (2.0, 1.3)])
def test_matches_symmetric_decomposition(scheme, w0, dz):
    p = _p(w0, dz)
    cfg = SolverConfig(dt=0.02 if w0 < 2.5 else 0.01, t_end=40.0, scheme=scheme)
    grid = kernel_grid(p, cfg.dt, cfg.n_steps)
    tr = solve_volterra(p, cfg, grid)
    _, cp, cm = solve_scalar_pm(p, cfg, grid)
    assert np.max(np.abs(tr.c1 - 0.5 * (cp + cm))) < 1e-9
    assert np.max(np.abs(tr.c2 - 0.5 * (cp - cm))) < 1e-9


def test_dark_state_at_coincidence():
    p = _p(1.0, dz=0.0)
    errs = []
    for dt in (0.02, 0.01):
        t, cp, cm = solve_scalar_pm(p, SolverConfig(dt=dt, t_end=50.0))
        assert cp[0] == 1.0 and cm[0] == 1.0
        np.testing.assert_allclose(np.abs(cm), 1.0, atol=1e-12)
        errs.append(np.max(np.abs(cm - np.exp(-1j * p.omega0 * t))))
    assert errs[1] < 1e-3
    # the only error left is the second-order phase error of the time rule
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.01)


def test_symmetric_amplitude_tail(long_runs, long_grid):
    traj, spec = long_runs[1.0]
    tail = traj.window(300, 400)
    cp = traj.c1 + traj.c2
    assert np.max(np.abs(np.abs(cp[tail]) ** 2 - 4 * spec.plus.residue**2)) < 0.02


def test_full_decay_without_strong_binding(long_runs):
    traj, _ = long_runs[3.0]
    k = int(np.searchsorted(traj.times, 200.0))
    assert traj.pop2[k] < 0.01


@pytest.mark.parametrize("scheme", SCHEMES)
def test_convergence_order(scheme):
    p = _p(1.0)
    vals = []
    for dt in (0.04, 0.02, 0.01):
        vals.append(solve_volterra(p, SolverConfig(dt=dt, t_end=50.0, scheme=scheme)).c2[-1])
    assert observed_order(*[abs(v) for v in vals]) >= 1.8
    assert observed_order(*vals) >= 1.8


def test_schemes_agree():
    p = _p(1.0)
    a = solve_volterra(p, SolverConfig(dt=0.01, t_end=30.0, scheme=SCHEMES[0]))
    b = solve_volterra(p, SolverConfig(dt=0.01, t_end=30.0, scheme=SCHEMES[1]))
    assert np.max(np.abs(a.c2 - b.c2)) < 1e-4


def test_corrector_failure_reported():
    cfg = SolverConfig(dt=0.02, t_end=2.0, scheme="predictor-corrector",
                       max_corrector=1, corrector_tol=1e-300)
    with pytest.raises(NumericalError, match="corrector"):
        solve_volterra(_p(1.0), cfg)


def test_norm_breach_reported():
    # a sign-flipped kernel pumps energy in instead of draining it
    p = _p(1.0)
    cfg = SolverConfig(dt=0.02, t_end=20.0)
    g = kernel_grid(p, cfg.dt, cfg.n_steps)
    gain = dataclasses.replace(g, mom0=-g.mom0, mom1=-g.mom1)
    with pytest.raises(NumericalError, match="norm"):
        solve_volterra(p, cfg, gain)


@settings(max_examples=12, deadline=None)
@given(w0=st.floats(0.3, 2.4), dz=st.floats(0.0, 1.5), g=st.floats(0.05, 1.0),
       scheme=st.sampled_from(SCHEMES))
def test_norm_never_grows(w0, dz, g, scheme):
    p = SystemParams(w0, g, dz)
    tr = solve_volterra(p, SolverConfig(dt=0.02, t_end=25.0, scheme=scheme))
    assert np.max(tr.norm) <= 1.0 + 1e-6


def test_markov_initial_and_unitary_below_cutoff():
    p = _p(0.8)
    r = markov_rates(p)
    t = np.linspace(0, 100, 1001)
    c1, c2 = markovian_solution(p, r, t)
    assert c1[0] == 1.0 and c2[0] == 0.0
    np.testing.assert_allclose(np.abs(c1) ** 2 + np.abs(c2) ** 2, 1.0, atol=1e-12)
    with pytest.raises(ValueError):
        markovian_solution(p, r, -1.0)


@settings(max_examples=25, deadline=None)
@given(w0=st.floats(1.05, 3.0), dz=st.floats(0.0, 2.0), g=st.floats(0.01, 1.0))
def test_markov_envelope(w0, dz, g):
    p = SystemParams(w0, g, dz)
    r = markov_rates(p)
    t = np.linspace(0, 50, 201)
    c1, c2 = markovian_solution(p, r, t)
    norm = np.abs(c1) ** 2 + np.abs(c2) ** 2
    env = np.exp(-2 * r.upsilon0.real * t) * np.cosh(2 * r.upsilon1.real * t)
    np.testing.assert_allclose(norm, env, rtol=1e-10, atol=1e-14)
    assert np.all(norm <= 1 + 1e-12)


def test_markov_weak_coupling_agreement():
    p = SystemParams(1.5, 0.01, DZ)
    tr = solve_volterra(p, SolverConfig(dt=0.01, t_end=20.0))
    c1, c2 = markovian_solution(p, markov_rates(p), tr.times)
    assert np.max(np.abs(tr.pop1 - np.abs(c1) ** 2)) < 0.02
    assert np.max(np.abs(tr.pop2 - np.abs(c2) ** 2)) < 0.02


def test_long_time_no_states():
    empty = SpectrumResult(params=_p(3.0))
    c1, c2 = long_time_amplitude(empty, _p(3.0), np.linspace(0, 10, 5))
    assert np.all(c1 == 0) and np.all(c2 == 0)
    assert np.all(steady_energy_formula(empty, _p(3.0), np.linspace(0, 10, 5)) == 0)


def test_long_time_single_state():
    p = _p(1.2)
    spec = find_bound_states(p)
    t = np.linspace(0, 50, 101)
    c1, c2 = long_time_amplitude(spec, p, t)
    z = spec.plus.residue
    np.testing.assert_allclose(np.abs(c1) ** 2, z**2, rtol=1e-12)
    np.testing.assert_allclose(np.abs(c2) ** 2, z**2, rtol=1e-12)
    np.testing.assert_allclose(steady_energy_formula(spec, p, t), p.omega0 * np.abs(c2) ** 2,
                               rtol=1e-12)


def test_long_time_two_states_bounds():
    p = _p(1.0)
    spec = find_bound_states(p)
    zp, zm = spec.plus.residue, spec.minus.residue
    beat = spec.minus.energy - spec.plus.energy
    t = np.arange(0, 4) * np.pi / beat
    _, c2 = long_time_amplitude(spec, p, t)
    pop = np.abs(c2) ** 2
    np.testing.assert_allclose(pop[0::2], (zp - zm) ** 2, rtol=1e-9)
    np.testing.assert_allclose(pop[1::2], (zp + zm) ** 2, rtol=1e-9)
    np.testing.assert_allclose(steady_energy_formula(spec, p, t), p.omega0 * pop, rtol=1e-9)


def test_long_time_coalesced_pair():
    p = _p(1.4, dz=1.0)
    spec = find_bound_states(p)
    merged = dataclasses.replace(spec, degenerate=True)
    t = np.linspace(0, 30, 7)
    _, c2 = long_time_amplitude(merged, p, t)
    np.testing.assert_allclose(np.abs(c2), abs(spec.plus.residue - spec.minus.residue), rtol=1e-12)


@pytest.mark.parametrize("w0", [3.0, 1.2, 1.0])
def test_tail_matches_long_time_amplitude(long_runs, w0):
    traj, spec = long_runs[w0]
    tail = traj.window(300, 400)
    c1, c2 = long_time_amplitude(spec, traj.params, traj.times[tail])
    assert np.max(np.abs(traj.pop2[tail] - np.abs(c2) ** 2)) < 0.02
    assert np.max(np.abs(traj.pop1[tail] - np.abs(c1) ** 2)) < 0.02


def _tail_spectrum(traj, t_a=200.0, t_b=400.0):
    tail = traj.window(t_a, t_b)
    y = traj.pop2[tail]
    y = y - y.mean()
    amp = np.abs(np.fft.rfft(y)) / len(y)
    freqs = 2 * np.pi * np.fft.rfftfreq(len(y), traj.dt)
    return freqs, amp


def test_tail_beat_frequency(long_runs):
    traj, spec = long_runs[1.0]
    freqs, amp = _tail_spectrum(traj)
    k = 1 + int(np.argmax(amp[1:]))
    beat = spec.minus.energy - spec.plus.energy
    assert abs(freqs[k] - beat) <= freqs[1]


def test_tail_flat_with_single_state(long_runs):
    traj, spec = long_runs[1.2]
    freqs, amp = _tail_spectrum(traj)
    level = spec.plus.residue ** 2
    # residual branch-cut wiggles stay tiny compared with the stored population
    assert np.max(amp[1:]) < 1e-2 * level


def test_observed_order_helper():
    assert observed_order(1.0 + 16e-4, 1.0 + 4e-4, 1.0 + 1e-4) == pytest.approx(2.0)
    assert observed_order(1.0, 1.0, 1.0) == np.inf
