import pytest

from qbwg import SolverConfig, SystemParams, find_bound_states, kernel_grid, solve_volterra

GAMMA = 0.5
DZ = 0.1

# acceptance lines, printed again in the terminal summary
ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def default_params():
    return SystemParams(1.0, GAMMA, DZ)


@pytest.fixture(scope="session")
def long_grid():
    """Kernels for the full-horizon runs (dt = 0.01, t_end = 400)."""
    cfg = SolverConfig(dt=0.01, t_end=400.0)
    return kernel_grid(SystemParams(1.0, GAMMA, DZ), cfg.dt, cfg.n_steps)


@pytest.fixture(scope="session")
def long_runs(long_grid):
    """Full-horizon trajectories and spectra for omega0 in {3.0, 1.2, 1.0, 0.6}."""
    cfg = SolverConfig(dt=0.01, t_end=400.0)
    out = {}
    for w in (3.0, 1.2, 1.0, 0.6):
        p = SystemParams(w, GAMMA, DZ)
        out[w] = (solve_volterra(p, cfg, long_grid), find_bound_states(p))
    return out


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
