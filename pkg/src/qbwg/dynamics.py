"""Amplitude dynamics of charger (``c1``) and battery (``c2``).

The exact equations of motion are the coupled Volterra integro-differential
equations::

    c_j' + i w0 c_j + sum_j' int_0^t f_|j-j'|(t - s) c_j'(s) ds = 0,
    c_1(0) = 1, c_2(0) = 0.

Two discretisations are provided, both second order for the weakly
(logarithmically) singular kernels:

``"trapezoid-product"`` (default)
    Integrate once in time. The convolution then involves the integrated
    kernel ``F_p(t) = int_0^t f_p`` (continuous, ``F_p(0) = 0``) and the
    trapezoid rule gives an update that is explicit in the new amplitudes
    apart from the ``i w0`` term.

``"predictor-corrector"``
    Trapezoid rule on the differential form; the convolution uses exact
    kernel cell integrals against cell-averaged amplitudes, and the implicit
    step is closed with fixed-point corrector sweeps.

History sums cost O(N^2); a single trajectory is sequential.
"""
from __future__ import annotations

from dataclasses import dataclass, field, asdict

import numpy as np

from .errors import NumericalError
from .kernels import KernelGrid, MarkovRates, kernel_grid
from .model import SystemParams
from .spectrum import SpectrumResult

__all__ = [
    "SCHEMES",
    "SolverConfig",
    "Trajectory",
    "solve_volterra",
    "solve_scalar_pm",
    "markovian_solution",
    "long_time_amplitude",
    "steady_energy_formula",
    "observed_order",
]

SCHEMES = ("trapezoid-product", "predictor-corrector")


@dataclass(frozen=True)
class SolverConfig:
    dt: float = 0.01
    t_end: float = 400.0
    scheme: str = "trapezoid-product"
    max_corrector: int = 5
    corrector_tol: float = 1e-12
    norm_tol: float = 1e-6

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.t_end > 0:
            raise ValueError("t_end must be positive")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))

    def check_resolution(self, params: SystemParams) -> None:
        limit = 0.05 * min(1.0 / params.omega0, 1.0)
        if self.dt > limit * (1 + 1e-12):
            raise ValueError(
                f"dt={self.dt} does not resolve the dynamics; need dt <= {limit:.4g} "
                f"for omega0={params.omega0}"
            )

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray = field(repr=False)
    c1: np.ndarray = field(repr=False)
    c2: np.ndarray = field(repr=False)
    params: SystemParams
    scheme: str
    dt: float

    @property
    def pop1(self) -> np.ndarray:
        return np.abs(self.c1) ** 2

    @property
    def pop2(self) -> np.ndarray:
        return np.abs(self.c2) ** 2

    @property
    def norm(self) -> np.ndarray:
        return self.pop1 + self.pop2

    def window(self, t_a: float, t_b: float) -> np.ndarray:
        """Boolean mask of samples with ``t_a <= t <= t_b``."""
        eps = 1e-9 * self.dt
        return (self.times >= t_a - eps) & (self.times <= t_b + eps)


def _prepare(params, cfg, grid):
    cfg.check_resolution(params)
    n = cfg.n_steps
    if grid is None:
        grid = kernel_grid(params, cfg.dt, n)
    if not np.isclose(grid.dt, cfg.dt, rtol=1e-12, atol=0):
        raise ValueError(f"kernel grid step {grid.dt} != solver step {cfg.dt}")
    if grid.n < n:
        raise ValueError(f"kernel grid has {grid.n} cells, solver needs {n}")
    if not grid.matches(params):
        raise ValueError("kernel grid was built for different (gamma11, delta_z)")
    return grid, n


def _integrated_weights(mom, dt, n):
    """Product-trapezoid weights for ``int_0^t F(t - s) c(s) ds``, ``F = int f``.

    With ``c`` piecewise linear the weight of ``c_m`` is
    ``int F(s) hat_{n-m}(s) ds``, written through the cell moments of ``f``.

    Returns:
        ``(interior, start, end)``: ``interior[j]`` multiplies ``c_{n-j}`` for
        ``1 <= j <= n-1`` (``interior[0]`` unused), ``start[n]`` multiplies
        ``c_0`` at step ``n`` and ``end`` multiplies the newest ``c_n``.
    """
    m0, m1, m2 = mom[0, :n], mom[1, :n], mom[2, :n]
    F = np.concatenate(([0j], np.cumsum(m0)))
    interior = np.zeros(n + 1, dtype=complex)
    j = np.arange(1, n)
    interior[1:n] = dt * (F[j - 1] + m0[j - 1] - 0.5 * m2[j - 1]
                          + 0.5 * (m0[j] - 2 * m1[j] + m2[j]))
    start = np.zeros(n + 1, dtype=complex)
    k = np.arange(1, n + 1)
    start[1:] = 0.5 * dt * (F[k - 1] + m0[k - 1] - m2[k - 1])
    end = 0.5 * dt * (m0[0] - 2 * m1[0] + m2[0])
    return interior, start, end


def _differential_weights(mom, n):
    """Product-trapezoid weights for ``int_0^t f(t - s) c(s) ds``; same layout."""
    m0, m1 = mom[0, :n], mom[1, :n]
    interior = np.zeros(n + 1, dtype=complex)
    j = np.arange(1, n)
    interior[1:n] = m1[j - 1] + m0[j] - m1[j]
    start = np.zeros(n + 1, dtype=complex)
    start[1:] = m1[:n]
    return interior, start, m0[0] - m1[0]


class _History:
    """Toeplitz history sums ``sum_{m=1}^{n-1} w[n-m] c_m`` for a block of amplitudes."""

    def __init__(self, weights, n):
        self.n = n
        self.rev = [[np.ascontiguousarray(w[::-1]) for w in row] for row in weights]

    def __call__(self, c, step):
        size = len(self.rev)
        out = np.zeros(size, dtype=complex)
        if step < 2:
            return out
        lo = self.n - step + 1
        for i in range(size):
            for j in range(size):
                out[i] += np.dot(self.rev[i][j][lo : self.n], c[j, 1:step])
        return out


def _step_integrated(omega0, dt, weights, init, n):
    """Once-integrated equation, product trapezoid; direct solve of each step."""
    size = len(init)
    interior = [[w[0] for w in row] for row in weights]
    start = np.array([[w[1] for w in row] for row in weights])  # (size, size, n+1)
    end = np.array([[w[2] for w in row] for row in weights])
    hist = _History(interior, n)
    lhs = np.linalg.inv((1.0 + 0.5j * omega0 * dt) * np.eye(size) + end)
    c = np.zeros((size, n + 1), dtype=complex)
    c[:, 0] = init
    running = np.zeros(size, dtype=complex)  # sum_{m=1}^{n-1} c_m
    base = c[:, 0] - 0.5j * omega0 * dt * c[:, 0]
    for step in range(1, n + 1):
        rhs = (base - 1j * omega0 * dt * running
               - start[:, :, step] @ c[:, 0] - hist(c, step))
        c[:, step] = lhs @ rhs
        running += c[:, step]
    return c


def _step_corrector(omega0, dt, weights, init, n, cfg):
    """Differential form, trapezoid in time, fixed-point sweeps on the memory term."""
    size = len(init)
    interior = [[w[0] for w in row] for row in weights]
    start = np.array([[w[1] for w in row] for row in weights])
    end = np.array([[w[2] for w in row] for row in weights])
    hist = _History(interior, n)
    c = np.zeros((size, n + 1), dtype=complex)
    c[:, 0] = init
    denom = 1.0 + 0.5j * omega0 * dt
    g_prev = -1j * omega0 * c[:, 0]  # memory integral vanishes at t = 0
    for step in range(1, n + 1):
        known = start[:, :, step] @ c[:, 0] + hist(c, step)
        explicit = c[:, step - 1] + 0.5 * dt * (g_prev - known)
        x = c[:, step - 1] if step == 1 else 2 * c[:, step - 1] - c[:, step - 2]
        relax, last = 1.0, np.inf
        for _ in range(cfg.max_corrector):
            x_new = (explicit - 0.5 * dt * (end @ x)) / denom
            res = float(np.max(np.abs(x_new - x)))
            if res > last:
                relax = 0.5
            x = x + relax * (x_new - x)
            last = res
            if res <= cfg.corrector_tol * max(1.0, float(np.max(np.abs(x)))):
                break
        else:
            raise NumericalError(
                f"corrector did not converge at step {step} (t={step * dt:.4g}); "
                f"residual {last:.3e} after {cfg.max_corrector} sweeps"
            )
        c[:, step] = x
        g_prev = -1j * omega0 * x - (known + end @ x)
    return c


def _run_block(params, cfg, grid, n, couplings, init):
    """``couplings[i][j]`` in {0, 1, '+', '-'} picks the kernel coupling ``j`` into ``i``."""
    integrated = cfg.scheme == "trapezoid-product"
    cache = {}

    def weights(code):
        if code not in cache:
            mom = {0: grid.mom0, 1: grid.mom1, "+": grid.mom0 + grid.mom1,
                   "-": grid.mom0 - grid.mom1}[code]
            cache[code] = (_integrated_weights(mom, cfg.dt, n) if integrated
                           else _differential_weights(mom, n))
        return cache[code]

    w = [[weights(code) for code in row] for row in couplings]
    if integrated:
        return _step_integrated(params.omega0, cfg.dt, w, init, n)
    return _step_corrector(params.omega0, cfg.dt, w, init, n, cfg)


def _check_norm(pops, cfg, what):
    worst = float(np.max(pops))
    if worst > 1.0 + cfg.norm_tol:
        k = int(np.argmax(pops))
        raise NumericalError(
            f"{what}: norm grew to {worst:.9f} at sample {k} (> 1 + {cfg.norm_tol:g}); "
            f"reduce dt (now {cfg.dt})"
        )


def solve_volterra(params: SystemParams, cfg: SolverConfig | None = None,
                   grid: KernelGrid | None = None) -> Trajectory:
    """Solve the coupled charger/battery equations from ``c1 = 1, c2 = 0``.

    Args:
        params: System parameters.
        cfg: Step size, horizon and scheme; defaults to ``SolverConfig()``.
        grid: Precomputed kernels for ``(gamma11, delta_z, dt)``; built on
            demand when omitted. A grid may be shared between runs that
            differ only in ``omega0``.

    Raises:
        NumericalError: corrector failure or norm growth beyond tolerance.
    """
    cfg = cfg or SolverConfig()
    grid, n = _prepare(params, cfg, grid)
    c = _run_block(params, cfg, grid, n, [[0, 1], [1, 0]], np.array([1.0, 0.0], dtype=complex))
    _check_norm(np.abs(c[0]) ** 2 + np.abs(c[1]) ** 2, cfg, "solve_volterra")
    times = np.arange(n + 1) * cfg.dt
    return Trajectory(times=times, c1=c[0], c2=c[1], params=params, scheme=cfg.scheme, dt=cfg.dt)


def solve_scalar_pm(params: SystemParams, cfg: SolverConfig | None = None,
                    grid: KernelGrid | None = None):
    """Symmetric/antisymmetric amplitudes ``c_pm = c1 +- c2``.

    Each obeys a scalar equation with kernel ``f0 +- f1`` and ``c_pm(0) = 1``;
    the pair reconstructs ``c1 = (c+ + c-)/2`` and ``c2 = (c+ - c-)/2``.

    Returns:
        ``(times, c_plus, c_minus)``.
    """
    cfg = cfg or SolverConfig()
    grid, n = _prepare(params, cfg, grid)
    cp = _run_block(params, cfg, grid, n, [["+"]], np.array([1.0 + 0j]))[0]
    cm = _run_block(params, cfg, grid, n, [["-"]], np.array([1.0 + 0j]))[0]
    _check_norm(np.abs(cp) ** 2, cfg, "solve_scalar_pm(+)")
    _check_norm(np.abs(cm) ** 2, cfg, "solve_scalar_pm(-)")
    return np.arange(n + 1) * cfg.dt, cp, cm


def markovian_solution(params: SystemParams, rates: MarkovRates, t):
    """Memoryless amplitudes ``c_j = e^{-(i w0 + U0) t} [e^{-U1 t} - (-1)^j e^{U1 t}] / 2``."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be >= 0")
    u0, u1 = rates.upsilon0, rates.upsilon1
    env = np.exp(-(1j * params.omega0 + u0) * t)
    a, b = np.exp(-u1 * t), np.exp(u1 * t)
    return env * (a + b) / 2, env * (a - b) / 2


def long_time_amplitude(spectrum: SpectrumResult, params: SystemParams, t):
    """Bound-state (residue) part of ``(c1, c2)``; the branch cut has dephased away.

    A ``+`` state contributes ``Z+ e^{-i E+ t}`` equally to both emitters, a
    ``-`` state ``+-Z- e^{-i E- t}`` with opposite signs. For a degenerate pair
    both share ``E+`` so the battery amplitude is ``(Z+ - Z-) e^{-i E t}``.
    """
    del params  # the residues already carry all parameter dependence
    t = np.asarray(t, dtype=float)
    c1 = np.zeros(t.shape, dtype=complex)
    c2 = np.zeros(t.shape, dtype=complex)
    states = spectrum.states
    e_common = states[0].energy if spectrum.degenerate else None
    for s in states:
        E = e_common if e_common is not None else s.energy
        phase = s.residue * np.exp(-1j * E * t)
        c1 += phase
        c2 += s.parity * phase
    return c1, c2


def steady_energy_formula(spectrum: SpectrumResult, params: SystemParams, t):
    """Long-time battery energy ``omega0 |c2(t)|^2`` from the residues."""
    t = np.asarray(t, dtype=float)
    w0 = params.omega0
    plus, minus = spectrum.plus, spectrum.minus
    if spectrum.count == 0:
        return np.zeros(t.shape)
    if spectrum.count == 1:
        z = (plus or minus).residue
        return np.full(t.shape, w0 * z**2)
    zp, zm = plus.residue, minus.residue
    beat = 0.0 if spectrum.degenerate else plus.energy - minus.energy
    return w0 * (zp**2 + zm**2 - 2 * zp * zm * np.cos(beat * t))


def observed_order(coarse: float, mid: float, fine: float) -> float:
    """Convergence order from three solutions at step ratios 4:2:1."""
    num = abs(coarse - mid)
    den = abs(mid - fine)
    if den == 0:
        return np.inf
    return float(np.log2(num / den))
