"""Memory kernels, band integrals, Lamb shifts and Markovian rates.

All frequency integrals over the band ``omega > 1`` are done after the
substitution ``omega = cosh(theta)``, ``v = sinh(theta) = sqrt(omega^2 - 1)``,
which turns ``J_p(omega) d omega`` into ``Gamma/(2 pi) m_p(v) dv / sqrt(1+v^2)``
with ``m_0 = 1`` and ``m_1 = cos(kappa v)``. This removes the inverse
square-root divergence at the cutoff, and the oscillatory tails of the cross
term are handed to QUADPACK's Fourier-weight routine.

The kernels themselves have closed forms in terms of Hankel and Macdonald
functions::

    f_0(t) = -i Gamma/4 H0^(2)(t)
    f_1(t) = -i Gamma/4 H0^(2)(sqrt(t^2 - kappa^2))     t > kappa
           =  Gamma/(2 pi) K0(sqrt(kappa^2 - t^2))       t < kappa

which are checked against :func:`memory_kernel_quadrature` in the tests.
Both have an integrable logarithmic singularity (at ``t = 0`` for ``f_0``,
at ``t = kappa`` for ``f_1``).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
import warnings

import numpy as np
from scipy import integrate, special

from .model import SystemParams, _check_branch, spectral_density

__all__ = [
    "memory_kernel",
    "memory_kernel_quadrature",
    "damped_kernel",
    "band_integral",
    "lamb_shift",
    "MarkovRates",
    "markov_rates",
    "KernelGrid",
    "kernel_grid",
    "save_kernel_grid",
    "load_kernel_grid",
]

# kappa * v profiles of the band weights: self, cross, J0+J1, J0-J1.
_PROFILES = {
    "self": (1.0, 0.0, lambda kv: np.ones_like(kv)),
    "cross": (0.0, 1.0, np.cos),
    "plus": (1.0, 1.0, lambda kv: 2.0 * np.cos(0.5 * kv) ** 2),
    "minus": (1.0, -1.0, lambda kv: 2.0 * np.sin(0.5 * kv) ** 2),
}

# Head/tail split of the v-integrals; beyond it the integrand is ~v^-2.
_V_SPLIT = 20.0
_QUAD_OPTS = dict(epsabs=1e-14, epsrel=1e-12, limit=2000)


def _quad(f, a, b, **kw):
    opts = dict(_QUAD_OPTS)
    opts.update(kw)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, _ = integrate.quad(f, a, b, **opts)
    return val


def _quad_complex(f, a, b, **kw):
    re = _quad(lambda x: np.real(f(x)), a, b, **kw)
    im = _quad(lambda x: np.imag(f(x)), a, b, **kw)
    return re + 1j * im


# --------------------------------------------------------------------------
# memory kernels
# --------------------------------------------------------------------------

def memory_kernel(p: int, t, params: SystemParams):
    """Closed-form memory kernel ``f_p(t) = int J_p(w) exp(-i w t) dw``.

    Args:
        p: 0 for the self kernel, 1 for the charger-battery cross kernel.
        t: Time or array of times, strictly positive (units 1/omega_11).
        params: System parameters.

    Returns:
        Complex kernel value(s), same shape as ``t``.

    Raises:
        ValueError: ``t <= 0``, or ``p = 1`` evaluated exactly on the
            light cone ``t = kappa`` where it diverges logarithmically.
    """
    p = _check_branch(p)
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise ValueError("memory kernel is singular at t = 0; need t > 0")
    g = params.gamma11
    kappa = params.kappa
    if p == 0 or kappa == 0.0:
        out = -0.25j * g * special.hankel2(0, t)
    else:
        if np.any(t == kappa):
            raise ValueError("cross kernel diverges at t = kappa (light cone)")
        out = np.empty(t.shape, dtype=complex)
        late = t > kappa
        out[late] = -0.25j * g * special.hankel2(0, np.sqrt(t[late] ** 2 - kappa**2))
        out[~late] = g / (2.0 * np.pi) * special.k0(np.sqrt(kappa**2 - t[~late] ** 2))
    return out if out.ndim else complex(out)


def damped_kernel(p: int, t: float, params: SystemParams, eps: float) -> complex:
    """Kernel with the band integrand damped by ``exp(-eps cosh(theta))``.

    The theta-integral is truncated where the damping drops below 1e-12.
    Near the cutoff it is done in theta; the remainder is written in
    ``u = cosh(theta)`` and integrated with QUADPACK's Fourier weights.
    """
    p = _check_branch(p)
    if t <= 0:
        raise ValueError("need t > 0")
    kappa = params.kappa if p == 1 else 0.0
    u_max = np.log(1e12) / eps
    u_split = 3.0
    th_split = np.arccosh(u_split)

    def head(th):
        return np.cos(kappa * np.sinh(th)) * np.exp(-(eps + 1j * t) * np.cosh(th))

    total = _quad_complex(head, 0.0, th_split, limit=400)

    if kappa == 0.0:
        amp = lambda u: np.exp(-eps * u) / np.sqrt(u * u - 1.0)
        total += _fourier(amp, t, u_split, u_max)
    else:
        # cos(kappa sqrt(u^2-1)) = sum_s exp(i s kappa u) exp(i s kappa (sqrt(u^2-1) - u)) / 2
        for s in (1.0, -1.0):
            amp = lambda u, s=s: (
                0.5 * np.exp(-eps * u) * np.exp(1j * s * kappa * (np.sqrt(u * u - 1.0) - u))
                / np.sqrt(u * u - 1.0)
            )
            total += _fourier(amp, t - s * kappa, u_split, u_max)
    return params.gamma11 / (2.0 * np.pi) * total


def _fourier(amp, freq, a, b):
    """``int_a^b amp(u) exp(-i freq u) du`` for slowly varying complex ``amp``."""
    if freq == 0.0:
        return _quad_complex(amp, a, b, limit=5000)
    w = abs(freq)
    sgn = np.sign(freq)
    out = 0j
    for part, take in ((1.0, np.real), (1j, np.imag)):
        f = lambda u, take=take: take(amp(u))
        c = _quad(f, a, b, weight="cos", wvar=w, limit=20000, epsabs=1e-15)
        s = _quad(f, a, b, weight="sin", wvar=w, limit=20000, epsabs=1e-15)
        out += part * (c - 1j * sgn * s)
    return out


def memory_kernel_quadrature(
    p: int,
    t: float,
    params: SystemParams,
    eps_levels=(1e-2, 5e-3, 2.5e-3),
) -> complex:
    """Quadrature route to ``f_p(t)``: damped integrals extrapolated to eps -> 0.

    ``eps_levels`` must halve successively; a Richardson table removes the
    O(eps) and O(eps^2) terms (for three levels).
    """
    eps_levels = tuple(eps_levels)
    for e1, e2 in zip(eps_levels, eps_levels[1:]):
        if not np.isclose(e2, 0.5 * e1):
            raise ValueError("eps levels must halve successively")
    table = [damped_kernel(p, t, params, e) for e in eps_levels]
    order = 1
    while len(table) > 1:
        fac = 2.0**order
        table = [(fac * b - a) / (fac - 1.0) for a, b in zip(table, table[1:])]
        order += 1
    return table[0]


# --------------------------------------------------------------------------
# band integrals (spectrum and Lamb shifts share these)
# --------------------------------------------------------------------------

def _profile(mode):
    try:
        return _PROFILES[mode]
    except KeyError:
        raise ValueError(f"unknown band weight {mode!r}; use one of {sorted(_PROFILES)}") from None


def _regular_v_integral(a, E, kappa, mode, power, b=np.inf, points=None):
    """``int_a^b m(v) / (s (s - E)^power) dv`` with ``s = sqrt(1+v^2)``; no pole inside."""
    c_plain, c_cos, m = _profile(mode)
    if kappa == 0.0:
        c_plain, c_cos = c_plain + c_cos, 0.0
        m = lambda kv, c=c_plain: c * np.ones_like(kv)

    def h(v):
        s = np.sqrt(1.0 + v * v)
        return 1.0 / (s * (s - E) ** power)

    total = 0.0
    split = max(a, min(b, _V_SPLIT))
    if split > a:
        pts = None
        if points:
            pts = [x for x in points if a < x < split] or None
        total += _quad(lambda v: m(kappa * v) * h(v), a, split, points=pts)
    if b > split:
        if c_plain:
            total += c_plain * _quad(h, split, b)
        if c_cos:
            total += c_cos * _cos_tail(h, split, b, kappa)
    return total


def _cos_tail(h, a, b, kappa):
    """``int_a^b h(v) cos(kappa v) dv`` for ``h`` decaying at least like ``v^-2``.

    QUADPACK's Fourier rules misbehave once a single cycle ``pi/kappa`` dwarfs
    the scale of ``h`` (and crash for subnormal ``kappa``). Below ``v = 1/kappa``
    the cosine turns by under one radian, so that stretch is integrated plainly
    in ``w = 1/v``; the Fourier rule only takes over beyond it.
    """
    knee = 1.0 / kappa
    total = 0.0
    if knee > a:
        hi = min(b, knee)
        g = lambda w: h(1.0 / w) * np.cos(kappa / w) / (w * w)
        total += _quad(g, 1.0 / hi, 1.0 / a)
        a = hi
    if b > a:
        if kappa < 1e-14:
            # the remaining tail is bounded by about kappa
            return total
        if np.isinf(b):
            total += _quad(h, a, np.inf, weight="cos", wvar=kappa, limlst=200)
        else:
            total += _quad(h, a, b, weight="cos", wvar=kappa)
    return total


def band_integral(E: float, params: SystemParams, mode: str = "self", power: int = 1) -> float:
    """``int_{omega>1} J(omega) / (omega - E)^power d omega`` for ``E < 1``.

    ``mode`` selects the density: ``"self"`` (J0), ``"cross"`` (J1),
    ``"plus"`` (J0 + J1) or ``"minus"`` (J0 - J1).
    """
    if not E < 1.0:
        raise ValueError(f"band integral needs E below the cutoff (E < 1), got {E}")
    if power not in (1, 2):
        raise ValueError("power must be 1 or 2")
    width = np.sqrt(2.0 * (1.0 - E))
    points = [width * f for f in (0.3, 1.0, 3.0, 10.0, 30.0) if width * f < _V_SPLIT]
    val = _regular_v_integral(0.0, E, params.kappa, mode, power, points=points)
    return params.gamma11 / (2.0 * np.pi) * val


def lamb_shift(p: int, omega0: float, params: SystemParams) -> float:
    """Lamb shift ``delta_p = PV int J_p(w) / (omega0 - w) dw``.

    Below the cutoff this is a plain integral. Above it the pole at
    ``v0 = sqrt(omega0^2 - 1)`` is removed by subtraction on a symmetric
    window, for which the logarithmic remainder vanishes.
    """
    p = _check_branch(p)
    mode = "self" if p == 0 else "cross"
    if omega0 <= 0:
        raise ValueError("omega0 must be positive")
    if omega0 == 1.0:
        raise ValueError("Lamb shift is undefined exactly at the cutoff omega0 = omega_11")
    if omega0 < 1.0:
        return -band_integral(omega0, params, mode)

    kappa = params.kappa
    _, _, m = _profile(mode)
    v0 = np.sqrt(omega0**2 - 1.0)
    half = min(0.5 * v0, 1.0)

    def phi(v):
        s = np.sqrt(1.0 + v * v)
        return m(kappa * v) * (s + omega0) / (s * (v + v0))

    phi0 = phi(v0)
    g = lambda v: (phi(v) - phi0) / (v - v0)
    window = _quad(g, v0 - half, v0) + _quad(g, v0, v0 + half)
    left = _regular_v_integral(0.0, omega0, kappa, mode, 1, b=v0 - half)
    right = _regular_v_integral(v0 + half, omega0, kappa, mode, 1)
    pv = window + left + right
    return -params.gamma11 / (2.0 * np.pi) * pv


@dataclass(frozen=True)
class MarkovRates:
    """Complex Markovian rates ``Upsilon_p = pi J_p(omega0) + i delta_p``."""

    upsilon0: complex
    upsilon1: complex

    @property
    def decay(self) -> tuple[float, float]:
        return self.upsilon0.real, self.upsilon1.real

    @property
    def shifts(self) -> tuple[float, float]:
        return self.upsilon0.imag, self.upsilon1.imag


def markov_rates(params: SystemParams) -> MarkovRates:
    w0 = params.omega0
    ups = []
    for p in (0, 1):
        rate = np.pi * spectral_density(p, w0, params)
        ups.append(complex(rate, lamb_shift(p, w0, params)))
    return MarkovRates(*ups)


# --------------------------------------------------------------------------
# kernel grid for the time stepper
# --------------------------------------------------------------------------

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)
_GL_U = 0.5 * (_GL_NODES + 1.0)


@dataclass(frozen=True, eq=False)
class KernelGrid:
    """Kernel samples and cell moments on a uniform grid.

    ``f0[k]``, ``f1[k]`` hold the kernels at the half-step points
    ``(k + 1/2) dt`` so ``t = 0`` is never evaluated. ``mom0``, ``mom1`` are
    ``(3, n)`` arrays of exact cell moments
    ``int_{k dt}^{(k+1) dt} f_p(s) u^q ds`` with ``u = s/dt - k`` and
    ``q = 0, 1, 2``; the time stepper builds its product-integration weights
    from them.
    """

    dt: float
    n: int
    gamma11: float
    delta_z: float
    f0: np.ndarray = field(repr=False)
    f1: np.ndarray = field(repr=False)
    mom0: np.ndarray = field(repr=False)
    mom1: np.ndarray = field(repr=False)

    @property
    def times(self) -> np.ndarray:
        return (np.arange(self.n) + 0.5) * self.dt

    @property
    def w0(self) -> np.ndarray:
        """Cell integrals of ``f0``."""
        return self.mom0[0]

    @property
    def w1(self) -> np.ndarray:
        return self.mom1[0]

    def moments(self, p: int) -> np.ndarray:
        return self.mom0 if _check_branch(p) == 0 else self.mom1

    def integrated(self, p: int) -> np.ndarray:
        """``F_p(k dt) = int_0^{k dt} f_p`` for ``k = 0..n``."""
        return np.concatenate(([0j], np.cumsum(self.moments(p)[0])))

    def matches(self, params: SystemParams) -> bool:
        return self.gamma11 == params.gamma11 and self.delta_z == params.delta_z


def _cell_moments(p, params, dt, n):
    """Moments of ``f_p`` per cell: Gauss-Legendre away from singular points, adaptive near them."""
    kappa = params.kappa if p == 1 else 0.0
    out = np.empty((3, n), dtype=complex)
    powers = _GL_U[None, :] ** np.arange(3)[:, None] * (0.5 * _GL_WEIGHTS)[None, :]
    chunk = 1 << 14
    for lo in range(0, n, chunk):
        k = np.arange(lo, min(n, lo + chunk))
        nodes = (k[:, None] + _GL_U[None, :]) * dt
        # nudge off the light cone; those cells are redone adaptively below
        nodes = np.where(nodes == kappa, np.nextafter(kappa, np.inf), nodes)
        vals = memory_kernel(p, nodes, params)
        out[:, k] = dt * (powers @ vals.T)

    singular = set(range(min(n, 4)))
    if kappa > 0.0:
        kc = int(kappa // dt)
        singular.update(k for k in range(kc - 4, kc + 5) if 0 <= k < n)
    for k in sorted(singular):
        a, b = k * dt, (k + 1) * dt
        # a cut closer than 1e-12 dt to a cell edge only adds a vanishing sliver
        tiny = 1e-12 * dt
        cuts = [a, kappa, b] if a + tiny < kappa < b - tiny else [a, b]
        for q in range(3):
            f = lambda t, q=q: memory_kernel(p, t, params) * (t / dt - k) ** q
            out[q, k] = sum(_quad_complex(f, x, y) for x, y in zip(cuts, cuts[1:]))
    return out


def kernel_grid(params: SystemParams, dt: float, n: int) -> KernelGrid:
    """Precompute kernel samples and cell moments for ``n`` cells of width ``dt``."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    if n < 2:
        raise ValueError("need at least two cells")
    t = (np.arange(n) + 0.5) * dt
    f0 = memory_kernel(0, t, params)
    mom0 = _cell_moments(0, params, dt, n)
    if params.kappa == 0.0:
        f1, mom1 = f0.copy(), mom0.copy()
    else:
        t1 = np.where(t == params.kappa, np.nextafter(params.kappa, np.inf), t)
        f1 = memory_kernel(1, t1, params)
        mom1 = _cell_moments(1, params, dt, n)
    for arr in (f0, f1, mom0, mom1):
        arr.setflags(write=False)
    return KernelGrid(dt=dt, n=n, gamma11=params.gamma11, delta_z=params.delta_z,
                      f0=f0, f1=f1, mom0=mom0, mom1=mom1)


def save_kernel_grid(grid: KernelGrid, path) -> Path:
    """Write a grid as ``.npz``: columns t, Re/Im f0, Re/Im f1 and the cell moments."""
    path = Path(path)
    if path.suffix != ".npz":
        path = path.with_suffix(path.suffix + ".npz")
    np.savez(
        path,
        t=grid.times,
        re_f0=grid.f0.real, im_f0=grid.f0.imag,
        re_f1=grid.f1.real, im_f1=grid.f1.imag,
        re_mom0=grid.mom0.real, im_mom0=grid.mom0.imag,
        re_mom1=grid.mom1.real, im_mom1=grid.mom1.imag,
        meta=np.array([grid.dt, grid.n, grid.gamma11, grid.delta_z]),
    )
    return path


def load_kernel_grid(path) -> KernelGrid:
    with np.load(path) as z:
        dt, n, g, dz = z["meta"]
        arrs = {k: z[f"re_{k}"] + 1j * z[f"im_{k}"] for k in ("f0", "f1", "mom0", "mom1")}
    for arr in arrs.values():
        arr.setflags(write=False)
    return KernelGrid(dt=float(dt), n=int(n), gamma11=float(g), delta_z=float(dz), **arrs)
