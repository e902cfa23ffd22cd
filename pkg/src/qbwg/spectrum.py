"""Bound states below the waveguide cutoff.

A bound state on branch ``+`` (``-``) is an isolated root of
``Y(E) = E`` below ``omega_11 = 1``, with::

    Y_pm(E) = omega0 - int (J0 +- J1)(w) / (w - E) dw

Both ``Y_pm`` decrease monotonically on ``E < 1``, so each branch has at most
one root there. The residue ``Z = 1 / (2 (1 - Y'(E_b)))`` sets the amplitude
that survives at long times.

Note the ``+`` branch integral diverges as ``(1 - E)^(-1/2)`` at the band edge
(the one-dimensional density of states does), so for ``Gamma_11 > 0`` a ``+``
bound state always exists; for large ``omega0`` it sits just below the edge
with a tiny residue. The ``-`` branch integral stays finite at ``E = 1`` and
gives a sharp threshold.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import logging

import numpy as np
from scipy import optimize

from .kernels import band_integral
from .model import SystemParams

__all__ = [
    "EDGE_GUARD",
    "DEGENERACY_TOL",
    "BoundState",
    "SpectrumResult",
    "y_function",
    "residue",
    "find_bound_states",
    "spectrum_sweep",
    "SweepPoint",
    "Transition",
    "find_transitions",
    "refine_threshold",
]

log = logging.getLogger(__name__)

EDGE_GUARD = 1e-6
DEGENERACY_TOL = 1e-6
ROOT_XTOL = 1e-12


def _mode(branch: int) -> str:
    if branch == 1:
        return "plus"
    if branch == -1:
        return "minus"
    raise ValueError(f"branch must be +1 or -1, got {branch!r}")


def y_function(branch: int, E: float, params: SystemParams) -> float:
    """``Y_branch(E)`` for ``E`` strictly below the cutoff."""
    if not E < 1.0:
        raise ValueError(f"Y(E) is only defined for E < omega_11, got {E}")
    return params.omega0 - band_integral(E, params, _mode(branch), power=1)


def _slope_integral(branch, E, params):
    return band_integral(E, params, _mode(branch), power=2)


@dataclass(frozen=True)
class BoundState:
    branch: int  # +1 or -1
    energy: float
    residue: float

    @property
    def parity(self) -> int:
        """Amplitude ratio alpha_2 / alpha_1 of the eigenvector."""
        return self.branch

    @property
    def label(self) -> str:
        return "+" if self.branch == 1 else "-"


def residue(state: BoundState | float, params: SystemParams, branch: int | None = None) -> float:
    """Residue ``Z = 1/2 [1 + int (J0 +- J1)/(w - E)^2 dw]^-1`` at a bound-state energy.

    Accepts either a :class:`BoundState` or a bare energy plus ``branch``.
    """
    if isinstance(state, BoundState):
        E, branch = state.energy, state.branch
    else:
        E = float(state)
        if branch is None:
            raise ValueError("branch is required when passing a bare energy")
    if not E < 1.0:
        raise ValueError("residue is only defined below the cutoff")
    return 0.5 / (1.0 + _slope_integral(branch, E, params))


@dataclass(frozen=True)
class SpectrumResult:
    """Bound states of one parameter point, ``+`` branch first."""

    params: SystemParams
    states: tuple[BoundState, ...] = ()
    degenerate: bool = False
    band_edge: float = 1.0

    @property
    def count(self) -> int:
        return len(self.states)

    def get(self, branch: int) -> BoundState | None:
        for s in self.states:
            if s.branch == branch:
                return s
        return None

    @property
    def plus(self) -> BoundState | None:
        return self.get(1)

    @property
    def minus(self) -> BoundState | None:
        return self.get(-1)

    def row(self) -> dict:
        """Flat record used for the sweep CSV (absent states give ``None``)."""
        p, m = self.plus, self.minus
        return {
            "M": self.count,
            "E_plus": p.energy if p else None,
            "Z_plus": p.residue if p else None,
            "E_minus": m.energy if m else None,
            "Z_minus": m.residue if m else None,
            "degenerate": int(self.degenerate),
        }


def _lower_bracket(f, params):
    lo = max(params.omega0 - 10.0 * params.gamma11, -10.0)
    lo = min(lo, 1.0 - 2 * EDGE_GUARD)
    step = 1.0
    while f(lo) <= 0.0:
        lo -= step
        step *= 2.0
        if lo < -1e8:
            raise RuntimeError("could not bracket the bound-state root from below")
    return lo


def _solve_branch(branch, params, edge_guard):
    top = 1.0 - edge_guard
    f = lambda E: y_function(branch, E, params) - E
    if f(top) >= 0.0:
        return None
    lo = _lower_bracket(f, params)
    E, info = optimize.brentq(f, lo, top, xtol=ROOT_XTOL, rtol=4 * np.finfo(float).eps,
                              full_output=True, maxiter=200)
    if not info.converged:
        raise RuntimeError(f"bound-state root did not converge on branch {branch:+d}: {info.flag}")
    return BoundState(branch=branch, energy=E, residue=residue(E, params, branch))


def find_bound_states(params: SystemParams, edge_guard: float = EDGE_GUARD,
                      degeneracy_tol: float = DEGENERACY_TOL) -> SpectrumResult:
    """Locate the (at most two) bound states below the cutoff.

    A branch has a root when ``Y(1 - edge_guard) < 1 - edge_guard``; the root
    is then bracketed from below and refined with Brent's method.
    """
    states = []
    for branch in (1, -1):
        s = _solve_branch(branch, params, edge_guard)
        if s is not None:
            states.append(s)
    degenerate = (
        len(states) == 2 and abs(states[0].energy - states[1].energy) < degeneracy_tol
    )
    return SpectrumResult(params=params, states=tuple(states), degenerate=degenerate)


@dataclass
class SweepPoint:
    axis_value: float
    result: SpectrumResult | None = None
    error: str | None = None

    def row(self, axis: str) -> dict:
        rec = {axis: self.axis_value}
        if self.result is None:
            rec.update(M=None, E_plus=None, Z_plus=None, E_minus=None, Z_minus=None,
                       degenerate=None, error=self.error)
        else:
            rec.update(self.result.row())
            rec["error"] = None
        return rec


_AXES = ("omega0", "delta_z", "gamma11")


def _spectrum_point(args):
    params, axis_value = args
    try:
        return SweepPoint(axis_value, find_bound_states(params))
    except Exception as exc:  # recorded per point, the sweep goes on
        log.warning("spectrum point %s failed: %s", axis_value, exc)
        return SweepPoint(axis_value, error=f"{type(exc).__name__}: {exc}")


def sweep_values(lo: float, hi: float, n_points: int) -> np.ndarray:
    """Inclusive uniform grid, rounded so that decimal steps land exactly."""
    if n_points < 2:
        raise ValueError("a sweep needs at least two points")
    vals = np.linspace(lo, hi, n_points)
    return np.round(vals, 12)


def spectrum_sweep(params_base: SystemParams, axis: str, lo: float, hi: float,
                   n_points: int, workers: int = 1) -> list[SweepPoint]:
    """Bound-state spectrum along one parameter axis.

    Points run in a process pool when ``workers > 1``; results keep grid order.
    Failures are recorded on the point instead of aborting the sweep.
    """
    from .parallel import ordered_map

    if axis not in _AXES:
        raise ValueError(f"axis must be one of {_AXES}, got {axis!r}")
    values = sweep_values(lo, hi, n_points)
    jobs = []
    for v in values:
        try:
            jobs.append((params_base.replace(**{axis: float(v)}), float(v)))
        except ValueError as exc:
            jobs.append((None, float(v), str(exc)))
    out = [None] * len(jobs)
    good = [(i, j) for i, j in enumerate(jobs) if j[0] is not None]
    for i, j in enumerate(jobs):
        if j[0] is None:
            out[i] = SweepPoint(j[1], error=j[2])
    results = ordered_map(_spectrum_point, [j for _, j in good], workers)
    for (i, _), r in zip(good, results):
        out[i] = r
    return out


@dataclass(frozen=True)
class Transition:
    """A change of ``(M, degenerate)`` between two neighbouring sweep points."""

    lo: float
    hi: float
    before: tuple[int, bool]
    after: tuple[int, bool]

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def as_dict(self) -> dict:
        return {"lo": self.lo, "hi": self.hi, "midpoint": self.midpoint,
                "from": list(self.before), "to": list(self.after)}


def find_transitions(points: list[SweepPoint]) -> list[Transition]:
    """Intervals of a sweep across which the count or degeneracy flag changes.

    Failed points are skipped, so an interval may span more than one step.
    """
    out = []
    prev = None
    for pt in points:
        if pt.result is None:
            continue
        key = (pt.result.count, pt.result.degenerate)
        if prev is not None and key != prev[1]:
            out.append(Transition(prev[0], pt.axis_value, prev[1], key))
        prev = (pt.axis_value, key)
    return out


def refine_threshold(params_base: SystemParams, axis: str, lo: float, hi: float,
                     branch: int, edge_guard: float = EDGE_GUARD) -> float:
    """Axis value in ``[lo, hi]`` where a bound state on ``branch`` appears or vanishes.

    Solves ``Y(1 - edge_guard) = 1 - edge_guard`` along ``axis``, the same
    existence test used by :func:`find_bound_states`.

    Raises:
        ValueError: if the existence test does not change sign on ``[lo, hi]``.
    """
    if axis not in _AXES:
        raise ValueError(f"axis must be one of {_AXES}, got {axis!r}")
    top = 1.0 - edge_guard

    def g(x):
        return y_function(branch, top, params_base.replace(**{axis: x})) - top

    g_lo, g_hi = g(lo), g(hi)
    if np.sign(g_lo) == np.sign(g_hi):
        raise ValueError(f"branch {branch:+d} existence does not change on [{lo}, {hi}]")
    return optimize.brentq(g, lo, hi, xtol=ROOT_XTOL)
