"""Battery observables: reduced state, stored energy and ergotropy.

With one excitation shared by charger, battery and field, the reduced battery
state is diagonal with excited population ``|c2|^2``. Everything here depends
on ``c2`` only through that population.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "POP_TOL",
    "QubitState",
    "ObservableSeries",
    "reduce_battery",
    "qb_energy",
    "ergotropy",
    "passive_energy",
    "ergotropy_generic",
    "series_from_trajectory",
    "series_extrema",
    "steady_extrema",
]

POP_TOL = 1e-6


@dataclass(frozen=True)
class QubitState:
    """Diagonal qubit state; ``p_excited`` is the upper-level population."""

    p_excited: float

    def __post_init__(self):
        if not 0.0 <= self.p_excited <= 1.0:
            raise ValueError(f"p_excited must lie in [0, 1], got {self.p_excited}")

    def density_matrix(self) -> np.ndarray:
        """``diag(1 - p, p)`` in the (ground, excited) basis."""
        return np.diag([1.0 - self.p_excited, self.p_excited])


def _clamped_population(c2):
    pop = np.abs(np.asarray(c2)) ** 2
    bad = pop > 1.0 + POP_TOL
    if np.any(bad):
        worst = float(np.max(pop))
        raise ValueError(f"|c2|^2 = {worst:.9f} exceeds 1 + {POP_TOL:g}")
    return np.clip(pop, 0.0, 1.0)


def reduce_battery(c2: complex) -> QubitState:
    """Reduced battery state for a single amplitude sample.

    Raises:
        ValueError: if ``|c2|^2 > 1 + 1e-6``. Smaller overshoot is clamped.
    """
    return QubitState(float(_clamped_population(c2)))


def qb_energy(state: QubitState, omega0: float) -> float:
    """Stored energy ``omega0 * p`` above the ground level."""
    return omega0 * state.p_excited


def ergotropy(state: QubitState, omega0: float) -> float:
    """Closed-form qubit ergotropy ``omega0 * max(0, 2p - 1)``."""
    return omega0 * max(0.0, 2.0 * state.p_excited - 1.0)


def passive_energy(rho: np.ndarray, hamiltonian: np.ndarray) -> float:
    """Energy of the passive state unitarily reachable from ``rho``.

    Eigenvalues of ``rho`` are sorted descending and paired with the energy
    levels of ``hamiltonian`` sorted ascending.
    """
    pops = np.sort(np.linalg.eigvalsh(rho))[::-1]
    levels = np.sort(np.linalg.eigvalsh(hamiltonian))
    return float(np.dot(pops, levels))


def ergotropy_generic(rho: np.ndarray, hamiltonian: np.ndarray) -> float:
    """``Tr[rho H] - Tr[rho_passive H]`` for any Hermitian ``rho`` and ``H``."""
    energy = float(np.real(np.trace(rho @ hamiltonian)))
    return energy - passive_energy(rho, hamiltonian)


@dataclass(frozen=True, eq=False)
class ObservableSeries:
    """Observables sampled along a trajectory (energies in ``omega_11`` units)."""

    times: np.ndarray = field(repr=False)
    pop1: np.ndarray = field(repr=False)
    pop2: np.ndarray = field(repr=False)
    energy: np.ndarray = field(repr=False)
    ergotropy: np.ndarray = field(repr=False)
    charger_energy: np.ndarray = field(repr=False)
    omega0: float

    @classmethod
    def from_populations(cls, times, pop1, pop2, omega0: float) -> "ObservableSeries":
        p1 = np.clip(np.asarray(pop1, dtype=float), 0.0, 1.0)
        p2 = np.clip(np.asarray(pop2, dtype=float), 0.0, 1.0)
        return cls(
            times=np.asarray(times, dtype=float),
            pop1=p1,
            pop2=p2,
            energy=omega0 * p2,
            ergotropy=omega0 * np.maximum(0.0, 2.0 * p2 - 1.0),
            charger_energy=omega0 * p1,
            omega0=omega0,
        )


def series_from_trajectory(traj) -> ObservableSeries:
    """Observables of a :class:`~qbwg.dynamics.Trajectory`.

    Populations beyond ``1 + 1e-6`` are rejected; the solver's own norm
    check normally catches them first.
    """
    p2 = _clamped_population(traj.c2)
    p1 = _clamped_population(traj.c1)
    return ObservableSeries.from_populations(traj.times, p1, p2, traj.params.omega0)


def series_extrema(series: ObservableSeries, window: tuple[float, float]) -> dict:
    """Extrema of energy and ergotropy for ``t_a <= t <= t_b``.

    Returns:
        Dict with ``max_energy``, ``min_energy``, ``max_ergotropy`` and the
        times at which they occur (first occurrence).

    Raises:
        ValueError: if the window holds no samples or is reversed.
    """
    t_a, t_b = window
    if t_b < t_a:
        raise ValueError(f"window end {t_b} precedes start {t_a}")
    t = series.times
    tol = 1e-9 * max(1.0, abs(t_b))
    mask = (t >= t_a - tol) & (t <= t_b + tol)
    if not np.any(mask):
        raise ValueError(f"window [{t_a}, {t_b}] contains no samples")
    tw, ew, ww = t[mask], series.energy[mask], series.ergotropy[mask]
    i_max, i_min, i_w = int(np.argmax(ew)), int(np.argmin(ew)), int(np.argmax(ww))
    return {
        "max_energy": float(ew[i_max]),
        "t_max_energy": float(tw[i_max]),
        "min_energy": float(ew[i_min]),
        "t_min_energy": float(tw[i_min]),
        "max_ergotropy": float(ww[i_w]),
        "t_max_ergotropy": float(tw[i_w]),
    }


def steady_extrema(spectrum, omega0: float) -> dict:
    """Long-time extrema of battery energy and ergotropy from the residues.

    Two non-degenerate bound states beat, so ``|c2|^2`` swings between
    ``(Z+ - Z-)^2`` and ``(Z+ + Z-)^2``; a coalesced pair or a single state
    leaves a constant population; no bound state leaves nothing.
    """
    states = spectrum.states
    if not states:
        p_max = p_min = 0.0
    elif len(states) == 1:
        p_max = p_min = states[0].residue ** 2
    else:
        zp, zm = spectrum.plus.residue, spectrum.minus.residue
        p_min = (zp - zm) ** 2
        p_max = p_min if spectrum.degenerate else (zp + zm) ** 2
    return {
        "max_energy": omega0 * p_max,
        "min_energy": omega0 * p_min,
        "max_ergotropy": omega0 * max(0.0, 2.0 * p_max - 1.0),
    }
