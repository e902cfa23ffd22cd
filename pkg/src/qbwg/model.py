"""System parameters, the waveguide spectral density and the SI unit bridge.

Internally every quantity is dimensionless: frequencies and energies are in
units of the (1,1) cutoff frequency ``omega_11`` and ``hbar = c = 1``, so the
cutoff wavelength ``lambda_11 = 2 pi c / omega_11`` equals ``2 pi``.
Charger-battery separations are *stored* in units of ``lambda_11`` (as quoted
on the figure axes) and converted with :meth:`SystemParams.kappa`.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import constants

__all__ = [
    "SystemParams",
    "PhysicalWaveguide",
    "spectral_density",
    "gamma11_from_physical",
    "cutoff_frequency",
]


@dataclass(frozen=True)
class SystemParams:
    """Dimensionless problem definition.

    Attributes:
        omega0: Transition frequency of charger and battery (units of omega_11).
        gamma11: Radiation rate into the (1,1) mode (units of omega_11).
        delta_z: Charger-battery longitudinal separation (units of lambda_11).
    """

    omega0: float
    gamma11: float
    delta_z: float = 0.0

    def __post_init__(self):
        if not np.isfinite(self.omega0) or self.omega0 <= 0:
            raise ValueError(f"omega0 must be > 0, got {self.omega0}")
        if not np.isfinite(self.gamma11) or self.gamma11 <= 0:
            raise ValueError(f"gamma11 must be > 0, got {self.gamma11}")
        if not np.isfinite(self.delta_z) or self.delta_z < 0:
            raise ValueError(f"delta_z must be >= 0, got {self.delta_z}")

    @property
    def kappa(self) -> float:
        """Separation in internal length units, ``omega_11 * dz / c``."""
        return 2.0 * np.pi * self.delta_z

    def replace(self, **changes) -> "SystemParams":
        fields = {"omega0": self.omega0, "gamma11": self.gamma11, "delta_z": self.delta_z}
        fields.update(changes)
        return SystemParams(**fields)

    def as_dict(self) -> dict:
        return {"omega0": self.omega0, "gamma11": self.gamma11, "delta_z": self.delta_z}


def _check_branch(p: int) -> int:
    if p not in (0, 1):
        raise ValueError(f"spectral branch must be 0 (self) or 1 (cross), got {p!r}")
    return int(p)


def spectral_density(p: int, omega, params: SystemParams):
    """Spectral density ``J_p(omega)`` of the (1,1) waveguide mode.

    ``p = 0`` is the self term, ``p = 1`` the charger-battery cross term which
    carries the retardation factor ``cos(dz * sqrt(omega^2 - 1))``. The
    density vanishes at and below the cutoff; the inverse square-root
    divergence just above it is integrable and is never sampled by the
    quadratures in this package (they substitute ``omega = cosh(theta)``).

    Args:
        p: Branch index, 0 or 1.
        omega: Frequency or array of frequencies (units of omega_11), >= 0.
        params: System parameters.

    Returns:
        ``J_p(omega)`` in units of omega_11, same shape as ``omega``.
    """
    p = _check_branch(p)
    w = np.asarray(omega, dtype=float)
    if np.any(w < 0):
        raise ValueError("spectral density is defined for omega >= 0")
    above = w > 1.0
    out = np.zeros_like(w)
    k = np.sqrt(w[above] ** 2 - 1.0)
    # (omega/omega_11)^2 - 1 == omega^2 - 1 in these units
    val = params.gamma11 / (2.0 * np.pi) / k
    if p == 1:
        val = val * np.cos(params.kappa * k)
    out[above] = val
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class PhysicalWaveguide:
    """SI description of the waveguide and the emitters.

    Attributes:
        a, b: Transverse side lengths (m).
        x0, y0: Common transverse emitter position (m).
        dz_dipole: Dipole moment along z (C m).
        lambda0: Emitter transition wavelength (m).
    """

    a: float
    b: float
    x0: float
    y0: float
    dz_dipole: float
    lambda0: float

    def __post_init__(self):
        for name in ("a", "b", "dz_dipole", "lambda0"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not 0 < self.x0 < self.a:
            raise ValueError("x0 must lie strictly inside (0, a)")
        if not 0 < self.y0 < self.b:
            raise ValueError("y0 must lie strictly inside (0, b)")

    @classmethod
    def centered(cls, a: float, b: float, dz_dipole: float, lambda0: float) -> "PhysicalWaveguide":
        return cls(a=a, b=b, x0=a / 2, y0=b / 2, dz_dipole=dz_dipole, lambda0=lambda0)

    @property
    def omega11(self) -> float:
        return cutoff_frequency(self.a, self.b, 1, 1)

    @property
    def omega0(self) -> float:
        """Emitter angular frequency ``2 pi c / lambda0`` (rad/s)."""
        return 2.0 * np.pi * constants.c / self.lambda0

    def omega0_ratio(self) -> float:
        """``omega0 / omega_11``, the dimensionless working frequency."""
        return self.omega0 / self.omega11

    def to_params(self, delta_z_m: float) -> SystemParams:
        """Dimensionless parameters for a charger-battery distance in metres."""
        lambda11 = 2.0 * np.pi * constants.c / self.omega11
        return SystemParams(
            omega0=self.omega0_ratio(),
            gamma11=gamma11_from_physical(self),
            delta_z=delta_z_m / lambda11,
        )


def gamma11_from_physical(geom: PhysicalWaveguide) -> float:
    """Radiation rate into the (1,1) mode in units of omega_11.

    ``Gamma_11 = 4 omega_11 d_z^2 / (eps0 hbar a b c) sin^2(pi x0/a) sin^2(pi y0/b)``;
    ``hbar`` restores the SI rate from the natural-unit expression, and the
    result is divided by ``omega_11``.
    """
    if not (0 < geom.x0 < geom.a and 0 < geom.y0 < geom.b):
        raise ValueError("emitter position outside the waveguide cross-section")
    shape = np.sin(np.pi * geom.x0 / geom.a) ** 2 * np.sin(np.pi * geom.y0 / geom.b) ** 2
    rate = (
        4.0 * geom.omega11 * geom.dz_dipole**2
        / (constants.epsilon_0 * constants.hbar * geom.a * geom.b * constants.c)
        * shape
    )
    return rate / geom.omega11


def cutoff_frequency(a: float, b: float, m: int = 1, n: int = 1) -> float:
    """Cutoff angular frequency ``c sqrt((m pi/a)^2 + (n pi/b)^2)`` in rad/s."""
    if m < 1 or n < 1:
        raise ValueError("mode indices must be >= 1")
    if not (a > 0 and b > 0):
        raise ValueError("waveguide sides must be positive")
    return constants.c * np.hypot(m * np.pi / a, n * np.pi / b)
