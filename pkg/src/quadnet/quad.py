"""Quadrature-field algebra for the two-photon formalism.

Sideband fields at a frequency Omega are complex 2-vectors ``(a1, a2)``
normalised so that a single vacuum quadrature has unit spectral density.
Carrier fields are real 2-vectors ``D = sqrt(2 I) (cos theta, sin theta)``
in units of sqrt(W); the effective beam area cancels and is not carried.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.constants import c, hbar


class DomainError(ValueError):
    """An argument lies outside the domain of an operation."""


@dataclass(frozen=True)
class SqueezeParams:
    r: float
    phi: float

    def __post_init__(self):
        if not np.isfinite(self.r):
            raise DomainError("squeeze factor must be finite")
        # S(r, phi) depends on phi only through 2 phi
        object.__setattr__(self, "phi", float(np.mod(self.phi, np.pi)))


def rotation(theta: float) -> np.ndarray:
    """Quadrature rotation matrix R_theta."""
    ct, st = np.cos(theta), np.sin(theta)
    return np.array([[ct, -st], [st, ct]])


def rotate(v, theta: float) -> np.ndarray:
    """Rotate a quadrature vector by ``theta`` radians."""
    if not np.isfinite(theta):
        raise DomainError("rotation angle must be finite")
    return rotation(theta) @ np.asarray(v)


STAR = np.array([[0.0, 1.0], [-1.0, 0.0]])


def star(v) -> np.ndarray:
    """The pi/2 operation ``(v1, v2) -> (v2, -v1)``.

    This is what a phase modulation of carrier ``D`` produces, so
    ``D @ star(D) == 0`` for real ``D``.
    """
    v = np.asarray(v)
    return np.array([v[1], -v[0]])


def squeeze_matrix(p: SqueezeParams) -> np.ndarray:
    """Real, symmetric, unit-determinant squeeze operator S(r, phi)."""
    ch, sh = np.cosh(p.r), np.sinh(p.r)
    c2, s2 = np.cos(2 * p.phi), np.sin(2 * p.phi)
    return np.array([[ch + sh * c2, sh * s2], [sh * s2, ch - sh * c2]])


def carrier_from_power_phase(power: float, phase: float) -> np.ndarray:
    """Carrier quadrature vector for a beam of ``power`` watts."""
    if power < 0:
        raise DomainError(f"carrier power must be non-negative, got {power}")
    return np.sqrt(2.0 * power) * np.array([np.cos(phase), np.sin(phase)])


def carrier_power(d) -> float:
    d = np.asarray(d, dtype=float)
    return 0.5 * float(d @ d)


def carrier_phase(d) -> float:
    return float(np.arctan2(d[1], d[0]))


def momentum_flux(carrier, sideband, omega0: float):
    """AC momentum flow (N per unit sideband amplitude) of carrier x sideband beat."""
    if omega0 <= 0:
        raise DomainError("optical angular frequency must be positive")
    return np.sqrt(hbar * omega0 / c**2) * (np.asarray(carrier) @ np.asarray(sideband))


def homodyne_vector(zeta: float) -> np.ndarray:
    return np.array([np.cos(zeta), np.sin(zeta)])
