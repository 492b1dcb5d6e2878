"""Closed-form results for twin detuned arm cavities sharing one end mirror.

These are leading-order formulas in ``{Omega, epsilon, lambda} L / c`` and are
used as independent references for the numerical solver. Regime
assumptions (low frequency, small mismatch) are the caller's choice; nothing
here checks or extrapolates them.

Conventions: the cavity pole sits at ``-lambda - i epsilon``; ``lambda > 0``
is a blue detuning, which produces a restoring optical spring. The carrier
rotates by ``2 alpha`` on reflection from the cavity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.constants import c, hbar

from .quad import rotation


@dataclass(frozen=True)
class CavityParams:
    """Detuned arm cavity described by its bandwidth and detuning (rad/s)."""

    epsilon: float
    lam: float
    L: float
    omega0: float
    I_c: float
    m: float
    M: float
    epsilon_L: float = 0.0

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("cavity bandwidth must be positive")

    @property
    def alpha(self) -> float:
        return float(np.arctan(self.lam / self.epsilon))

    @classmethod
    def from_mirrors(cls, T_i, T_e, L, detuning, I_c, m, M, wavelength=1.064e-6):
        """Build from power transmissions and the one-way detuning phase (rad)."""
        return cls(
            epsilon=(T_i + T_e) * c / (4 * L),
            lam=detuning * c / L,
            L=L,
            omega0=2 * np.pi * c / wavelength,
            I_c=I_c,
            m=m,
            M=M,
            epsilon_L=T_e * c / (4 * L),
        )


@dataclass(frozen=True)
class ModeParams:
    mode: str
    mu: float
    iota: float
    theta_os: float
    L: float

    def h_sql(self, Omega):
        return np.sqrt(2 * hbar / (self.mu * np.asarray(Omega) ** 2 * self.L**2))


def mode_params(cp: CavityParams, mode: str = "differential") -> ModeParams:
    """Reduced mass, coupling ``iota`` and optical-spring frequency of a mode.

    The common-mode SQL uses ``mu_C = 2 M`` consistently.
    """
    if mode == "differential":
        mu = 2 * cp.m * cp.M / (cp.m + 2 * cp.M)
    elif mode == "common":
        mu = 2 * cp.M
    else:
        raise ValueError(f"unknown mode {mode!r}")
    iota = 8 * cp.omega0 * cp.I_c / (mu * cp.L * c)
    theta = np.sqrt(iota * cp.lam / (cp.epsilon**2 + cp.lam**2))
    return ModeParams(mode, mu, iota, float(theta), cp.L)


def spring_ratio(m: float, M: float) -> float:
    """Common-to-differential spring frequency ratio ``sqrt(m / (m + 2M))``."""
    return float(np.sqrt(m / (m + 2 * M)))


def mode_determinant(cp: CavityParams, mp: ModeParams, Omega):
    """``Omega^2 [(Omega + i eps)^2 - lam^2] + lam iota``; its roots are the mode resonances."""
    Omega = np.asarray(Omega, dtype=complex)
    return Omega**2 * ((Omega + 1j * cp.epsilon) ** 2 - cp.lam**2) + cp.lam * mp.iota


def mode_resonances(cp: CavityParams, mp: ModeParams) -> np.ndarray:
    """All four complex roots of :func:`mode_determinant`."""
    e, l = cp.epsilon, cp.lam
    # Omega^4 + 2ie Omega^3 - (e^2 + l^2) Omega^2 + l iota
    return np.roots([1, 2j * e, -(e**2 + l**2), 0, l * mp.iota])


def _mode_io(cp, mp, Omega):
    e, l, io = cp.epsilon, cp.lam, mp.iota
    W2 = Omega**2
    diag = -(W2 - l**2 + e**2) * W2 - l * io
    C = np.array([[diag, 2 * e * l * W2], [-2 * e * l * W2 + 2 * e * io, diag]], dtype=complex)
    s = 2 * np.sqrt(e * io * W2 + 0j) / (cp.L * mp.h_sql(Omega)) * np.array([l, -e + 1j * Omega])
    Md = mode_determinant(cp, mp, Omega)
    Ra = rotation(cp.alpha)
    return Ra @ C @ rotation(-cp.alpha) / Md, Ra @ s / Md


def diff_mode_io(cp: CavityParams, mp: ModeParams, Omega: float):
    """Differential-mode transfer ``R_a C_D R_-a / M_D`` and signal vector ``R_a s_D / M_D``.

    ``Omega`` is in rad/s. The signal vector multiplies the free differential
    displacement ``x_m + x_D``.
    """
    if mp.mode != "differential":
        raise ValueError("diff_mode_io needs differential mode parameters")
    return _mode_io(cp, mp, Omega)


def common_mode_io(cp: CavityParams, mp: ModeParams, Omega: float):
    """Common-mode counterpart of :func:`diff_mode_io`."""
    if mp.mode != "common":
        raise ValueError("common_mode_io needs common mode parameters")
    return _mode_io(cp, mp, Omega)


def mirror_motion_response(theta_D: float, Lambda2: float, Omega: float) -> np.ndarray:
    """Map free motions ``(x_m0, x_D0)`` to actual ``(x_m, x_D)`` for ``Omega << epsilon``.

    ``Lambda2 = 2M/m``. Raises at the spring pole ``Omega = theta_D``.
    """
    t2, W2 = theta_D**2, Omega**2
    if np.isclose(t2, W2, rtol=1e-14, atol=0):
        raise ZeroDivisionError("response is singular at the optical-spring frequency")
    k = 1.0 / (Lambda2 + 1)
    return np.array([[t2 * k - W2, -Lambda2 * t2 * k], [-t2 * k, Lambda2 * t2 * k - W2]]) / (t2 - W2)


def squeeze_spectrum_lf(cp: CavityParams, zeta):
    """Low-frequency output noise ``S_zeta`` of the ideal differential mode."""
    x = cp.epsilon / cp.lam
    # 1 + 2x^2 - 2x sqrt(1 + x^2) cos(2 zeta - 3 alpha), rearranged to avoid cancellation at large x
    h = np.hypot(1.0, x)
    return 1 / (h + abs(x)) ** 2 + 4 * abs(x) * h * np.sin(np.asarray(zeta) - 1.5 * cp.alpha) ** 2


def squeeze_factor(eps_over_lam: float) -> float:
    """Power squeeze factor ``e^{2q}`` for ``sinh q = |eps / lam|``."""
    return float(np.exp(2 * np.arcsinh(abs(eps_over_lam))))


def classical_noise_coefficient(cp: CavityParams, zeta):
    """``4 (eps/lam) sin^2(zeta - 2 alpha)``, the quadrature factor of the classical noise."""
    return 4 * cp.epsilon / cp.lam * np.sin(np.asarray(zeta) - 2 * cp.alpha) ** 2


def classical_noise_output(cp: CavityParams, mp: ModeParams, Omega, zeta, S_x):
    """Output spectrum from a free-mass displacement noise ``S_x`` (m^2/Hz)."""
    Omega = np.asarray(Omega, dtype=float)
    return (Omega / mp.theta_os) ** 2 * classical_noise_coefficient(cp, zeta) * S_x / (cp.L**2 * mp.h_sql(Omega) ** 2)


@dataclass(frozen=True)
class MismatchParams:
    d_eps_over_eps: float = 0.0
    d_epsL_over_eps: float = 0.0
    d_lambda_over_lambda: float = 0.0
    d_alpha_M: float = 0.0
    d_BS: float = 0.0
    d_eps_M: float = 0.0

    @classmethod
    def from_asymmetries(cls, T_i, T_e, detuning, d_T=0.0, d_loss=0.0, d_phi=0.0, d_BS=0.0, d_alpha_M=0.0, d_eps_M=0.0):
        """Convert mirror-level asymmetries to the first-order cavity quantities."""
        return cls(
            d_eps_over_eps=d_T / (T_i + T_e),
            d_epsL_over_eps=d_loss / (T_i + T_e),
            d_lambda_over_lambda=d_phi / detuning if detuning else 0.0,
            d_alpha_M=d_alpha_M,
            d_BS=d_BS,
            d_eps_M=d_eps_M,
        )

    def as_dict(self) -> dict:
        return {
            "d_eps": self.d_eps_over_eps,
            "d_epsL": self.d_epsL_over_eps,
            "d_lambda": self.d_lambda_over_lambda,
            "d_alpha_M": self.d_alpha_M,
            "d_BS": self.d_BS,
            "d_eps_M": self.d_eps_M,
        }


MECHANISMS = ("d_eps", "d_epsL", "d_lambda", "d_alpha_M", "d_BS", "d_eps_M")


@dataclass(frozen=True)
class MismatchCoupling:
    """Per-unit-mismatch couplings of one mechanism into the dark port.

    The carrier emerges as ``C (cos phi_C, sin phi_C)``; amplitude and phase
    noise as ``N (-sin phi, cos phi)``. ``phi_C`` is NaN where ``C = 0``.
    """

    C: float
    phi_C: float
    N_A: float
    phi_A: float
    N_A_lim: float
    N_P: float
    phi_P: float

    def carrier_vector(self):
        if self.C == 0:
            return np.zeros(2)
        return self.C * np.array([np.cos(self.phi_C), np.sin(self.phi_C)])

    def amplitude_vector(self):
        if self.N_A == 0:
            return np.zeros(2)
        return self.N_A * np.array([-np.sin(self.phi_A), np.cos(self.phi_A)])

    def phase_vector(self):
        if self.N_P == 0:
            return np.zeros(2)
        return self.N_P * np.array([-np.sin(self.phi_P), np.cos(self.phi_P)])


def mismatch_couplings(cp: CavityParams, Omega: float, theta_C: float) -> dict:
    """Leading-order carrier, amplitude-noise and phase-noise couplings per mechanism.

    ``Omega`` and ``theta_C`` are in rad/s; ``theta_C = 0`` gives the
    limiting column. Phase-noise entries equal the carrier entries.
    """
    e, l, a = np.float64(cp.epsilon), np.float64(cp.lam), cp.alpha
    W2, T2 = np.float64(Omega) ** 2, np.float64(theta_C) ** 2
    r2 = e**2 + l**2
    r = np.sqrt(r2)
    carrier = {
        "d_eps": (-e * l / r2, 2 * a + np.pi / 2),
        "d_epsL": (-e / r, a),
        "d_lambda": (e * l / r2, 2 * a + np.pi / 2),
        "d_alpha_M": (1.0, 2 * a + np.pi / 2),
        "d_BS": (0.0, np.nan),
        "d_eps_M": (-0.5, 2 * a),
    }
    # A vanishing arctan denominator is a quarter turn, not an error; Omega = theta_C is a true pole.
    with np.errstate(divide="ignore", invalid="ignore"):
        amp = _amplitude_rows(e, l, a, W2, T2)
    out = {}
    for k in MECHANISMS:
        C, phi_C = carrier[k]
        N_A, N_lim, phi_A = amp[k]
        out[k] = MismatchCoupling(float(C), float(phi_C), float(N_A), float(phi_A), float(N_lim), float(C), float(phi_C))
    return out


def _amplitude_rows(e, l, a, W2, T2):
    r2 = e**2 + l**2
    r = np.sqrt(r2)
    dW = W2 - T2
    return {
        "d_eps": (
            e**2 * np.sqrt(e**2 * (W2 + T2) ** 2 + 4 * l**2 * T2**2) / (l * r2 * dW),
            e**3 / (l * r2),
            2 * a - np.arctan(2 * l * T2 / (e * (W2 + T2))),
        ),
        "d_epsL": (e**2 / (l * r), e**2 / (l * r), a),
        "d_lambda": (
            e * np.sqrt((l**2 * W2 - e**2 * T2) ** 2 + 4 * e**2 * l**2 * T2**2) / (l * r2 * dW),
            e * l / r2,
            2 * a + np.arctan(2 * e * l * T2 / (l**2 * W2 - e**2 * T2)),
        ),
        "d_alpha_M": (
            -np.sqrt(l**2 * dW**2 + 4 * e**2 * T2**2) / (l * dW),
            -1.0,
            2 * a - np.arctan(2 * e * T2 / (l * dW)),
        ),
        "d_BS": (2 * e * W2 / (l * dW), 2 * e / l, 2 * a),
        "d_eps_M": (
            np.sqrt((r2 * W2 - (2 * e**2 + l**2) * T2) ** 2 + e**2 * l**2 * T2**2) / (2 * l * r * dW),
            r / (2 * l),
            a - np.arctan(e * l * T2 / (r2 * W2 - (2 * e**2 + l**2) * T2)),
        ),
    }


def combined_output(cp: CavityParams, mm: MismatchParams, Omega: float, theta_C: float):
    """First-order dark-port carrier, amplitude-noise and phase-noise vectors."""
    cps = mismatch_couplings(cp, Omega, theta_C)
    d = mm.as_dict()
    car = sum(d[k] * cps[k].carrier_vector() for k in MECHANISMS)
    amp = sum(d[k] * cps[k].amplitude_vector() for k in MECHANISMS)
    ph = sum(d[k] * cps[k].phase_vector() for k in MECHANISMS)
    return car, amp, ph


def alpha_M_amplitude_vector(cp: CavityParams, Omega: float, theta_C: float) -> np.ndarray:
    """Amplitude-noise vector of the Michelson phase asymmetry as a rational function of ``Omega``.

    The magnitude/angle form in :func:`mismatch_couplings` fixes the sign of
    ``N`` through ``Omega^2 - theta_C^2``, which flips the vector across the
    common-mode spring. Written as constant plus resonant part the vector is
    continuous in ``Omega`` and agrees with the tabulated form below
    ``theta_C``; above it (and in the ``theta_C -> 0`` column) it carries the
    opposite sign.
    """
    e, l, a = cp.epsilon, cp.lam, cp.alpha
    dW = Omega**2 - theta_C**2
    unit = lambda phi: np.array([-np.sin(phi), np.cos(phi)])
    return unit(2 * a) - 2 * e * theta_C**2 / (l * dW) * unit(2 * a + np.pi / 2)


def laser_evasion_determinant(cp: CavityParams, Omega: float, zeta: float, theta_C: float = 0.0, couplings: dict | None = None) -> float:
    """Determinant of the 2x2 system tuning ``d_eps_M`` and ``d_alpha_M`` to null laser noise.

    Rows are amplitude and phase noise read out at ``zeta``; columns are
    the two Michelson asymmetries in that order. A zero value means the two
    knobs are degenerate at this ``zeta``. ``couplings`` overrides the
    tabulated entries, e.g. with numerically extracted ones; otherwise the
    ``d_alpha_M`` amplitude entry uses :func:`alpha_M_amplitude_vector`.
    With ``theta_C = 0`` and ``zeta = 3 alpha / 2`` the result is
    ``-eps / (4 sqrt(eps^2 + lam^2))``.
    """
    cps = mismatch_couplings(cp, Omega, theta_C) if couplings is None else couplings
    u = np.array([np.cos(zeta), np.sin(zeta)])
    m = np.empty((2, 2))
    for j, k in enumerate(("d_eps_M", "d_alpha_M")):
        q = cps[k]
        if couplings is None and k == "d_alpha_M":
            amp = alpha_M_amplitude_vector(cp, Omega, theta_C)
        elif couplings is None and theta_C == 0:
            amp = q.N_A_lim * np.array([-np.sin(q.phi_A), np.cos(q.phi_A)])
        else:
            amp = q.amplitude_vector()
        m[0, j] = u @ amp
        m[1, j] = u @ q.phase_vector()
    return float(np.linalg.det(m))


def evasion_possible(det: float, tol: float = 1e-12) -> bool:
    """Whether the two Michelson knobs can null both laser-noise couplings."""
    return bool(abs(det) > tol)
