"""Optical element catalogue and their block-row emissions.

Every element owns the equations for its outgoing fields. A row reads::

    out = sum_p  inputs[p] @ in_p  +  motion * y  +  sum_s  sources[s] @ u_s

where ``y`` is the element's (scaled) motion variable and ``u_s`` are unit
source amplitudes. The solver turns each row into the ``-1``-diagonal form.

Motion variables are carried in scaled units ``y = X * 2 omega0 / (c sqrt(hbar
omega0))`` (times 1 W**0.5), which keeps all matrix entries of order the carrier
amplitudes in sqrt(W). With that scaling the mirror output term is
``-rho y D*`` and the equation of motion is ``y = g [D_a.a + D_b.b - D_c.c -
D_d.d]`` with ``g = 2 omega0 / (M Omega**2 c**2)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import ClassVar

import numpy as np
from scipy.constants import c, hbar

from .quad import SqueezeParams, carrier_from_power_phase, rotation, squeeze_matrix, star

I2 = np.eye(2)
_NORM_TOL = 1e-12

PORT_COUNTS = {
    "mirror": 2,
    "beamsplitter": 4,
    "propagator": 2,
    "squeezer": 2,
    "laser": 1,
    "block": 1,
    "photodetector": 1,
}


class ElementError(ValueError):
    """Invalid element parameters or an element evaluated out of its domain."""


@dataclass
class BlockRow:
    port: int
    inputs: dict = field(default_factory=dict)
    motion: np.ndarray | None = None
    sources: dict = field(default_factory=dict)


@dataclass
class MotionRow:
    # (local port, "in" | "out") -> length-2 row acting on that field
    coeffs: dict = field(default_factory=dict)


@dataclass
class ElementRows:
    rows: list
    motion: MotionRow | None = None


def motion_scale(omega0: float) -> float:
    """Factor converting meters to the scaled motion variable used in the matrix."""
    return 2.0 * omega0 / (c * np.sqrt(hbar * omega0))


def _check_rta(rho, tau, loss):
    for name, v in (("rho", rho), ("tau", tau), ("loss", loss)):
        if not 0.0 <= v <= 1.0:
            raise ElementError(f"{name}={v} outside [0, 1]")
    if abs(rho**2 + tau**2 + loss - 1.0) > _NORM_TOL:
        raise ElementError(f"rho^2 + tau^2 + A = {rho**2 + tau**2 + loss!r} != 1")


@dataclass(frozen=True)
class MirrorParams:
    rho: float
    tau: float
    loss: float = 0.0
    mass: float = np.inf
    movable: bool = False

    def __post_init__(self):
        _check_rta(self.rho, self.tau, self.loss)
        if self.movable and not (self.mass > 0 and np.isfinite(self.mass)):
            raise ElementError("a movable element needs a finite positive mass")

    @classmethod
    def from_transmission(cls, T, loss=0.0, **kw):
        """Build from power transmission ``T`` and power loss ``loss``."""
        return cls(rho=float(np.sqrt(max(1.0 - T - loss, 0.0))), tau=float(np.sqrt(T)), loss=loss, **kw)


BeamsplitterParams = MirrorParams


@dataclass(frozen=True)
class PropagatorParams:
    length: float
    phase: float = 0.0
    gw_eta: float = 0.0
    gw_coupled: bool = False

    def __post_init__(self):
        if self.length < 0:
            raise ElementError("propagator length must be non-negative")
        if abs(self.gw_eta) > 1:
            raise ElementError("gw_eta must lie in [-1, 1]")
        object.__setattr__(self, "phase", float(np.mod(self.phase, 2 * np.pi)))


@dataclass(frozen=True)
class LaserNoiseModel:
    """Excess (classical) laser noise at the laser output, in vacuum units.

    The constant terms are single-sided spectral densities of the amplitude
    (1) and phase (2) quadratures. ``amplitude_noise`` is the relative
    amplitude fluctuation ``dA/A`` (1/sqrt(Hz)) and ``frequency_noise`` the
    frequency fluctuation (Hz/sqrt(Hz)); both scale with laser power, and
    frequency noise falls as 1/f**2 once converted to phase.
    The laser's own quantum noise is a separate unit vacuum slot.
    """

    s11: float = 0.0
    s22: float = 0.0
    s12: complex = 0.0
    amplitude_noise: float = 0.0
    frequency_noise: float = 0.0

    def matrix(self, freq: float, power: float, omega0: float) -> np.ndarray:
        s11 = self.s11 + 2 * power / (hbar * omega0) * self.amplitude_noise**2
        s22 = self.s22
        if self.frequency_noise:
            s22 = s22 + 2 * power / (hbar * omega0) * (self.frequency_noise / freq) ** 2
        return np.array([[s11, self.s12], [np.conj(self.s12), s22]], dtype=complex)

    def amplitude_part(self) -> "LaserNoiseModel":
        return LaserNoiseModel(s11=self.s11, amplitude_noise=self.amplitude_noise)

    def phase_part(self) -> "LaserNoiseModel":
        return LaserNoiseModel(s22=self.s22, frequency_noise=self.frequency_noise)

    def is_psd(self, freq, power, omega0, tol=1e-12) -> bool:
        m = self.matrix(freq, power, omega0)
        return bool(np.all(np.linalg.eigvalsh(m) >= -tol * max(1.0, abs(m).max())))


# ---------------------------------------------------------------------------
# row emission


def _loss_sources(loss, n):
    if loss == 0:
        return [{} for _ in range(n)]
    return [{f"loss{i}": np.sqrt(loss) * I2} for i in range(n)]


def mirror_static_rows(p: MirrorParams) -> ElementRows:
    """Rows ``b = -rho a + tau d``, ``c = tau a + rho d`` plus loss vacua.

    Port 0 carries (in a, out b), port 1 carries (in d, out c).
    """
    src = _loss_sources(p.loss, 2)
    return ElementRows(
        rows=[
            BlockRow(0, {0: -p.rho * I2, 1: p.tau * I2}, sources=src[0]),
            BlockRow(1, {0: p.tau * I2, 1: p.rho * I2}, sources=src[1]),
        ]
    )


def mirror_rp_rows(p: MirrorParams, carriers: dict, Omega: float, omega0: float) -> ElementRows:
    """Static rows plus radiation-pressure coupling through an explicit motion variable.

    ``carriers`` maps ``'a'``, ``'b'``, ``'c'``, ``'d'`` to DC carrier vectors.
    Loss vacua enter the output rows only; the force sums the four port fields.
    """
    if not p.movable:
        raise ElementError("radiation-pressure rows requested for a fixed mirror")
    if Omega == 0:
        raise ElementError("radiation pressure on a free mass is undefined at Omega = 0")
    out = mirror_static_rows(p)
    Da, Db, Dc, Dd = (np.asarray(carriers[k], dtype=float) for k in "abcd")
    out.rows[0].motion = -p.rho * star(Da)
    out.rows[1].motion = -p.rho * star(Dd)
    g = 2 * omega0 / (p.mass * Omega**2 * c**2)
    out.motion = MotionRow({(0, "in"): g * Da, (0, "out"): g * Db, (1, "out"): -g * Dc, (1, "in"): -g * Dd})
    return out


# beamsplitter ports: 0 (in d, out c), 1 (in b, out a), 2 (in h, out g), 3 (in f, out e).
# Ports 0 and 1 share the reflective face with the -rho sign.


def beamsplitter_static_rows(p: BeamsplitterParams) -> ElementRows:
    """``(a, c, e, g) = M_BS (d, b, h, f)`` with optional loss vacua on each output."""
    src = _loss_sources(p.loss, 4)
    r, t = p.rho * I2, p.tau * I2
    return ElementRows(
        rows=[
            BlockRow(1, {0: -r, 3: t}, sources=src[0]),  # a
            BlockRow(0, {1: -r, 2: t}, sources=src[1]),  # c
            BlockRow(3, {1: t, 2: r}, sources=src[2]),  # e
            BlockRow(2, {0: t, 3: r}, sources=src[3]),  # g
        ]
    )


def beamsplitter_rp_rows(p: BeamsplitterParams, carriers: dict, Omega: float, omega0: float) -> ElementRows:
    """Beamsplitter rows with motion normal to its face.

    ``carriers`` maps the letters ``'a'`` .. ``'h'`` to DC carrier vectors.
    """
    if not p.movable:
        raise ElementError("radiation-pressure rows requested for a fixed beamsplitter")
    if Omega == 0:
        raise ElementError("radiation pressure on a free mass is undefined at Omega = 0")
    D = {k: np.asarray(carriers[k], dtype=float) for k in "abcdefgh"}
    out = beamsplitter_static_rows(p)
    k = p.rho / np.sqrt(2)
    for row, letter in zip(out.rows, "dbhf"):
        row.motion = -k * star(D[letter])
    g = 2 * omega0 / (p.mass * Omega**2 * c**2) / np.sqrt(2)
    out.motion = MotionRow(
        {
            (1, "out"): g * D["a"],
            (0, "out"): g * D["c"],
            (3, "out"): -g * D["e"],
            (2, "out"): -g * D["g"],
            (0, "in"): g * D["d"],
            (1, "in"): g * D["b"],
            (2, "in"): -g * D["h"],
            (3, "in"): -g * D["f"],
        }
    )
    return out


def gw_source_vector(p: PropagatorParams, carrier_out, omega0: float) -> np.ndarray:
    """Strain-to-sideband source ``H = -eta omega0 L / (2 c sqrt(hbar omega0)) D*``."""
    scale = -p.gw_eta * omega0 * p.length / (2 * c * np.sqrt(hbar * omega0))
    return scale * star(np.asarray(carrier_out, dtype=float))


def propagator_rows(p: PropagatorParams, Omega: float, carriers: dict | None = None, omega0: float | None = None) -> ElementRows:
    """Free-space rows ``c = e^{i phi} R_Theta a``, ``b = e^{i phi} R_Theta d``.

    Port 0 carries (in a, out b), port 1 carries (in d, out c). With
    ``gw_coupled`` and carriers given, each direction also gets a GW source
    proportional to the star of its own outgoing carrier.
    """
    if not np.isfinite(Omega):
        raise ElementError("sideband frequency must be finite")
    m = np.exp(1j * Omega * p.length / c) * rotation(p.phase) if Omega else rotation(p.phase)
    rows = [BlockRow(0, {1: m}), BlockRow(1, {0: m})]
    if p.gw_coupled and p.gw_eta != 0 and carriers is not None:
        rows[0].sources["gw"] = gw_source_vector(p, carriers["b"], omega0)[:, None]
        rows[1].sources["gw"] = gw_source_vector(p, carriers["c"], omega0)[:, None]
    return ElementRows(rows=rows)


def squeezer_rows(p: SqueezeParams, dc: bool = False) -> ElementRows:
    """One-way squeezer: port-0 input leaves port 1 as ``S a``; reverse passes unmodified.

    In the carrier stage both directions are transparent, so carriers are
    not amplified.
    """
    s = I2 if dc else squeeze_matrix(p)
    return ElementRows(rows=[BlockRow(1, {0: s}), BlockRow(0, {1: I2})])


def endpoint_rows(kind: str, power: float = 0.0, phase: float = 0.0, dc: bool = False) -> ElementRows:
    """Single-port terminations.

    Blocks and photodetectors emit a fresh unit vacuum. A laser emits its
    carrier in the carrier stage; in the sideband stage it emits its own
    vacuum plus an excess-noise slot shaped later by a :class:`LaserNoiseModel`.
    """
    if kind in ("block", "photodetector"):
        src = {} if dc else {"vac": I2}
    elif kind == "laser":
        if dc:
            src = {"carrier": carrier_from_power_phase(power, phase)[:, None]}
        else:
            src = {"vac": I2, "laser": I2}
    else:
        raise ElementError(f"unknown endpoint kind {kind!r}")
    return ElementRows(rows=[BlockRow(0, {}, sources=src)])


# ---------------------------------------------------------------------------
# element objects


@dataclass(frozen=True)
class Element:
    id: str
    kind: ClassVar[str] = ""

    @property
    def n_ports(self) -> int:
        return PORT_COUNTS[self.kind]

    @property
    def movable(self) -> bool:
        return False

    def emit(self, Omega: float, carriers=None, omega0: float | None = None, dc: bool = False) -> ElementRows:
        """Block rows at sideband frequency ``Omega`` (rad/s), or the carrier stage if ``dc``."""
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


def _port_carriers(carriers, letters):
    """Map letters to ``carriers[(port, dir)]`` using ``letters[(port, dir)] = letter``."""
    return {letter: carriers[key] for key, letter in letters.items()}


_MIRROR_LETTERS = {(0, "in"): "a", (0, "out"): "b", (1, "out"): "c", (1, "in"): "d"}
_BS_LETTERS = {
    (0, "in"): "d", (0, "out"): "c",
    (1, "in"): "b", (1, "out"): "a",
    (2, "in"): "h", (2, "out"): "g",
    (3, "in"): "f", (3, "out"): "e",
}
_PROP_LETTERS = {(0, "in"): "a", (0, "out"): "b", (1, "in"): "d", (1, "out"): "c"}


@dataclass(frozen=True)
class Mirror(Element):
    params: MirrorParams = MirrorParams(1.0, 0.0)
    kind: ClassVar[str] = "mirror"

    @property
    def movable(self):
        return self.params.movable

    def emit(self, Omega, carriers=None, omega0=None, dc=False):
        if self.movable and not dc:
            return mirror_rp_rows(self.params, _port_carriers(carriers, _MIRROR_LETTERS), Omega, omega0)
        return mirror_static_rows(self.params)

    def to_dict(self):
        p = self.params
        d = {"id": self.id, "type": self.kind, "rho": p.rho, "tau": p.tau, "loss": p.loss}
        if p.movable or np.isfinite(p.mass):
            d.update(mass=p.mass, movable=p.movable)
        return d


@dataclass(frozen=True)
class Beamsplitter(Mirror):
    kind: ClassVar[str] = "beamsplitter"

    def emit(self, Omega, carriers=None, omega0=None, dc=False):
        if self.movable and not dc:
            return beamsplitter_rp_rows(self.params, _port_carriers(carriers, _BS_LETTERS), Omega, omega0)
        return beamsplitter_static_rows(self.params)


@dataclass(frozen=True)
class Propagator(Element):
    params: PropagatorParams = PropagatorParams(0.0)
    kind: ClassVar[str] = "propagator"

    def emit(self, Omega, carriers=None, omega0=None, dc=False):
        pc = _port_carriers(carriers, _PROP_LETTERS) if carriers is not None else None
        return propagator_rows(self.params, 0.0 if dc else Omega, pc, omega0)

    def to_dict(self):
        p = self.params
        d = {"id": self.id, "type": self.kind, "length": p.length, "phase": p.phase}
        if p.gw_coupled:
            d.update(gw_eta=p.gw_eta, gw_coupled=True)
        return d


@dataclass(frozen=True)
class Squeezer(Element):
    params: SqueezeParams = SqueezeParams(0.0, 0.0)
    kind: ClassVar[str] = "squeezer"

    def emit(self, Omega, carriers=None, omega0=None, dc=False):
        return squeezer_rows(self.params, dc)

    def to_dict(self):
        return {"id": self.id, "type": self.kind, "r": self.params.r, "phi": self.params.phi}


@dataclass(frozen=True)
class Laser(Element):
    power: float = 1.0
    phase: float = 0.0
    noise: LaserNoiseModel = LaserNoiseModel()
    kind: ClassVar[str] = "laser"

    def __post_init__(self):
        if self.power < 0:
            raise ElementError("laser power must be non-negative")

    def emit(self, Omega, carriers=None, omega0=None, dc=False):
        return endpoint_rows("laser", self.power, self.phase, dc)

    def to_dict(self):
        d = {"id": self.id, "type": self.kind, "power": self.power, "phase": self.phase}
        n = self.noise
        if n != LaserNoiseModel():
            nd = {k: getattr(n, k) for k in ("s11", "s22", "amplitude_noise", "frequency_noise") if getattr(n, k)}
            if n.s12:
                nd["s12"] = complex(n.s12).real if complex(n.s12).imag == 0 else [complex(n.s12).real, complex(n.s12).imag]
            d["noise"] = nd
        return d


@dataclass(frozen=True)
class BeamBlock(Element):
    kind: ClassVar[str] = "block"

    def emit(self, Omega, carriers=None, omega0=None, dc=False):
        return endpoint_rows("block", dc=dc)

    def to_dict(self):
        return {"id": self.id, "type": self.kind}


@dataclass(frozen=True)
class Photodetector(BeamBlock):
    kind: ClassVar[str] = "photodetector"

    def emit(self, Omega, carriers=None, omega0=None, dc=False):
        return endpoint_rows("photodetector", dc=dc)


def mirror(id, *, T=None, rho=None, tau=None, loss=0.0, mass=np.inf, movable=False) -> Mirror:
    """Convenience constructor accepting either ``T`` or ``rho``/``tau``."""
    return Mirror(id, _mirror_params(T, rho, tau, loss, mass, movable))


def beamsplitter(id, *, T=None, rho=None, tau=None, loss=0.0, mass=np.inf, movable=False) -> Beamsplitter:
    return Beamsplitter(id, _mirror_params(T, rho, tau, loss, mass, movable))


def _mirror_params(T, rho, tau, loss, mass, movable):
    if T is not None:
        return MirrorParams.from_transmission(T, loss, mass=mass, movable=movable)
    if rho is None or tau is None:
        raise ElementError("give either T or both rho and tau")
    return MirrorParams(rho, tau, loss, mass, movable)


def propagator(id, length=0.0, phase=0.0, gw_eta=0.0) -> Propagator:
    return Propagator(id, PropagatorParams(length, phase, gw_eta, gw_coupled=gw_eta != 0))


def squeezer(id, r, phi=0.0) -> Squeezer:
    return Squeezer(id, SqueezeParams(r, phi))
