"""Homodyne readout of solved transfer sets.

All spectra are single-sided and normalised to vacuum, so a shot-noise
limited readout gives ``nq2 = 1``. The GW transfer maps unit strain to
vacuum-normalised quadrature amplitude, which makes ``s_h`` a strain PSD in
1/Hz.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .elements import LaserNoiseModel
from .quad import homodyne_vector
from .solver import DcSolution, SweepFailure, TransferSet, solve_dc, sweep
from .topology import OpticalNetwork, Port


class DetectionError(ValueError):
    pass


@dataclass(frozen=True)
class HomodyneSettings:
    detector: str
    zeta: float | str = "carrier"

    def resolve(self, dc: DcSolution | None = None) -> float:
        """Homodyne angle in radians; ``"carrier"`` uses the carrier phase at the detector."""
        if self.zeta != "carrier":
            z = float(self.zeta)
            if not np.isfinite(z):
                raise DetectionError("homodyne angle must be finite")
            return z
        if dc is None:
            raise DetectionError("zeta='carrier' needs the carrier solution")
        d = dc.incoming(Port(self.detector, 0))
        if d @ d == 0:
            raise DetectionError(f"no carrier reaches detector {self.detector!r}; give zeta explicitly")
        return float(np.arctan2(d[1], d[0]))


def detected_rows(ts: TransferSet, detector: str) -> np.ndarray:
    """Response of the field entering ``detector`` to every source column."""
    return ts.field_rows(Port(detector, 0), incoming=True)


def _vacuum_cols(ts, select=None):
    cols = []
    for s in ts.slots:
        if s.kind == "vacuum" and (select is None or select(s)):
            cols.extend(range(s.cols.start, s.cols.stop))
    return cols


def noise_matrix(ts: TransferSet, detector: str, select=None) -> np.ndarray:
    """Real symmetric 2x2 quadrature covariance ``Re sum T T^dagger`` over vacuum slots.

    Since the vacuum inputs are unit and mutually independent, ``u^T C u``
    is the quantum noise at homodyne vector ``u``.
    """
    t = detected_rows(ts, detector)[:, _vacuum_cols(ts, select)]
    return (t @ t.conj().T).real


def quantum_noise(ts: TransferSet, hs: HomodyneSettings, dc: DcSolution | None = None, select=None) -> float:
    """Vacuum-normalised quantum noise ``N_Q^2`` at the homodyne angle.

    ``select`` optionally filters the vacuum slots, e.g. to split the budget.
    """
    u = homodyne_vector(hs.resolve(dc))
    return float(u @ noise_matrix(ts, hs.detector, select) @ u)


def noise_extremes(ts: TransferSet, detector: str, select=None):
    """``(min, max, zeta_at_min)`` of ``N_Q^2`` over all homodyne angles."""
    w, v = np.linalg.eigh(noise_matrix(ts, detector, select))
    z = float(np.mod(np.arctan2(v[1, 0], v[0, 0]), np.pi))
    return float(w[0]), float(w[1]), z


def laser_noise(
    ts: TransferSet,
    hs: HomodyneSettings,
    model: LaserNoiseModel,
    power: float,
    omega0: float,
    dc: DcSolution | None = None,
    laser: str | None = None,
) -> float:
    """Classical laser noise ``N_L^2`` from the excess-noise slot of ``laser``.

    With ``laser=None`` every laser slot is driven by ``model``
    independently.
    """
    u = homodyne_vector(hs.resolve(dc))
    t = detected_rows(ts, hs.detector)
    S = model.matrix(ts.freq, power, omega0)
    total = 0.0
    for s in ts.slots:
        if s.kind == "laser" and (laser is None or s.origin == laser):
            row = u @ t[:, s.cols]
            total += float(np.real(row @ S @ row.conj()))
    return total


def gw_transfer(ts: TransferSet, hs: HomodyneSettings, dc: DcSolution | None = None) -> complex:
    """Coherent GW transfer ``H_b`` from unit strain to the homodyne output."""
    try:
        slot = ts.system.slot("gw")
    except KeyError:
        warnings.warn("network has no GW-coupled propagator; H = 0", stacklevel=2)
        return 0j
    u = homodyne_vector(hs.resolve(dc))
    return complex(u @ detected_rows(ts, hs.detector)[:, slot.cols][:, 0])


def strain_noise(nq2, nl2, h_transfer):
    """``S_h = (N_Q^2 + N_L^2) / |H|^2``; points with ``H = 0`` come back NaN."""
    nq2, nl2 = np.asarray(nq2, dtype=float), np.asarray(nl2, dtype=float)
    h2 = np.abs(np.asarray(h_transfer)) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(h2 > 0, (nq2 + nl2) / np.where(h2 > 0, h2, 1.0), np.nan)
    return out if out.ndim else float(out)


@dataclass
class SpectrumSet:
    """Per-frequency spectra at one homodyne readout.

    ``status`` is ``"ok"`` or a short failure reason; failed points are NaN.
    """

    freq: np.ndarray
    zeta: float
    nq2: np.ndarray
    nq2_darkport: np.ndarray
    nq2_losses: np.ndarray
    nl2: np.ndarray
    nl2_amplitude: np.ndarray
    nl2_phase: np.ndarray
    h_transfer: np.ndarray
    s_h: np.ndarray
    status: list = field(default_factory=list)
    transfers: list = field(default_factory=list, repr=False)

    @property
    def ok(self) -> np.ndarray:
        return np.array([s == "ok" for s in self.status])


def laser_models(net: OpticalNetwork, override: LaserNoiseModel | None = None) -> dict:
    return {e.id: (override if override is not None else e.noise) for e in net.of_kind("laser")}


def compute_spectra(
    net: OpticalNetwork,
    freqs,
    hs: HomodyneSettings,
    dc: DcSolution | None = None,
    noise: LaserNoiseModel | None = None,
    workers: int | None = None,
    keep_transfers: bool = False,
) -> SpectrumSet:
    """Sweep ``freqs`` (Hz) and evaluate every spectrum at the readout ``hs``.

    The quantum noise is split into the vacuum entering through the detector
    itself (``nq2_darkport``) and every other vacuum entry point. Laser noise
    is split into its amplitude and phase parts with the cross term dropped.
    """
    dc = solve_dc(net) if dc is None else dc
    zeta = hs.resolve(dc)
    hz = HomodyneSettings(hs.detector, zeta)
    models = laser_models(net, noise)
    omega0 = net.omega0
    freqs = np.atleast_1d(np.asarray(freqs, dtype=float))
    results = sweep(net, freqs, dc, workers)
    n = len(freqs)
    cols = {k: np.full(n, np.nan) for k in ("nq2", "nq2_darkport", "nq2_losses", "nl2", "nl2_amplitude", "nl2_phase", "s_h")}
    h = np.full(n, np.nan + 0j)
    status = []
    has_gw = any(e.kind == "propagator" and e.params.gw_coupled and e.params.gw_eta for e in net.elements.values())
    own = f"{hs.detector}.vac"
    for i, ts in enumerate(results):
        if isinstance(ts, SweepFailure):
            status.append(f"error: {ts.error}")
            continue
        cols["nq2"][i] = quantum_noise(ts, hz)
        cols["nq2_darkport"][i] = quantum_noise(ts, hz, select=lambda s: s.key == own)
        cols["nq2_losses"][i] = quantum_noise(ts, hz, select=lambda s: s.key != own)
        amp = ph = tot = 0.0
        for lid, model in models.items():
            power = net[lid].power
            tot += laser_noise(ts, hz, model, power, omega0, laser=lid)
            amp += laser_noise(ts, hz, model.amplitude_part(), power, omega0, laser=lid)
            ph += laser_noise(ts, hz, model.phase_part(), power, omega0, laser=lid)
        cols["nl2"][i], cols["nl2_amplitude"][i], cols["nl2_phase"][i] = tot, amp, ph
        h[i] = gw_transfer(ts, hz) if has_gw else 0j
        cols["s_h"][i] = strain_noise(cols["nq2"][i], tot, h[i])
        status.append("ok")
    return SpectrumSet(
        freq=freqs,
        zeta=zeta,
        h_transfer=h,
        status=status,
        transfers=list(results) if keep_transfers else [],
        **cols,
    )
