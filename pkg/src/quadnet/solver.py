"""Assembly and solution of the carrier and sideband linear systems.

Every directed field gets a 2x2 block row with ``-1`` on the diagonal; the
element owning the field fills the rest. Movable elements append one scalar
unknown each (their scaled displacement) after the field blocks. The system
is ``M x = u`` with one right-hand-side column per unit source quadrature,
so the solution columns are directly the transfer matrices from each source.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .elements import ElementError
from .topology import FieldIndex, OpticalNetwork, Port

PIVOT_TOL = 1e-13
RESIDUAL_TOL = 1e-10


class SolverError(RuntimeError):
    pass


class SingularSystemError(SolverError):
    """The system matrix is singular within the pivot tolerance (a resonance)."""

    def __init__(self, message, freq=None):
        super().__init__(message)
        self.freq = freq


class ResidualError(SolverError):
    pass


@dataclass(frozen=True)
class SourceSlot:
    key: str
    kind: str  # "vacuum" | "laser" | "gw"
    origin: str
    cols: slice


def _slot_kind(key):
    if key == "gw":
        return "gw"
    if key == "laser":
        return "laser"
    return "vacuum"


def _lu(matrix, freq=None):
    lu, piv = sla.lu_factor(matrix, check_finite=True)
    scale = np.abs(matrix).sum(axis=0).max()
    pivots = np.abs(np.diag(lu))
    if scale == 0 or pivots.min() < PIVOT_TOL * scale:
        where = "" if freq is None else f" at f = {freq:.12g} Hz"
        raise SingularSystemError(f"system matrix singular within pivot tolerance{where}", freq)
    return lu, piv


_WIDE = {np.dtype(float): np.longdouble, np.dtype(complex): np.clongdouble}


def _solve_refined(matrix, lu_piv, rhs, refine=3):
    """LU solve plus iterative refinement with residuals in extended precision.

    Near sharp resonances the double-precision residual floor,
    ``eps * || |M| |x| || / ||b||``, can exceed the residual tolerance. Residuals
    and the accumulated solution are therefore kept in ``longdouble`` (80-bit
    on x86; plain double elsewhere). Returns ``(x, residual)`` where the
    residual is that of the refined wide solution and ``x`` its double rounding.
    """
    wide = _WIDE[np.result_type(matrix, rhs)]
    Mw, bw = matrix.astype(wide), rhs.astype(wide)
    x = sla.lu_solve(lu_piv, rhs).astype(wide)
    for _ in range(refine):
        r = bw - Mw @ x
        x = x + sla.lu_solve(lu_piv, r.astype(rhs.dtype))
    res = relative_residual(Mw, x, bw)
    return x.astype(rhs.dtype), res


def relative_residual(matrix, x, rhs) -> float:
    """Worst per-column ``|M x - b| / |b|`` over the nonzero columns."""
    if rhs.size == 0:
        return 0.0
    r = np.sqrt(np.sum(np.abs(matrix @ x - rhs) ** 2, axis=0))
    b = np.sqrt(np.sum(np.abs(rhs) ** 2, axis=0))
    mask = b > 0
    return float((r[mask] / b[mask]).max()) if mask.any() else 0.0


# ---------------------------------------------------------------------------
# DC stage


@dataclass(frozen=True)
class DcSolution:
    fields: FieldIndex
    carriers: np.ndarray  # (P, 2) real
    residual: float

    def out(self, port) -> np.ndarray:
        return self.carriers[self.fields.out_field[Port.parse(port)]]

    def incoming(self, port) -> np.ndarray:
        return self.carriers[self.fields.in_field[Port.parse(port)]]

    def power_out(self, port) -> float:
        d = self.out(port)
        return 0.5 * float(d @ d)

    def power_in(self, port) -> float:
        d = self.incoming(port)
        return 0.5 * float(d @ d)

    def element_carriers(self, element) -> dict:
        """``{(port, 'in'|'out'): D}`` for every port of ``element``."""
        out = {}
        for i in range(element.n_ports):
            p = Port(element.id, i)
            out[(i, "in")] = self.carriers[self.fields.in_field[p]]
            out[(i, "out")] = self.carriers[self.fields.out_field[p]]
        return out


def _field_rows(net, fields, Omega, carriers_of, dtype, dc=False):
    """Matrix and source blocks for all field rows plus motion rows."""
    P = len(fields)
    movable = net.movable
    motion_index = {eid: 2 * P + k for k, eid in enumerate(movable)}
    n = 2 * P + len(movable)
    M = np.zeros((n, n), dtype=dtype)
    sources = []  # (slot key, kind, origin, row, injection block)
    omega0 = net.omega0
    for el in net.elements.values():
        carriers = carriers_of(el) if carriers_of is not None else None
        rows = el.emit(Omega, carriers, omega0, dc=dc)
        for row in rows.rows:
            r = 2 * fields.out_field[Port(el.id, row.port)]
            M[r : r + 2, r : r + 2] -= np.eye(2)
            for p, coef in row.inputs.items():
                col = 2 * fields.in_field[Port(el.id, p)]
                M[r : r + 2, col : col + 2] += coef
            if row.motion is not None:
                M[r : r + 2, motion_index[el.id]] += row.motion
            for key, inj in row.sources.items():
                gkey = "gw" if key == "gw" else f"{el.id}.{key}"
                sources.append((gkey, _slot_kind(key), el.id, r, np.atleast_2d(inj)))
        if rows.motion is not None:
            k = motion_index[el.id]
            M[k, k] = -1.0
            for (p, direction), coef in rows.motion.coeffs.items():
                f = fields.out_field if direction == "out" else fields.in_field
                col = 2 * f[Port(el.id, p)]
                M[k, col : col + 2] += coef
    return M, sources, motion_index


def _collect_sources(n, sources, dtype):
    slots, width, order = [], {}, []
    for key, kind, origin, _, inj in sources:
        if key not in width:
            width[key] = (kind, origin, inj.shape[1])
            order.append(key)
    start = 0
    index = {}
    for key in order:
        kind, origin, k = width[key]
        slots.append(SourceSlot(key, kind, origin, slice(start, start + k)))
        index[key] = slice(start, start + k)
        start += k
    rhs = np.zeros((n, start), dtype=dtype)
    for key, _, _, r, inj in sources:
        if key in index:
            rhs[r : r + 2, index[key]] -= inj
    return slots, rhs


def dc_matrix(net: OpticalNetwork):
    """Real carrier-stage matrix, right-hand side and field index."""
    fields = net.enumerate_fields()
    M, sources, _ = _field_rows(net, fields, 0.0, None, complex, dc=True)
    n = 2 * len(fields)
    M = M[:n, :n]
    if np.abs(M.imag).max(initial=0.0) > 0:
        raise SolverError("carrier-stage matrix is not real")
    M = M.real
    rhs = np.zeros(n)
    for key, _, _, r, inj in sources:
        if key.endswith(".carrier"):
            rhs[r : r + 2] -= inj[:, 0].real
    return M, rhs, fields


def solve_dc(net: OpticalNetwork) -> DcSolution:
    """Solve the carrier fields everywhere (real arithmetic, no radiation pressure)."""
    M, rhs, fields = dc_matrix(net)
    lu = _lu(M)
    x, res = _solve_refined(M, lu, rhs[:, None])
    if res > RESIDUAL_TOL:
        raise ResidualError(f"carrier solve residual {res:.3g} exceeds {RESIDUAL_TOL}")
    return DcSolution(fields, x[:, 0].reshape(-1, 2), res)


# ---------------------------------------------------------------------------
# sideband stage


@dataclass
class SidebandSystem:
    matrix: np.ndarray
    rhs: np.ndarray
    slots: list
    fields: FieldIndex
    motion_index: dict
    freq: float

    @property
    def Omega(self) -> float:
        return 2 * np.pi * self.freq

    def slot(self, key) -> SourceSlot:
        for s in self.slots:
            if s.key == key:
                return s
        raise KeyError(key)


def assemble_sideband(net: OpticalNetwork, dc: DcSolution, freq: float) -> SidebandSystem:
    """Assemble the sideband system at frequency ``freq`` (Hz)."""
    if not np.isfinite(freq):
        raise ElementError("sideband frequency must be finite")
    if freq == 0 and net.movable:
        raise ElementError("movable elements make the system undefined at f = 0")
    Omega = 2 * np.pi * freq
    M, sources, motion_index = _field_rows(net, dc.fields, Omega, dc.element_carriers, complex)
    slots, rhs = _collect_sources(M.shape[0], sources, complex)
    return SidebandSystem(M, rhs, slots, dc.fields, motion_index, float(freq))


@dataclass
class TransferSet:
    """Responses of every field and motion variable to every source slot."""

    system: SidebandSystem
    x: np.ndarray
    residual: float

    @property
    def freq(self) -> float:
        return self.system.freq

    @property
    def slots(self):
        return self.system.slots

    def field_rows(self, port, incoming=True) -> np.ndarray:
        """2 x n_cols response of the field arriving at (or leaving) ``port``."""
        port = Port.parse(port)
        f = self.system.fields.in_field if incoming else self.system.fields.out_field
        k = 2 * f[port]
        return self.x[k : k + 2]

    def transfer(self, port, slot_key, incoming=True) -> np.ndarray:
        return self.field_rows(port, incoming)[:, self.system.slot(slot_key).cols]

    def motion(self, element_id, slot_key) -> np.ndarray:
        return self.x[self.system.motion_index[element_id], self.system.slot(slot_key).cols]


def solve_sideband(sys: SidebandSystem) -> TransferSet:
    """Factor once, solve all source columns, refine, and check the residual."""
    lu = _lu(sys.matrix, sys.freq)
    x, res = _solve_refined(sys.matrix, lu, sys.rhs)
    if res > RESIDUAL_TOL:
        raise ResidualError(f"sideband residual {res:.3g} exceeds {RESIDUAL_TOL} at f = {sys.freq:.12g} Hz")
    return TransferSet(sys, x, res)


def solve(net: OpticalNetwork, freq: float, dc: DcSolution | None = None) -> TransferSet:
    dc = solve_dc(net) if dc is None else dc
    return solve_sideband(assemble_sideband(net, dc, freq))


def log_abs_det(net: OpticalNetwork, freq: float, dc: DcSolution | None = None) -> float:
    """``log|det M|`` of the sideband system, used to locate resonances."""
    dc = solve_dc(net) if dc is None else dc
    sys = assemble_sideband(net, dc, freq)
    return float(np.linalg.slogdet(sys.matrix)[1])


@dataclass(frozen=True)
class SweepFailure:
    freq: float
    error: Exception

    def __bool__(self):
        return False


def _sweep_point(net, dc, f):
    try:
        return solve_sideband(assemble_sideband(net, dc, f))
    except (SolverError, ElementError, np.linalg.LinAlgError, ValueError) as exc:
        return SweepFailure(float(f), exc)


def sweep(net: OpticalNetwork, freqs, dc: DcSolution | None = None, workers: int | None = None) -> list:
    """Solve at every frequency (Hz); failures are returned in place as :class:`SweepFailure`.

    Points are independent, so ``workers > 1`` evaluates them on a thread
    pool. Results keep the input order and do not depend on ``workers``.
    """
    dc = solve_dc(net) if dc is None else dc
    freqs = [float(f) for f in np.atleast_1d(freqs)]
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda f: _sweep_point(net, dc, f), freqs))
    return [_sweep_point(net, dc, f) for f in freqs]
