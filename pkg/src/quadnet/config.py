"""JSON run configurations: loading, validation and serialisation.

A configuration has the sections ``elements``, ``connections``,
``laser`` (optional noise override), ``detection`` and ``sweep``, plus
optional ``wavelength``, ``workers`` and ``description``. Errors carry a
machine-readable ``code`` (``parse``, ``schema`` or ``topology``) and the
line or field they refer to.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .detection import HomodyneSettings
from .elements import (
    BeamBlock,
    ElementError,
    Laser,
    LaserNoiseModel,
    Photodetector,
    beamsplitter,
    mirror,
    propagator,
    squeezer,
)
from .topology import Diagnostic, OpticalNetwork, TopologyError

DEFAULT_WAVELENGTH = 1.064e-6


class ConfigError(ValueError):
    """Configuration problem; ``code`` is one of ``parse``, ``schema``, ``topology``."""

    def __init__(self, code, message, path=None, line=None, diagnostics=()):
        self.code = code
        self.path = path
        self.line = line
        self.diagnostics = list(diagnostics)
        where = f" (line {line})" if line is not None else f" (at {path})" if path else ""
        super().__init__(f"[{code}] {message}{where}")
        self.message = message

    def to_dict(self) -> dict:
        return {
            "code": self.code,
            "message": self.message,
            "path": self.path,
            "line": self.line,
            "diagnostics": [d.to_dict() for d in self.diagnostics],
        }


def _schema():
    return json.loads(resources.files("quadnet").joinpath("schema.json").read_text())


_VALIDATOR = None


def _validator():
    global _VALIDATOR
    if _VALIDATOR is None:
        schema = _schema()
        jsonschema.Draft202012Validator.check_schema(schema)
        _VALIDATOR = jsonschema.Draft202012Validator(schema)
    return _VALIDATOR


def _json_path(parts) -> str:
    out = ""
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else (f".{p}" if out else str(p))
    return out or "<root>"


@dataclass
class RunConfig:
    """A validated run: network, readout, laser-noise override and frequency grid."""

    network: OpticalNetwork
    detection: HomodyneSettings
    sweep: dict
    noise: LaserNoiseModel | None = None
    zeta_sweep: bool = False
    workers: int | None = None
    description: str = ""
    source: str | None = field(default=None, compare=False)

    @property
    def freqs(self) -> np.ndarray:
        return frequency_grid(self.sweep)

    def to_dict(self) -> dict:
        return config_to_dict(self)

    def digest(self) -> str:
        """sha256 of the canonical JSON form; independent of file formatting."""
        return hashlib.sha256(dumps_config(self, indent=None).encode()).hexdigest()


def frequency_grid(sweep: dict) -> np.ndarray:
    if "frequencies" in sweep:
        return np.asarray(sweep["frequencies"], dtype=float)
    start, stop, n = float(sweep["start"]), float(sweep["stop"]), int(sweep["points"])
    if n == 1:
        return np.array([start])
    if sweep.get("scale", "log") == "log":
        return np.geomspace(start, stop, n)
    return np.linspace(start, stop, n)


def noise_from_dict(d: dict | None) -> LaserNoiseModel:
    if not d:
        return LaserNoiseModel()
    s12 = d.get("s12", 0.0)
    if isinstance(s12, list):
        s12 = complex(s12[0], s12[1])
    return LaserNoiseModel(
        s11=float(d.get("s11", 0.0)),
        s22=float(d.get("s22", 0.0)),
        s12=s12,
        amplitude_noise=float(d.get("amplitude_noise", 0.0)),
        frequency_noise=float(d.get("frequency_noise", 0.0)),
    )


def noise_to_dict(n: LaserNoiseModel) -> dict:
    out = {k: getattr(n, k) for k in ("s11", "s22", "amplitude_noise", "frequency_noise") if getattr(n, k)}
    s12 = complex(n.s12)
    if s12:
        out["s12"] = s12.real if s12.imag == 0 else [s12.real, s12.imag]
    return out


def element_from_dict(d: dict):
    kind = d["type"]
    eid = d["id"]
    if kind in ("mirror", "beamsplitter"):
        if d.get("resonance") is not None:
            raise ElementError("pendulum resonances are not implemented; leave 'resonance' unset")
        make = mirror if kind == "mirror" else beamsplitter
        kw = dict(loss=d.get("loss", 0.0), mass=d.get("mass", np.inf), movable=d.get("movable", False))
        if "T" in d:
            return make(eid, T=d["T"], **kw)
        return make(eid, rho=d["rho"], tau=d["tau"], **kw)
    if kind == "propagator":
        return propagator(eid, d["length"], d.get("phase", 0.0), d.get("gw_eta", 0.0))
    if kind == "squeezer":
        return squeezer(eid, d["r"], d.get("phi", 0.0))
    if kind == "laser":
        return Laser(eid, power=float(d["power"]), phase=float(d.get("phase", 0.0)), noise=noise_from_dict(d.get("noise")))
    if kind == "block":
        return BeamBlock(eid)
    if kind == "photodetector":
        return Photodetector(eid)
    raise ElementError(f"unknown element type {kind!r}")


def config_from_dict(data: dict, source: str | None = None) -> RunConfig:
    """Validate ``data`` against the schema and the topology rules."""
    errors = sorted(_validator().iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        raise ConfigError("schema", e.message, path=_json_path(e.absolute_path))
    net = OpticalNetwork(wavelength=float(data.get("wavelength", DEFAULT_WAVELENGTH)))
    for i, ed in enumerate(data["elements"]):
        try:
            net.add(element_from_dict(ed))
        except (ElementError, ValueError) as exc:
            raise ConfigError("schema", str(exc), path=f"elements[{i}]") from None
    for x, y in data["connections"]:
        net.connect(x, y)
    diags = net.validate(require_sources=False)
    det = data["detection"]["detector"]
    if det not in net.elements or net[det].kind != "photodetector":
        diags.append(Diagnostic("bad_detector", "detection.detector must name a photodetector", det))
    if diags:
        raise ConfigError("topology", f"{len(diags)} topology problem(s): {diags[0]}", path="connections", diagnostics=diags)
    sweep = dict(data["sweep"])
    freqs = frequency_grid(sweep)
    if net.movable and np.any(freqs <= 0):
        raise ConfigError("schema", "frequencies must be > 0 when any element is movable", path="sweep")
    if "start" in sweep and sweep["stop"] < sweep["start"]:
        raise ConfigError("schema", "sweep.stop must not be below sweep.start", path="sweep.stop")
    if "start" in sweep and sweep.get("scale", "log") == "log" and sweep["start"] <= 0:
        raise ConfigError("schema", "a log sweep needs start > 0", path="sweep.start")
    noise = data.get("laser", {}).get("noise")
    return RunConfig(
        network=net,
        detection=HomodyneSettings(det, data["detection"].get("zeta", "carrier")),
        sweep=sweep,
        noise=None if noise is None else noise_from_dict(noise),
        zeta_sweep=bool(data["detection"].get("zeta_sweep", False)),
        workers=data.get("workers"),
        description=data.get("description", ""),
        source=source,
    )


def loads_config(text: str, source: str | None = None) -> RunConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("parse", exc.msg, line=exc.lineno) from None
    if not isinstance(data, dict):
        raise ConfigError("schema", "top level must be an object", path="<root>")
    return config_from_dict(data, source)


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError("parse", f"cannot read {path}: {exc.strerror}") from None
    return loads_config(text, source=str(path))


def config_to_dict(cfg: RunConfig) -> dict:
    """Canonical dictionary form; ``config_from_dict`` inverts it exactly."""
    net = cfg.network
    out = {}
    if cfg.description:
        out["description"] = cfg.description
    out["wavelength"] = net.wavelength
    if cfg.workers:
        out["workers"] = cfg.workers
    out["elements"] = [e.to_dict() for e in net.elements.values()]
    out["connections"] = [[str(c.x), str(c.y)] for c in net.connections]
    if cfg.noise is not None:
        out["laser"] = {"noise": noise_to_dict(cfg.noise)}
    det = {"detector": cfg.detection.detector, "zeta": cfg.detection.zeta}
    if cfg.zeta_sweep:
        det["zeta_sweep"] = True
    out["detection"] = det
    out["sweep"] = dict(cfg.sweep)
    return out


def dumps_config(cfg: RunConfig, indent: int | None = 2) -> str:
    return json.dumps(config_to_dict(cfg), indent=indent, sort_keys=indent is None)


def save_config(cfg: RunConfig, path) -> None:
    Path(path).write_text(dumps_config(cfg) + "\n", encoding="utf-8")


def shipped_configs() -> dict:
    """Names and paths of the example configurations bundled with the package."""
    root = resources.files("quadnet").joinpath("configs")
    return {p.name[:-5]: Path(str(p)) for p in root.iterdir() if p.name.endswith(".json")}


def network_config(net: OpticalNetwork, detector: str, sweep: dict, **kw) -> RunConfig:
    """Wrap a programmatically built network, checking it as a file would be."""
    cfg = RunConfig(net, HomodyneSettings(detector, kw.pop("zeta", "carrier")), sweep, **kw)
    try:
        net.check()
    except TopologyError as exc:
        raise ConfigError("topology", str(exc), diagnostics=exc.diagnostics) from None
    return config_from_dict(config_to_dict(cfg))
