"""Port graph of an optical network and enumeration of its directed fields."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.constants import c

from .elements import Element


class TopologyError(ValueError):
    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(str(d) for d in self.diagnostics))


@dataclass(frozen=True, order=True)
class Port:
    element: str
    index: int

    def __str__(self):
        return f"{self.element}:{self.index}"

    @classmethod
    def parse(cls, spec) -> "Port":
        """Accept ``Port``, ``(id, index)`` or ``"id:index"``."""
        if isinstance(spec, Port):
            return spec
        if isinstance(spec, str):
            eid, sep, idx = spec.rpartition(":")
            if not sep:
                raise ValueError(f"port spec {spec!r} is not of the form 'id:index'")
            return cls(eid, int(idx))
        eid, idx = spec
        return cls(str(eid), int(idx))


@dataclass(frozen=True)
class Connection:
    x: Port
    y: Port


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    element: str | None = None
    port: int | None = None

    def __str__(self):
        where = self.element if self.port is None else f"{self.element}:{self.port}"
        return f"[{self.code}] {where}: {self.message}" if where else f"[{self.code}] {self.message}"

    def to_dict(self):
        return {"code": self.code, "message": self.message, "element": self.element, "port": self.port}


@dataclass(frozen=True)
class FieldIndex:
    """Directed fields ordered by producing (element, port).

    ``out_field[port]`` is the field leaving ``port``; ``in_field[port]`` is
    the field arriving at it, i.e. the one leaving its partner.
    """

    producers: tuple
    out_field: dict
    in_field: dict

    def __len__(self):
        return len(self.producers)


@dataclass
class OpticalNetwork:
    elements: dict = field(default_factory=dict)
    connections: list = field(default_factory=list)
    wavelength: float = 1.064e-6

    @property
    def omega0(self) -> float:
        """Carrier angular frequency in rad/s."""
        return 2 * np.pi * c / self.wavelength

    def add(self, element: Element) -> Element:
        if element.id in self.elements:
            raise ValueError(f"duplicate element id {element.id!r}")
        self.elements[element.id] = element
        return element

    def extend(self, elements):
        for e in elements:
            self.add(e)
        return self

    def connect(self, x, y) -> Connection:
        conn = Connection(Port.parse(x), Port.parse(y))
        self.connections.append(conn)
        return conn

    def chain(self, *ports):
        """Connect consecutive pairs: ``chain(p0, p1, p2, p3)`` links p0-p1 and p2-p3."""
        if len(ports) % 2:
            raise ValueError("chain needs an even number of ports")
        for x, y in zip(ports[::2], ports[1::2]):
            self.connect(x, y)
        return self

    def __getitem__(self, eid) -> Element:
        return self.elements[eid]

    def of_kind(self, kind) -> list:
        return [e for e in self.elements.values() if e.kind == kind]

    @property
    def lasers(self):
        return [e.id for e in self.of_kind("laser")]

    @property
    def detectors(self):
        return [e.id for e in self.of_kind("photodetector")]

    @property
    def movable(self):
        return [e.id for e in self.elements.values() if e.movable]

    @property
    def n_ports(self) -> int:
        return sum(e.n_ports for e in self.elements.values())

    def validate(self, require_sources: bool = False) -> list:
        """Return a list of :class:`Diagnostic`; empty means the network is sound."""
        diags = []
        seen = {}
        for conn in self.connections:
            if conn.x == conn.y:
                diags.append(Diagnostic("self_connection", "port connected to itself", conn.x.element, conn.x.index))
            for p in (conn.x, conn.y):
                el = self.elements.get(p.element)
                if el is None:
                    diags.append(Diagnostic("unknown_element", "connection refers to an unknown element", p.element, p.index))
                    continue
                if not 0 <= p.index < el.n_ports:
                    diags.append(Diagnostic("bad_port", f"{el.kind} has {el.n_ports} port(s)", p.element, p.index))
                    continue
                if p in seen:
                    diags.append(Diagnostic("port_reused", "port appears in more than one connection", p.element, p.index))
                seen[p] = conn
        for el in self.elements.values():
            for i in range(el.n_ports):
                if Port(el.id, i) not in seen:
                    diags.append(Diagnostic("unconnected_port", "port is not connected", el.id, i))
        if require_sources:
            if not self.lasers:
                diags.append(Diagnostic("no_laser", "network has no laser"))
            if not self.detectors:
                diags.append(Diagnostic("no_detector", "network has no photodetector"))
        return diags

    def check(self, require_sources: bool = False):
        diags = self.validate(require_sources)
        if diags:
            raise TopologyError(diags)
        return self

    def partner(self) -> dict:
        out = {}
        for conn in self.connections:
            out[conn.x] = conn.y
            out[conn.y] = conn.x
        return out

    def enumerate_fields(self) -> FieldIndex:
        """Index the ``P`` directed fields, one per output port, in insertion order."""
        self.check()
        producers = tuple(Port(e.id, i) for e in self.elements.values() for i in range(e.n_ports))
        out_field = {p: k for k, p in enumerate(producers)}
        partner = self.partner()
        in_field = {p: out_field[partner[p]] for p in producers}
        return FieldIndex(producers, out_field, in_field)
