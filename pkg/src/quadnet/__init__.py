"""Frequency-domain quantum-noise simulation of interferometers in the two-photon formalism."""

from .detection import HomodyneSettings, SpectrumSet, compute_spectra, gw_transfer, laser_noise, noise_extremes, quantum_noise, strain_noise
from .elements import (
    BeamBlock,
    Beamsplitter,
    Laser,
    LaserNoiseModel,
    Mirror,
    MirrorParams,
    Photodetector,
    Propagator,
    PropagatorParams,
    Squeezer,
    beamsplitter,
    mirror,
    propagator,
    squeezer,
)
from .quad import SqueezeParams, carrier_from_power_phase, rotate, squeeze_matrix, star
from .solver import DcSolution, SidebandSystem, SingularSystemError, TransferSet, assemble_sideband, solve, solve_dc, solve_sideband, sweep
from .topology import Diagnostic, OpticalNetwork, Port

__version__ = "0.1.0"

__all__ = [
    "BeamBlock",
    "Beamsplitter",
    "DcSolution",
    "Diagnostic",
    "HomodyneSettings",
    "Laser",
    "LaserNoiseModel",
    "Mirror",
    "MirrorParams",
    "OpticalNetwork",
    "Photodetector",
    "Port",
    "Propagator",
    "PropagatorParams",
    "SidebandSystem",
    "SingularSystemError",
    "SpectrumSet",
    "SqueezeParams",
    "Squeezer",
    "TransferSet",
    "assemble_sideband",
    "beamsplitter",
    "carrier_from_power_phase",
    "compute_spectra",
    "gw_transfer",
    "laser_noise",
    "mirror",
    "noise_extremes",
    "propagator",
    "quantum_noise",
    "rotate",
    "solve",
    "solve_dc",
    "solve_sideband",
    "squeeze_matrix",
    "squeezer",
    "star",
    "strain_noise",
    "sweep",
]
