"""Builders for the reference networks used by the examples and tests."""

from __future__ import annotations

from dataclasses import asdict, dataclass, replace

import numpy as np
from scipy.constants import c

from .analytic import CavityParams, MismatchParams
from .elements import (
    BeamBlock,
    Beamsplitter,
    Laser,
    LaserNoiseModel,
    MirrorParams,
    Photodetector,
    mirror,
    propagator,
    squeezer,
)
from .topology import OpticalNetwork


def fig1_network(reflectivity2: float = 0.9, laser_power: float | None = None) -> OpticalNetwork:
    """A single mirror between a beam block (or laser) and a photodetector."""
    net = OpticalNetwork()
    src = BeamBlock("block") if laser_power is None else Laser("laser", power=laser_power)
    net.extend([src, mirror("m", rho=np.sqrt(reflectivity2), tau=np.sqrt(1 - reflectivity2)), Photodetector("pd")])
    net.chain(f"{src.id}:0", "m:0", "m:1", "pd:0")
    return net


def laser_detector_network(power: float = 1.0, noise: LaserNoiseModel = LaserNoiseModel()) -> OpticalNetwork:
    net = OpticalNetwork()
    net.extend([Laser("laser", power=power, noise=noise), Photodetector("pd")])
    net.connect("laser:0", "pd:0")
    return net


def squeezer_network(r: float, phi: float = 0.0, power: float = 1.0) -> OpticalNetwork:
    net = OpticalNetwork()
    net.extend([Laser("laser", power=power), squeezer("sqz", r, phi), Photodetector("pd")])
    net.chain("laser:0", "sqz:0", "sqz:1", "pd:0")
    return net


def single_cavity_network(
    T_i: float,
    T_e: float,
    L: float,
    detuning: float = 0.0,
    power: float = 1.0,
    gw_eta: float = 1.0,
    wavelength: float = 1.064e-6,
) -> OpticalNetwork:
    """Laser -> input mirror -> arm -> end mirror -> transmitted-light detector.

    ``detuning`` is the one-way carrier phase offset from resonance (rad).
    The input mirror's +rho face points into the cavity, so resonance needs
    ``Theta = pi/2`` before the detuning is added.
    """
    net = OpticalNetwork(wavelength=wavelength)
    net.extend(
        [
            Laser("laser", power=power),
            mirror("itm", T=T_i),
            propagator("arm", L, np.pi / 2 + detuning, gw_eta),
            mirror("etm", T=T_e),
            Photodetector("pd"),
        ]
    )
    net.chain("laser:0", "itm:0", "itm:1", "arm:0", "arm:1", "etm:0", "etm:1", "pd:0")
    return net


@dataclass(frozen=True)
class PonderomotiveParams:
    """Twin detuned arm cavities sharing a light end mirror, fed by a Michelson.

    Detunings are in units of the wavelength per pass (``2 pi`` times the
    value gives the one-way phase). Loss mismatches are applied as extra
    loss on one arm, so the lossless ideal case stays physical.
    """

    wavelength: float = 1.064e-6
    m: float = 1e-3
    M: float = 0.25
    T_i: float = 4e-4
    loss_per_bounce: float = 5e-6
    detuning: float = 1e-5
    power: float = 1.0
    L: float = 0.02
    d_BS: float = 0.0
    d_alpha_M: float = 0.0
    d_eps_M: float = 0.0
    d_T: float = 0.0
    d_phi: float = 0.0
    d_loss: float = 0.0
    noise: LaserNoiseModel = LaserNoiseModel()

    @classmethod
    def table_values(cls, **kw) -> "PonderomotiveParams":
        """Nominal values with the nominal mirror-level asymmetries applied."""
        base = dict(d_BS=0.01, d_T=5e-6, d_phi=1e-7, d_loss=2e-6)
        base.update(kw)
        return cls(**base)

    @classmethod
    def ideal(cls, **kw) -> "PonderomotiveParams":
        base = dict(loss_per_bounce=0.0)
        base.update(kw)
        return cls(**base)

    def replace(self, **kw) -> "PonderomotiveParams":
        return replace(self, **kw)

    @property
    def delta(self) -> float:
        """Nominal one-way detuning phase (rad)."""
        return 2 * np.pi * self.detuning

    def arm_values(self):
        """Per-arm ``(T_i, T_e, delta, eps_M, alpha_M)`` for arms A and B.

        ``T_e`` is the round-trip loss at the end mirror. Without a nominal
        loss the loss mismatch goes entirely into one arm.
        """
        lb = self.loss_per_bounce
        if lb:
            te = (lb + self.d_loss / 2, lb - self.d_loss / 2)
        else:
            te = (max(self.d_loss, 0.0), max(-self.d_loss, 0.0))
        em = (max(self.d_eps_M, 0.0), max(-self.d_eps_M, 0.0))
        dphi = 2 * np.pi * self.d_phi
        return (
            (self.T_i + self.d_T / 2, te[0], self.delta + dphi / 2, em[0], self.d_alpha_M / 2),
            (self.T_i - self.d_T / 2, te[1], self.delta - dphi / 2, em[1], -self.d_alpha_M / 2),
        )

    def cavity(self, exact_pole: bool = True) -> CavityParams:
        """Mean-arm cavity quantities; both input- and end-mirror losses count as ``T_e``.

        With ``exact_pole`` the bandwidth is taken from the exact round-trip
        amplitude, ``-(c / 4L) ln[(1 - T_i - l_i)(1 - l_e)]``, which agrees with
        ``(T_i + T_e) c / 4L`` to leading order but removes the O(T) offset.
        """
        lb = self.loss_per_bounce
        T_e = 2 * lb
        if exact_pole:
            eps = -c / (4 * self.L) * np.log((1 - self.T_i - lb) * (1 - lb))
        else:
            eps = (self.T_i + T_e) * c / (4 * self.L)
        lam = self.delta * c / self.L
        I_c = circulating_power(self.power / 2, self.T_i, lb, lb, self.delta)
        return CavityParams(eps, lam, self.L, 2 * np.pi * c / self.wavelength, I_c, self.m, self.M, T_e * c / (4 * self.L))

    def mismatch(self) -> MismatchParams:
        return MismatchParams.from_asymmetries(
            self.T_i,
            2 * self.loss_per_bounce,
            self.delta,
            d_T=self.d_T,
            d_loss=self.d_loss,
            d_phi=2 * np.pi * self.d_phi,
            d_BS=self.d_BS,
            d_alpha_M=self.d_alpha_M,
            d_eps_M=self.d_eps_M,
        )


def circulating_power(P_in: float, T_i: float, loss_i: float, loss_e: float, delta: float) -> float:
    """Steady-state intracavity power from the exact geometric sum.

    ``loss_i`` is the input-mirror loss, ``loss_e`` the round-trip loss at a
    perfectly reflecting end mirror and ``delta`` the one-way detuning phase.
    """
    r = np.sqrt(1 - T_i - loss_i) * np.sqrt(1 - loss_e)
    return float(P_in * T_i / abs(1 - r * np.exp(2j * delta)) ** 2)


def ponderomotive_network(p: PonderomotiveParams) -> OpticalNetwork:
    """Michelson with detuned arm cavities ending on one shared, doubly coated light mirror.

    Arm A is the beamsplitter's transmitted (port 2) side and faces end
    mirror port 0; arm B is the reflected (port 1) side and faces port 1.
    The dark port is beamsplitter port 3.
    """
    net = OpticalNetwork(wavelength=p.wavelength)
    net.add(Laser("laser", power=p.power, noise=p.noise))
    tau2 = (1 + p.d_BS) / 2
    net.add(Beamsplitter("bs", MirrorParams(np.sqrt(1 - tau2), np.sqrt(tau2))))
    net.add(Photodetector("pd"))
    net.add(mirror("etm", rho=1.0, tau=0.0, mass=p.m, movable=True))
    net.connect("laser:0", "bs:0")
    net.connect("bs:3", "pd:0")
    lb = p.loss_per_bounce
    for name, bs_port, etm_port, base_phase, eta, vals in (
        ("A", 2, 0, np.pi / 2, 1.0, p.arm_values()[0]),
        ("B", 1, 1, np.pi, -1.0, p.arm_values()[1]),
    ):
        T_i, T_e, delta, eps_M, alpha_M = vals
        prev = f"bs:{bs_port}"
        if alpha_M:
            net.add(propagator(f"mich{name}", 0.0, alpha_M))
            net.connect(prev, f"mich{name}:0")
            prev = f"mich{name}:1"
        if eps_M:
            net.add(mirror(f"mloss{name}", rho=0.0, tau=np.sqrt(1 - eps_M), loss=eps_M))
            net.connect(prev, f"mloss{name}:0")
            prev = f"mloss{name}:1"
        net.add(mirror(f"itm{name}", T=T_i, loss=lb, mass=p.M, movable=True))
        net.connect(prev, f"itm{name}:0")
        net.add(propagator(f"arm{name}", p.L, base_phase + delta, eta))
        net.connect(f"itm{name}:1", f"arm{name}:0")
        prev = f"arm{name}:1"
        if T_e:
            a = 1 - np.sqrt(1 - T_e)
            net.add(mirror(f"closs{name}", rho=0.0, tau=np.sqrt(1 - a), loss=a))
            net.connect(prev, f"closs{name}:0")
            prev = f"closs{name}:1"
        net.connect(prev, f"etm:{etm_port}")
    return net


def ponderomotive_summary(p: PonderomotiveParams) -> dict:
    """Derived scalar quantities, handy for reports."""
    from .analytic import mode_params

    cp = p.cavity()
    d, cm = mode_params(cp, "differential"), mode_params(cp, "common")
    return {
        "epsilon_hz": cp.epsilon / (2 * np.pi),
        "lambda_hz": cp.lam / (2 * np.pi),
        "alpha": cp.alpha,
        "I_c": cp.I_c,
        "theta_D_hz": d.theta_os / (2 * np.pi),
        "theta_C_hz": cm.theta_os / (2 * np.pi),
        "params": asdict(p),
    }


FIG5_NOISE = LaserNoiseModel(amplitude_noise=1e-8, frequency_noise=1e-4)


def example_configs() -> dict:
    """The configurations shipped in ``quadnet/configs``, built from the functions above."""
    from .config import network_config

    log = lambda a, b, n: {"start": a, "stop": b, "points": n, "scale": "log"}
    out = {}
    out["fig1_mirror"] = network_config(
        fig1_network(0.9, laser_power=1.0), "pd", log(1.0, 1e5, 41), description="laser, mirror with R = 0.9, detector"
    )
    out["laser_detector"] = network_config(laser_detector_network(1.0), "pd", log(1.0, 1e4, 21), description="laser facing a detector")
    out["squeezer"] = network_config(
        squeezer_network(1.0, 0.0, 1.0), "pd", log(1.0, 1e4, 21), zeta_sweep=True, description="squeezer with r = 1 between laser and detector"
    )
    ideal = PonderomotiveParams.ideal()
    out["fig4_ideal"] = network_config(
        ponderomotive_network(ideal),
        "pd",
        log(10.0, 1e5, 301),
        zeta=1.5 * ideal.cavity().alpha,
        description="lossless symmetric twin-cavity ponderomotive squeezer, read out at 3 alpha / 2",
    )
    tab = PonderomotiveParams.table_values(noise=FIG5_NOISE)
    out["fig4_ponderomotive"] = network_config(
        ponderomotive_network(tab),
        "pd",
        log(10.0, 1e5, 301),
        zeta=1.5 * tab.cavity().alpha,
        description="twin-cavity ponderomotive squeezer with nominal losses, asymmetries and laser noise",
    )
    return out


def write_example_configs(directory) -> list:
    from pathlib import Path

    from .config import save_config

    paths = []
    for name, cfg in example_configs().items():
        path = Path(directory) / f"{name}.json"
        save_config(cfg, path)
        paths.append(path)
    return paths


if __name__ == "__main__":
    import sys

    for p in write_example_configs(sys.argv[1] if len(sys.argv) > 1 else "."):
        print(p)
