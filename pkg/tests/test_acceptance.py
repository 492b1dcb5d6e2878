"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines as they
happen; they are also repeated in the terminal summary.
"""

import time

import numpy as np
import pytest
from scipy.constants import c, hbar
from scipy.optimize import least_squares, minimize_scalar

from conftest import VERDICTS
from netgen import random_static_network
from quadnet import Laser, OpticalNetwork, Photodetector, mirror, propagator
from quadnet.analytic import diff_mode_io, mismatch_couplings, mode_params, squeeze_spectrum_lf
from quadnet.detection import HomodyneSettings, compute_spectra, laser_noise, noise_extremes, quantum_noise
from quadnet.interferometers import FIG5_NOISE, PonderomotiveParams, ponderomotive_network
from quadnet.solver import log_abs_det, solve, solve_dc, sweep


def verdict(n, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"
    print(line)
    VERDICTS.append(line)
    assert ok, line


def local_maxima(f, y):
    i = np.flatnonzero((y[1:-1] > y[:-2]) & (y[1:-1] > y[2:])) + 1
    return f[i]


def nearest_rel(features, target):
    return float(np.min(np.abs(np.asarray(features) / target - 1))) if len(features) else np.inf


@pytest.fixture(scope="module")
def table():
    p = PonderomotiveParams.table_values()
    cp = p.cavity()
    return p, cp, mode_params(cp).theta_os / (2 * np.pi), mode_params(cp, "common").theta_os / (2 * np.pi)


def test_c1_vacuum_preservation():
    rng = np.random.default_rng(2024)
    zetas = np.linspace(0, np.pi, 16, endpoint=False)
    freqs = np.geomspace(1.0, 1e6, 20)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(50):
        net = random_static_network(rng, max_elements=6)
        for ts in sweep(net, freqs):
            for z in zetas:
                worst = max(worst, abs(quantum_noise(ts, HomodyneSettings("pd", z)) - 1))
    dt = time.perf_counter() - t0
    verdict(1, worst <= 1e-9 and dt < 10, f"max |nq2 - 1| = {worst:.2e} over 50 x 20 x 16 in {dt:.2f} s")


def test_c2_loss_normalisation():
    rng = np.random.default_rng(77)
    zetas = np.linspace(0, np.pi, 16, endpoint=False)
    worst = 0.0
    for _ in range(50):
        net = random_static_network(rng, max_elements=6, lossy=True, laser=False)
        for ts in sweep(net, np.geomspace(1.0, 1e6, 8)):
            for z in zetas:
                worst = max(worst, abs(quantum_noise(ts, HomodyneSettings("pd", z)) - 1))
    verdict(2, worst <= 1e-9, f"max |nq2 - 1| = {worst:.2e} on 50 lossy networks")


def test_c3_radiation_pressure_resonance():
    rng = np.random.default_rng(1)
    worst = 0.0
    for _ in range(20):
        rho = rng.uniform(0.2, 0.98)
        tau = np.sqrt(1 - rho**2)
        Ia, Id = rng.uniform(0.2, 5, 2)
        dth = rng.uniform(-np.pi + 0.2, -0.2)
        M = 10 ** rng.uniform(-3, 0)
        net = OpticalNetwork()
        net.extend([Laser("la", power=Ia, phase=dth), mirror("m", rho=rho, tau=tau, mass=M, movable=True), Laser("ld", power=Id)])
        net.chain("la:0", "m:0", "m:1", "ld:0")
        f_M = np.sqrt(-8 * rho * tau * net.omega0 * np.sqrt(Ia * Id) * np.sin(dth) / (M * c**2)) / (2 * np.pi)
        dc = solve_dc(net)
        r = minimize_scalar(
            lambda f: log_abs_det(net, f, dc), bounds=(0.5 * f_M, 2 * f_M), method="bounded", options={"xatol": 1e-9 * f_M}
        )
        worst = max(worst, abs(r.x / f_M - 1))
    verdict(3, worst <= 1e-3, f"worst |f_min / f_M - 1| = {worst:.2e} over 20 draws")


def test_c4_differential_mode_transfer():
    p = PonderomotiveParams.ideal()
    net = ponderomotive_network(p)
    cp = p.cavity()
    mp = mode_params(cp)
    freqs = np.geomspace(10, 1e5, 500)
    t0 = time.perf_counter()
    dc = solve_dc(net)
    results = sweep(net, freqs, dc)
    dt = time.perf_counter() - t0
    worst = 0.0
    for f, ts in zip(freqs, results):
        T = ts.transfer("pd:0", "pd.vac")
        A, _ = diff_mode_io(cp, mp, 2 * np.pi * f)
        worst = max(worst, float((np.abs(T - A) / np.abs(A)).max()))
    verdict(4, worst <= 0.01 and dt < 30, f"worst entrywise relative error {worst:.2e}, 500 points in {dt:.2f} s")


def test_c5_optical_spring_frequencies(table):
    p, cp, th_D, th_C = table
    net = ponderomotive_network(p)
    freqs = np.geomspace(100, 2e4, 2000)
    spec = compute_spectra(net, freqs, HomodyneSettings("pd", 1.5 * cp.alpha))
    peaks = local_maxima(freqs, spec.nq2)
    fD = peaks[np.argmin(np.abs(peaks / th_D - 1))]
    fC = peaks[np.argmin(np.abs(peaks / th_C - 1))]
    ok = abs(fD / 8e3 - 1) <= 0.1 and abs(fC / 360 - 1) <= 0.1 and abs(fD / th_D - 1) <= 0.01 and abs(fC / th_C - 1) <= 0.01
    verdict(
        5,
        bool(ok and spec.ok.all()),
        f"features at {fD:.1f} Hz (Theta_D {th_D:.1f}) and {fC:.2f} Hz (Theta_C {th_C:.2f})",
    )


def test_c6_low_frequency_squeeze_spectrum():
    p = PonderomotiveParams.ideal()
    net = ponderomotive_network(p)
    cp = p.cavity()
    ts = solve(net, 100.0)
    z = np.linspace(0, np.pi, 180, endpoint=False)
    num = np.array([quantum_noise(ts, HomodyneSettings("pd", x)) for x in z])
    rel = float(np.max(np.abs(num / squeeze_spectrum_lf(cp, z) - 1)))
    s_a = quantum_noise(ts, HomodyneSettings("pd", cp.alpha))
    s_2a = quantum_noise(ts, HomodyneSettings("pd", 2 * cp.alpha))
    _, _, z_min = noise_extremes(ts, "pd")
    dz = abs(np.mod(z_min - 1.5 * cp.alpha + np.pi / 2, np.pi) - np.pi / 2)
    ok = rel <= 0.02 and abs(s_a - 1) <= 0.02 and abs(s_2a - 1) <= 0.02 and dz <= 0.01
    verdict(6, ok, f"max rel error {rel:.2e}; S(alpha) = {s_a:.4f}, S(2 alpha) = {s_2a:.4f}; minimum offset {dz:.2e} rad")


# Each mechanism alone at a first-order size; d_epsL also trims T_i so that eps is unchanged.
MECHANISM_CASES = {
    "d_BS": dict(d_BS=0.01),
    "d_eps": dict(d_T=5e-6),
    "d_lambda": dict(d_phi=1e-7),
    "d_epsL": dict(d_loss=2e-6, d_T=-2e-6),
    "d_alpha_M": dict(d_alpha_M=1e-3),
    "d_eps_M": dict(d_eps_M=1e-3),
}


def _realise(v):
    # Rotate a complex quadrature vector onto the real plane with the best common phase.
    v = np.asarray(v, complex)
    return np.real(np.exp(-0.5j * np.angle(v @ v)) * v)


def _angle(w):
    return np.arctan2(w[1], w[0])


def _dang(a, b):
    return abs(np.mod(a - b + np.pi / 2, np.pi) - np.pi / 2)


def _mechanism_errors(f):
    base = PonderomotiveParams.ideal()
    cp = base.cavity()
    tab = mismatch_couplings(cp, 2 * np.pi * f, mode_params(cp, "common").theta_os)
    out = {}
    for k, kw in MECHANISM_CASES.items():
        p = base.replace(**kw)
        net = ponderomotive_network(p)
        dc = solve_dc(net)
        size = p.mismatch().as_dict()[k]
        car = dc.incoming("pd:0") / np.sqrt(2 * p.power) / size
        T = solve(net, f, dc).transfer("pd:0", "laser.laser") / size
        amp, ph = _realise(T[:, 0]), _realise(T[:, 1])
        t = tab[k]
        errs = []
        for name, vec, mag, phi, shift in (("C", car, t.C, t.phi_C, 0.0), ("A", amp, t.N_A, t.phi_A, np.pi / 2), ("P", ph, t.N_P, t.phi_P, np.pi / 2)):
            if mag == 0:
                # A vanishing entry: the numeric coupling must be small against unit scale.
                errs.append((name, float(np.linalg.norm(vec)), 0.0))
            else:
                errs.append((name, abs(np.linalg.norm(vec) / abs(mag) - 1), float(_dang(_angle(vec) - shift, phi))))
        out[k] = errs
    return out


def test_c7_mismatch_tables():
    worst_mag = worst_ang = 0.0
    for f in (30.0, 100.0):
        for k, errs in _mechanism_errors(f).items():
            for name, dm, da in errs:
                worst_mag, worst_ang = max(worst_mag, dm), max(worst_ang, da)
    diag = next(dm for name, dm, _ in _mechanism_errors(1000.0)["d_eps_M"] if name == "A")
    print(f"diagnostic: d_eps_M amplitude magnitude error at 1 kHz = {diag:.2f} (not asserted)")
    ok = worst_mag <= 0.05 and worst_ang <= 0.05
    verdict(7, ok, f"worst magnitude error {worst_mag:.3f}, worst angle error {worst_ang:.3f} rad at 30 Hz and 100 Hz")


def test_c8_laser_noise_evasion():
    base = PonderomotiveParams.table_values(noise=FIG5_NOISE)
    zeta = 1.5 * base.cavity().alpha
    hs = HomodyneSettings("pd", zeta)
    u = np.array([np.cos(zeta), np.sin(zeta)])
    f = 100.0

    def evaluate(x):
        p = base.replace(d_alpha_M=x[0] * 1e-3, d_eps_M=x[1] * 1e-3)
        net = ponderomotive_network(p)
        ts = solve(net, f)
        w0 = net.omega0
        return (
            u @ ts.transfer("pd:0", "laser.laser"),
            quantum_noise(ts, hs),
            laser_noise(ts, hs, p.noise.amplitude_part(), p.power, w0),
            laser_noise(ts, hs, p.noise.phase_part(), p.power, w0),
        )

    t0, q0, a0, p0 = evaluate([0.0, 0.0])
    scale = np.abs(t0)

    def residual(x):
        t = evaluate(x)[0] / scale
        return np.concatenate([t.real, t.imag])

    sol = least_squares(residual, [0.0, 0.0], xtol=1e-14, ftol=1e-14, gtol=1e-14)
    _, q1, a1, p1 = evaluate(sol.x)
    amp_db, ph_db = 10 * np.log10(a1 / a0), 10 * np.log10(p1 / p0)
    ok = amp_db <= -40 and ph_db <= -40 and q1 < 1
    verdict(
        8,
        ok,
        f"d_alpha_M = {sol.x[0] * 1e-3:.3e}, d_eps_M = {sol.x[1] * 1e-3:.3e}: amplitude {amp_db:.1f} dB, phase {ph_db:.1f} dB, nq2 = {q1:.4f}",
    )


def test_c9_fig5_structure(table):
    _, _, th_D, th_C = table
    p = PonderomotiveParams.table_values(noise=FIG5_NOISE)
    net = ponderomotive_network(p)
    freqs = np.geomspace(10, 1e5, 3000)
    spec = compute_spectra(net, freqs, HomodyneSettings("pd", 1.5 * p.cavity().alpha))
    below = spec.nq2 < 1
    # Contiguous below-unity band that contains 100 Hz
    i = int(np.searchsorted(freqs, 100.0))
    lo = hi = i
    while lo > 0 and below[lo - 1]:
        lo -= 1
    while hi < len(freqs) - 1 and below[hi + 1]:
        hi += 1
    decades = np.log10(freqs[hi] / freqs[lo]) if below[i] else 0.0
    peaks = local_maxima(freqs, spec.nq2)
    eD, eC = nearest_rel(peaks, th_D), nearest_rel(peaks, th_C)
    ok = bool(spec.ok.all()) and decades >= 1 and eD <= 0.01 and eC <= 0.01
    verdict(
        9,
        ok,
        f"nq2 < 1 from {freqs[lo]:.0f} to {freqs[hi]:.0f} Hz ({decades:.2f} decades); features within {eC:.1e} of Theta_C and {eD:.1e} of Theta_D",
    )


def _cavity_gw_oracle(T_i, T_e, A_i, A_e, L, delta, P, theta, eta, f, wavelength):
    """Transmitted GW sidebands of a two-mirror cavity summed as geometric series, in quadratures."""
    w0 = 2 * np.pi * c / wavelength
    Om = 2 * np.pi * f
    ri, ti = np.sqrt(1 - T_i - A_i), np.sqrt(T_i)
    re, te = np.sqrt(1 - T_e - A_e), np.sqrt(T_e)
    Th = np.pi / 2 + delta
    E_in = np.sqrt(2 * P) * np.exp(1j * theta)
    E_fwd = ti * E_in / (1 + ri * re * np.exp(2j * Th))
    E_end = np.exp(1j * Th) * E_fwd
    E_back = np.exp(1j * Th) * (-re * E_end)
    kappa = eta * w0 * L / (2 * c)
    sidebands = []
    for s in (+1, -1):
        hop = np.exp(1j * Th) * np.exp(1j * s * Om * L / c)
        s_fwd, s_back = 1j * kappa * E_end, 1j * kappa * E_back
        field = (s_fwd + hop * ri * s_back) / (1 + ri * re * hop**2)
        sidebands.append(te * field)
    up, down = sidebands
    return np.array([(up + np.conj(down)) / 2, (up - np.conj(down)) / 2j]) / np.sqrt(hbar * w0)


def test_c10_gw_oracle():
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(100):
        T_i, T_e = 10 ** rng.uniform(-3, -1), 10 ** rng.uniform(-4, -1)
        A_i, A_e = 10 ** rng.uniform(-6, -3, 2)
        L = 10 ** rng.uniform(0, 3.6)
        delta = rng.uniform(-0.05, 0.05)
        P = 10 ** rng.uniform(-1, 1)
        theta = rng.uniform(0, 2 * np.pi)
        eta = rng.uniform(-1, 1)
        f = 10 ** rng.uniform(0, 5)
        net = OpticalNetwork()
        net.extend(
            [
                Laser("laser", power=P, phase=theta),
                mirror("itm", T=T_i, loss=A_i),
                propagator("arm", L, np.pi / 2 + delta, eta),
                mirror("etm", T=T_e, loss=A_e),
                Photodetector("pd"),
            ]
        )
        net.chain("laser:0", "itm:0", "itm:1", "arm:0", "arm:1", "etm:0", "etm:1", "pd:0")
        H = solve(net, f).transfer("pd:0", "gw")[:, 0]
        ref = _cavity_gw_oracle(T_i, T_e, A_i, A_e, L, delta, P, theta, eta, f, net.wavelength)
        worst = max(worst, float(np.linalg.norm(H - ref) / np.linalg.norm(ref)))
    verdict(10, worst <= 1e-6, f"worst relative deviation {worst:.2e} over 100 random cavities")
