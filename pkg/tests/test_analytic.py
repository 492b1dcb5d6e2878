import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quadnet.analytic import (
    MECHANISMS,
    CavityParams,
    MismatchParams,
    alpha_M_amplitude_vector,
    classical_noise_coefficient,
    combined_output,
    common_mode_io,
    diff_mode_io,
    evasion_possible,
    laser_evasion_determinant,
    mirror_motion_response,
    mismatch_couplings,
    mode_params,
    mode_resonances,
    spring_ratio,
    squeeze_factor,
    squeeze_spectrum_lf,
)
from quadnet.interferometers import PonderomotiveParams
from quadnet.quad import rotation

# sqrt(1e-3 / 0.501), mpmath at 30 digits
SPRING_RATIO_NOMINAL = 0.0446767051608770

# max over x of 2x (1 - x / sqrt(1 + x^2)), mpmath root of the derivative at 30 digits
CLASSICAL_MAX = 0.600566212001555

# (epsilon / lambda, tabulated squeeze factor) pairs from the design table
SQUEEZE_TABLE = [(0.58, 3.0), (1.13, 7.0), (1.42, 10.0), (2.12, 20.0)]

positive = st.floats(1e2, 1e5)


def cavity(eps, lam, I_c=1e3, m=1e-3, M=0.25):
    return CavityParams(eps, lam, 0.02, 1.77e15, I_c, m, M)


@pytest.fixture(scope="module")
def cp():
    return PonderomotiveParams.ideal().cavity()


def test_spring_ratio_value():
    assert spring_ratio(1e-3, 0.25) == pytest.approx(SPRING_RATIO_NOMINAL, rel=1e-13)


@given(st.floats(1e-5, 1.0), st.floats(1e-3, 10.0))
def test_spring_ratio_matches_mode_frequencies(m, M):
    cp = cavity(3e4, 4e4, m=m, M=M)
    d, c = mode_params(cp, "differential"), mode_params(cp, "common")
    assert c.theta_os / d.theta_os == pytest.approx(spring_ratio(m, M), rel=1e-12)


def test_mode_params_rejects_unknown_mode(cp):
    with pytest.raises(ValueError):
        mode_params(cp, "sideways")


def test_cavity_rejects_nonpositive_bandwidth():
    with pytest.raises(ValueError):
        cavity(0.0, 1.0)


@given(st.floats(1.0, 1e4), st.floats(0.01, 100.0), st.floats(0.05, 20.0))
def test_motion_response_column_sums(theta, Lambda2, ratio):
    W = theta * ratio
    if abs(ratio - 1) < 1e-6:
        return
    R = mirror_motion_response(theta, Lambda2, W)
    factor = -(W**2) / (theta**2 - W**2)
    np.testing.assert_allclose(R.sum(axis=0), [factor, factor], rtol=1e-9, atol=1e-12)


def test_motion_response_special_points():
    theta = 2 * np.pi * 8e3
    R = mirror_motion_response(theta, 500.0, theta / np.sqrt(2))
    np.testing.assert_allclose(R.sum(axis=0), [-1, -1], rtol=1e-12)
    np.testing.assert_allclose(mirror_motion_response(theta, 500.0, 1e-6).sum(axis=0), [0, 0], atol=1e-15)
    np.testing.assert_allclose(mirror_motion_response(theta, 1e12, 0.3 * theta)[1], [0, 1], atol=1e-11)
    with pytest.raises(ZeroDivisionError):
        mirror_motion_response(theta, 500.0, theta)


def test_uncoupled_mode_is_unitary_and_isotropic():
    cp = cavity(3e4, 4e4, I_c=0.0)
    mp = mode_params(cp)
    for W in (10.0, 3e3, 1e5):
        T, s = diff_mode_io(cp, mp, W)
        np.testing.assert_allclose(T @ T.conj().T, np.eye(2), atol=1e-12)
        np.testing.assert_allclose(T @ rotation(0.7), rotation(0.7) @ T, atol=1e-12)
        np.testing.assert_allclose(s, 0, atol=0)


def test_low_frequency_mode_transfer(cp):
    mp = mode_params(cp)
    T, _ = diff_mode_io(cp, mp, 1e-3)
    a = cp.alpha
    core = rotation(-a) @ T @ rotation(a)
    np.testing.assert_allclose(core, [[-1, 0], [2 * cp.epsilon / cp.lam, -1]], atol=1e-9)


def test_mode_resonance_locations(cp):
    mp = mode_params(cp)
    roots = mode_resonances(cp, mp)
    np.testing.assert_allclose(np.abs(mode_determinant_at(cp, mp, roots)), 0, atol=1e-6 * abs(cp.lam * mp.iota))
    slow = sorted(roots, key=abs)[:2]
    fast = sorted(roots, key=abs)[2:]
    np.testing.assert_allclose(sorted(np.abs(np.real(slow))), [mp.theta_os] * 2, rtol=0.05)
    for z in fast:
        assert abs(abs(z.real) - cp.lam) < 0.05 * cp.lam
        assert z.imag == pytest.approx(-cp.epsilon, rel=0.05)


def mode_determinant_at(cp, mp, roots):
    from quadnet.analytic import mode_determinant

    return mode_determinant(cp, mp, roots)


def test_common_mode_io_checks_mode(cp):
    d, c = mode_params(cp, "differential"), mode_params(cp, "common")
    T, _ = common_mode_io(cp, c, 1e-3)
    np.testing.assert_allclose(rotation(-cp.alpha) @ T @ rotation(cp.alpha), [[-1, 0], [2 * cp.epsilon / cp.lam, -1]], atol=1e-9)
    with pytest.raises(ValueError):
        common_mode_io(cp, d, 10.0)
    with pytest.raises(ValueError):
        diff_mode_io(cp, c, 10.0)


@settings(max_examples=50)
@given(positive, positive)
def test_squeeze_spectrum_special_angles(eps, lam):
    cp = cavity(eps, lam)
    a = cp.alpha
    x = eps / lam
    np.testing.assert_allclose(squeeze_spectrum_lf(cp, [a, 2 * a]), [1, 1], rtol=1e-9)
    zs = np.linspace(0, np.pi, 2001)
    S = squeeze_spectrum_lf(cp, zs)
    s_min = squeeze_spectrum_lf(cp, 1.5 * a)
    assert s_min == pytest.approx(1 / squeeze_factor(x), rel=1e-9)
    assert S.min() >= s_min * (1 - 1e-12)
    assert s_min * squeeze_spectrum_lf(cp, 1.5 * a + np.pi / 2) == pytest.approx(1.0, rel=1e-9)


def test_squeeze_spectrum_vanishing_bandwidth():
    cp = cavity(1e-6, 1e4)
    np.testing.assert_allclose(squeeze_spectrum_lf(cp, np.linspace(0, 3, 7)), 1, atol=1e-9)


@pytest.mark.parametrize("x, factor", SQUEEZE_TABLE)
def test_squeeze_factor_table(x, factor):
    # The table's factors are linear power ratios.
    assert squeeze_factor(x) == pytest.approx(factor, rel=0.01)


def test_classical_noise_coefficient_bound():
    eps = np.geomspace(1e1, 1e6, 60)
    worst = 0.0
    for e in eps:
        for l in eps:
            cp = cavity(e, l)
            worst = max(worst, classical_noise_coefficient(cp, 1.5 * cp.alpha))
            assert classical_noise_coefficient(cp, 2 * cp.alpha) == pytest.approx(0, abs=1e-12)
    # The quoted bound of 0.6 is this maximum rounded to one decimal.
    assert worst <= CLASSICAL_MAX * (1 + 1e-12)
    assert worst == pytest.approx(CLASSICAL_MAX, rel=1e-3)
    assert round(CLASSICAL_MAX, 1) == 0.6


def test_beamsplitter_mismatch_entries(cp):
    row = mismatch_couplings(cp, 2 * np.pi * 30, 0.0)["d_BS"]
    assert row.C == 0
    np.testing.assert_array_equal(row.carrier_vector(), [0, 0])
    assert row.N_A_lim == pytest.approx(2 * cp.epsilon / cp.lam, rel=1e-14)
    assert row.phi_A == pytest.approx(2 * cp.alpha, rel=1e-14)


def test_eps_M_carrier_entry(cp):
    row = mismatch_couplings(cp, 2 * np.pi * 30, 0.0)["d_eps_M"]
    assert row.C == -0.5
    assert row.phi_C == pytest.approx(2 * cp.alpha, rel=1e-14)


@given(positive, positive, st.floats(1.0, 1e4), st.floats(0.0, 1e3))
def test_phase_entries_equal_carrier_entries(eps, lam, W, theta_C):
    if abs(W - theta_C) < 1e-9 * W:
        return
    for k, row in mismatch_couplings(cavity(eps, lam), W, theta_C).items():
        assert row.N_P == row.C
        assert row.phi_P == row.phi_C or (np.isnan(row.phi_P) and np.isnan(row.phi_C))


def test_limit_column_matches_theta_zero(cp):
    rows = mismatch_couplings(cp, 2 * np.pi * 30, 0.0)
    for k in MECHANISMS:
        assert abs(rows[k].N_A) == pytest.approx(abs(rows[k].N_A_lim), rel=1e-12)


def test_alpha_M_vector_against_table(cp):
    theta_C = 2 * np.pi * 350
    below = mismatch_couplings(cp, 2 * np.pi * 30, theta_C)["d_alpha_M"]
    np.testing.assert_allclose(alpha_M_amplitude_vector(cp, 2 * np.pi * 30, theta_C), below.amplitude_vector(), rtol=1e-12)
    above = mismatch_couplings(cp, 2 * np.pi * 3000, theta_C)["d_alpha_M"]
    np.testing.assert_allclose(alpha_M_amplitude_vector(cp, 2 * np.pi * 3000, theta_C), -above.amplitude_vector(), rtol=1e-12)


def test_combined_output_is_linear(cp):
    mm = MismatchParams(d_BS=0.01, d_eps_M=2e-3)
    rows = mismatch_couplings(cp, 100.0, 0.0)
    car, amp, ph = combined_output(cp, mm, 100.0, 0.0)
    np.testing.assert_allclose(car, 2e-3 * rows["d_eps_M"].carrier_vector(), rtol=1e-14)
    np.testing.assert_allclose(amp, 0.01 * rows["d_BS"].amplitude_vector() + 2e-3 * rows["d_eps_M"].amplitude_vector(), rtol=1e-14)
    np.testing.assert_allclose(ph, 2e-3 * rows["d_eps_M"].phase_vector(), rtol=1e-14)


def _evasion_oracle(eps, lam, zeta):
    # Amplitude and phase rows of the two Michelson knobs written out by hand
    a = np.arctan(lam / eps)
    r = np.hypot(eps, lam)
    return -(r / (2 * lam)) * np.sin(zeta - a) * np.cos(zeta - 2 * a) + 0.5 * np.sin(zeta - 2 * a) ** 2


def test_evasion_determinant_equal_rates():
    cp = cavity(1e4, 1e4)
    assert laser_evasion_determinant(cp, 100.0, 1.5 * cp.alpha) == pytest.approx(-1 / (4 * np.sqrt(2)), rel=1e-12)


@given(positive, positive, st.floats(-np.pi, np.pi))
def test_evasion_determinant_general(eps, lam, zeta):
    cp = cavity(eps, lam)
    assert laser_evasion_determinant(cp, 100.0, zeta) == pytest.approx(_evasion_oracle(eps, lam, zeta), rel=1e-9, abs=1e-12)
    assert laser_evasion_determinant(cp, 100.0, 1.5 * cp.alpha) == pytest.approx(-eps / (4 * np.hypot(eps, lam)), rel=1e-9)


def test_evasion_possible():
    assert not evasion_possible(0.0)
    assert evasion_possible(-0.17)
