"""Lattice sums against independent references, and the two Wigner paths."""
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zakgross.theta import (
    CodeState,
    NotPositiveDefinite,
    TruncationOverflow,
    code_state_norm,
    gaussian_wigner,
    siegel_theta,
    siegel_theta_batch,
    sublattice_theta_batch,
    wigner_oracle,
    wigner_theta,
    wigner_theta_grid,
)

TWO_PI = 2.0 * math.pi


# ---- 1-D sums against mpmath jtheta --------------------------------------------

def _jtheta3(gamma_scalar, z_scalar):
    # theta(gamma, z) = theta3(pi z, q) with q = exp(i pi gamma)
    mpmath.mp.dps = 40
    q = mpmath.exp(1j * mpmath.pi * gamma_scalar)
    val = mpmath.jtheta(3, mpmath.pi * z_scalar, q)
    return complex(val)


def test_theta_reference_value():
    val, radius = siegel_theta(np.array([[1j]]), [0.0])
    assert abs(val - 1.0864348112133080) < 1e-12
    assert radius >= 2


@settings(max_examples=25, deadline=None)
@given(
    im_g=st.floats(0.25, 4.0),
    re_g=st.floats(-0.8, 0.8),
    re_z=st.floats(-1.5, 1.5),
    im_z=st.floats(-1.2, 1.2),
)
def test_theta_1d_matches_mpmath(im_g, re_g, re_z, im_z):
    gamma = np.array([[re_g + 1j * im_g]])
    z = np.array([re_z + 1j * im_z])
    val, _ = siegel_theta(gamma, z)
    ref = _jtheta3(re_g + 1j * im_g, re_z + 1j * im_z)
    assert abs(val - ref) <= 1e-10 * max(1.0, abs(ref))


def test_theta_large_imaginary_argument_scaled():
    # magnitude ~ exp(pi w^2 / im_g) gets huge; the scaled form stays finite
    gamma = np.array([[0.3 + 0.5j]])
    w = 6.0
    vals, log_scale, _ = siegel_theta_batch(gamma, [1j * w], np.array([[0.25]]))
    ref = _jtheta3(0.3 + 0.5j, 0.25 + 1j * w)
    got = complex(vals.reshape(-1)[0])
    assert log_scale > 50.0
    rel = abs(got * mpmath.exp(log_scale) - ref) / abs(ref)
    assert rel < 1e-10


def test_theta_2d_diagonal_factorizes():
    g1, g2 = 0.7j, 0.2 + 1.3j
    z1, z2 = 0.3 + 0.1j, -0.4 + 0.2j
    gamma = np.array([[g1, 0], [0, g2]])
    val, _ = siegel_theta(gamma, [z1, z2])
    ref = _jtheta3(g1, z1) * _jtheta3(g2, z2)
    assert abs(val - ref) < 1e-10 * abs(ref)


def test_theta_2d_off_diagonal_brute_force():
    gamma = np.array([[0.9j, 0.3 - 0.1j], [0.3 - 0.1j, 1.4j]])
    z = np.array([0.21 - 0.3j, -0.17 + 0.45j])
    val, _ = siegel_theta(gamma, z)
    acc = 0j
    rng = range(-25, 26)
    for t1 in rng:
        for t2 in rng:
            t = np.array([t1, t2])
            acc += np.exp(1j * math.pi * t @ gamma @ t + TWO_PI * 1j * t @ z)
    assert abs(val - acc) < 1e-10 * max(1.0, abs(acc))


def test_theta_batch_matches_singles():
    gamma = np.array([[1.1j, 0.2], [0.2, 0.8j]])
    z0 = np.array([0.1j, -0.2j])
    offs = np.array([[0.0, 0.0], [0.3, -0.1], [0.7, 0.4]])
    vals, log_scale, _ = siegel_theta_batch(gamma, z0, offs)
    for k in range(3):
        single, _ = siegel_theta(gamma, z0 + offs[k])
        assert abs(vals[k] * math.exp(log_scale) - single) < 1e-11 * max(1.0, abs(single))


def test_sublattice_identity_brute_force():
    gamma = np.array([[0.8j, 0.25], [0.25, 1.2j]])
    z0 = np.array([0.15 - 0.2j, 0.05 + 0.3j])
    offs = np.array([[0.0, 0.0], [0.4, 0.2]])
    for parity in [(0, 0), (1, 0), (0, 1), (1, 1)]:
        vals, log_scale, _ = sublattice_theta_batch(gamma, z0, offs, parity)
        for k in range(2):
            z = z0 + offs[k]
            acc = 0j
            for t1 in range(-22 + parity[0], 23, 2):
                for t2 in range(-22 + parity[1], 23, 2):
                    t = np.array([t1, t2])
                    acc += np.exp(1j * math.pi * t @ gamma @ t + TWO_PI * 1j * t @ z)
            got = vals[k] * math.exp(log_scale)
            assert abs(got - acc) < 1e-10 * max(1.0, abs(acc)), parity


def test_theta_rejects_bad_gamma():
    with pytest.raises(NotPositiveDefinite):
        siegel_theta(np.array([[1.0 - 0.1j]]), [0.0])
    with pytest.raises(ValueError, match="symmetric"):
        siegel_theta(np.array([[1j, 0.5], [0.2, 1j]]), [0.0, 0.0])


def test_theta_truncation_overflow():
    with pytest.raises(TruncationOverflow):
        siegel_theta(np.array([[1e-7j]]), [0.0])


# ---- code states ----------------------------------------------------------------

def _psi_on_grid(state, x):
    d, delta, ell = state.d, state.delta, state.ell
    kmax = 40
    psi = np.zeros_like(x, dtype=complex)
    for j in range(d):
        if state.eps[j] == 0:
            continue
        for k in range(-kmax, kmax + 1):
            mu = (j + d * k) * ell
            psi += state.eps[j] * math.exp(-0.5 * delta ** 2 * mu ** 2) * np.exp(
                -((x - mu) ** 2) / (2 * delta ** 2)
            )
    return psi


@pytest.mark.parametrize("delta", [0.3, 0.5])
@pytest.mark.parametrize("kind", ["logical0", "phase"])
def test_norm_matches_wavefunction_quadrature(delta, kind):
    d = 3
    state = (
        CodeState.logical(d, 0, delta)
        if kind == "logical0"
        else CodeState.phase_state(d, delta)
    )
    x = np.linspace(-30, 30, 120001)
    psi = _psi_on_grid(state, x)
    ref = np.trapezoid(np.abs(psi) ** 2, x)
    got = code_state_norm(state)
    assert abs(got - ref) < 1e-9 * ref


def test_wigner_cell_integral_equals_d_times_norm():
    # exact identity: integrating the unnormalized Wigner function over one
    # (d ell)^2 cell gives d * <psi|psi>
    state = CodeState.phase_state(3, 0.4)
    dl = 3 * state.ell
    nq = 220
    xs = (np.arange(nq) + 0.5) * dl / nq
    grid = wigner_theta_grid(state, xs, xs)
    integral = grid.sum() * (dl / nq) ** 2
    ref = 3 * code_state_norm(state)
    assert abs(integral - ref) < 1e-6 * ref


@pytest.mark.parametrize("delta", [0.3, 0.5])
@pytest.mark.parametrize("kind", ["logical0", "logical1", "phase"])
def test_theta_path_matches_oracle(delta, kind):
    d = 3
    if kind == "phase":
        state = CodeState.phase_state(d, delta)
    else:
        state = CodeState.logical(d, int(kind[-1]), delta)
    ell = state.ell
    pts = np.array(
        [
            [0.0, 0.0],
            [0.5 * ell, 0.25 * ell],
            [1.0 * ell, 2.0 * ell],
            [2.4 * ell, 0.9 * ell],
            [0.31, 1.7],
        ]
    )
    a = wigner_theta(state, pts)
    b = wigner_oracle(state, pts)
    scale = np.max(np.abs(b))
    assert np.max(np.abs(a - b)) < 1e-9 * scale


def test_grid_matches_scatter():
    state = CodeState.logical(3, 0, 0.35)
    ex = np.array([0.1, 0.9, 2.2])
    ez = np.array([0.0, 1.3])
    grid = wigner_theta_grid(state, ex, ez)
    pts = np.array([[x, z] for x in ex for z in ez]).reshape(3, 2, 2)
    scatter = wigner_theta(state, pts)
    assert np.allclose(grid, scatter, rtol=1e-10, atol=1e-14)


def test_wigner_peaks_at_logical_support():
    # logical 0 at moderate width: dominant peaks on eta_X = 0 mod d ell,
    # and the value at a shifted point eta_X = ell is much smaller
    state = CodeState.logical(3, 0, 0.25)
    norm = code_state_norm(state)
    ell = state.ell
    peak = wigner_theta(state, [[0.0, 0.0]]) / norm
    off = wigner_theta(state, [[ell, 0.0]]) / norm
    assert peak[0] > 10 * abs(off[0])


def test_phase_state_has_negative_region():
    state = CodeState.phase_state(3, 0.3)
    ell = state.ell
    xs = np.linspace(0, 3 * ell, 40)
    grid = wigner_theta_grid(state, xs, xs)
    assert grid.min() < 0
    assert grid.max() > 0


def test_code_state_validation():
    with pytest.raises(ValueError):
        CodeState(4, 0.3, (1, 0, 0, 0))
    with pytest.raises(ValueError):
        CodeState(3, 0.0, (1, 0, 0))
    with pytest.raises(ValueError):
        CodeState(3, 0.3, (0, 0, 0))
    with pytest.raises(ValueError):
        CodeState(3, 0.3, (1, 0))


def test_gaussian_wigner_integral_and_value():
    d = 3
    ell = math.sqrt(TWO_PI / d)
    dl = d * ell
    nq = 200
    xs = (np.arange(nq) + 0.5) * dl / nq
    pts = np.stack(np.meshgrid(xs, xs, indexing="ij"), axis=-1)
    vals = gaussian_wigner(d, pts)
    integral = vals.sum() * (dl / nq) ** 2
    assert abs(integral - d) < 1e-8 * d
    # center value: direct small sum
    acc = 0.0
    for ax in range(-40, 41):
        for az in range(-40, 41):
            acc += (-1.0) ** (ax * az) * math.exp(-(ell ** 2) * (ax * ax + az * az) / 4)
    assert abs(gaussian_wigner(d, [[0.0, 0.0]])[0] - acc / TWO_PI) < 1e-12
