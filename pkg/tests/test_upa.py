import numpy as np
import pytest

from nrisac.upa import (
    UpaConfig,
    array_response,
    conjugate_beamformer,
    dft_codebook,
    steering_vector,
)


def test_broadside_is_uniform():
    cfg = UpaConfig(8, 8)
    v = steering_vector(cfg, 0.0, 0.0)
    np.testing.assert_allclose(v, np.full(64, 1 / 8.0), atol=1e-15)


def test_single_antenna_is_scalar_one():
    v = steering_vector(UpaConfig(1, 1), 0.7, -0.3)
    np.testing.assert_allclose(v, [1.0], atol=1e-15)


def test_two_element_endfire():
    # nx=2, ny=1 at azimuth pi/2: phases 0 and pi
    v = steering_vector(UpaConfig(2, 1), np.pi / 2, 0.0)
    np.testing.assert_allclose(v, np.array([1.0, -1.0]) / np.sqrt(2), atol=1e-12)


def test_unit_norm_everywhere():
    rng = np.random.default_rng(2)
    for cfg in (UpaConfig(8, 8), UpaConfig(4, 4), UpaConfig(3, 5)):
        for _ in range(50):
            az = rng.uniform(-np.pi / 2, np.pi / 2)
            el = rng.uniform(-np.pi / 2 + 1e-3, np.pi / 2 - 1e-3)
            assert abs(np.linalg.norm(steering_vector(cfg, az, el)) - 1.0) < 1e-12


def test_kronecker_structure():
    cfg = UpaConfig(4, 3)
    az, el = 0.4, -0.2
    u = np.sin(az) * np.cos(el)
    w = np.sin(el)
    az_factor = np.exp(1j * np.pi * np.arange(4) * u) / 2.0
    el_factor = np.exp(1j * np.pi * np.arange(3) * w) / np.sqrt(3)
    np.testing.assert_allclose(
        steering_vector(cfg, az, el), np.kron(az_factor, el_factor), atol=1e-14
    )


def test_conjugate_symmetry_at_broadside_elevation():
    cfg = UpaConfig(6, 4)
    v_pos = steering_vector(cfg, 0.35, 0.0)
    v_neg = steering_vector(cfg, -0.35, 0.0)
    np.testing.assert_allclose(v_neg, np.conj(v_pos), atol=1e-14)


def test_matched_beam_gain_is_one():
    cfg = UpaConfig(8, 8)
    f = conjugate_beamformer(cfg, 0.5, -0.1)
    a = steering_vector(cfg, 0.5, -0.1)
    assert abs(np.vdot(a, f)) == pytest.approx(1.0, abs=1e-12)


def test_orthogonal_dft_grid_angle_gain_is_zero():
    # linear array, beams on the unoversampled DFT grid are orthogonal
    cfg = UpaConfig(4, 1)
    theta0 = 0.0
    theta1 = np.arcsin(2.0 / 4.0)  # next DFT grid point
    f = conjugate_beamformer(cfg, theta0, 0.0)
    a = steering_vector(cfg, theta1, 0.0)
    assert abs(np.vdot(a, f)) < 1e-12


def test_off_pointing_loses_gain():
    cfg = UpaConfig(8, 8)
    f = conjugate_beamformer(cfg, 0.0, 0.0)
    a = steering_vector(cfg, np.radians(3.0), 0.0)
    assert abs(np.vdot(a, f)) < 1.0 - 1e-4


def test_codebook_unoversampled_is_orthonormal():
    for cfg in (UpaConfig(2, 2), UpaConfig(4, 4)):
        cb = dft_codebook(cfg, 1, 1)
        assert cb.n_beams == cfg.n_elements
        gram = cb.vectors @ cb.vectors.conj().T
        np.testing.assert_allclose(gram, np.eye(cfg.n_elements), atol=1e-10)


def test_codebook_count_with_oversampling():
    cb = dft_codebook(UpaConfig(8, 8), 4, 4)
    assert cb.n_beams == 1024
    norms = np.linalg.norm(cb.vectors, axis=1)
    np.testing.assert_allclose(norms, 1.0, atol=1e-12)


def test_codebook_quantization_loss_bounded():
    # oracle: worst-case best-beam response over a fine azimuth sweep at zero
    # elevation must stay above the half-spacing array-factor value
    nx, o_az = 8, 4
    cfg = UpaConfig(nx, 1)
    cb = dft_codebook(cfg, o_az, 1)
    du = 2.0 / (nx * o_az)
    u_half = du / 2.0
    bound = abs(np.sin(nx * np.pi * u_half / 2) / (nx * np.sin(np.pi * u_half / 2)))
    thetas = np.arcsin(np.linspace(-0.95, 0.95, 401))
    worst = 1.0
    for theta in thetas:
        best = max(
            float(array_response(cfg, beam, np.array([theta]), 0.0)[0]) for beam in cb.vectors
        )
        worst = min(worst, best)
    assert worst >= bound - 1e-9


def test_codebook_oversampling_validation():
    with pytest.raises(ValueError):
        dft_codebook(UpaConfig(2, 2), 0, 1)
    with pytest.raises(ValueError):
        steering_vector(UpaConfig(2, 2), 0.0, np.pi / 2)
    with pytest.raises(ValueError):
        UpaConfig(0, 4)
