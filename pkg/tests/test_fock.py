"""Truncated-space operator construction against closed-form amplitudes."""

import math

import numpy as np
import pytest

from qng_coherence import (
    DensityMatrix,
    FockSpace,
    GaussianParams,
    StateVector,
    TruncationError,
    annihilation_matrix,
    apply_gaussian,
    displacement_unitary,
    squeezing_unitary,
    suggested_work_dim,
    unitarity_defect,
)
from conftest import fock_state


def coherent_amplitudes(alpha: complex, dim: int) -> np.ndarray:
    n = np.arange(dim)
    logfact = np.cumsum(np.log(np.maximum(n, 1)))
    amps = np.exp(-0.5 * abs(alpha) ** 2) * alpha ** n / np.exp(0.5 * logfact)
    return amps.astype(complex)


def squeezed_vacuum_amplitudes(r: float, theta: float, dim: int) -> np.ndarray:
    # c_{2k} = sech(r)^{1/2} (e^{i theta} tanh r)^k sqrt((2k)!) / (2^k k!)
    amps = np.zeros(dim, dtype=complex)
    for k in range(dim // 2 + 1):
        if 2 * k >= dim:
            break
        amps[2 * k] = (
            (1.0 / math.cosh(r)) ** 0.5
            * (np.exp(1j * theta) * math.tanh(r)) ** k
            * math.sqrt(math.factorial(2 * k))
            / (2.0 ** k * math.factorial(k))
        )
    return amps


def test_annihilation_superdiagonal():
    space = FockSpace(6, 24)
    a = annihilation_matrix(space)
    for k in range(1, space.dim_work):
        assert a[k - 1, k] == pytest.approx(math.sqrt(k))
    assert np.count_nonzero(a - np.diag(np.diag(a, 1), 1)) == 0


def test_displacement_matches_coherent_state():
    alpha = 0.6 + 0.3j
    space = FockSpace(16, 64)
    U = displacement_unitary(alpha, space)
    expected = coherent_amplitudes(alpha, 16)
    assert np.max(np.abs(U[:, 0] - expected)) < 1e-12


def test_displacement_generator_sign():
    # <1|D(alpha)|0> = alpha e^{-|alpha|^2/2}: the a^dagger term carries
    # the bare alpha, not its conjugate.
    alpha = 0.3 + 0.4j
    space = FockSpace(8, 48)
    U = displacement_unitary(alpha, space)
    assert U[1, 0] == pytest.approx(alpha * np.exp(-0.5 * abs(alpha) ** 2), abs=1e-12)


def test_squeezing_vacuum_overlap_convention():
    # S(xi) = exp(xi a^dag^2 - xi^* a^2) without a 1/2, so r = 2|xi| and
    # <0|S(xi)|0> = 1/sqrt(cosh(2|xi|)).
    space = FockSpace(8, 160)
    U = squeezing_unitary(0.25, space)
    assert U[0, 0] == pytest.approx(1.0 / math.sqrt(math.cosh(0.5)), abs=1e-12)


def test_squeezed_vacuum_amplitudes():
    xi = 0.5 * np.exp(1j * 0.7)
    r, theta = 1.0, 0.7
    space = FockSpace(24, 512)
    U = squeezing_unitary(xi, space)
    expected = squeezed_vacuum_amplitudes(r, theta, 24)
    assert np.max(np.abs(U[:24, 0] - expected)) < 1e-10
    assert np.max(np.abs(U[1:24:2, 0])) == 0.0


def test_apply_gaussian_displacement_acts_first():
    params = GaussianParams(xi=0.2, alpha=0.5)
    space = FockSpace(64, 256)
    out = apply_gaussian(params, fock_state(0, 64), space)
    direct = squeezing_unitary(params.xi, space) @ displacement_unitary(
        params.alpha, space)[:, 0]
    direct = direct / np.linalg.norm(direct)
    assert np.max(np.abs(out.amplitudes - direct)) < 1e-9
    # The reversed order is a genuinely different state.
    swapped = displacement_unitary(params.alpha, space) @ squeezing_unitary(
        params.xi, space)[:, 0]
    swapped = swapped / np.linalg.norm(swapped)
    assert np.max(np.abs(out.amplitudes - swapped)) > 1e-3


def test_squeezing_inverse_composition():
    space = FockSpace(32, 192)
    prod = squeezing_unitary(-0.2, space) @ squeezing_unitary(0.2, space)
    # The report blocks compose to the identity on columns whose
    # intermediate image stays inside the window.
    assert np.max(np.abs(prod[:5, :5] - np.eye(5))) < 1e-8


def test_report_block_column_norms():
    U = displacement_unitary(0.8, FockSpace(24, 96))
    assert unitarity_defect(U, ncols=4) < 1e-9
    norms = np.linalg.norm(U, axis=0)
    assert np.all(norms <= 1.0 + 1e-12)


def test_apply_gaussian_records_norm_loss():
    out = apply_gaussian(GaussianParams(0.25, 0.0), fock_state(0, 40),
                         FockSpace(40, 160))
    assert out.norm_loss < 1e-10
    assert out.norm() == pytest.approx(1.0)


def test_apply_gaussian_window_too_small():
    # S(0.25)|0> carries weight past Fock 7, so an 8-level reporting
    # window must refuse rather than silently renormalize.
    with pytest.raises(TruncationError):
        apply_gaussian(GaussianParams(0.25, 0.0), fock_state(0, 8),
                       FockSpace(8, 160))


def test_edge_guard_catches_undersized_work_dim():
    with pytest.raises(TruncationError):
        squeezing_unitary(0.75, FockSpace(8, 16))


def test_suggested_work_dim_sizing():
    assert suggested_work_dim(24) == 96
    assert suggested_work_dim(24, xi=0.75) > 96
    assert suggested_work_dim(24, alpha=3.0) > 96
    space = FockSpace.for_params(48, xi=0.25, alpha=0.8)
    out = apply_gaussian(GaussianParams(0.25, 0.8), fock_state(0, 48), space)
    assert out.norm() == pytest.approx(1.0)
    assert out.norm_loss < 1e-10


def test_state_vector_density_matrix_round_trip():
    psi = StateVector(np.array([3.0, 4.0j]))
    rho = psi.density_matrix()
    rho.validate()
    assert rho.elements[0, 0] == pytest.approx(0.36)
    assert rho.elements[1, 1] == pytest.approx(0.64)
    assert rho.elements[0, 1] == pytest.approx(-0.48j)


def test_density_matrix_validation_rejects_bad_inputs():
    with pytest.raises(ValueError):
        DensityMatrix(np.array([[0.5, 0.1], [0.4, 0.5]])).validate()
    with pytest.raises(ValueError):
        DensityMatrix(np.diag([0.7, 0.7])).validate()
    with pytest.raises(ValueError):
        DensityMatrix(np.diag([1.5, -0.5])).validate()
    with pytest.raises(ValueError):
        DensityMatrix(np.zeros((2, 3)))


def test_apply_gaussian_rejects_unnormalized_input():
    with pytest.raises(ValueError):
        apply_gaussian(GaussianParams(), StateVector(np.array([0.5, 0.0])),
                       FockSpace(4, 16))
