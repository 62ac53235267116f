"""Tests for the noise model, the reference channel, and noise depths."""

import numpy as np
import pytest
import scipy.special

from qng_coherence import (
    CoherenceMeasureId,
    DensityMatrix,
    ModelValidityError,
    NoDepthError,
    NoisyStateModel,
    coherence_element,
    depth_boundary,
    exact_channel,
    ideal_target,
    loss_depth,
    perturbed_state,
    thermal_depth,
)

MID01 = CoherenceMeasureId(0, 1)


def thermal_state(nu, dim):
    p = (nu / (1.0 + nu)) ** np.arange(dim) / (1.0 + nu)
    p = p / p.sum()
    return DensityMatrix(np.diag(p).astype(complex))


def coherent_state(alpha, dim):
    k = np.arange(dim)
    amps = alpha ** k / np.sqrt(scipy.special.factorial(k))
    amps = amps / np.linalg.norm(amps)
    return DensityMatrix(np.outer(amps, amps.conj()))


def test_ideal_target_headroom():
    rho = ideal_target(CoherenceMeasureId(1, 3))
    assert rho.dim == 5
    assert abs(coherence_element(rho, CoherenceMeasureId(1, 3)) - 1.0) < 1e-12
    with pytest.raises(ValueError):
        ideal_target(CoherenceMeasureId(0, 4), dim=4)


def test_ideal_coherence_closed_forms():
    assert abs(NoisyStateModel(MID01, gamma=0.1).ideal_coherence()
               - 1.0 / 1.05) < 1e-15
    assert abs(NoisyStateModel(MID01, nbar=0.1).ideal_coherence()
               - 0.8) < 1e-15
    m = NoisyStateModel(CoherenceMeasureId(0, 2), gamma=0.2, nbar=0.1)
    assert abs(m.ideal_coherence() - 0.7 / 1.2) < 1e-15


def test_perturbed_state_matches_closed_form_when_positive():
    # the perturbed single-photon superposition stays PSD in-domain, so
    # the projected state reproduces the closed form exactly
    for g, nb in [(0.1, 0.0), (0.0, 0.1), (0.1, 0.05), (0.3, 0.15)]:
        model = NoisyStateModel(MID01, gamma=g, nbar=nb)
        rho = perturbed_state(model, dim=6)
        rho.validate()
        assert abs(coherence_element(rho, MID01)
                   - model.ideal_coherence()) < 1e-12


def test_perturbed_state_projection_bias_shrinks_with_weights():
    # wider superpositions go slightly non-PSD at first order; projecting
    # back bends the element away from the closed form at second order
    mid = CoherenceMeasureId(0, 2)
    devs = []
    for scale in (1.0, 0.5):
        model = NoisyStateModel(mid, gamma=0.2 * scale, nbar=0.1 * scale)
        rho = perturbed_state(model, dim=8)
        devs.append(abs(coherence_element(rho, mid) - model.ideal_coherence()))
    assert devs[0] < 2e-2
    assert devs[0] / devs[1] > 2.5


def test_weight_convention_flag():
    base = NoisyStateModel(MID01, gamma=0.1)
    flipped = NoisyStateModel(MID01, gamma=0.9, allow_extrapolation=True,
                              weight_loss_by_transmission=True)
    assert abs(base.loss_weight - flipped.loss_weight) < 1e-15
    r1 = perturbed_state(base, dim=6)
    r2 = perturbed_state(flipped, dim=6)
    assert np.max(np.abs(r1.elements - r2.elements)) < 1e-14


def test_model_validity_domain():
    with pytest.raises(ModelValidityError):
        NoisyStateModel(MID01, gamma=0.5).validate()
    with pytest.raises(ModelValidityError):
        NoisyStateModel(MID01, nbar=0.2).validate()
    NoisyStateModel(MID01, gamma=0.5, allow_extrapolation=True).validate()
    with pytest.raises(ModelValidityError):
        NoisyStateModel(MID01, gamma=-0.1)


def test_exact_channel_identity_and_validation():
    rho = ideal_target(MID01, 6)
    out = exact_channel(rho, eta=1.0, nbar_env=0.0)
    assert np.max(np.abs(out.elements - rho.elements)) < 1e-12
    with pytest.raises(ValueError):
        exact_channel(rho, eta=0.0, nbar_env=0.0)
    with pytest.raises(ValueError):
        exact_channel(rho, eta=0.5, nbar_env=-0.1)


def test_exact_channel_is_trace_preserving_and_positive():
    rng = np.random.default_rng(3)
    g = rng.standard_normal((10, 10)) + 1j * rng.standard_normal((10, 10))
    mat = np.zeros((24, 24), dtype=complex)
    mat[:10, :10] = g @ g.conj().T
    mat /= np.trace(mat).real
    out = exact_channel(DensityMatrix(mat), eta=0.85, nbar_env=0.1, pad=24)
    out.validate()
    assert abs(np.trace(out.elements).real - 1.0) < 1e-12


def test_exact_channel_attenuates_coherent_states():
    alpha, eta = 0.8, 0.64
    out = exact_channel(coherent_state(alpha, 24), eta=eta, nbar_env=0.0)
    target = coherent_state(alpha * np.sqrt(eta), 24)
    fidelity = np.trace(out.elements @ target.elements).real
    assert abs(fidelity - 1.0) < 1e-9


def test_exact_channel_thermal_fixed_point():
    nu = 0.12
    rho = thermal_state(nu, 30)
    out = exact_channel(rho, eta=0.8, nbar_env=nu)
    assert np.max(np.abs(out.elements - rho.elements)) < 1e-12


def test_perturbed_matches_exact_channel_to_second_order():
    # the first-order model maps onto the attenuator with eta = 1 - gamma
    # and bath occupation nbar / gamma; halving the noise shrinks the
    # coherence-element difference about fourfold
    rho0 = ideal_target(MID01, 10)
    diffs_el, diffs_diag = [], []
    for g in (0.1, 0.05):
        nb = 0.2 * g
        model = NoisyStateModel(MID01, gamma=g, nbar=nb)
        approx = perturbed_state(model, rho0=rho0)
        exact = exact_channel(rho0, eta=1.0 - g, nbar_env=0.2)
        diffs_el.append(abs(coherence_element(approx, MID01)
                            - coherence_element(exact, MID01)))
        diffs_diag.append(np.max(np.abs(np.diag(approx.elements)
                                        - np.diag(exact.elements))))
    assert diffs_el[0] / diffs_el[1] > 3.0
    # the diagonal only agrees to first order, shrinking about twofold
    assert 1.6 < diffs_diag[0] / diffs_diag[1] < 2.4


def test_loss_depth_closed_form():
    res = loss_depth(MID01, 0.93)
    assert abs(res.value - 2.0 * (1.0 / 0.93 - 1.0)) < 1e-12
    assert res.kind == "loss"
    assert not res.saturated
    assert not res.validity_exceeded
    assert res.iterations == 0


def test_thermal_depth_closed_form():
    res = thermal_depth(MID01, 0.93)
    assert abs(res.value - 0.035) < 1e-12
    assert res.kind == "thermal"
    mixed = thermal_depth(MID01, 0.9, gamma=0.1)
    assert abs(mixed.value - (1.0 - 0.9 * 1.05) / 2.0) < 1e-12


def test_depth_numeric_path_matches_closed_form():
    closed = loss_depth(MID01, 0.93).value
    numeric = loss_depth(MID01, 0.93, rho0=ideal_target(MID01, 8))
    assert abs(numeric.value - closed) < 5e-6
    assert numeric.iterations > 0
    assert numeric.bracket == 1e-6
    model = NoisyStateModel(MID01, gamma=numeric.value,
                            allow_extrapolation=True)
    at_depth = coherence_element(perturbed_state(model, dim=8), MID01)
    assert abs(at_depth - 0.93) < 1e-5
    closed_t = thermal_depth(MID01, 0.93).value
    numeric_t = thermal_depth(MID01, 0.93, rho0=ideal_target(MID01, 8))
    assert abs(numeric_t.value - closed_t) < 5e-6


def test_depth_saturation_and_validity_flags():
    res = loss_depth(MID01, 0.05)
    assert res.saturated
    assert res.value == 1.0
    assert res.validity_exceeded
    th = thermal_depth(MID01, 0.05)
    assert not th.saturated
    assert th.validity_exceeded


def test_depth_zero_when_threshold_unreachable():
    res = loss_depth(MID01, 0.9, nbar=0.2)
    assert res.value == 0.0
    assert not res.saturated


def test_depth_threshold_validation():
    with pytest.raises(NoDepthError):
        loss_depth(MID01, 1.0)
    with pytest.raises(ValueError):
        thermal_depth(MID01, 0.0)
    with pytest.raises(ValueError):
        loss_depth(MID01, -0.2)


def test_depth_boundary_sweep():
    points = depth_boundary(MID01, 0.93)
    assert len(points) == 21
    assert points[0].nbar == 0.0
    assert abs(points[0].gamma - loss_depth(MID01, 0.93).value) < 1e-12
    gammas = [p.gamma for p in points]
    assert all(g1 >= g2 - 1e-12 for g1, g2 in zip(gammas, gammas[1:]))
    assert gammas[-1] < 1e-9
    beyond = depth_boundary(MID01, 0.93, nbars=[0.05])
    assert beyond[0].gamma == 0.0
    with pytest.raises(ValueError):
        depth_boundary(MID01, 0.93, nbars=[-0.01])


def test_depth_boundary_serialization():
    point = depth_boundary(MID01, 0.93, nbars=[0.01])[0]
    d = point.to_dict()
    assert set(d) == {"nbar", "gamma", "saturated"}
