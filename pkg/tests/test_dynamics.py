"""Closed-form beam evolution: homogeneous flow, Duhamel, traces, overlaps."""

import math

import numpy as np
import pytest

from beamctl.dynamics import (
    ControlField,
    TraceSignal,
    duhamel_solve,
    evolve_to_final,
    forced_signals,
    homogeneous_eval,
    homogeneous_signals,
    spatial_overlap,
    spatial_overlap_matrix,
    time_overlap,
    time_overlap_matrices,
    trace,
    trace_dx,
    window_energy,
    window_product_integral,
)
from beamctl.errors import ForcingGridError, InvalidRegionError
from beamctl.modal import L2_VDUAL, ModalState, frequencies, norm
from beamctl.regions import Internal, Pointwise
from oracles import quad_integral, rk4_batch, space_time_energy

W0 = float(frequencies(1).omega[0])  # pi^2/4


def test_homogeneous_rotation_conserves_mode_energy():
    rng = np.random.default_rng(31)
    state = ModalState(rng.standard_normal(5), rng.standard_normal(5))
    e0 = state.a**2 + state.beta**2
    for t in (0.3, 1.0, 2.7):
        final = duhamel_solve(state, None, t)
        np.testing.assert_allclose(final.a**2 + final.beta**2, e0, rtol=1e-12)


def test_homogeneous_flow_is_periodic():
    # every omega_m is an odd square times pi^2/4, so T0 = 8/pi closes all orbits
    rng = np.random.default_rng(37)
    state = ModalState(rng.standard_normal(8), rng.standard_normal(8))
    final = duhamel_solve(state, None, 8.0 / math.pi)
    np.testing.assert_allclose(final.a, state.a, atol=1e-11)
    np.testing.assert_allclose(final.beta, state.beta, atol=1e-11)


def test_homogeneous_eval_formula():
    state = ModalState([0.0, 1.0], [0.0, 0.0])
    x, t = 0.5, 0.3
    expect = math.cos(9 * W0 * t) * math.sin(3 * math.pi * x / 2)
    assert homogeneous_eval(state, x, t) == pytest.approx(expect, rel=1e-14)
    assert homogeneous_eval(ModalState([1.0], [0.0]), 1.0, 0.0) == pytest.approx(1.0)
    # full period of mode 0
    assert homogeneous_eval(ModalState([1.0], [0.0]), 1.0, 2 * math.pi / W0) == pytest.approx(
        1.0, rel=1e-12
    )


def test_resonant_duhamel_closed_form():
    # forcing cos(w0 t) into mode 0 grows with the secular envelope T sin(w0 T)/(2 w0)
    field = ControlField(None, freqs=np.array([W0]), cos_amp=np.array([[1.0]]), sin_amp=np.array([[0.0]]))
    final = duhamel_solve(ModalState([0.0], [0.0]), field, 2.0)
    assert final.a[0] == pytest.approx(-0.39530174967336085, rel=1e-13)
    assert final.a[0] == pytest.approx(2.0 * math.sin(2 * W0) / (2 * W0), rel=1e-13)


def test_duhamel_matches_rk4_spot():
    rng = np.random.default_rng(41)
    M = 4
    a0 = rng.standard_normal((1, M))
    b0 = rng.standard_normal((1, M))
    freqs = np.array([[3.0, 17.0]])
    ca = rng.standard_normal((1, M, 2))
    sa = rng.standard_normal((1, M, 2))
    ra, rb = rk4_batch(a0, b0, freqs, ca, sa, T=1.5, dt=2e-5)
    field = ControlField(None, freqs=freqs[0], cos_amp=ca[0], sin_amp=sa[0])
    final = duhamel_solve(ModalState(a0[0], b0[0]), field, 1.5)
    np.testing.assert_allclose(final.a, ra[0], atol=1e-8)
    np.testing.assert_allclose(final.beta, rb[0], atol=1e-8)


def test_duhamel_linearity():
    rng = np.random.default_rng(43)
    M = 3
    state = ModalState.zeros(M)
    freqs = np.array([2.0, 11.0])
    ca1, sa1 = rng.standard_normal((M, 2)), rng.standard_normal((M, 2))
    ca2, sa2 = rng.standard_normal((M, 2)), rng.standard_normal((M, 2))
    f1 = ControlField(None, freqs=freqs, cos_amp=ca1, sin_amp=sa1)
    f2 = ControlField(None, freqs=freqs, cos_amp=ca2, sin_amp=sa2)
    fsum = ControlField(None, freqs=freqs, cos_amp=ca1 + ca2, sin_amp=sa1 + sa2)
    u1 = duhamel_solve(state, f1, 2.0)
    u2 = duhamel_solve(state, f2, 2.0)
    us = duhamel_solve(state, fsum, 2.0)
    np.testing.assert_allclose(us.a, u1.a + u2.a, rtol=1e-10, atol=1e-12)
    np.testing.assert_allclose(us.beta, u1.beta + u2.beta, rtol=1e-10, atol=1e-12)


def test_sampled_duhamel_agrees_with_closed_form():
    # same trigonometric forcing given once in closed form, once as samples
    M = 2
    freqs = np.array([1.3, 6.0])
    ca = np.array([[0.7, -0.2], [0.1, 0.4]])
    sa = np.array([[0.0, 0.5], [-0.3, 0.2]])
    closed = ControlField(None, freqs=freqs, cos_amp=ca, sin_amp=sa)
    T = 2.0
    times = np.linspace(0.0, T, 8001)
    samples = closed.eval_modal(times)
    sampled = ControlField.from_samples(Internal(0.3, 4), samples, T)
    state = ModalState([0.2, -0.1], [0.0, 0.3])
    f_closed = duhamel_solve(state, closed, T)
    f_sampled = duhamel_solve(state, sampled, T)
    np.testing.assert_allclose(f_sampled.a, f_closed.a, atol=5e-10)
    np.testing.assert_allclose(f_sampled.beta, f_closed.beta, atol=5e-10)


def test_sampled_duhamel_rejects_coarse_grid():
    # mode 15 has period ~2.65e-3; 2048 samples over [0,2] undersamples it
    M = 16
    samples = np.zeros((M, 2048))
    samples[0] = 1.0
    field = ControlField.from_samples(Internal(0.25, 4), samples, 2.0)
    with pytest.raises(ForcingGridError):
        duhamel_solve(ModalState.zeros(M), field, 2.0)


def test_evolve_to_final_residuals():
    zero = ModalState.zeros(3)
    _, res = evolve_to_final(zero, None, 2.0)
    assert res == 0.0
    state = ModalState([1.0, 0.5, 0.0], [0.0, 0.2, 0.0])
    _, res2 = evolve_to_final(state, None, 2.0)
    assert res2 == pytest.approx(norm(state, L2_VDUAL), rel=1e-12)


def test_trace_values_and_boundary():
    state = ModalState([1.0], [0.0])
    tr = trace(state, 1.0, 2.0, grid=256)
    assert isinstance(tr, TraceSignal)
    np.testing.assert_allclose(tr.values, np.cos(W0 * tr.times), atol=1e-14)
    # non-strategic cancellation: mode 1 is invisible from xi = 2/3
    tr2 = trace(ModalState([0.0, 1.0], [0.0, 0.0]), 2.0 / 3.0, 2.0, grid=64)
    np.testing.assert_allclose(tr2.values, 0.0, atol=1e-14)
    # guided end: slope vanishes identically at xi = 1
    dx = trace_dx(state, 1.0, 2.0, grid=64)
    np.testing.assert_allclose(dx.values, 0.0, atol=1e-13)
    # pinned end: displacement vanishes at xi = 0
    tr0 = trace(state, 0.0, 2.0, grid=64)
    np.testing.assert_allclose(tr0.values, 0.0, atol=1e-15)


def test_trace_closed_form_consistency():
    rng = np.random.default_rng(47)
    state = ModalState(rng.standard_normal(6), rng.standard_normal(6))
    tr = trace(state, 0.37, 1.5, grid=128)
    assert tr.closed_form is not None
    np.testing.assert_allclose(tr.closed_form(tr.times), tr.values, atol=1e-14)
    spot = [homogeneous_eval(state, 0.37, float(t)) for t in tr.times[::17]]
    np.testing.assert_allclose(tr.values[::17], spot, atol=1e-12)


def test_trace_signal_validation():
    with pytest.raises(ValueError):
        TraceSignal(1.0, np.array([0.0]), np.array([1.0]), None)
    with pytest.raises(ValueError):
        TraceSignal(1.0, np.array([0.0, 1.0]), np.array([1.0, math.nan]), None)


def test_window_product_integral_frozen():
    mu0 = math.pi / 2
    assert window_product_integral(mu0, mu0, 0.25, 0.25) == pytest.approx(
        0.07838459642774291, rel=1e-14
    )
    assert window_product_integral(mu0, mu0, 0.3, 0.0) == 0.0
    ref = quad_integral(lambda x: math.sin(mu0 * x) * math.sin(5 * mu0 * x), 0.2, 0.45)
    assert window_product_integral(mu0, 5 * mu0, 0.2, 0.25) == pytest.approx(ref, rel=1e-11)


def test_spatial_overlap_regions():
    assert spatial_overlap(0, 0, Internal(0.25, 4)) == pytest.approx(
        0.07838459642774291, rel=1e-14
    )
    assert spatial_overlap(0, 2, Internal(1.0 / 3.0, 5)) == pytest.approx(
        -0.035006083345133644, rel=1e-13
    )
    # symmetric in the mode pair
    assert spatial_overlap(2, 0, Internal(1.0 / 3.0, 5)) == spatial_overlap(
        0, 2, Internal(1.0 / 3.0, 5)
    )
    assert spatial_overlap(0, 1, Pointwise(0.5)) == pytest.approx(0.5, rel=1e-14)
    with pytest.raises(InvalidRegionError):
        Internal(0.9, 4)


def test_spatial_overlap_matrix_consistency():
    freq = frequencies(5)
    region = Internal(0.3, 5)
    S = spatial_overlap_matrix(freq, region)
    assert S.shape == (5, 5)
    np.testing.assert_allclose(S, S.T, atol=0.0)
    for m in range(5):
        for k in range(m, 5):
            assert S[m, k] == pytest.approx(spatial_overlap(m, k, region), rel=1e-14)


def test_time_overlap_frozen_and_degenerate():
    w0, w1 = W0, float(frequencies(2).omega[1])
    assert time_overlap("cc", w0, w0, 2.0) == pytest.approx(0.9564013713708123, rel=1e-14)
    assert time_overlap("cc", w0, w1, 2.0) == pytest.approx(0.008690624768052498, rel=1e-13)
    # full-period orthogonality of cos and sin at the same frequency
    assert time_overlap("cs", 3.0, 3.0, 2 * math.pi / 3.0) == pytest.approx(0.0, abs=1e-15)
    assert time_overlap("ss", 0.0, 5.0, 1.7) == 0.0
    with pytest.raises(ValueError):
        time_overlap("sc", 1.0, 2.0, 1.0)


def test_time_overlap_matrices_layout():
    omega = frequencies(3).omega
    T = 1.7
    CC, CS, SS = time_overlap_matrices(omega, T)
    for i in range(3):
        for j in range(3):
            assert CC[i, j] == pytest.approx(time_overlap("cc", omega[i], omega[j], T), rel=1e-13)
            assert SS[i, j] == pytest.approx(time_overlap("ss", omega[i], omega[j], T), rel=1e-13)
            # CS is int cos(omega_i t) sin(omega_j t): not symmetric
            assert CS[i, j] == pytest.approx(time_overlap("cs", omega[i], omega[j], T), rel=1e-13)
    ref = quad_integral(lambda t: math.cos(omega[0] * t) * math.sin(omega[2] * t), 0.0, T)
    assert CS[0, 2] == pytest.approx(ref, rel=1e-11)


def test_window_energy_matches_2d_quadrature():
    rng = np.random.default_rng(53)
    state = ModalState(rng.standard_normal(4), rng.standard_normal(4))
    region = Internal(0.3, 6)
    sigs = homogeneous_signals(state)
    got = window_energy(sigs, region, 2.0)
    ref = space_time_energy(state.a, state.beta, region.xi, region.width, 2.0)
    assert got == pytest.approx(ref, rel=1e-10)


def test_control_field_validation_and_eval():
    freqs = np.array([2.0, 5.0])
    ca = np.array([[1.0, 0.0], [0.0, 2.0]])
    sa = np.zeros((2, 2))
    adj = ModalState([1.0, 0.5], [0.0, -0.2])
    field = ControlField(Internal(0.25, 4), freqs=freqs, cos_amp=ca, sin_amp=sa, source_adjoint=adj)
    assert field.m_modes == 2 and field.has_closed_form
    t = 0.4
    vals = field.eval_modal(t)
    assert vals.shape == (2, 1)
    assert vals[0, 0] == pytest.approx(math.cos(2 * t), rel=1e-14)
    assert vals[1, 0] == pytest.approx(2 * math.cos(5 * t), rel=1e-14)
    # exact zero outside the window, scaled adjoint trace inside
    assert field.field_at(0.8, t) == 0.0
    assert field.field_at(0.3, t) == pytest.approx(4.0 * homogeneous_eval(adj, 0.3, t), rel=1e-14)
    with pytest.raises(ValueError):
        ControlField(None, freqs=freqs, cos_amp=ca[:1], sin_amp=sa)
    zero = ControlField.zero(Pointwise(0.5), 3)
    assert np.all(zero.eval_modal(1.0) == 0.0)


def test_forced_signals_rejects_short_forcing():
    field = ControlField(None, freqs=np.array([2.0]), cos_amp=np.ones((2, 1)), sin_amp=np.zeros((2, 1)))
    state = ModalState.zeros(4)
    with pytest.raises(ValueError):
        forced_signals(state, field)
