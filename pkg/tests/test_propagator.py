import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from shrira_lab import dyadic as dy
from shrira_lab import spectral_core as sc
from shrira_lab.propagator import dispersion_symbol, duhamel_step, propagate
from shrira_lab.spectral_core import GridSpec

from conftest import rand


def test_identity_at_zero(grid16, rng):
    f = rand(grid16, rng)
    assert np.array_equal(propagate(f, 0.0).coeffs, f.coeffs)


def test_mode_1_1_at_half_pi(grid16):
    f = sc.synthesize({(1, 1): 1.0}, grid16, real=False)
    assert propagate(f, math.pi / 2).coefficient(1, 1) == pytest.approx(-1.0, abs=1e-15)


def test_m_zero_row_fixed(grid16, rng):
    c = np.zeros(grid16.shape, complex)
    c[0, :] = rng.standard_normal(16)
    f = sc.SpectralField.from_coeffs(grid16, c, real=False)
    for t in (0.3, -2.0, 17.0):
        assert np.array_equal(propagate(f, t).coeffs, f.coeffs)


def test_symbol_sign(grid16):
    om = dispersion_symbol(grid16)
    assert om[grid16.index(2, 3)] == 13 and om[grid16.index(-2, 3)] == -13 and om[grid16.index(0, 5)] == 0


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), s=st.sampled_from([0.0, 1.0, 1.75, 3.0]), t=st.floats(-50, 50))
def test_unitary(seed, s, t):
    g = GridSpec.square(32)
    f = sc.random_field(g, 1.0, np.random.default_rng(seed))
    assert sc.sobolev_norm(propagate(f, t), s) == pytest.approx(sc.sobolev_norm(f, s), rel=1e-12)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), a=st.floats(-5, 5), b=st.floats(-5, 5))
def test_group_law(seed, a, b):
    g = GridSpec.square(32)
    f = sc.random_field(g, 1.0, np.random.default_rng(seed))
    lhs = propagate(propagate(f, a), b)
    rhs = propagate(f, a + b)
    assert np.max(np.abs(lhs.coeffs - rhs.coeffs)) <= 1e-12 * sc.l2_norm(f) + 1e-300


def test_propagate_preserves_realness(grid16, rng):
    f = rand(grid16, rng)
    w = propagate(f, 0.71)
    assert w.real and w.hermitian_defect() < 1e-15


def test_commutes_with_projection_and_hilbert(grid16, rng):
    f = rand(grid16, rng)
    t = 0.42
    assert np.allclose(propagate(sc.hilbert_x(f), t).coeffs, sc.hilbert_x(propagate(f, t)).coeffs, atol=1e-15)
    for N in dy.dyadic_values(8):
        assert np.allclose(propagate(dy.p_n(f, N), t).coeffs, dy.p_n(propagate(f, t), N).coeffs, atol=1e-15)


def test_solves_linear_equation(grid16, rng):
    f = rand(grid16, rng, 3.0)
    t = 0.3
    errs = []
    for h in (1e-3, 5e-4):
        d = (propagate(f, t + h).coeffs - propagate(f, t - h).coeffs) / (2 * h)
        rhs = -sc.hilbert_x(sc.laplacian(propagate(f, t))).coeffs
        errs.append(np.max(np.abs(d - rhs)))
    assert errs[1] < errs[0] / 3.5  # second order


# ----------------------------------------------------------------- Duhamel


def test_duhamel_zero_forcing(grid16, rng):
    w = rand(grid16, rng)
    z = sc.zeros(grid16)
    out = duhamel_step(w, lambda s: z, 0.1, 0.6)
    assert np.allclose(out.coeffs, propagate(w, 0.5).coeffs, atol=1e-15)


def test_duhamel_rejects_bad_interval(grid16):
    z = sc.zeros(grid16)
    with pytest.raises(ValueError):
        duhamel_step(z, lambda s: z, 1.0, 1.0)


def test_duhamel_constant_forcing_closed_form(grid16, rng):
    # -int_0^h W(h - s) d_x F ds has multiplier -(1 - e^{-i w h}) / (i w) * (i m) per mode.
    w0 = sc.zeros(grid16)
    F = rand(grid16, rng, 2.0)
    h = 0.05
    got = duhamel_step(w0, lambda s: F, 0.0, h, quadrature_nodes=12)
    m, _ = grid16.wavenumbers()
    om = dispersion_symbol(grid16)
    with np.errstate(invalid="ignore", divide="ignore"):
        kern = np.where(om == 0, h, (1 - np.exp(-1j * om * h)) / (1j * om))
    want = -kern * 1j * m * F.coeffs
    assert np.allclose(got.coeffs, want, atol=1e-13)


def test_duhamel_self_convergence(grid16, rng):
    w0 = rand(grid16, rng, 2.0)
    F = rand(grid16, rng, 2.0)
    ref = duhamel_step(w0, lambda s: F, 0.0, 0.2, quadrature_nodes=80)
    e2 = np.max(np.abs(duhamel_step(w0, lambda s: F, 0.0, 0.2, 2).coeffs - ref.coeffs))
    e4 = np.max(np.abs(duhamel_step(w0, lambda s: F, 0.0, 0.2, 4).coeffs - ref.coeffs))
    assert e4 < e2 / 4


def test_duhamel_manufactured_solution(grid16, rng):
    # w(t) = W(t) w0 + t W(t) g solves w_t + H Lap w = W(t) g, i.e. -d_x F = W(t) g.
    w0 = rand(grid16, rng, 2.0, mean_zero_x=True)
    gfield = rand(grid16, rng, 2.0, mean_zero_x=True)
    m, _ = grid16.wavenumbers()
    inv_dx = np.where(m == 0, 0, 1 / (1j * np.where(m == 0, 1, m)))

    def forcing(s):
        return propagate(gfield, s).apply_multiplier(-inv_dx)

    t0, t1 = 0.2, 0.5
    start = propagate(w0, t0) + propagate(gfield, t0) * t0
    got = duhamel_step(start, forcing, t0, t1, quadrature_nodes=16)
    want = propagate(w0, t1) + propagate(gfield, t1) * t1
    assert np.allclose(got.coeffs, want.coeffs, atol=1e-12)
