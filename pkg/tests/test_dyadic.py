import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from shrira_lab import dyadic as dy
from shrira_lab import spectral_core as sc
from shrira_lab.propagator import propagate
from shrira_lab.spectral_core import GridSpec

from conftest import rand


def cos_x(grid):
    return sc.synthesize({(1, 0): 0.5, (-1, 0): 0.5}, grid)


def delta(grid, m, n, v=1.0):
    return sc.synthesize({(m, n): v}, grid, real=False)


@pytest.mark.parametrize("value,is_zero,k", [(0, True, 0), (1, False, 0), (2, False, 1), (64, False, 6)])
def test_dyadic_index(value, is_zero, k):
    idx = dy.DyadicIndex.of(value)
    assert (idx.is_zero, idx.k, idx.value) == (is_zero, k, value)


@pytest.mark.parametrize("bad", [3, -2, 6, 1.5])
def test_dyadic_index_rejects(bad):
    with pytest.raises((ValueError, TypeError)):
        dy.DyadicIndex.of(bad)


def test_q_x_examples(grid16):
    assert np.array_equal(dy.q_x(cos_x(grid16), 1).coeffs, cos_x(grid16).coeffs)
    assert not np.any(dy.q_x(cos_x(grid16), 0).coeffs)
    const = sc.synthesize({(0, 0): 2.0}, grid16)
    assert np.array_equal(dy.q_x(const, 0).coeffs, const.coeffs)


def test_q_tilde_examples(grid16, rng):
    f = rand(grid16, rng)
    assert np.array_equal(dy.q_x_tilde(f, 10).coeffs, f.coeffs)
    c2 = sc.synthesize({(2, 0): 0.5}, grid16)
    assert not np.any(dy.q_x_tilde(c2, 1).coeffs)


@pytest.mark.parametrize("k", [0, 1, 2, 3, 4])
def test_q_tilde_is_partial_sum(grid16, rng, k):
    f = rand(grid16, rng)
    for qt, q in ((dy.q_x_tilde, dy.q_x), (dy.q_y_tilde, dy.q_y)):
        acc = sc.zeros(grid16)
        for kk in range(k + 1):
            acc = acc + q(f, kk)
        assert np.array_equal(qt(f, k).coeffs, acc.coeffs)


def test_p_n_origin(grid16):
    d = delta(grid16, 0, 0)
    assert np.array_equal(dy.p_n(d, 0).coeffs, d.coeffs)
    for N in (1, 2, 4, 8):
        assert not np.any(dy.p_n(d, N).coeffs)


def test_p_n_mode_3_0(grid16):
    d = delta(grid16, 3, 0)
    # Hand evaluation of the two characteristic products at (3, 0), k = 2:
    # first term needs |n| in [2, 4): fails; second needs |n| < 2 and |m| in [2, 4): holds.
    holders = [N for N in dy.dyadic_values(8) if np.any(dy.p_n(d, N).coeffs)]
    assert holders == [4]


def test_p_n_matches_formula(grid16, rng):
    f = rand(grid16, rng, 0.0)
    for k in range(1, 4):
        formula = dy.q_x_tilde(dy.q_y(f, k), k) + dy.q_y_tilde(dy.q_x(f, k), k - 1)
        assert np.array_equal(dy.p_n(f, 2**k).coeffs, formula.coeffs)


def test_p_n_range_error(grid16):
    with pytest.raises(ValueError):
        dy.p_n(sc.zeros(grid16), 16)


@pytest.mark.parametrize("M", [8, 16, 64])
def test_partition_exact_and_disjoint(M, rng):
    g = GridSpec.square(M)
    f = rand(g, rng, 0.0)
    Ns = dy.dyadic_values(dy.max_shell(g))
    total = sc.zeros(g)
    cover = np.zeros(g.shape, int)
    for N in Ns:
        total = total + dy.p_n(f, N)
        cover += dy.shell_mask(g, N)
    assert np.array_equal(total.coeffs, f.coeffs)
    assert np.all(cover[~g.nyquist_mask()] == 1)


def test_idempotent_and_orthogonal(grid16, rng):
    f = rand(grid16, rng)
    Ns = dy.dyadic_values(8)
    for a in Ns:
        pa = dy.p_n(f, a)
        assert np.array_equal(dy.p_n(pa, a).coeffs, pa.coeffs)
        for b in Ns:
            if b != a:
                assert not np.any(dy.p_n(pa, b).coeffs)


def test_shell_of_exact():
    m = np.array([0, 1, 2, 3, 4, 7, 8, 1023, 1024])
    assert dy.shell_of(m, 0 * m).tolist() == [0, 2, 4, 4, 8, 8, 16, 1024, 2048]


def test_equivalent_norm_examples(grid16):
    assert dy.equivalent_norm(delta(grid16, 0, 0), 2.3) == 1.0
    assert dy.equivalent_norm(delta(grid16, 3, 0), 1) == pytest.approx(4.0)
    assert dy.equivalent_norm(sc.zeros(grid16), 1) == 0.0


def test_equivalent_norm_from_shell_norms(grid16, rng):
    f = rand(grid16, rng)
    s = 1.5
    direct = math.sqrt(sum(max(1, N) ** (2 * s) * v**2 for N, v in dy.shell_norms(f).items()))
    assert dy.equivalent_norm(f, s) == pytest.approx(direct, rel=1e-13)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), s=st.floats(0.0, 3.0), sigma=st.floats(-1.0, 3.0))
def test_norm_equivalence_true_bounds(seed, s, sigma):
    g = GridSpec.square(32)
    f = sc.random_field(g, sigma, np.random.default_rng(seed))
    r = dy.equivalent_norm(f, s) / sc.sobolev_norm(f, s)
    assert 2 ** (-s / 2) * (1 - 1e-12) <= r <= 2**s * (1 + 1e-12)


def test_single_mode_exceeds_three_to_half_s(grid64):
    # Mode (16, 0) sits in shell 32: ratio (1024 / 257)^(s/2) > 3^(s/2).
    f = delta(grid64, 16, 0)
    for s in (1.0, 2.0):
        r = dy.equivalent_norm(f, s) / sc.sobolev_norm(f, s)
        assert r == pytest.approx((1024 / 257) ** (s / 2), rel=1e-14)
        assert r > 3 ** (s / 2)


def test_projections_commute_with_multipliers(grid16, rng):
    f = rand(grid16, rng)
    for N in dy.dyadic_values(8):
        for op in (sc.hilbert_x, sc.laplacian, lambda u: sc.bessel_potential(u, 1.5), lambda u: propagate(u, 0.37)):
            assert np.allclose(dy.p_n(op(f), N).coeffs, op(dy.p_n(f, N)).coeffs, atol=1e-14)
