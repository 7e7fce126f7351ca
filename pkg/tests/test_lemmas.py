"""Oracle and property tests for the inequality check suite."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from weyl_lab.dyadic import SampledFunction, make_grid
from weyl_lab.errors import DomainError, ShapeError
from weyl_lab.lemmas import (ConstantEstimate, check_block_domination,
                             check_convolution_inequality, check_cz_kernel,
                             check_good_lambda, check_indicator_decay,
                             check_interaction_coarse_by_fine,
                             check_interaction_fine_by_coarse,
                             check_kernel_block, check_littlewood_paley,
                             check_vector_maximal, cww_regression,
                             pooled_good_lambda, sample_cells, _ratio)
from weyl_lab.operators import (dyadic_maximal, haar_square, haar_synthesize,
                                random_haar_polynomial, synthesize)
from weyl_lab.systems import build_franklin, build_haar


@pytest.fixture(scope="module")
def haar64():
    return build_haar(64, make_grid(10), delta=0.9, alpha=1.0)


@pytest.fixture(scope="module")
def franklin64():
    return build_franklin(64, make_grid(11), delta=0.9, alpha=1.0)


# ---------------------------------------------------------------------------
# ratio convention and the sample lattice


def test_ratio_conventions():
    r = _ratio(np.array([0.0, 1.0, 2.0]), np.array([0.0, 0.0, 4.0]))
    assert r[0] == 0.0
    assert r[1] == np.inf
    assert r[2] == 0.5


def test_sample_cells_levels():
    c10 = sample_cells(10)
    assert np.array_equal(c10, 2 * np.arange(512) + 1)
    # the sampled points are level-independent: midpoint cells nest
    c4 = sample_cells(4)
    assert np.array_equal(c4, c10 >> 6)
    assert np.all(np.diff(c10) >= 1)  # strictly finer grid: distinct cells
    assert np.all(np.diff(c4) >= 0)


# ---------------------------------------------------------------------------
# kernel block bound


def test_kernel_block_haar_closed_form(haar64):
    # block 1 holds only the first step function: |phi(x)phi(t)| = 1; the
    # envelope gives ratio (1 + 2|x-t|)**(1+delta) / 2, maximized at the
    # largest lattice separation 511/512
    est = check_kernel_block(haar64, 1)
    d = 511.0 / 512.0
    assert est.ratio_sup == pytest.approx((1 + 2 * d) ** 1.9 / 2.0, rel=1e-12)
    assert est.samples == 512 * 512
    assert abs(est.witness["x"] - est.witness["t"]) == pytest.approx(d, abs=1e-12)


def test_kernel_block_finite_all_blocks(franklin64):
    for m in range(1, 7):
        est = check_kernel_block(franklin64, m)
        assert 0 < est.ratio_sup < 50
        assert est.witness["rhs"] > 0


def test_kernel_block_errors(haar64):
    with pytest.raises(DomainError):
        check_kernel_block(haar64, 0)
    with pytest.raises(DomainError):
        check_kernel_block(haar64, 7)  # 2**6 = 64 >= size
    bare = build_haar(16, make_grid(6))
    with pytest.raises(DomainError):
        check_kernel_block(bare, 1)  # no delta anywhere


# ---------------------------------------------------------------------------
# block domination


def test_block_domination_haar_single_term_sharp(haar64):
    # one step function: its absolute value equals the maximal function of
    # the block combination at the peak, so both ratios are exactly 1
    a = np.zeros(64)
    a[4] = 3.0  # k = 5, block 3
    out = check_block_domination(haar64, a, 3)
    assert out["terms_by_haar_maximal"].ratio_sup == pytest.approx(1.0, abs=1e-12)
    assert out["haar_maximal_by_term_maximal"].ratio_sup == pytest.approx(1.0, abs=1e-12)


def test_block_domination_haar_upper_oracle(haar64):
    # within one block the step functions have disjoint supports, so the
    # Haar-image maximal function never exceeds the term-wise one
    rng = np.random.default_rng(3)
    a = rng.standard_normal(64)
    for m in (1, 3, 5):
        out = check_block_domination(haar64, a, m)
        assert out["haar_maximal_by_term_maximal"].ratio_sup <= 1.0 + 1e-12


def test_block_domination_franklin_finite(franklin64):
    a = np.random.default_rng(5).standard_normal(64)
    out = check_block_domination(franklin64, a, 4)
    for est in out.values():
        assert 0 < est.ratio_sup < 20
        assert est.samples == franklin64.grid.cells


def test_block_domination_shape_error(haar64):
    with pytest.raises(ShapeError):
        check_block_domination(haar64, np.ones(5), 2)


# ---------------------------------------------------------------------------
# indicator decay


def test_indicator_decay_dyadic_interval_vanishes(haar64):
    # [0, 1/2) is a union of level >= 1 dyadic cells, so every block beyond
    # the first has zero projection and both ratios vanish
    out = check_indicator_decay(haar64, 3, (0.0, 0.5))
    assert out["edge_decay"].ratio_sup == 0.0
    assert out["far_field"].ratio_sup == 0.0


def test_indicator_decay_franklin(franklin64):
    out = check_indicator_decay(franklin64, 4, (0.3, 0.6))
    assert 0 < out["edge_decay"].ratio_sup < 10
    ff = out["far_field"]
    assert 0 < ff.ratio_sup < 10
    # the far-field witness sits outside the concentric double
    assert abs(ff.witness["x"] - 0.45) > 0.3


def test_indicator_decay_wide_interval_has_no_far_field(franklin64):
    out = check_indicator_decay(franklin64, 2, (0.05, 0.95))
    assert out["far_field"].ratio_sup == 0.0
    assert out["far_field"].samples == 0


def test_indicator_decay_bad_interval(franklin64):
    with pytest.raises(DomainError):
        check_indicator_decay(franklin64, 2, (0.6, 0.3))
    with pytest.raises(DomainError):
        check_indicator_decay(franklin64, 2, (-0.1, 0.5))


# ---------------------------------------------------------------------------
# interactions between Haar levels and system blocks


def test_interaction_fine_by_coarse_haar_oracles(haar64):
    rng = np.random.default_rng(11)
    a = rng.standard_normal(64)
    # n = m: the block is reproduced; the maximal function touches the
    # pointwise value at the peak, so the ratio is exactly 1
    est = check_interaction_fine_by_coarse(haar64, a, 4, 4)
    assert est.ratio_sup == pytest.approx(1.0, abs=1e-12)
    # n > m: finer level sees nothing of a coarser pure block
    est = check_interaction_fine_by_coarse(haar64, a, 3, 5)
    assert est.ratio_sup == 0.0


def test_interaction_coarse_by_fine_haar_oracles(haar64):
    rng = np.random.default_rng(12)
    a = rng.standard_normal(64)
    est = check_interaction_coarse_by_fine(haar64, a, 4, 4)
    assert est.ratio_sup == pytest.approx(1.0, abs=1e-12)
    # a coarse average of a pure fine block vanishes up to summation rounding
    est = check_interaction_coarse_by_fine(haar64, a, 5, 2)
    assert est.ratio_sup <= 1e-14


def test_interaction_franklin_finite(franklin64):
    a = np.random.default_rng(13).standard_normal(64)
    est = check_interaction_fine_by_coarse(franklin64, a, 3, 5)
    assert 0 < est.ratio_sup < 10
    assert est.witness["m"] == 3 and est.witness["n"] == 5
    est = check_interaction_coarse_by_fine(franklin64, a, 5, 3)
    assert 0 < est.ratio_sup < 10


def test_interaction_order_validation(haar64):
    a = np.zeros(64)
    with pytest.raises(DomainError):
        check_interaction_fine_by_coarse(haar64, a, 5, 3)  # needs n >= m
    with pytest.raises(DomainError):
        check_interaction_coarse_by_fine(haar64, a, 3, 5)  # needs m >= n


def test_interaction_conjugate_exponent_validation(haar64):
    a = np.ones(64)
    # delta = 0.5 forces q' > 2; q = 2.5 gives q' = 5/3, inadmissible
    with pytest.raises(DomainError):
        check_interaction_coarse_by_fine(haar64, a, 4, 2, q=2.5, delta=0.5)


# ---------------------------------------------------------------------------
# norm-level inequalities


def test_littlewood_paley_parseval_oracles(haar64):
    rng = np.random.default_rng(21)
    a = rng.standard_normal(64)
    a[0] = 0.0
    f = synthesize(haar64, a)
    out = check_littlewood_paley(haar64, f, p=2.0, sign_samples=8, seed=1)
    # at p = 2 every quantity collapses to the coefficient sum of squares
    assert out["block_square_by_norm"].ratio_sup == pytest.approx(1.0, abs=1e-10)
    assert out["diagonal_square_by_randomized"].ratio_sup == pytest.approx(1.0, abs=1e-10)
    assert out["randomized_by_diagonal_square"].ratio_sup == pytest.approx(1.0, abs=1e-10)
    assert out["randomized_by_norm"].ratio_sup == pytest.approx(1.0, abs=1e-10)


def test_littlewood_paley_franklin_p3(franklin64):
    f = synthesize(franklin64,
                   np.random.default_rng(22).standard_normal(64))
    out = check_littlewood_paley(franklin64, f, p=3.0, sign_samples=32, seed=2)
    for est in out.values():
        assert 0 < est.ratio_sup < 10
    with pytest.raises(DomainError):
        check_littlewood_paley(franklin64, f, p=1.0)


def test_convolution_equality_case():
    est = check_convolution_inequality([1.0, 1.0], [1.0])
    assert est.ratio_sup == 1.0
    assert est.witness["lhs"] == est.witness["rhs"]


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 40), st.integers(1, 40), st.integers(0, 10 ** 6))
def test_convolution_never_exceeds_one(la, lb, seed):
    rng = np.random.default_rng(seed)
    est = check_convolution_inequality(rng.standard_normal(la),
                                       rng.standard_normal(lb))
    assert est.ratio_sup <= 1.0 + 1e-12


def test_convolution_empty_rejected():
    with pytest.raises(DomainError):
        check_convolution_inequality([], [1.0])


def test_vector_maximal_lower_bound_and_constant(franklin64):
    rng = np.random.default_rng(31)
    fam = [synthesize(franklin64, rng.standard_normal(64)) for _ in range(4)]
    est = check_vector_maximal(fam, p=2.0, q=1.3)
    assert est.ratio_sup >= 1.0 - 1e-12  # maximal function dominates |g|
    assert est.ratio_sup < 10
    const = SampledFunction(franklin64.grid,
                            np.full(franklin64.grid.cells, 2.5))
    est = check_vector_maximal([const], p=1.5, q=1.2)
    assert est.ratio_sup == pytest.approx(1.0, abs=1e-12)


def test_vector_maximal_validation(franklin64):
    f = SampledFunction(franklin64.grid, np.ones(franklin64.grid.cells))
    with pytest.raises(DomainError):
        check_vector_maximal([], p=2.0)
    with pytest.raises(DomainError):
        check_vector_maximal([f], p=2.0, q=2.0)  # q must stay below min(2,p)
    with pytest.raises(DomainError):
        check_vector_maximal([f], p=1.5, q=1.7)
    other = SampledFunction(make_grid(5), np.ones(32))
    with pytest.raises(ShapeError):
        check_vector_maximal([f, other], p=2.0, q=1.1)


# ---------------------------------------------------------------------------
# good-lambda comparison


def test_good_lambda_flat_function_empty_sets():
    # f with |f| = 1 everywhere: the maximal function is 1, so the level
    # set at lambda = 2 is empty on both sides
    grid = make_grid(8)
    b = np.zeros(256)
    b[1] = 1.0
    f = haar_synthesize(grid, b)
    rep = check_good_lambda(f, eps_grid=[0.4], lambda_grid=[2.0])
    assert rep.rows == [(0.4, 2.0, 0.0, 0.0, 0.0)]


def test_good_lambda_row_structure_and_inclusions():
    grid = make_grid(10)
    f = random_haar_polynomial(grid, 10, seed=9)
    rep = check_good_lambda(f)
    eps_vals = sorted({r[0] for r in rep.rows})
    assert len(eps_vals) == 9 and len(rep.rows) == 9 * 20
    md = dyadic_maximal(f).values
    width = grid.width
    by_lam = {}
    for (e, lam, lhs, rhs, ratio) in rep.rows:
        assert lhs <= rhs + 1e-15  # set inclusion, exact measures
        mid = np.count_nonzero(md > lam) * width
        assert lhs <= mid <= rhs  # lambda-set sandwiched by the half-level set
        by_lam.setdefault(lam, []).append((e, lhs))
    for lam, pairs in by_lam.items():
        pairs.sort()
        lhs_seq = [l for _, l in pairs]
        assert lhs_seq == sorted(lhs_seq)  # lhs monotone in eps, exactly


def test_good_lambda_validation():
    grid = make_grid(6)
    f = random_haar_polynomial(grid, 4, seed=1)
    with pytest.raises(DomainError):
        check_good_lambda(f, eps_grid=[1.0])
    with pytest.raises(DomainError):
        check_good_lambda(f, lambda_grid=[0.5, -1.0])


def test_good_lambda_pooled_regression():
    grid = make_grid(10)
    reports = [check_good_lambda(random_haar_polynomial(grid, 10, seed=i))
               for i in range(30)]
    c, r2, table = pooled_good_lambda(reports)
    assert c > 0
    assert r2 >= 0.5
    assert len(table) == 9
    for (e, lhs, rhs, ratio) in table:
        assert rhs > 0 and 0 <= ratio <= 1


def test_cww_regression_degenerate():
    c, r2 = cww_regression([(0.3, 1.0, 0.0, 1.0, 0.0)])
    assert math.isnan(c) and math.isnan(r2)
    c, r2 = cww_regression([(0.3, 1.0, 0.5, 1.0, 0.5),
                            (0.3, 2.0, 0.25, 1.0, 0.25)])
    assert math.isnan(c)  # one eps value cannot pin a slope


# ---------------------------------------------------------------------------
# sign-modulation kernel bounds


def test_cz_kernel_haar_all_ones_size(haar64):
    # with unit multipliers the step-function kernel is 2**6 on the diagonal
    # level-6 cells and 0 off them; the largest lattice separation inside
    # one such cell is 14/1024, giving exactly 64 * 14/1024
    est = check_cz_kernel(haar64, lam=np.ones(64))["size"]
    assert est.ratio_sup == pytest.approx(0.875, abs=1e-12)


def test_cz_kernel_franklin(franklin64):
    out = check_cz_kernel(franklin64, seed=7)
    assert 0 < out["size"].ratio_sup < 20
    sm = out["smoothness"]
    assert 0 < sm.ratio_sup < 100
    w = sm.witness
    assert abs(w["x"] - w["t"]) > 2 * abs(w["t"] - w["t_prime"])


def test_cz_kernel_deterministic(franklin64):
    a = check_cz_kernel(franklin64, seed=5)
    b = check_cz_kernel(franklin64, seed=5)
    assert a["size"].ratio_sup == b["size"].ratio_sup
    assert a["smoothness"].witness == b["smoothness"].witness


def test_cz_kernel_validation(haar64):
    with pytest.raises(DomainError):
        check_cz_kernel(haar64, beta=0.95)  # beta must stay below min(a, d)
    with pytest.raises(ShapeError):
        check_cz_kernel(haar64, lam=np.ones(3))
    with pytest.raises(DomainError):
        check_cz_kernel(haar64, lam=2.0 * np.ones(64))


def test_estimate_as_dict(haar64):
    est = check_kernel_block(haar64, 2)
    d = est.as_dict()
    assert set(d) == {"name", "ratio_sup", "witness", "samples", "level"}
    assert d["ratio_sup"] == est.ratio_sup
