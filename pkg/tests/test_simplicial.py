import math

import numpy as np
import pytest
from scipy import stats

from depthlab import (
    Point,
    Sample,
    empirical_block_depth,
    point_in_open_simplex,
    block_depth_experiment,
    sample,
    simplicial_depth_mc,
    u_statistic_depth,
    u_statistic_depth_mc,
    uniform_model,
)
from depthlab.errors import BudgetExceededError
from depthlab.models import _column_rng
from depthlab.simplicial import BlockProjection, iid_block_sampler, n_subsets
from depthlab.models import uniform_law


def test_point_in_open_simplex_examples():
    tri = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]
    assert point_in_open_simplex([0.25, 0.25], tri)
    assert not point_in_open_simplex([0.5, 0.0], tri)  # edge is excluded
    assert not point_in_open_simplex([0.1, 0.1], [[0, 0], [1, 1], [2, 2]])


def test_point_in_open_simplex_1d():
    assert point_in_open_simplex([0.5], [[0.0], [1.0]])
    assert not point_in_open_simplex([1.0], [[0.0], [1.0]])
    assert not point_in_open_simplex([1.5], [[0.0], [1.0]])


def test_simplicial_depth_mc_median():
    est, se = simplicial_depth_mc(
        [0.5], iid_block_sampler(uniform_law(0.0, 1.0), 1), 100_000, seed=1)
    assert est == pytest.approx(0.5, abs=3.0 * se)


def test_simplicial_depth_mc_disc_center():
    def disc(rng, m):
        r = np.sqrt(rng.random(m))
        th = rng.uniform(0.0, 2.0 * math.pi, m)
        return np.column_stack([r * np.cos(th), r * np.sin(th)])

    est, se = simplicial_depth_mc([0.0, 0.0], disc, 10 ** 6, seed=2)
    assert est == pytest.approx(0.25, abs=3.0 * se)


def test_simplicial_depth_mc_far_point():
    est, _ = simplicial_depth_mc(
        [10.0], iid_block_sampler(uniform_law(0.0, 1.0), 1), 20_000, seed=3)
    assert est == 0.0


# -- exact U-statistic counts ---------------------------------------------------

def test_u_statistic_single_subset():
    s = sample(uniform_model(0.0, 1.0), 3, 2, seed=4)
    res = u_statistic_depth(Point((0.5, 0.5)), s, d=2, k=1)
    assert res.n_subsets == 1
    assert res.count in (0, 1)


def test_u_statistic_d1_product_identity():
    m = uniform_model(0.0, 1.0)
    for i in range(100):
        s = sample(m, 14, 1, seed=5000 + i)
        b = float(_column_rng(6000 + i, 0).random())
        res = u_statistic_depth(Point((b,)), s, d=1, k=1)
        col = s.data[:, 0]
        below = int(np.sum(col < b))
        above = int(np.sum(col > b))
        assert res.count == below * above


def test_u_statistic_permutation_invariance():
    s = sample(uniform_model(0.0, 1.0), 10, 2, seed=6)
    res = u_statistic_depth(Point((0.4, 0.6)), s, d=2, k=1)
    rng = _column_rng(7, 0)
    shuffled = Sample(s.data[rng.permutation(10)], seed=0)
    res2 = u_statistic_depth(Point((0.4, 0.6)), shuffled, d=2, k=1)
    assert res.count == res2.count


def test_u_statistic_affine_invariance():
    s = sample(uniform_model(0.0, 1.0), 12, 2, seed=8)
    a = Point((0.5, 0.5))
    res = u_statistic_depth(a, s, d=2, k=1)
    A = np.array([[2.0, 1.0], [-0.5, 3.0]])
    b = np.array([1.0, -2.0])
    mapped = Sample(s.data @ A.T + b, seed=0)
    target = np.array([0.5, 0.5]) @ A.T + b
    res2 = u_statistic_depth(Point(tuple(target)), mapped, d=2, k=1)
    assert res.count == res2.count


def test_u_statistic_lln_against_lambda_hat():
    m = uniform_model(0.0, 1.0)
    a = Point((0.5, 0.5))
    lam, lam_se = simplicial_depth_mc(
        [0.5, 0.5], iid_block_sampler(uniform_law(0.0, 1.0), 2),
        10 ** 5, seed=9)
    ratios = []
    for i in range(30):
        s = sample(m, 20, 2, seed=9000 + i)
        ratios.append(u_statistic_depth(a, s, d=2, k=1).ratio)
    mean_ratio = float(np.mean(ratios))
    se = math.sqrt(np.var(ratios, ddof=1) / len(ratios) + lam_se ** 2)
    assert mean_ratio == pytest.approx(lam, abs=3.0 * se)


def test_budget_guard_and_subset_mc():
    s = sample(uniform_model(0.0, 1.0), 120, 2, seed=10)
    with pytest.raises(BudgetExceededError):
        u_statistic_depth(Point((0.5, 0.5)), s, d=2, k=1, budget=1000)
    exact = u_statistic_depth(Point((0.5, 0.5)), s, d=2, k=1)
    est, se = u_statistic_depth_mc(Point((0.5, 0.5)), s, d=2, k=1,
                                   subsets=4000, seed=11)
    assert est == pytest.approx(exact.ratio, abs=3.0 * se)


def test_u_statistic_width_errors():
    s = sample(uniform_model(0.0, 1.0), 6, 2, seed=12)
    with pytest.raises(ValueError):
        u_statistic_depth(Point((0.5, 0.5)), s, d=2, k=2)  # block 2 needs 4 cols
    small = sample(uniform_model(0.0, 1.0), 2, 2, seed=13)
    with pytest.raises(ValueError):
        u_statistic_depth(Point((0.5, 0.5)), small, d=2, k=1)


# -- block-projection depth ---------------------------------------------------

def test_block_depth_k1_reduces_to_u_statistic():
    s = sample(uniform_model(0.0, 1.0), 8, 2, seed=14)
    a = Point((0.3, 0.3))
    rec = empirical_block_depth(a, s, d=2, k_max=1)
    res = u_statistic_depth(a, s, d=2, k=1)
    assert rec.block_counts == (res.count,)
    assert rec.depth == res.ratio


def test_block_depth_periodic_blocks():
    a = Point.periodic([0.4, 0.7], repeats=3)
    proj = BlockProjection(d=2, k=3)
    assert proj.of_point(a) == pytest.approx([0.4, 0.7])
    s = sample(uniform_model(0.0, 1.0), 6, 6, seed=15)
    rec = empirical_block_depth(a, s, d=2, k_max=3)
    assert rec.depth == min(rec.block_counts) / rec.n_subsets
    with pytest.raises(ValueError):
        empirical_block_depth(a, s, d=2, k_max=4)


def test_block_counts_iid_across_blocks():
    # for a periodic point the per-block counts are iid over k: compare
    # two blocks' empirical distributions across seeds
    m = uniform_model(0.0, 1.0)
    a = Point.periodic([0.5, 0.5], repeats=2)
    z1, z2 = [], []
    for i in range(80):
        s = sample(m, 6, 4, seed=16000 + i)
        rec = empirical_block_depth(a, s, d=2, k_max=2)
        z1.append(rec.block_counts[0])
        z2.append(rec.block_counts[1])
    stat = stats.ks_2samp(z1, z2)
    assert stat.pvalue > 1e-3


# -- the consistency-failure experiment ----------------------------------------------

def test_block_depth_experiment_small():
    res = block_depth_experiment(uniform_model(0.0, 1.0),
                           Point.periodic([0.5, 0.5], repeats=50),
                           n=4, d=2, k_max=50, seeds=40, master_seed=17,
                           mc_draws=50_000)
    # per-block zero probability is at least 2 * (1/2)^4 = 1/8
    floor = 1.0 - (1.0 - 0.125) ** 50
    assert res.fraction_zero >= floor - 3.0 * res.fraction_zero_stderr
    assert res.lambda_hat == pytest.approx(0.25, abs=3.0 * res.lambda_stderr)
    assert res.gap == res.lambda_hat


def test_block_experiment_point_outside_support():
    res = block_depth_experiment(uniform_model(0.0, 1.0),
                           Point.periodic([5.0, 5.0], repeats=10),
                           n=4, d=2, k_max=10, seeds=10, master_seed=18,
                           mc_draws=20_000)
    assert res.lambda_hat == 0.0
    assert res.fraction_zero == 1.0
    assert res.gap == 0.0


def test_block_experiment_requires_continuous_iid():
    from depthlab import rademacher_model
    with pytest.raises(ValueError):
        block_depth_experiment(rademacher_model(), Point.zero(), n=4, d=2, k_max=5,
                         seeds=2, master_seed=1)


def test_n_subsets_formula():
    assert n_subsets(4, 2) == 4
    assert n_subsets(60, 2) == math.comb(60, 3)
