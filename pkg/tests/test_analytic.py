import math

import numpy as np
import pytest
from scipy.special import ndtr

from depthlab import (
    GridFunction,
    Point,
    PowerTail,
    band_depth_1d,
    brownian_depths,
    dual_norm,
    gaussian_model,
    gaussian_sequence_depth,
    modified_band_depth,
    rademacher_classify,
    stable_cdf,
    stable_depth,
    stable_model,
    weighted_series,
)
from depthlab.errors import GridCoverageError, HeterogeneousModelError
from depthlab.models import _column_rng, stable_law
from depthlab.models import SequenceModel

BASEL = math.pi ** 2 / 6.0


# -- dual norms ---------------------------------------------------------------

def test_dual_norm_examples():
    assert dual_norm([3.0, 4.0], 2.0) == pytest.approx(5.0)
    assert dual_norm([1.0, -2.0, 0.5], 1.0) == pytest.approx(2.0)
    assert dual_norm([1.0, 1.0], 1.5) == pytest.approx(2.0 ** (1.0 / 3.0))


def _unit_p_candidates(rng, length, p, count=4000):
    xs = rng.standard_normal((count, length))
    xs[np.abs(xs) < 1e-12] = 1.0
    norms = np.sum(np.abs(xs) ** p, axis=1) ** (1.0 / p)
    return xs / norms[:, None]


@pytest.mark.parametrize("p", [0.5, 1.0, 1.5, 2.0, 3.0])
def test_dual_norm_brute_force(p):
    rng = _column_rng(77, int(p * 10))
    for _ in range(6):
        length = int(rng.integers(1, 5))
        y = rng.standard_normal(length) * 2.0
        target = dual_norm(y, p)
        cands = _unit_p_candidates(rng, length, p)
        # attaining vector: conjugate-power pattern (p>1) or best axis (p<=1)
        if p > 1.0:
            q = p / (p - 1.0)
            star = np.sign(y) * np.abs(y) ** (q - 1.0)
            if np.any(star != 0.0):
                star /= np.sum(np.abs(star) ** p) ** (1.0 / p)
                cands = np.vstack([cands, star])
        else:
            star = np.zeros(length)
            star[np.argmax(np.abs(y))] = np.sign(y[np.argmax(np.abs(y))]) or 1.0
            cands = np.vstack([cands, star])
        vals = np.abs(cands) @ np.abs(y)
        assert np.max(vals) <= target + 1e-9
        assert np.max(vals) == pytest.approx(target, abs=1e-3)


# -- stable depth -------------------------------------------------------------

def test_stable_depth_examples():
    m2 = stable_model(2.0)
    assert stable_depth(Point.zero(), m2).value == pytest.approx(0.5)
    r = stable_depth(Point((1.0,)), m2)
    assert r.value == pytest.approx(1.0 - ndtr(1.0), abs=1e-12)
    m1 = stable_model(1.0)
    r1 = stable_depth(Point((1.0,)), m1)
    assert r1.value == pytest.approx(0.25, abs=1e-12)


def test_stable_depth_antitone_and_centered():
    for p in (0.5, 1.0, 1.5, 2.0):
        m = stable_model(p)
        assert stable_depth(Point.zero(), m).value == 0.5
        values = [stable_depth(Point((x,)), m).value for x in (0.2, 0.7, 1.9, 4.0)]
        assert all(v1 >= v2 for v1, v2 in zip(values, values[1:]))


def test_stable_depth_divergent_norm_is_zero_certified():
    m = stable_model(2.0)
    r = stable_depth(Point((), tail=PowerTail(1.0, -0.4)), m)
    assert r.value == 0.0 and r.zero_certified
    # p <= 1 uses the sup norm: a bounded nonvanishing tail stays positive
    m1 = stable_model(1.0)
    r1 = stable_depth(Point((), tail=PowerTail(0.5, 0.0)), m1)
    assert r1.value == pytest.approx(1.0 - (0.5 + math.atan(0.5) / math.pi))


def test_stable_depth_heterogeneous_error():
    m = SequenceModel(laws=(stable_law(1.0), stable_law(2.0)))
    with pytest.raises(HeterogeneousModelError):
        stable_depth(Point((1.0, 1.0)), m)
    with pytest.raises(HeterogeneousModelError):
        stable_depth(Point((1.0,)), gaussian_model())


def test_stable_cdf_monte_carlo_matches_analytic_anchors():
    # p=1.5 estimates are within Monte Carlo error of scipy at a few probes
    from scipy import stats
    for x in (0.5, 1.5, 4.0):
        est, se = stable_cdf(1.5, x)
        assert est == pytest.approx(stats.levy_stable.cdf(x, 1.5, 0.0),
                                    abs=max(4.0 * se, 1e-3))


# -- gaussian sequence depth --------------------------------------------------

def test_gaussian_depth_examples():
    g = gaussian_model()
    assert gaussian_sequence_depth(Point.zero(), g).value == pytest.approx(0.5)
    r = gaussian_sequence_depth(Point.inverse_k(1.0), g)
    assert r.value == pytest.approx(float(ndtr(-math.pi / math.sqrt(6.0))),
                                    abs=1e-12)
    r2 = gaussian_sequence_depth(Point.inverse_k(0.5), g)
    assert r2.zero_certified and r2.value == 0.0
    assert r2.certificate.kind == "divergence"


def test_gaussian_matches_stable_p2():
    rng = _column_rng(5150, 1)
    for _ in range(10):
        width = int(rng.integers(1, 7))
        scales = rng.uniform(0.5, 2.0, width)
        coords = rng.standard_normal(width)
        a = Point(tuple(coords))
        g = gaussian_model(scales=scales.tolist())
        s = SequenceModel(laws=tuple(stable_law(2.0, sc) for sc in scales))
        assert gaussian_sequence_depth(a, g).value == pytest.approx(
            stable_depth(a, s).value, abs=1e-12)


# -- Brownian example ---------------------------------------------------------

def test_brownian_depths_examples():
    zero = GridFunction.from_callable(lambda t: 0.0, k_max=64)
    assert brownian_depths(zero, 64) == (pytest.approx(0.5), pytest.approx(0.5))

    wedge = GridFunction.from_callable(lambda t: math.sqrt(1.0 + t), k_max=64)
    ev, _ = brownian_depths(wedge, 64)
    assert ev == pytest.approx(1.0 - ndtr(1.0), abs=1e-12)

    ident = GridFunction.from_callable(lambda t: t, k_max=64)
    ev_i, diff_i = brownian_depths(ident, 64)
    assert diff_i == pytest.approx(float(ndtr(-1.0 / math.sqrt(2.0))), abs=1e-12)


def test_brownian_grid_coverage_error():
    bad = GridFunction(np.linspace(0.0, 1.0, 7), np.zeros(7))
    with pytest.raises(GridCoverageError) as err:
        brownian_depths(bad, 8)
    assert err.value.missing


def test_brownian_overflow_reports_zero():
    # steep distant spike: sup of sqrt(k(k+1)) * theta_k(a) overflows
    f = GridFunction.from_callable(
        lambda t: 1e9 if t >= 0.999 else 0.0, k_max=8)
    ev, diff = brownian_depths(f, 1)
    assert diff == 0.0


# -- Rademacher classification ------------------------------------------------

def test_rademacher_classify_examples():
    spike = Point((0.0, 0.0, 0.0, 0.0, 2.0))
    c1 = rademacher_classify(spike)
    assert c1.label == "ZERO" and "sup" in c1.reason

    c2 = rademacher_classify(Point.zero())
    assert c2.label == "POSITIVE"

    c3 = rademacher_classify(Point.inverse_k(1.0))
    assert c3.label == "POSITIVE"
    assert c3.series == pytest.approx(BASEL, abs=1e-9) and c3.sup == 1.0

    c4 = rademacher_classify(Point.inverse_k(0.4))
    assert c4.label == "ZERO" and "series" in c4.reason


def test_rademacher_zero_depth_brute_force_at_center():
    # inf over sign-pattern directions of P(sum alpha_k eps_k >= 0) is 1/2
    from depthlab.bounds import rademacher_depth_over
    from depthlab.models import Direction
    dirs = [Direction.coordinate(k) for k in range(1, 4)]
    dirs += [Direction((1, 2, 3), signs) for signs in
             [(1., 1., 1.), (1., -1., 1.), (1., 1., -1.), (1., -1., -1.)]]
    assert rademacher_depth_over(Point.zero(), dirs) == pytest.approx(0.5)


def test_rademacher_scale_consistency_flip():
    a = Point((0.9, 0.4))
    assert rademacher_classify(a).label == "POSITIVE"
    factor = 1.3  # > 1/sup raises the sup above 1
    flipped = Point(tuple(factor * c for c in a.coords))
    assert rademacher_classify(flipped).label == "ZERO"


# -- band depths --------------------------------------------------------------

def test_band_depth_1d_examples():
    unif = lambda x: min(max(x, 0.0), 1.0)
    assert band_depth_1d(0.5, unif, 2) == pytest.approx(0.5)
    assert band_depth_1d(-1.0, unif, 2) == pytest.approx(0.0)
    assert band_depth_1d(0.5, unif, 3) == pytest.approx(0.75)


def test_band_depth_1d_monte_carlo_cross_check():
    rng = _column_rng(88, 1)
    for r in (2, 3):
        draws = rng.random((100_000, r))
        mc = np.mean((draws.min(axis=1) <= 0.5) & (0.5 <= draws.max(axis=1)))
        value = band_depth_1d(0.5, lambda x: min(max(x, 0.0), 1.0), r)
        assert value == pytest.approx(mc, abs=0.006)


def test_band_depth_1d_atom_left_limit():
    # point mass at 0: F(0)=1, F(0-)=0, so the band always contains 0
    cdf = lambda x: 1.0 if x >= 0.0 else 0.0
    cdf_left = lambda x: 1.0 if x > 0.0 else 0.0
    assert band_depth_1d(0.0, cdf, 2, cdf_left=cdf_left) == pytest.approx(1.0)


def _const_path(grid, v):
    return GridFunction(grid, np.full_like(grid, v))


def test_modified_band_depth_examples():
    grid = np.linspace(0.0, 1.0, 33)
    a = _const_path(grid, 0.0)
    assert modified_band_depth(a, [_const_path(grid, -1.0),
                                   _const_path(grid, 1.0)], r=2) == 1.0
    above = _const_path(grid, 5.0)
    assert modified_band_depth(above, [_const_path(grid, -1.0),
                                       _const_path(grid, 1.0)], r=2) == 0.0
    pair = [_const_path(grid, -1.0), _const_path(grid, 1.0)]
    assert modified_band_depth(_const_path(grid, 1.0), pair, r=2) == 1.0
    with pytest.raises(ValueError):
        modified_band_depth(a, pair, r=3)


def test_modified_band_depth_converges_to_analytic_integral():
    # paths are constant N(0,1) lines: integrand is 1-Phi(a)^2-(1-Phi(a))^2
    grid = np.linspace(0.0, 1.0, 65)
    a_vals = 0.3 * np.sin(2.0 * math.pi * grid) + 0.1
    a = GridFunction(grid, a_vals)
    rng = _column_rng(1234, 2)
    paths = [_const_path(grid, z) for z in rng.standard_normal(1000)]
    estimate = modified_band_depth(a, paths, r=2)
    integrand = 1.0 - ndtr(a_vals) ** 2 - (1.0 - ndtr(a_vals)) ** 2
    oracle = float(np.trapezoid(integrand, grid))
    assert estimate == pytest.approx(oracle, abs=0.02)


# -- weighted series ----------------------------------------------------------

def test_weighted_series_examples():
    g = gaussian_model()
    assert weighted_series(Point.zero(), g) == 0.0
    assert weighted_series(Point.inverse_k(1.0), g) == pytest.approx(
        BASEL, abs=1e-6)
    assert weighted_series(Point((1.0,) * 4), g) == 4.0
    assert weighted_series(Point.inverse_k(0.5), g) == math.inf
