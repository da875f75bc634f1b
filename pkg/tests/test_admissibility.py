import math

import numpy as np
import pytest

from depthlab import (
    Density,
    Point,
    PowerTail,
    fisher_information,
    gaussian_model,
    gaussian_sequence_depth,
    hellinger_affinity,
    kakutani_product,
    logistic_density,
    normal_density,
    positivity_decision,
    stable_model,
    uniform_model,
)
from depthlab.admissibility import AI_AII, AIII
from depthlab.models import _column_rng

BASEL = math.pi ** 2 / 6.0


# -- Fisher information --------------------------------------------------------

def test_fisher_information_normal():
    assert fisher_information(normal_density()) == pytest.approx(1.0, abs=1e-6)


def test_fisher_information_logistic():
    assert fisher_information(logistic_density()) == pytest.approx(1.0 / 3.0,
                                                                   abs=1e-6)


def test_fisher_information_rejects_interior_zero():
    c = 1.0 / math.sqrt(2.0 * math.pi)
    bimodal = Density(
        pdf=lambda x: np.square(x) * c * np.exp(-0.5 * np.square(x)),
        symmetric=True, name="x2gauss")
    assert bimodal.normalization_defect() < 1e-8
    with pytest.raises(ValueError, match="vanishes"):
        fisher_information(bimodal)


def test_density_normalization_check():
    bad = Density(pdf=lambda x: np.exp(-0.5 * np.square(x)),  # missing constant
                  symmetric=True)
    with pytest.raises(ValueError):
        bad.validate()
    normal_density().validate()


# -- Hellinger affinity ----------------------------------------------------------

def test_hellinger_examples():
    phi = normal_density()
    assert hellinger_affinity(phi, 0.0) == pytest.approx(1.0, abs=1e-10)
    assert hellinger_affinity(phi, 2.0) == pytest.approx(math.exp(-0.5),
                                                         abs=1e-8)
    assert hellinger_affinity(phi, 20.0) < 1e-10


def test_hellinger_symmetry():
    for phi in (normal_density(), logistic_density()):
        for s in (0.3, 1.1, 2.7):
            assert hellinger_affinity(phi, s) == pytest.approx(
                hellinger_affinity(phi, -s), abs=1e-9)


def test_hellinger_quadratic_scaling():
    # 1 - H(s) ~ (I(phi)/8) s^2 for small s
    for phi, info in ((normal_density(), 1.0), (logistic_density(), 1.0 / 3.0)):
        for s in (1e-2, 1e-3):
            defect = 1.0 - hellinger_affinity(phi, s)
            assert defect == pytest.approx(info / 8.0 * s * s, rel=0.05)


# -- Kakutani products -------------------------------------------------------------

def test_kakutani_zero_shifts():
    res = kakutani_product(normal_density(), Point((0.0, 0.0, 0.0)))
    assert res.product == pytest.approx(1.0) and res.positive


def test_kakutani_inverse_k():
    shifts = Point(tuple(1.0 / k for k in range(1, 201)),
                   tail=PowerTail(1.0, -1.0))
    res = kakutani_product(normal_density(), shifts)
    assert res.positive
    assert res.product == pytest.approx(math.exp(-BASEL / 8.0), abs=1e-3)
    assert res.product <= math.exp(-BASEL / 8.0) + 1e-12  # certified lower bound


def test_kakutani_inverse_sqrt_k_diverges():
    res = kakutani_product(normal_density(), Point((), tail=PowerTail(1.0, -0.5)))
    assert not res.positive and res.product == 0.0


def test_kakutani_dichotomy():
    phi = logistic_density()
    convergent = Point((0.5,), tail=PowerTail(2.0, -0.8))
    divergent = Point((0.5,), tail=PowerTail(0.1, -0.45))
    res_c = kakutani_product(phi, convergent)
    res_d = kakutani_product(phi, divergent)
    assert res_c.positive and res_c.product > 0.0
    assert not res_d.positive and res_d.product == 0.0


# -- positivity decision -------------------------------------------------------------

def test_positivity_examples():
    g = gaussian_model()
    assert positivity_decision(Point.inverse_k(1.0), g).decision == "POSITIVE"
    assert positivity_decision(Point.inverse_k(0.5), g).decision == "ZERO"
    res = positivity_decision(Point.zero(), stable_model(1.0),
                              assumptions=AI_AII)
    assert res.decision == "UNDECIDED"


def test_positivity_requires_symmetry():
    asym = uniform_model(0.0, 1.0, K=3)
    with pytest.raises(ValueError, match="symmetry"):
        positivity_decision(Point.zero(), asym)


def test_positivity_ai_aii_routes():
    sym_uniform = uniform_model(-1.0, 1.0, K=4)
    # bounded support has no everywhere-positive density: bundle cannot fire
    res = positivity_decision(Point((0.1, 0.1)), sym_uniform,
                              assumptions=AI_AII)
    assert res.decision == "UNDECIDED"
    res_g = positivity_decision(Point((0.3, -0.2)), gaussian_model(),
                                assumptions=AI_AII)
    assert res_g.decision == "POSITIVE"


def test_positivity_verdict_contents():
    res = positivity_decision(Point.inverse_k(1.0), gaussian_model(),
                              assumptions=AIII)
    assert res.verdict is not None
    assert res.verdict.admissible
    assert res.verdict.fisher_information == pytest.approx(1.0, abs=1e-6)
    assert res.verdict.kakutani_product > 0.0
    assert res.verdict.route == "SHEPP-SERIES"


def test_positivity_agrees_with_gaussian_closed_form():
    rng = _column_rng(512, 7)
    g = gaussian_model()
    for i in range(30):
        if i % 3 == 0:
            a = Point((), tail=PowerTail(float(rng.uniform(0.2, 2.0)),
                                         float(rng.uniform(-1.5, -0.2))))
        else:
            width = int(rng.integers(1, 8))
            a = Point(tuple(rng.standard_normal(width)))
        decision = positivity_decision(a, g).decision
        depth = gaussian_sequence_depth(a, g)
        assert decision == ("POSITIVE" if depth.value > 0.0 else "ZERO")
