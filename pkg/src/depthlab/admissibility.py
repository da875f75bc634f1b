"""Admissible-translate machinery: Fisher information, Hellinger affinities,
the Kakutani product criterion, and the combined depth-positivity decision.

The positivity decision validates one of two assumption bundles.  The
moment bundle needs a uniform fourth-moment ratio plus everywhere-positive
coordinate densities; the scaled-iid bundle needs a common density with
finite Fisher information and variance, after which convergence of
sum (t_k(a)/lambda_k)^2 settles admissibility of the translate and hence
positive depth.  Neither route produces a numeric depth value; positivity
is all the criterion yields.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import integrate

from .analytic import (
    DIVERGENT,
    POSITIVE,
    UNDECIDED,
    ZERO,
    power_tail_sum,
    power_tail_sup,
    series_report,
)
from .errors import MomentUnavailableError, QuadratureError, UndecidedTailError
from .models import (
    DENSITY,
    GAUSSIAN,
    Density,
    Point,
    PowerTail,
    SequenceModel,
    normal_density,
)

SHEPP_SERIES = "SHEPP-SERIES"
KAKUTANI_NUMERIC = "KAKUTANI-NUMERIC"


@dataclass(frozen=True)
class AdmissibilityVerdict:
    admissible: bool
    kakutani_product: float  # certified lower bound on the infinite product
    fisher_information: float
    route: str

    def __post_init__(self):
        if self.admissible and not self.kakutani_product > 0.0:
            raise ValueError("admissibility requires a positive product bound")

    def to_dict(self) -> dict:
        return {
            "admissible": self.admissible,
            "kakutani_product": self.kakutani_product,
            "fisher_information": self.fisher_information,
            "route": self.route,
        }


@dataclass(frozen=True)
class PositivityDecision:
    decision: str  # POSITIVE | ZERO | UNDECIDED
    reason: str
    verdict: Optional[AdmissibilityVerdict] = None


# ---------------------------------------------------------------------------
# Fisher information
# ---------------------------------------------------------------------------

def _positivity_probe(phi: Density, n: int = 201) -> None:
    lo, hi = phi.support
    lo_p = lo if math.isfinite(lo) else -20.0
    hi_p = hi if math.isfinite(hi) else 20.0
    pad = 1e-9 * (hi_p - lo_p)
    xs = np.linspace(lo_p + pad, hi_p - pad, n)
    vals = np.asarray(phi.pdf(xs), dtype=float)
    if np.any(vals <= 0.0):
        bad = xs[np.argmin(vals)]
        raise ValueError(f"phi vanishes inside its support (near x={bad:.4g})")


def fisher_information(phi: Density, tol: float = 1e-6) -> float:
    """integral of (phi')^2 / phi with absolute error <= tol.

    The density must be positive on its support; a zero inside the support
    is rejected before quadrature.
    """
    _positivity_probe(phi)

    def integrand(x):
        p = float(phi.pdf(x))
        if p <= 0.0:
            # structural zeros are caught by the probe; here the density has
            # merely underflowed in a far tail, where the integrand vanishes
            return 0.0
        d = phi.derivative(x)
        return d * d / p

    lo, hi = phi.support
    val, err = integrate.quad(integrand, lo, hi, limit=400)
    if not math.isfinite(val) or err > tol:
        raise QuadratureError(
            f"Fisher-information quadrature did not converge (err {err:.2e})",
            partial=val)
    return val


# ---------------------------------------------------------------------------
# Hellinger affinity and Kakutani products
# ---------------------------------------------------------------------------

def hellinger_affinity(phi: Density, shift: float) -> float:
    """integral of sqrt(phi(t) phi(t - shift)) dt, within 1e-8."""
    lo, hi = phi.support
    lo_i = max(lo, lo + shift)
    hi_i = min(hi, hi + shift)
    if lo_i >= hi_i:
        return 0.0

    def integrand(x):
        return math.sqrt(max(float(phi.pdf(x)), 0.0)
                         * max(float(phi.pdf(x - shift)), 0.0))

    val, err = integrate.quad(integrand, lo_i, hi_i, limit=400,
                              epsabs=1e-12, epsrel=1e-12)
    if err > 1e-8:
        raise QuadratureError(
            f"Hellinger quadrature did not converge (err {err:.2e})",
            partial=val)
    return float(min(max(val, 0.0), 1.0))


@dataclass(frozen=True)
class KakutaniResult:
    product: float        # certified lower bound for the infinite product
    positive: bool        # sum (1 - H_k) < infinity
    explicit_terms: int
    tail_constant: Optional[float] = None  # quadratic bound 1-H <= C s^2

    def __iter__(self):
        yield self.product
        yield self.positive


def _quadratic_tail_constant(phi: Density, probe: float) -> float:
    """A constant C with 1 - H(s) <= C s^2 for |s| <= probe, from probes.

    Evaluates (1-H)/s^2 at geometrically shrinking shifts; the quadratic
    regime must be visible (ratios within a factor 4), otherwise the tail
    is not certified.
    """
    shifts = [probe / 2 ** i for i in range(4)]
    ratios = []
    for s in shifts:
        h = hellinger_affinity(phi, s)
        ratios.append((1.0 - h) / (s * s))
    if max(ratios) > 4.0 * max(min(ratios), 1e-300):
        raise UndecidedTailError(
            "UNDECIDED: no quadratic regime visible at the probe shifts")
    return 1.25 * max(ratios)


def kakutani_product(phi: Density, shifts: Point) -> KakutaniResult:
    """Product of per-coordinate Hellinger affinities with a certified tail.

    Explicit shift entries are integrated directly; a power-law tail is
    bounded below through 1 - H(s) <= C s^2 with C measured at probe
    shifts.  ``positive`` is the Kakutani dichotomy verdict, equivalent to
    convergence of the shift-square series.
    """
    log_sum = 0.0
    for k in range(1, shifts.explicit_width + 1):
        s = shifts.value_at(k)
        h = 1.0 if s == 0.0 else hellinger_affinity(phi, s)
        if h <= 0.0:
            return KakutaniResult(0.0, False, shifts.explicit_width)
        log_sum += math.log(h)

    start = shifts.explicit_width + 1
    tail = shifts.tail
    if tail is None or tail.is_zero:
        return KakutaniResult(math.exp(log_sum), True, shifts.explicit_width)

    kind, tail_sq = power_tail_sum(tail, start, 2.0)
    if kind == DIVERGENT:
        # shifts do not vanish or vanish too slowly: the product diverges to 0
        return KakutaniResult(0.0, False, shifts.explicit_width)
    s_max = power_tail_sup(tail, start)
    c_quad = _quadratic_tail_constant(phi, s_max)
    u_max = c_quad * s_max * s_max
    if u_max >= 0.5:
        raise UndecidedTailError(
            "UNDECIDED: probe constant too large for a tail certificate; "
            "supply more explicit shift terms")
    # log(1-u) >= -u/(1-u): a lower bound on the tail log-product
    tail_log = -c_quad * tail_sq / (1.0 - u_max)
    return KakutaniResult(math.exp(log_sum + tail_log), True,
                          shifts.explicit_width, tail_constant=c_quad)


# ---------------------------------------------------------------------------
# Positivity decision
# ---------------------------------------------------------------------------

AI_AII = "AI_AII"
AIII = "AIII"


def _model_common_density(model: SequenceModel) -> Optional[Density]:
    """The shared shape density phi when coordinates are scaled iid, else None."""
    fams = model.families()
    if fams == {GAUSSIAN}:
        return normal_density()
    if fams == {DENSITY}:
        dens = {law.density for law in model.laws}
        if model.tail is not None:
            dens.add(model.tail.density)
        if len(dens) == 1:
            return dens.pop()
    return None


def _shifts_point(a: Point, model: SequenceModel) -> Point:
    """t_k(a)/lambda_k as a Point with its own power tail."""
    m = max(a.explicit_width, model.explicit_width, 1)
    coords = tuple(a.value_at(k) / model.law(k).scale for k in range(1, m + 1))
    tail = None
    if a.tail is not None and not a.tail.is_zero:
        mt = model.tail.scale
        tail = PowerTail(a.tail.coef / mt.coef, a.tail.exponent - mt.exponent)
    return Point(coords, tail=tail)


def positivity_decision(a: Point, model: SequenceModel,
                        assumptions: str = AIII) -> PositivityDecision:
    """Classify the half-space depth at a as POSITIVE, ZERO or UNDECIDED.

    ZERO requires the divergent weighted series; POSITIVE requires the
    convergent series plus a validated assumption bundle.  Anything the
    selected bundle cannot certify is UNDECIDED, never guessed.
    """
    if assumptions not in (AI_AII, AIII):
        raise ValueError(f"unknown assumption bundle {assumptions!r}")
    for k in range(1, model.explicit_width + 1):
        if not model.law(k).is_symmetric:
            raise ValueError("symmetry required: asymmetric coordinate law")
    if model.tail is not None and not model.tail.law(
            model.explicit_width + 1).is_symmetric:
        raise ValueError("symmetry required: asymmetric coordinate law")

    try:
        rep = series_report(a, model)
    except MomentUnavailableError as exc:
        return PositivityDecision(UNDECIDED, f"series unavailable: {exc}")
    if rep.kind == DIVERGENT:
        return PositivityDecision(
            ZERO, "sum t_k(a)^2/sigma_k^2 diverges: depth is zero")

    if assumptions == AI_AII:
        try:
            from .bounds import kurtosis_bound
            c = kurtosis_bound(model)
        except MomentUnavailableError as exc:
            return PositivityDecision(UNDECIDED, f"fourth moment missing: {exc}")
        laws = list(model.laws)
        if model.tail is not None:
            laws.append(model.tail.law(model.explicit_width + 1))
        if not all(law.has_positive_density_on_r() for law in laws):
            return PositivityDecision(
                UNDECIDED,
                "finite-dimensional positivity clause needs an everywhere "
                "positive coordinate density")
        return PositivityDecision(
            POSITIVE,
            f"convergent series with moment-ratio bound c={c:.6g} and "
            "positive coordinate densities")

    phi = _model_common_density(model)
    if phi is None:
        return PositivityDecision(
            UNDECIDED, "coordinates are not scaled iid with a common density")
    if math.isfinite(phi.support[0]) or math.isfinite(phi.support[1]):
        return PositivityDecision(
            UNDECIDED, "shape density is not positive a.e. on the line")
    try:
        info = fisher_information(phi)
    except (ValueError, QuadratureError) as exc:
        return PositivityDecision(UNDECIDED, f"Fisher information: {exc}")
    from .models import _density_moment
    variance = (1.0 if phi.name == "normal"
                else _density_moment(phi, 2) - _density_moment(phi, 1) ** 2)
    if not math.isfinite(variance) or variance <= 0.0:
        return PositivityDecision(UNDECIDED, "shape density has no finite variance")
    shifts = _shifts_point(a, model)
    try:
        kak = kakutani_product(phi, shifts)
    except UndecidedTailError as exc:
        return PositivityDecision(UNDECIDED, str(exc))
    verdict = AdmissibilityVerdict(
        admissible=kak.positive,
        kakutani_product=kak.product,
        fisher_information=info,
        route=SHEPP_SERIES if kak.positive else KAKUTANI_NUMERIC,
    )
    if kak.positive:
        return PositivityDecision(
            POSITIVE,
            "translate admissible: finite Fisher information and convergent "
            "shift-square series", verdict)
    return PositivityDecision(
        ZERO, "Kakutani product vanishes: translate not admissible", verdict)
