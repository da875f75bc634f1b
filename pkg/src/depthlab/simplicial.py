"""Simplicial depth in R^d, the block-projection depth on sequence space,
its U-statistic estimator, and the associated consistency-failure experiment.

Open-hull membership is decided by a barycentric linear solve with a
pivot-style singularity tolerance of 1e-12; degenerate vertex sets count
as "outside" and are tallied in a diagnostic counter.  Strict positivity
of the barycentric weights is tested with exact floating comparison,
since boundary hits are measure-zero for absolutely continuous laws.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.special import comb

from ._parallel import ordered_map
from .errors import BudgetExceededError
from .models import CoordinateLaw, Point, Sample, SequenceModel, _column_rng, _sample_column

DEFAULT_BUDGET = 10 ** 7
_PIVOT_TOL = 1e-12


# ---------------------------------------------------------------------------
# Block projections
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BlockProjection:
    """theta_k: x -> (x_{(k-1)d+1}, ..., x_{kd})."""

    d: int
    k: int

    def __post_init__(self):
        if self.d < 1 or self.k < 1:
            raise ValueError("block dimension and index must be >= 1")

    @property
    def columns(self) -> slice:
        start = (self.k - 1) * self.d
        return slice(start, start + self.d)

    def of_point(self, a: Point) -> np.ndarray:
        start = (self.k - 1) * self.d
        return np.array([a.value_at(start + i) for i in range(1, self.d + 1)])

    def of_rows(self, data: np.ndarray) -> np.ndarray:
        if data.shape[1] < self.k * self.d:
            raise ValueError(
                f"sample width {data.shape[1]} cannot host block "
                f"k={self.k} of dimension {self.d}")
        return data[:, self.columns]


# ---------------------------------------------------------------------------
# Open-simplex membership (barycentric solve)
# ---------------------------------------------------------------------------

def _open_hull_mask(x: np.ndarray, vertex_sets: np.ndarray
                    ) -> tuple[np.ndarray, np.ndarray]:
    """(inside, degenerate) masks for batched vertex sets.

    ``vertex_sets`` has shape (N, d+1, d); vertices become columns of the
    (d+1)x(d+1) barycentric system with an affine ones-row.
    """
    n_batch, dp1, d = vertex_sets.shape
    mats = np.empty((n_batch, dp1, dp1))
    mats[:, :d, :] = np.transpose(vertex_sets, (0, 2, 1))
    mats[:, d, :] = 1.0
    col_norms = np.linalg.norm(mats, axis=1)
    hadamard = np.prod(np.maximum(col_norms, 1e-300), axis=1)
    dets = np.linalg.det(mats)
    degenerate = np.abs(dets) <= _PIVOT_TOL * hadamard
    rhs = np.concatenate([np.asarray(x, dtype=float), [1.0]])
    safe = np.where(degenerate[:, None, None], np.eye(dp1)[None], mats)
    rhs_stack = np.broadcast_to(rhs[:, None], (n_batch, dp1, 1))
    weights = np.linalg.solve(safe, rhs_stack)[..., 0]
    inside = np.all(weights > 0.0, axis=1) & ~degenerate
    return inside, degenerate


def point_in_open_simplex(x, vertices) -> bool:
    """True iff x lies strictly inside the open hull of the d+1 vertices.

    Degenerate vertex sets (singular barycentric system) return False.
    """
    verts = np.asarray(vertices, dtype=float)[None, :, :]
    inside, _ = _open_hull_mask(np.asarray(x, dtype=float), verts)
    return bool(inside[0])


# ---------------------------------------------------------------------------
# Monte Carlo simplicial depth in R^d
# ---------------------------------------------------------------------------

def simplicial_depth_mc(x, sampler: Callable[[np.random.Generator, int], np.ndarray],
                        draws: int, seed: int) -> tuple[float, float]:
    """Monte Carlo estimate of P(x in open hull of d+1 iid draws).

    ``sampler(rng, m)`` must return an (m, d) array.  Returns the estimate
    and its binomial standard error.
    """
    if draws < 1:
        raise ValueError("draws must be >= 1")
    x = np.asarray(x, dtype=float)
    d = x.size
    rng = _column_rng(seed, 0x51D)
    hits = 0
    chunk = 200_000
    done = 0
    while done < draws:
        m = min(chunk, draws - done)
        pts = sampler(rng, m * (d + 1)).reshape(m, d + 1, d)
        inside, _ = _open_hull_mask(x, pts)
        hits += int(np.count_nonzero(inside))
        done += m
    est = hits / draws
    stderr = math.sqrt(max(est * (1.0 - est), 1e-12) / draws)
    return est, stderr


def iid_block_sampler(law: CoordinateLaw, d: int
                      ) -> Callable[[np.random.Generator, int], np.ndarray]:
    """Sampler for blocks of d iid coordinates with the given marginal."""

    def sampler(rng: np.random.Generator, m: int) -> np.ndarray:
        return _sample_column(law, m * d, rng).reshape(m, d)

    return sampler


# ---------------------------------------------------------------------------
# U-statistic block counts
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class UStatResult:
    count: int          # Z_{n,k}
    n_subsets: int      # N_{n,d}
    ratio: float
    degenerate: int


def n_subsets(n: int, d: int) -> int:
    return int(comb(n, d + 1, exact=True))


def u_statistic_depth(a: Point, s: Sample, d: int, k: int,
                      budget: int = DEFAULT_BUDGET) -> UStatResult:
    """Exact enumeration of open-hull hits over all (d+1)-subsets of rows."""
    if s.n < d + 1:
        raise ValueError(f"need at least d+1={d + 1} rows, sample has {s.n}")
    total = n_subsets(s.n, d)
    if total > budget:
        raise BudgetExceededError(
            f"{total} subsets exceed the budget {budget}; "
            "use u_statistic_depth_mc for subset subsampling")
    proj = BlockProjection(d=d, k=k)
    block = proj.of_rows(s.data)
    target = proj.of_point(a)
    combos = np.array(list(itertools.combinations(range(s.n), d + 1)))
    inside, degen = _open_hull_mask(target, block[combos])
    count = int(np.count_nonzero(inside))
    return UStatResult(count=count, n_subsets=total, ratio=count / total,
                       degenerate=int(np.count_nonzero(degen)))


def u_statistic_depth_mc(a: Point, s: Sample, d: int, k: int, subsets: int,
                         seed: int) -> tuple[float, float]:
    """Subset-subsampled estimate of Z_{n,k}/N_{n,d} with standard error."""
    if s.n < d + 1:
        raise ValueError(f"need at least d+1={d + 1} rows, sample has {s.n}")
    proj = BlockProjection(d=d, k=k)
    block = proj.of_rows(s.data)
    target = proj.of_point(a)
    rng = _column_rng(seed, 0x5B5)
    picks = np.empty((subsets, d + 1), dtype=int)
    for i in range(subsets):
        picks[i] = rng.choice(s.n, size=d + 1, replace=False)
    inside, _ = _open_hull_mask(target, block[picks])
    est = float(np.mean(inside))
    stderr = math.sqrt(max(est * (1.0 - est), 1e-12) / subsets)
    return est, stderr


# ---------------------------------------------------------------------------
# Empirical block-projection depth
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SimplicialRecord:
    n: int
    d: int
    n_subsets: int
    block_counts: tuple[int, ...]
    degenerate_counts: tuple[int, ...]
    depth: float                     # min_k Z_{n,k} / N_{n,d}
    lambda_hat: Optional[float] = None
    lambda_stderr: Optional[float] = None


def empirical_block_depth(a: Point, s: Sample, d: int, k_max: int,
                               budget: int = DEFAULT_BUDGET
                               ) -> SimplicialRecord:
    """min over blocks k <= k_max of the per-block U-statistic ratio."""
    if s.K < k_max * d:
        raise ValueError(
            f"sample width {s.K} is insufficient for k_max={k_max} blocks "
            f"of dimension {d}")
    total = n_subsets(s.n, d)
    if total * k_max > budget:
        raise BudgetExceededError(
            f"{total * k_max} membership tests exceed the budget {budget}")
    counts, degens = [], []
    for k in range(1, k_max + 1):
        res = u_statistic_depth(a, s, d, k, budget=budget)
        counts.append(res.count)
        degens.append(res.degenerate)
    depth = min(counts) / total
    return SimplicialRecord(n=s.n, d=d, n_subsets=total,
                            block_counts=tuple(counts),
                            degenerate_counts=tuple(degens), depth=depth)


# ---------------------------------------------------------------------------
# The consistency-failure experiment
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BlockSeedRecord:
    seed: int
    depth: float
    zero_hit: bool
    min_block: int
    block_counts: tuple[int, ...]
    n_subsets: int


@dataclass(frozen=True)
class BlockExperimentResult:
    records: tuple[BlockSeedRecord, ...]
    fraction_zero: float
    fraction_zero_stderr: float
    lambda_hat: float
    lambda_stderr: float
    gap: float
    n: int
    d: int
    k_max: int


def _require_iid_continuous(model: SequenceModel) -> CoordinateLaw:
    laws = set(model.laws)
    if model.tail is not None:
        laws.add(model.tail.law(model.explicit_width + 1))
    if len(laws) != 1:
        raise ValueError("the experiment requires iid coordinates")
    law = laws.pop()
    if law.family == "rademacher":
        raise ValueError("a continuous marginal is required for lambda(a) > 0")
    return law


def block_depth_experiment(model: SequenceModel, a: Point, n: int, d: int,
                     k_max: int, seeds: int, master_seed: int = 0,
                     mc_draws: int = 10 ** 5,
                     budget: int = DEFAULT_BUDGET) -> BlockExperimentResult:
    """Empirical block depth per seed versus the Monte Carlo true depth.

    For a periodic point every block tests the same projected value, so
    the true depth equals the single-block simplicial depth lambda(a),
    estimated here by Monte Carlo.
    """
    law = _require_iid_continuous(model)
    width = k_max * d
    target = BlockProjection(d=d, k=1).of_point(a)
    lam, lam_se = simplicial_depth_mc(
        target, iid_block_sampler(law, d), mc_draws,
        seed=_mix_seed(master_seed, 0xA11A))

    def one(i: int) -> BlockSeedRecord:
        seed_i = _mix_seed(master_seed, i)
        from .models import sample as draw
        s = draw(model, n, width, seed_i)
        rec = empirical_block_depth(a, s, d, k_max, budget=budget)
        return BlockSeedRecord(seed=seed_i, depth=rec.depth,
                               zero_hit=(rec.depth == 0.0),
                               min_block=int(np.argmin(rec.block_counts)) + 1,
                               block_counts=rec.block_counts,
                               n_subsets=rec.n_subsets)

    records = tuple(ordered_map(one, range(seeds)))
    zeros = sum(r.zero_hit for r in records)
    frac = zeros / seeds
    stderr = math.sqrt(frac * (1.0 - frac) / seeds)
    gap = lam if zeros else float(
        np.mean([abs(r.depth - lam) for r in records]))
    return BlockExperimentResult(records=records, fraction_zero=frac,
                       fraction_zero_stderr=stderr, lambda_hat=lam,
                       lambda_stderr=lam_se, gap=gap, n=n, d=d, k_max=k_max)


def _mix_seed(master_seed: int, i: int) -> int:
    ss = np.random.SeedSequence(entropy=(int(master_seed), int(i)))
    return int(ss.generate_state(1)[0])
