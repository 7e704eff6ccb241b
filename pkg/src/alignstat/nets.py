"""Explicit packings and coverings of G(k, d), and ball-volume estimates.

Packing members are graphs over the first k axes with slopes on a grid of
step eps; any two distinct grid points are at angle >= c * eps, so the
family is an eps-scale packing and its cardinality grows like
eps^{-(d-k)k}.  Covering members repeat the construction over all pivot
axis subsets and a slope grid wide enough to reach every subspace's
normal form.

The slope grid for coverings runs over *signed* integers.  The normal
form of a generic subspace has entries of either sign, and a family built
from nonnegative multiples only would leave subspaces with negative chart
entries at a constant distance from the family, so its covering radius
would not scale with eps.

Monte Carlo estimators for the invariant measure of metric balls and of
chart-coordinate cubes live here too; both scale like eps^{(d-k)k}.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations, product
from math import comb

import numpy as np

from .errors import BudgetExceeded, DimensionMismatch, EmptyFamily, ParamOrder
from .grassmann import (
    RANK_TOL,
    Subspace,
    batch_canonical_angle,
    orthonormalize,
    sample_uniform_frames,
    span_normal_form,
)

DEFAULT_FAMILY_CAP = 10**6

# Sample count and padding used when estimating the normal-form bound c1.
_SPAN_BOUND_SAMPLES = 10**4
_SPAN_BOUND_QUANTILE = 0.999
_SPAN_BOUND_PAD = 1.5
_SPAN_BOUND_SEED = 88710


@dataclass
class SubspaceFamily:
    """A finite family of subspaces with its generating grid metadata.

    ``meta[i]`` records the (sigma, n) pair that produced member i: the
    axis permutation and the integer slope tuple.  For packings,
    ``separation`` is the measured minimum pairwise angle (None when the
    family was too large to measure exhaustively).
    """

    eps: float
    kind: str  # "packing" | "covering"
    members: list[Subspace]
    meta: list[tuple[tuple[int, ...], tuple[int, ...]]]
    separation: float | None = None
    c1: float | None = None
    # running covering radius: every probe tested so far lies within this
    # angle of some member (None until a probe has been run)
    probe_radius: float | None = None
    _stack: np.ndarray | None = field(default=None, repr=False)

    def __len__(self) -> int:
        return len(self.members)

    def frame_stack(self) -> np.ndarray:
        if self._stack is None:
            self._stack = np.stack([m.frame for m in self.members])
        return self._stack


def _grid_member_frame(d: int, k: int, sigma: tuple[int, ...], slopes: np.ndarray) -> np.ndarray:
    """Raw frame spanned by e_{sigma[i]} + sum_j slopes[j, i] e_{sigma[k+j]}."""
    mat = np.zeros((d, k))
    for i in range(k):
        mat[sigma[i], i] = 1.0
        for j in range(d - k):
            mat[sigma[k + j], i] = slopes[j, i]
    return mat


def packing_family(k: int, d: int, eps: float, cap: int = DEFAULT_FAMILY_CAP) -> SubspaceFamily:
    """Grid packing: slopes eps * n with n in {0, ..., floor(1/eps)}^(d-k)k.

    Member count is exactly (floor(1/eps) + 1)^((d-k)k); the measured
    minimum pairwise angle is recorded when the family is small enough to
    check exhaustively (<= 4096 members).
    """
    if not 0 < eps <= 1:
        raise ParamOrder(f"need 0 < eps <= 1, got {eps}")
    if not 1 <= k < d:
        raise ParamOrder(f"need 1 <= k < d, got k={k}, d={d}")
    per_entry = int(np.floor(1.0 / eps)) + 1
    n_entries = (d - k) * k
    count = per_entry**n_entries
    if count > cap:
        raise BudgetExceeded(f"packing would have {count} members > cap {cap}")
    identity = tuple(range(d))
    members: list[Subspace] = []
    meta = []
    for n_tuple in product(range(per_entry), repeat=n_entries):
        slopes = eps * np.array(n_tuple, dtype=float).reshape(d - k, k)
        members.append(orthonormalize(_grid_member_frame(d, k, identity, slopes)))
        meta.append((identity, n_tuple))
    fam = SubspaceFamily(eps=eps, kind="packing", members=members, meta=meta)
    if len(members) <= 4096:
        fam.separation = _min_pairwise_angle(fam)
    return fam


def _min_pairwise_angle(fam: SubspaceFamily) -> float:
    stack = fam.frame_stack()
    m = len(fam.members)
    best = np.pi / 2
    for i in range(m - 1):
        angles = batch_canonical_angle(stack[i + 1 :], fam.members[i].frame)
        best = min(best, float(np.min(angles)))
    return best


@lru_cache(maxsize=None)
def estimate_span_bound(k: int, d: int) -> float:
    """Empirical stand-in for the normal-form entry bound c1(k, d).

    The 99.9th percentile of max|xi| over 10^4 uniform subspaces, padded
    by 1.5.  Deterministic: drawn from a fixed internal seed, cached per
    (k, d).
    """
    rng = np.random.default_rng(np.random.SeedSequence([_SPAN_BOUND_SEED, k, d]))
    frames = sample_uniform_frames(rng, _SPAN_BOUND_SAMPLES, k, d)
    worst = np.empty(_SPAN_BOUND_SAMPLES)
    for i in range(_SPAN_BOUND_SAMPLES):
        _, xi, bound = span_normal_form(Subspace(frames[i]))
        worst[i] = bound
    return float(np.quantile(worst, _SPAN_BOUND_QUANTILE) * _SPAN_BOUND_PAD)


def covering_family(
    k: int,
    d: int,
    eps: float,
    c1: float | None = None,
    cap: int = DEFAULT_FAMILY_CAP,
) -> SubspaceFamily:
    """Grid covering: all pivot subsets, slopes eps * n with |n| < (c1+1)/eps.

    c1 defaults to the cached empirical normal-form bound.  Count equals
    binom(d, k) * (2 * ceil((c1+1)/eps) - 1)^((d-k)k) exactly; members are
    not deduplicated, so a few coincide as subspaces.
    """
    if not 0 < eps <= 1:
        raise ParamOrder(f"need 0 < eps <= 1, got {eps}")
    if not 1 <= k < d:
        raise ParamOrder(f"need 1 <= k < d, got k={k}, d={d}")
    if c1 is None:
        c1 = estimate_span_bound(k, d)
    if c1 <= 0:
        raise ParamOrder(f"need c1 > 0, got {c1}")
    reach = int(np.ceil((c1 + 1.0) / eps))
    n_entries = (d - k) * k
    count = comb(d, k) * (2 * reach - 1) ** n_entries
    if count > cap:
        raise BudgetExceeded(f"covering would have {count} members > cap {cap}")
    members: list[Subspace] = []
    meta = []
    for pivots in combinations(range(d), k):
        rest = tuple(i for i in range(d) if i not in pivots)
        sigma = pivots + rest
        for n_tuple in product(range(-(reach - 1), reach), repeat=n_entries):
            slopes = eps * np.array(n_tuple, dtype=float).reshape(d - k, k)
            members.append(orthonormalize(_grid_member_frame(d, k, sigma, slopes)))
            meta.append((sigma, n_tuple))
    return SubspaceFamily(eps=eps, kind="covering", members=members, meta=meta, c1=c1)


def nearest_in_family(h: Subspace, fam: SubspaceFamily) -> tuple[int, float]:
    """Index and angle of the closest family member; ties keep the lowest index."""
    if len(fam.members) == 0:
        raise EmptyFamily("family has no members")
    if fam.members[0].frame.shape != h.frame.shape:
        raise DimensionMismatch("probe and family dimensions differ")
    angles = batch_canonical_angle(fam.frame_stack(), h.frame)
    idx = int(np.argmin(angles))
    return idx, float(angles[idx])


def covering_radius_estimate(
    fam: SubspaceFamily, probes: int, rng: np.random.Generator
) -> float:
    """Max over uniform probes of the nearest-member angle.

    Also folds the result into ``fam.probe_radius``, the running radius
    within which every probe tested so far has found a member.
    """
    if len(fam.members) == 0:
        raise EmptyFamily("family has no members")
    d, k = fam.members[0].frame.shape
    frames = sample_uniform_frames(rng, probes, k, d)
    stack = fam.frame_stack()
    worst = 0.0
    for i in range(probes):
        angles = batch_canonical_angle(stack, frames[i])
        worst = max(worst, float(np.min(angles)))
    fam.probe_radius = worst if fam.probe_radius is None else max(fam.probe_radius, worst)
    return worst


@dataclass
class MeasureEstimate:
    p_hat: float
    stderr: float
    trials: int
    hits: int
    singular: int = 0


def _shard_sizes(trials: int, shards: int) -> list[int]:
    base, rem = divmod(trials, shards)
    return [base + (1 if i < rem else 0) for i in range(shards)]


def ball_measure_estimate(
    h: Subspace, eps: float, trials: int, rng: np.random.Generator, shards: int = 1
) -> MeasureEstimate:
    """Fraction of uniform subspaces within angle eps of ``h``.

    With shards > 1 the trials are split over independent substreams
    spawned from ``rng`` and combined by summation; the result is a pure
    function of (generator state, shard count).
    """
    if trials < 1:
        raise ParamOrder("trials must be >= 1")
    k, d = h.dim_sub, h.dim_ambient
    streams = rng.spawn(shards) if shards > 1 else [rng]
    hits = 0
    for sub_rng, size in zip(streams, _shard_sizes(trials, len(streams))):
        if size == 0:
            continue
        frames = sample_uniform_frames(sub_rng, size, k, d)
        angles = batch_canonical_angle(frames, h.frame)
        hits += int(np.sum(angles <= eps))
    p = hits / trials
    return MeasureEstimate(p, float(np.sqrt(p * (1 - p) / trials)), trials, hits)


def chart_cube_measure_estimate(
    k: int, d: int, eps: float, trials: int, rng: np.random.Generator, shards: int = 1
) -> MeasureEstimate:
    """Fraction of uniform subspaces whose chart entries all lie in [0, eps].

    Chart-singular draws (a null event) count as misses and are reported
    in the ``singular`` field.
    """
    if trials < 1:
        raise ParamOrder("trials must be >= 1")
    streams = rng.spawn(shards) if shards > 1 else [rng]
    hits = 0
    singular = 0
    for sub_rng, size in zip(streams, _shard_sizes(trials, len(streams))):
        if size == 0:
            continue
        frames = sample_uniform_frames(sub_rng, size, k, d)
        a = frames[:, :k, :]
        b = frames[:, k:, :]
        dets = np.abs(np.linalg.det(a))
        ok = dets > RANK_TOL
        singular += int(np.sum(~ok))
        if np.any(ok):
            y = np.linalg.solve(a[ok].transpose(0, 2, 1), b[ok].transpose(0, 2, 1))
            flat = y.reshape(y.shape[0], -1)
            inside = np.all((flat >= 0.0) & (flat <= eps), axis=1)
            hits += int(np.sum(inside))
    p = hits / trials
    return MeasureEstimate(p, float(np.sqrt(p * (1 - p) / trials)), trials, hits, singular)


def export_family_csv(fam: SubspaceFamily, path) -> None:
    """One row per member: index, grid metadata, then the frame row-major."""
    d, k = fam.members[0].frame.shape if fam.members else (0, 0)
    header = ["index", "kind", "eps", "sigma", "n"] + [
        f"f{r}{c}" for r in range(d) for c in range(k)
    ]
    lines = [",".join(header)]
    for i, (member, (sigma, n_tuple)) in enumerate(zip(fam.members, fam.meta)):
        flat = [repr(float(v)) for v in member.frame.reshape(-1)]
        sigma_s = "|".join(str(s) for s in sigma)
        n_s = "|".join(str(v) for v in n_tuple)
        lines.append(",".join([str(i), fam.kind, repr(float(fam.eps)), sigma_s, n_s] + flat))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
