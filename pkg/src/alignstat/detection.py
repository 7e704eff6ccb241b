"""Data generators, test statistics, and the scaling-exponent toolkit.

Two hypothesis-testing problems share this module:

* the jet problem: observations (X, Y^S) in [0,1]^k x R^{(d-k)|S|},
  uniform under the null, partly interpolated by a class member under the
  alternative;
* the oriented problem: observations (Z, W) in [0,1]^d x G(k, d), reduced
  to the jet problem with alpha = 2, r0 = 1 through the graph chart.

The operational statistics are the greedy cell count (the constructive
lower-bound object: one admissible jet per even grid cell, certified by an
actual interpolant through the selected nodes) and, for k = 1, a dynamic
program maximizing the number of samples inside the discrepancy tube of a
quantized jet profile (the computable surrogate of the net upper bound).
Under the null both grow like n^rho with rho = k / (k + alpha (d-k) w).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

import numpy as np

from .errors import (
    BudgetExceeded,
    DegenerateFit,
    EpsTooLarge,
    NotInClass,
    ParamOrder,
    Unsupported,
)
from .grassmann import RANK_TOL, OrientedPoint, Subspace, sample_uniform_frames
from .holder import (
    GraphLift,
    HolderParams,
    JetSamples,
    bump_basis,
    box_bounds,
    build_interpolant,
    holder_membership_check,
    multi_index_set,
)

# ---------------------------------------------------------------------------
# Scaling exponents (exact rational arithmetic)
# ---------------------------------------------------------------------------


def exponent_rho(k: int, d: int, alpha, r0: int) -> tuple[Fraction, Fraction]:
    """(w, rho) with w = sum_{s<=r0} (1 - s/alpha) C(s+k-1, k-1) and
    rho = k / (k + alpha (d-k) w), both exact when alpha is rational."""
    if not (isinstance(k, int) and isinstance(d, int) and isinstance(r0, int)):
        raise ParamOrder("k, d, r0 must be integers")
    a = Fraction(alpha)
    if not (1 <= k < d):
        raise ParamOrder(f"need 1 <= k < d, got k={k}, d={d}")
    r = math.ceil(a) - 1
    if not (1 <= r0 <= r and r < a):
        raise ParamOrder(f"need 1 <= r0 <= r < alpha, got r0={r0}, r={r}, alpha={alpha}")
    w = sum((1 - Fraction(s, 1) / a) * math.comb(s + k - 1, k - 1) for s in range(r0 + 1))
    rho = Fraction(k) / (k + a * (d - k) * w)
    return w, rho


def exponent_rho_dir(k: int, d: int) -> Fraction:
    """rho for the oriented problem: k / (k + (d-k)(k+2))."""
    if not (1 <= k < d):
        raise ParamOrder(f"need 1 <= k < d, got k={k}, d={d}")
    return Fraction(k, k + (d - k) * (k + 2))


def statistic_eps(params: HolderParams, n: int) -> float:
    """The balance point eps(n) = n^(-alpha / (k + alpha (d-k) w))."""
    w, _ = exponent_rho(params.k, params.d, params.alpha, params.r0)
    expo = params.alpha / (params.k + params.alpha * (params.d - params.k) * float(w))
    return float(n) ** (-expo)


# ---------------------------------------------------------------------------
# Generators
# ---------------------------------------------------------------------------


def generate_null_jets(n: int, params: HolderParams, rng: np.random.Generator) -> JetSamples:
    """Uniform draws on [0,1]^k x [0,1]^{d-k} x [-beta, beta]^{(d-k)(|S|-1)}."""
    if n < 0:
        raise ParamOrder("n must be >= 0")
    n_idx = len(params.index_set())
    xs = rng.random((n, params.k))
    ys = np.empty((n, n_idx, params.dim_out))
    ys[:, 0, :] = rng.random((n, params.dim_out))
    if n_idx > 1:
        ys[:, 1:, :] = rng.uniform(-params.beta, params.beta, size=(n, n_idx - 1, params.dim_out))
    return JetSamples(params, xs, ys)


def generate_alt_jets(
    n: int,
    n1: int,
    f,
    params: HolderParams,
    rng: np.random.Generator,
    check: bool = True,
) -> JetSamples:
    """Null draws except for n1 points carrying the jets of ``f``."""
    if not 0 <= n1 <= n:
        raise ParamOrder(f"need 0 <= n1 <= n, got n1={n1}, n={n}")
    if check and n1 > 0:
        report = holder_membership_check(f, params)
        if not report.passed:
            raise NotInClass("planted function fails the class membership check")
    background = generate_null_jets(n - n1, params, rng)
    xs1 = rng.random((n1, params.k))
    ys1 = f.jet_grid(xs1, params.index_set())
    xs = np.concatenate([background.xs, xs1], axis=0)
    ys = np.concatenate([background.ys, ys1], axis=0)
    perm = rng.permutation(n)
    return JetSamples(params, xs[perm], ys[perm])


class OrientedSamples:
    """Batch of (location, orientation) observations."""

    def __init__(self, z: np.ndarray, frames: np.ndarray):
        z = np.asarray(z, dtype=float)
        frames = np.asarray(frames, dtype=float)
        if z.ndim != 2 or frames.ndim != 3 or z.shape[0] != frames.shape[0]:
            raise ParamOrder("z must be (n, d) and frames (n, d, k)")
        if z.shape[1] != frames.shape[1]:
            raise ParamOrder("location and frame ambient dimensions differ")
        self.z = z
        self.frames = frames

    @property
    def k(self) -> int:
        return self.frames.shape[2]

    @property
    def d(self) -> int:
        return self.frames.shape[1]

    def __len__(self) -> int:
        return self.z.shape[0]

    def __getitem__(self, i: int) -> OrientedPoint:
        return OrientedPoint(self.z[i], Subspace(self.frames[i]))

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]


def generate_null_oriented(n: int, k: int, d: int, rng: np.random.Generator) -> OrientedSamples:
    """Locations uniform on the cube, orientations uniform on G(k, d)."""
    if n < 0:
        raise ParamOrder("n must be >= 0")
    z = rng.random((n, d))
    frames = sample_uniform_frames(rng, n, k, d) if n else np.zeros((0, d, k))
    return OrientedSamples(z, frames)


def generate_alt_oriented(
    n: int, n1: int, f: GraphLift, rng: np.random.Generator
) -> OrientedSamples:
    """Null draws except for n1 points tangent to the lifted graph."""
    if not 0 <= n1 <= n:
        raise ParamOrder(f"need 0 <= n1 <= n, got n1={n1}, n={n}")
    background = generate_null_oriented(n - n1, f.k, f.d, rng)
    xs1 = rng.random((n1, f.k))
    z1 = f.point_grid(xs1) if n1 else np.zeros((0, f.d))
    frames1 = f.tangent_frames(xs1) if n1 else np.zeros((0, f.d, f.k))
    z = np.concatenate([background.z, z1], axis=0)
    frames = np.concatenate([background.frames, frames1], axis=0)
    perm = rng.permutation(n)
    return OrientedSamples(z[perm], frames[perm])


def oriented_to_jets(
    samples: OrientedSamples, params: HolderParams
) -> tuple[JetSamples, int]:
    """Reduce oriented observations to first-order jets via the graph chart.

    X is the first k coordinates of Z, the value rows the last d-k, and
    the slope rows come from the chart of W.  Chart-singular draws (a null
    event) are dropped; the count of drops is returned alongside.
    """
    if params.alpha != 2 or params.r0 != 1:
        raise ParamOrder("the oriented reduction produces (alpha=2, r0=1) jets")
    k, d = samples.k, samples.d
    if (params.k, params.d) != (k, d):
        raise ParamOrder("params dimensions do not match the samples")
    n = len(samples)
    a = samples.frames[:, :k, :]
    b = samples.frames[:, k:, :]
    if n == 0:
        ok = np.zeros(0, dtype=bool)
    elif k == 1:
        ok = np.abs(a[:, 0, 0]) > RANK_TOL
    else:
        ok = np.abs(np.linalg.det(a)) > RANK_TOL
    dropped = int(n - np.sum(ok))
    z = samples.z[ok]
    if k == 1:
        yt = (b[ok] / a[ok]).transpose(0, 2, 1)
    else:
        yt = np.linalg.solve(a[ok].transpose(0, 2, 1), b[ok].transpose(0, 2, 1))
    # yt[i] is the transposed chart: row j of yt[i] is the slope vector of axis j
    n_idx = len(params.index_set())
    ys = np.empty((z.shape[0], n_idx, params.dim_out))
    ys[:, 0, :] = z[:, k:]
    ys[:, 1:, :] = yt
    return JetSamples(params, z[:, :k], ys), dropped


# ---------------------------------------------------------------------------
# Greedy cell statistic
# ---------------------------------------------------------------------------


@dataclass
class CellSelection:
    """Output of the greedy statistic: one chosen sample per occupied cell."""

    eps: float
    eps_prime: float
    c2: float
    selected: dict[tuple[int, ...], int]
    count: int
    cells_total: int
    eps_clamped: bool = False
    interpolant: object | None = None


def greedy_cell_statistic(
    samples: JetSamples,
    params: HolderParams,
    n: int,
    c2: float | None = None,
    materialize: bool = False,
    clamp: bool = False,
) -> CellSelection:
    """Count even grid cells holding a sample whose jet fits the cell box.

    eps is set from ``n`` by the exponent balance, the cell width is
    eps' = (c2 eps)^(1/alpha), and within each even-indexed cell the
    lowest-index admissible sample wins.  With ``materialize`` the
    selected nodes are fed to build_interpolant, certifying the count as
    a lower bound for the maximal interpolation number.

    c2 defaults to the class-certifying construction constant; pass an
    explicit value (e.g. just above 1) to trade the same-beta certificate
    for practical cell counts.  When eps' would exceed 1/2, raises
    EpsTooLarge unless ``clamp`` is set, in which case the whole cube is
    one cell and the result is flagged.
    """
    if n < 1:
        raise ParamOrder("n must be >= 1 (it sets the cell scale)")
    if c2 is None:
        c2 = bump_basis(params).construction_c2(params.alpha, params.beta)
    eps = statistic_eps(params, n)
    eps_prime = (c2 * eps) ** (1.0 / params.alpha)
    clamped = False
    if eps_prime > 0.5:
        if not clamp:
            raise EpsTooLarge(
                f"cell width {eps_prime:.4g} > 1/2 at n={n}; pass clamp=True to "
                "fall back to a single cell"
            )
        eps_prime = 1.0
        clamped = True
    grid_max = int(np.floor(1.0 / eps_prime))
    per_axis = grid_max // 2 + 1
    cells_total = per_axis**params.k

    # Filter progressively: the value box has selectivity ~eps/2 per output
    # coordinate, so later rows only touch a small survivor set.
    bounds = box_bounds(params, eps)
    alive = np.arange(len(samples))
    for row, (lo, hi) in enumerate(bounds):
        vals = samples.ys[alive, row, :]
        keep = np.all((vals >= lo) & (vals <= hi), axis=1)
        alive = alive[keep]
        if alive.size == 0:
            break
    cells = np.floor(samples.xs[alive] / eps_prime).astype(np.int64)
    keep = np.all((cells % 2 == 0) & (cells >= 0) & (cells <= grid_max), axis=1)
    alive = alive[keep]
    cells = cells[keep]

    selected: dict[tuple[int, ...], int] = {}
    for pos, i in enumerate(alive):
        selected.setdefault(tuple(int(c) for c in cells[pos]), int(i))

    interpolant = None
    if materialize:
        if clamped:
            raise EpsTooLarge("cannot certify a clamped selection with an interpolant")
        nodes = [samples[i] for i in selected.values()]
        interpolant = build_interpolant(nodes, params, eps, c2=c2)
    return CellSelection(
        eps=eps,
        eps_prime=eps_prime,
        c2=c2,
        selected=selected,
        count=len(selected),
        cells_total=cells_total,
        eps_clamped=clamped,
        interpolant=interpolant,
    )


# ---------------------------------------------------------------------------
# Tube dynamic program (k = 1, alpha = 2, r0 = 1)
# ---------------------------------------------------------------------------


def _sliding_max(arr: np.ndarray, radius: int, axis: int) -> np.ndarray:
    """Window maximum with the given radius along one axis (doubling trick)."""
    if radius <= 0:
        return arr
    out = arr
    shift = 1
    remaining = radius
    # out[i] = max over |j - i| <= covered of arr[j]; grow covered to radius
    covered = 0
    while covered < radius:
        step = min(shift, remaining)
        up = np.roll(out, step, axis=axis)
        down = np.roll(out, -step, axis=axis)
        # roll wraps; mask the wrapped slots with -inf
        idx_front = [slice(None)] * out.ndim
        idx_front[axis] = slice(0, step)
        idx_back = [slice(None)] * out.ndim
        idx_back[axis] = slice(out.shape[axis] - step, out.shape[axis])
        up[tuple(idx_front)] = -np.inf
        down[tuple(idx_back)] = -np.inf
        out = np.maximum(out, np.maximum(up, down))
        covered += step
        shift = covered
        remaining = radius - covered
    return out


def tube_dp_statistic(
    samples: JetSamples,
    beta: float,
    eps: float,
    k: int = 1,
    alpha: float = 2.0,
    r0: int = 1,
    state_cap: int = 250_000,
) -> int:
    """Max number of samples inside the discrepancy tube of a quantized profile.

    Profiles are piecewise linear over x-cells of width sqrt(eps): per
    cell a value level (step eps on [0, 1]) and a slope level (step
    sqrt(eps) on [-beta, beta]).  A sample (x, y0, y1) is covered when
    |y0 - (v + u (x - cell_left))| <= eps and |y1 - u| <= sqrt(eps) in
    every output coordinate.  Adjacent cells must satisfy the smoothness
    increments |v' - v - u dx| <= beta dx^2 and |u' - u| <= beta dx,
    which in level units reduce to the integer rules |j' - j - i| <= beta
    and |i' - i| <= beta.  The maximum over admissible profiles is the
    longest path in the cell-by-cell state lattice.
    """
    if k != 1 or alpha != 2.0 or r0 != 1:
        raise Unsupported("the tube DP is implemented for k=1, alpha=2, r0=1 only")
    if samples.params.k != 1 or samples.params.r0 != 1:
        raise Unsupported("samples must carry k=1, r0=1 jets")
    if not 0 < eps:
        raise ParamOrder("eps must be positive")
    dim_out = samples.params.dim_out
    delta = math.sqrt(eps)
    n_cells = max(1, math.ceil(1.0 / delta))
    nv = int(math.floor(1.0 / eps)) + 1
    nu_half = int(math.floor(beta / delta))
    nu = 2 * nu_half + 1
    if (nv * nu) ** dim_out > state_cap:
        raise BudgetExceeded(
            f"state count {(nv * nu) ** dim_out} exceeds cap {state_cap}"
        )
    if len(samples) == 0:
        return 0
    step_radius = int(math.floor(beta))

    if dim_out == 1:
        return _tube_dp_scalar(
            samples, eps, delta, n_cells, nv, nu_half, step_radius
        )
    return _tube_dp_product(samples, eps, delta, n_cells, nv, nu_half, step_radius)


def _sample_cells(xs: np.ndarray, delta: float, n_cells: int) -> np.ndarray:
    cells = np.floor(xs[:, 0] / delta).astype(np.int64)
    return np.clip(cells, 0, n_cells - 1)


def _cover_ranges(x, y0, y1, cell, eps, delta, nv, nu_half):
    """Iterate (j, i) level pairs covering one scalar sample."""
    i_lo = math.ceil((y1 - delta) / delta)
    i_hi = math.floor((y1 + delta) / delta)
    dx = x - cell * delta
    for i in range(max(i_lo, -nu_half), min(i_hi, nu_half) + 1):
        center = y0 - i * delta * dx
        j_lo = math.ceil((center - eps) / eps)
        j_hi = math.floor((center + eps) / eps)
        for j in range(max(j_lo, 0), min(j_hi, nv - 1) + 1):
            yield j, i


def _tube_dp_scalar(samples, eps, delta, n_cells, nv, nu_half, step_radius) -> int:
    nu = 2 * nu_half + 1
    weights = np.zeros((n_cells, nv, nu))
    cells = _sample_cells(samples.xs, delta, n_cells)
    for idx in range(len(samples)):
        c = int(cells[idx])
        x = float(samples.xs[idx, 0])
        y0 = float(samples.ys[idx, 0, 0])
        y1 = float(samples.ys[idx, 1, 0])
        for j, i in _cover_ranges(x, y0, y1, c, eps, delta, nv, nu_half):
            weights[c, j, i + nu_half] += 1.0
    # Predecessor max: A[j', i] = max_{|j' - j - i| <= R} dp[j, i] is a
    # radius-R window of dp[:, i] centered at j' - i.  The center can fall
    # outside [0, nv) while the window still reaches inside, so window-max
    # over a -inf-padded j axis first, then gather at the shifted centers.
    pad = nu_half
    centers = np.arange(nv)[:, None] - (np.arange(nu)[None, :] - nu_half) + pad
    cols = np.broadcast_to(np.arange(nu)[None, :], centers.shape)
    dp = weights[0].copy()
    for c in range(1, n_cells):
        padded = np.full((nv + 2 * pad, nu), -np.inf)
        padded[pad : pad + nv, :] = dp
        window = _sliding_max(padded, step_radius, axis=0)
        best_j = window[centers, cols]
        best = _sliding_max(best_j, step_radius, axis=1)
        dp = weights[c] + best
    return int(round(float(np.max(dp))))


def _tube_dp_product(samples, eps, delta, n_cells, nv, nu_half, step_radius) -> int:
    """Generic product-state DP for d - k >= 2 (small state spaces only)."""
    nu = 2 * nu_half + 1
    dim_out = samples.params.dim_out
    states = list(product(range(nv), range(-nu_half, nu_half + 1)))
    n_states = len(states)
    cells = _sample_cells(samples.xs, delta, n_cells)
    weights = [dict() for _ in range(n_cells)]
    for idx in range(len(samples)):
        c = int(cells[idx])
        x = float(samples.xs[idx, 0])
        per_comp = []
        for comp in range(dim_out):
            y0 = float(samples.ys[idx, 0, comp])
            y1 = float(samples.ys[idx, 1, comp])
            per_comp.append(list(_cover_ranges(x, y0, y1, c, eps, delta, nv, nu_half)))
        for combo in product(*per_comp):
            weights[c][combo] = weights[c].get(combo, 0) + 1

    def compatible(a, b) -> bool:
        for (j, i), (jp, ip) in zip(a, b):
            if abs(jp - j - i) > step_radius or abs(ip - i) > step_radius:
                return False
        return True

    all_states = list(product(states, repeat=dim_out))
    if len(all_states) * n_cells > 5_000_000:  # pragma: no cover - guarded by cap
        raise BudgetExceeded("product state space too large")
    dp = {s: float(weights[0].get(s, 0)) for s in all_states}
    for c in range(1, n_cells):
        ndp = {}
        for sp in all_states:
            best = max(
                (v for s, v in dp.items() if compatible(s, sp)),
                default=float("-inf"),
            )
            ndp[sp] = best + weights[c].get(sp, 0)
        dp = ndp
    return int(max(dp.values()))


# ---------------------------------------------------------------------------
# Coupon-collector moments, binomial tail, slope fitting
# ---------------------------------------------------------------------------


def coupon_moments(l: int, kk: int) -> tuple[float, float]:
    """Exact mean and variance of the number of empty cells.

    S = empty cells among l after kk uniform throws:
    E S = l (1 - 1/l)^kk and
    Var S = l((1-1/l)^kk - (1-1/l)^(2 kk))
          + l(l-1)((1-2/l)^kk - (1-1/l)^(2 kk)).
    Evaluated in exact rational arithmetic, returned as floats.
    """
    if l < 1 or kk < 0:
        raise ParamOrder(f"need l >= 1 and kk >= 0, got l={l}, kk={kk}")
    q1 = Fraction(l - 1, l) ** kk
    q2 = Fraction(l - 2, l) ** kk if l >= 2 else Fraction(0) ** kk
    mean = l * q1
    var = l * (q1 - q1 * q1) + l * (l - 1) * (q2 - q1 * q1)
    return float(mean), float(var)


@dataclass
class TailCheck:
    exact_tail: float
    bound: float
    holds: bool


def binomial_tail_check(n: int, p: float, b: float, c: float) -> TailCheck:
    """Exact P(Bin(n, p) > b) against the exponential bound exp(-c b).

    Valid for 0 < p < 1/2 and b > 2 n p.  The tail is summed stably in
    log space.
    """
    if not 0 < p < 0.5:
        raise ParamOrder(f"need 0 < p < 1/2, got p={p}")
    if not b > 2 * n * p:
        raise ParamOrder(f"need b > 2 n p = {2 * n * p}, got b={b}")
    j0 = int(math.floor(b)) + 1
    bound = math.exp(-c * b)
    if j0 > n:
        return TailCheck(0.0, bound, True)
    log_p = math.log(p)
    log_q = math.log1p(-p)
    lg_n = math.lgamma(n + 1)
    logs = [
        lg_n - math.lgamma(j + 1) - math.lgamma(n - j + 1) + j * log_p + (n - j) * log_q
        for j in range(j0, n + 1)
    ]
    top = max(logs)
    tail = math.exp(top) * math.fsum(math.exp(v - top) for v in logs)
    return TailCheck(tail, bound, tail <= bound)


@dataclass
class FitResult:
    slope: float
    stderr: float
    intercept: float


def fit_scaling_exponent(points) -> FitResult:
    """OLS of log(statistic) on log(n) with the standard slope error.

    Needs at least three distinct n values and positive statistics (the
    log must exist; sweep means below 1 are fine).
    """
    pts = [(float(n), float(s)) for n, s in points]
    if len({n for n, _ in pts}) < 3:
        raise DegenerateFit("need at least 3 distinct n values")
    if any(s <= 0 for _, s in pts):
        raise DegenerateFit("statistics must be positive for a log-log fit")
    x = np.log([n for n, _ in pts])
    y = np.log([s for _, s in pts])
    sxx = float(np.sum((x - x.mean()) ** 2))
    if sxx == 0.0:
        raise DegenerateFit("no spread in n")
    slope = float(np.sum((x - x.mean()) * (y - y.mean())) / sxx)
    intercept = float(y.mean() - slope * x.mean())
    resid = y - (intercept + slope * x)
    dof = len(pts) - 2
    sigma2 = float(np.sum(resid**2) / dof) if dof > 0 else 0.0
    return FitResult(slope, float(np.sqrt(sigma2 / sxx)), intercept)


# ---------------------------------------------------------------------------
# Tube-measure estimation (graph of a class member)
# ---------------------------------------------------------------------------


def tube_hit_fraction(
    f, params: HolderParams, eps: float, trials: int, rng: np.random.Generator
) -> MeasureLikeEstimate:
    """Fraction of null draws within discrepancy eps of the graph of f.

    The tube condition splits per index weight: the row-s gap must not
    exceed eps^(1 - |s|/alpha).
    """
    samples = generate_null_jets(trials, params, rng)
    jets = f.jet_grid(samples.xs, params.index_set())
    radii = [
        eps ** ((params.alpha - sum(s)) / params.alpha) for s in params.index_set()
    ]
    inside = np.ones(trials, dtype=bool)
    for row, radius in enumerate(radii):
        gaps = np.max(np.abs(samples.ys[:, row, :] - jets[:, row, :]), axis=1)
        inside &= gaps <= radius
    hits = int(np.sum(inside))
    p = hits / trials
    return MeasureLikeEstimate(p, float(np.sqrt(p * (1 - p) / trials)), trials, hits)


@dataclass
class MeasureLikeEstimate:
    p_hat: float
    stderr: float
    trials: int
    hits: int
