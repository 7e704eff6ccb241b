"""Smoothness classes, jets, and the piecewise bump interpolant.

A jet attaches to a location x in [0,1]^k the values of all partial
derivatives indexed by multi-indices of weight at most r0.  The class
H(alpha, beta) consists of maps [0,1]^k -> [0,1]^{d-k} whose derivatives
up to order r = max{m : m < alpha} are bounded by beta and whose order-r
increments satisfy |f^(s)(x) - f^(s)(y)| <= beta |x - y|_inf^(alpha - r).

The interpolant built here places one scaled bump per occupied grid cell;
cells are even-indexed so supports never overlap, and the bump basis has
exact Kronecker derivatives at the cell node, so the construction
reproduces each node's jet to rounding error while staying in the class
(for the construction constant c2 chosen from the bump derivative norms).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from math import ceil, comb, factorial

import numpy as np

from .bumps import monomial_plateau_derivs, plateau_sq_derivs
from .errors import (
    BoxViolation,
    CellCollision,
    DegenerateTangent,
    EpsTooLarge,
    NotInClass,
    OutOfDomain,
    ParamOrder,
    RankDeficient,
)
from .grassmann import Subspace, canonical_angle, orthonormalize

MultiIndex = tuple[int, ...]

# Relative slack used when asserting class membership of constructed maps.
MEMBERSHIP_TOL = 1e-6


def strict_floor(alpha: float) -> int:
    """Largest integer strictly below alpha (so 2.0 -> 1, 2.5 -> 2)."""
    return ceil(alpha) - 1


@lru_cache(maxsize=None)
def multi_index_set(k: int, r0: int) -> tuple[MultiIndex, ...]:
    """All k-tuples of nonnegative integers with weight <= r0, graded order.

    Sorted by weight, then lexicographically descending within a weight, so
    for k = 2, r0 = 1 the order is (0,0), (1,0), (0,1).
    """
    if k < 1 or r0 < 0:
        raise ParamOrder(f"need k >= 1 and r0 >= 0, got k={k}, r0={r0}")
    idx = [s for s in product(range(r0 + 1), repeat=k) if sum(s) <= r0]
    idx.sort(key=lambda s: (sum(s), tuple(-e for e in s)))
    return tuple(idx)


def multi_index_count(k: int, r0: int) -> int:
    """Closed-form cardinality sum_{s=0}^{r0} binom(s+k-1, k-1)."""
    return sum(comb(s + k - 1, k - 1) for s in range(r0 + 1))


def mi_binom(t: MultiIndex, tp: MultiIndex) -> int:
    out = 1
    for a, b in zip(t, tp):
        out *= comb(a, b)
    return out


def mi_leq(a: MultiIndex, b: MultiIndex) -> bool:
    return all(x <= y for x, y in zip(a, b))


@dataclass(frozen=True)
class HolderParams:
    """Parameters of the jet interpolation problem.

    d is the ambient dimension; maps go [0,1]^k -> [0,1]^{d-k}.  r is
    derived from alpha by the strict-floor convention r = max{m : m < alpha},
    so alpha = 2 gives r = 1.
    """

    k: int
    d: int
    alpha: float
    beta: float
    r0: int

    def __post_init__(self):
        if self.k < 1 or self.d <= self.k:
            raise ParamOrder(f"need 1 <= k < d, got k={self.k}, d={self.d}")
        if not self.alpha > 1:
            raise ParamOrder(f"need alpha > 1, got {self.alpha}")
        if not self.beta > 0:
            raise ParamOrder(f"need beta > 0, got {self.beta}")
        if not 1 <= self.r0 <= self.r:
            raise ParamOrder(
                f"need 1 <= r0 <= r = {self.r}, got r0={self.r0} (alpha={self.alpha})"
            )

    @property
    def r(self) -> int:
        return strict_floor(self.alpha)

    @property
    def dim_out(self) -> int:
        return self.d - self.k

    def index_set(self) -> tuple[MultiIndex, ...]:
        return multi_index_set(self.k, self.r0)


@dataclass(frozen=True, eq=False)
class JetPoint:
    """One observation: location x plus derivative data over the index set.

    ``y`` has shape (|S|, d-k), rows aligned with multi_index_set order;
    row 0 is the function value.
    """

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.array(self.x, dtype=float).reshape(-1)
        y = np.array(self.y, dtype=float)
        if y.ndim == 1:
            y = y.reshape(-1, 1)
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)


class JetSamples:
    """A batch of jet observations stored as dense arrays.

    Behaves as a sequence of JetPoint while keeping (n, k) locations and
    (n, |S|, d-k) jets contiguous for the vectorized statistics.
    """

    def __init__(self, params: HolderParams, xs: np.ndarray, ys: np.ndarray):
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        if xs.ndim != 2 or xs.shape[1] != params.k:
            raise ParamOrder(f"xs must have shape (n, {params.k})")
        n_idx = len(params.index_set())
        if ys.shape != (xs.shape[0], n_idx, params.dim_out):
            raise ParamOrder(f"ys must have shape (n, {n_idx}, {params.dim_out})")
        self.params = params
        self.xs = xs
        self.ys = ys

    def __len__(self) -> int:
        return self.xs.shape[0]

    def __getitem__(self, i: int) -> JetPoint:
        return JetPoint(self.xs[i], self.ys[i])

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    def take(self, idx) -> "JetSamples":
        return JetSamples(self.params, self.xs[idx], self.ys[idx])

    @classmethod
    def from_points(cls, params: HolderParams, points) -> "JetSamples":
        pts = list(points)
        if not pts:
            return cls(
                params,
                np.zeros((0, params.k)),
                np.zeros((0, len(params.index_set()), params.dim_out)),
            )
        xs = np.stack([p.x for p in pts])
        ys = np.stack([p.y for p in pts])
        return cls(params, xs, ys)


def discrepancy_phi(y1: np.ndarray, y2: np.ndarray, params: HolderParams) -> float:
    """Jet discrepancy: max over s of |y1^s - y2^s|_inf^(alpha/(alpha-|s|))."""
    y1 = np.asarray(y1, dtype=float)
    y2 = np.asarray(y2, dtype=float)
    if y1.ndim == 1:
        y1 = y1.reshape(-1, 1)
    if y2.ndim == 1:
        y2 = y2.reshape(-1, 1)
    best = 0.0
    for row, s in enumerate(params.index_set()):
        gap = float(np.max(np.abs(y1[row] - y2[row])))
        expo = params.alpha / (params.alpha - sum(s))
        best = max(best, gap**expo)
    return best


def phi_tube_radii(params: HolderParams, eps: float) -> np.ndarray:
    """Per-index-row thresholds: Phi <= eps iff each gap <= eps^(1-|s|/alpha)."""
    return np.array(
        [eps ** ((params.alpha - sum(s)) / params.alpha) for s in params.index_set()]
    )


# ---------------------------------------------------------------------------
# Bump basis
# ---------------------------------------------------------------------------


class BumpBasis:
    """The family psi_s(x) = (x^s / s!) * prod_i zeta(x_i) for s in S.

    Supported in [-1/2, 1/2]^k with exact Kronecker jet conditions at 0:
    the derivative of psi_s of multi-order t vanishes at 0 unless t == s,
    where it equals 1.  Derivative sup norms are estimated on a grid
    (grid_n points per axis) and padded by a 1.1 safety factor; those
    padded norms feed the construction constants c3 and c2.
    """

    SAFETY = 1.1

    def __init__(self, k: int, r0: int, r: int, grid_n: int = 101):
        self.k = k
        self.r0 = r0
        self.r = r
        self.grid_n = grid_n
        self.index_set = multi_index_set(k, r0)
        self.deriv_set = multi_index_set(k, r + 1)
        ts = np.linspace(-0.5, 0.5, grid_n)
        # sup of |d^q/dt^q (t^m/m! zeta)| per coordinate factor, padded
        factor_sup = np.empty((r0 + 1, r + 2))
        for m in range(r0 + 1):
            tab = monomial_plateau_derivs(ts, m, r + 1)
            factor_sup[m] = np.max(np.abs(tab), axis=1)
        self._factor_sup = factor_sup * self.SAFETY
        self.norms: dict[tuple[MultiIndex, MultiIndex], float] = {}
        for s in self.index_set:
            for t in self.deriv_set:
                self.norms[(s, t)] = float(
                    np.prod([self._factor_sup[s[i], t[i]] for i in range(k)])
                )
        self.c1 = max(self.norms.values())

    def psi_jet(self, s: MultiIndex, t: MultiIndex, xs: np.ndarray) -> np.ndarray:
        """Values of the t-derivative of psi_s at points xs (npts, k)."""
        xs = np.atleast_2d(np.asarray(xs, dtype=float))
        out = np.ones(xs.shape[0])
        for i in range(self.k):
            tab = monomial_plateau_derivs(xs[:, i], s[i], t[i])
            out = out * tab[t[i]]
        return out

    def construction_c3(self) -> float:
        """Bound constant: sup_t of the Leibniz norm sum, doubled.

        Derived from |g^(t)| <= Y0 sum_{t'<=t} C(t,t') |psi_0^(t')|
        * sum_s (eps')^|s| (Y^s / Y0) |psi_s^(t-t')| with the coefficient
        ratio bounded by 2 c2^{r/alpha}.
        """
        zero = self.index_set[0]
        best = 0.0
        for t in self.deriv_set:
            total = 0.0
            for tp in multi_index_set(self.k, sum(t)):
                if not mi_leq(tp, t):
                    continue
                rest = tuple(a - b for a, b in zip(t, tp))
                inner = sum(self.norms[(s, rest)] for s in self.index_set)
                total += mi_binom(t, tp) * self.norms[(zero, tp)] * inner
            best = max(best, total)
        return 2.0 * best

    def construction_c2(self, alpha: float, beta: float) -> float:
        """Smallest admissible scaling constant c2 > 1 with c3 c2^{r/a-1} <= beta."""
        r = self.r
        c3 = self.construction_c3()
        return max(1.0 + 1e-6, (c3 / beta) ** (alpha / (alpha - r)))


@lru_cache(maxsize=None)
def bump_basis_cached(k: int, r0: int, r: int, grid_n: int = 101) -> BumpBasis:
    return BumpBasis(k, r0, r, grid_n)


def bump_basis(params: HolderParams, grid_n: int = 101) -> BumpBasis:
    return bump_basis_cached(params.k, params.r0, params.r, grid_n)


def construction_c2(params: HolderParams) -> float:
    """The class-certifying cell-scaling constant for these parameters."""
    return bump_basis(params).construction_c2(params.alpha, params.beta)


def box_bounds(params: HolderParams, eps: float) -> list[tuple[float, float]]:
    """Admissible coordinate box per index row: value in [eps/2, eps],
    weight-|s| derivatives in [0, eps^(1-|s|/alpha)]."""
    out = []
    for s in params.index_set():
        if sum(s) == 0:
            out.append((eps / 2.0, eps))
        else:
            out.append((0.0, eps ** (1.0 - sum(s) / params.alpha)))
    return out


# ---------------------------------------------------------------------------
# Interpolant
# ---------------------------------------------------------------------------


class HolderInterpolant:
    """Disjoint-support bump interpolant through a set of node jets.

    Each node contributes h_m(x) = g_m((x - X_m) / eps'), where g_m is the
    bump expansion with coefficients (eps')^|s| Y^s; since the plateau is
    flat at 0, evaluate at the node reproduces its jet exactly.
    """

    def __init__(
        self,
        params: HolderParams,
        eps: float,
        c2: float,
        nodes: list[JetPoint],
        cells: list[MultiIndex],
        basis: BumpBasis,
    ):
        self.params = params
        self.eps = float(eps)
        self.c2 = float(c2)
        self.eps_prime = (self.c2 * self.eps) ** (1.0 / params.alpha)
        self.nodes = list(nodes)
        self.cells = list(cells)
        self.basis = basis
        k = params.k
        self._mis = params.index_set()
        self._pow = np.array([self.eps_prime ** sum(s) for s in self._mis])
        if self.nodes:
            self._xs = np.stack([p.x for p in self.nodes])
            raw = np.stack([p.y for p in self.nodes])  # (m, |S|, dim_out)
            self._coefs = raw * self._pow[None, :, None]
        else:
            self._xs = np.zeros((0, k))
            self._coefs = np.zeros((0, len(self._mis), params.dim_out))

    def jet_grid(self, xs: np.ndarray, t_list=None) -> np.ndarray:
        """Derivative values at many points: shape (npts, len(t_list), d-k).

        t_list defaults to the parameter index set; any multi-index order
        is accepted (the chain rule runs through the bump expansion).
        """
        xs = np.atleast_2d(np.asarray(xs, dtype=float))
        if t_list is None:
            t_list = self._mis
        k = self.params.k
        out = np.zeros((xs.shape[0], len(t_list), self.params.dim_out))
        if not self.nodes:
            return out
        max_ord = max(max(t) for t in t_list)
        pow_t = {t: self.eps_prime ** sum(t) for t in t_list}
        for m in range(self._xs.shape[0]):
            rel = (xs - self._xs[m]) / self.eps_prime
            mask = np.max(np.abs(rel), axis=1) <= 0.5
            if not mask.any():
                continue
            u = rel[mask]
            npts = u.shape[0]
            zsq = [plateau_sq_derivs(u[:, i], max_ord) for i in range(k)]
            upow = [self._monomial_powers(u[:, i]) for i in range(k)]
            for row, t in enumerate(t_list):
                acc = np.zeros((npts, self.params.dim_out))
                for tp in self._subindices(t):
                    plateau_part = np.ones(npts)
                    for i in range(k):
                        plateau_part = plateau_part * zsq[i][tp[i]]
                    rest = tuple(a - b for a, b in zip(t, tp))
                    poly = self._poly_deriv(m, rest, upow, npts)
                    acc += mi_binom(t, tp) * plateau_part[:, None] * poly
                out[mask, row, :] += acc / pow_t[t]
        return out

    def _monomial_powers(self, ui: np.ndarray) -> np.ndarray:
        """Table u^e / e! for e = 0..r0, shape (r0+1, npts)."""
        r0 = self.params.r0
        tab = np.empty((r0 + 1, ui.size))
        tab[0] = 1.0
        for e in range(1, r0 + 1):
            tab[e] = tab[e - 1] * ui / e
        return tab

    @staticmethod
    @lru_cache(maxsize=None)
    def _subindices_cached(t: MultiIndex) -> tuple[MultiIndex, ...]:
        return tuple(product(*(range(a + 1) for a in t)))

    def _subindices(self, t: MultiIndex):
        return self._subindices_cached(t)

    def _poly_deriv(self, m: int, q: MultiIndex, upow, npts: int) -> np.ndarray:
        """q-derivative of the coefficient polynomial sum_s c_s u^s / s!."""
        out = np.zeros((npts, self.params.dim_out))
        for row, s in enumerate(self._mis):
            if not mi_leq(q, s):
                continue
            mono = np.ones(npts)
            for i in range(self.params.k):
                mono = mono * upow[i][s[i] - q[i]]
            out += mono[:, None] * self._coefs[m, row][None, :]
        return out

    def jet_at(self, x: np.ndarray, t_list=None) -> np.ndarray:
        return self.jet_grid(np.asarray(x, dtype=float)[None, :], t_list)[0]

    def value_grid(self, xs: np.ndarray) -> np.ndarray:
        zero = tuple([0] * self.params.k)
        return self.jet_grid(xs, [zero])[:, 0, :]


def build_interpolant(
    nodes,
    params: HolderParams,
    eps: float,
    c2: float | None = None,
    basis: BumpBasis | None = None,
) -> HolderInterpolant:
    """Assemble the disjoint-support interpolant through the given nodes.

    Nodes must sit in pairwise-distinct, even-indexed cells of the
    eps'-grid, with jets inside the admissible box of their cell.  With no
    nodes this returns the zero map, which is trivially in the class.
    """
    if basis is None:
        basis = bump_basis(params)
    if c2 is None:
        c2 = basis.construction_c2(params.alpha, params.beta)
    eps_prime = (c2 * eps) ** (1.0 / params.alpha)
    if eps_prime > 0.5:
        raise EpsTooLarge(
            f"cell width {eps_prime:.4g} > 1/2; decrease eps (or increase beta)"
        )
    nodes = list(nodes)
    bounds = box_bounds(params, eps)
    cells: list[MultiIndex] = []
    seen: set[MultiIndex] = set()
    for p in nodes:
        if np.any(p.x < 0.0) or np.any(p.x > 1.0):
            raise OutOfDomain(f"node location {p.x} outside the unit cube")
        cell = tuple(int(c) for c in np.floor(p.x / eps_prime))
        if any(c % 2 != 0 for c in cell):
            raise CellCollision(f"node cell {cell} is not on the even grid")
        if cell in seen:
            raise CellCollision(f"two nodes share cell {cell}")
        seen.add(cell)
        cells.append(cell)
        for row, (lo, hi) in enumerate(bounds):
            if np.any(p.y[row] < lo) or np.any(p.y[row] > hi):
                raise BoxViolation(
                    f"jet row {row} = {p.y[row]} outside box [{lo:.4g}, {hi:.4g}]"
                )
    return HolderInterpolant(params, eps, c2, nodes, cells, basis)


# ---------------------------------------------------------------------------
# Plain jet-evaluable functions
# ---------------------------------------------------------------------------


@dataclass
class PolyJetFunction:
    """Polynomial map with analytic jets, for planted signals and tests.

    ``coeffs`` maps exponent multi-indices to coefficient vectors of length
    d - k; g(x) = sum_e coeffs[e] * x^e.
    """

    k: int
    dim_out: int
    coeffs: dict[MultiIndex, np.ndarray] = field(default_factory=dict)

    def jet_grid(self, xs: np.ndarray, t_list) -> np.ndarray:
        xs = np.atleast_2d(np.asarray(xs, dtype=float))
        out = np.zeros((xs.shape[0], len(t_list), self.dim_out))
        for row, t in enumerate(t_list):
            for e, c in self.coeffs.items():
                if not mi_leq(t, e):
                    continue
                scale = 1.0
                mono = np.ones(xs.shape[0])
                for i in range(self.k):
                    scale *= factorial(e[i]) / factorial(e[i] - t[i])
                    mono = mono * xs[:, i] ** (e[i] - t[i])
                out[:, row, :] += scale * mono[:, None] * np.asarray(c, dtype=float)[None, :]
        return out

    def jet_at(self, x: np.ndarray, t_list) -> np.ndarray:
        return self.jet_grid(np.asarray(x, dtype=float)[None, :], t_list)[0]


def constant_function(k: int, value: np.ndarray | float, dim_out: int | None = None) -> PolyJetFunction:
    value = np.atleast_1d(np.asarray(value, dtype=float))
    if dim_out is None:
        dim_out = value.shape[0]
    return PolyJetFunction(k, dim_out, {tuple([0] * k): np.broadcast_to(value, (dim_out,)).copy()})


def random_class_function(params: HolderParams, rng: np.random.Generator) -> PolyJetFunction:
    """Seeded smooth class member: centered quadratic with safe coefficients.

    Coefficient budgets keep values inside [0,1], first derivatives below
    0.8 beta and second derivatives below 0.8 beta, so membership holds
    with margin for any alpha in (1, 2].
    """
    k, dim_out, beta = params.k, params.dim_out, params.beta
    lin_cap = min(0.8 * beta, 0.5) / k
    quad_cap = min(0.8 * beta, 1.0) / k
    coeffs: dict[MultiIndex, np.ndarray] = {}
    zero = tuple([0] * k)
    const = np.full(dim_out, 0.5)
    for i in range(k):
        e1 = tuple(1 if j == i else 0 for j in range(k))
        e2 = tuple(2 if j == i else 0 for j in range(k))
        b = rng.uniform(-lin_cap, lin_cap, size=dim_out)
        c = rng.uniform(-quad_cap, quad_cap, size=dim_out)
        # expand b (x - 1/2) + c (x - 1/2)^2 / 2 into monomials
        coeffs[e1] = coeffs.get(e1, np.zeros(dim_out)) + b - c * 0.5
        coeffs[e2] = coeffs.get(e2, np.zeros(dim_out)) + c * 0.5
        const = const - b * 0.5 + c * 0.125
    coeffs[zero] = const
    return PolyJetFunction(k, dim_out, coeffs)


def evaluate_jet(f, x: np.ndarray, t_list) -> np.ndarray:
    """Jet of ``f`` at one point, rows following ``t_list``.

    Analytic for interpolants, polynomial maps and graph lifts; finite
    differences are only ever a test oracle, never this implementation.
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    if np.any(x < 0.0) or np.any(x > 1.0):
        raise OutOfDomain(f"evaluation point {x} outside the unit cube")
    return f.jet_grid(x[None, :], t_list)[0]


# ---------------------------------------------------------------------------
# Class membership
# ---------------------------------------------------------------------------


@dataclass
class MembershipReport:
    beta: float
    tol_rel: float
    norms: dict[MultiIndex, float]
    max_holder_ratio: float
    passed: bool


def holder_membership_check(
    f,
    params: HolderParams,
    grid_n: int | None = None,
    tol_rel: float = MEMBERSHIP_TOL,
) -> MembershipReport:
    """Grid check of derivative norms and the order-r increment bound.

    Evaluates all derivatives up to order r on a uniform grid (grid_n
    points per axis, default 101 for k = 1 and 21 for k >= 2), records the
    sup norms and the worst increment ratio over all grid pairs, and
    passes when everything is below beta * (1 + tol_rel).
    """
    if grid_n is None:
        grid_n = 101 if params.k == 1 else 21
    if grid_n < 2:
        raise ParamOrder("grid_n must be at least 2")
    axes = [np.linspace(0.0, 1.0, grid_n)] * params.k
    mesh = np.meshgrid(*axes, indexing="ij")
    xs = np.stack([m.reshape(-1) for m in mesh], axis=1)
    t_all = multi_index_set(params.k, params.r)
    jets = f.jet_grid(xs, t_all)
    tol = params.beta * (1.0 + tol_rel)
    norms = {}
    for row, t in enumerate(t_all):
        norms[t] = float(np.max(np.abs(jets[:, row, :]))) if len(xs) else 0.0
    dx = np.max(np.abs(xs[:, None, :] - xs[None, :, :]), axis=2)
    np.fill_diagonal(dx, np.inf)
    denom = dx ** (params.alpha - params.r)
    max_ratio = 0.0
    for row, t in enumerate(t_all):
        if sum(t) != params.r:
            continue
        vals = jets[:, row, :]
        gaps = np.max(np.abs(vals[:, None, :] - vals[None, :, :]), axis=2)
        max_ratio = max(max_ratio, float(np.max(gaps / denom)))
    passed = all(v <= tol for v in norms.values()) and max_ratio <= tol
    return MembershipReport(params.beta, tol_rel, norms, max_ratio, passed)


# ---------------------------------------------------------------------------
# Graph lifts into the oriented class
# ---------------------------------------------------------------------------


class GraphLift:
    """The map x -> (x, g(x)) with tangent-space evaluation.

    The tangent space at x is spanned by (e_i, d_i g(x)); the identity
    block is produced analytically, and the stacked frame always has full
    rank, so lifts never have degenerate tangents.
    """

    def __init__(self, g, params: HolderParams):
        self.g = g
        self.params = params
        self._weight1 = [t for t in params.index_set() if sum(t) == 1]

    @property
    def k(self) -> int:
        return self.params.k

    @property
    def d(self) -> int:
        return self.params.d

    def point_grid(self, xs: np.ndarray) -> np.ndarray:
        xs = np.atleast_2d(np.asarray(xs, dtype=float))
        zero = tuple([0] * self.params.k)
        vals = self.g.jet_grid(xs, [zero])[:, 0, :]
        return np.concatenate([xs, vals], axis=1)

    def raw_tangents(self, xs: np.ndarray) -> np.ndarray:
        """Un-normalized tangent frames (npts, d, k): columns (e_i, d_i g)."""
        xs = np.atleast_2d(np.asarray(xs, dtype=float))
        jac = self.g.jet_grid(xs, self._weight1)  # (npts, k, dim_out)
        npts = xs.shape[0]
        frames = np.zeros((npts, self.params.d, self.params.k))
        frames[:, : self.params.k, :] = np.eye(self.params.k)[None, :, :]
        for i in range(self.params.k):
            frames[:, self.params.k :, i] = jac[:, i, :]
        return frames

    def tangent_frames(self, xs: np.ndarray) -> np.ndarray:
        """Orthonormalized tangent frames, shape (npts, d, k)."""
        raw = self.raw_tangents(xs)
        q, _ = np.linalg.qr(raw)
        return q

    def angle_margin(self, xs: np.ndarray) -> float:
        """min over sampled x and axes s of ang(d_s f, span{d_t f : t != s}).

        Void (pi/2 by convention) when k = 1.
        """
        if self.params.k == 1:
            return float(np.pi / 2)
        raw = self.raw_tangents(xs)
        worst = np.pi / 2
        for row in range(raw.shape[0]):
            cols = raw[row]
            for s in range(self.params.k):
                u = orthonormalize(cols[:, s : s + 1])
                others = orthonormalize(np.delete(cols, s, axis=1))
                worst = min(worst, canonical_angle(u, others))
        return float(worst)


def graph_lift(g, params: HolderParams, check: bool = True, grid_n: int | None = None) -> GraphLift:
    """Lift a class member to the oriented problem; verifies membership.

    Requires alpha = 2 (the oriented class is of second order).  Raises
    NotInClass when the membership check fails.
    """
    if params.alpha != 2 or params.r0 < 1:
        raise ParamOrder("graph lifts are defined for alpha = 2 with r0 >= 1")
    if check:
        report = holder_membership_check(g, params, grid_n=grid_n)
        if not report.passed:
            raise NotInClass(
                f"membership failed: norms up to {max(report.norms.values()):.4g}, "
                f"ratio {report.max_holder_ratio:.4g} vs beta {params.beta:.4g}"
            )
    return GraphLift(g, params)


def tangent_space(f, x: np.ndarray) -> Subspace:
    """Tangent subspace of ``f`` at ``x`` as a point of G(k, d)."""
    x = np.asarray(x, dtype=float).reshape(-1)
    raw = f.raw_tangents(x[None, :])[0]
    try:
        return orthonormalize(raw)
    except RankDeficient as exc:
        raise DegenerateTangent(f"partials at {x} are numerically rank-deficient") from exc


# ---------------------------------------------------------------------------
# Interpolant serialization (text, bit-exact on the written decimals)
# ---------------------------------------------------------------------------


def save_interpolant(itp: HolderInterpolant, path) -> None:
    lines = ["alignstat-interpolant v1"]
    p = itp.params
    lines.append(
        f"k={p.k} d={p.d} alpha={float(p.alpha)!r} beta={float(p.beta)!r} r0={p.r0}"
    )
    lines.append(f"eps={float(itp.eps)!r} c2={float(itp.c2)!r}")
    for node, cell in zip(itp.nodes, itp.cells):
        cell_s = ",".join(str(c) for c in cell)
        x_s = ",".join(repr(float(v)) for v in node.x)
        y_s = ";".join(",".join(repr(float(v)) for v in row) for row in node.y)
        lines.append(f"node {cell_s} | {x_s} | {y_s}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_interpolant(path, basis: BumpBasis | None = None) -> HolderInterpolant:
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    if not lines or lines[0] != "alignstat-interpolant v1":
        raise ParamOrder(f"not an interpolant file: {path}")
    head = dict(part.split("=", 1) for part in lines[1].split())
    params = HolderParams(
        k=int(head["k"]),
        d=int(head["d"]),
        alpha=float(head["alpha"]),
        beta=float(head["beta"]),
        r0=int(head["r0"]),
    )
    meta = dict(part.split("=", 1) for part in lines[2].split())
    eps = float(meta["eps"])
    c2 = float(meta["c2"])
    nodes: list[JetPoint] = []
    cells: list[MultiIndex] = []
    dim_out = params.dim_out
    for ln in lines[3:]:
        body = ln[len("node ") :]
        cell_s, x_s, y_s = (part.strip() for part in body.split("|"))
        cells.append(tuple(int(c) for c in cell_s.split(",")))
        x = np.array([float(v) for v in x_s.split(",")])
        y = np.array([[float(v) for v in row.split(",")] for row in y_s.split(";")])
        nodes.append(JetPoint(x, y.reshape(-1, dim_out)))
    if basis is None:
        basis = bump_basis(params)
    return HolderInterpolant(params, eps, c2, nodes, cells, basis)
