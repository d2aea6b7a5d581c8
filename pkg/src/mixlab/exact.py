"""Brute-force ground truth on enumerable state spaces.

Everything here works on a dense indexing of the full state space: sparse
generator matrices, closed-form stationary laws with an independent
null-space cross-check, exact total-variation curves through uniformization,
and exact mixing times by bisection.  The enumeration cap keeps accidental
combinatorial explosions out; the intended desk scale is a few hundred to a
few tens of thousands of states.

Canonical state order is colexicographic on occupation patterns for the
exclusion and corner-flip families (index = rank of the occupation bitmask)
and lexicographic one-line notation for permutations, so indices are stable
across runs.
"""

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import spsolve
from scipy.stats import poisson

from .errors import (
    ModelUnsupported,
    NotNormalized,
    OutOfRange,
    ShapeMismatch,
    SolveFailure,
    TooLarge,
)
from .states import (
    ChainSpec,
    ExclusionConfig,
    LatticePath,
    Permutation,
    height_map,
)

DEFAULT_CAP = 300_000

_KINDS_ENUMERABLE = ("exclusion", "path", "permutation")


def _space_size(spec: ChainSpec) -> int:
    if spec.state_kind in ("exclusion", "path"):
        return math.comb(spec.N, spec.k)
    if spec.state_kind == "permutation":
        return math.factorial(spec.N)
    raise ModelUnsupported("the simplex walk has a continuum state space")


@dataclass(frozen=True)
class StateIndex:
    """Bidirectional map between canonical states and indices 0..|Omega|-1.

    ``table`` holds one canonical row per state: the occupation vector for
    exclusion and corner-flip specs, the one-line word for permutations.
    """

    spec: ChainSpec
    table: np.ndarray
    _lookup: dict = field(repr=False)

    @property
    def size(self) -> int:
        return self.table.shape[0]

    def state_at(self, i: int):
        if not 0 <= i < self.size:
            raise OutOfRange(f"index {i} outside 0..{self.size - 1}")
        kind = self.spec.state_kind
        if kind == "exclusion":
            return ExclusionConfig(self.table[i])
        if kind == "path":
            return height_map(ExclusionConfig(self.table[i]))
        return Permutation(self.table[i])

    def heights_at(self, i: int) -> np.ndarray:
        """Height profile of state i (exclusion and path specs)."""
        row = self.table[i].astype(np.int64)
        z = np.empty(row.size + 1, dtype=np.int64)
        z[0] = 0
        np.cumsum(1 - 2 * row, out=z[1:])
        return z

    def index_of(self, state) -> int:
        kind = self.spec.state_kind
        if kind == "exclusion":
            if not isinstance(state, ExclusionConfig):
                raise ShapeMismatch("expected an ExclusionConfig")
            key = state.xi.tobytes()
        elif kind == "path":
            if not isinstance(state, LatticePath):
                raise ShapeMismatch("expected a LatticePath")
            key = ((state.zeta[:-1] - state.zeta[1:] + 1) // 2).astype(np.uint8).tobytes()
        else:
            if not isinstance(state, Permutation):
                raise ShapeMismatch("expected a Permutation")
            key = state.sigma.tobytes()
        try:
            return self._lookup[key]
        except KeyError:
            raise OutOfRange("state does not live on the spec's state space") from None


def enumerate_states(spec: ChainSpec, cap: int = DEFAULT_CAP) -> StateIndex:
    """Complete enumeration of the state space in canonical order."""
    n = _space_size(spec)
    if n > cap:
        raise TooLarge(f"state space has {n} states, cap is {cap}")
    kind = spec.state_kind
    N = spec.N
    if kind in ("exclusion", "path"):
        # colex on bitmasks = sort position sets by largest element last
        combos = sorted(
            itertools.combinations(range(N), spec.k), key=lambda c: c[::-1]
        )
        table = np.zeros((n, N), dtype=np.uint8)
        for i, combo in enumerate(combos):
            table[i, list(combo)] = 1
    else:
        table = np.array(
            list(itertools.permutations(range(1, N + 1))), dtype=np.int64
        )
    lookup = {table[i].tobytes(): i for i in range(n)}
    table.setflags(write=False)
    return StateIndex(spec, table, lookup)


@dataclass(frozen=True)
class GeneratorMatrix:
    """Sparse rate matrix with zero row sums over a StateIndex."""

    L: sp.csr_matrix
    index: StateIndex

    @property
    def size(self) -> int:
        return self.L.shape[0]


def build_generator(spec: ChainSpec, cap: int = DEFAULT_CAP) -> GeneratorMatrix:
    """Assemble L(x, y) = rate of the move x -> y, summed over sites."""
    if spec.p == 1.0:
        raise OutOfRange("p = 1 yields a reducible chain; exact analysis needs p < 1")
    idx = enumerate_states(spec, cap)
    n = idx.size
    N = spec.N
    p, q = spec.p, spec.q
    rows, cols, vals = [], [], []
    kind = spec.state_kind

    if kind == "exclusion":
        for i in range(n):
            xi = idx.table[i]
            for s in range(N - 1):
                a, b = xi[s], xi[s + 1]
                if a == b:
                    continue
                target = xi.copy()
                target[s], target[s + 1] = b, a
                jdx = idx._lookup[target.tobytes()]
                rows.append(i)
                cols.append(jdx)
                # (1, 0): the particle hops right at rate p; (0, 1): left at q
                vals.append(p if a == 1 else q)
    elif kind == "path":
        for i in range(n):
            z = idx.heights_at(i)
            xi = idx.table[i]
            for s in range(1, N):
                if z[s - 1] != z[s + 1]:
                    continue
                target = xi.copy()
                target[s - 1], target[s] = xi[s], xi[s - 1]
                jdx = idx._lookup[target.tobytes()]
                rows.append(i)
                cols.append(jdx)
                # local minimum flips up at rate p, local maximum down at q
                vals.append(p if z[s] < z[s - 1] else q)
    else:
        for i in range(n):
            sig = idx.table[i]
            for s in range(N - 1):
                a, b = sig[s], sig[s + 1]
                target = sig.copy()
                target[s], target[s + 1] = b, a
                jdx = idx._lookup[target.tobytes()]
                rows.append(i)
                cols.append(jdx)
                # swapping an ascent is the "-" move, an inversion the "+"
                vals.append(q if a < b else p)

    L = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    L = L + sp.diags(-np.asarray(L.sum(axis=1)).ravel(), format="csr")
    ncomp, _ = connected_components(L, directed=True, connection="strong")
    if ncomp != 1:
        raise SolveFailure(f"generator graph has {ncomp} strong components")
    return GeneratorMatrix(L.tocsr(), idx)


def _closed_form_weights(spec: ChainSpec, idx: StateIndex) -> np.ndarray:
    """Stationary weights, normalized; computed in log space for safety."""
    n = idx.size
    if spec.is_symmetric:
        return np.full(n, 1.0 / n)
    if spec.state_kind in ("exclusion", "path"):
        site_weights = spec.N - np.arange(1, spec.N + 1, dtype=np.float64)
        area = idx.table.astype(np.float64) @ site_weights
        area -= spec.k * (spec.k - 1) / 2.0
    else:
        area = np.empty(n, dtype=np.float64)
        for start in range(0, n, 4096):
            block = idx.table[start : start + 4096]
            inv = block[:, :, None] > block[:, None, :]
            area[start : start + block.shape[0]] = np.sum(
                np.triu(inv, k=1), axis=(1, 2)
            )
    logw = -math.log(spec.lam) * area
    logw -= logw.max()
    w = np.exp(logw)
    return w / w.sum()


def stationary_exact(spec: ChainSpec, gm: GeneratorMatrix = None) -> np.ndarray:
    """Stationary law: closed-form weights, cross-checked by a null-space solve.

    The closed form (uniform, or exponential in the area/inversion statistic)
    is the returned value; an independent linear solve of pi L = 0 must agree
    to 1e-12 in max norm or SolveFailure is raised.
    """
    if gm is None:
        gm = build_generator(spec)
    idx = gm.index
    w = _closed_form_weights(spec, idx)
    n = idx.size
    if n <= 2000:
        A = gm.L.T.toarray()
        A[-1, :] = 1.0
        b = np.zeros(n)
        b[-1] = 1.0
        try:
            x = np.linalg.solve(A, b)
        except np.linalg.LinAlgError as e:
            raise SolveFailure(f"dense stationary solve failed: {e}") from None
    elif n <= 60_000:
        top = gm.L.T.tocsr()[:-1, :]
        ones = sp.csr_matrix(np.ones((1, n)))
        M = sp.vstack([top, ones]).tocsc()
        b = np.zeros(n)
        b[-1] = 1.0
        x = spsolve(M, b)
    else:
        # at this scale an independent solve is impractical; fall back to a
        # residual check of the closed form itself
        resid = np.max(np.abs(gm.L.T @ w))
        if resid > 1e-10:
            raise SolveFailure(f"closed-form weights violate pi L = 0: {resid}")
        return w
    if np.max(np.abs(x - w)) > 1e-12:
        raise SolveFailure(
            "null-space solve disagrees with closed-form stationary weights"
        )
    return w


def detailed_balance_residual(spec: ChainSpec, gm: GeneratorMatrix = None) -> float:
    """Max over ordered pairs of |pi(x) L(x,y) - pi(y) L(y,x)|."""
    if gm is None:
        gm = build_generator(spec)
    pi = stationary_exact(spec, gm)
    flow = gm.L.multiply(pi[:, None]).tocsr()
    imbalance = (flow - flow.T).tocoo()
    if imbalance.nnz == 0:
        return 0.0
    return float(np.max(np.abs(imbalance.data)))


def tv_distance(alpha, beta) -> float:
    """Half the L1 distance between two probability vectors."""
    a = np.asarray(alpha, dtype=np.float64)
    b = np.asarray(beta, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ShapeMismatch(f"shape mismatch: {a.shape} vs {b.shape}")
    for v, name in ((a, "alpha"), (b, "beta")):
        if abs(v.sum() - 1.0) > 1e-9 or v.min() < -1e-12:
            raise NotNormalized(f"{name} is not a probability vector")
    return min(0.5 * float(np.abs(a - b).sum()), 1.0)


# -- uniformization ------------------------------------------------------------


def _jump_kernel(gm: GeneratorMatrix):
    """Uniformized kernel K = I + L / Lambda and the clock rate Lambda."""
    lam_max = float(np.max(-gm.L.diagonal()))
    if lam_max <= 0.0:
        raise SolveFailure("generator has no transitions")
    K = sp.eye(gm.size, format="csr") + gm.L * (1.0 / lam_max)
    return K.T.tocsr(), lam_max


def transient_distribution(
    gm: GeneratorMatrix, init: int, t: float, tail: float = 1e-12
) -> np.ndarray:
    """Row ``init`` of e^{Lt} by Poisson-weighted powers of the jump kernel.

    The truncation point is the Poisson tail quantile, so the missing mass
    (hence the L1 error) is at most ``tail``.
    """
    rows = transient_rows(gm, np.array([init]), t, tail)
    return rows[0]


def transient_rows(
    gm: GeneratorMatrix, inits: np.ndarray, t: float, tail: float = 1e-12
) -> np.ndarray:
    if t < 0 or not np.isfinite(t):
        raise OutOfRange(f"t must be finite and >= 0, got {t}")
    n = gm.size
    m = len(inits)
    out0 = np.zeros((n, m))
    out0[np.asarray(inits), np.arange(m)] = 1.0
    if t == 0:
        return out0.T
    KT, lam_max = _jump_kernel(gm)
    mu = lam_max * t
    nmax = int(poisson.isf(tail, mu)) + 1
    w = poisson.pmf(np.arange(nmax + 1), mu)
    while 1.0 - w.sum() > tail:
        extra = poisson.pmf(np.arange(nmax + 1, nmax + 65), mu)
        w = np.concatenate([w, extra])
        nmax += 64
    W = out0
    acc = w[0] * W
    for step in range(1, nmax + 1):
        W = KT @ W
        acc += w[step] * W
    return np.clip(acc.T, 0.0, None)


@dataclass(frozen=True)
class DistanceCurve:
    """A d(t) curve: exact, or a statistical upper/lower estimate."""

    times: np.ndarray
    values: np.ndarray
    kind: str
    half_widths: np.ndarray = None

    def __post_init__(self):
        if self.kind not in ("exact", "upper_estimate", "lower_estimate"):
            raise OutOfRange(f"unknown curve kind {self.kind!r}")
        ts = np.asarray(self.times, dtype=np.float64)
        vs = np.asarray(self.values, dtype=np.float64)
        if ts.ndim != 1 or ts.shape != vs.shape:
            raise ShapeMismatch("times and values must be matching 1-d arrays")
        if np.any(np.diff(ts) < 0):
            raise OutOfRange("times must be sorted")
        if np.any(vs < -1e-12) or np.any(vs > 1 + 1e-9):
            raise OutOfRange("distance values must lie in [0, 1]")
        hw = self.half_widths
        if hw is not None:
            hw = np.asarray(hw, dtype=np.float64)
            if hw.shape != ts.shape or np.any(hw < 0):
                raise ShapeMismatch("half-widths must be nonnegative, same shape")
            hw.setflags(write=False)
        ts.setflags(write=False)
        vs.setflags(write=False)
        object.__setattr__(self, "times", ts)
        object.__setattr__(self, "values", vs)
        object.__setattr__(self, "half_widths", hw)


_ROW_BLOCK = 2048


def _worst_tv(gm: GeneratorMatrix, pi: np.ndarray, t: float) -> float:
    worst = 0.0
    for start in range(0, gm.size, _ROW_BLOCK):
        block = np.arange(start, min(start + _ROW_BLOCK, gm.size))
        P = transient_rows(gm, block, t)
        d = 0.5 * np.abs(P - pi).sum(axis=1).max()
        worst = max(worst, float(d))
    return min(worst, 1.0)


def distance_curve_exact(spec: ChainSpec, times, cap: int = DEFAULT_CAP) -> DistanceCurve:
    """Exact worst-case TV distance to stationarity at each grid time."""
    gm = build_generator(spec, cap)
    pi = stationary_exact(spec, gm)
    ts = np.asarray(times, dtype=np.float64)
    values = np.array([_worst_tv(gm, pi, t) for t in ts])
    return DistanceCurve(ts, values, "exact")


def heights_expectation(spec: ChainSpec, init, t: float) -> np.ndarray:
    """E[height profile at time t] from the exact transient law.

    ``init`` is a public exclusion or path state; the expectation is the
    pi-free sum over states of P_t(init, y) times the height profile of y.
    """
    if spec.state_kind not in ("exclusion", "path"):
        raise ModelUnsupported("height expectations need an exclusion or path spec")
    gm = build_generator(spec)
    idx = gm.index
    row = transient_distribution(gm, idx.index_of(init), t)
    H = np.stack([idx.heights_at(i) for i in range(idx.size)]).astype(np.float64)
    return row @ H


def mixing_time_exact(spec: ChainSpec, eps: float, cap: int = DEFAULT_CAP) -> float:
    """First time the exact worst-case TV distance drops to eps (bisection)."""
    if not 0.0 < eps < 1.0:
        raise OutOfRange(f"eps must lie in (0, 1), got {eps}")
    gm = build_generator(spec, cap)
    pi = stationary_exact(spec, gm)
    if _worst_tv(gm, pi, 0.0) <= eps:
        return 0.0
    hi = 1.0
    for _ in range(80):
        if _worst_tv(gm, pi, hi) <= eps:
            break
        hi *= 2.0
    else:
        raise SolveFailure("mixing time bracket did not close")
    lo = 0.0 if hi == 1.0 else hi / 2.0
    while hi - lo > 1e-6 * hi:
        mid = 0.5 * (lo + hi)
        if _worst_tv(gm, pi, mid) <= eps:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)
