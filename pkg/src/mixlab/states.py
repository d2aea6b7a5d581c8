"""State spaces for the five chain families and the maps between them.

Four state types live here: permutations of ``1..N`` (interchange process),
particle occupation sequences with a conserved count k (exclusion process),
nearest-neighbor lattice paths pinned at ``zeta(0)=0``, ``zeta(N)=N-2k``
(corner-flip dynamics), and ordered point configurations on ``[0, N]``
(simplex random walk).  The height map is the bijection between exclusion
configurations and lattice paths; thresholding a permutation at every level
k produces the tower of exclusion projections from which the permutation can
be reconstructed.

All indices in the public API are 1-based: sites run over ``1..N``, update
locations over ``1..N-1``, path coordinates over ``0..N``.  Instances are
immutable value types; the wrapped numpy arrays are marked read-only.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    Incomparable,
    InconsistentLevels,
    OutOfRange,
    ShapeMismatch,
)

__all__ = [
    "Model",
    "ChainSpec",
    "Permutation",
    "ExclusionConfig",
    "LatticePath",
    "SimplexPoint",
    "inversion_count",
    "particle_area",
    "path_area",
    "height_map",
    "height_inverse",
    "project_to_exclusion",
    "reconstruct_permutation",
    "extremal_paths",
    "partial_le",
]


class Model(enum.Enum):
    """The five chain families (biased variants counted separately)."""

    INTERCHANGE = "ip"
    BIASED_INTERCHANGE = "bip"
    SSEP = "ssep"
    ASEP = "asep"
    CORNER_FLIP = "cf"
    BIASED_CORNER_FLIP = "acf"
    SIMPLEX_RW = "simplex"

    @property
    def code(self) -> str:
        return self.value

    @classmethod
    def from_code(cls, code: str) -> "Model":
        for m in cls:
            if m.value == code:
                return m
        raise OutOfRange(f"unknown model code {code!r}")


_SYMMETRIC = {Model.INTERCHANGE, Model.SSEP, Model.CORNER_FLIP, Model.SIMPLEX_RW}
_BIASED = {Model.BIASED_INTERCHANGE, Model.ASEP, Model.BIASED_CORNER_FLIP}
_NEEDS_K = {Model.SSEP, Model.ASEP, Model.CORNER_FLIP, Model.BIASED_CORNER_FLIP}
_EXCLUSION_KIND = {Model.SSEP, Model.ASEP}
_PATH_KIND = {Model.CORNER_FLIP, Model.BIASED_CORNER_FLIP}
_PERM_KIND = {Model.INTERCHANGE, Model.BIASED_INTERCHANGE}


@dataclass(frozen=True)
class ChainSpec:
    """Which chain, at what size, with what bias.

    ``p`` is the rate of the "+" (order-increasing) resolution of a site
    update; symmetric variants require ``p == 1/2`` exactly, biased variants
    ``p > 1/2``.  ``k`` is the conserved particle count and must be absent
    for the interchange and simplex models.
    """

    model: Model
    N: int
    k: int | None = None
    p: float = 0.5

    def __post_init__(self) -> None:
        if not isinstance(self.model, Model):
            object.__setattr__(self, "model", Model.from_code(str(self.model)))
        if self.N < 2:
            raise OutOfRange(f"N must be >= 2, got {self.N}")
        if not 0.5 <= self.p <= 1.0:
            raise OutOfRange(f"p must lie in [1/2, 1], got {self.p}")
        if self.model in _SYMMETRIC and self.p != 0.5:
            raise OutOfRange(f"{self.model.code} is symmetric, requires p = 1/2")
        if self.model in _BIASED and self.p <= 0.5:
            raise OutOfRange(f"{self.model.code} requires p > 1/2")
        if self.model in _NEEDS_K:
            if self.k is None:
                raise OutOfRange(f"{self.model.code} requires a particle count k")
            # k in {0, N} would make the chain a single frozen state
            if not 1 <= self.k <= self.N - 1:
                raise OutOfRange(f"k must lie in [1, N-1], got k={self.k}, N={self.N}")
        elif self.k is not None:
            raise OutOfRange(f"{self.model.code} does not take a particle count")

    @property
    def q(self) -> float:
        return 1.0 - self.p

    @property
    def lam(self) -> float:
        """Bias ratio p/q; 1 for symmetric models, inf for p = 1."""
        if self.p == 1.0:
            return math.inf
        return self.p / (1.0 - self.p)

    @property
    def rho(self) -> float:
        """Spectral shift (sqrt(p) - sqrt(q))^2 = 1 - 2 sqrt(pq)."""
        return 1.0 - 2.0 * math.sqrt(self.p * (1.0 - self.p))

    @property
    def n_sites(self) -> int:
        """Number of update locations."""
        return self.N - 1

    @property
    def is_symmetric(self) -> bool:
        return self.model in _SYMMETRIC

    @property
    def state_kind(self) -> str:
        if self.model in _EXCLUSION_KIND:
            return "exclusion"
        if self.model in _PATH_KIND:
            return "path"
        if self.model in _PERM_KIND:
            return "permutation"
        return "simplex"


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Permutation:
    """One-line notation: ``sigma[i]`` (1-based i) is the label at position i."""

    sigma: np.ndarray = field()

    def __post_init__(self) -> None:
        arr = np.asarray(self.sigma, dtype=np.int64).copy()
        if arr.ndim != 1 or arr.size < 1:
            raise ShapeMismatch("sigma must be a nonempty 1-d array")
        n = arr.size
        seen = np.zeros(n, dtype=bool)
        for v in arr:
            if not 1 <= v <= n or seen[v - 1]:
                raise OutOfRange(f"not a bijection of 1..{n}: {arr.tolist()}")
            seen[v - 1] = True
        object.__setattr__(self, "sigma", _freeze(arr))

    @property
    def N(self) -> int:
        return self.sigma.size

    def __call__(self, i: int) -> int:
        if not 1 <= i <= self.N:
            raise OutOfRange(f"position {i} outside 1..{self.N}")
        return int(self.sigma[i - 1])

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Permutation) and np.array_equal(self.sigma, other.sigma)

    def __hash__(self) -> int:
        return hash(self.sigma.tobytes())

    @classmethod
    def identity(cls, N: int) -> "Permutation":
        return cls(np.arange(1, N + 1))

    @classmethod
    def reversal(cls, N: int) -> "Permutation":
        return cls(np.arange(N, 0, -1))

    def to_string(self) -> str:
        return ",".join(str(int(v)) for v in self.sigma)

    @classmethod
    def from_string(cls, text: str) -> "Permutation":
        return cls(np.array([int(tok) for tok in text.split(",")], dtype=np.int64))


@dataclass(frozen=True)
class ExclusionConfig:
    """Occupation sequence: ``xi[i]`` (1-based i) is 1 when site i holds a particle."""

    xi: np.ndarray = field()

    def __post_init__(self) -> None:
        arr = np.asarray(self.xi, dtype=np.uint8).copy()
        if arr.ndim != 1 or arr.size < 2:
            raise ShapeMismatch("xi must be a 1-d array with N >= 2")
        if not np.all((arr == 0) | (arr == 1)):
            raise OutOfRange("xi entries must be 0 or 1")
        object.__setattr__(self, "xi", _freeze(arr))

    @property
    def N(self) -> int:
        return self.xi.size

    @property
    def k(self) -> int:
        return int(self.xi.sum())

    def __call__(self, i: int) -> int:
        if not 1 <= i <= self.N:
            raise OutOfRange(f"site {i} outside 1..{self.N}")
        return int(self.xi[i - 1])

    def __eq__(self, other: object) -> bool:
        return isinstance(other, ExclusionConfig) and np.array_equal(self.xi, other.xi)

    def __hash__(self) -> int:
        return hash(self.xi.tobytes())

    @classmethod
    def packed_right(cls, N: int, k: int) -> "ExclusionConfig":
        _check_nk(N, k)
        xi = np.zeros(N, dtype=np.uint8)
        xi[N - k :] = 1
        return cls(xi)

    @classmethod
    def packed_left(cls, N: int, k: int) -> "ExclusionConfig":
        _check_nk(N, k)
        xi = np.zeros(N, dtype=np.uint8)
        xi[:k] = 1
        return cls(xi)

    def to_string(self) -> str:
        return "".join("1" if v else "0" for v in self.xi)

    @classmethod
    def from_string(cls, text: str) -> "ExclusionConfig":
        if not text or any(c not in "01" for c in text):
            raise OutOfRange(f"not a 0/1 string: {text!r}")
        return cls(np.frombuffer(text.encode(), dtype=np.uint8) - ord("0"))


@dataclass(frozen=True)
class LatticePath:
    """Height profile ``zeta`` on ``0..N`` with unit steps and pinned endpoints."""

    zeta: np.ndarray = field()

    def __post_init__(self) -> None:
        arr = np.asarray(self.zeta, dtype=np.int64).copy()
        if arr.ndim != 1 or arr.size < 3:
            raise ShapeMismatch("zeta must be a 1-d array on 0..N with N >= 2")
        if arr[0] != 0:
            raise OutOfRange("zeta(0) must be 0")
        steps = np.diff(arr)
        if not np.all(np.abs(steps) == 1):
            raise OutOfRange("zeta must move by +-1 at every step")
        n = arr.size - 1
        k2 = n - arr[-1]
        if k2 % 2 != 0 or not 2 <= k2 <= 2 * (n - 1):
            # endpoint parity forces an integer particle count in [1, N-1]
            raise OutOfRange(f"zeta(N)={arr[-1]} incompatible with a particle count in [1, N-1]")
        object.__setattr__(self, "zeta", _freeze(arr))

    @property
    def N(self) -> int:
        return self.zeta.size - 1

    @property
    def k(self) -> int:
        return (self.N - int(self.zeta[-1])) // 2

    def __call__(self, i: int) -> int:
        if not 0 <= i <= self.N:
            raise OutOfRange(f"coordinate {i} outside 0..{self.N}")
        return int(self.zeta[i])

    def __eq__(self, other: object) -> bool:
        return isinstance(other, LatticePath) and np.array_equal(self.zeta, other.zeta)

    def __hash__(self) -> int:
        return hash(self.zeta.tobytes())

    def to_string(self) -> str:
        return ",".join(str(int(v)) for v in self.zeta)

    @classmethod
    def from_string(cls, text: str) -> "LatticePath":
        return cls(np.array([int(tok) for tok in text.split(",")], dtype=np.int64))


@dataclass(frozen=True)
class SimplexPoint:
    """Ordered coordinates ``0 <= x[1] <= ... <= x[N-1] <= N`` on the segment."""

    x: np.ndarray = field()

    def __post_init__(self) -> None:
        arr = np.asarray(self.x, dtype=np.float64).copy()
        if arr.ndim != 1 or arr.size < 1:
            raise ShapeMismatch("x must be a nonempty 1-d array")
        n = arr.size + 1
        if arr[0] < 0.0 or arr[-1] > n or np.any(np.diff(arr) < 0):
            raise OutOfRange(f"coordinates must be sorted within [0, {n}]")
        object.__setattr__(self, "x", _freeze(arr))

    @property
    def N(self) -> int:
        return self.x.size + 1

    def __call__(self, i: int) -> float:
        # virtual anchors x_0 = 0 and x_N = N included for convenience
        if i == 0:
            return 0.0
        if i == self.N:
            return float(self.N)
        if not 1 <= i <= self.N - 1:
            raise OutOfRange(f"coordinate {i} outside 0..{self.N}")
        return float(self.x[i - 1])

    def __eq__(self, other: object) -> bool:
        return isinstance(other, SimplexPoint) and np.array_equal(self.x, other.x)

    def __hash__(self) -> int:
        return hash(self.x.tobytes())

    def to_string(self) -> str:
        # 17 significant digits round-trips binary64 exactly
        return ",".join(format(float(v), ".17g") for v in self.x)

    @classmethod
    def from_string(cls, text: str) -> "SimplexPoint":
        return cls(np.array([float(tok) for tok in text.split(",")], dtype=np.float64))


def _check_nk(N: int, k: int) -> None:
    if N < 2:
        raise OutOfRange(f"N must be >= 2, got {N}")
    if not 1 <= k <= N - 1:
        raise OutOfRange(f"k must lie in [1, N-1], got k={k}, N={N}")


def inversion_count(sigma: Permutation) -> int:
    """Number of out-of-order pairs; also the adjacent-transposition distance to identity."""
    arr = sigma.sigma
    # O(N^2) broadcast is fine at the sizes this package enumerates
    return int(np.sum(np.triu(arr[:, None] > arr[None, :], k=1)))


def particle_area(xi: ExclusionConfig) -> int:
    """Minimal number of right-moves separating ``xi`` from the packed-right state."""
    sites = np.arange(1, xi.N + 1)
    k = xi.k
    return int(np.sum((xi.N - sites) * xi.xi) - k * (k - 1) // 2)


def path_area(zeta: LatticePath) -> int:
    """Half the area between ``zeta`` and the maximal path; equals particle_area of its inverse image."""
    top, _ = extremal_paths(zeta.N, zeta.k)
    diff = top.zeta[1:-1] - zeta.zeta[1:-1]
    total = int(diff.sum())
    # the enclosed area is even because both paths share endpoints and parity
    return total // 2


def height_map(xi: ExclusionConfig) -> LatticePath:
    """Prefix sums of the +-1 increments ``1 - 2 xi``; a bijection onto the path space."""
    steps = 1 - 2 * xi.xi.astype(np.int64)
    zeta = np.concatenate(([0], np.cumsum(steps)))
    return LatticePath(zeta)


def height_inverse(zeta: LatticePath) -> ExclusionConfig:
    """Recover occupations from a path: a down-step at i means site i is occupied."""
    arr = zeta.zeta
    xi = (1 + arr[:-1] - arr[1:]) // 2
    return ExclusionConfig(xi.astype(np.uint8))


def project_to_exclusion(sigma: Permutation, k: int) -> ExclusionConfig:
    """Threshold the permutation: site i holds a particle iff ``sigma(i) > N-k``."""
    if not 1 <= k <= sigma.N - 1:
        raise OutOfRange(f"k must lie in [1, N-1], got k={k}")
    return ExclusionConfig((sigma.sigma > sigma.N - k).astype(np.uint8))


def reconstruct_permutation(xis) -> Permutation:
    """Rebuild a permutation from its projection tower ``xis[k]``, k = 0..N.

    Level k must add exactly one particle on top of level k-1; the site gaining
    the particle at level k receives the label N-k+1.
    """
    levels = list(xis)
    if len(levels) < 2:
        raise InconsistentLevels("need levels k = 0..N")
    n = levels[0].N
    if len(levels) != n + 1:
        raise InconsistentLevels(f"expected {n + 1} levels, got {len(levels)}")
    sigma = np.zeros(n, dtype=np.int64)
    for k in range(1, n + 1):
        lo, hi = levels[k - 1], levels[k]
        if lo.N != n or hi.N != n or lo.k != k - 1 or hi.k != k:
            raise InconsistentLevels(f"level {k} has the wrong size or particle count")
        diff = hi.xi.astype(np.int8) - lo.xi.astype(np.int8)
        if np.any(diff < 0) or diff.sum() != 1:
            raise InconsistentLevels(f"level {k} does not extend level {k - 1} by one particle")
        site = int(np.argmax(diff)) + 1
        sigma[site - 1] = n - k + 1
    return Permutation(sigma)


def extremal_paths(N: int, k: int) -> tuple[LatticePath, LatticePath]:
    """The maximal and minimal paths spanning the state space.

    Returns ``(top, bottom)`` with ``top(i) = min(i, 2(N-k)-i)`` and
    ``bottom(i) = max(-i, i-2k)``; every path with these endpoints lies between
    them, and their pointwise gap is at most ``2 min(k, N-k) <= 2k``.
    """
    _check_nk(N, k)
    i = np.arange(N + 1)
    top = np.minimum(i, 2 * (N - k) - i)
    bottom = np.maximum(-i, i - 2 * k)
    return LatticePath(top), LatticePath(bottom)


def _perm_height_matrix(sigma: Permutation) -> np.ndarray:
    """Heights of all N-1 projections, shape (N-1, N+1); row k-1 is level k."""
    n = sigma.N
    out = np.empty((n - 1, n + 1), dtype=np.int64)
    for k in range(1, n):
        steps = 1 - 2 * (sigma.sigma > n - k).astype(np.int64)
        out[k - 1, 0] = 0
        out[k - 1, 1:] = np.cumsum(steps)
    return out


def partial_le(a, b) -> bool:
    """Coordinatewise comparison in the natural order of each state space.

    Paths compare by heights, exclusion configs through their height images,
    simplex points coordinatewise, and permutations by all N-1 projected
    height profiles at once (the product order of the projection tower).
    """
    if type(a) is not type(b):
        raise ShapeMismatch(f"cannot compare {type(a).__name__} with {type(b).__name__}")
    if isinstance(a, LatticePath):
        if a.zeta.size != b.zeta.size:
            raise ShapeMismatch("paths live on different segments")
        return bool(np.all(a.zeta <= b.zeta))
    if isinstance(a, ExclusionConfig):
        if a.N != b.N or a.k != b.k:
            raise ShapeMismatch("configs live on different spaces")
        return partial_le(height_map(a), height_map(b))
    if isinstance(a, SimplexPoint):
        if a.x.size != b.x.size:
            raise ShapeMismatch("points live on different simplices")
        return bool(np.all(a.x <= b.x))
    if isinstance(a, Permutation):
        if a.N != b.N:
            raise ShapeMismatch("permutations of different sizes")
        return bool(np.all(_perm_height_matrix(a) <= _perm_height_matrix(b)))
    raise ShapeMismatch(f"no order defined for {type(a).__name__}")


def order_or_raise(a, b) -> tuple:
    """Return (low, high) when comparable either way, else raise Incomparable."""
    if partial_le(a, b):
        return a, b
    if partial_le(b, a):
        return b, a
    raise Incomparable("states are not ordered in either direction")
