"""Dirichlet spectrum of the path graph and the estimates built on it.

The discrete Laplacian here is ``(Delta f)(i) = f(i+1) + f(i-1) - 2 f(i)``
on interior points 1..N-1 with pinned boundary values.  Its sine modes
diagonalize the height evolution of the corner-flip chain; the biased chain
reduces to the same operator through the exponential change of variables
``V(i) = lam^{-zeta(i)/2}`` at the cost of a zeroth-order term rho.

Closed-form tail and mixing bounds for the coupling arguments live here too;
they are known to be off by constant factors (a factor about 4 against the
sharp cutoff constants), which is why the test harness treats them as
envelopes rather than targets.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import OutOfRange, WrongModel
from .states import ChainSpec, LatticePath, Model

_K_MODELS = {Model.SSEP, Model.ASEP, Model.CORNER_FLIP, Model.BIASED_CORNER_FLIP}
_PERM_MODELS = {Model.INTERCHANGE, Model.BIASED_INTERCHANGE}


def gamma_1(N: int) -> float:
    """Spectral gap factor 1 - cos(pi/N), computed without cancellation."""
    if N < 2:
        raise OutOfRange(f"N must be >= 2, got {N}")
    s = math.sin(math.pi / (2 * N))
    return 2.0 * s * s


@dataclass(frozen=True)
class DirichletSpectrum:
    """Eigenpairs of -Delta with zero boundary on 0..N.

    ``gammas[j-1] = 1 - cos(j pi / N)``; column j-1 of ``modes`` is the
    eigenvector ``sin(i j pi / N)`` sampled at i = 1..N-1, satisfying
    ``Delta mode_j = -2 gamma_j mode_j``.
    """

    N: int
    gammas: np.ndarray
    modes: np.ndarray


def dirichlet_spectrum(N: int) -> DirichletSpectrum:
    """All N-1 eigenvalues and sine modes of the pinned segment."""
    if N < 2:
        raise OutOfRange(f"N must be >= 2, got {N}")
    j = np.arange(1, N)
    s = np.sin(j * (math.pi / (2 * N)))
    gammas = 2.0 * s * s
    # reduce the angle i*j*pi/N modulo 2*pi in exact integer arithmetic, so
    # the sine evaluation stays accurate for large i*j
    prod = np.outer(j, j) % (2 * N)
    modes = np.sin(prod * (math.pi / N))
    gammas.setflags(write=False)
    modes.setflags(write=False)
    return DirichletSpectrum(N, gammas, modes)


@dataclass(frozen=True)
class HeightField:
    """Real-valued profile on the coordinates 0..N (endpoints are the boundary)."""

    u: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.u, dtype=np.float64).copy()
        if arr.ndim != 1 or arr.size < 3:
            raise OutOfRange("u must be a 1-d profile on 0..N with N >= 2")
        if not np.all(np.isfinite(arr)):
            raise OutOfRange("u must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "u", arr)

    @property
    def N(self) -> int:
        return self.u.size - 1

    @classmethod
    def from_path(cls, zeta: LatticePath) -> "HeightField":
        return cls(zeta.zeta.astype(np.float64))


def heat_solve(u0: HeightField, t: float, c: float) -> HeightField:
    """Solve ``du/dt = c Delta u`` with the boundary of ``u0`` pinned.

    The harmonic (linear) profile through the boundary values is subtracted,
    the remainder expanded in sine modes, and mode j decayed by
    ``exp(-2 c gamma_j t)``.
    """
    if t < 0 or not np.isfinite(t):
        raise OutOfRange(f"t must be finite and >= 0, got {t}")
    if c < 0:
        raise OutOfRange(f"diffusivity must be >= 0, got {c}")
    u = u0.u
    if t == 0:
        return HeightField(u)
    N = u0.N
    grid = np.arange(N + 1, dtype=np.float64)
    harmonic = u[0] + (u[N] - u[0]) * grid / N
    g = u[1:N] - harmonic[1:N]
    sp = dirichlet_spectrum(N)
    coeffs = (2.0 / N) * (sp.modes.T @ g)
    out = harmonic
    out[1:N] += sp.modes @ (coeffs * np.exp(-2.0 * c * sp.gammas * t))
    return HeightField(out)


def cole_hopf(zeta: LatticePath, lam: float) -> np.ndarray:
    """Exponential height transform ``V(i) = lam^{zeta(i)/2}``, i = 1..N-1.

    The sum ``W = sum_i V(i)`` is strictly increasing for the partial order
    on paths, which is what makes it a workable distance-to-coalescence
    potential for ordered biased pairs.
    """
    if not lam > 1.0:
        raise OutOfRange(f"lambda must be > 1, got {lam}")
    z = zeta.zeta[1:-1].astype(np.float64)
    return np.exp(0.5 * math.log(lam) * z)


def generator_identity_residual(spec: ChainSpec, zeta: LatticePath) -> float:
    """Max-norm residual of the generator identity on height functions.

    Symmetric corner flip: the generator acts on coordinates as half the
    Dirichlet Laplacian, ``L zeta(i) = (1/2) Delta zeta(i)``.  Biased corner
    flip: on ``V(i) = lam^{-zeta(i)/2}`` (boundary values V(0) = 1 and
    V(N) = lam^{k - N/2} come out of the same formula) the generator acts as
    ``L V = sqrt(pq) Delta V - rho V``.  Both sides are evaluated exactly
    from the jump rates; the residual is zero up to float rounding.
    """
    if spec.model not in (Model.CORNER_FLIP, Model.BIASED_CORNER_FLIP):
        raise WrongModel(
            f"generator identity is for corner-flip specs, got {spec.model.code}"
        )
    if zeta.N != spec.N or (spec.k is not None and zeta.k != spec.k):
        raise WrongModel("path does not live on the spec's state space")
    z = zeta.zeta
    N = spec.N
    interior = np.arange(1, N)
    lo = z[interior - 1]
    corner = lo == z[interior + 1]
    if spec.is_symmetric:
        lhs = np.where(corner, lo - z[interior], 0).astype(np.float64)
        rhs = 0.5 * (z[interior + 1] + z[interior - 1] - 2 * z[interior])
        return float(np.max(np.abs(lhs - rhs)))
    lam = spec.lam
    half_log = -0.5 * math.log(lam)
    V = np.exp(half_log * z.astype(np.float64))
    p, q = spec.p, spec.q
    up = np.exp(half_log * (lo + 1).astype(np.float64))
    down = np.exp(half_log * (lo - 1).astype(np.float64))
    vi = V[interior]
    lhs = np.where(corner, p * (up - vi) + q * (down - vi), 0.0)
    rhs = math.sqrt(p * q) * (V[interior + 1] + V[interior - 1] - 2 * vi) - spec.rho * vi
    return float(np.max(np.abs(lhs - rhs)))


def contraction_envelope(N: int, c: float, rho0: float, t: float) -> float:
    """Squared-norm decay factor ``exp(-2 (2 c gamma_1 + rho0) t)``.

    With c = 1/2 and rho0 = 0 this is the symmetric envelope
    ``exp(-2 gamma_1 t)``; the biased height evolution adds its zeroth-order
    rate as rho0.
    """
    if t < 0 or not np.isfinite(t):
        raise OutOfRange(f"t must be finite and >= 0, got {t}")
    if c < 0 or rho0 < 0:
        raise OutOfRange("c and rho0 must be >= 0")
    return math.exp(-2.0 * (2.0 * c * gamma_1(N) + rho0) * t)


@dataclass(frozen=True)
class TailBound:
    """Closed-form coupling tail: clamped value, raw value, and its log."""

    bound: float
    raw: float
    log_raw: float


def coupling_tail_bound(spec: ChainSpec, t: float) -> TailBound:
    """Tail bound on P[coupling time > t] for ordered extremal starts.

    Symmetric k-models: ``k (N-1) exp(-gamma_1 t)``.  Biased k-models:
    ``k (N-1) lam^{N/2 - 1} exp(-rho t)``.  The lambda power is assembled in
    log space, so the raw value degrades to inf only when the final
    exponential itself overflows.
    """
    if spec.model not in _K_MODELS:
        raise WrongModel(
            f"tail bound is for corner-flip/exclusion specs, got {spec.model.code}"
        )
    if t < 0 or not np.isfinite(t):
        raise OutOfRange(f"t must be finite and >= 0, got {t}")
    k, N = spec.k, spec.N
    log_raw = math.log(k * (N - 1))
    if spec.is_symmetric:
        log_raw -= gamma_1(N) * t
    else:
        log_raw += (N / 2 - 1) * math.log(spec.lam) - spec.rho * t
    try:
        raw = math.exp(log_raw)
    except OverflowError:
        raw = math.inf
    return TailBound(bound=min(raw, 1.0), raw=raw, log_raw=log_raw)


def mixing_upper_bound(spec: ChainSpec, eps: float) -> float:
    """Coupling-argument upper bound on the eps-mixing time.

    k-models: ``(1/gamma_1) log(2 k (N-1) / eps)`` symmetric,
    ``(1/rho) [(N/2 - 1) log lam + log(2 k (N-1) / eps)]`` biased.  The
    interchange process gets the union bound over its N-1 exclusion
    projections, which replaces ``k (N-1)`` by ``(N-1)^3``.  These are
    honest bounds but loose: they overshoot the cutoff location by a
    constant factor (about 4 in the symmetric case).
    """
    if not 0.0 < eps < 1.0:
        raise OutOfRange(f"eps must lie in (0, 1), got {eps}")
    if spec.model in _K_MODELS:
        prefactor = spec.k * (spec.N - 1)
    elif spec.model in _PERM_MODELS:
        prefactor = (spec.N - 1) ** 3
    else:
        raise WrongModel(f"no coupling bound for {spec.model.code}")
    base = math.log(2.0 * prefactor / eps)
    if spec.is_symmetric:
        return base / gamma_1(spec.N)
    return ((spec.N / 2 - 1) * math.log(spec.lam) + base) / spec.rho
