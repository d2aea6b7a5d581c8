"""Continuous-time dynamics for all five chain families.

Every chain runs on the same event skeleton: a global exponential clock of
rate N-1, a uniform site in [1, N-1], and a uniform mark in [0, 1).  A mark
in [1-p, 1) resolves the local update in the "+" direction (ascending pair,
up-corner, particle to the right); otherwise "-".  Events that do not change
the state still consume their (time, site, mark) triple, which is what keeps
grand couplings aligned across chains.

Simulation happens in an internal array representation (heights for the
exclusion and corner-flip families, the permutation word, or the simplex
coordinate vector) and is converted back to the public state types at
observation points.
"""

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels
from ._kernels import REACHED_LIMIT
from ._streams import DOMAIN_SIMULATE, DOMAIN_STATIONARY, EventStream, derived_rng
from .errors import BiasedModel, OutOfRange, WrongModel
from .states import (
    ChainSpec,
    ExclusionConfig,
    LatticePath,
    Permutation,
    SimplexPoint,
    height_inverse,
    height_map,
)

_STATS = ("heights", "density", "phi", "w")


@dataclass(frozen=True)
class UpdateEvent:
    """One clock ring: a time, a 1-based site in [1, N-1], and a mark in [0, 1)."""

    time: float
    site: int
    mark: float

    def __post_init__(self):
        if not (self.time >= 0.0 and np.isfinite(self.time)):
            raise OutOfRange(f"event time must be finite and >= 0, got {self.time}")
        if self.site < 1:
            raise OutOfRange(f"site must be >= 1, got {self.site}")
        if not (0.0 <= self.mark < 1.0):
            raise OutOfRange(f"mark must lie in [0, 1), got {self.mark}")


@dataclass(frozen=True)
class ObserverHook:
    """Record ``statistic`` at each time in ``times`` during a simulation.

    Statistics: "heights" (full height profile, path and exclusion models),
    "density" (occupation vector, exclusion models), "phi" (first Fourier
    height mode, any model), "w" (exponential height sum, biased path and
    exclusion models).
    """

    times: tuple
    statistic: str

    def __post_init__(self):
        if self.statistic not in _STATS:
            raise OutOfRange(
                f"unknown statistic {self.statistic!r}; expected one of {_STATS}"
            )
        ts = tuple(float(t) for t in self.times)
        if any(t < 0 or not np.isfinite(t) for t in ts):
            raise OutOfRange("observation times must be finite and >= 0")
        if any(b < a for a, b in zip(ts, ts[1:])):
            raise OutOfRange("observation times must be sorted")
        object.__setattr__(self, "times", ts)


# -- internal array representation ------------------------------------------


def to_internal(spec: ChainSpec, state) -> np.ndarray:
    """Writable internal array for ``state`` under ``spec``.

    Heights for path/exclusion models, the word for permutations, the
    coordinate vector for the simplex walk.
    """
    kind = spec.state_kind
    if kind == "exclusion":
        if not isinstance(state, ExclusionConfig):
            raise WrongModel(f"{spec.model.code} state must be ExclusionConfig")
        _check_dims(spec, state.N, state.k)
        return height_map(state).zeta.copy()
    if kind == "path":
        if not isinstance(state, LatticePath):
            raise WrongModel(f"{spec.model.code} state must be LatticePath")
        _check_dims(spec, state.N, state.k)
        return state.zeta.copy()
    if kind == "permutation":
        if not isinstance(state, Permutation):
            raise WrongModel(f"{spec.model.code} state must be Permutation")
        _check_dims(spec, state.N, None)
        return state.sigma.copy()
    if not isinstance(state, SimplexPoint):
        raise WrongModel("simplex state must be SimplexPoint")
    _check_dims(spec, state.N, None)
    return state.x.copy()


def from_internal(spec: ChainSpec, arr: np.ndarray):
    """Public state object for an internal array (inverse of to_internal)."""
    kind = spec.state_kind
    if kind == "exclusion":
        return height_inverse(LatticePath(arr))
    if kind == "path":
        return LatticePath(arr)
    if kind == "permutation":
        return Permutation(arr)
    return SimplexPoint(arr)


def _check_dims(spec: ChainSpec, n: int, k) -> None:
    if n != spec.N:
        raise WrongModel(f"state has N={n} but spec has N={spec.N}")
    if k is not None and spec.k is not None and k != spec.k:
        raise WrongModel(f"state has k={k} but spec has k={spec.k}")


# -- single-event semantics (reference implementation) -----------------------


def _apply_one(spec: ChainSpec, arr: np.ndarray, site: int, mark: float) -> None:
    """Apply one event in place.  Mirrors the compiled kernels exactly."""
    kind = spec.state_kind
    i = site
    if kind in ("exclusion", "path"):
        lo = arr[i - 1]
        if lo == arr[i + 1]:
            arr[i] = lo + 1 if mark >= 1.0 - spec.p else lo - 1
    elif kind == "permutation":
        a, b = arr[i - 1], arr[i]
        if mark >= 1.0 - spec.p:
            if a > b:
                arr[i - 1], arr[i] = b, a
        else:
            if a < b:
                arr[i - 1], arr[i] = b, a
    else:
        m = arr.shape[0]
        left = arr[i - 2] if i >= 2 else 0.0
        right = arr[i] if i < m else float(spec.N)
        arr[i - 1] = mark * right + (1.0 - mark) * left


def local_update(spec: ChainSpec, state, event: UpdateEvent):
    """New state after applying a single update event to ``state``."""
    if not 1 <= event.site <= spec.N - 1:
        raise OutOfRange(
            f"site {event.site} outside [1, {spec.N - 1}] for N={spec.N}"
        )
    arr = to_internal(spec, state)
    _apply_one(spec, arr, event.site, event.mark)
    return from_internal(spec, arr)


# -- chain driver -------------------------------------------------------------


class ChainDriver:
    """Advances one internal state through an event stream.

    Keeps the absolute time of the last applied event; an event whose ring
    time exceeds the requested horizon stays unconsumed and fires at the same
    absolute time on the next call, so trajectories do not depend on where
    observation pauses fall.
    """

    def __init__(self, spec: ChainSpec, arr: np.ndarray, stream: EventStream):
        self.spec = spec
        self.arr = arr
        self.stream = stream
        self.t_now = 0.0
        self.events_used = 0
        self._inv_rate = 1.0 / (spec.N - 1)
        kind = spec.state_kind
        if kind in ("exclusion", "path"):
            self._kernel = _kernels.run_heights
            self._scalar = spec.p
        elif kind == "permutation":
            self._kernel = _kernels.run_perm
            self._scalar = spec.p
        else:
            # the simplex kernel takes the pinned right anchor where the
            # others take the bias
            self._kernel = _kernels.run_simplex
            self._scalar = float(spec.N)

    def advance(self, t_limit: float) -> None:
        s = self.stream
        while True:
            j0 = s.j
            j, self.t_now, status = self._kernel(
                self.arr,
                self._scalar,
                self.t_now,
                t_limit,
                self._inv_rate,
                s.dts,
                s.sites,
                s.marks,
                s.j,
            )
            self.events_used += j - j0
            s.j = j
            if status == REACHED_LIMIT:
                return
            s.refill()


# -- statistics ---------------------------------------------------------------


def _phi_weights(N: int) -> np.ndarray:
    return np.sin(np.arange(1, N) * (np.pi / N))


def evaluate_statistic(spec: ChainSpec, arr: np.ndarray, statistic: str):
    """Evaluate a named observer statistic on an internal state array."""
    kind = spec.state_kind
    N = spec.N
    if statistic == "heights":
        if kind == "permutation" or kind == "simplex":
            raise WrongModel(f"'heights' undefined for {spec.model.code}")
        return arr.astype(np.int64, copy=True)
    if statistic == "density":
        if kind != "exclusion":
            raise WrongModel(f"'density' undefined for {spec.model.code}")
        return ((arr[:-1] - arr[1:]) + 1) // 2
    if statistic == "phi":
        w = _phi_weights(N)
        if kind in ("exclusion", "path"):
            return float(w @ arr[1:-1])
        if kind == "simplex":
            return float(w @ (arr - np.arange(1, N)))
        k = N // 2
        h = np.cumsum(1 - 2 * (arr > N - k))
        return float(w @ h[:-1])
    # statistic == "w"
    if kind not in ("exclusion", "path"):
        raise WrongModel(f"'w' undefined for {spec.model.code}")
    if spec.is_symmetric:
        raise BiasedModel("'w' is a biased-model statistic; spec has p = 1/2")
    return float(np.sum(np.exp(0.5 * np.log(spec.lam) * arr[1:-1])))


# -- simulate -----------------------------------------------------------------


def simulate(
    spec: ChainSpec,
    init,
    t_end: float,
    seed: int,
    observers: Sequence[ObserverHook] = (),
    dump_path=None,
):
    """Run the chain from ``init`` to time ``t_end``.

    Returns ``(final_state, observations)`` where observations maps each
    hook's statistic name to ``(times, values)`` arrays.  The trajectory is a
    deterministic function of (spec, init, t_end, seed): the observer grid
    and chunked event generation cannot shift it.  With ``dump_path`` set,
    every applied event is written as a CSV row for later replay.
    """
    if t_end < 0 or not np.isfinite(t_end):
        raise OutOfRange(f"t_end must be finite and >= 0, got {t_end}")
    names = [ob.statistic for ob in observers]
    if len(set(names)) != len(names):
        raise OutOfRange("observer statistics must be distinct")

    arr = to_internal(spec, init)
    stream = EventStream(derived_rng(seed, DOMAIN_SIMULATE), spec.N - 1)

    # merged observation schedule: (time, hook index, slot index)
    schedule = sorted(
        (t, hi, si)
        for hi, ob in enumerate(observers)
        for si, t in enumerate(ob.times)
        if t <= t_end
    )
    out = {
        ob.statistic: (np.asarray(ob.times, dtype=np.float64), [None] * len(ob.times))
        for ob in observers
    }

    if dump_path is None:
        driver = ChainDriver(spec, arr, stream)
        for t, hi, si in schedule:
            driver.advance(t)
            ob = observers[hi]
            out[ob.statistic][1][si] = evaluate_statistic(spec, arr, ob.statistic)
        driver.advance(t_end)
    else:
        _simulate_dumping(spec, arr, stream, t_end, schedule, observers, out, dump_path)

    observations = {
        name: (times, np.asarray(vals)) for name, (times, vals) in out.items()
    }
    return from_internal(spec, arr), observations


def _simulate_dumping(spec, arr, stream, t_end, schedule, observers, out, dump_path):
    """Event-by-event reference loop; same stream protocol as the kernels."""
    inv_rate = 1.0 / (spec.N - 1)
    t_now = 0.0
    cursor = 0
    with open(dump_path, "w") as fh:
        fh.write("# mixlab-v1 events\n")
        fh.write(f"# model={spec.model.code} N={spec.N} k={spec.k} p={spec.p!r}\n")
        fh.write("time,site,mark\n")
        while True:
            if stream.j >= stream.dts.shape[0]:
                stream.refill()
            t_next = t_now + float(stream.dts[stream.j]) * inv_rate
            while cursor < len(schedule) and schedule[cursor][0] < t_next:
                t, hi, si = schedule[cursor]
                ob = observers[hi]
                out[ob.statistic][1][si] = evaluate_statistic(spec, arr, ob.statistic)
                cursor += 1
            if t_next > t_end:
                break
            site = int(stream.sites[stream.j]) + 1
            mark = float(stream.marks[stream.j])
            _apply_one(spec, arr, site, mark)
            fh.write(f"{t_next!r},{site},{mark!r}\n")
            t_now = t_next
            stream.j += 1
        while cursor < len(schedule):
            t, hi, si = schedule[cursor]
            ob = observers[hi]
            out[ob.statistic][1][si] = evaluate_statistic(spec, arr, ob.statistic)
            cursor += 1


def replay_dump(spec: ChainSpec, init, dump_path):
    """Re-apply a dumped event log to ``init`` and return the final state."""
    arr = to_internal(spec, init)
    with open(dump_path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#") or line.startswith("time,"):
                continue
            t_s, site_s, mark_s = line.split(",")
            _apply_one(spec, arr, int(site_s), float(mark_s))
    return from_internal(spec, arr)


# -- stationary sampling ------------------------------------------------------


def stationary_internal(spec: ChainSpec, rng: np.random.Generator) -> np.ndarray:
    """Internal array drawn from the stationary law (symmetric models only)."""
    if not spec.is_symmetric:
        raise BiasedModel(
            f"direct stationary sampling needs p = 1/2; {spec.model.code} has "
            f"p = {spec.p} (use cftp_sample)"
        )
    N = spec.N
    kind = spec.state_kind
    if kind in ("exclusion", "path"):
        occ = np.zeros(N, dtype=np.int64)
        occ[rng.choice(N, size=spec.k, replace=False)] = 1
        steps = 1 - 2 * occ
        z = np.empty(N + 1, dtype=np.int64)
        z[0] = 0
        np.cumsum(steps, out=z[1:])
        return z
    if kind == "permutation":
        return rng.permutation(N).astype(np.int64) + 1
    return np.sort(rng.uniform(0.0, float(N), size=N - 1))


def sample_stationary_direct(spec: ChainSpec, seed: int):
    """Exact stationary draw for a symmetric model, as a public state."""
    rng = derived_rng(seed, DOMAIN_STATIONARY)
    return from_internal(spec, stationary_internal(spec, rng))
