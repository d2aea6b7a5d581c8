"""Monotone grand couplings, coupling times, and coupling-from-the-past.

All chains in a coupled family consume the same (time, site, mark) events;
each local update is order preserving, so initially ordered families stay
ordered.  The refined coupling desynchronizes the two chains wherever their
heights strictly differ (each then performs its own independent corner
flip), except at shared facing corners with gap two, where only the
synchronized mark keeps the pair ordered; marginals are unaffected because
that exception is decided by the pre-update state alone.

CFTP runs the (bottom, top) sandwich from a doubling sequence of lookback
depths.  Events on the fixed dyadic slabs [-t0 2^m, -t0 2^(m-1)) are
regenerated from per-slab streams, so the event field on the past timeline
is a fixed function of absolute time and the returned sample does not depend
on the lookback schedule.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from ._kernels import NEED_REFILL, NEED_REFILL_AUX, REACHED_LIMIT
from ._streams import (
    DOMAIN_AUX,
    DOMAIN_CFTP,
    DOMAIN_COUPLING,
    EventStream,
    MarkStream,
    derived_rng,
)
from .dynamics import UpdateEvent, from_internal, local_update, to_internal
from .errors import (
    CoalescenceTimeout,
    Incomparable,
    NotOrdered,
    OutOfRange,
    WrongModel,
)
from .states import (
    ChainSpec,
    Permutation,
    SimplexPoint,
    extremal_paths,
    height_inverse,
)

_EMPTY_MARKS = np.empty(0, dtype=np.float64)


@dataclass(frozen=True)
class CoupledEnsemble:
    """A family of chain states driven by one shared event stream."""

    spec: ChainSpec
    states: tuple

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        if not self.states:
            raise OutOfRange("ensemble needs at least one state")
        for s in self.states:
            to_internal(self.spec, s)  # validates type and dimensions

    @property
    def coalesced(self) -> bool:
        return all(s == self.states[0] for s in self.states[1:])


@dataclass(frozen=True)
class CouplingReport:
    """Outcome of one coupling run.

    ``tau`` is the coalescence time, or None when the run was censored at
    ``t_max`` (the simplex walk always censors: shared-event trajectories
    approach each other but never meet).
    """

    tau: float
    censored: bool
    events_used: int
    mode: str
    t_max: float


def coupled_step_graphical(ensemble: CoupledEnsemble, event: UpdateEvent) -> CoupledEnsemble:
    """Apply one event, same (site, mark), to every member."""
    states = tuple(local_update(ensemble.spec, s, event) for s in ensemble.states)
    return CoupledEnsemble(ensemble.spec, states)


def _as_heights_pair(spec, pair):
    a, b = pair
    return to_internal(spec, a), to_internal(spec, b)


def _refined_apply(spec, z1, z2, site, mark, aux_mark):
    """One refined-coupling event on internal height arrays, in place."""
    i = site
    use_shared = True
    if z2[i] > z1[i]:
        facing = (
            z2[i] - z1[i] == 2
            and z1[i - 1] == z1[i + 1] == z1[i] + 1
            and z2[i - 1] == z2[i + 1] == z2[i] - 1
        )
        if not facing:
            use_shared = False
    thr = 1.0 - spec.p
    lo = z1[i - 1]
    if lo == z1[i + 1]:
        z1[i] = lo + 1 if mark >= thr else lo - 1
    v = mark if use_shared else aux_mark
    lo = z2[i - 1]
    if lo == z2[i + 1]:
        z2[i] = lo + 1 if v >= thr else lo - 1


def coupled_step_refined(spec: ChainSpec, pair, event: UpdateEvent, aux_mark: float):
    """One event of the refined coupling on an ordered pair.

    Where the pair's heights agree at the event's coordinate the shared mark
    drives both chains; where they strictly differ the second chain consumes
    ``aux_mark`` instead (supplied by the caller from an independent uniform
    stream), except at a shared facing corner with gap two, which stays
    synchronized to preserve the order.
    """
    if spec.state_kind not in ("path", "exclusion"):
        raise WrongModel(
            f"refined coupling is for corner-flip/exclusion specs, got {spec.model.code}"
        )
    if not 1 <= event.site <= spec.N - 1:
        raise OutOfRange(f"site {event.site} outside [1, {spec.N - 1}]")
    if not 0.0 <= aux_mark < 1.0:
        raise OutOfRange(f"aux mark must lie in [0, 1), got {aux_mark}")
    z1, z2 = _as_heights_pair(spec, pair)
    if not np.all(z1 <= z2):
        raise NotOrdered("refined coupling needs an ordered pair h1 <= h2")
    _refined_apply(spec, z1, z2, event.site, event.mark, aux_mark)
    return from_internal(spec, z1), from_internal(spec, z2)


def default_t_max(spec: ChainSpec) -> float:
    """Censoring horizon an order of magnitude above the known mixing scales."""
    if spec.is_symmetric:
        return 20.0 * spec.N**2 * math.log(max(spec.N, 2))
    return 20.0 * spec.N / spec.rho


def _pair_heights_run(spec, z1, z2, seed, t_max, refined):
    es = EventStream(derived_rng(seed, DOMAIN_COUPLING), spec.N - 1)
    aux = MarkStream(derived_rng(seed, DOMAIN_AUX)) if refined else None
    aux_marks = aux.marks if aux is not None else _EMPTY_MARKS
    aux_j = aux.j if aux is not None else 0
    gap = int(np.abs(z2 - z1).sum())
    t_now = 0.0
    events = 0
    while True:
        j0 = es.j
        j, aux_j, t_now, gap, tau, status = _kernels.run_pair_heights(
            z1, z2, spec.p, 1 if refined else 0, 1, t_now, t_max,
            1.0 / (spec.N - 1), es.dts, es.sites, es.marks,
            aux_marks, aux_j, es.j, gap,
        )
        events += j - j0
        es.j = j
        if status == NEED_REFILL:
            es.refill()
        elif status == NEED_REFILL_AUX:
            aux.refill()
            aux_marks = aux.marks
            aux_j = 0
        elif status == REACHED_LIMIT:
            return None, events
        else:
            return tau, events


def _pair_perm_run(spec, s1, s2, seed, t_max):
    es = EventStream(derived_rng(seed, DOMAIN_COUPLING), spec.N - 1)
    ndiff = int(np.sum(s1 != s2))
    t_now = 0.0
    events = 0
    while True:
        j0 = es.j
        j, t_now, ndiff, tau, status = _kernels.run_pair_perm(
            s1, s2, spec.p, 1, t_now, t_max, 1.0 / (spec.N - 1),
            es.dts, es.sites, es.marks, es.j, ndiff,
        )
        events += j - j0
        es.j = j
        if status == NEED_REFILL:
            es.refill()
        elif status == REACHED_LIMIT:
            return None, events
        else:
            return tau, events


def _pair_simplex_run(spec, x1, x2, seed, t_max):
    # never coalesces; run out the horizon so the report reflects real work
    es = EventStream(derived_rng(seed, DOMAIN_COUPLING), spec.N - 1)
    X = np.stack([x1, x2])
    t_now = 0.0
    events = 0
    while True:
        j0 = es.j
        j, t_now, status = _kernels.run_ensemble_simplex(
            X, float(spec.N), t_now, t_max, 1.0 / (spec.N - 1),
            es.dts, es.sites, es.marks, es.j,
        )
        events += j - j0
        es.j = j
        if status == REACHED_LIMIT:
            return None, events
        es.refill()


def coupling_time(
    spec: ChainSpec,
    init1,
    init2,
    seed: int,
    t_max: float = None,
    mode: str = "graphical",
) -> CouplingReport:
    """First meeting time of two chains under the shared event stream.

    Graphical mode runs any pair (ordered or not); refined mode requires an
    ordered pair on a corner-flip or exclusion spec.  Returns a censored
    report when the horizon is reached first.
    """
    if mode not in ("graphical", "refined"):
        raise OutOfRange(f"unknown coupling mode {mode!r}")
    if t_max is None:
        t_max = default_t_max(spec)
    if t_max <= 0 or not np.isfinite(t_max):
        raise OutOfRange(f"t_max must be positive and finite, got {t_max}")
    a1 = to_internal(spec, init1)
    a2 = to_internal(spec, init2)
    kind = spec.state_kind

    if np.array_equal(a1, a2):
        return CouplingReport(0.0, False, 0, mode, t_max)

    if mode == "refined":
        if kind not in ("path", "exclusion"):
            raise WrongModel(
                f"refined coupling is for corner-flip/exclusion specs, got {spec.model.code}"
            )
        if np.all(a1 <= a2):
            pass
        elif np.all(a2 <= a1):
            a1, a2 = a2, a1
        else:
            raise Incomparable("refined coupling needs an ordered pair")
        tau, events = _pair_heights_run(spec, a1, a2, seed, t_max, refined=True)
    elif kind in ("path", "exclusion"):
        tau, events = _pair_heights_run(spec, a1, a2, seed, t_max, refined=False)
    elif kind == "permutation":
        tau, events = _pair_perm_run(spec, a1, a2, seed, t_max)
    else:
        tau, events = _pair_simplex_run(spec, a1, a2, seed, t_max)

    if tau is None:
        return CouplingReport(None, True, events, mode, t_max)
    return CouplingReport(float(tau), False, events, mode, t_max)


def extremal_pair(spec: ChainSpec):
    """The (minimal, maximal) states spanning the whole space."""
    kind = spec.state_kind
    if kind == "path":
        top, bottom = extremal_paths(spec.N, spec.k)
        return bottom, top
    if kind == "exclusion":
        top, bottom = extremal_paths(spec.N, spec.k)
        return height_inverse(bottom), height_inverse(top)
    if kind == "permutation":
        return Permutation.reversal(spec.N), Permutation.identity(spec.N)
    n = spec.N
    return SimplexPoint(np.zeros(n - 1)), SimplexPoint(np.full(n - 1, float(n)))


def coupling_time_batch(
    spec: ChainSpec,
    replicas: int,
    seed: int,
    t_max: float = None,
    mode: str = "graphical",
    pair=None,
) -> list:
    """Independent coupling runs; replica r is replayable in isolation."""
    if replicas < 1:
        raise OutOfRange(f"replicas must be >= 1, got {replicas}")
    if pair is None:
        pair = extremal_pair(spec)
    init1, init2 = pair
    reports = []
    for r in range(replicas):
        child = int(derived_rng(seed, DOMAIN_COUPLING, r).integers(1 << 63))
        reports.append(coupling_time(spec, init1, init2, child, t_max, mode))
    return reports


def reports_to_csv(reports, fh) -> None:
    """CSV rows ``replica,mode,tau,censored`` with the format header."""
    fh.write("# mixlab-v1 coupling\n")
    fh.write("replica,mode,tau,censored\n")
    for r, rep in enumerate(reports):
        tau = "" if rep.tau is None else repr(rep.tau)
        fh.write(f"{r},{rep.mode},{tau},{int(rep.censored)}\n")


# -- coupling from the past ----------------------------------------------------


def _extremal_internal(spec):
    lo, hi = extremal_pair(spec)
    return to_internal(spec, lo), to_internal(spec, hi)


def _run_slab(spec, a1, a2, m, seed, length, is_perm):
    """Drive the sandwich across dyadic slab m; events regenerate identically."""
    es = EventStream(derived_rng(seed, DOMAIN_CFTP, m), spec.N - 1)
    inv_rate = 1.0 / (spec.N - 1)
    t_now = 0.0
    if is_perm:
        ndiff = int(np.sum(a1 != a2))
        while True:
            j, t_now, ndiff, _, status = _kernels.run_pair_perm(
                a1, a2, spec.p, 0, t_now, length, inv_rate,
                es.dts, es.sites, es.marks, es.j, ndiff,
            )
            es.j = j
            if status == REACHED_LIMIT:
                return ndiff
            es.refill()
    gap = int(np.abs(a2 - a1).sum())
    while True:
        j, _, t_now, gap, _, status = _kernels.run_pair_heights(
            a1, a2, spec.p, 0, 0, t_now, length, inv_rate,
            es.dts, es.sites, es.marks, _EMPTY_MARKS, 0, es.j, gap,
        )
        es.j = j
        if status == REACHED_LIMIT:
            return gap
        es.refill()


def cftp_sample(spec: ChainSpec, seed: int, t0: float = 1.0, max_doublings: int = 40):
    """Exact stationary draw by monotone coupling from the past.

    Runs the (bottom, top) sandwich from lookback depth t0 2^j for
    j = 0, 1, ...; within a pass the timeline is covered by the fixed dyadic
    slabs, each with its own deterministic event stream.  The first pass
    whose sandwich has coalesced by time 0 yields the sample.
    """
    kind = spec.state_kind
    if kind == "simplex":
        raise WrongModel("CFTP needs a discrete model; the simplex walk never coalesces")
    if t0 <= 0 or not np.isfinite(t0):
        raise OutOfRange(f"t0 must be positive and finite, got {t0}")
    is_perm = kind == "permutation"
    for depth in range(max_doublings + 1):
        a1, a2 = _extremal_internal(spec)
        sep = 0
        for m in range(depth, -1, -1):
            length = t0 if m == 0 else t0 * 2.0 ** (m - 1)
            sep = _run_slab(spec, a1, a2, m, seed, length, is_perm)
        if sep == 0:
            return from_internal(spec, a1)
    raise CoalescenceTimeout(
        f"sandwich did not coalesce within lookback {t0 * 2.0**max_doublings}"
    )
