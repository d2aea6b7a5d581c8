"""Experiment orchestration: Monte-Carlo d(t) estimators, density profiles,
cutoff scans, config-file execution, and plot-ready CSV/JSON emission.

The upper estimator runs the grand coupling on (bottom, top, stationary)
triples: since the sandwich makes tau(state, top) <= tau(bottom, top) for
every start, P[tau1 > t] + P[tau2 > t] dominates d(t) uniformly over initial
states.  The lower estimator bins a one-dimensional statistic (the slowest
sine mode applied to heights) of the worst-start law against a stationary
sample; total variation only shrinks under mappings and binning, so after
subtracting a plug-in bias allowance it is a valid lower estimate.

Everything is a pure function of (config, seed): replica r derives its own
streams, so worker count and batch order cannot change a result.
"""

import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from ._kernels import REACHED_LIMIT
from ._streams import (
    DOMAIN_COUPLING,
    DOMAIN_SIMULATE,
    DOMAIN_STATIONARY,
    EventStream,
    derived_rng,
)
from .coupling import (
    coupling_time_batch,
    cftp_sample,
    default_t_max,
    extremal_pair,
    reports_to_csv,
)
from .dynamics import (
    ChainDriver,
    evaluate_statistic,
    simulate,
    ObserverHook,
    stationary_internal,
    to_internal,
)
from .errors import (
    CoalescenceTimeout,
    ConfigError,
    MixlabError,
    ModelUnsupported,
    OutOfRange,
    ResourceError,
    ShapeMismatch,
    TooLarge,
)
from .exact import (
    DistanceCurve,
    distance_curve_exact,
    enumerate_states,
    mixing_time_exact,
    _space_size,
)
from .spectral import dirichlet_spectrum
from .states import ChainSpec, Model

_LOWER_BINS = 64


def get_workers() -> int:
    """Worker count from MIXLAB_WORKERS (default 1)."""
    raw = os.environ.get("MIXLAB_WORKERS", "1")
    try:
        w = int(raw)
    except ValueError:
        raise ConfigError(f"MIXLAB_WORKERS must be an integer, got {raw!r}") from None
    return max(1, w)


def _parallel_map(fn, items):
    """Ordered map over replicas; thread pool only when workers > 1.

    The kernels release the GIL, so threads give real parallelism; results
    come back in input order either way, keeping merges deterministic.
    """
    workers = get_workers()
    if workers == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything an estimator needs: chain, grid, replicas, seed."""

    spec: ChainSpec
    grid: np.ndarray
    replicas: int
    seed: int
    estimator: str = "both"

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=np.float64)
        if g.ndim != 1 or g.size < 1:
            raise ShapeMismatch("time grid must be a nonempty 1-d array")
        if np.any(np.diff(g) < 0) or g[0] < 0 or not np.all(np.isfinite(g)):
            raise OutOfRange("time grid must be sorted, finite, and nonnegative")
        g.setflags(write=False)
        object.__setattr__(self, "grid", g)
        if self.replicas < 1:
            raise OutOfRange(f"replicas must be >= 1, got {self.replicas}")
        if self.estimator not in ("upper", "lower", "both"):
            raise OutOfRange(f"unknown estimator mode {self.estimator!r}")


def _child_seed(seed: int, domain: int, r: int) -> int:
    return int(derived_rng(seed, domain, r).integers(1 << 63))


def _stationary_internal_any(spec: ChainSpec, seed: int, r: int) -> np.ndarray:
    """Exact stationary draw as an internal array: direct when symmetric,
    CFTP for the biased discrete models."""
    if spec.is_symmetric:
        return stationary_internal(spec, derived_rng(seed, DOMAIN_STATIONARY, r))
    state = cftp_sample(spec, _child_seed(seed, DOMAIN_STATIONARY, r))
    return to_internal(spec, state)


def _worst_start_internal(spec: ChainSpec) -> np.ndarray:
    """The minimal state: bottom path, packed-left, reversal, or the origin."""
    low, _ = extremal_pair(spec)
    return to_internal(spec, low)


def _wilson_halfwidth(successes: np.ndarray, n: int, z: float = 1.0) -> np.ndarray:
    phat = successes / n
    denom = 1.0 + z * z / n
    return (z * np.sqrt(phat * (1 - phat) / n + z * z / (4 * n * n))) / denom


# -- upper estimator ------------------------------------------------------------


def _triple_taus_heights(spec, seed, r, t_limit):
    """Exact (tau1, tau2) for the (bottom, top, stationary) height triple."""
    zp = _stationary_internal_any(spec, seed, r)
    low, high = extremal_pair(spec)
    zb = to_internal(spec, low)
    zt = to_internal(spec, high)
    es = EventStream(derived_rng(seed, DOMAIN_COUPLING, r), spec.N - 1)
    inv_rate = 1.0 / (spec.N - 1)
    gap_bt = int(np.sum(zt - zb))
    gap_pt = int(np.sum(zt - zp))
    tau2 = 0.0 if gap_pt == 0 else -1.0
    if gap_bt == 0:
        return 0.0, 0.0
    t_now = 0.0
    while True:
        j, t_now, gap_bt, gap_pt, tau1, tau2, status = _kernels.run_triple_heights(
            zb, zt, zp, spec.p, t_now, t_limit, inv_rate,
            es.dts, es.sites, es.marks, es.j, gap_bt, gap_pt, tau2,
        )
        es.j = j
        if status == REACHED_LIMIT:
            return math.inf, (tau2 if tau2 >= 0.0 else math.inf)
        if status != _kernels.NEED_REFILL:
            return tau1, (tau2 if tau2 >= 0.0 else tau1)
        es.refill()


def _triple_exceed_perm(spec, seed, r, grid):
    """Grid-point exceedance indicators for the permutation triple."""
    sp_arr = _stationary_internal_any(spec, seed, r)
    low, high = extremal_pair(spec)
    S = np.stack([to_internal(spec, low), to_internal(spec, high), sp_arr])
    es = EventStream(derived_rng(seed, DOMAIN_COUPLING, r), spec.N - 1)
    inv_rate = 1.0 / (spec.N - 1)
    t_now = 0.0
    exceed1 = np.zeros(grid.size, dtype=np.int64)
    exceed2 = np.zeros(grid.size, dtype=np.int64)
    for gi, t in enumerate(grid):
        while True:
            j, t_now, status = _kernels.run_ensemble_perm(
                S, spec.p, t_now, t, inv_rate,
                es.dts, es.sites, es.marks, es.j,
            )
            es.j = j
            if status == REACHED_LIMIT:
                break
            es.refill()
        if not np.array_equal(S[0], S[1]):
            exceed1[gi] = 1
        if not np.array_equal(S[2], S[1]):
            exceed2[gi] = 1
    return exceed1, exceed2


def estimate_distance_upper(config: ExperimentConfig) -> DistanceCurve:
    """Coupling-based upper estimate of d(t) on the config's grid.

    Value at t is the empirical P[tau1 > t] + P[tau2 > t] over replicas,
    where tau1 couples the extremal pair and tau2 couples a fresh stationary
    sample to the top chain.  Half-widths are the summed Wilson-score bands
    of the two survival proportions.
    """
    spec = config.spec
    if spec.state_kind == "simplex":
        raise ModelUnsupported("the simplex walk never coalesces; no upper estimator")
    grid = config.grid
    R = config.replicas
    if spec.state_kind in ("path", "exclusion"):
        t_limit = float(grid[-1]) if grid[-1] > 0 else 1.0

        def one(r):
            return _triple_taus_heights(spec, config.seed, r, t_limit)

        taus = _parallel_map(one, range(R))
        tau1 = np.array([a for a, _ in taus])
        tau2 = np.array([b for _, b in taus])
        exceed1 = (tau1[None, :] > grid[:, None]).sum(axis=1)
        exceed2 = (tau2[None, :] > grid[:, None]).sum(axis=1)
    else:

        def one(r):
            return _triple_exceed_perm(spec, config.seed, r, grid)

        pairs = _parallel_map(one, range(R))
        exceed1 = np.sum([a for a, _ in pairs], axis=0)
        exceed2 = np.sum([b for _, b in pairs], axis=0)

    values = (exceed1 + exceed2) / R
    hw = _wilson_halfwidth(exceed1, R) + _wilson_halfwidth(exceed2, R)
    return DistanceCurve(grid, np.minimum(values, 1.0), "upper_estimate", hw)


# -- lower estimator ------------------------------------------------------------


def _phi_trajectory(spec, seed, r, grid):
    arr = _worst_start_internal(spec)
    driver = ChainDriver(spec, arr, EventStream(derived_rng(seed, DOMAIN_SIMULATE, r), spec.N - 1))
    out = np.empty(grid.size)
    for gi, t in enumerate(grid):
        driver.advance(t)
        out[gi] = evaluate_statistic(spec, arr, "phi")
    return out


def estimate_distance_lower(config: ExperimentConfig) -> DistanceCurve:
    """Binned-statistic lower estimate of d(t) on the config's grid.

    Compares the law of Phi(X_t) from the worst start against Phi under the
    stationary law, using 64 equal-probability bins fitted to the stationary
    sample; the plug-in TV estimate has the bias allowance sqrt(bins/replicas)
    subtracted, and the same allowance is reported as the half-width.
    """
    spec = config.spec
    grid = config.grid
    R = config.replicas

    def one_pi(r):
        arr = _stationary_internal_any(spec, config.seed, r)
        return evaluate_statistic(spec, arr, "phi")

    phi_pi = np.array(_parallel_map(one_pi, range(R)))

    def one_traj(r):
        return _phi_trajectory(spec, config.seed, r, grid)

    phis = np.stack(_parallel_map(one_traj, range(R)))

    edges = np.quantile(phi_pi, np.arange(1, _LOWER_BINS) / _LOWER_BINS)
    q = np.bincount(np.searchsorted(edges, phi_pi), minlength=_LOWER_BINS) / R
    allowance = math.sqrt(_LOWER_BINS / R)
    values = np.empty(grid.size)
    for gi in range(grid.size):
        p = np.bincount(np.searchsorted(edges, phis[:, gi]), minlength=_LOWER_BINS) / R
        tv = 0.5 * np.abs(p - q).sum()
        values[gi] = max(0.0, tv - allowance)
    hw = np.full(grid.size, allowance)
    return DistanceCurve(grid, values, "lower_estimate", hw)


def density_profile(config: ExperimentConfig, t: float) -> np.ndarray:
    """Empirical site occupation probabilities at time t from packed-left."""
    spec = config.spec
    if spec.state_kind != "exclusion":
        raise ModelUnsupported("density profiles need an exclusion spec")
    if t < 0 or not np.isfinite(t):
        raise OutOfRange(f"t must be finite and >= 0, got {t}")

    def one(r):
        arr = _worst_start_internal(spec)
        driver = ChainDriver(
            spec, arr, EventStream(derived_rng(config.seed, DOMAIN_SIMULATE, r), spec.N - 1)
        )
        driver.advance(t)
        return evaluate_statistic(spec, arr, "density")

    rows = _parallel_map(one, range(config.replicas))
    return np.mean(rows, axis=0)


# -- cutoff scans ---------------------------------------------------------------


def theory_cutoff_value(model: Model, N: int, k, p: float) -> float:
    """Leading-order mixing-time prediction for the given family."""
    if model in (Model.SSEP, Model.CORNER_FLIP):
        return N * N * math.log(min(k, N - k)) / math.pi**2
    if model in (Model.ASEP, Model.BIASED_CORNER_FLIP):
        alpha = k / N
        return (math.sqrt(alpha) + math.sqrt(1 - alpha)) ** 2 * N / (2 * p - 1)
    if model == Model.BIASED_INTERCHANGE:
        return 2.0 * N / (2 * p - 1)
    # symmetric interchange and the simplex walk share the N^2 log N scale
    return N * N * math.log(N) / math.pi**2


def first_half_crossing(curve: DistanceCurve) -> float:
    """First grid time at which the curve value drops to 1/2 or below."""
    below = np.nonzero(curve.values <= 0.5)[0]
    if below.size == 0:
        return math.inf
    return float(curve.times[below[0]])


@dataclass(frozen=True)
class CutoffRecord:
    N: int
    k: int
    t_half_lower: float
    t_half_upper: float
    theory_value: float
    exact_ratio: float = None


@dataclass(frozen=True)
class CutoffScanResult:
    model: Model
    eps_pair: tuple
    records: tuple

    def __post_init__(self):
        for rec in self.records:
            if (
                math.isfinite(rec.t_half_lower)
                and math.isfinite(rec.t_half_upper)
                and rec.t_half_lower > rec.t_half_upper
            ):
                raise OutOfRange("lower half-crossing exceeds upper half-crossing")
        object.__setattr__(self, "records", tuple(self.records))


def cutoff_scan(
    model,
    Ns,
    eps_pair=(0.25, 0.75),
    seed: int = 0,
    p: float = 0.5,
    replicas: int = 256,
    grid_points: int = 24,
    exact_cap: int = 1500,
) -> CutoffScanResult:
    """Half-crossing brackets versus the predicted value across sizes.

    Uses k = N // 2 throughout.  For sizes whose state space has at most
    ``exact_cap`` states the exact T_mix(eps)/T_mix(1-eps) ratio is computed
    as well; the Monte-Carlo brackets use the upper estimator's and lower
    estimator's first half-crossings on a grid spanning the theory value.
    """
    if isinstance(model, str):
        model = Model.from_code(model)
    e1, e2 = eps_pair
    if not (0 < e1 < 1 and 0 < e2 < 1 and e1 < e2):
        raise OutOfRange(f"eps pair must satisfy 0 < e1 < e2 < 1, got {eps_pair}")
    records = []
    for N in Ns:
        k = N // 2 if model in (Model.SSEP, Model.ASEP, Model.CORNER_FLIP, Model.BIASED_CORNER_FLIP) else None
        spec = ChainSpec(model, N, k, p)
        theory = theory_cutoff_value(model, N, k if k is not None else N // 2, p)
        grid = np.linspace(0.05 * theory, 2.6 * theory, grid_points)
        config = ExperimentConfig(spec, grid, replicas, seed + N)
        lower = estimate_distance_lower(config)
        t_lo = first_half_crossing(lower)
        if spec.state_kind == "simplex":
            t_hi = math.inf
        else:
            upper = estimate_distance_upper(config)
            t_hi = first_half_crossing(upper)
        exact_ratio = None
        if spec.state_kind != "simplex" and _space_size(spec) <= exact_cap:
            exact_ratio = mixing_time_exact(spec, e1) / mixing_time_exact(spec, e2)
        records.append(
            CutoffRecord(N, k if k is not None else 0, t_lo, t_hi, theory, exact_ratio)
        )
    return CutoffScanResult(model, (e1, e2), tuple(records))


# -- experiment execution --------------------------------------------------------

_EXPERIMENTS = ("spectrum", "exact", "simulate", "couple", "dtv", "profile", "cutoff")

_KNOWN_KEYS = {
    "experiment", "model", "n", "k", "p", "seed", "replicas", "t_max", "grid",
    "out", "format", "estimator", "mode", "eps", "eps_pair", "t", "dump",
    "modes", "t0", "grid_points",
}

_K_MODELS = (Model.SSEP, Model.ASEP, Model.CORNER_FLIP, Model.BIASED_CORNER_FLIP)


def parse_config_file(path: str) -> dict:
    """Flat ``key = value`` document; keys mirror the CLI flags."""
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e}") from None
    cfg = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {stripped!r}")
        key, _, value = stripped.partition("=")
        key = key.strip().lower().replace("-", "_")
        if key == "n_list":
            key = "n"
        if key not in _KNOWN_KEYS:
            raise ConfigError(f"line {lineno}: unknown config key {key!r}")
        cfg[key] = value.strip()
    if "experiment" not in cfg:
        raise ConfigError("config is missing the 'experiment' key")
    return cfg


def _req(cfg, key):
    if key not in cfg or cfg[key] == "":
        raise ConfigError(f"missing required key {key!r}")
    return cfg[key]


def _as_int(cfg, key, default=None):
    if key not in cfg:
        if default is None:
            raise ConfigError(f"missing required key {key!r}")
        return default
    try:
        return int(cfg[key])
    except ValueError:
        raise ConfigError(f"key {key!r} must be an integer, got {cfg[key]!r}") from None


def _as_float(cfg, key, default=None):
    if key not in cfg:
        if default is None:
            raise ConfigError(f"missing required key {key!r}")
        return default
    try:
        return float(cfg[key])
    except ValueError:
        raise ConfigError(f"key {key!r} must be a number, got {cfg[key]!r}") from None


def _as_bool(cfg, key, default=False):
    if key not in cfg:
        return default
    raw = cfg[key].lower()
    if raw in ("1", "true", "yes", "on"):
        return True
    if raw in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"key {key!r} must be a boolean, got {cfg[key]!r}")


def parse_grid(text: str) -> np.ndarray:
    """Either ``start:stop:count`` (inclusive linspace) or comma floats."""
    try:
        if ":" in text:
            parts = text.split(":")
            if len(parts) != 3:
                raise ValueError("expected start:stop:count")
            a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
            if n < 1 or b < a:
                raise ValueError("need count >= 1 and stop >= start")
            return np.linspace(a, b, n)
        return np.array([float(tok) for tok in text.split(",")], dtype=np.float64)
    except ValueError as e:
        raise ConfigError(f"bad grid {text!r}: {e}") from None


def _spec_from_cfg(cfg) -> ChainSpec:
    model = Model.from_code(_req(cfg, "model"))
    N = _as_int(cfg, "n")
    k = _as_int(cfg, "k", 0) or None
    if model in _K_MODELS and k is None:
        raise ConfigError(f"model {model.code!r} requires the key 'k'")
    p = _as_float(cfg, "p", 0.5)
    try:
        return ChainSpec(model, N, k, p)
    except MixlabError as e:
        raise ConfigError(f"invalid chain spec: {e}") from None


def _default_grid(spec: ChainSpec, points: int = 24) -> np.ndarray:
    k = spec.k if spec.k is not None else spec.N // 2
    theory = theory_cutoff_value(spec.model, spec.N, k, spec.p)
    hi = max(theory * 2.6, 1.0)
    return np.linspace(0.0, hi, points)


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    v = float(x)
    if math.isinf(v):
        return "inf"
    return repr(v)


def _run_spectrum(cfg):
    N = _as_int(cfg, "n")
    sp = dirichlet_spectrum(N)
    lines = ["# mixlab-v1 spectrum", "j,gamma_j"]
    lines += [f"{j + 1},{_fmt(sp.gammas[j])}" for j in range(N - 1)]
    csv = "\n".join(lines) + "\n"
    extra = {}
    if _as_bool(cfg, "modes"):
        mode_lines = ["# mixlab-v1 spectrum-modes"]
        mode_lines += [",".join(_fmt(v) for v in row) for row in sp.modes]
        extra["spectrum_modes.csv"] = "\n".join(mode_lines) + "\n"
    summary = {"N": N, "gamma_1": float(sp.gammas[0]), "gamma_max": float(sp.gammas[-1])}
    return csv, summary, extra


def _run_exact(cfg):
    spec = _spec_from_cfg(cfg)
    eps = _as_float(cfg, "eps", 0.25)
    try:
        tmix = mixing_time_exact(spec, eps)
        grid = parse_grid(cfg["grid"]) if "grid" in cfg else np.linspace(0.0, 2.0 * tmix, 21)
        curve = distance_curve_exact(spec, grid)
        n_states = enumerate_states(spec).size
    except TooLarge as e:
        raise ResourceError(str(e)) from None
    lines = ["# mixlab-v1 exact", "t,d_exact"]
    lines += [f"{_fmt(t)},{_fmt(v)}" for t, v in zip(curve.times, curve.values)]
    summary = {"tmix": float(tmix), "eps": eps, "states": int(n_states)}
    return "\n".join(lines) + "\n", summary, {}


def _run_simulate(cfg):
    spec = _spec_from_cfg(cfg)
    t_end = _as_float(cfg, "t_max")
    seed = _as_int(cfg, "seed", 0)
    grid = parse_grid(cfg["grid"]) if "grid" in cfg else np.array([t_end])
    hooks = (ObserverHook(tuple(grid), "phi"),)
    low, _ = extremal_pair(spec)
    dump = cfg.get("dump")
    final, obs = simulate(spec, low, t_end, seed, hooks, dump_path=dump)
    times, values = obs["phi"]
    lines = ["# mixlab-v1 simulate", "t,phi"]
    lines += [f"{_fmt(t)},{_fmt(v)}" for t, v in zip(times, values)]
    summary = {
        "model": spec.model.code,
        "t_end": t_end,
        "seed": seed,
        "final": final.to_string(),
    }
    return "\n".join(lines) + "\n", summary, {}


def _run_couple(cfg):
    spec = _spec_from_cfg(cfg)
    replicas = _as_int(cfg, "replicas", 100)
    seed = _as_int(cfg, "seed", 0)
    mode = cfg.get("mode", "graphical")
    t_max = _as_float(cfg, "t_max", default_t_max(spec))
    reports = coupling_time_batch(spec, replicas, seed, t_max, mode)
    buf = io.StringIO()
    reports_to_csv(reports, buf)
    taus = [r.tau for r in reports if not r.censored]
    summary = {
        "replicas": replicas,
        "mode": mode,
        "censored": sum(r.censored for r in reports),
        "tau_mean": float(np.mean(taus)) if taus else None,
        "tau_median": float(np.median(taus)) if taus else None,
    }
    return buf.getvalue(), summary, {}


def _run_dtv(cfg):
    spec = _spec_from_cfg(cfg)
    estimator = cfg.get("estimator", "both")
    if estimator not in ("upper", "lower", "both"):
        raise ConfigError(f"estimator must be upper/lower/both, got {estimator!r}")
    if spec.state_kind == "simplex":
        if estimator == "upper":
            raise ConfigError("the simplex walk supports the lower estimator only")
        estimator = "lower"
    grid = parse_grid(cfg["grid"]) if "grid" in cfg else _default_grid(spec)
    config = ExperimentConfig(
        spec, grid, _as_int(cfg, "replicas", 200), _as_int(cfg, "seed", 0), estimator
    )
    lower = estimate_distance_lower(config) if estimator in ("lower", "both") else None
    upper = estimate_distance_upper(config) if estimator in ("upper", "both") else None
    lines = ["# mixlab-v1 dtv", "t,d_lower,hw_lower,d_upper,hw_upper"]
    for gi, t in enumerate(grid):
        lo = _fmt(lower.values[gi]) if lower else ""
        lo_hw = _fmt(lower.half_widths[gi]) if lower else ""
        up = _fmt(upper.values[gi]) if upper else ""
        up_hw = _fmt(upper.half_widths[gi]) if upper else ""
        lines.append(f"{_fmt(t)},{lo},{lo_hw},{up},{up_hw}")
    summary = {
        "t_half_lower": first_half_crossing(lower) if lower else None,
        "t_half_upper": first_half_crossing(upper) if upper else None,
        "replicas": config.replicas,
    }
    return "\n".join(lines) + "\n", summary, {}


def _run_profile(cfg):
    spec = _spec_from_cfg(cfg)
    t = _as_float(cfg, "t")
    config = ExperimentConfig(
        spec, np.array([t]), _as_int(cfg, "replicas", 200), _as_int(cfg, "seed", 0)
    )
    rho = density_profile(config, t)
    step = (np.arange(1, spec.N + 1) > spec.N - spec.k).astype(np.float64)
    lines = ["# mixlab-v1 profile", "site,density"]
    lines += [f"{i + 1},{_fmt(v)}" for i, v in enumerate(rho)]
    summary = {
        "t": t,
        "replicas": config.replicas,
        "l1_to_step": float(np.abs(rho - step).sum()),
    }
    return "\n".join(lines) + "\n", summary, {}


def _run_cutoff(cfg):
    model = Model.from_code(_req(cfg, "model"))
    try:
        Ns = [int(tok) for tok in _req(cfg, "n").split(",")]
    except ValueError:
        raise ConfigError("key 'n' must be comma-separated integers for cutoff") from None
    eps_raw = cfg.get("eps_pair", cfg.get("eps", "0.25"))
    toks = eps_raw.split(",")
    e1 = float(toks[0])
    e2 = float(toks[1]) if len(toks) > 1 else 1.0 - e1
    result = cutoff_scan(
        model,
        Ns,
        (e1, e2),
        seed=_as_int(cfg, "seed", 0),
        p=_as_float(cfg, "p", 0.5),
        replicas=_as_int(cfg, "replicas", 256),
        grid_points=_as_int(cfg, "grid_points", 24),
    )
    lines = ["# mixlab-v1 cutoff", "N,k,t_half_lower,t_half_upper,theory_value,exact_ratio"]
    recs = []
    for rec in result.records:
        lines.append(
            f"{rec.N},{rec.k},{_fmt(rec.t_half_lower)},{_fmt(rec.t_half_upper)},"
            f"{_fmt(rec.theory_value)},{_fmt(rec.exact_ratio)}"
        )
        recs.append(
            {
                "N": rec.N,
                "k": rec.k,
                "t_half_lower": rec.t_half_lower,
                "t_half_upper": rec.t_half_upper,
                "theory_value": rec.theory_value,
                "exact_ratio": rec.exact_ratio,
            }
        )
    summary = {"model": model.code, "eps_pair": [e1, e2], "records": recs}
    return "\n".join(lines) + "\n", summary, {}


_RUNNERS = {
    "spectrum": _run_spectrum,
    "exact": _run_exact,
    "simulate": _run_simulate,
    "couple": _run_couple,
    "dtv": _run_dtv,
    "profile": _run_profile,
    "cutoff": _run_cutoff,
}


def _json_default(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    raise TypeError(f"not JSON serializable: {type(x)}")


def _sanitize_json(obj):
    if isinstance(obj, dict):
        return {k: _sanitize_json(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize_json(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        obj = obj.item()
    if isinstance(obj, float) and math.isinf(obj):
        return "inf"
    return obj


def execute_experiment(cfg: dict) -> dict:
    """Run one experiment from a parsed config; returns written paths/summary.

    Writes ``<experiment>.csv`` and ``<experiment>.json`` under the ``out``
    directory (default: current directory); ``format`` restricts to one of
    the two.  Partial outputs are removed if anything fails mid-write.
    """
    experiment = cfg.get("experiment")
    if experiment not in _EXPERIMENTS:
        raise ConfigError(
            f"unknown experiment {experiment!r}; expected one of {_EXPERIMENTS}"
        )
    fmt = cfg.get("format", "both")
    if fmt not in ("csv", "json", "both"):
        raise ConfigError(f"format must be csv or json, got {fmt!r}")
    out_dir = cfg.get("out", ".")
    csv_text, summary, extra = _RUNNERS[experiment](cfg)
    json_text = json.dumps(_sanitize_json(summary), sort_keys=True, indent=2) + "\n"

    os.makedirs(out_dir, exist_ok=True)
    written = []
    try:
        if fmt in ("csv", "both"):
            path = os.path.join(out_dir, f"{experiment}.csv")
            with open(path, "w") as fh:
                fh.write(csv_text)
            written.append(path)
            for name, text in extra.items():
                path = os.path.join(out_dir, name)
                with open(path, "w") as fh:
                    fh.write(text)
                written.append(path)
        if fmt in ("json", "both"):
            path = os.path.join(out_dir, f"{experiment}.json")
            with open(path, "w") as fh:
                fh.write(json_text)
            written.append(path)
    except BaseException:
        for path in written:
            try:
                os.unlink(path)
            except OSError:
                pass
        raise
    return {"written": written, "summary": summary, "csv": csv_text, "json": json_text}


def run_experiment(path: str) -> int:
    """Execute the experiment described by a config file; returns exit code."""
    try:
        cfg = parse_config_file(path)
        result = execute_experiment(cfg)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except (ResourceError, TooLarge, CoalescenceTimeout, MemoryError) as e:
        print(f"resource error: {e}", file=sys.stderr)
        return 3
    except MixlabError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    for path_written in result["written"]:
        print(path_written)
    return 0
