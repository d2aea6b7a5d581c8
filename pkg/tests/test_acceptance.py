"""Release gate: twelve numbered end-to-end checks.

Each test exercises one headline guarantee of the package at desk scale,
prints a single pass/fail line (run with ``pytest -s`` to see them), and
enforces a wall-clock budget.  Seeds are fixed, so every check is a
deterministic replay; none of them should ever flake.
"""

import math
import time

import numpy as np
import pytest
from scipy import stats

from mixlab import (
    ChainSpec,
    ExclusionConfig,
    ExperimentConfig,
    HeightField,
    LatticePath,
    Model,
    Permutation,
    SimplexPoint,
    UpdateEvent,
    CoupledEnsemble,
    build_generator,
    cftp_sample,
    coupled_step_graphical,
    coupled_step_refined,
    coupling_tail_bound,
    coupling_time_batch,
    density_profile,
    detailed_balance_residual,
    dirichlet_spectrum,
    distance_curve_exact,
    enumerate_states,
    estimate_distance_lower,
    estimate_distance_upper,
    extremal_pair,
    first_half_crossing,
    generator_identity_residual,
    heat_solve,
    height_map,
    height_inverse,
    heights_expectation,
    mixing_time_exact,
    partial_le,
    simulate,
    stationary_exact,
    transient_distribution,
)
from mixlab.dynamics import evaluate_statistic, to_internal


def spec_of(code, N, k=None, p=0.5):
    return ChainSpec(Model.from_code(code), N, k, p)


class _gate:
    """Context manager that times a check and prints its verdict line."""

    def __init__(self, label, budget):
        self.label = label
        self.budget = budget

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        elapsed = time.perf_counter() - self.t0
        verdict = "PASS" if exc_type is None and elapsed <= self.budget else "FAIL"
        print(f"[{self.label}] {verdict} ({elapsed:.2f}s, budget {self.budget:.0f}s)")
        if verdict == "FAIL" and exc_type is None:
            raise AssertionError(
                f"{self.label} exceeded its budget: {elapsed:.2f}s > {self.budget}s"
            )
        return False


def test_c01_two_state_curve_is_exponential():
    with _gate("C1 exact two-state relaxation", 1.0):
        spec = spec_of("ssep", 2, 1)
        grid = np.linspace(0.0, 10.0, 50)
        curve = distance_curve_exact(spec, grid)
        assert np.max(np.abs(curve.values - 0.5 * np.exp(-grid))) < 1e-9
        assert abs(mixing_time_exact(spec, 0.25) - math.log(2)) < 1e-6


def test_c02_reversibility_and_stationarity():
    with _gate("C2 detailed balance and pi L = 0", 30.0):
        instances = (
            [spec_of("ssep", N, N // 2) for N in (4, 6, 8)]
            + [spec_of("asep", N, N // 2, 0.8) for N in (4, 6, 8)]
            + [spec_of("cf", N, N // 2) for N in (4, 6, 8)]
            + [spec_of("acf", N, N // 2, 0.8) for N in (4, 6, 8)]
            + [spec_of("ip", N) for N in (3, 4, 5)]
            + [spec_of("bip", N, None, 0.8) for N in (3, 4, 5)]
        )
        for spec in instances:
            gm = build_generator(spec)
            assert detailed_balance_residual(spec, gm) < 1e-12, spec
            pi = stationary_exact(spec, gm)
            assert np.max(np.abs(gm.L.T @ pi)) < 1e-10, spec


def test_c03_sine_modes_are_laplacian_eigenvectors():
    with _gate("C3 Dirichlet eigenpairs N = 3..512", 10.0):
        worst = 0.0
        for N in range(3, 513):
            sp = dirichlet_spectrum(N)
            padded = np.zeros((N + 1, N - 1))
            padded[1:N] = sp.modes
            lap = padded[:-2] + padded[2:] - 2.0 * padded[1:-1]
            resid = np.max(np.abs(lap + 2.0 * sp.modes * sp.gammas[None, :]))
            worst = max(worst, resid)
        assert worst < 1e-12


def test_c04_generator_height_identity():
    with _gate("C4 generator identity on height paths", 10.0):
        spec = spec_of("acf", 8, 4, 0.8)
        for i in range(enumerate_states(spec_of("ssep", 8, 4)).size):
            xi = enumerate_states(spec_of("ssep", 8, 4)).state_at(i)
            assert generator_identity_residual(spec, height_map(xi)) < 1e-10
        big = spec_of("acf", 64, 32, 0.8)
        rng = np.random.default_rng(404)
        for _ in range(1000):
            occ = np.zeros(64, dtype=np.int64)
            occ[rng.choice(64, size=32, replace=False)] = 1
            zeta = height_map(ExclusionConfig(occ))
            assert generator_identity_residual(big, zeta) < 1e-10


def test_c05_height_expectation_solves_heat_equation():
    with _gate("C5 mean heights vs heat flow", 30.0):
        spec = spec_of("ssep", 6, 3)
        init = ExclusionConfig.packed_left(6, 3)
        u0 = HeightField.from_path(height_map(init))
        for t in (0.5, 2.0, 8.0):
            expected = heights_expectation(spec, init, t)
            solved = heat_solve(u0, t, 0.5).u
            assert np.max(np.abs(expected - solved)) < 1e-6, t


def _survival(taus, grid):
    taus = taus[:, None]
    return (taus > grid[None, :]).mean(axis=0)


def test_c06_coupling_tails_sit_below_theory():
    with _gate("C6 graphical tail domination, N = 32", 300.0):
        R = 10_000
        for spec, t_end in (
            (spec_of("ssep", 32, 16), 2400.0),
            (spec_of("asep", 32, 16, 0.8), 160.0),
        ):
            reports = coupling_time_batch(spec, R, 606)
            taus = np.array([math.inf if r.censored else r.tau for r in reports])
            grid = np.linspace(0.0, t_end, 20)
            emp = _survival(taus, grid)
            sigma = np.sqrt(emp * (1 - emp) / R)
            for t, e, s in zip(grid, emp, sigma):
                assert e <= coupling_tail_bound(spec, t).raw + 3 * s, (spec, t)


def test_c07_median_coupling_time_tracks_diffusive_scale():
    with _gate("C7 coupling-time medians, N = 64..256", 900.0):
        for N, R in ((64, 101), (128, 61), (256, 31)):
            spec = spec_of("ssep", N, N // 2)
            reports = coupling_time_batch(spec, R, 707 + N)
            med = float(np.median([r.tau for r in reports]))
            scale = (2 / math.pi**2) * N * N * math.log(N // 2)
            assert 0.6 * scale <= med <= 1.6 * scale, (N, med / scale)


def test_c08_symmetric_cutoff_bracket():
    with _gate("C8 cutoff sharpening and N = 256 bracket", 1800.0):
        ratios = [
            mixing_time_exact(spec_of("ssep", N, N // 2), 0.25)
            / mixing_time_exact(spec_of("ssep", N, N // 2), 0.75)
            for N in (6, 8, 10)
        ]
        assert ratios[0] > ratios[1] > ratios[2]

        N, k = 256, 128
        spec = spec_of("ssep", N, k)
        theory = N * N * math.log(k) / math.pi**2
        lower = estimate_distance_lower(
            ExperimentConfig(spec, np.linspace(0.5 * theory, 1.8 * theory, 12), 768, 808)
        )
        upper = estimate_distance_upper(
            ExperimentConfig(spec, np.linspace(0.5 * theory, 2.6 * theory, 12), 192, 809)
        )
        t_lo = first_half_crossing(lower)
        t_hi = first_half_crossing(upper)
        assert t_lo <= t_hi
        # the bracket straddles the half-mixing time; it must meet the
        # predicted window [0.5, 2.5] * theory
        assert t_lo <= 2.5 * theory and t_hi >= 0.5 * theory


def test_c09_biased_ballistic_mixing():
    with _gate("C9 biased N = 256 window and profile", 1200.0):
        N, k, p = 256, 128, 0.8
        spec = spec_of("asep", N, k, p)
        theory = (math.sqrt(0.5) + math.sqrt(0.5)) ** 2 * N / (2 * p - 1)
        lower = estimate_distance_lower(
            ExperimentConfig(spec, np.linspace(0.4 * theory, 1.6 * theory, 10), 768, 909)
        )
        upper = estimate_distance_upper(
            ExperimentConfig(spec, np.linspace(0.4 * theory, 2.6 * theory, 12), 192, 910)
        )
        t_lo = first_half_crossing(lower)
        t_hi = first_half_crossing(upper)
        assert t_lo <= t_hi
        assert t_lo <= 1.2 * theory and t_hi >= 0.8 * theory

        prof = density_profile(
            ExperimentConfig(spec, np.array([1.0]), 192, 911), 1.1 * theory
        )
        step = (np.arange(1, N + 1) > N - k).astype(float)
        assert np.abs(prof - step).sum() <= 0.1 * N


def test_c10_sandwich_on_every_enumerable_instance():
    with _gate("C10 estimator sandwich, N <= 8", 600.0):
        instances = (
            [("ssep", N, N // 2, 0.5) for N in (4, 6, 8)]
            + [("asep", N, N // 2, 0.8) for N in (4, 6, 8)]
            + [("cf", N, N // 2, 0.5) for N in (4, 6, 8)]
            + [("acf", N, N // 2, 0.8) for N in (4, 6, 8)]
            + [("ip", N, None, 0.5) for N in (4, 5)]
            + [("bip", N, None, 0.8) for N in (4, 5)]
        )
        for code, N, k, p in instances:
            spec = spec_of(code, N, k, p)
            grid = np.linspace(0.0, 2.0 * mixing_time_exact(spec, 0.25), 8)
            exact = distance_curve_exact(spec, grid)
            cfg = ExperimentConfig(spec, grid, 400, 1010)
            lower = estimate_distance_lower(cfg)
            upper = estimate_distance_upper(cfg)
            assert np.all(
                lower.values - 3 * lower.half_widths <= exact.values + 1e-12
            ), spec
            assert np.all(
                exact.values <= upper.values + 3 * upper.half_widths + 1e-12
            ), spec


def _ordered_pair(rng, spec):
    kind = spec.state_kind
    N = spec.N
    if kind in ("exclusion", "path"):
        def draw():
            occ = np.zeros(N, dtype=np.int64)
            occ[rng.choice(N, size=spec.k, replace=False)] = 1
            return height_map(ExclusionConfig(occ)).zeta

        za, zb = draw(), draw()
        lo = LatticePath(np.minimum(za, zb))
        hi = LatticePath(np.maximum(za, zb))
        if kind == "exclusion":
            return height_inverse(lo), height_inverse(hi)
        return lo, hi
    if kind == "simplex":
        xa = np.sort(rng.uniform(0, N, N - 1))
        xb = np.sort(rng.uniform(0, N, N - 1))
        return SimplexPoint(np.minimum(xa, xb)), SimplexPoint(np.maximum(xa, xb))
    word = rng.permutation(N).astype(np.int64) + 1
    lo = Permutation(word.copy())
    for _ in range(2 * N):
        s = int(rng.integers(0, N - 1))
        if word[s] > word[s + 1]:
            word[s], word[s + 1] = word[s + 1], word[s]
    return lo, Permutation(word)


def test_c11_order_preservation_and_refined_marginals():
    with _gate("C11 monotonicity over 1e5 events", 300.0):
        specs = (
            spec_of("bip", 10, None, 0.8),
            spec_of("ssep", 12, 5),
            spec_of("asep", 12, 5, 0.8),
            spec_of("acf", 12, 6, 0.7),
            spec_of("simplex", 10),
        )
        for spec in specs:
            rng = np.random.default_rng(1111)
            lo, hi = _ordered_pair(rng, spec)
            ens = CoupledEnsemble(spec, (lo, hi))
            t = 0.0
            for _ in range(100_000):
                t += rng.exponential() / (spec.N - 1)
                ev = UpdateEvent(t, int(rng.integers(1, spec.N)), float(rng.random()))
                ens = coupled_step_graphical(ens, ev)
                assert partial_le(ens.states[0], ens.states[1]), spec

        # refined coupling marginals against straight simulation
        for code, p in (("ssep", 0.5), ("asep", 0.8)):
            spec = spec_of(code, 6, 3, p)
            gm = build_generator(spec)
            low, high = extremal_pair(spec)
            t_end, R = 3.0, 600
            rng = np.random.default_rng(1212)
            refined = np.zeros((2, R), dtype=np.int64)
            for r in range(R):
                lo, hi = low, high
                t = 0.0
                while True:
                    t += rng.exponential() / (spec.N - 1)
                    if t > t_end:
                        break
                    ev = UpdateEvent(t, int(rng.integers(1, 6)), float(rng.random()))
                    lo, hi = coupled_step_refined(spec, (lo, hi), ev, float(rng.random()))
                refined[0, r] = gm.index.index_of(lo)
                refined[1, r] = gm.index.index_of(hi)
            for row, start in ((0, low), (1, high)):
                direct = np.array(
                    [
                        gm.index.index_of(simulate(spec, start, t_end, 40_000 + r)[0])
                        for r in range(R)
                    ]
                )
                table = np.stack(
                    [
                        np.bincount(refined[row], minlength=gm.size),
                        np.bincount(direct, minlength=gm.size),
                    ]
                )
                table = table[:, table.sum(axis=0) > 0]
                p_value = stats.chi2_contingency(table).pvalue
                assert p_value >= 0.01, (spec, row, p_value)


def test_c12_cftp_samples_the_stationary_law():
    with _gate("C12 perfect sampling, 1e5 draws", 120.0):
        spec = spec_of("asep", 4, 2, 0.8)
        gm = build_generator(spec)
        pi = stationary_exact(spec, gm)
        R = 100_000
        counts = np.zeros(gm.size)
        for r in range(R):
            counts[gm.index.index_of(cftp_sample(spec, r))] += 1
        freq = counts / R
        tol = 3.0 * np.sqrt(pi * (1 - pi) / R)
        assert np.all(np.abs(freq - pi) <= tol)
