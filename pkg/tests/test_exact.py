import itertools
import math

import numpy as np
import pytest
from scipy.linalg import expm

from mixlab import (
    ChainSpec,
    DistanceCurve,
    ExclusionConfig,
    Model,
    NotNormalized,
    OutOfRange,
    SolveFailure,
    TooLarge,
    build_generator,
    detailed_balance_residual,
    distance_curve_exact,
    enumerate_states,
    extremal_paths,
    height_map,
    heights_expectation,
    inversion_count,
    mixing_time_exact,
    particle_area,
    stationary_exact,
    transient_distribution,
    tv_distance,
)
from mixlab.exact import _space_size, transient_rows


def spec_of(code, N, k=None, p=0.5):
    return ChainSpec(Model.from_code(code), N, k, p)


class TestEnumeration:
    def test_sizes(self):
        assert enumerate_states(spec_of("ssep", 6, 2)).size == 15
        assert enumerate_states(spec_of("cf", 6, 3)).size == 20
        assert enumerate_states(spec_of("ip", 4)).size == 24

    def test_colex_order(self):
        idx = enumerate_states(spec_of("ssep", 4, 2))
        # colex on position sets: {0,1} < {0,2} < {1,2} < {0,3} < {1,3} < {2,3}
        expected = ["1100", "1010", "0110", "1001", "0101", "0011"]
        got = [idx.state_at(i).to_string() for i in range(6)]
        assert got == expected

    def test_packed_left_is_first(self):
        idx = enumerate_states(spec_of("ssep", 7, 3))
        assert idx.index_of(ExclusionConfig.packed_left(7, 3)) == 0

    def test_perm_lex_order(self):
        idx = enumerate_states(spec_of("ip", 3))
        words = [tuple(idx.table[i]) for i in range(6)]
        assert words == sorted(words)

    def test_round_trip(self):
        for code, N, k in (("ssep", 6, 3), ("cf", 5, 2), ("ip", 4, None)):
            idx = enumerate_states(spec_of(code, N, k))
            for i in range(idx.size):
                assert idx.index_of(idx.state_at(i)) == i

    def test_too_large(self):
        with pytest.raises(TooLarge):
            enumerate_states(spec_of("ip", 12))

    def test_simplex_unsupported(self):
        from mixlab import ModelUnsupported

        with pytest.raises(ModelUnsupported):
            enumerate_states(spec_of("simplex", 5))


class TestGenerator:
    def test_ssep_two_state_oracle(self):
        gm = build_generator(spec_of("ssep", 2, 1))
        assert np.allclose(gm.L.toarray(), [[-0.5, 0.5], [0.5, -0.5]])

    def test_asep_two_state_oracle(self):
        gm = build_generator(spec_of("asep", 2, 1, 0.8))
        # colex order: 10 (packed left) first, then 01
        assert np.allclose(gm.L.toarray(), [[-0.8, 0.8], [0.2, -0.2]])

    def test_row_sums_vanish(self):
        for code, N, k, p in (
            ("ssep", 6, 3, 0.5),
            ("asep", 6, 2, 0.7),
            ("cf", 5, 2, 0.5),
            ("acf", 5, 2, 0.9),
            ("ip", 4, None, 0.5),
            ("bip", 4, None, 0.8),
        ):
            gm = build_generator(spec_of(code, N, k, p))
            assert np.abs(gm.L.sum(axis=1)).max() < 1e-12

    def test_path_matrix_equals_exclusion_matrix(self):
        # the height bijection preserves canonical order, so the generators
        # must be identical entrywise
        for p, codes in ((0.5, ("ssep", "cf")), (0.8, ("asep", "acf"))):
            a = build_generator(spec_of(codes[0], 6, 3, p))
            b = build_generator(spec_of(codes[1], 6, 3, p))
            assert (a.L != b.L).nnz == 0

    def test_deterministic_p_rejected(self):
        with pytest.raises(OutOfRange):
            build_generator(spec_of("asep", 4, 2, 1.0))

    def test_interchange_rates(self):
        spec = spec_of("bip", 3, None, 0.7)
        gm = build_generator(spec)
        idx = gm.index
        L = gm.L.toarray()
        # from 123: every adjacent pair is an ascent; descending it has rate q
        from mixlab import Permutation

        i0 = idx.index_of(Permutation(np.array([1, 2, 3], dtype=np.int64)))
        i1 = idx.index_of(Permutation(np.array([2, 1, 3], dtype=np.int64)))
        assert L[i0, i1] == pytest.approx(0.3)
        assert L[i1, i0] == pytest.approx(0.7)


class TestStationary:
    def test_uniform_for_symmetric(self):
        for code, N, k in (("ssep", 6, 3), ("cf", 5, 2), ("ip", 4, None)):
            pi = stationary_exact(spec_of(code, N, k))
            assert np.allclose(pi, 1.0 / pi.size, atol=1e-14)

    def test_asep_two_state(self):
        pi = stationary_exact(spec_of("asep", 2, 1, 0.8))
        assert np.allclose(pi, [0.2, 0.8], atol=1e-14)

    def test_asep_weights_follow_area(self):
        spec = spec_of("asep", 6, 3, 0.8)
        gm = build_generator(spec)
        pi = stationary_exact(spec, gm)
        lam = 4.0
        weights = np.array(
            [lam ** -particle_area(gm.index.state_at(i)) for i in range(gm.size)]
        )
        assert np.allclose(pi, weights / weights.sum(), rtol=1e-12)

    def test_bip_weights_follow_inversions(self):
        spec = spec_of("bip", 4, None, 0.7)
        gm = build_generator(spec)
        pi = stationary_exact(spec, gm)
        lam = 0.7 / 0.3
        weights = np.array(
            [lam ** -inversion_count(gm.index.state_at(i)) for i in range(gm.size)]
        )
        assert np.allclose(pi, weights / weights.sum(), rtol=1e-12)

    def test_matches_nullspace_solve(self):
        for code, N, k, p in (("asep", 7, 3, 0.9), ("ssep", 8, 4, 0.5)):
            spec = spec_of(code, N, k, p)
            gm = build_generator(spec)
            pi = stationary_exact(spec, gm)
            A = np.vstack([gm.L.toarray().T, np.ones(gm.size)])
            b = np.zeros(gm.size + 1)
            b[-1] = 1.0
            ref, *_ = np.linalg.lstsq(A, b, rcond=None)
            assert np.abs(pi - ref).max() < 1e-10

    def test_detailed_balance(self):
        for code, N, k, p in (
            ("ssep", 8, 4, 0.5),
            ("asep", 8, 4, 0.8),
            ("cf", 8, 4, 0.5),
            ("acf", 8, 4, 0.8),
            ("ip", 5, None, 0.5),
            ("bip", 5, None, 0.8),
        ):
            assert detailed_balance_residual(spec_of(code, N, k, p)) < 1e-12


class TestTvDistance:
    def test_brute_force_oracle(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            a = rng.dirichlet(np.ones(12))
            b = rng.dirichlet(np.ones(12))
            assert tv_distance(a, b) == pytest.approx(0.5 * np.abs(a - b).sum())

    def test_shape_mismatch(self):
        from mixlab import ShapeMismatch

        with pytest.raises(ShapeMismatch):
            tv_distance(np.ones(3) / 3, np.ones(4) / 4)

    def test_not_normalized(self):
        with pytest.raises(NotNormalized):
            tv_distance(np.array([0.5, 0.6]), np.array([0.5, 0.5]))
        with pytest.raises(NotNormalized):
            tv_distance(np.array([1.2, -0.2]), np.array([0.5, 0.5]))


class TestTransient:
    def test_against_dense_expm(self):
        for code, N, k, p in (("ssep", 6, 3, 0.5), ("asep", 5, 2, 0.8), ("ip", 4, None, 0.5)):
            spec = spec_of(code, N, k, p)
            gm = build_generator(spec)
            for t in (0.3, 2.0, 11.0):
                P = expm(gm.L.toarray() * t)
                rows = transient_rows(gm, np.arange(gm.size), t)
                assert np.abs(rows - P).max() < 1e-11

    def test_rows_are_distributions(self):
        gm = build_generator(spec_of("asep", 6, 3, 0.7))
        rows = transient_rows(gm, np.arange(gm.size), 3.0)
        assert np.all(rows >= 0)
        assert np.abs(rows.sum(axis=1) - 1).max() < 1e-11

    def test_t_zero_is_identity(self):
        gm = build_generator(spec_of("ssep", 5, 2))
        rows = transient_rows(gm, np.arange(gm.size), 0.0)
        assert np.allclose(rows, np.eye(gm.size), atol=1e-14)


class TestDistanceCurve:
    def test_two_state_closed_form(self):
        spec = spec_of("ssep", 2, 1)
        grid = np.linspace(0.0, 5.0, 50)
        curve = distance_curve_exact(spec, grid)
        assert np.abs(curve.values - 0.5 * np.exp(-grid)).max() < 1e-9

    def test_nonincreasing(self):
        spec = spec_of("asep", 6, 3, 0.8)
        curve = distance_curve_exact(spec, np.linspace(0, 20, 12))
        assert np.all(np.diff(curve.values) <= 1e-12)

    def test_kind_field(self):
        curve = distance_curve_exact(spec_of("ssep", 4, 2), np.array([0.0, 1.0]))
        assert curve.kind == "exact"
        with pytest.raises(OutOfRange):
            DistanceCurve(np.array([0.0]), np.array([0.5]), "bogus")

    def test_projection_consistency(self):
        # interchange distance dominates the distance of any of its
        # exclusion projections run at the same time
        grid = np.linspace(0.0, 8.0, 6)
        ip = distance_curve_exact(spec_of("ip", 5), grid)
        for k in (1, 2):
            ssep = distance_curve_exact(spec_of("ssep", 5, k), grid)
            assert np.all(ssep.values <= ip.values + 1e-12)


class TestMixingTime:
    def test_two_state_ln2(self):
        t = mixing_time_exact(spec_of("ssep", 2, 1), 0.25)
        assert t == pytest.approx(math.log(2), abs=1e-6)

    def test_matches_curve_crossing(self):
        spec = spec_of("asep", 6, 3, 0.8)
        t = mixing_time_exact(spec, 0.25)
        eps_at_t = distance_curve_exact(spec, np.array([t])).values[0]
        assert eps_at_t == pytest.approx(0.25, abs=1e-5)

    def test_monotone_in_eps(self):
        spec = spec_of("ssep", 6, 3)
        assert mixing_time_exact(spec, 0.1) > mixing_time_exact(spec, 0.4)

    def test_upper_bound_dominates(self):
        from mixlab import mixing_upper_bound

        for code, N, k, p in (("ssep", 6, 3, 0.5), ("asep", 6, 3, 0.8), ("ip", 4, None, 0.5)):
            spec = spec_of(code, N, k, p)
            assert mixing_time_exact(spec, 0.25) <= mixing_upper_bound(spec, 0.25)


class TestHeightsExpectation:
    def test_t_zero_is_start(self):
        spec = spec_of("ssep", 6, 3)
        z = extremal_paths(6, 3)[1]
        out = heights_expectation(spec, ExclusionConfig.packed_left(6, 3), 0.0)
        assert np.allclose(out, z.zeta)

    def test_long_time_reaches_stationary_mean(self):
        spec = spec_of("ssep", 6, 3)
        gm = build_generator(spec)
        pi = stationary_exact(spec, gm)
        mean = sum(pi[i] * gm.index.heights_at(i) for i in range(gm.size))
        out = heights_expectation(spec, ExclusionConfig.packed_left(6, 3), 500.0)
        assert np.abs(out - mean).max() < 1e-9
