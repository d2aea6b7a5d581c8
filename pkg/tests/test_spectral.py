import math

import numpy as np
import pytest

from mixlab import (
    BiasedModel,
    ChainSpec,
    ExclusionConfig,
    HeightField,
    LatticePath,
    Model,
    OutOfRange,
    WrongModel,
    cole_hopf,
    contraction_envelope,
    coupling_tail_bound,
    dirichlet_spectrum,
    extremal_paths,
    gamma_1,
    generator_identity_residual,
    heat_solve,
    height_map,
    mixing_upper_bound,
)


class TestSpectrum:
    def test_gamma_1_values(self):
        assert gamma_1(3) == pytest.approx(0.5, abs=1e-12)
        assert gamma_1(4) == pytest.approx(1 - math.sqrt(2) / 2, abs=1e-12)

    def test_gammas_increasing(self):
        sp = dirichlet_spectrum(12)
        assert np.all(np.diff(sp.gammas) > 0)
        assert sp.gammas[0] == pytest.approx(gamma_1(12))

    def test_eigen_relation_residual(self):
        # Delta sin_j = -2 gamma_j sin_j with Dirichlet walls, all N up to 512
        worst = 0.0
        for N in range(3, 513):
            sp = dirichlet_spectrum(N)
            s = np.zeros((N + 1, N - 1))
            s[1:N, :] = sp.modes
            lap = s[:-2, :] + s[2:, :] - 2.0 * s[1:-1, :]
            resid = np.abs(lap + 2.0 * sp.gammas[None, :] * sp.modes).max()
            worst = max(worst, resid)
        assert worst < 1e-12

    def test_modes_orthogonal(self):
        sp = dirichlet_spectrum(16)
        gram = sp.modes.T @ sp.modes * (2.0 / 16)
        assert np.abs(gram - np.eye(15)).max() < 1e-12


class TestHeatSolve:
    def test_t_zero_is_identity(self):
        u = HeightField(np.array([0.0, 1.0, 2.0, 1.0, 0.0]))
        out = heat_solve(u, 0.0, 0.5)
        assert np.allclose(out.u, u.u, atol=0)

    def test_matches_explicit_euler(self):
        rng = np.random.default_rng(7)
        N = 24
        vals = np.concatenate([[0.0], rng.normal(size=N - 1), [3.0]])
        u = HeightField(vals)
        t, c = 0.8, 0.5
        out = heat_solve(u, t, c).u

        steps = 800_000
        dt = t / steps
        v = vals.copy()
        for _ in range(steps):
            v[1:-1] += dt * c * (v[:-2] + v[2:] - 2 * v[1:-1])
        assert np.abs(out - v).max() < 1e-6

    def test_boundaries_pinned(self):
        u = HeightField(np.array([1.0, 5.0, -2.0, 0.5, 2.0]))
        out = heat_solve(u, 3.0, 0.5).u
        assert out[0] == 1.0 and out[-1] == 2.0

    def test_converges_to_harmonic_profile(self):
        N = 10
        u = HeightField(np.linspace(0, 4, N + 1) + np.sin(np.linspace(0, np.pi, N + 1)))
        out = heat_solve(u, 1e4, 0.5).u
        assert np.abs(out - np.linspace(0, 4, N + 1)).max() < 1e-10


class TestColeHopf:
    def test_values(self):
        z = extremal_paths(6, 3)[1]
        lam = 4.0
        v = cole_hopf(z, lam)
        assert np.allclose(v, lam ** (0.5 * z.zeta[1:-1]))

    def test_requires_lam_above_one(self):
        z = extremal_paths(4, 2)[0]
        with pytest.raises(OutOfRange):
            cole_hopf(z, 1.0)

    def test_monotone_in_path(self):
        top, bottom = extremal_paths(8, 4)
        assert np.all(cole_hopf(bottom, 3.0) <= cole_hopf(top, 3.0))


class TestGeneratorIdentity:
    def test_symmetric_exhaustive(self):
        import itertools

        spec = ChainSpec(Model.CORNER_FLIP, 8, 4, 0.5)
        worst = 0.0
        for sites in itertools.combinations(range(8), 4):
            xi = np.zeros(8, dtype=np.int64)
            xi[list(sites)] = 1
            z = height_map(ExclusionConfig(xi))
            worst = max(worst, generator_identity_residual(spec, z))
        assert worst < 1e-10

    def test_biased_exhaustive(self):
        import itertools

        spec = ChainSpec(Model.BIASED_CORNER_FLIP, 8, 4, 0.8)
        worst = 0.0
        for sites in itertools.combinations(range(8), 4):
            xi = np.zeros(8, dtype=np.int64)
            xi[list(sites)] = 1
            z = height_map(ExclusionConfig(xi))
            worst = max(worst, generator_identity_residual(spec, z))
        assert worst < 1e-10

    def test_biased_random_large(self):
        rng = np.random.default_rng(3)
        spec = ChainSpec(Model.BIASED_CORNER_FLIP, 64, 32, 0.8)
        worst = 0.0
        for _ in range(100):
            sites = rng.choice(64, size=32, replace=False)
            xi = np.zeros(64, dtype=np.int64)
            xi[sites] = 1
            z = height_map(ExclusionConfig(xi))
            worst = max(worst, generator_identity_residual(spec, z))
        assert worst < 1e-10

    def test_wrong_model(self):
        spec = ChainSpec(Model.SSEP, 6, 3, 0.5)
        with pytest.raises(WrongModel):
            generator_identity_residual(spec, extremal_paths(6, 3)[0])


class TestBounds:
    def test_contraction_envelope_value(self):
        expect = math.exp(-2 * (1 - math.sqrt(2) / 2))
        assert contraction_envelope(4, 0.5, 0.0, 1.0) == pytest.approx(expect, rel=1e-12)

    def test_tail_bound_raw_values(self):
        spec = ChainSpec(Model.SSEP, 4, 2, 0.5)
        tb = coupling_tail_bound(spec, 0.0)
        assert tb.raw == pytest.approx(6.0)
        assert tb.bound == 1.0

        tb = coupling_tail_bound(ChainSpec(Model.SSEP, 32, 16, 0.5), 10.0 / gamma_1(32))
        assert tb.raw == pytest.approx(16 * 31 * math.exp(-10.0), rel=1e-12)

    def test_tail_bound_biased_prefactor(self):
        spec = ChainSpec(Model.ASEP, 8, 4, 0.8)
        tb = coupling_tail_bound(spec, 0.0)
        assert tb.raw == pytest.approx(4 * 7 * 4.0 ** 3, rel=1e-12)

    def test_tail_bound_decays(self):
        spec = ChainSpec(Model.ASEP, 16, 8, 0.8)
        ts = np.linspace(0, 400, 9)
        vals = [coupling_tail_bound(spec, t).raw for t in ts]
        assert all(a > b for a, b in zip(vals, vals[1:]))

    def test_tail_bound_interchange_rejected(self):
        with pytest.raises(WrongModel):
            coupling_tail_bound(ChainSpec(Model.INTERCHANGE, 5, None, 0.5), 1.0)

    def test_mixing_bound_symmetric_value(self):
        spec = ChainSpec(Model.SSEP, 4, 2, 0.5)
        expect = math.log(48) / (1 - math.sqrt(2) / 2)
        assert mixing_upper_bound(spec, 0.25) == pytest.approx(expect, rel=1e-12)

    def test_mixing_bound_biased_exceeds_sharp_constant(self):
        spec = ChainSpec(Model.ASEP, 100, 50, 0.8)
        bound = mixing_upper_bound(spec, 0.25)
        sharp = 2 * 100 / (2 * 0.8 - 1)
        assert bound > sharp
        expect = (49 * math.log(4) + math.log(2 * 50 * 99 / 0.25)) / spec.rho
        assert bound == pytest.approx(expect, rel=1e-12)

    def test_mixing_bound_interchange_prefactor(self):
        spec = ChainSpec(Model.INTERCHANGE, 6, None, 0.5)
        expect = math.log(2 * 5 ** 3 / 0.25) / gamma_1(6)
        assert mixing_upper_bound(spec, 0.25) == pytest.approx(expect, rel=1e-12)

    def test_mixing_bound_eps_validation(self):
        spec = ChainSpec(Model.SSEP, 4, 2, 0.5)
        with pytest.raises(OutOfRange):
            mixing_upper_bound(spec, 0.0)
        with pytest.raises(OutOfRange):
            mixing_upper_bound(spec, 1.0)
        assert 0 < mixing_upper_bound(spec, 0.999) < math.inf

    def test_simplex_has_no_bound(self):
        with pytest.raises(WrongModel):
            mixing_upper_bound(ChainSpec(Model.SIMPLEX_RW, 6, None, 0.5), 0.25)
