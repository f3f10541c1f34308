import numpy as np
import pytest

from cgclutter import (
    AR1,
    CustomACF,
    SpeckleSpec,
    TexturePath,
    White,
    compose,
    gen_speckle,
)


class TestGenSpeckle:
    def test_white_moments(self):
        rng = np.random.default_rng(0)
        x = gen_speckle(SpeckleSpec(variance=2.0), 200_000, rng)
        assert np.abs(x.mean()) < 0.02
        assert np.mean(np.abs(x) ** 2) == pytest.approx(2.0, rel=0.02)
        # circularity: E[x^2] = 0
        assert np.abs(np.mean(x ** 2)) < 0.02

    def test_ar1_autocorrelation(self):
        rho = 0.8
        rng = np.random.default_rng(1)
        x = gen_speckle(SpeckleSpec(correlation=AR1(rho)), 400_000, rng)
        assert np.mean(np.abs(x) ** 2) == pytest.approx(1.0, rel=0.02)
        for k in (1, 2, 5):
            r = np.mean(x[k:] * np.conj(x[:-k])).real
            assert r == pytest.approx(rho ** k, abs=0.02)

    def test_ar1_stationary_start(self):
        # the first sample must already carry the stationary variance
        rho = 0.95
        draws = []
        for seed in range(2000):
            rng = np.random.default_rng(seed)
            draws.append(gen_speckle(SpeckleSpec(correlation=AR1(rho)), 2, rng)[0])
        v = np.mean(np.abs(draws) ** 2)
        assert v == pytest.approx(1.0, rel=0.1)

    def test_ar1_rejects_bad_rho(self):
        with pytest.raises(ValueError):
            AR1(1.0)
        with pytest.raises(ValueError):
            AR1(-0.1)

    def test_custom_acf_covariance(self):
        acf = (1.0, 0.6, 0.2)
        rng = np.random.default_rng(4)
        n = 64
        reps = 4000
        xs = np.array([gen_speckle(SpeckleSpec(correlation=CustomACF(acf)), n, rng)
                       for _ in range(reps)])
        for k, want in enumerate(acf):
            got = np.mean(xs[:, k:] * np.conj(xs[:, : n - k])).real
            assert got == pytest.approx(want, abs=0.03)

    def test_custom_acf_rejects_indefinite(self):
        with pytest.raises(ValueError, match="positive semidefinite"):
            gen_speckle(SpeckleSpec(correlation=CustomACF((1.0, 0.9, -0.9))), 16,
                        np.random.default_rng(0))

    def test_guards(self):
        with pytest.raises(ValueError):
            gen_speckle(SpeckleSpec(), 0, np.random.default_rng(0))
        with pytest.raises(ValueError):
            SpeckleSpec(variance=0.0)


class TestCompose:
    def test_identity_on_flat_texture(self):
        path = TexturePath(np.array([0.0]), np.array([4.0]), 10.0)
        rng = np.random.default_rng(2)
        x = gen_speckle(SpeckleSpec(), 11, rng)
        series = compose(path, x, 1.0)
        np.testing.assert_allclose(series.z, 2.0 * x)
        np.testing.assert_array_equal(series.tau, 4.0)
        np.testing.assert_allclose(series.t, np.arange(11.0))

    def test_zero_texture_kills_speckle(self):
        path = TexturePath(np.array([0.0, 5.0]), np.array([0.0, 1.0]), 10.0)
        rng = np.random.default_rng(2)
        series = compose(path, gen_speckle(SpeckleSpec(), 11, rng), 1.0)
        assert np.all(series.z[:5] == 0.0)
        assert np.all(series.z[5:] != 0.0)

    def test_length_mismatch_rejected(self):
        path = TexturePath(np.array([0.0]), np.array([1.0]), 10.0)
        with pytest.raises(ValueError, match="expected 11"):
            compose(path, np.ones(5, dtype=complex), 1.0)

    def test_export_csv(self, tmp_path):
        path = TexturePath(np.array([0.0]), np.array([1.0]), 2.0)
        series = compose(path, np.array([1 + 2j, 3 + 0j, 0 + 1j]), 1.0)
        f = tmp_path / "c.csv"
        series.export_csv(f)
        lines = f.read_bytes().split(b"\n")
        assert lines[0] == b"t,re,im,tau"
        assert lines[1] == b"0,1,2,1"
