import numpy as np
import pytest

import threshmatch.bootstrap as boot_mod
from threshmatch import (
    DgpConfig,
    InputError,
    InvalidLevel,
    TooManyFailures,
    bootstrap_att,
    bootstrap_replicate,
    generate,
)
from threshmatch.errors import EmptyControlGroup

from conftest import make_null_obs


class TestFormula:
    def test_replicates_one_two_three(self, monkeypatch):
        # nine rows -> n_tilde = 3; replicates (1, 2, 3) have sample
        # variance 1, so sigma2_hat = 3
        monkeypatch.setattr(
            boot_mod, "bootstrap_replicate", lambda obs, r, seed, crossfit: float(r + 1)
        )
        obs = make_null_obs(seed=0, n=9)
        res = bootstrap_att(obs, b=3, level=0.5, seed=0)
        assert res.sigma2_hat == 3.0
        assert res.replicates.tolist() == [1.0, 2.0, 3.0]
        assert res.ci_low == pytest.approx(1.5)
        assert res.ci_high == pytest.approx(2.5)

    def test_degenerate_replicates(self, monkeypatch):
        monkeypatch.setattr(
            boot_mod, "bootstrap_replicate", lambda obs, r, seed, crossfit: 4.25
        )
        obs = make_null_obs(seed=0, n=9)
        res = bootstrap_att(obs, b=10, level=0.95, seed=0)
        assert res.sigma2_hat == 0.0
        assert (res.ci_low, res.ci_high) == (4.25, 4.25)

    def test_sigma2_recomputable_from_replicates(self):
        obs = generate(DgpConfig(n=600, seed=1))
        res = bootstrap_att(obs, b=40, seed=3)
        n_tilde = obs.n // 3
        assert res.sigma2_hat == n_tilde * np.var(res.replicates, ddof=1)


class TestDeterminism:
    def test_bit_identical_reruns(self):
        obs = generate(DgpConfig(n=600, seed=2))
        a = bootstrap_att(obs, b=30, level=0.9, seed=7)
        b = bootstrap_att(obs, b=30, level=0.9, seed=7)
        assert np.array_equal(a.replicates, b.replicates)
        assert (a.sigma2_hat, a.ci_low, a.ci_high) == (b.sigma2_hat, b.ci_low, b.ci_high)

    def test_replicate_isolated_recompute(self):
        obs = generate(DgpConfig(n=600, seed=3))
        res = bootstrap_att(obs, b=25, seed=11)
        assert res.b_failed == 0
        for r in (0, 7, 24):
            assert bootstrap_replicate(obs, r, seed=11) == res.replicates[r]

    def test_crossfit_flag_changes_stream(self):
        obs = generate(DgpConfig(n=600, seed=4))
        plain = bootstrap_att(obs, b=10, seed=5, crossfit=False)
        cf = bootstrap_att(obs, b=10, seed=5, crossfit=True)
        assert not np.array_equal(plain.replicates, cf.replicates)


class TestFailures:
    def test_budget_allows_exactly_two_percent(self, monkeypatch):
        def flaky(obs, r, seed, crossfit):
            if r < 2:
                raise EmptyControlGroup()
            return float(r)

        monkeypatch.setattr(boot_mod, "bootstrap_replicate", flaky)
        obs = make_null_obs(seed=0, n=9)
        res = bootstrap_att(obs, b=100, seed=0)  # 2/100 == budget
        assert res.b_failed == 2
        assert len(res.replicates) == 98

    def test_budget_exceeded(self, monkeypatch):
        def flaky(obs, r, seed, crossfit):
            if r < 3:
                raise EmptyControlGroup()
            return float(r)

        monkeypatch.setattr(boot_mod, "bootstrap_replicate", flaky)
        obs = make_null_obs(seed=0, n=9)
        with pytest.raises(TooManyFailures):
            bootstrap_att(obs, b=100, seed=0)

    def test_invalid_level(self):
        obs = make_null_obs(seed=0, n=60)
        with pytest.raises(InvalidLevel):
            bootstrap_att(obs, b=5, level=1.0)
        with pytest.raises(InputError):
            bootstrap_att(obs, b=1, level=0.9)


class TestAgainstVarianceTarget:
    def test_smoke_on_small_dgp(self):
        obs = generate(DgpConfig(n=2000, seed=6))
        res = bootstrap_att(obs, b=60, seed=8)
        assert 6.0 < res.sigma2_hat < 20.0
        assert res.ci_low < res.ci_high
