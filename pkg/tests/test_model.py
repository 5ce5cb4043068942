import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trilayer.errors import AssumptionViolated, NegativeConcentration, NonFinite
from trilayer.model import (
    LinearRates,
    ModelConfig,
    RateTriple,
    Thresholds,
    ValidatedConfig,
    canonical_config,
    eval_rate,
    load_config,
    validate_config,
)


def make_model(**overrides):
    th = dict(sigma_D=0.2, sigma_Q=0.5, nu1=0.6, nu2=1.0)
    rt = dict(lambda1=1.0, lambda2=0.5, mu=1.0, sigma_tilde=1.0)
    other = dict(sigma_bar=2.0, R0=1.0)
    for k, v in overrides.items():
        if k in th:
            th[k] = v
        elif k in rt:
            rt[k] = v
        else:
            other[k] = v
    return ModelConfig(Thresholds(**th), LinearRates(**rt), **other)


def violation_names(exc):
    return [name for name, _ in exc.violations]


class TestValidate:
    def test_canonical_is_valid(self):
        cfg = validate_config(make_model())
        assert isinstance(cfg, ValidatedConfig)
        # (A3) clauses hold with slack: f(sQ)=0.5 >= g(sQ)=0.25, S(sQ)=-0.5 >= -0.6 >= -1.0
        assert cfg.f(cfg.sigma_Q) >= cfg.g(cfg.sigma_Q)
        assert cfg.S(cfg.sigma_Q) >= -cfg.nu1 >= -cfg.nu2

    def test_threshold_order_violation(self):
        with pytest.raises(AssumptionViolated) as exc:
            validate_config(make_model(sigma_D=0.5, sigma_Q=0.2))
        assert "(A3): sigma_D < sigma_Q" in violation_names(exc.value)

    def test_consumption_order_violation(self):
        with pytest.raises(AssumptionViolated) as exc:
            validate_config(make_model(lambda1=0.1))
        assert violation_names(exc.value) == ["(A3): f(sigma_Q) >= g(sigma_Q)"]

    @pytest.mark.parametrize(
        "overrides,clause",
        [
            (dict(sigma_Q=1.2), "(A3): sigma_Q < sigma_tilde"),
            (dict(nu1=1.5), "(A3): nu1 <= nu2"),
            (dict(nu1=0.3), "(A3): S(sigma_Q) >= -nu1"),
            (dict(sigma_bar=-1.0), "sigma_bar > 0"),
            (dict(R0=0.0), "R0 > 0"),
        ],
    )
    def test_single_clause_failures(self, overrides, clause):
        with pytest.raises(AssumptionViolated) as exc:
            validate_config(make_model(**overrides))
        assert violation_names(exc.value) == [clause]

    def test_nonfinite_rejected(self):
        with pytest.raises(NonFinite):
            validate_config(make_model(sigma_bar=math.nan))
        with pytest.raises(NonFinite):
            validate_config(make_model(nu2=math.inf))

    def test_revalidation_idempotent(self):
        cfg = validate_config(make_model())
        again = validate_config(cfg)
        assert again.sigma_D == cfg.sigma_D
        assert again.sigma_bar == cfg.sigma_bar
        assert validate_config(again).thresholds == cfg.thresholds

    def test_general_rates_grid_check(self):
        # a RateTriple whose g' dips negative must be caught by the sample grid
        bad = RateTriple(
            f=lambda s: s,
            g=lambda s: math.sin(s),
            S=lambda s: s - 1.0,
            df=lambda s: 1.0,
            dg=lambda s: math.cos(s),
            dS=lambda s: 1.0,
            sigma_tilde=1.0,
        )
        with pytest.raises(AssumptionViolated) as exc:
            validate_config(ModelConfig(Thresholds(0.2, 0.5, 0.6, 1.0), bad, 2.0, 1.0))
        assert "(A1): g' > 0" in violation_names(exc.value)

    def test_general_rates_valid_triple(self):
        # a saturating but strictly increasing nonlinear triple passes
        triple = RateTriple(
            f=lambda s: s + 0.1 * s / (1.0 + s),
            g=lambda s: 0.5 * s,
            S=lambda s: math.tanh(s - 1.0),
            df=lambda s: 1.0 + 0.1 / (1.0 + s) ** 2,
            dg=lambda s: 0.5,
            dS=lambda s: 1.0 / math.cosh(s - 1.0) ** 2,
            sigma_tilde=1.0,
        )
        cfg = validate_config(ModelConfig(Thresholds(0.2, 0.5, 0.6, 1.0), triple, 2.0, 1.0))
        assert cfg.S(cfg.sigma_tilde) == 0.0


class TestEvalRate:
    def test_zero_points(self, cfg):
        assert eval_rate(cfg, "S", cfg.sigma_tilde) == 0.0
        assert eval_rate(cfg, "f", 0.0) == 0.0
        assert eval_rate(cfg, "g", 0.0) == 0.0

    def test_linear_value(self, cfg):
        assert eval_rate(cfg, "g", 0.5) == pytest.approx(0.25, abs=0.0)

    def test_negative_concentration(self, cfg):
        with pytest.raises(NegativeConcentration):
            eval_rate(cfg, "f", -1e-9)

    def test_unknown_name(self, cfg):
        with pytest.raises(ValueError):
            eval_rate(cfg, "h", 1.0)

    def test_linear_matches_analytic_on_random_grid(self, cfg):
        rng = np.random.default_rng(1234)
        sigmas = rng.uniform(0.0, 10.0, size=10_000)
        l1, l2, mu, st_ = 1.0, 0.5, 1.0, 1.0
        for s in sigmas:
            s = float(s)
            assert eval_rate(cfg, "f", s) == l1 * s
            assert eval_rate(cfg, "g", s) == l2 * s
            assert eval_rate(cfg, "S", s) == mu * (s - st_)
        assert eval_rate(cfg, "f'", 3.0) == l1
        assert eval_rate(cfg, "g'", 3.0) == l2
        assert eval_rate(cfg, "S'", 3.0) == mu

    @given(
        lam1=st.floats(0.5, 4.0),
        lam2=st.floats(0.1, 0.5),
        sigma=st.floats(0.0, 8.0),
    )
    @settings(max_examples=50, deadline=None)
    def test_linear_family_property(self, lam1, lam2, sigma):
        rates = LinearRates(lam1, lam2, 1.0, 1.0).as_triple()
        assert eval_rate(rates, "f", sigma) == lam1 * sigma
        assert eval_rate(rates, "g", sigma) == lam2 * sigma


class TestConfigFile:
    CONTENT = {
        "thresholds": {"sigma_D": 0.2, "sigma_Q": 0.5, "nu1": 0.6, "nu2": 1.0},
        "rates": {"kind": "linear", "lambda1": 1.0, "lambda2": 0.5, "mu": 1.0, "sigma_tilde": 1.0},
        "sigma_bar": 2.0,
        "R0": 1.0,
    }

    def test_round_trip(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(self.CONTENT))
        model = load_config(path)
        cfg = validate_config(model)
        assert cfg.sigma_bar == 2.0
        assert cfg.rates == LinearRates(1.0, 0.5, 1.0, 1.0)

    @pytest.mark.parametrize(
        "mutate",
        [
            lambda d: d.update(extra=1),
            lambda d: d["thresholds"].update(bogus=0.1),
            lambda d: d["rates"].update(slope=2.0),
            lambda d: d["rates"].update(kind="cubic"),
        ],
    )
    def test_unknown_keys_rejected(self, tmp_path, mutate):
        data = json.loads(json.dumps(self.CONTENT))
        mutate(data)
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(data))
        with pytest.raises(ValueError):
            load_config(path)

    def test_missing_keys_rejected(self, tmp_path):
        data = json.loads(json.dumps(self.CONTENT))
        del data["R0"]
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(data))
        with pytest.raises(ValueError):
            load_config(path)


def test_canonical_config_overrides():
    cfg = canonical_config(sigma_bar=1.5, nu1=0.5, lambda2=0.4)
    assert cfg.nu1 == 0.5
    assert cfg.sigma_bar == 1.5
    assert cfg.g(1.0) == 0.4
    with pytest.raises(ValueError):
        canonical_config(bogus=1.0)
