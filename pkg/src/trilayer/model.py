"""Model parameters, rate functions and assumption validation.

The model is driven by two nutrient thresholds (necrotic sigma_D, quiescent
sigma_Q), two removal rates (nu1 quiescent, nu2 necrotic) and a triple of
monotone rate functions: consumption f for proliferating cells, consumption g
for quiescent cells, and net volume growth S with a unique zero sigma_tilde.
Everything downstream assumes a configuration that passed ``validate_config``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .errors import AssumptionViolated, NegativeConcentration, NonFinite

__all__ = [
    "Thresholds",
    "LinearRates",
    "RateTriple",
    "ModelConfig",
    "ValidatedConfig",
    "validate_config",
    "eval_rate",
    "load_config",
    "canonical_config",
]

_ZERO_TOL = 1e-12  # tolerance for f(0)=g(0)=0 and S(sigma_tilde)=0
_GRID_POINTS = 1000  # minimum sample grid for monotonicity of general rates


@dataclass(frozen=True)
class Thresholds:
    """Concentration thresholds and removal rates.

    sigma_D: below this the tissue is necrotic.
    sigma_Q: below this (but above sigma_D) cells are quiescent.
    nu1, nu2: volume removal rates of quiescent and necrotic cells.
    """

    sigma_D: float
    sigma_Q: float
    nu1: float
    nu2: float


@dataclass(frozen=True)
class RateTriple:
    """Rate functions with their first derivatives and the zero of S.

    ``f`` and ``g`` are nutrient-consumption rates (proliferating, quiescent),
    ``S`` the net volume growth rate of proliferating cells.  Derivatives are
    required inputs rather than numerically differenced so that downstream
    finite-difference checks have an independent truth source.
    """

    f: Callable[[float], float]
    g: Callable[[float], float]
    S: Callable[[float], float]
    df: Callable[[float], float]
    dg: Callable[[float], float]
    dS: Callable[[float], float]
    sigma_tilde: float


@dataclass(frozen=True)
class LinearRates:
    """The built-in linear family f = lambda1*s, g = lambda2*s, S = mu*(s - sigma_tilde)."""

    lambda1: float
    lambda2: float
    mu: float
    sigma_tilde: float

    def as_triple(self) -> RateTriple:
        l1, l2, mu, st = self.lambda1, self.lambda2, self.mu, self.sigma_tilde
        return RateTriple(
            f=lambda s: l1 * s,
            g=lambda s: l2 * s,
            S=lambda s: mu * (s - st),
            df=lambda s: l1,
            dg=lambda s: l2,
            dS=lambda s: mu,
            sigma_tilde=st,
        )


@dataclass(frozen=True)
class ModelConfig:
    """Unvalidated model configuration; pass through ``validate_config``."""

    thresholds: Thresholds
    rates: LinearRates | RateTriple
    sigma_bar: float
    R0: float


@dataclass(frozen=True, eq=False)
class ValidatedConfig:
    """Immutable configuration that passed all assumption checks.

    Exposes the rate callables directly (f, g, S, df, dg, dS) alongside the
    scalar parameters.  Instances are safe to share across threads; all
    package operations treat them as read-only.
    """

    thresholds: Thresholds
    rates: LinearRates | RateTriple
    sigma_bar: float
    R0: float
    f: Callable[[float], float]
    g: Callable[[float], float]
    S: Callable[[float], float]
    df: Callable[[float], float]
    dg: Callable[[float], float]
    dS: Callable[[float], float]
    sigma_tilde: float

    @property
    def sigma_D(self) -> float:
        return self.thresholds.sigma_D

    @property
    def sigma_Q(self) -> float:
        return self.thresholds.sigma_Q

    @property
    def nu1(self) -> float:
        return self.thresholds.nu1

    @property
    def nu2(self) -> float:
        return self.thresholds.nu2

    def with_sigma_bar(self, sigma_bar: float) -> "ValidatedConfig":
        """Same model, different external supply (revalidated)."""
        return validate_config(
            ModelConfig(self.thresholds, self.rates, sigma_bar, self.R0)
        )


def _as_triple(rates: LinearRates | RateTriple) -> RateTriple:
    if isinstance(rates, LinearRates):
        return rates.as_triple()
    if isinstance(rates, RateTriple):
        return rates
    raise TypeError(f"rates must be LinearRates or RateTriple, got {type(rates)!r}")


def _check_finite(pairs) -> None:
    bad = [name for name, value in pairs if not math.isfinite(value)]
    if bad:
        raise NonFinite(f"non-finite configuration fields: {', '.join(bad)}")


def validate_config(cfg: ModelConfig | ValidatedConfig) -> ValidatedConfig:
    """Check the model assumptions and return an immutable validated config.

    All violated clauses are collected and raised together as a single
    ``AssumptionViolated`` carrying (name, detail) pairs, one per clause.
    Re-validating a ``ValidatedConfig`` is idempotent.

    For general (non-linear) rates, strict monotonicity of f, g, S is sampled
    on a grid of at least 1000 points spanning [0, 4*sigma_bar]; this is a
    documented limitation, not a proof.  Global Lipschitz bounds on f' and g'
    are assumed, not checked.
    """
    th = cfg.thresholds
    triple = _as_triple(cfg.rates)

    _check_finite(
        [
            ("sigma_D", th.sigma_D),
            ("sigma_Q", th.sigma_Q),
            ("nu1", th.nu1),
            ("nu2", th.nu2),
            ("sigma_bar", cfg.sigma_bar),
            ("R0", cfg.R0),
            ("sigma_tilde", triple.sigma_tilde),
        ]
    )
    if isinstance(cfg.rates, LinearRates):
        _check_finite(
            [
                ("lambda1", cfg.rates.lambda1),
                ("lambda2", cfg.rates.lambda2),
                ("mu", cfg.rates.mu),
            ]
        )

    violations: list[tuple[str, str]] = []

    def fail(name: str, detail: str) -> None:
        violations.append((name, detail))

    if not 0.0 < th.sigma_D:
        fail("(A3): 0 < sigma_D", f"sigma_D = {th.sigma_D}")
    if not th.sigma_D < th.sigma_Q:
        fail("(A3): sigma_D < sigma_Q", f"sigma_D = {th.sigma_D}, sigma_Q = {th.sigma_Q}")
    if not th.sigma_Q < triple.sigma_tilde:
        fail(
            "(A3): sigma_Q < sigma_tilde",
            f"sigma_Q = {th.sigma_Q}, sigma_tilde = {triple.sigma_tilde}",
        )
    if not th.nu1 > 0.0:
        fail("(A3): nu1 > 0", f"nu1 = {th.nu1}")
    if not th.nu2 > 0.0:
        fail("(A3): nu2 > 0", f"nu2 = {th.nu2}")
    if not th.nu1 <= th.nu2:
        fail("(A3): nu1 <= nu2", f"nu1 = {th.nu1}, nu2 = {th.nu2}")
    if not cfg.sigma_bar > 0.0:
        fail("sigma_bar > 0", f"sigma_bar = {cfg.sigma_bar}")
    if not cfg.R0 > 0.0:
        fail("R0 > 0", f"R0 = {cfg.R0}")
    if not triple.sigma_tilde > 0.0:
        fail("(A2): sigma_tilde > 0", f"sigma_tilde = {triple.sigma_tilde}")

    # rate checks only make sense where the thresholds themselves are sane
    if th.sigma_Q > 0.0:
        fq, gq = triple.f(th.sigma_Q), triple.g(th.sigma_Q)
        if not fq >= gq:
            fail("(A3): f(sigma_Q) >= g(sigma_Q)", f"f = {fq}, g = {gq}")
        if th.nu1 > 0.0 and not triple.S(th.sigma_Q) >= -th.nu1:
            fail("(A3): S(sigma_Q) >= -nu1", f"S(sigma_Q) = {triple.S(th.sigma_Q)}, -nu1 = {-th.nu1}")

    if abs(triple.f(0.0)) > _ZERO_TOL or abs(triple.g(0.0)) > _ZERO_TOL:
        fail("(A1): f(0) = g(0) = 0", f"f(0) = {triple.f(0.0)}, g(0) = {triple.g(0.0)}")
    if abs(triple.S(triple.sigma_tilde)) > _ZERO_TOL:
        fail(
            "(A2): S(sigma_tilde) = 0",
            f"S({triple.sigma_tilde}) = {triple.S(triple.sigma_tilde)}",
        )

    if isinstance(cfg.rates, LinearRates):
        if not cfg.rates.lambda1 > 0.0:
            fail("(A1): f' > 0", f"lambda1 = {cfg.rates.lambda1}")
        if not cfg.rates.lambda2 > 0.0:
            fail("(A1): g' > 0", f"lambda2 = {cfg.rates.lambda2}")
        if not cfg.rates.mu > 0.0:
            fail("(A2): S' > 0", f"mu = {cfg.rates.mu}")
    else:
        hi = 4.0 * cfg.sigma_bar if cfg.sigma_bar > 0.0 else 4.0
        grid = np.linspace(0.0, hi, _GRID_POINTS)
        for name, deriv, clause in (
            ("f'", triple.df, "(A1): f' > 0"),
            ("g'", triple.dg, "(A1): g' > 0"),
            ("S'", triple.dS, "(A2): S' > 0"),
        ):
            values = np.array([deriv(float(s)) for s in grid])
            if not np.all(np.isfinite(values)):
                raise NonFinite(f"{name} is non-finite on the validation grid")
            if not np.all(values > 0.0):
                worst = float(grid[int(np.argmin(values))])
                fail(clause, f"{name}({worst}) = {float(np.min(values))} (sampled grid)")

    if violations:
        raise AssumptionViolated(violations)

    return ValidatedConfig(
        thresholds=th,
        rates=cfg.rates,
        sigma_bar=cfg.sigma_bar,
        R0=cfg.R0,
        f=triple.f,
        g=triple.g,
        S=triple.S,
        df=triple.df,
        dg=triple.dg,
        dS=triple.dS,
        sigma_tilde=triple.sigma_tilde,
    )


_RATE_NAMES = {"f", "g", "S", "f'", "g'", "S'"}


def eval_rate(cfg: ValidatedConfig | RateTriple | LinearRates, which: str, sigma: float) -> float:
    """Evaluate one of f, g, S, f', g', S' at concentration sigma >= 0."""
    if which not in _RATE_NAMES:
        raise ValueError(f"unknown rate {which!r}; expected one of {sorted(_RATE_NAMES)}")
    if sigma < 0.0:
        raise NegativeConcentration(f"sigma = {sigma} < 0")
    triple = cfg if isinstance(cfg, RateTriple) else (
        cfg.as_triple() if isinstance(cfg, LinearRates) else _as_triple(cfg.rates)
    )
    fn = {
        "f": triple.f,
        "g": triple.g,
        "S": triple.S,
        "f'": triple.df,
        "g'": triple.dg,
        "S'": triple.dS,
    }[which]
    return fn(sigma)


# --- file format ---------------------------------------------------------------

_TOP_KEYS = {"thresholds", "rates", "sigma_bar", "R0"}
_THRESHOLD_KEYS = {"sigma_D", "sigma_Q", "nu1", "nu2"}
_RATE_KEYS = {"kind", "lambda1", "lambda2", "mu", "sigma_tilde"}


def _reject_unknown(obj: dict, allowed: set, where: str) -> None:
    unknown = sorted(set(obj) - allowed)
    if unknown:
        raise ValueError(f"unknown keys in {where}: {', '.join(unknown)}")


def load_config(path) -> ModelConfig:
    """Read a JSON configuration file; unknown keys are rejected.

    Expected shape::

        {"thresholds": {"sigma_D": ..., "sigma_Q": ..., "nu1": ..., "nu2": ...},
         "rates": {"kind": "linear", "lambda1": ..., "lambda2": ..., "mu": ..., "sigma_tilde": ...},
         "sigma_bar": ..., "R0": ...}

    Only the linear rate family can be expressed in a file; general rates are
    constructed in code as a ``RateTriple``.
    """
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise ValueError("configuration root must be a JSON object")
    _reject_unknown(raw, _TOP_KEYS, "configuration")
    missing = sorted(_TOP_KEYS - set(raw))
    if missing:
        raise ValueError(f"missing configuration keys: {', '.join(missing)}")
    _reject_unknown(raw["thresholds"], _THRESHOLD_KEYS, "thresholds")
    _reject_unknown(raw["rates"], _RATE_KEYS, "rates")
    kind = raw["rates"].get("kind")
    if kind != "linear":
        raise ValueError(f"unsupported rates kind {kind!r}; only 'linear' is supported in files")
    th = raw["thresholds"]
    rt = raw["rates"]
    return ModelConfig(
        thresholds=Thresholds(
            sigma_D=float(th["sigma_D"]),
            sigma_Q=float(th["sigma_Q"]),
            nu1=float(th["nu1"]),
            nu2=float(th["nu2"]),
        ),
        rates=LinearRates(
            lambda1=float(rt["lambda1"]),
            lambda2=float(rt["lambda2"]),
            mu=float(rt["mu"]),
            sigma_tilde=float(rt["sigma_tilde"]),
        ),
        sigma_bar=float(raw["sigma_bar"]),
        R0=float(raw["R0"]),
    )


def canonical_config(sigma_bar: float = 2.0, R0: float = 1.0, **overrides) -> ValidatedConfig:
    """The reference linear configuration used throughout the test suite.

    lambda1=1, lambda2=0.5, mu=1, sigma_tilde=1, sigma_D=0.2, sigma_Q=0.5,
    nu1=0.6, nu2=1.0; satisfies every assumption with slack and keeps all
    critical radii order one.  ``overrides`` may replace any threshold or
    linear-rate field by name.
    """
    th = Thresholds(sigma_D=0.2, sigma_Q=0.5, nu1=0.6, nu2=1.0)
    rates = LinearRates(lambda1=1.0, lambda2=0.5, mu=1.0, sigma_tilde=1.0)
    th_fields = {k: v for k, v in overrides.items() if k in _THRESHOLD_KEYS}
    rate_fields = {k: v for k, v in overrides.items() if k in _RATE_KEYS - {"kind"}}
    unknown = set(overrides) - set(th_fields) - set(rate_fields)
    if unknown:
        raise ValueError(f"unknown canonical_config overrides: {sorted(unknown)}")
    if th_fields:
        th = replace(th, **th_fields)
    if rate_fields:
        rates = replace(rates, **rate_fields)
    return validate_config(ModelConfig(th, rates, sigma_bar, R0))
