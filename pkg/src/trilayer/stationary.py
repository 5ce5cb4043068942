"""Growth functional, critical nutrient values, and stationary classification.

The normalized net growth rate

    F(R, sigma_bar) = (1/R^3) * integral over [0, R] of
        [S(sigma) on the proliferating layer
         - nu1 on the quiescent layer
         - nu2 on the necrotic core] r^2 dr

is strictly decreasing in R, tends to S(sigma_bar)/3 as R -> 0 and to -nu2/3
as R -> infinity.  Its values at the two critical radii define two strictly
increasing functions of the external supply whose unique roots are the
critical nutrient values: above sigma_star the dormant tumor is three-layer,
between sigma_sub_star and sigma_star two-layer, between sigma_tilde and
sigma_sub_star one-layer, and at or below sigma_tilde only the trivial state
remains.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import SigmaBelowQuiescent
from .interfaces import (
    R_star,
    R_sub_star,
    _cached,
    _chain_three,
    _chain_two,
    _f_arc,
    _monotone_root,
    _one_layer_critical,
    _solve_structure,
    _two_layer_critical,
)
from .model import ValidatedConfig

__all__ = [
    "StationaryState",
    "CriticalValues",
    "growth_functional",
    "G_functional",
    "Fcal_functional",
    "critical_values",
    "stationary_solution",
]

TRIVIAL = "trivial"
ONE_LAYER = "one_layer"
TWO_LAYER = "two_layer"
THREE_LAYER = "three_layer"

_BRACKET_CAP_FACTOR = 1e6  # upward bracket limit, in units of sigma_tilde


@dataclass(frozen=True)
class StationaryState:
    """A classified stationary (dormant) solution.

    ``kind`` is one of trivial/one_layer/two_layer/three_layer; the interface
    radii are None where the corresponding layer does not exist, and
    ``residual`` is |F(R_s, sigma_bar)| re-evaluated independently of the
    root find (None for the trivial state).
    """

    kind: str
    R_s: float | None = None
    eta_s: float | None = None
    rho_s: float | None = None
    residual: float | None = None


@dataclass(frozen=True)
class CriticalValues:
    """The two critical external-supply values, sigma_sub_star < sigma_star."""

    sigma_star: float
    sigma_sub_star: float


def _structure_growth(cfg: ValidatedConfig, s) -> float:
    """Assemble F from a solved structure's arcs and closed-form layer terms."""
    nu1, nu2 = cfg.nu1, cfg.nu2
    R3 = s.R ** 3
    if s.branch == "necrotic":
        return -nu2 / 3.0
    if s.branch == "q_one":
        return -nu1 / 3.0
    if s.branch == "q_two":
        rho3 = s.rho ** 3
        return (-nu1 * (R3 - rho3) - nu2 * rho3) / (3.0 * R3)
    if s.branch == "one":
        if s.outer is None:  # uniform tiny tumor, u = sigma_bar throughout
            return cfg.S(s.sigma_bar) / 3.0
        return s.outer.growth_integral / R3
    if s.branch == "two":
        eta3 = s.eta ** 3
        return (s.outer.growth_integral - nu1 * eta3 / 3.0) / R3
    rho3, eta3 = s.rho ** 3, s.eta ** 3
    return (
        s.outer.growth_integral - nu1 * (eta3 - rho3) / 3.0 - nu2 * rho3 / 3.0
    ) / R3


def growth_functional(
    cfg: ValidatedConfig, R: float, sigma_bar: float | None = None
) -> float:
    """Normalized net volume-growth rate F(R, sigma_bar), all supply regimes."""
    sb = cfg.sigma_bar if sigma_bar is None else sigma_bar
    return _structure_growth(cfg, _solve_structure(cfg, R, sb))


def G_functional(cfg: ValidatedConfig, sigma_bar: float | None = None) -> float:
    """F evaluated at the two-/three-layer critical radius R_star(sigma_bar)."""
    sb = cfg.sigma_bar if sigma_bar is None else sigma_bar
    if sb <= cfg.sigma_Q:
        raise SigmaBelowQuiescent(f"sigma_bar = {sb} <= sigma_Q = {cfg.sigma_Q}")
    r_sup, es, w = _two_layer_critical(cfg, sb)
    return (w - cfg.nu1 * es ** 3 / 3.0) / r_sup ** 3


def Fcal_functional(cfg: ValidatedConfig, sigma_bar: float | None = None) -> float:
    """F evaluated at the one-/two-layer critical radius R_sub_star(sigma_bar)."""
    sb = cfg.sigma_bar if sigma_bar is None else sigma_bar
    if sb <= cfg.sigma_Q:
        raise SigmaBelowQuiescent(f"sigma_bar = {sb} <= sigma_Q = {cfg.sigma_Q}")
    r_sub, w = _one_layer_critical(cfg, sb)
    return w / r_sub ** 3


def critical_values(cfg: ValidatedConfig) -> CriticalValues:
    """Locate the roots of both critical functionals above sigma_tilde.

    Both functionals are strictly increasing and negative at sigma_tilde;
    brackets grow geometrically upward (BracketNotFound beyond 1e6 times
    sigma_tilde signals pathological rates).
    """

    def compute():
        st = cfg.sigma_tilde
        cap = _BRACKET_CAP_FACTOR * st
        sigma_star = _root_increasing(lambda s: G_functional(cfg, s), st, cap)
        sigma_sub = _root_increasing(lambda s: Fcal_functional(cfg, s), st, cap)
        if not st < sigma_sub < sigma_star:
            raise AssertionError(
                f"critical ordering violated: {st}, {sigma_sub}, {sigma_star}"
            )
        return CriticalValues(sigma_star=sigma_star, sigma_sub_star=sigma_sub)

    return _cached(cfg, "critical_values", compute)


def _root_increasing(fn, lo, cap):
    from .rootfind import brent, grow_bracket

    a, b, fa, fb = grow_bracket(fn, lo, 2.0 * lo, max_hi=cap)
    return brent(fn, a, b, fa=fa, fb=fb, rtol=1e-12)


def stationary_solution(
    cfg: ValidatedConfig, sigma_bar: float | None = None
) -> StationaryState:
    """Compute and classify the stationary solution at the given supply.

    At or below sigma_tilde only the trivial state exists.  Otherwise the
    unique root of F is located inside the regime interval dictated by the
    critical values, parametrized along the corresponding structure branch
    (center value for one- and two-layer, necrotic radius for three-layer).
    """
    sb = cfg.sigma_bar if sigma_bar is None else sigma_bar
    if sb <= cfg.sigma_tilde:
        return StationaryState(kind=TRIVIAL)

    cv = critical_values(cfg)
    sd, sq = cfg.sigma_D, cfg.sigma_Q

    if sb <= cv.sigma_sub_star:
        # one-layer: F increases along the center value c in [sigma_Q, sigma_bar)
        def F_of_c(c):
            arc = _f_arc(cfg, 0.0, c, 0.0, sb)
            return arc.growth_integral / arc.end_r ** 3

        c = _monotone_root(
            F_of_c, sq, sb * (1.0 - 1e-9),
            increasing=True,
            flo=Fcal_functional(cfg, sb),
            xtol=1e-15 * sb,
        )
        arc = _f_arc(cfg, 0.0, c, 0.0, sb)
        R_s = arc.end_r
        residual = abs(growth_functional(cfg, R_s, sb))
        return StationaryState(ONE_LAYER, R_s=R_s, residual=residual)

    if sb <= cv.sigma_star:
        # two-layer: F increases along the center value c in [sigma_D, sigma_Q]
        def F_of_c(c):
            inner, outer, eta = _chain_two(cfg, c, sb)
            return (outer.growth_integral - cfg.nu1 * eta ** 3 / 3.0) / outer.end_r ** 3

        c = _monotone_root(
            F_of_c, sd, sq,
            increasing=True,
            flo=G_functional(cfg, sb),
            fhi=Fcal_functional(cfg, sb),
            xtol=1e-15 * sq,
        )
        inner, outer, eta = _chain_two(cfg, c, sb)
        R_s = outer.end_r
        residual = abs(growth_functional(cfg, R_s, sb))
        return StationaryState(TWO_LAYER, R_s=R_s, eta_s=eta, residual=residual)

    # three-layer: F decreases along the necrotic radius rho; bracket upward
    def F_of_rho(rho):
        inner, outer, eta = _chain_three(cfg, rho, sb)
        eta3, rho3 = eta ** 3, rho ** 3
        return (
            outer.growth_integral
            - cfg.nu1 * (eta3 - rho3) / 3.0
            - cfg.nu2 * rho3 / 3.0
        ) / outer.end_r ** 3

    from .rootfind import brent, grow_bracket

    r_sup = R_star(cfg, sb)
    a, b, fa, fb = grow_bracket(
        F_of_rho, 0.0, 2.0 * r_sup, flo=G_functional(cfg, sb), max_hi=1e9 * r_sup
    )
    rho = brent(F_of_rho, a, b, fa=fa, fb=fb, rtol=1e-12, xtol=1e-15 * r_sup)
    inner, outer, eta = _chain_three(cfg, rho, sb)
    R_s = outer.end_r
    residual = abs(growth_functional(cfg, R_s, sb))
    return StationaryState(THREE_LAYER, R_s=R_s, eta_s=eta, rho_s=rho, residual=residual)
