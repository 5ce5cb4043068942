"""Free-boundary shooting maps and radial profile assembly.

Everything here is built from two arc primitives integrated outward:

* a quiescent arc under the consumption rate g, started with zero flux either
  at a necrotic-core rim (rho, sigma_D) or at a regular center (0, c), and
  stopped when it reaches a prescribed concentration;
* a proliferating arc under the consumption rate f, launched from the
  quiescent interface with the matching flux, stopped at the external supply.

Chaining the two gives the maps between the necrotic radius rho, the
quiescent-interface radius eta and the tumor radius R at supply sigma_bar,
together with the critical radii separating one-, two- and three-layer
internal structure.  Inverse maps use bracketed Brent root finding on the
strictly monotone forward maps.

The critical radii for a given (config, sigma_bar) are memoized in a
thread-safe weak cache since they are consulted on every evolution step;
cached and uncached results are value-identical.
"""

from __future__ import annotations

import threading
import weakref
from dataclasses import dataclass

from .errors import (
    BelowCriticalRadius,
    BelowEtaStar,
    NonPositiveEta,
    SigmaBelowQuiescent,
)
from .model import ValidatedConfig
from .radial import RadialSolution, integrate_radial, until_value
from .rootfind import brent

__all__ = [
    "InterfaceGeometry",
    "Layer",
    "RadialProfile",
    "eta_of_rho",
    "rho_of_eta",
    "eta_star",
    "interface_flux",
    "R_of_eta",
    "eta_of_R",
    "R_star",
    "R_sub_star",
    "R_q_star",
    "assemble_profile",
    "set_cache_enabled",
    "clear_cache",
]

# Arc tolerances here are tighter than the radial-module defaults: interface
# radii and growth integrals feed nested root finds whose residuals must stay
# well below the 1e-12 tolerances of the inverse maps.
RTOL = 1e-12
ATOL = 1e-14
ROOT_RTOL = 1e-12  # relative tolerance of all inverse-map root finds

NECROTIC = "necrotic"
QUIESCENT = "quiescent"
PROLIFERATING = "proliferating"


@dataclass(frozen=True)
class InterfaceGeometry:
    """Interface radii and the quiescent/proliferating interface flux."""

    rho: float
    eta: float
    R: float
    phi_at_eta: float


@dataclass(frozen=True)
class Layer:
    """One radial layer: an arc, or a constant concentration when arc is None."""

    kind: str
    r_start: float
    r_end: float
    arc: RadialSolution | None
    value: float | None

    def concentration(self, r: float) -> float:
        return self.value if self.arc is None else self.arc.value(r)

    def slope(self, r: float) -> float:
        return 0.0 if self.arc is None else self.arc.slope(r)


class RadialProfile:
    """The assembled nutrient profile on [0, R] with interface markers.

    ``rho``/``eta`` are None when the corresponding interface does not exist
    in the current regime (absent, not zero).  ``psi`` and ``phi_frac`` are
    the normalized fractions rho/R and eta/R.
    """

    def __init__(self, layers, rho, eta, R, sigma_bar, geometry=None):
        self.layers = tuple(layers)
        self.rho = rho
        self.eta = eta
        self.R = R
        self.sigma_bar = sigma_bar
        self.geometry = geometry

    @property
    def psi(self) -> float | None:
        return None if self.rho is None else self.rho / self.R

    @property
    def phi_frac(self) -> float | None:
        return None if self.eta is None else self.eta / self.R

    def _layer_at(self, r: float) -> Layer:
        if r < 0.0 or r > self.R * (1.0 + 1e-12):
            raise ValueError(f"r = {r} outside profile [0, {self.R}]")
        for layer in self.layers:
            if r <= layer.r_end:
                return layer
        return self.layers[-1]

    def value(self, r: float) -> float:
        """Concentration sigma(r)."""
        return self._layer_at(r).concentration(r)

    def slope(self, r: float) -> float:
        """Radial derivative sigma'(r)."""
        return self._layer_at(r).slope(r)

    def layer_kind(self, r: float) -> str:
        return self._layer_at(r).kind


# --- arc primitives ---------------------------------------------------------------


def _g_arc(cfg: ValidatedConfig, r0: float, u0: float, target: float) -> RadialSolution:
    return integrate_radial(cfg.g, r0, u0, 0.0, until_value(target), rtol=RTOL, atol=ATOL)


def _f_arc(cfg: ValidatedConfig, r0: float, u0: float, du0: float, target: float) -> RadialSolution:
    return integrate_radial(
        cfg.f, r0, u0, du0, until_value(target), growth=cfg.S, rtol=RTOL, atol=ATOL
    )


# --- memo cache ---------------------------------------------------------------------

_CACHE_LOCK = threading.RLock()
_CACHES: "weakref.WeakKeyDictionary[ValidatedConfig, dict]" = weakref.WeakKeyDictionary()
_CACHE_ENABLED = True


def set_cache_enabled(enabled: bool) -> None:
    """Turn the per-config memo cache on or off (results are value-identical)."""
    global _CACHE_ENABLED
    with _CACHE_LOCK:
        _CACHE_ENABLED = bool(enabled)
        if not enabled:
            _CACHES.clear()


def clear_cache() -> None:
    with _CACHE_LOCK:
        _CACHES.clear()


def _cached(cfg: ValidatedConfig, key, compute):
    if not _CACHE_ENABLED:
        return compute()
    with _CACHE_LOCK:
        store = _CACHES.get(cfg)
        if store is None:
            store = {}
            _CACHES[cfg] = store
        if key in store:
            return store[key]
    value = compute()
    with _CACHE_LOCK:
        store[key] = value
    return value


# --- forward shooting maps --------------------------------------------------------


def _eta_phi_of_rho(cfg: ValidatedConfig, rho: float) -> tuple[float, float]:
    arc = _g_arc(cfg, rho, cfg.sigma_D, cfg.sigma_Q)
    return arc.end_r, arc.end_du


def eta_of_rho(cfg: ValidatedConfig, rho: float) -> float:
    """Quiescent-interface radius reached from a necrotic core of radius rho."""
    if rho < 0.0:
        raise ValueError(f"rho = {rho} must be nonnegative")
    return _eta_phi_of_rho(cfg, rho)[0]


def eta_star(cfg: ValidatedConfig) -> float:
    """Critical quiescent-core radius: the interface radius for rho = 0.

    Depends only on g, sigma_D and sigma_Q, never on the external supply.
    """
    return _cached(cfg, "eta_star", lambda: _eta_phi_of_rho(cfg, 0.0))[0]


def _eta_star_phi(cfg: ValidatedConfig) -> tuple[float, float]:
    return _cached(cfg, "eta_star", lambda: _eta_phi_of_rho(cfg, 0.0))


def rho_of_eta(cfg: ValidatedConfig, eta: float) -> float:
    """Necrotic-core radius whose interface lands at eta (inverse of eta_of_rho)."""
    es = eta_star(cfg)
    if eta < es * (1.0 - 1e-12):
        raise BelowEtaStar(f"eta = {eta} below the critical core radius {es}")
    if eta <= es:
        return 0.0
    return brent(
        lambda rho: _eta_phi_of_rho(cfg, rho)[0] - eta,
        0.0,
        eta,
        fa=es - eta,
        rtol=ROOT_RTOL,
        xtol=1e-15 * max(1.0, eta),
    )


def _center_quiescent_solution(cfg: ValidatedConfig, eta: float) -> tuple[float, RadialSolution]:
    """Center value c and arc with u(0)=c, zero center flux, u(eta)=sigma_Q.

    Exists for 0 < eta <= eta_star with c in [sigma_D, sigma_Q); the hit
    radius is strictly decreasing in c, which gives the bracket.
    """
    sq, sd = cfg.sigma_Q, cfg.sigma_D

    def hit(c: float) -> float:
        return _g_arc(cfg, 0.0, c, sq).end_r

    es = eta_star(cfg)
    gap = 0.5 * (sq - sd)
    c_hi = sq - gap
    while hit(c_hi) >= eta:
        gap *= 0.25
        c_hi = sq - gap
        if gap < 1e-300:
            raise ValueError(f"failed to bracket center value for eta = {eta}")
    c = brent(
        lambda x: hit(x) - eta,
        sd,
        c_hi,
        fa=es - eta,
        rtol=ROOT_RTOL,
        xtol=1e-15 * sq,
    )
    return c, _g_arc(cfg, 0.0, c, sq)


def interface_flux(cfg: ValidatedConfig, eta: float) -> float:
    """Nutrient flux at the quiescent/proliferating interface radius eta.

    For eta >= eta_star this is the three-layer branch (necrotic rim start at
    rho(eta)); for eta <= eta_star the two-layer branch (center value above
    sigma_D).  The branches agree at eta_star, and the value at eta = 0 is 0.
    """
    if eta < 0.0:
        raise NonPositiveEta(f"eta = {eta} must be nonnegative")
    if eta == 0.0:
        return 0.0
    es = eta_star(cfg)
    if eta >= es:
        rho = rho_of_eta(cfg, eta)
        return _eta_phi_of_rho(cfg, rho)[1]
    return _center_quiescent_solution(cfg, eta)[1].end_du


def _require_supply(cfg: ValidatedConfig, sigma_bar: float | None) -> float:
    sb = cfg.sigma_bar if sigma_bar is None else sigma_bar
    if sb <= cfg.sigma_Q:
        raise SigmaBelowQuiescent(f"sigma_bar = {sb} <= sigma_Q = {cfg.sigma_Q}")
    return sb


def R_of_eta(cfg: ValidatedConfig, eta: float, sigma_bar: float | None = None) -> float:
    """Tumor radius reached by the proliferating arc launched from eta."""
    sb = _require_supply(cfg, sigma_bar)
    phi = interface_flux(cfg, eta)
    return _f_arc(cfg, eta, cfg.sigma_Q, phi, sb).end_r


def _two_layer_critical(cfg: ValidatedConfig, sigma_bar: float) -> tuple[float, float, float]:
    """(R_star, eta_star, S-growth integral of the critical outer arc)."""

    def compute():
        es, phis = _eta_star_phi(cfg)
        outer = _f_arc(cfg, es, cfg.sigma_Q, phis, sigma_bar)
        return outer.end_r, es, outer.growth_integral

    return _cached(cfg, ("two_critical", sigma_bar), compute)


def _one_layer_critical(cfg: ValidatedConfig, sigma_bar: float) -> tuple[float, float]:
    """(R_sub_star, S-growth integral of the critical center arc)."""

    def compute():
        arc = _f_arc(cfg, 0.0, cfg.sigma_Q, 0.0, sigma_bar)
        return arc.end_r, arc.growth_integral

    return _cached(cfg, ("one_critical", sigma_bar), compute)


def R_star(cfg: ValidatedConfig, sigma_bar: float | None = None) -> float:
    """Critical tumor radius separating two-layer from three-layer structure."""
    sb = _require_supply(cfg, sigma_bar)
    return _two_layer_critical(cfg, sb)[0]


def R_sub_star(cfg: ValidatedConfig, sigma_bar: float | None = None) -> float:
    """Critical tumor radius separating one-layer from two-layer structure."""
    sb = _require_supply(cfg, sigma_bar)
    return _one_layer_critical(cfg, sb)[0]


def R_q_star(cfg: ValidatedConfig, sigma_bar: float | None = None) -> float:
    """Critical radius splitting quiescent one-layer from quiescent-necrotic.

    Defined for sigma_D < sigma_bar <= sigma_Q: the radius at which the
    center of an all-quiescent tumor first touches sigma_D.
    """
    sb = cfg.sigma_bar if sigma_bar is None else sigma_bar
    if not cfg.sigma_D < sb <= cfg.sigma_Q:
        raise ValueError(
            f"R_q_star requires sigma_D < sigma_bar <= sigma_Q, got {sb}"
        )
    return _cached(
        cfg, ("q_critical", sb), lambda: _g_arc(cfg, 0.0, cfg.sigma_D, sb).end_r
    )


# --- structure solving -------------------------------------------------------------


@dataclass(frozen=True)
class _Structure:
    """Solved internal structure at (R, sigma_bar); param warms later solves."""

    branch: str  # necrotic | q_one | q_two | one | two | three
    R: float
    sigma_bar: float
    rho: float | None
    eta: float | None
    center_value: float | None
    inner: RadialSolution | None  # g-arc
    outer: RadialSolution | None  # f-arc
    param: float | None


def _chain_two(cfg, c, sigma_bar):
    """Two-layer chain from center value c in [sigma_D, sigma_Q]."""
    if c >= cfg.sigma_Q:
        inner, eta, phi = None, 0.0, 0.0
    else:
        inner = _g_arc(cfg, 0.0, c, cfg.sigma_Q)
        eta, phi = inner.end_r, inner.end_du
    outer = _f_arc(cfg, eta, cfg.sigma_Q, phi, sigma_bar)
    return inner, outer, eta


def _chain_three(cfg, rho, sigma_bar):
    """Three-layer chain from necrotic radius rho >= 0."""
    inner = _g_arc(cfg, rho, cfg.sigma_D, cfg.sigma_Q)
    outer = _f_arc(cfg, inner.end_r, cfg.sigma_Q, inner.end_du, sigma_bar)
    return inner, outer, inner.end_r


def _monotone_root(f, lo, hi, *, increasing, guess=None, flo=None, fhi=None, xtol=0.0):
    """Root of a strictly monotone f on [lo, hi] with f(lo), f(hi) of opposite sign.

    Secant iteration safeguarded by the bracket that monotonicity maintains
    around every evaluation; falls back to bisection whenever the secant
    proposal leaves the bracket.  A warm ``guess`` typically converges in a
    handful of evaluations; endpoint values may be supplied but are never
    required.
    """
    a, b = lo, hi
    fa, fb = flo, fhi
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    x = guess if guess is not None and lo < guess < hi else 0.5 * (lo + hi)
    x_prev = fx_prev = None
    for _ in range(200):
        fx = f(x)
        if fx == 0.0:
            return x
        if (fx < 0.0) == increasing:  # root lies above x
            a, fa = x, fx
        else:
            b, fb = x, fx
        tol = xtol + ROOT_RTOL * max(abs(a), abs(b))
        if b - a <= tol:
            if fa is not None and fb is not None:
                return a if abs(fa) <= abs(fb) else b
            return a if fb is None else b
        if x_prev is not None and fx != fx_prev:
            x_new = x - fx * (x - x_prev) / (fx - fx_prev)
        else:
            x_new = None
        x_prev, fx_prev = x, fx
        if x_new is None or not a < x_new < b:
            x_new = 0.5 * (a + b)
        elif abs(x_new - x) <= 0.25 * tol:
            # secant step is below tolerance: x is already within tol of the root
            return x
        x = x_new
    return 0.5 * (a + b)


def _predict(guesses: dict | None, branch: str, R: float, lo: float, hi: float):
    """Extrapolate the branch parameter from the last two solves on this branch."""
    if guesses is None:
        return None
    mem = guesses.get(branch)
    if mem is None:
        return None
    p0, R0, p1, R1 = mem
    pred = p0
    if p1 is not None and R1 != R0:
        pred = p0 + (p0 - p1) / (R0 - R1) * (R - R0)
    pad = 1e-13 * (hi - lo)
    return min(max(pred, lo + pad), hi - pad)


def _remember(guesses: dict | None, branch: str, param: float, R: float) -> None:
    if guesses is None:
        return
    mem = guesses.get(branch)
    if mem is None:
        guesses[branch] = (param, R, None, None)
    else:
        guesses[branch] = (param, R, mem[0], mem[1])


def _solve_structure(
    cfg: ValidatedConfig,
    R: float,
    sigma_bar: float,
    guesses: dict | None = None,
) -> _Structure:
    """Solve the internal structure for a tumor of radius R at supply sigma_bar.

    ``guesses`` carries per-branch root memory across calls and is updated in
    place; evolution passes one dict along a whole trajectory so each solve
    starts from a secant extrapolation of the previous ones.
    """
    if R <= 0.0:
        raise ValueError(f"R = {R} must be positive")
    if sigma_bar <= 0.0:
        raise ValueError(f"sigma_bar = {sigma_bar} must be positive")
    sd, sq = cfg.sigma_D, cfg.sigma_Q
    guesses = guesses if guesses is not None else {}

    if sigma_bar <= sd:
        return _Structure("necrotic", R, sigma_bar, None, None, None, None, None, None)

    if sigma_bar <= sq:
        rq = R_q_star(cfg, sigma_bar)
        if R <= rq:
            # all-quiescent: center value c with the g-arc landing at (R, sigma_bar)
            evals: dict = {}

            def resid(c):
                if c >= sigma_bar:
                    return -R
                arc = _g_arc(cfg, 0.0, c, sigma_bar)
                evals[c] = arc
                return arc.end_r - R

            c = _monotone_root(
                resid, sd, sigma_bar,
                increasing=False,
                guess=_predict(guesses, "q_one", R, sd, sigma_bar),
                flo=rq - R,
                fhi=-R,
                xtol=1e-15 * sigma_bar,
            )
            _remember(guesses, "q_one", c, R)
            if c >= sigma_bar * (1.0 - 1e-15):
                # tumor so small the center value rounds to the supply
                return _Structure("q_one", R, sigma_bar, None, None, sigma_bar, None, None, c)
            arc = evals.get(c) or _g_arc(cfg, 0.0, c, sigma_bar)
            return _Structure("q_one", R, sigma_bar, None, None, c, arc, None, c)

        # quiescent shell over a necrotic core of radius rho
        evals = {}

        def resid(rho):
            arc = _g_arc(cfg, rho, sd, sigma_bar)
            evals[rho] = arc
            return arc.end_r - R

        rho = _monotone_root(
            resid, 0.0, R,
            increasing=True,
            guess=_predict(guesses, "q_two", R, 0.0, R),
            flo=rq - R,
            xtol=1e-15 * max(1.0, R),
        )
        _remember(guesses, "q_two", rho, R)
        arc = evals.get(rho) or _g_arc(cfg, rho, sd, sigma_bar)
        return _Structure("q_two", R, sigma_bar, rho, None, None, arc, None, rho)

    r_sub = R_sub_star(cfg, sigma_bar)
    r_sup = R_star(cfg, sigma_bar)

    if R < r_sub * (1.0 - 1e-12):
        # proliferating one-layer: center value c in [sigma_Q, sigma_bar]
        evals = {}

        def resid(c):
            if c >= sigma_bar:
                return -R
            arc = _f_arc(cfg, 0.0, c, 0.0, sigma_bar)
            evals[c] = arc
            return arc.end_r - R

        c = _monotone_root(
            resid, sq, sigma_bar,
            increasing=False,
            guess=_predict(guesses, "one", R, sq, sigma_bar),
            flo=r_sub - R,
            fhi=-R,
            xtol=1e-15 * sigma_bar,
        )
        _remember(guesses, "one", c, R)
        if c >= sigma_bar * (1.0 - 1e-15):
            return _Structure("one", R, sigma_bar, None, None, sigma_bar, None, None, c)
        arc = evals.get(c) or _f_arc(cfg, 0.0, c, 0.0, sigma_bar)
        return _Structure("one", R, sigma_bar, None, None, c, None, arc, c)

    if R <= r_sub:
        # exactly the critical one-layer radius
        arc = _f_arc(cfg, 0.0, sq, 0.0, sigma_bar)
        return _Structure("one", R, sigma_bar, None, None, sq, None, arc, sq)

    if R <= r_sup:
        # two-layer: quiescent core with center value c in [sigma_D, sigma_Q]
        evals = {}

        def resid(c):
            chain = _chain_two(cfg, c, sigma_bar)
            evals[c] = chain
            return chain[1].end_r - R

        c = _monotone_root(
            resid, sd, sq,
            increasing=False,
            guess=_predict(guesses, "two", R, sd, sq),
            flo=r_sup - R,
            fhi=r_sub - R,
            xtol=1e-15 * sq,
        )
        _remember(guesses, "two", c, R)
        inner, outer, eta = evals.get(c) or _chain_two(cfg, c, sigma_bar)
        center = c if inner is not None else sq
        return _Structure("two", R, sigma_bar, None, eta, center, inner, outer, c)

    # three-layer: necrotic core radius rho > 0
    evals = {}

    def resid(rho):
        chain = _chain_three(cfg, rho, sigma_bar)
        evals[rho] = chain
        return chain[1].end_r - R

    rho = _monotone_root(
        resid, 0.0, R,
        increasing=True,
        guess=_predict(guesses, "three", R, 0.0, R),
        flo=r_sup - R,
        xtol=1e-15 * max(1.0, R),
    )
    _remember(guesses, "three", rho, R)
    inner, outer, eta = evals.get(rho) or _chain_three(cfg, rho, sigma_bar)
    return _Structure("three", R, sigma_bar, rho, eta, None, inner, outer, rho)


def eta_of_R(cfg: ValidatedConfig, R: float, sigma_bar: float | None = None) -> float:
    """Quiescent-interface radius of a tumor of radius R (inverse of R_of_eta)."""
    sb = _require_supply(cfg, sigma_bar)
    r_sub = R_sub_star(cfg, sb)
    if R < r_sub * (1.0 - 1e-12):
        raise BelowCriticalRadius(f"R = {R} below the minimal admissible radius {r_sub}")
    if R <= r_sub:
        return 0.0
    s = _solve_structure(cfg, R, sb)
    return s.eta


def assemble_profile(
    cfg: ValidatedConfig, R: float, sigma_bar: float | None = None
) -> RadialProfile:
    """Assemble the full nutrient profile sigma(r) on [0, R] at supply sigma_bar.

    Regimes: above sigma_Q the tumor is one-, two- or three-layer according to
    R against the critical radii; between sigma_D and sigma_Q it is quiescent
    with or without a necrotic core; at or below sigma_D the profile is the
    constant sigma_bar (fully necrotic).
    """
    sb = cfg.sigma_bar if sigma_bar is None else sigma_bar
    s = _solve_structure(cfg, R, sb)
    sd = cfg.sigma_D

    if s.branch == "necrotic":
        layers = [Layer(NECROTIC, 0.0, R, None, sb)]
        return RadialProfile(layers, None, None, R, sb)
    if s.branch == "q_one":
        layers = [Layer(QUIESCENT, 0.0, R, s.inner, sb if s.inner is None else None)]
        return RadialProfile(layers, None, None, R, sb)
    if s.branch == "q_two":
        layers = [
            Layer(NECROTIC, 0.0, s.rho, None, sd),
            Layer(QUIESCENT, s.rho, R, s.inner, None),
        ]
        return RadialProfile(layers, s.rho, None, R, sb)
    if s.branch == "one":
        layers = [Layer(PROLIFERATING, 0.0, R, s.outer, sb if s.outer is None else None)]
        return RadialProfile(layers, None, None, R, sb)
    if s.branch == "two":
        if s.inner is None:
            layers = [Layer(PROLIFERATING, 0.0, R, s.outer, None)]
            return RadialProfile(layers, None, 0.0, R, sb)
        geometry = InterfaceGeometry(0.0, s.eta, R, s.outer.start_du)
        layers = [
            Layer(QUIESCENT, 0.0, s.eta, s.inner, None),
            Layer(PROLIFERATING, s.eta, R, s.outer, None),
        ]
        return RadialProfile(layers, None, s.eta, R, sb, geometry)
    geometry = InterfaceGeometry(s.rho, s.eta, R, s.outer.start_du)
    layers = [
        Layer(NECROTIC, 0.0, s.rho, None, sd),
        Layer(QUIESCENT, s.rho, s.eta, s.inner, None),
        Layer(PROLIFERATING, s.eta, R, s.outer, None),
    ]
    return RadialProfile(layers, s.rho, s.eta, R, sb, geometry)
