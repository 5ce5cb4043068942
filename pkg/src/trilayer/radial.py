"""Outward integration of the radial nutrient equation u'' + (2/r) u' = h(u).

The integrator propagates the first-order system (u, v=u', w) with an
embedded Dormand-Prince 5(4) pair, where w accumulates the volume-growth
integral of S(u) r**2 so that it shares the step-size error control.  Arcs can
stop either at a prescribed radius or at a prescribed concentration value; the
threshold crossing is bracketed by an accepted step, bisected on the dense
interpolant to 1e-13 relative in r, then polished by Newton steps so the
reported endpoint matches the target to well within 1e-12 relative.

Regular-center starts (r0 = 0) take the first step analytically from the
series u(d) = u0 + h(u0) d^2/6, u'(d) = h(u0) d/3, which sidesteps the 2/r
singularity.

Closed-form solutions of the linear problem (h(u) = lam*u) are provided as
independent test oracles for both center and annulus starts.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import _dopri as dp
from .errors import CapExceeded, IntegrationError, NonMonotoneTarget, OutOfRange

__all__ = [
    "StopCondition",
    "StopReason",
    "RadialSolution",
    "until_value",
    "until_radius",
    "integrate_radial",
    "flux_at",
    "closed_form_linear_center",
    "closed_form_linear_center_slope",
    "closed_form_linear_annulus",
    "closed_form_linear_annulus_slope",
]

_R_LOCATE_RTOL = 1e-13   # bisection resolution in r for threshold crossings
_VALUE_RTOL = 1e-13      # Newton polish target for |u - target| / target
_CENTER_DELTA = 1e-6     # series prestep length scale at a regular center


@dataclass(frozen=True)
class StopCondition:
    """Where an outward arc ends: at a value crossing or a fixed radius.

    ``cap`` guards value-mode integration against runaway domains; when None a
    default of r0 + 1000 * max(1, target/u0) is applied at integrate time.
    """

    mode: str  # "value" | "radius"
    target: float
    cap: float | None = None


def until_value(target: float, cap: float | None = None) -> StopCondition:
    """Stop when u first reaches ``target`` (must exceed the start value)."""
    return StopCondition("value", float(target), cap)


def until_radius(r: float) -> StopCondition:
    """Stop exactly at radius ``r``."""
    return StopCondition("radius", float(r))


@dataclass(frozen=True)
class StopReason:
    """How an arc terminated: kind is 'hit_threshold' or 'reached_radius'."""

    kind: str
    r: float
    value: float


class RadialSolution:
    """A solved radial arc: grids of (r, u, u'), growth integral, dense eval.

    ``r_grid`` holds the accepted step endpoints (strictly increasing);
    ``u``/``du``/``growth`` are the state components at those radii.
    ``growth_integral`` is the final accumulated value of the attached
    integrand times r**2 from the start radius.  ``value``/``slope``/
    ``growth_at`` evaluate anywhere on the arc from the stored per-step
    interpolants.
    """

    def __init__(self, r_grid, u, du, growth, stop_reason, segments):
        self.r_grid = np.asarray(r_grid)
        self.u = np.asarray(u)
        self.du = np.asarray(du)
        self.growth = np.asarray(growth)
        self.growth_integral = float(growth[-1])
        self.stop_reason = stop_reason
        self._segments = segments  # parallel to r_grid[:-1]
        self._starts = [seg[1] for seg in segments]

    @property
    def start_r(self) -> float:
        return float(self.r_grid[0])

    @property
    def start_du(self) -> float:
        return float(self.du[0])

    @property
    def end_r(self) -> float:
        return float(self.r_grid[-1])

    @property
    def end_u(self) -> float:
        return float(self.u[-1])

    @property
    def end_du(self) -> float:
        return float(self.du[-1])

    def _eval(self, r: float):
        lo, hi = self.start_r, self.end_r
        slack = 1e-12 * max(1.0, abs(lo), abs(hi))
        if r < lo - slack or r > hi + slack:
            raise OutOfRange(f"r = {r} outside arc [{lo}, {hi}]")
        r = min(max(r, lo), hi)
        if not self._segments:
            return float(self.u[0]), float(self.du[0]), float(self.growth[0])
        i = bisect_right(self._starts, r) - 1
        i = min(max(i, 0), len(self._segments) - 1)
        seg = self._segments[i]
        if seg[0] == "series":
            _, r0, h, u0, c, gw0 = seg
            s = r - r0
            return u0 + c * s * s / 6.0, c * s / 3.0, gw0 * s * s * s / 3.0
        _, r0, h, y0, K = seg
        t = (r - r0) / h
        if t <= 0.0:
            return y0
        out = []
        for comp in range(3):
            acc = (
                K[0][comp] * dp.weight(dp.P1, t)
                + K[2][comp] * dp.weight(dp.P3, t)
                + K[3][comp] * dp.weight(dp.P4, t)
                + K[4][comp] * dp.weight(dp.P5, t)
                + K[5][comp] * dp.weight(dp.P6, t)
                + K[6][comp] * dp.weight(dp.P7, t)
            )
            out.append(y0[comp] + h * t * acc)
        return out[0], out[1], out[2]

    def value(self, r: float) -> float:
        """Concentration u(r)."""
        return self._eval(r)[0]

    def slope(self, r: float) -> float:
        """Radial derivative u'(r)."""
        return self._eval(r)[1]

    def growth_at(self, r: float) -> float:
        """Accumulated growth integral from the start radius to r."""
        return self._eval(r)[2]


def flux_at(sol: RadialSolution, r: float) -> float:
    """Interpolated radial derivative u'(r) on a solved arc."""
    return sol.slope(r)


def _initial_step(rhs, r, y, f0, rtol, atol, span):
    # first-step heuristic on (u, v) only; the quadrature state w is slaved
    # and its large derivative at big radii must not throttle the start
    sc = [atol + rtol * abs(y[i]) for i in range(2)]
    d0 = math.sqrt(sum((y[i] / sc[i]) ** 2 for i in range(2)) / 2.0)
    d1 = math.sqrt(sum((f0[i] / sc[i]) ** 2 for i in range(2)) / 2.0)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, span)
    y1 = tuple(y[i] + h0 * f0[i] for i in range(3))
    f1 = rhs(r + h0, y1[0], y1[1], y1[2])
    d2 = math.sqrt(sum(((f1[i] - f0[i]) / sc[i]) ** 2 for i in range(2)) / 2.0) / h0
    dm = max(d1, d2)
    h1 = max(1e-6, h0 * 1e-3) if dm <= 1e-15 else (0.01 / dm) ** 0.2
    return min(100.0 * h0, h1, span)


def integrate_radial(
    h: Callable[[float], float],
    r0: float,
    u0: float,
    du0: float,
    stop: StopCondition,
    *,
    growth: Callable[[float], float] | None = None,
    rtol: float = 1e-10,
    atol: float = 1e-12,
    max_steps: int = 1_000_000,
) -> RadialSolution:
    """Integrate u'' + (2/r) u' = h(u) outward from (r0, u0, du0).

    ``growth`` is the integrand of the accumulated w-state (w' = growth(u) r^2);
    when None the growth integral stays zero.  Value-mode stops assume the
    solution increases through the target, which holds whenever h > 0 on the
    arc.  Raises NonMonotoneTarget for a target at or below u0 and CapExceeded
    when the hard cap radius is reached first.
    """
    if u0 <= 0.0:
        raise ValueError(f"u0 = {u0} must be positive")
    if du0 < 0.0:
        raise ValueError(f"du0 = {du0} must be nonnegative")
    if r0 < 0.0:
        raise ValueError(f"r0 = {r0} must be nonnegative")
    if r0 == 0.0 and du0 != 0.0:
        raise ValueError("a regular center start (r0 = 0) requires du0 = 0")

    value_mode = stop.mode == "value"
    if value_mode:
        target = stop.target
        if target <= u0:
            raise NonMonotoneTarget(f"target {target} <= start value {u0}")
        cap = stop.cap if stop.cap is not None else r0 + 1e3 * max(1.0, target / u0)
        r_scale = 1.0
    elif stop.mode == "radius":
        target = math.nan
        cap = stop.target
        if cap < r0:
            raise ValueError(f"target radius {cap} < start radius {r0}")
        r_scale = max(1.0, cap)
    else:
        raise ValueError(f"unknown stop mode {stop.mode!r}")

    gr = growth if growth is not None else (lambda s: 0.0)

    def rhs(r, u, v, w):
        return v, h(u) - 2.0 * v / r, gr(u) * r * r

    rs = [r0]
    us = [u0]
    vs = [du0]
    ws = [0.0]
    segments = []

    def finish(reason):
        return RadialSolution(rs, us, vs, ws, reason, segments)

    # zero-length arc
    if not value_mode and cap == r0:
        return finish(StopReason("reached_radius", r0, u0))

    r, u, v, w = r0, u0, du0, 0.0

    if r0 == 0.0:
        c = h(u0)
        gw0 = gr(u0)
        delta = _CENTER_DELTA * max(1.0, r_scale)
        if not value_mode:
            delta = min(delta, 0.5 * cap)
        segments.append(("series", 0.0, delta, u0, c, gw0))
        r = delta
        u = u0 + c * delta * delta / 6.0
        v = c * delta / 3.0
        w = gw0 * delta * delta * delta / 3.0
        rs.append(r)
        us.append(u)
        vs.append(v)
        ws.append(w)
        if value_mode and u >= target:
            # crossing inside the series prestep; invert the series exactly
            r_hit = math.sqrt(6.0 * (target - u0) / c)
            rs[-1] = r_hit
            us[-1] = u0 + c * r_hit * r_hit / 6.0
            vs[-1] = c * r_hit / 3.0
            ws[-1] = gw0 * r_hit ** 3 / 3.0
            segments[-1] = ("series", 0.0, r_hit, u0, c, gw0)
            return finish(StopReason("hit_threshold", r_hit, us[-1]))

    f0 = rhs(r, u, v, w)
    hstep = _initial_step(rhs, r, (u, v, w), f0, rtol, atol, cap - r)
    k1u, k1v, k1w = f0

    for _ in range(max_steps):
        if hstep < 1e-14 * max(1.0, abs(r)):
            raise IntegrationError(f"step size underflow at r = {r}")
        if r + hstep > cap:
            hstep = cap - r
        hs = hstep

        yu = u + hs * (dp.A21 * k1u)
        yv = v + hs * (dp.A21 * k1v)
        yw = w + hs * (dp.A21 * k1w)
        k2u, k2v, k2w = rhs(r + dp.C2 * hs, yu, yv, yw)

        yu = u + hs * (dp.A31 * k1u + dp.A32 * k2u)
        yv = v + hs * (dp.A31 * k1v + dp.A32 * k2v)
        yw = w + hs * (dp.A31 * k1w + dp.A32 * k2w)
        k3u, k3v, k3w = rhs(r + dp.C3 * hs, yu, yv, yw)

        yu = u + hs * (dp.A41 * k1u + dp.A42 * k2u + dp.A43 * k3u)
        yv = v + hs * (dp.A41 * k1v + dp.A42 * k2v + dp.A43 * k3v)
        yw = w + hs * (dp.A41 * k1w + dp.A42 * k2w + dp.A43 * k3w)
        k4u, k4v, k4w = rhs(r + dp.C4 * hs, yu, yv, yw)

        yu = u + hs * (dp.A51 * k1u + dp.A52 * k2u + dp.A53 * k3u + dp.A54 * k4u)
        yv = v + hs * (dp.A51 * k1v + dp.A52 * k2v + dp.A53 * k3v + dp.A54 * k4v)
        yw = w + hs * (dp.A51 * k1w + dp.A52 * k2w + dp.A53 * k3w + dp.A54 * k4w)
        k5u, k5v, k5w = rhs(r + dp.C5 * hs, yu, yv, yw)

        yu = u + hs * (dp.A61 * k1u + dp.A62 * k2u + dp.A63 * k3u + dp.A64 * k4u + dp.A65 * k5u)
        yv = v + hs * (dp.A61 * k1v + dp.A62 * k2v + dp.A63 * k3v + dp.A64 * k4v + dp.A65 * k5v)
        yw = w + hs * (dp.A61 * k1w + dp.A62 * k2w + dp.A63 * k3w + dp.A64 * k4w + dp.A65 * k5w)
        k6u, k6v, k6w = rhs(r + hs, yu, yv, yw)

        u1 = u + hs * (dp.B1 * k1u + dp.B3 * k3u + dp.B4 * k4u + dp.B5 * k5u + dp.B6 * k6u)
        v1 = v + hs * (dp.B1 * k1v + dp.B3 * k3v + dp.B4 * k4v + dp.B5 * k5v + dp.B6 * k6v)
        w1 = w + hs * (dp.B1 * k1w + dp.B3 * k3w + dp.B4 * k4w + dp.B5 * k5w + dp.B6 * k6w)
        k7u, k7v, k7w = rhs(r + hs, u1, v1, w1)

        eu = hs * (dp.E1 * k1u + dp.E3 * k3u + dp.E4 * k4u + dp.E5 * k5u + dp.E6 * k6u + dp.E7 * k7u)
        ev = hs * (dp.E1 * k1v + dp.E3 * k3v + dp.E4 * k4v + dp.E5 * k5v + dp.E6 * k6v + dp.E7 * k7v)
        ew = hs * (dp.E1 * k1w + dp.E3 * k3w + dp.E4 * k4w + dp.E5 * k5w + dp.E6 * k6w + dp.E7 * k7w)
        su = atol + rtol * max(abs(u), abs(u1))
        sv = atol + rtol * max(abs(v), abs(v1))
        sw = atol + rtol * max(abs(w), abs(w1))
        err = math.sqrt(((eu / su) ** 2 + (ev / sv) ** 2 + (ew / sw) ** 2) / 3.0)

        if err > 1.0:
            hstep = hs * dp.step_factor(err)
            continue

        K = (
            (k1u, k1v, k1w),
            (k2u, k2v, k2w),
            (k3u, k3v, k3w),
            (k4u, k4v, k4w),
            (k5u, k5v, k5w),
            (k6u, k6v, k6w),
            (k7u, k7v, k7w),
        )
        segments.append(("rk", r, hs, (u, v, w), K))
        r_new = r + hs

        if value_mode and u1 >= target:
            r_hit, y_hit = _locate_threshold(segments[-1], target)
            rs.append(r_hit)
            us.append(y_hit[0])
            vs.append(y_hit[1])
            ws.append(y_hit[2])
            return finish(StopReason("hit_threshold", r_hit, y_hit[0]))

        r, u, v, w = r_new, u1, v1, w1
        k1u, k1v, k1w = k7u, k7v, k7w
        rs.append(r)
        us.append(u)
        vs.append(v)
        ws.append(w)

        if not value_mode and r >= cap:
            rs[-1] = cap
            return finish(StopReason("reached_radius", cap, u))
        if value_mode and r >= cap:
            raise CapExceeded(
                f"cap radius {cap} reached at u = {u} before target {target}"
            )
        hstep = hs * dp.step_factor(err)

    raise IntegrationError(f"exceeded {max_steps} steps")


def _locate_threshold(segment, target):
    """Bisect + Newton-polish the value crossing inside one accepted step."""
    _, r0, hs, y0, K = segment

    def u_of(t):
        acc = (
            K[0][0] * dp.weight(dp.P1, t)
            + K[2][0] * dp.weight(dp.P3, t)
            + K[3][0] * dp.weight(dp.P4, t)
            + K[4][0] * dp.weight(dp.P5, t)
            + K[5][0] * dp.weight(dp.P6, t)
            + K[6][0] * dp.weight(dp.P7, t)
        )
        return y0[0] + hs * t * acc

    def v_of(t):
        acc = (
            K[0][1] * dp.weight(dp.P1, t)
            + K[2][1] * dp.weight(dp.P3, t)
            + K[3][1] * dp.weight(dp.P4, t)
            + K[4][1] * dp.weight(dp.P5, t)
            + K[5][1] * dp.weight(dp.P6, t)
            + K[6][1] * dp.weight(dp.P7, t)
        )
        return y0[1] + hs * t * acc

    lo, hi = 0.0, 1.0
    while (hi - lo) * hs > _R_LOCATE_RTOL * max(1.0, abs(r0 + hi * hs)):
        mid = 0.5 * (lo + hi)
        if u_of(mid) >= target:
            hi = mid
        else:
            lo = mid
    t = hi
    for _ in range(8):
        resid = u_of(t) - target
        if abs(resid) <= _VALUE_RTOL * target:
            break
        dv = v_of(t)
        if dv <= 0.0:
            break
        t_next = t - resid / (dv * hs)
        if not 0.0 <= t_next <= 1.0:
            break
        if t_next == t:
            break
        t = t_next

    r_hit = r0 + t * hs
    w_acc = (
        K[0][2] * dp.weight(dp.P1, t)
        + K[2][2] * dp.weight(dp.P3, t)
        + K[3][2] * dp.weight(dp.P4, t)
        + K[4][2] * dp.weight(dp.P5, t)
        + K[5][2] * dp.weight(dp.P6, t)
        + K[6][2] * dp.weight(dp.P7, t)
    )
    return r_hit, (u_of(t), v_of(t), y0[2] + hs * t * w_acc)


# --- closed-form oracles for the linear family ---------------------------------


def closed_form_linear_center(lam: float, u0: float, r: float) -> float:
    """u(r) for h(u) = lam*u from a regular center: u0 sinh(x)/x, x = sqrt(lam) r."""
    x = math.sqrt(lam) * r
    if x < 1e-4:
        x2 = x * x
        return u0 * (1.0 + x2 / 6.0 + x2 * x2 / 120.0)
    return u0 * math.sinh(x) / x


def closed_form_linear_center_slope(lam: float, u0: float, r: float) -> float:
    """Radial derivative of the center closed form."""
    s = math.sqrt(lam)
    x = s * r
    if x < 1e-4:
        x2 = x * x
        return u0 * s * (x / 3.0 + x * x2 / 30.0)
    return u0 * s * (x * math.cosh(x) - math.sinh(x)) / (x * x)


def closed_form_linear_annulus(lam: float, rho: float, u0: float, r: float) -> float:
    """u(r) for h(u) = lam*u from a no-flux annulus start u(rho)=u0, u'(rho)=0."""
    s = math.sqrt(lam)
    d = s * (r - rho)
    return u0 * (rho * math.cosh(d) + math.sinh(d) / s) / r


def closed_form_linear_annulus_slope(lam: float, rho: float, u0: float, r: float) -> float:
    """Radial derivative of the annulus closed form."""
    s = math.sqrt(lam)
    d = s * (r - rho)
    value = u0 * (rho * math.cosh(d) + math.sinh(d) / s)
    dvalue = u0 * (rho * s * math.sinh(d) + math.cosh(d))
    return (dvalue * r - value) / (r * r)
