"""Tumor-radius evolution R'(t) = R F(R, sigma_bar) with structure tracking.

The scalar radius ODE is integrated with the same embedded Dormand-Prince
5(4) pair as the radial arcs.  Each right-hand-side evaluation performs a full
inner profile solve (warm-started along the trajectory); the critical radii
for the fixed supply are computed once and reused, so detecting a structural
transition is a cheap scalar comparison per accepted step.  Crossings are
localized in t by bisection on the dense interpolant and recorded as ordered
transition events; samples are emitted on the sample_dt grid plus at every
event and at the final time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from . import _dopri as dp
from .errors import IntegrationError, NonPositiveInputs
from .interfaces import R_q_star, R_star, R_sub_star, _solve_structure
from .model import ValidatedConfig
from .stationary import TRIVIAL, _structure_growth, growth_functional, stationary_solution

__all__ = [
    "StructureState",
    "TrajectorySample",
    "TransitionEvent",
    "Terminal",
    "Trajectory",
    "radius_rhs",
    "classify_structure",
    "evolve",
    "transition_times",
]

CONVERGED = "converged_to_stationary"
EXTINGUISHING = "extinguishing"
TIME_BUDGET = "time_budget_reached"

_CONV_RADIUS_RTOL = 1e-9   # |R - R_s| <= this * R_s
_CONV_RHS_ATOL = 1e-12     # and |R F(R)| <= this
_EXTINCTION_FRACTION = 1e-12
_EVENT_T_RTOL = 1e-10


class StructureState(Enum):
    """The six structural states a growing or shrinking tumor can be in."""

    PROLIFERATING_ONE = "proliferating"
    PROLIFERATING_QUIESCENT_TWO = "proliferating_quiescent"
    PROLIFERATING_QUIESCENT_NECROTIC_THREE = "proliferating_quiescent_necrotic"
    QUIESCENT_ONE = "quiescent"
    QUIESCENT_NECROTIC_TWO = "quiescent_necrotic"
    NECROTIC_ONE = "necrotic"


@dataclass(frozen=True)
class TrajectorySample:
    """One trajectory point; rho/eta are None outside their regime."""

    t: float
    R: float
    rho: float | None
    eta: float | None
    state: StructureState


@dataclass(frozen=True)
class TransitionEvent:
    t: float
    from_state: StructureState
    to_state: StructureState


@dataclass(frozen=True)
class Terminal:
    """Why integration stopped; R_s set when converged to a stationary radius."""

    kind: str
    R_s: float | None = None


@dataclass(frozen=True)
class Trajectory:
    samples: tuple[TrajectorySample, ...]
    events: tuple[TransitionEvent, ...]
    terminal: Terminal


def radius_rhs(cfg: ValidatedConfig, R: float, sigma_bar: float | None = None) -> float:
    """Right-hand side of the radius ODE: R times the growth functional."""
    if R <= 0.0:
        raise NonPositiveInputs(f"R = {R} must be positive")
    return R * growth_functional(cfg, R, sigma_bar)


def classify_structure(
    cfg: ValidatedConfig, R: float, sigma_bar: float | None = None
) -> StructureState:
    """Structural state of a tumor of radius R at the given supply.

    Critical radii are assigned to the lower-complexity state (closed upper
    interval ends): R = R_sub_star is one-layer, R = R_star is two-layer,
    R = R_q_star is quiescent one-layer.
    """
    if R <= 0.0:
        raise NonPositiveInputs(f"R = {R} must be positive")
    sb = cfg.sigma_bar if sigma_bar is None else sigma_bar
    if sb <= cfg.sigma_D:
        return StructureState.NECROTIC_ONE
    if sb <= cfg.sigma_Q:
        if R <= R_q_star(cfg, sb):
            return StructureState.QUIESCENT_ONE
        return StructureState.QUIESCENT_NECROTIC_TWO
    if R <= R_sub_star(cfg, sb):
        return StructureState.PROLIFERATING_ONE
    if R <= R_star(cfg, sb):
        return StructureState.PROLIFERATING_QUIESCENT_TWO
    return StructureState.PROLIFERATING_QUIESCENT_NECROTIC_THREE


def transition_times(traj: Trajectory) -> tuple[TransitionEvent, ...]:
    """The ordered structural transition events of a trajectory."""
    return traj.events


class _Workspace:
    """Warm-started structure solves along one trajectory."""

    def __init__(self, cfg: ValidatedConfig, sigma_bar: float):
        self.cfg = cfg
        self.sigma_bar = sigma_bar
        self.guesses: dict = {}

    def structure(self, R: float):
        return _solve_structure(self.cfg, R, self.sigma_bar, self.guesses)

    def rhs(self, R: float) -> float:
        return R * _structure_growth(self.cfg, self.structure(R))

    def boundaries(self, R: float):
        s = self.structure(R)
        return s.rho, s.eta


def _dense_scalar(r0, h, y0, K, t):
    acc = (
        K[0] * dp.weight(dp.P1, t)
        + K[2] * dp.weight(dp.P3, t)
        + K[3] * dp.weight(dp.P4, t)
        + K[4] * dp.weight(dp.P5, t)
        + K[5] * dp.weight(dp.P6, t)
        + K[6] * dp.weight(dp.P7, t)
    )
    return y0 + h * t * acc


def evolve(
    cfg: ValidatedConfig,
    t_end: float,
    R0: float | None = None,
    sigma_bar: float | None = None,
    sample_dt: float | None = None,
    *,
    rtol: float = 1e-9,
    max_step: float | None = None,
    max_steps: int = 2_000_000,
) -> Trajectory:
    """Integrate the radius ODE to t_end, tracking structure and transitions.

    Samples fall on multiples of sample_dt (default t_end/100) plus every
    transition event and the final time.  Integration stops early only when
    the radius extinguishes below 1e-12 of R0 (possible for supplies at or
    below sigma_tilde); the terminal field classifies the end state as
    converged, extinguishing or time-budget-reached.

    ``max_step`` (default t_end/50) bounds the step size: near a stationary
    radius unbounded steps would amplify the tiny evaluation noise of the
    growth functional into visible drift.
    """
    R0 = cfg.R0 if R0 is None else R0
    sb = cfg.sigma_bar if sigma_bar is None else sigma_bar
    if sample_dt is None:
        sample_dt = t_end / 100.0 if t_end > 0.0 else 0.0
    if R0 <= 0.0 or t_end <= 0.0 or sample_dt <= 0.0:
        raise NonPositiveInputs(
            f"R0 = {R0}, t_end = {t_end}, sample_dt = {sample_dt} must all be positive"
        )
    if max_step is None:
        max_step = t_end / 50.0

    ws = _Workspace(cfg, sb)

    # critical radii for event detection, precomputed once for this supply
    if sb > cfg.sigma_Q:
        crits = [R_sub_star(cfg, sb), R_star(cfg, sb)]
    elif sb > cfg.sigma_D:
        crits = [R_q_star(cfg, sb)]
    else:
        crits = []

    st = stationary_solution(cfg, sb)
    R_s = None if st.kind == TRIVIAL else st.R_s
    extinguishable = sb <= cfg.sigma_tilde

    samples: list[TrajectorySample] = []
    events: list[TransitionEvent] = []

    def classify(R: float) -> StructureState:
        return classify_structure(cfg, R, sb)

    def emit(t: float, R: float) -> None:
        if samples and t <= samples[-1].t:
            return
        rho, eta = ws.boundaries(R)
        samples.append(TrajectorySample(t, R, rho, eta, classify(R)))

    t, R = 0.0, R0
    emit(t, R)
    cur_state = samples[0].state
    next_sample = sample_dt

    k1 = ws.rhs(R)
    # initial step: standard two-stage heuristic on the scalar problem
    sc = rtol * max(abs(R), 1e-30)
    d0, d1 = abs(R) / sc, abs(k1) / sc
    h = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h = min(h, t_end)
    R_probe = R + h * k1
    if R_probe > 0.0:
        d2 = abs(ws.rhs(R_probe) - k1) / sc / h
        dm = max(d1, d2)
        h1 = max(1e-6, h * 1e-3) if dm <= 1e-15 else (0.01 / dm) ** 0.2
        h = min(100.0 * h, h1, t_end)
    h = min(h, max_step)

    terminal: Terminal | None = None

    for _ in range(max_steps):
        if t >= t_end:
            break
        if h < 1e-14 * max(1.0, t):
            raise IntegrationError(f"time step underflow at t = {t}")
        h = min(h, max_step)
        if t + h > t_end:
            h = t_end - t

        y2 = R + h * (dp.A21 * k1)
        k2 = ws.rhs(y2)
        y3 = R + h * (dp.A31 * k1 + dp.A32 * k2)
        k3 = ws.rhs(y3)
        y4 = R + h * (dp.A41 * k1 + dp.A42 * k2 + dp.A43 * k3)
        k4 = ws.rhs(y4)
        y5 = R + h * (dp.A51 * k1 + dp.A52 * k2 + dp.A53 * k3 + dp.A54 * k4)
        k5 = ws.rhs(y5)
        y6 = R + h * (dp.A61 * k1 + dp.A62 * k2 + dp.A63 * k3 + dp.A64 * k4 + dp.A65 * k5)
        k6 = ws.rhs(y6)
        R1 = R + h * (dp.B1 * k1 + dp.B3 * k3 + dp.B4 * k4 + dp.B5 * k5 + dp.B6 * k6)
        if R1 <= 0.0 or y2 <= 0.0 or y3 <= 0.0 or y4 <= 0.0 or y5 <= 0.0 or y6 <= 0.0:
            h *= 0.3
            continue
        k7 = ws.rhs(R1)
        err_raw = h * (
            dp.E1 * k1 + dp.E3 * k3 + dp.E4 * k4 + dp.E5 * k5 + dp.E6 * k6 + dp.E7 * k7
        )
        scale = rtol * max(abs(R), abs(R1))
        err = abs(err_raw) / scale if scale > 0.0 else 0.0
        if err > 1.0:
            h *= dp.step_factor(err)
            continue

        t_new = t + h
        K = (k1, k2, k3, k4, k5, k6, k7)

        # structural transitions inside this step (R is monotone along it)
        crossings = []
        for crit in crits:
            above0 = R > crit
            above1 = R1 > crit
            if above0 != above1:
                lo, hi = 0.0, 1.0
                while (hi - lo) * h > _EVENT_T_RTOL * max(1.0, t + hi * h):
                    mid = 0.5 * (lo + hi)
                    if (_dense_scalar(t, h, R, K, mid) > crit) == above1:
                        hi = mid
                    else:
                        lo = mid
                crossings.append((t + hi * h, crit))
        crossings.sort()

        for idx, (t_ev, crit) in enumerate(crossings):
            while next_sample < t_ev * (1.0 - 1e-15):
                emit(next_sample, _dense_scalar(t, h, R, K, (next_sample - t) / h))
                next_sample += sample_dt
            emit(t_ev, crit)
            t_after = crossings[idx + 1][0] if idx + 1 < len(crossings) else t_new
            R_after = _dense_scalar(t, h, R, K, (0.5 * (t_ev + t_after) - t) / h)
            new_state = classify(R_after)
            if new_state != cur_state:
                events.append(TransitionEvent(t_ev, cur_state, new_state))
                cur_state = new_state

        while next_sample <= t_new * (1.0 + 1e-15) and next_sample <= t_end:
            emit(next_sample, _dense_scalar(t, h, R, K, min(1.0, (next_sample - t) / h)))
            next_sample += sample_dt

        t, R, k1 = t_new, R1, k7

        if extinguishable and R < _EXTINCTION_FRACTION * R0:
            terminal = Terminal(EXTINGUISHING)
            break

        h *= dp.step_factor(err)
    else:
        raise IntegrationError(f"exceeded {max_steps} time steps")

    emit(t, R)
    if terminal is None:
        if (
            R_s is not None
            and abs(R - R_s) <= _CONV_RADIUS_RTOL * R_s
            and abs(k1) <= _CONV_RHS_ATOL
        ):
            terminal = Terminal(CONVERGED, R_s=R_s)
        elif extinguishable and R < _EXTINCTION_FRACTION * R0:
            terminal = Terminal(EXTINGUISHING)
        else:
            terminal = Terminal(TIME_BUDGET)

    return Trajectory(tuple(samples), tuple(events), terminal)
