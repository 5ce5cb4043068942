import math

import numpy as np
import pytest

from trilayer.errors import NonPositiveInputs
from trilayer.evolution import (
    StructureState,
    classify_structure,
    evolve,
    radius_rhs,
    transition_times,
)
from trilayer.interfaces import R_q_star, R_star, R_sub_star, eta_of_R, rho_of_eta
from trilayer.stationary import critical_values, stationary_solution

SB = 2.0

ONE = StructureState.PROLIFERATING_ONE
TWO = StructureState.PROLIFERATING_QUIESCENT_TWO
THREE = StructureState.PROLIFERATING_QUIESCENT_NECROTIC_THREE
Q_ONE = StructureState.QUIESCENT_ONE
Q_TWO = StructureState.QUIESCENT_NECROTIC_TWO
NEC = StructureState.NECROTIC_ONE


class TestRadiusRhs:
    def test_zero_at_stationary(self, cfg):
        st = stationary_solution(cfg, SB)
        assert abs(radius_rhs(cfg, st.R_s, SB)) <= 1e-9 * st.R_s

    def test_necrotic_regime_exact(self, cfg):
        for R in (0.5, 3.0):
            assert radius_rhs(cfg, R, 0.1) == -(cfg.nu2 / 3.0) * R

    def test_bound(self, cfg):
        rng = np.random.default_rng(42)
        for _ in range(20):
            R = float(rng.uniform(0.1, 15.0))
            sb = float(rng.uniform(cfg.sigma_Q * 1.05, 4.0))
            cap = max(cfg.nu2, cfg.S(sb)) * R / 3.0
            assert abs(radius_rhs(cfg, R, sb)) <= cap * (1.0 + 1e-12)

    def test_nonpositive_radius(self, cfg):
        with pytest.raises(NonPositiveInputs):
            radius_rhs(cfg, 0.0, SB)


class TestClassify:
    def test_examples(self, cfg):
        cv = critical_values(cfg)
        sb = 2.0 * cv.sigma_star
        assert classify_structure(cfg, 0.5 * R_sub_star(cfg, sb), sb) is ONE
        assert classify_structure(cfg, 5.0, 0.5 * cfg.sigma_D) is NEC
        assert classify_structure(cfg, 2.0 * R_star(cfg, SB), SB) is THREE

    def test_boundaries_closed_below(self, cfg):
        assert classify_structure(cfg, R_sub_star(cfg, SB), SB) is ONE
        assert classify_structure(cfg, R_star(cfg, SB), SB) is TWO
        assert classify_structure(cfg, R_q_star(cfg, 0.4), 0.4) is Q_ONE
        assert classify_structure(cfg, 1.001 * R_q_star(cfg, 0.4), 0.4) is Q_TWO


class TestEvolve:
    def test_stationary_initial_data(self, cfg):
        st = stationary_solution(cfg, SB)
        traj = evolve(cfg, 50.0, R0=st.R_s, sigma_bar=SB, sample_dt=2.0)
        assert traj.events == ()
        assert traj.terminal.kind == "converged_to_stationary"
        for s in traj.samples:
            assert abs(s.R - st.R_s) <= 1e-9 * st.R_s

    def test_necrotic_decay_matches_closed_form(self, cfg):
        R0, sb = 2.0, 0.1
        traj = evolve(cfg, 10.0, R0=R0, sigma_bar=sb, sample_dt=0.25)
        for s in traj.samples:
            exact = R0 * math.exp(-cfg.nu2 * s.t / 3.0)
            assert abs(s.R - exact) <= 1e-9 * exact
            assert s.state is NEC
            assert s.rho is None and s.eta is None

    def test_two_event_shrinking_sequence(self, cfg):
        # supply in the one-layer regime, start above the top critical radius
        cv = critical_values(cfg)
        sb = 0.5 * (cfg.sigma_tilde + cv.sigma_sub_star)
        R0 = 2.0 * R_star(cfg, sb)
        traj = evolve(cfg, 100.0, R0=R0, sigma_bar=sb, sample_dt=2.0)
        assert [(e.from_state, e.to_state) for e in traj.events] == [
            (THREE, TWO),
            (TWO, ONE),
        ]
        t1, t2 = traj.events[0].t, traj.events[1].t
        assert 0.0 < t1 < t2

    def test_two_event_growing_sequence(self, cfg):
        cv = critical_values(cfg)
        sb = 1.3 * cv.sigma_star
        R0 = 0.5 * R_sub_star(cfg, sb)
        traj = evolve(cfg, 100.0, R0=R0, sigma_bar=sb, sample_dt=2.0)
        assert [(e.from_state, e.to_state) for e in traj.events] == [
            (ONE, TWO),
            (TWO, THREE),
        ]
        assert traj.events[0].t < traj.events[1].t

    def test_event_times_localized_on_critical_radii(self, cfg):
        cv = critical_values(cfg)
        sb = 1.3 * cv.sigma_star
        traj = evolve(cfg, 100.0, R0=0.5 * R_sub_star(cfg, sb), sigma_bar=sb, sample_dt=2.0)
        crit_by_event = {0: R_sub_star(cfg, sb), 1: R_star(cfg, sb)}
        event_samples = {s.t: s for s in traj.samples}
        for i, e in enumerate(traj.events):
            s = event_samples[e.t]
            assert s.R == pytest.approx(crit_by_event[i], rel=1e-9)

    def test_monotone_approach(self, cfg):
        st = stationary_solution(cfg, SB)
        up = evolve(cfg, 60.0, R0=0.3 * st.R_s, sigma_bar=SB, sample_dt=2.0)
        radii = [s.R for s in up.samples]
        assert all(b >= a for a, b in zip(radii, radii[1:]))
        assert all(r <= st.R_s * (1.0 + 1e-9) for r in radii)
        down = evolve(cfg, 60.0, R0=3.0 * st.R_s, sigma_bar=SB, sample_dt=2.0)
        radii = [s.R for s in down.samples]
        assert all(b <= a for a, b in zip(radii, radii[1:]))
        assert all(r >= st.R_s * (1.0 - 1e-9) for r in radii)

    def test_envelopes(self, cfg):
        R0, sb = 1.0, 3.0
        traj = evolve(cfg, 40.0, R0=R0, sigma_bar=sb, sample_dt=1.0)
        S3 = cfg.S(sb) / 3.0
        for s in traj.samples:
            lower = R0 * math.exp(-cfg.nu2 * s.t / 3.0)
            upper = R0 * math.exp(S3 * s.t)
            assert s.R >= lower * (1.0 - 1e-9)
            assert s.R <= upper * (1.0 + 1e-9)

    def test_inner_boundaries_consistent(self, cfg):
        traj = evolve(cfg, 30.0, R0=2.5 * R_star(cfg, SB), sigma_bar=SB, sample_dt=3.0)
        for s in traj.samples:
            if s.state is THREE:
                eta = eta_of_R(cfg, s.R, SB)
                assert abs(s.eta - eta) <= 1e-9 * max(1.0, eta)
                assert abs(s.rho - rho_of_eta(cfg, eta)) <= 1e-9 * max(1.0, s.rho)
            elif s.state is TWO:
                assert s.rho is None
                assert abs(s.eta - eta_of_R(cfg, s.R, SB)) <= 1e-9

    def test_quiescent_regime_event_and_extinction(self, cfg):
        # supply between the thresholds: one shedding event, then extinction
        sb = 0.4
        R0 = 1.6 * R_q_star(cfg, sb)
        traj = evolve(cfg, 170.0, R0=R0, sigma_bar=sb, sample_dt=4.0)
        assert [(e.from_state, e.to_state) for e in traj.events] == [(Q_TWO, Q_ONE)]
        assert traj.terminal.kind == "extinguishing"
        assert traj.samples[-1].R < 1e-3 * R0

    def test_extinction_below_sigma_tilde(self, cfg):
        traj = evolve(cfg, 220.0, R0=1.0, sigma_bar=0.8, sample_dt=5.0)
        radii = [s.R for s in traj.samples]
        assert all(b < a for a, b in zip(radii, radii[1:]))
        assert traj.samples[-1].R < 1e-3

    def test_nonpositive_inputs(self, cfg):
        with pytest.raises(NonPositiveInputs):
            evolve(cfg, -1.0)
        with pytest.raises(NonPositiveInputs):
            evolve(cfg, 10.0, R0=0.0)
        with pytest.raises(NonPositiveInputs):
            evolve(cfg, 10.0, sample_dt=-0.5)

    def test_sample_times_strictly_increasing(self, cfg):
        traj = evolve(cfg, 25.0, R0=1.0, sigma_bar=3.0, sample_dt=0.5)
        times = [s.t for s in traj.samples]
        assert all(b > a for a, b in zip(times, times[1:]))
        event_times = [e.t for e in traj.events]
        assert all(b > a for a, b in zip(event_times, event_times[1:]))
        sample_ts = set(times)
        assert all(t in sample_ts for t in event_times)


def test_transition_times_accessor(cfg):
    st = stationary_solution(cfg, SB)
    traj = evolve(cfg, 20.0, R0=st.R_s, sigma_bar=SB, sample_dt=2.0)
    assert transition_times(traj) == ()
    cv = critical_values(cfg)
    sb = 1.3 * cv.sigma_star
    r_sub, r_sup = R_sub_star(cfg, sb), R_star(cfg, sb)
    traj2 = evolve(cfg, 80.0, R0=0.5 * (r_sub + r_sup), sigma_bar=sb, sample_dt=2.0)
    events = transition_times(traj2)
    assert [(e.from_state, e.to_state) for e in events] == [(TWO, THREE)]
