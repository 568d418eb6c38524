"""Monitors, energy budgets, decay fits, and the comparison-lemma checks."""

import math

import numpy as np
import pytest

from swsim import (
    BodyFrameState,
    BoundConstants,
    DecayFit,
    GronwallInstance,
    SwarmState,
    WeightedGraph,
    body_transform,
    consensus_distance,
    demean,
    dwell_free_schedule,
    energy_bound,
    fit_exponential_decay,
    gronwall_check,
    integrate,
    monitor_values,
    output_energy,
    phase_consistency_check,
    sliding_window_energy,
    switched_energy_cumulative,
    trajectory_channels,
    virtual_output_heading,
    virtual_output_joint,
    window_energy_trend,
)
from swsim.selftest import (
    gronwall_constant_growth,
    gronwall_forward_instance,
    gronwall_suite,
)

T = math.pi


@pytest.fixture(scope="module")
def short_run(chain_family, unit_gains, benchmark_profile):
    sched = dwell_free_schedule(T)
    rng = np.random.default_rng(19)
    init = SwarmState(rng.uniform(-8, 8, 4), rng.uniform(-8, 8, 4), rng.uniform(-8, 8, 4))
    return integrate("world", sched, chain_family, unit_gains, benchmark_profile,
                     init, 0.0, 6.0, 1e-3)


def test_demean_removes_mean():
    v = np.array([1.0, 2.0, 6.0])
    out = demean(v)
    assert abs(out.sum()) < 1e-14
    assert np.allclose(out, [-2.0, -1.0, 3.0], atol=1e-14)
    rows = demean(np.array([[1.0, 3.0], [10.0, 14.0]]))
    assert np.allclose(rows, [[-1.0, 1.0], [-2.0, 2.0]], atol=1e-14)


def test_consensus_distance_hand_case():
    b = BodyFrameState(np.array([1.0, 3.0]), np.array([2.0, 2.0]), np.array([0.0, 0.0]))
    assert consensus_distance(b) == pytest.approx(math.sqrt(2.0), abs=1e-14)


def test_monitor_values_hand_case():
    b = BodyFrameState(np.array([1.0, -1.0]), np.array([2.0, 0.0]), np.array([0.5, -0.5]))
    mon = monitor_values(b)
    assert mon.heading == pytest.approx(0.5, abs=1e-14)  # (0.5)^2 + (-0.5)^2
    assert mon.position == pytest.approx(6.0, abs=1e-14)
    # centered x: (1, -1), centered y: (1, -1), centered theta: (0.5, -0.5)
    assert mon.distance_sq == pytest.approx(4.5, abs=1e-14)


def test_virtual_output_heading_single_edge():
    g = WeightedGraph.from_edges(2, [(0, 1, 1.0)])
    th = demean(np.array([0.0, math.pi / 2]))
    out = virtual_output_heading(th, g, kw=1.0)
    # theta' L theta = (pi/2)^2 for the single unit edge
    assert out == pytest.approx(math.pi / math.sqrt(2.0), abs=1e-12)


def test_virtual_output_joint_components():
    g = WeightedGraph.from_edges(2, [(0, 1, 1.0)])
    out = virtual_output_joint(np.array([1.0, -1.0]), np.array([0.2, 0.8]), g, kv=2.0)
    assert out[0] == pytest.approx(4.0, abs=1e-12)  # sqrt(2*2*(2)^2)
    assert out[1] == pytest.approx(math.sqrt(2 * 0.3**2), abs=1e-12)


def test_channels_match_pointwise_definitions(short_run):
    ch = trajectory_channels(short_run)
    i = short_run.n_samples // 3
    b = short_run.body_state(i)
    mon = monitor_values(b)
    assert ch["heading_energy"][i] == pytest.approx(mon.heading, rel=1e-12)
    assert ch["position_energy"][i] == pytest.approx(mon.position, rel=1e-12)
    assert ch["dist_sq"][i] == pytest.approx(mon.distance_sq, rel=1e-12)
    assert ch["dist"][i] == pytest.approx(consensus_distance(b), rel=1e-12)
    g = short_run.family[int(short_run.modes[i])]
    h1 = virtual_output_heading(demean(short_run.theta[i]), g, short_run.params.kw)
    assert ch["h1"][i] == pytest.approx(h1, rel=1e-10)
    joint = virtual_output_joint(short_run.body_x[i], short_run.theta[i], g,
                                 short_run.params.kv)
    assert ch["h_norm_sq"][i] == pytest.approx(float(joint @ joint), rel=1e-10)


def test_switched_cumulative_matches_plain_trapezoid_without_switches(
    chain_family, unit_gains, benchmark_profile
):
    from swsim import constant_schedule

    init = SwarmState(np.array([1.0, -2.0, 0.5, 3.0]), np.zeros(4),
                      np.array([0.3, -0.2, 0.1, 0.0]))
    traj = integrate("world", constant_schedule(1), chain_family, unit_gains,
                     benchmark_profile, init, 0.0, 2.0, 1e-3)
    ch = trajectory_channels(traj)
    cum = switched_energy_cumulative(traj)
    dt = np.diff(traj.times)
    plain = np.concatenate([[0.0], np.cumsum(
        0.5 * dt * (ch["h1"][1:] ** 2 + ch["h1"][:-1] ** 2))])
    assert np.abs(cum["h1_sq"] - plain).max() < 1e-12


def test_heading_budget_positive_on_moderate_window(short_run):
    rep = output_energy(short_run, "h1", 0.5, 5.5)
    assert rep.integral > 0.0
    assert rep.slack >= -1e-9, rep
    assert rep.constants_source == "exact"


def test_output_energy_validation(short_run):
    with pytest.raises(ValueError):
        output_energy(short_run, "h2", 0.0, 1.0)
    with pytest.raises(ValueError):
        output_energy(short_run, "h1", 5.0, 1.0)
    with pytest.raises(ValueError):
        output_energy(short_run, "h", 0.0, 1.0)  # needs constants


def test_sliding_window_energy_decreases(short_run):
    starts, vals = sliding_window_energy(short_run, "h1", 1.0)
    assert starts.size == vals.size
    assert np.all(vals >= -1e-12)
    # dissipation output dies down as headings agree
    assert vals[-1] < vals[0]


def test_window_energy_trend():
    assert window_energy_trend(np.array([4.0, 1.0, 3e-3]), drop_factor=1e-3)
    assert not window_energy_trend(np.array([4.0, 3.9]), drop_factor=1e-3)
    with pytest.raises(ValueError):
        window_energy_trend(np.array([1.0]))


def test_fit_exponential_decay_recovers_parameters():
    t = np.linspace(0.0, 12.0, 400)
    channel = 3.0 * np.exp(-0.7 * t)
    fit = fit_exponential_decay(t, channel)
    assert fit.rate == pytest.approx(0.7, abs=1e-9)
    assert fit.amplitude == pytest.approx(1.0, abs=1e-9)  # clipped from below
    assert fit.log_residual_rms < 1e-10
    assert fit.samples_used == 400


def test_fit_exponential_decay_overshoot_amplitude():
    t = np.linspace(0.0, 10.0, 300)
    channel = 2.0 * np.exp(-0.5 * t) + 0.5 * np.exp(-4.0 * t)
    fit = fit_exponential_decay(t, channel)
    assert fit.amplitude >= 1.0
    assert 0.3 < fit.rate < 1.0


def test_fit_exponential_decay_edge_cases():
    t = np.linspace(0.0, 1.0, 50)
    fit = fit_exponential_decay(t, np.full(50, 1e-15))
    assert math.isinf(fit.rate)
    with pytest.raises(ValueError):
        fit_exponential_decay(t, np.concatenate([np.ones(5), np.full(45, 1e-15)]))


def test_bound_constants_validation():
    with pytest.raises(ValueError):
        BoundConstants(amplitude=0.5, rate=1.0, coupling_gain=1.0, n=2, kv=1.0,
                       kw=1.0, abs_excitation_per_period=1.0)
    with pytest.raises(ValueError):
        BoundConstants(amplitude=1.0, rate=-1.0, coupling_gain=1.0, n=2, kv=1.0,
                       kw=1.0, abs_excitation_per_period=1.0)


def test_energy_bound_zero_headings_reduces_to_position_energy():
    consts = BoundConstants(amplitude=2.0, rate=0.5, coupling_gain=3.0, n=2,
                            kv=1.0, kw=1.0, abs_excitation_per_period=1.0)
    b = BodyFrameState(np.array([1.0, 2.0]), np.array([0.0, 1.0]), np.zeros(2))
    assert energy_bound(b, consts) == pytest.approx(6.0, abs=1e-12)


def test_energy_bound_overflows_to_infinity():
    consts = BoundConstants(amplitude=1.0, rate=1e-6, coupling_gain=10.0, n=2,
                            kv=1.0, kw=1.0, abs_excitation_per_period=1.0)
    b = BodyFrameState(np.ones(2), np.ones(2), np.full(2, 50.0))
    assert math.isinf(energy_bound(b, consts))


def test_envelopes_finite_at_moderate_state():
    consts = BoundConstants(amplitude=1.5, rate=0.4, coupling_gain=2.0, n=4,
                            kv=1.0, kw=1.0, abs_excitation_per_period=15.7)
    b = BodyFrameState(np.ones(4), np.zeros(4), np.full(4, 0.1))
    assert consts.position_envelope(b) > math.sqrt(5.0)
    assert consts.heading_envelope(b) > 0.0
    assert np.isfinite(consts.state_envelope(b))


def test_gronwall_constant_growth_is_equality():
    inst, closed = gronwall_constant_growth(lam=0.6, a10=1.2, span=3.0)
    verdict = gronwall_check(inst)
    assert verdict.state_bound_ok and verdict.energy_bound_ok
    fwd = inst.alpha3_tail[0] - inst.alpha3_tail
    err = np.abs(np.exp(fwd) * (1.0 + closed[0]) - 1.0 - closed).max()
    assert err < 1e-8
    assert abs(verdict.state_margin) < 1e-8


def test_gronwall_forward_instances_pass():
    rng = np.random.default_rng(4)
    for _ in range(20):
        verdict = gronwall_check(gronwall_forward_instance(rng))
        assert verdict.state_bound_ok, verdict
        assert verdict.energy_bound_ok, verdict


def test_gronwall_suite_all_green():
    lines = gronwall_suite(np.random.default_rng(0), 30)
    for line in lines:
        assert line.ok, line.render()


def test_gronwall_premise_violation_raises():
    t = np.linspace(0.0, 1.0, 20)
    a1 = np.exp(5.0 * t) - 1.0  # grows much faster than alpha3 allows
    inst = GronwallInstance.from_samples(t, a1, np.zeros(20), np.full(20, 0.01))
    with pytest.raises(ValueError):
        gronwall_check(inst)


def test_gronwall_instance_validation():
    t = np.linspace(0.0, 1.0, 5)
    with pytest.raises(ValueError):
        GronwallInstance.from_samples(t, -np.ones(5), np.zeros(5), np.zeros(5))
    with pytest.raises(ValueError):
        GronwallInstance.from_samples(t[::-1], np.ones(5), np.zeros(5), np.zeros(5))


def test_phase_consistency_admissible_profile_rejects(benchmark_profile):
    # segment integral 2.5 pi sits off the pi grid, so no nonzero residual
    # can satisfy both boundary conditions at any phase
    for phase in np.linspace(0.0, 2.0 * math.pi, 25):
        for m in (0, 1, 2, 3):
            res = phase_consistency_check(benchmark_profile, 1.0, float(phase), m)
            assert not res.boundary_consistent


def test_phase_consistency_resonant_profile_accepts():
    from swsim import ExcitationProfile

    bad = ExcitationProfile.constant(t_small=T, t_big=3.0 * T, value=2.0)
    res = phase_consistency_check(bad, 0.7, 0.0, 0)
    assert res.boundary_consistent
    assert res.residual_start < 1e-12 and res.residual_end < 1e-12
    res_odd = phase_consistency_check(bad, 0.7, 0.0, 1)
    assert res_odd.boundary_consistent


def test_phase_consistency_zero_amplitude_always_consistent(benchmark_profile):
    res = phase_consistency_check(benchmark_profile, 0.0, 1.3, 2)
    assert res.boundary_consistent
    with pytest.raises(ValueError):
        phase_consistency_check(benchmark_profile, -1.0, 0.0, 0)
