"""Run-time verification monitors for the consensus loop.

These functions evaluate, along simulated trajectories, the quantities that
the convergence argument manipulates analytically: distance to the consensus
set, the heading disagreement energy and its dissipation output, the joint
virtual output of the position loop, comparison-lemma instances, exponential
decay fits, and the phase-consistency test that rules out nonvanishing
oscillatory residuals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .dynamics import BodyFrameState, ControllerParams, ExcitationProfile, Trajectory
from .graphs import GraphFamily, WeightedGraph, laplacian

__all__ = [
    "Monitors",
    "EnergyReport",
    "DecayFit",
    "BoundConstants",
    "GronwallInstance",
    "GronwallVerdict",
    "PhaseConsistency",
    "demean",
    "consensus_distance",
    "monitor_values",
    "virtual_output_heading",
    "virtual_output_joint",
    "trajectory_channels",
    "switched_energy_cumulative",
    "output_energy",
    "energy_bound",
    "fit_exponential_decay",
    "gronwall_check",
    "phase_consistency_check",
    "sliding_window_energy",
    "window_energy_trend",
]

#: Fitted decay factors below this floor are clipped up to it.
_DECAY_AMPLITUDE_FLOOR = 1.0

_EXP_OVERFLOW = 700.0  # exp argument beyond which we report +inf


def demean(values: np.ndarray) -> np.ndarray:
    """Remove the average across agents (the centered disagreement vector)."""
    values = np.asarray(values, dtype=float)
    return values - values.mean(axis=-1, keepdims=True)


def consensus_distance(b: BodyFrameState) -> float:
    """Euclidean distance of a body-frame state to the consensus set.

    The consensus set is the subspace where all agents share one body-frame
    position and one heading; the distance is the root sum of squares of the
    three centered components.
    """
    return float(
        math.sqrt(
            np.sum(demean(b.x) ** 2)
            + np.sum(demean(b.y) ** 2)
            + np.sum(demean(b.theta) ** 2)
        )
    )


class Monitors(NamedTuple):
    """The three scalar energies tracked by the convergence argument."""

    heading: float   # squared norm of the centered headings
    position: float  # squared norm of all positions
    distance_sq: float  # squared distance to the consensus set


def monitor_values(b: BodyFrameState) -> Monitors:
    heading = float(np.sum(demean(b.theta) ** 2))
    position = float(np.sum(b.x**2) + np.sum(b.y**2))
    return Monitors(heading, position, consensus_distance(b) ** 2)


def virtual_output_heading(theta_centered: np.ndarray, g: WeightedGraph, kw: float) -> float:
    """Dissipation output of the heading loop: sqrt(2 kw theta' L theta).

    Its square is exactly the decay rate of the heading energy under the
    active graph. The quadratic form is clipped at zero; a value below the
    negative roundoff floor raises, since the Laplacian is positive
    semidefinite.
    """
    theta_centered = np.asarray(theta_centered, dtype=float)
    q = 2.0 * kw * float(theta_centered @ laplacian(g) @ theta_centered)
    if q < -1e-12:
        raise ValueError(f"negative Laplacian quadratic form {q}")
    return math.sqrt(max(q, 0.0))


def virtual_output_joint(
    x_body: np.ndarray, theta: np.ndarray, g: WeightedGraph, kv: float
) -> np.ndarray:
    """Two-component virtual output of the full loop.

    First component sqrt(2 kv x' L x) over body-frame positions, second the
    norm of the centered headings. Persistent excitation drives the state to
    consensus exactly when this output is driven to zero.
    """
    x_body = np.asarray(x_body, dtype=float)
    q = 2.0 * kv * float(x_body @ laplacian(g) @ x_body)
    if q < -1e-12:
        raise ValueError(f"negative Laplacian quadratic form {q}")
    return np.array([math.sqrt(max(q, 0.0)), float(np.linalg.norm(demean(theta)))])


def trajectory_channels(traj: Trajectory) -> dict[str, np.ndarray]:
    """Vectorized per-sample monitors for a whole trajectory.

    Returns arrays keyed ``dist``, ``heading_energy``, ``position_energy``,
    ``dist_sq``, ``h1`` (heading dissipation output) and ``h_norm_sq``
    (squared norm of the joint output), each of length ``traj.n_samples``.
    The outputs use the mode recorded at each sample.
    """
    bx, by, th = traj.body_x, traj.body_y, traj.theta
    cx, cy, cth = demean(bx), demean(by), demean(th)
    heading_energy = np.sum(cth**2, axis=1)
    position_energy = np.sum(bx**2, axis=1) + np.sum(by**2, axis=1)
    dist_sq = np.sum(cx**2, axis=1) + np.sum(cy**2, axis=1) + heading_energy

    kv, kw = traj.params.kv, traj.params.kw
    h1_sq = np.empty(traj.n_samples)
    xlx = np.empty(traj.n_samples)
    for m in np.unique(traj.modes):
        sel = traj.modes == m
        lap = laplacian(traj.family[int(m)])
        h1_sq[sel] = 2.0 * kw * np.einsum("ti,ij,tj->t", cth[sel], lap, cth[sel])
        xlx[sel] = 2.0 * kv * np.einsum("ti,ij,tj->t", bx[sel], lap, bx[sel])
    h1_sq = np.clip(h1_sq, 0.0, None)
    xlx = np.clip(xlx, 0.0, None)
    return {
        "dist": np.sqrt(dist_sq),
        "dist_sq": dist_sq,
        "heading_energy": heading_energy,
        "position_energy": position_energy,
        "h1": np.sqrt(h1_sq),
        "h_norm_sq": xlx + heading_energy,
    }


def switched_energy_cumulative(traj: Trajectory) -> dict[str, np.ndarray]:
    """Cumulative integrals of the squared outputs, mode-correct per interval.

    Trapezoid on the sample grid, with both endpoints of every interval
    evaluated through the quadratic form of the mode active on that interval.
    The grid is event-aligned, so a sample sitting on a switch instant
    contributes its left-limit output to the interval it closes; that is the
    value the dissipation identities integrate. Per-sample channels, by
    contrast, report the right-continuous mode.

    Returns length ``n_samples`` arrays keyed ``h1_sq`` and ``h_norm_sq``
    holding integrals from the first sample to each sample.
    """
    bx, th = traj.body_x, traj.theta
    cth = demean(th)
    heading_energy = np.sum(cth**2, axis=1)
    kv, kw = traj.params.kv, traj.params.kw
    interval_modes = np.asarray(traj.modes)[:-1]
    n_int = interval_modes.size
    head_l = np.empty(n_int)
    head_r = np.empty(n_int)
    pos_l = np.empty(n_int)
    pos_r = np.empty(n_int)
    for m in np.unique(interval_modes):
        li = np.nonzero(interval_modes == m)[0]
        lap = laplacian(traj.family[int(m)])
        head_l[li] = 2.0 * kw * np.einsum("ti,ij,tj->t", cth[li], lap, cth[li])
        head_r[li] = 2.0 * kw * np.einsum("ti,ij,tj->t", cth[li + 1], lap, cth[li + 1])
        pos_l[li] = 2.0 * kv * np.einsum("ti,ij,tj->t", bx[li], lap, bx[li])
        pos_r[li] = 2.0 * kv * np.einsum("ti,ij,tj->t", bx[li + 1], lap, bx[li + 1])
    half_dt = 0.5 * np.diff(traj.times)
    seg_h1 = half_dt * (np.clip(head_l, 0.0, None) + np.clip(head_r, 0.0, None))
    seg_joint = half_dt * (
        np.clip(pos_l, 0.0, None)
        + heading_energy[:-1]
        + np.clip(pos_r, 0.0, None)
        + heading_energy[1:]
    )
    return {
        "h1_sq": np.concatenate([[0.0], np.cumsum(seg_h1)]),
        "h_norm_sq": np.concatenate([[0.0], np.cumsum(seg_joint)]),
    }


@dataclass(frozen=True)
class DecayFit:
    """Log-linear least-squares fit of an exponential envelope.

    Models channel(t) <= amplitude * exp(-rate * (t - t0)) * channel(t0).
    ``rate`` is +inf when the channel starts below the numerical floor.
    """

    amplitude: float
    rate: float
    log_residual_rms: float
    samples_used: int


def fit_exponential_decay(
    times: np.ndarray, channel: np.ndarray, floor: float = 1e-12
) -> DecayFit:
    """Fit amplitude and rate from samples of a decaying positive channel.

    Samples at or below ``floor`` are dropped; at least 10 must remain. The
    amplitude is clipped from below to 1 so the fitted envelope is a valid
    overshoot factor at the initial time.
    """
    times = np.asarray(times, dtype=float)
    channel = np.asarray(channel, dtype=float)
    if times.shape != channel.shape or times.ndim != 1:
        raise ValueError("times and channel must be matching 1-d arrays")
    if channel[0] <= floor:
        return DecayFit(amplitude=_DECAY_AMPLITUDE_FLOOR, rate=math.inf,
                        log_residual_rms=0.0, samples_used=0)
    mask = channel > floor
    if int(mask.sum()) < 10:
        raise ValueError("need at least 10 samples above the floor to fit a decay")
    t = times[mask]
    logc = np.log(channel[mask])
    slope, intercept = np.polyfit(t, logc, 1)
    rate = -float(slope)
    log_amp = float(intercept + slope * times[0] - math.log(channel[0]))
    amplitude = max(math.exp(log_amp), _DECAY_AMPLITUDE_FLOOR)
    resid = logc - (intercept + slope * t)
    return DecayFit(
        amplitude=amplitude,
        rate=rate,
        log_residual_rms=float(np.sqrt(np.mean(resid**2))),
        samples_used=int(mask.sum()),
    )


@dataclass(frozen=True)
class BoundConstants:
    """Constants of the boundedness and energy estimates.

    ``amplitude`` and ``rate`` are the exponential-envelope constants of the
    heading disagreement (fitted from data in practice, which ``source``
    records). ``coupling_gain`` is the induced gain of the heading-to-position
    coupling: 2 sqrt(2) * amplitude * n * kv * max mode Laplacian norm.
    """

    amplitude: float
    rate: float
    coupling_gain: float
    n: int
    kv: float
    kw: float
    abs_excitation_per_period: float
    source: str = "fitted"

    def __post_init__(self):
        if not (self.amplitude >= 1.0 and self.rate > 0.0):
            raise ValueError("need amplitude >= 1 and a positive decay rate")
        if not (self.coupling_gain > 0.0):
            raise ValueError("coupling gain must be positive")

    @classmethod
    def from_fit(
        cls,
        fit: DecayFit,
        family: GraphFamily,
        params: ControllerParams,
        prof: ExcitationProfile,
    ) -> "BoundConstants":
        max_lap = max(
            float(np.linalg.norm(laplacian(family[m]), 2)) for m in family.modes
        )
        gain = 2.0 * math.sqrt(2.0) * fit.amplitude * family.n * params.kv * max_lap
        return cls(
            amplitude=fit.amplitude,
            rate=fit.rate,
            coupling_gain=gain,
            n=family.n,
            kv=params.kv,
            kw=params.kw,
            abs_excitation_per_period=prof.abs_integral_per_period(),
            source="fitted",
        )

    def _exp_factor(self, theta_norm: float) -> float:
        arg = self.coupling_gain * theta_norm / (2.0 * self.rate)
        if arg > _EXP_OVERFLOW:
            return math.inf
        return math.exp(arg)

    def position_envelope(self, b: BodyFrameState) -> float:
        """Forward bound on sqrt(1 + position energy), may be +inf."""
        u = float(np.sum(b.x**2) + np.sum(b.y**2))
        theta_norm = float(np.linalg.norm(b.theta))
        return self._exp_factor(theta_norm) * math.sqrt(1.0 + u)

    def heading_envelope(self, b: BodyFrameState) -> float:
        """Forward bound on the heading norm."""
        theta_norm = float(np.linalg.norm(b.theta))
        return (self.amplitude + 1.0) * theta_norm + math.sqrt(
            self.n
        ) * self.abs_excitation_per_period

    def state_envelope(self, b: BodyFrameState) -> float:
        """Forward bound on the full state norm from time s onward."""
        f1 = self.position_envelope(b)
        f2 = self.heading_envelope(b)
        if math.isinf(f1):
            return math.inf
        return math.hypot(f1, f2)


def energy_bound(b: BodyFrameState, consts: BoundConstants) -> float:
    """Budget for the future integral of the squared joint output from s.

    Evaluated on the state at the window start: position energy plus the
    coupling and heading terms weighted by the envelope constants. Reported
    as +inf when the envelope's exponential overflows; infinity is a valid
    (if vacuous) budget.
    """
    u = float(np.sum(b.x**2) + np.sum(b.y**2))
    theta_norm = float(np.linalg.norm(b.theta))
    f1 = consts.position_envelope(b)
    f1_sq = f1 * f1
    if math.isinf(f1_sq):
        return math.inf
    return (
        u
        + (consts.coupling_gain / consts.rate) * theta_norm * (1.0 + f1_sq)
        + (consts.amplitude**2 / (2.0 * consts.rate)) * theta_norm**2
    )


@dataclass(frozen=True)
class EnergyReport:
    """Windowed output energy against its analytic budget."""

    which: str
    window: tuple[float, float]
    integral: float
    bound: float
    slack: float
    constants_source: str


def output_energy(
    traj: Trajectory,
    which: str,
    s: float,
    t: float,
    consts: BoundConstants | None = None,
) -> EnergyReport:
    """Mode-correct trapezoid energy of an output over [s, t] with its budget.

    ``which`` is "h1" (heading dissipation output, budgeted by the heading
    energy at s) or "h" (joint output, budgeted by ``energy_bound`` and
    requiring ``consts``). Quadrature runs on the trajectory's own grid via
    ``switched_energy_cumulative``; the window snaps to the samples nearest
    s from above and t from below.
    """
    if which not in ("h1", "h"):
        raise ValueError("which must be 'h1' or 'h'")
    times = traj.times
    if not (times[0] <= s < t <= times[-1] + 1e-12):
        raise ValueError(f"window [{s}, {t}] outside trajectory span")
    cum = switched_energy_cumulative(traj)["h1_sq" if which == "h1" else "h_norm_sq"]
    lo = int(np.searchsorted(times, s, side="left"))
    hi = int(np.searchsorted(times, t, side="right")) - 1
    integral = float(cum[hi] - cum[lo])
    if which == "h1":
        cth = demean(traj.theta[lo])
        bound = float(np.sum(cth**2))
        source = "exact"
    else:
        if consts is None:
            raise ValueError("the joint output budget needs BoundConstants")
        bound = energy_bound(traj.body_state(lo), consts)
        source = consts.source
    return EnergyReport(
        which=which,
        window=(float(times[lo]), float(times[hi])),
        integral=integral,
        bound=float(bound),
        slack=float(bound - integral),
        constants_source=source,
    )


def sliding_window_energy(
    traj: Trajectory, which: str, window: float
) -> tuple[np.ndarray, np.ndarray]:
    """Energy of an output over [t, t + window] for every eligible sample t.

    Implemented with one cumulative trapezoid pass and linear interpolation
    at the right endpoints, so the whole series costs the same as a single
    integral.
    """
    if which not in ("h1", "h"):
        raise ValueError("which must be 'h1' or 'h'")
    if not (window > 0.0):
        raise ValueError("window must be positive")
    times = traj.times
    cum = switched_energy_cumulative(traj)["h1_sq" if which == "h1" else "h_norm_sq"]
    starts = times[times + window <= times[-1] + 1e-12]
    if starts.size == 0:
        raise ValueError("trajectory shorter than one window")
    ends = np.minimum(starts + window, times[-1])
    values = np.interp(ends, times, cum) - np.interp(starts, times, cum)
    return starts, values


def window_energy_trend(values: np.ndarray, drop_factor: float = 1e-3) -> bool:
    """Decreasing-trend verdict: the last window is far below the first."""
    values = np.asarray(values, dtype=float)
    if values.size < 2:
        raise ValueError("need at least two windows")
    return bool(values[-1] <= drop_factor * values[0])


@dataclass(frozen=True)
class GronwallInstance:
    """Sampled data for the comparison-lemma check.

    ``alpha1`` is the tracked nonnegative scalar, ``alpha2`` the dissipated
    density, and ``alpha3`` the perturbation density, all sampled on ``times``.
    ``alpha3_tail[i]`` and ``alpha2_tail[i]`` hold the integrals of the
    densities from times[i] to the end of the grid; constructors populate
    them from high-resolution quadrature so that check tolerances are not
    dominated by grid coarseness.
    """

    times: np.ndarray = field(repr=False)
    alpha1: np.ndarray = field(repr=False)
    alpha2: np.ndarray = field(repr=False)
    alpha3: np.ndarray = field(repr=False)
    alpha2_tail: np.ndarray = field(repr=False)
    alpha3_tail: np.ndarray = field(repr=False)

    def __post_init__(self):
        arrays = {}
        for name in ("times", "alpha1", "alpha2", "alpha3", "alpha2_tail", "alpha3_tail"):
            a = np.array(getattr(self, name), dtype=float)
            arrays[name] = a
        m = arrays["times"].size
        if any(a.shape != (m,) for a in arrays.values()):
            raise ValueError("all instance arrays must share the grid length")
        if m < 2 or np.any(np.diff(arrays["times"]) <= 0.0):
            raise ValueError("times must be strictly increasing with length >= 2")
        for name in ("alpha1", "alpha2", "alpha3"):
            if np.any(arrays[name] < 0.0):
                raise ValueError(f"{name} must be nonnegative")
        for name, a in arrays.items():
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    @classmethod
    def from_samples(cls, times, alpha1, alpha2, alpha3) -> "GronwallInstance":
        """Build an instance with trapezoid tail integrals from the grid itself."""
        times = np.asarray(times, dtype=float)
        alpha2 = np.asarray(alpha2, dtype=float)
        alpha3 = np.asarray(alpha3, dtype=float)
        return cls(
            times=times,
            alpha1=np.asarray(alpha1, dtype=float),
            alpha2=alpha2,
            alpha3=alpha3,
            alpha2_tail=_tail_trapezoid(times, alpha2),
            alpha3_tail=_tail_trapezoid(times, alpha3),
        )


def _tail_trapezoid(times: np.ndarray, density: np.ndarray) -> np.ndarray:
    dt = np.diff(times)
    seg = 0.5 * dt * (density[1:] + density[:-1])
    tail = np.zeros_like(times)
    tail[:-1] = np.cumsum(seg[::-1])[::-1]
    return tail


@dataclass(frozen=True)
class GronwallVerdict:
    """Outcome of the comparison-lemma verification on one instance."""

    state_bound_ok: bool
    energy_bound_ok: bool
    state_margin: float
    energy_margin: float


def gronwall_check(inst: GronwallInstance, tol: float = 1e-8) -> GronwallVerdict:
    """Verify both comparison-lemma conclusions on a sampled instance.

    Premise (checked with a coarse finite-difference guard): between samples,
    the increment of alpha1 never exceeds the integral of
    -alpha2 + alpha3 (1 + alpha1). Conclusions checked at every grid point s:

    * state bound: alpha1(t) <= exp(integral of alpha3 over [s0, t])
      * (1 + alpha1(s0)) - 1 for the grid start s0 and every t, and
    * energy bound: the tail integral of alpha2 from s is at most
      beta exp(beta) + (1 + beta exp(beta)) alpha1(s), with beta the tail
      integral of alpha3 from s.

    Margins are the worst (most negative) slack found; ``tol`` absorbs
    quadrature roundoff.
    """
    t, a1, a2, a3 = inst.times, inst.alpha1, inst.alpha2, inst.alpha3
    dt = np.diff(t)
    fwd3 = inst.alpha3_tail[0] - inst.alpha3_tail  # integral of alpha3 from t[0] to t[i]

    # Premise guard: catches constructors that feed incompatible samples.
    inc = np.diff(a1)
    rhs = 0.5 * (( -a2 + a3 * (1.0 + a1))[1:] + (-a2 + a3 * (1.0 + a1))[:-1]) * dt
    guard = 1e-2 * (1.0 + np.abs(rhs) / np.maximum(dt, 1e-300)) * dt + 1e-6
    if np.any(inc > rhs + guard):
        worst = float(np.max(inc - rhs))
        raise ValueError(f"instance violates the comparison premise (excess {worst:.3e})")

    growth = np.exp(np.minimum(fwd3, _EXP_OVERFLOW))
    state_slack = growth * (1.0 + a1[0]) - 1.0 - a1
    state_margin = float(state_slack.min())

    beta = inst.alpha3_tail
    beta_exp = beta * np.exp(np.minimum(beta, _EXP_OVERFLOW))
    energy_slack = beta_exp + (1.0 + beta_exp) * a1 - inst.alpha2_tail
    energy_margin = float(energy_slack.min())

    return GronwallVerdict(
        state_bound_ok=state_margin >= -tol,
        energy_bound_ok=energy_margin >= -tol,
        state_margin=state_margin,
        energy_margin=energy_margin,
    )


@dataclass(frozen=True)
class PhaseConsistency:
    """Whether an oscillatory residual candidate can satisfy both boundary ties."""

    boundary_consistent: bool
    residual_start: float
    residual_end: float


def phase_consistency_check(
    prof: ExcitationProfile,
    amplitude: float,
    phase: float,
    half_period_index: int,
    tol: float = 1e-9,
) -> PhaseConsistency:
    """Test a candidate nonvanishing residual against its boundary conditions.

    On each active half period, a residual of the position loop that produces
    zero output must be a sinusoid in the accumulated excitation angle, with
    some amplitude, phase, and a sign alternating with the half-period index.
    Matching the silent segments on both sides forces the sinusoid to vanish
    at the segment start and end. The check evaluates both boundary values;
    with an admissible excitation (segment integral off the pi grid) they can
    only vanish together when the amplitude is zero.
    """
    if amplitude < 0.0:
        raise ValueError("amplitude must be nonnegative")
    total_angle = prof.phase_integral()
    sign = -1.0 if (half_period_index % 2) else 1.0
    residual_start = abs(amplitude * math.sin(phase))
    residual_end = abs(amplitude * math.sin(sign * total_angle + phase))
    return PhaseConsistency(
        boundary_consistent=(residual_start <= tol and residual_end <= tol),
        residual_start=residual_start,
        residual_end=residual_end,
    )
