"""Unicycle swarm dynamics under the switching consensus controller.

State conventions: n agents with planar positions (x_i, y_i) in meters and
headings theta_i in radians. Headings live on the real line (no wrap to a
2 pi interval); consensus and all monitors are defined through differences,
which the controller keeps bounded.

Three closed-loop systems are integrated with a shared fixed-step RK4 whose
steps are aligned to every switch instant and every breakpoint of the
excitation signal:

* world: the controlled unicycles in world coordinates,
* body: the same loop rewritten in per-agent body coordinates,
* excitation: the rotation-only comparison system driven purely by the
  excitation signal (used by convergence diagnostics and step-order tests).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .graphs import GraphFamily, WeightedGraph, laplacian
from .switching import SwitchSchedule

__all__ = [
    "ControllerParams",
    "ExcitationProfile",
    "PhaseCheck",
    "SwarmState",
    "BodyFrameState",
    "Trajectory",
    "EventDensityError",
    "check_phase_condition",
    "control_input",
    "body_transform",
    "rotation_coupling",
    "world_rhs",
    "body_rhs",
    "excitation_rhs",
    "integrate",
    "default_step",
]

#: Abort threshold for switch events inside one nominal integrator step.
EVENT_DENSITY_CAP = 10_000

#: Below this |angle| the secant slopes switch to series evaluation.
_SERIES_CUTOFF = 1e-6


class EventDensityError(RuntimeError):
    """Raised when a single nominal step would contain too many switch events."""


@dataclass(frozen=True)
class ControllerParams:
    """Positive position and heading consensus gains (1/s)."""

    kv: float
    kw: float

    def __post_init__(self):
        if not (self.kv > 0.0 and self.kw > 0.0):
            raise ValueError("gains kv and kw must be positive")


@dataclass(frozen=True)
class ExcitationProfile:
    """Zero-mean periodic heading excitation.

    One period of length ``t_big`` (seconds) splits into four segments:
    silence on [0, t_small), the profile c on [t_small, t_big/2), silence on
    [t_big/2, t_small + t_big/2), and the negated profile on
    [t_small + t_big/2, t_big). The profile c is either a constant or a
    table sampled on [0, t_big/2 - t_small] with linear interpolation and
    clamped ends. Requires t_big > 2 * t_small.
    """

    t_small: float
    t_big: float
    c_const: float | None = None
    c_times: np.ndarray | None = field(default=None, repr=False)
    c_values: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if not (self.t_small > 0.0):
            raise ValueError("t_small must be positive")
        if not (self.t_big > 2.0 * self.t_small):
            raise ValueError("t_big must exceed 2 * t_small")
        if (self.c_const is None) == (self.c_times is None):
            raise ValueError("provide exactly one of a constant c or a table")
        if self.c_times is not None:
            times = np.array(self.c_times, dtype=float)
            values = np.array(self.c_values, dtype=float)
            if times.ndim != 1 or times.shape != values.shape or times.size < 2:
                raise ValueError("c table needs matching 1-d times and values, length >= 2")
            if not np.all(np.diff(times) > 0.0):
                raise ValueError("c table times must be strictly increasing")
            if times[0] < 0.0 or times[-1] > self.segment_length + 1e-12:
                raise ValueError("c table times must lie within the active segment")
            if not (np.all(np.isfinite(times)) and np.all(np.isfinite(values))):
                raise ValueError("c table entries must be finite")
            times.setflags(write=False)
            values.setflags(write=False)
            object.__setattr__(self, "c_times", times)
            object.__setattr__(self, "c_values", values)

    @classmethod
    def constant(cls, t_small: float, t_big: float, value: float) -> "ExcitationProfile":
        return cls(t_small=t_small, t_big=t_big, c_const=float(value))

    @classmethod
    def table(cls, t_small: float, t_big: float, times, values) -> "ExcitationProfile":
        return cls(t_small=t_small, t_big=t_big, c_times=times, c_values=values)

    @property
    def segment_length(self) -> float:
        """Length of each active segment, t_big/2 - t_small."""
        return 0.5 * self.t_big - self.t_small

    def c_at(self, s) -> np.ndarray | float:
        """Profile value at offset s into the active segment (clamped ends)."""
        if self.c_const is not None:
            return self.c_const if np.isscalar(s) else np.full(np.shape(s), self.c_const)
        return np.interp(s, self.c_times, self.c_values)

    def value(self, t: float) -> float:
        """Excitation at any real time t, by periodic extension."""
        u = t - self.t_big * math.floor(t / self.t_big)
        half = 0.5 * self.t_big
        if u < self.t_small:
            return 0.0
        if u < half:
            return float(self.c_at(u - self.t_small))
        if u < self.t_small + half:
            return 0.0
        return -float(self.c_at(u - self.t_small - half))

    def _segment_knots(self) -> tuple[np.ndarray, np.ndarray]:
        """Knots of the piecewise-linear profile covering the whole segment."""
        length = self.segment_length
        if self.c_const is not None:
            return np.array([0.0, length]), np.array([self.c_const, self.c_const])
        knots = np.unique(np.concatenate([[0.0, length], np.clip(self.c_times, 0.0, length)]))
        return knots, np.interp(knots, self.c_times, self.c_values)

    def phase_integral(self) -> float:
        """Integral of c over the active segment, exact for the linear model."""
        knots, vals = self._segment_knots()
        return float(np.trapezoid(vals, knots))

    def abs_integral_per_period(self) -> float:
        """Integral of |excitation| over one period, exact for the linear model."""
        knots, vals = self._segment_knots()
        pts = [knots[0]]
        absvals = [abs(vals[0])]
        for (a, b, fa, fb) in zip(knots[:-1], knots[1:], vals[:-1], vals[1:]):
            if fa * fb < 0.0:
                root = a + (b - a) * fa / (fa - fb)
                pts.append(root)
                absvals.append(0.0)
            pts.append(b)
            absvals.append(abs(fb))
        return 2.0 * float(np.trapezoid(absvals, pts))

    def breakpoints(self, t1: float, t2: float) -> list[float]:
        """All jump points of the excitation inside the open interval (t1, t2)."""
        half = 0.5 * self.t_big
        offsets = (0.0, self.t_small, half, self.t_small + half)
        out = []
        m = math.floor(t1 / self.t_big) - 1
        while True:
            base = m * self.t_big
            if base > t2:
                break
            for off in offsets:
                b = base + off
                if t1 < b < t2:
                    out.append(b)
            m += 1
        return sorted(out)

    def _branch_of(self, t: float) -> tuple[int, float]:
        """Branch index (0..3) active at t and the start of t's period."""
        period_start = self.t_big * math.floor(t / self.t_big)
        u = t - period_start
        half = 0.5 * self.t_big
        if u < self.t_small:
            branch = 0
        elif u < half:
            branch = 1
        elif u < self.t_small + half:
            branch = 2
        else:
            branch = 3
        return branch, period_start

    def _branch_value(self, branch: int, period_start: float, t: float) -> float:
        """Evaluate one branch's smooth formula at t, even at its endpoints.

        Used by the integrator so that a step ending exactly on a breakpoint
        samples the branch that was active during the step, not the next one.
        """
        u = t - period_start
        if branch == 0 or branch == 2:
            return 0.0
        if branch == 1:
            return float(self.c_at(u - self.t_small))
        return -float(self.c_at(u - self.t_small - 0.5 * self.t_big))


@dataclass(frozen=True)
class PhaseCheck:
    """Distance of the segment integral of c from the grid of pi multiples."""

    ok: bool
    integral: float
    nearest_k: int
    distance: float


def check_phase_condition(prof: ExcitationProfile, tol: float = 1e-6) -> PhaseCheck:
    """The excitation is admissible when its segment integral avoids k * pi."""
    integral = prof.phase_integral()
    nearest_k = round(integral / math.pi)
    distance = abs(integral - nearest_k * math.pi)
    return PhaseCheck(distance > tol, integral, nearest_k, distance)


def _validated_triplet(x, y, theta):
    x = np.array(x, dtype=float)
    y = np.array(y, dtype=float)
    theta = np.array(theta, dtype=float)
    if not (x.ndim == 1 and x.shape == y.shape == theta.shape):
        raise ValueError("x, y, theta must be 1-d arrays of equal length")
    if x.size < 1:
        raise ValueError("need at least one agent")
    for a in (x, y, theta):
        if not np.all(np.isfinite(a)):
            raise ValueError("state entries must be finite")
        a.setflags(write=False)
    return x, y, theta


@dataclass(frozen=True)
class SwarmState:
    """World-frame swarm state: positions and headings per agent."""

    x: np.ndarray
    y: np.ndarray
    theta: np.ndarray

    def __post_init__(self):
        x, y, theta = _validated_triplet(self.x, self.y, self.theta)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "theta", theta)

    @property
    def n(self) -> int:
        return self.x.size


@dataclass(frozen=True)
class BodyFrameState:
    """Per-agent body-frame positions together with world headings."""

    x: np.ndarray
    y: np.ndarray
    theta: np.ndarray

    def __post_init__(self):
        x, y, theta = _validated_triplet(self.x, self.y, self.theta)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "theta", theta)

    @property
    def n(self) -> int:
        return self.x.size


def body_transform(state: SwarmState) -> BodyFrameState:
    """Rotate each agent's position into its own heading frame.

    The planar norm of each position is preserved; headings pass through
    unchanged. The map is invertible given the headings.
    """
    c, s = np.cos(state.theta), np.sin(state.theta)
    return BodyFrameState(
        x=c * state.x + s * state.y,
        y=-s * state.x + c * state.y,
        theta=state.theta,
    )


def body_transform_inverse(state: BodyFrameState) -> SwarmState:
    c, s = np.cos(state.theta), np.sin(state.theta)
    return SwarmState(
        x=c * state.x - s * state.y,
        y=s * state.x + c * state.y,
        theta=state.theta,
    )


def control_input(
    state: SwarmState,
    g: WeightedGraph,
    params: ControllerParams,
    prof: ExcitationProfile,
    t: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Distributed forward-speed and turn-rate commands.

    Each agent projects its weighted relative position onto its heading
    direction for the speed command; the turn rate tracks the shared
    excitation plus a heading consensus term. Only neighbor-relative state
    enters, so the law is implementable with local measurements.
    """
    lap = laplacian(g)
    lx, ly, lth = lap @ state.x, lap @ state.y, lap @ state.theta
    c, s = np.cos(state.theta), np.sin(state.theta)
    v = -params.kv * (c * lx + s * ly)
    w = prof.value(t) - params.kw * lth
    return v, w


def _secant_cos(s) -> np.ndarray:
    """(cos(s) - 1) / s with the removable singularity filled by series."""
    s = np.asarray(s, dtype=float)
    small = np.abs(s) < _SERIES_CUTOFF
    safe = np.where(small, 1.0, s)
    return np.where(small, -0.5 * s + s**3 / 24.0, (np.cos(safe) - 1.0) / safe)


def _secant_sin(s) -> np.ndarray:
    """sin(s) / s with the removable singularity filled by series."""
    s = np.asarray(s, dtype=float)
    small = np.abs(s) < _SERIES_CUTOFF
    safe = np.where(small, 1.0, s)
    return np.where(small, 1.0 - s**2 / 6.0, np.sin(safe) / safe)


def rotation_coupling(b: BodyFrameState) -> np.ndarray:
    """Coupling matrix of the heading-difference nonlinearity.

    Entry (i, j) applies the secant slopes of cos and sin at the heading
    difference theta_i - theta_j to agent j's body-frame position. It is the
    exact factor by which heading disagreement perturbs the position loop,
    and vanishes row-wise in the heading-consensus limit only through the
    multiplying heading differences.
    """
    dth = b.theta[:, None] - b.theta[None, :]
    return _secant_cos(dth) * b.x[None, :] + _secant_sin(dth) * b.y[None, :]


def world_rhs(
    state: SwarmState,
    g: WeightedGraph,
    params: ControllerParams,
    prof: ExcitationProfile,
    t: float,
) -> SwarmState:
    """Closed-loop world-frame vector field of the controlled unicycles."""
    v, w = control_input(state, g, params, prof, t)
    return SwarmState(
        x=np.cos(state.theta) * v,
        y=np.sin(state.theta) * v,
        theta=w,
    )


def body_rhs(
    b: BodyFrameState,
    g: WeightedGraph,
    params: ControllerParams,
    prof: ExcitationProfile,
    t: float,
) -> BodyFrameState:
    """Closed-loop vector field in body coordinates.

    Algebraically identical to pushing ``world_rhs`` through the body
    transform: the position loop becomes linear consensus plus a skew
    rotation by the excitation, and all heading-difference nonlinearity is
    collected in the ``rotation_coupling`` term.
    """
    lap = laplacian(g)
    dx, dy, dth = _body_rhs_arrays(
        b.x, b.y, b.theta, g.weights, lap, prof.value(t), params.kv, params.kw
    )
    return BodyFrameState(x=dx, y=dy, theta=dth)


def _body_rhs_arrays(x, y, th, adj, lap, p, kv, kw):
    dth = th[:, None] - th[None, :]
    coupling = _secant_cos(dth) * x[None, :] + _secant_sin(dth) * y[None, :]
    grad = (adj * dth).sum(axis=1)  # equals lap @ th
    dx = p * y - kv * (lap @ x) + kv * (adj * coupling * dth).sum(axis=1) - kw * y * grad
    dy = -p * x + kw * x * grad
    dthdot = p - kw * grad
    return dx, dy, dthdot


def excitation_rhs(b: BodyFrameState, prof: ExcitationProfile, t: float) -> BodyFrameState:
    """Rotation-only comparison system: positions spin, headings drift together."""
    p = prof.value(t)
    return BodyFrameState(
        x=p * b.y,
        y=-p * b.x,
        theta=np.full_like(b.theta, p),
    )


@dataclass(frozen=True)
class Trajectory:
    """Sampled run of one of the closed-loop systems.

    Samples sit on the integrator grid: every nominal step boundary plus
    every switch instant and excitation breakpoint. World and body frames
    are both recorded (they are mutually recoverable through the headings),
    along with the controller commands and the active mode, all evaluated
    right-continuously at the sample time.
    """

    kind: str
    times: np.ndarray = field(repr=False)
    modes: np.ndarray = field(repr=False)
    x: np.ndarray = field(repr=False)
    y: np.ndarray = field(repr=False)
    theta: np.ndarray = field(repr=False)
    body_x: np.ndarray = field(repr=False)
    body_y: np.ndarray = field(repr=False)
    v: np.ndarray = field(repr=False)
    w: np.ndarray = field(repr=False)
    family: GraphFamily = field(repr=False)
    params: ControllerParams = field(repr=False)
    profile: ExcitationProfile = field(repr=False)
    switch_count: int = 0

    def __post_init__(self):
        m = self.times.size
        for name in ("modes", "x", "y", "theta", "body_x", "body_y", "v", "w"):
            if getattr(self, name).shape[0] != m:
                raise ValueError(f"trajectory field {name} has mismatched length")
        if m and np.any(np.diff(self.times) <= 0.0):
            raise ValueError("sample times must be strictly increasing")
        for name in ("times", "modes", "x", "y", "theta", "body_x", "body_y", "v", "w"):
            getattr(self, name).setflags(write=False)

    @property
    def n_samples(self) -> int:
        return self.times.size

    @property
    def n(self) -> int:
        return self.x.shape[1]

    def world_state(self, i: int) -> SwarmState:
        return SwarmState(self.x[i], self.y[i], self.theta[i])

    def body_state(self, i: int) -> BodyFrameState:
        return BodyFrameState(self.body_x[i], self.body_y[i], self.theta[i])


def default_step(
    sched: SwitchSchedule,
    t0: float,
    tf: float,
    t_prime: float | None = None,
    floor: float = 1e-6,
) -> float:
    """Step-size heuristic: a thousandth of the base period, but never more
    than a quarter of the smallest switch gap in the horizon."""
    base = 1e-3 * (t_prime if t_prime is not None else (tf - t0))
    switches = sched.switch_times(t0, tf)
    if len(switches) >= 2:
        gaps = np.diff(np.asarray(switches))
        base = min(base, float(gaps.min()) / 4.0)
    return max(base, floor)


def _merge_breakpoints(times: list[float], t0: float, tf: float) -> list[float]:
    """Sort, deduplicate, and clip event times to the open interval (t0, tf)."""
    times = sorted(t for t in times if t0 < t < tf)
    merged: list[float] = []
    for t in times:
        if merged and t - merged[-1] < 1e-12 * max(1.0, abs(t)):
            continue
        merged.append(t)
    return merged


def integrate(
    kind: str,
    sched: SwitchSchedule,
    family: GraphFamily,
    params: ControllerParams,
    prof: ExcitationProfile,
    initial,
    t0: float,
    tf: float,
    step: float,
    event_cap: int = EVENT_DENSITY_CAP,
) -> Trajectory:
    """Fixed-step RK4 with steps aligned to switches and excitation jumps.

    ``kind`` selects the vector field: "world" integrates ``world_rhs`` from
    a :class:`SwarmState`, "body" integrates ``body_rhs`` and "excitation"
    integrates ``excitation_rhs``, both from a :class:`BodyFrameState`. No
    step crosses a switch instant or an excitation breakpoint; within each
    sub-step the active mode and excitation branch are frozen (classified at
    the sub-step midpoint, which is immune to boundary roundoff), so RK4 only
    ever sees a smooth vector field and keeps its fourth-order accuracy.

    Raises :class:`EventDensityError` when one nominal step contains more
    than ``event_cap`` events, and ValueError for a nonpositive step, a
    reversed time span, or a span beyond the schedule horizon.
    """
    if kind not in ("world", "body", "excitation"):
        raise ValueError(f"unknown system kind {kind!r}")
    if not (step > 0.0):
        raise ValueError("step must be positive")
    if not (tf > t0):
        raise ValueError("need tf > t0")
    if t0 < sched.t0:
        raise ValueError("span starts before the schedule's initial time")
    if tf > sched.horizon:
        raise ValueError(f"span end {tf} exceeds the schedule horizon {sched.horizon}")
    if kind == "world":
        if not isinstance(initial, SwarmState):
            raise TypeError("world integration starts from a SwarmState")
    elif not isinstance(initial, BodyFrameState):
        raise TypeError(f"{kind} integration starts from a BodyFrameState")
    if initial.n != family.n:
        raise ValueError("initial state size does not match the graph family")

    n = family.n
    laps = {m: laplacian(family[m]) for m in family.modes}
    adjs = {m: family[m].weights for m in family.modes}
    switches = sched.switch_times(t0, tf)
    events = _merge_breakpoints(switches + prof.breakpoints(t0, tf), t0, tf)

    n_nominal = max(1, math.ceil((tf - t0) / step - 1e-9))
    capacity = n_nominal + len(events) + 2
    times = np.empty(capacity)
    states = np.empty((capacity, 3 * n))

    kv, kw = params.kv, params.kw
    z = np.concatenate([initial.x, initial.y, initial.theta])
    times[0] = t0
    states[0] = z
    filled = 1

    if kind == "world":
        def rhs(zz, p, lap, adj):
            x, y, th = zz[:n], zz[n:2 * n], zz[2 * n:]
            lx, ly, lth = lap @ x, lap @ y, lap @ th
            c, s = np.cos(th), np.sin(th)
            v = -kv * (c * lx + s * ly)
            return np.concatenate([c * v, s * v, p - kw * lth])
    elif kind == "body":
        def rhs(zz, p, lap, adj):
            x, y, th = zz[:n], zz[n:2 * n], zz[2 * n:]
            dx, dy, dth = _body_rhs_arrays(x, y, th, adj, lap, p, kv, kw)
            return np.concatenate([dx, dy, dth])
    else:
        ones = np.ones(n)
        def rhs(zz, p, lap, adj):
            x, y = zz[:n], zz[n:2 * n]
            return np.concatenate([p * y, -p * x, p * ones])

    ev_idx = 0
    n_events_total = len(events)
    for k in range(n_nominal):
        a = t0 + k * step
        b = min(t0 + (k + 1) * step, tf)
        if b <= a:
            break
        sub = [a]
        start_idx = ev_idx
        while ev_idx < n_events_total and events[ev_idx] < b:
            e = events[ev_idx]
            if e - sub[-1] > 1e-12 * max(1.0, abs(e)) and b - e > 1e-12 * max(1.0, abs(e)):
                sub.append(e)
            ev_idx += 1
        if ev_idx - start_idx > event_cap:
            raise EventDensityError(
                f"{ev_idx - start_idx} switch events inside one nominal step "
                f"of {step} s starting at t={a}; cap is {event_cap}"
            )
        sub.append(b)
        for u, vtime in zip(sub[:-1], sub[1:]):
            h = vtime - u
            mid = u + 0.5 * h
            mode = sched.mode_at(mid)
            lap, adj = laps[mode], adjs[mode]
            branch, pstart = prof._branch_of(mid)
            pu = prof._branch_value(branch, pstart, u)
            pm = prof._branch_value(branch, pstart, mid)
            pb = prof._branch_value(branch, pstart, vtime)
            k1 = rhs(z, pu, lap, adj)
            k2 = rhs(z + (0.5 * h) * k1, pm, lap, adj)
            k3 = rhs(z + (0.5 * h) * k2, pm, lap, adj)
            k4 = rhs(z + h * k3, pb, lap, adj)
            z = z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            times[filled] = vtime
            states[filled] = z
            filled += 1

    times = times[:filled].copy()
    states = states[:filled]
    xs = states[:, :n].copy()
    ys = states[:, n:2 * n].copy()
    ths = states[:, 2 * n:].copy()

    modes = np.empty(filled, dtype=np.int64)
    for i, t in enumerate(times):
        modes[i] = sched.mode_at(t)

    if kind == "world":
        cth, sth = np.cos(ths), np.sin(ths)
        wx, wy = xs, ys
        bx = cth * xs + sth * ys
        by = -sth * xs + cth * ys
    else:
        cth, sth = np.cos(ths), np.sin(ths)
        bx, by = xs, ys
        wx = cth * xs - sth * ys
        wy = sth * xs + cth * ys

    pvals = np.array([prof.value(t) for t in times])
    vs = np.empty((filled, n))
    ws = np.empty((filled, n))
    for m in np.unique(modes):
        sel = modes == m
        lap = laps[int(m)]
        lx = wx[sel] @ lap.T
        ly = wy[sel] @ lap.T
        lth = ths[sel] @ lap.T
        vs[sel] = -kv * (np.cos(ths[sel]) * lx + np.sin(ths[sel]) * ly)
        ws[sel] = pvals[sel, None] - kw * lth

    return Trajectory(
        kind=kind,
        times=times,
        modes=modes,
        x=wx.copy(),
        y=wy.copy(),
        theta=ths,
        body_x=bx.copy(),
        body_y=by.copy(),
        v=vs,
        w=ws,
        family=family,
        params=params,
        profile=prof,
        switch_count=len(switches),
    )
