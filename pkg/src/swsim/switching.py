"""Switching signals, occupancy measures, and joint-connectivity checks.

A switching signal is a piecewise-constant, right-continuous map from time to
a mode of a :class:`~swsim.graphs.GraphFamily`. Signals may switch arbitrarily
fast (no dwell time), so switch instants are enumerated lazily and cached.
"""

from __future__ import annotations

import math
import threading
from bisect import bisect_left, bisect_right
from dataclasses import dataclass

import numpy as np

from .graphs import (
    GraphFamily,
    WeightedGraph,
    connected_subsets,
    is_connected,
    laplacian,
    min_positive_eigenvalue,
    union_graph,
    union_laplacian,
)

__all__ = [
    "SwitchSchedule",
    "JointGraphParams",
    "GujcReport",
    "explicit_schedule",
    "constant_schedule",
    "dwell_free_schedule",
    "joint_graph",
    "check_gujc",
    "connectivity_margin",
    "window_laplacian_integral",
]


@dataclass(frozen=True)
class JointGraphParams:
    """Occupancy threshold and window length for joint-connectivity tests.

    tau_a is the minimum time a mode must be active inside a window for its
    edges to count; window is the length of the observation window. Both in
    seconds, with 0 < tau_a <= window.
    """

    tau_a: float
    window: float

    def __post_init__(self):
        if not (self.tau_a > 0.0):
            raise ValueError("tau_a must be positive")
        if not (self.window >= self.tau_a):
            raise ValueError("window must be at least tau_a")


class SwitchSchedule:
    """Right-continuous mode signal with lazily enumerated switch instants.

    Events are (time, mode) pairs; the first event fixes the initial time t0
    and initial mode, and the mode of the last event at or before t applies
    at t. After the final event (if the event stream is finite) the last mode
    holds forever. The event cache is append-only and guarded by a lock, so a
    single schedule can serve concurrent readers.
    """

    def __init__(self, events, horizon: float = math.inf):
        self._iter = iter(events)
        self._times: list[float] = []
        self._modes: list[int] = []
        self._exhausted = False
        self._lock = threading.Lock()
        self.horizon = float(horizon)
        self._ensure(-math.inf)  # pull the first event
        if not self._times:
            raise ValueError("schedule needs at least one event")

    @property
    def t0(self) -> float:
        return self._times[0]

    def _ensure(self, t: float) -> None:
        """Materialize events up to and a little beyond time t."""
        if self._exhausted or (self._times and self._times[-1] > t):
            return
        with self._lock:
            while not self._exhausted and (not self._times or self._times[-1] <= t):
                try:
                    tk, mk = next(self._iter)
                except StopIteration:
                    self._exhausted = True
                    break
                tk = float(tk)
                if self._times and tk <= self._times[-1]:
                    raise ValueError(f"event times must be strictly increasing (got {tk})")
                self._times.append(tk)
                self._modes.append(int(mk))

    def mode_at(self, t: float) -> int:
        """Active mode at time t (right-continuous)."""
        if t < self.t0:
            raise ValueError(f"t={t} precedes schedule start t0={self.t0}")
        self._ensure(t)
        idx = bisect_right(self._times, t) - 1
        return self._modes[idx]

    def switch_times(self, t1: float, t2: float) -> list[float]:
        """Switch instants strictly inside (t1, t2). The start t0 is not a switch."""
        self._ensure(t2)
        lo = bisect_right(self._times, t1)
        hi = bisect_left(self._times, t2)
        return [s for s in self._times[lo:hi] if s > self.t0]

    def occupancy(self, mode: int, t1: float, t2: float) -> float:
        """Total time the signal spends in ``mode`` over [t1, t2)."""
        if t2 < t1:
            raise ValueError("interval end precedes its start")
        if t1 < self.t0:
            raise ValueError(f"interval starts before schedule start t0={self.t0}")
        if t2 == t1:
            return 0.0
        cuts = [t1, *self.switch_times(t1, t2), t2]
        total = 0.0
        for a, b in zip(cuts[:-1], cuts[1:]):
            if self.mode_at(a) == mode:
                total += b - a
        return total

    def count_switches(self, t1: float, t2: float) -> int:
        return len(self.switch_times(t1, t2))


def explicit_schedule(events, horizon: float = math.inf) -> SwitchSchedule:
    """Schedule from a finite list of (time, mode) pairs; last mode holds forever."""
    events = [(float(t), int(m)) for t, m in events]
    return SwitchSchedule(events, horizon=horizon)


def constant_schedule(mode: int, t0: float = 0.0) -> SwitchSchedule:
    return SwitchSchedule([(t0, mode)])


def _dwell_free_events(t_prime: float):
    """Three modes cycled inside blocks that subdivide faster over time.

    Period k (over [k*t_prime, (k+1)*t_prime)) is split into k+1 equal blocks
    and every block is split into thirds running modes 1, 2, 3. Gaps between
    switches shrink like t_prime / (3 (k+1)), so there is no positive dwell
    time, yet each period gives every mode a third of the total occupancy.
    """
    k = 0
    while True:
        block = t_prime / (k + 1)
        third = block / 3.0
        for l in range(k + 1):
            start = (k + l / (k + 1)) * t_prime
            yield (start, 1)
            yield (start + third, 2)
            yield (start + 2.0 * third, 3)
        k += 1


def dwell_free_schedule(t_prime: float, horizon: float = math.inf) -> SwitchSchedule:
    """The dwell-time-free benchmark schedule with period ``t_prime``."""
    if not (t_prime > 0.0):
        raise ValueError("t_prime must be positive")
    return SwitchSchedule(_dwell_free_events(float(t_prime)), horizon=horizon)


def joint_graph(
    sched: SwitchSchedule,
    family: GraphFamily,
    tau_a: float,
    t1: float,
    t2: float,
) -> WeightedGraph:
    """Union of the graphs whose occupancy over [t1, t2) reaches tau_a.

    Weights of qualifying modes are summed; if no mode qualifies the result
    is the empty graph on the family's agents. The comparison carries a
    relative roundoff allowance: schedules often meet tau_a with exact
    equality at worst-case window starts, and summed interval lengths land
    a few ulps on either side.
    """
    if not (t2 > t1):
        raise ValueError("need t2 > t1")
    if not (tau_a > 0.0):
        raise ValueError("tau_a must be positive")
    slack = 1e-9 * max(1.0, t2 - t1)
    qualifying = [
        m for m in family.modes if sched.occupancy(m, t1, t2) >= tau_a - slack
    ]
    if not qualifying:
        return WeightedGraph(np.zeros((family.n, family.n)))
    return union_graph(family, qualifying)


@dataclass(frozen=True)
class GujcReport:
    """Finite-horizon joint-connectivity verdict.

    holds_on_horizon is True when the tau_a-joint graph over every length
    ``window`` interval starting at a grid point in [t0, t0 + horizon - window]
    is connected. witness_t is the first failing window start, if any.
    """

    holds_on_horizon: bool
    witness_t: float | None
    tau_a: float
    window: float
    horizon: float
    grid_size: int


def check_gujc(
    sched: SwitchSchedule,
    family: GraphFamily,
    params: JointGraphParams,
    horizon: float,
) -> GujcReport:
    """Check joint connectivity of every window over a finite horizon.

    The window-start grid is the schedule start, every switch instant in
    [t0, t0 + horizon - window], and the midpoints between consecutive switch
    instants. Occupancy of a fixed window is piecewise linear in its start
    time with kinks only at those instants, so this grid decides the verdict
    for every start in the range.
    """
    if not (horizon > params.window):
        raise ValueError("horizon must exceed the window length")
    t0 = sched.t0
    last_start = t0 + horizon - params.window
    switches = sched.switch_times(t0, math.nextafter(last_start, math.inf))
    grid = [t0]
    prev = t0
    for s in switches:
        mid = 0.5 * (prev + s)
        if mid > grid[-1]:
            grid.append(mid)
        grid.append(s)
        prev = s
    if last_start > grid[-1]:
        grid.append(0.5 * (grid[-1] + last_start))
        grid.append(last_start)
    for t in grid:
        jg = joint_graph(sched, family, params.tau_a, t, t + params.window)
        if not is_connected(jg):
            return GujcReport(False, t, params.tau_a, params.window, horizon, len(grid))
    return GujcReport(True, None, params.tau_a, params.window, horizon, len(grid))


def connectivity_margin(family: GraphFamily, tau_a: float) -> float:
    """Uniform excitation margin guaranteed by tau_a-joint connectivity.

    Minimizes the smallest positive Laplacian eigenvalue of the union graph
    over every mode subset whose union is connected, then scales by tau_a.
    Any centered unit vector u then satisfies
    u' (integral of L over a connected window) u >= the returned margin.
    Raises if no subset yields a connected union or if the family has more
    than 16 modes (exhaustive enumeration).
    """
    if not (tau_a > 0.0):
        raise ValueError("tau_a must be positive")
    best = None
    for combo in connected_subsets(family):
        sigma = min_positive_eigenvalue(union_laplacian(family, combo))
        if best is None or sigma < best:
            best = sigma
    if best is None:
        raise ValueError("no mode subset yields a connected union graph")
    return tau_a * best


def window_laplacian_integral(
    sched: SwitchSchedule, family: GraphFamily, t1: float, t2: float
):
    """Integral of the active Laplacian over [t1, t2), via exact occupancies."""
    total = np.zeros((family.n, family.n))
    for m in family.modes:
        occ = sched.occupancy(m, t1, t2)
        if occ > 0.0:
            total += occ * laplacian(family[m])
    return total
