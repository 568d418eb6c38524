"""Scenario configs, the end-to-end run pipeline, and file formats.

A scenario is described by a JSON document with exactly these top-level keys
(agents are 1-based in files, 0-based in memory):

* ``n``: number of agents (>= 2),
* ``graphs``: map from mode label to an edge list of ``{"i", "j", "w"}``
  objects; ``w`` is optional and defaults to 1.0,
* ``schedule``: ``{"kind": "explicit", "events": [{"t", "mode"}, ...]}`` or
  ``{"kind": "section4d", "t_prime": <s>}`` (optional ``"horizon"``),
* ``controller``: ``{"kv", "kw"}``,
* ``excitation``: ``{"T", "T0", "c"}`` with ``c`` either
  ``{"kind": "constant", "value"}`` or ``{"kind": "table", "times", "values"}``,
* ``integrator``: ``{"step", "t0", "tf"}`` (``step`` may be null for the
  default heuristic),
* ``init``: ``{"kind": "explicit", "states": [{"x", "y", "theta"}, ...]}`` or
  ``{"kind": "random", "bound", "seed"}``,
* ``output``: optional CSV path.

Unknown keys anywhere are rejected. Trajectories are written as CSV with
header ``t,mode,x1,y1,theta1,...,xN,yN,thetaN,dist_omega,W,U,V,h1,h_norm_sq``,
floats printed with 17 significant digits and LF line endings; the state
columns are world-frame, the monitor columns are evaluated in the body frame.
"""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .diagnostics import (
    BoundConstants,
    DecayFit,
    energy_bound,
    fit_exponential_decay,
    switched_energy_cumulative,
    trajectory_channels,
)
from .dynamics import (
    ControllerParams,
    ExcitationProfile,
    SwarmState,
    Trajectory,
    check_phase_condition,
    default_step,
    integrate,
)
from .graphs import GraphFamily, WeightedGraph
from .switching import (
    JointGraphParams,
    SwitchSchedule,
    check_gujc,
    connectivity_margin,
    dwell_free_schedule,
    explicit_schedule,
)

__all__ = [
    "ConfigError",
    "ScenarioConfig",
    "RunReport",
    "parse_config",
    "serialize",
    "run_scenario",
    "run_batch",
    "write_trajectory_csv",
    "default_scenario_path",
    "CONSENSUS_THRESHOLD",
]

#: Consensus is declared reached when the body-frame distance drops below this.
CONSENSUS_THRESHOLD = 1e-2

#: Occupancy threshold used for joint-connectivity reporting, as a fraction
#: of the excitation's silent-segment length. Reproduces the benchmark pair.
TAU_A_FRACTION = 1.0 / 6.0

#: Horizon over which run reports certify joint connectivity, in windows.
GUJC_HORIZON_WINDOWS = 20.0


class ConfigError(ValueError):
    """A scenario document violated the schema or an invariant."""


def _require_keys(obj: dict, allowed: set[str], required: set[str], where: str) -> None:
    if not isinstance(obj, dict):
        raise ConfigError(f"{where} must be an object")
    for key in obj:
        if key not in allowed:
            raise ConfigError(f"unknown key {key!r} in {where}")
    for key in required:
        if key not in obj:
            raise ConfigError(f"missing key {key!r} in {where}")


def _number(obj, where: str) -> float:
    if isinstance(obj, bool) or not isinstance(obj, (int, float)):
        raise ConfigError(f"{where} must be a number")
    return float(obj)


@dataclass(frozen=True)
class ScenarioConfig:
    """Validated plain-data mirror of a scenario document.

    Holds only JSON-representable values so that serialization round-trips
    field for field; ``family()`` and friends build the runtime objects.
    """

    n: int
    graphs: dict[int, tuple[tuple[int, int, float], ...]]
    schedule: dict
    kv: float
    kw: float
    t_small: float
    t_big: float
    c_spec: dict
    step: float | None
    t0: float
    tf: float
    init: dict
    output: str | None = None

    def family(self) -> GraphFamily:
        graphs = {}
        for mode, edges in self.graphs.items():
            graphs[mode] = WeightedGraph.from_edges(
                self.n, [(i - 1, j - 1, w) for i, j, w in edges]
            )
        return GraphFamily(graphs)

    def schedule_obj(self) -> SwitchSchedule:
        if self.schedule["kind"] == "explicit":
            return explicit_schedule(
                [(e["t"], e["mode"]) for e in self.schedule["events"]]
            )
        horizon = self.schedule.get("horizon", math.inf)
        return dwell_free_schedule(self.schedule["t_prime"], horizon=horizon)

    def profile(self) -> ExcitationProfile:
        if self.c_spec["kind"] == "constant":
            return ExcitationProfile.constant(self.t_small, self.t_big, self.c_spec["value"])
        return ExcitationProfile.table(
            self.t_small, self.t_big, self.c_spec["times"], self.c_spec["values"]
        )

    def controller(self) -> ControllerParams:
        return ControllerParams(kv=self.kv, kw=self.kw)

    def initial_state(self) -> SwarmState:
        if self.init["kind"] == "explicit":
            states = self.init["states"]
            return SwarmState(
                x=np.array([s["x"] for s in states]),
                y=np.array([s["y"] for s in states]),
                theta=np.array([s["theta"] for s in states]),
            )
        # Seeded PCG64 stream; draw order is x block, y block, theta block.
        rng = np.random.default_rng(self.init["seed"])
        bound = self.init["bound"]
        x = rng.uniform(-bound, bound, self.n)
        y = rng.uniform(-bound, bound, self.n)
        theta = rng.uniform(-bound, bound, self.n)
        return SwarmState(x=x, y=y, theta=theta)

    def step_value(self, sched: SwitchSchedule | None = None) -> float:
        if self.step is not None:
            return self.step
        sched = sched if sched is not None else self.schedule_obj()
        t_prime = self.schedule.get("t_prime")
        return default_step(sched, self.t0, self.tf, t_prime=t_prime)


def parse_config(source, enforce_phase: bool = True) -> ScenarioConfig:
    """Parse and validate a scenario document (path, JSON text, or dict).

    Raises :class:`ConfigError` naming the first violated invariant. With
    ``enforce_phase`` (the default) an excitation whose segment integral sits
    on the pi grid is rejected; pass False to inspect such configs anyway.
    """
    if isinstance(source, dict):
        doc = source
    else:
        s = str(source)
        if os.path.exists(s):
            text = Path(s).read_text()
        elif s.lstrip().startswith("{"):
            text = s
        else:
            raise ConfigError(f"config file not found: {s}")
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"not valid JSON: {exc}") from exc

    _require_keys(
        doc,
        {"n", "graphs", "schedule", "controller", "excitation", "integrator", "init", "output"},
        {"n", "graphs", "schedule", "controller", "excitation", "integrator", "init"},
        "the scenario",
    )

    n = doc["n"]
    if isinstance(n, bool) or not isinstance(n, int) or n < 2:
        raise ConfigError("n must be an integer >= 2")

    if not isinstance(doc["graphs"], dict) or not doc["graphs"]:
        raise ConfigError("graphs must be a nonempty object mapping modes to edge lists")
    graphs: dict[int, tuple] = {}
    for mode_key, edges in doc["graphs"].items():
        try:
            mode = int(mode_key)
        except (TypeError, ValueError):
            raise ConfigError(f"graph mode {mode_key!r} is not an integer label") from None
        if not isinstance(edges, list) or not edges:
            raise ConfigError(f"graphs[{mode_key}] must be a nonempty edge list")
        seen = set()
        parsed = []
        for edge in edges:
            _require_keys(edge, {"i", "j", "w"}, {"i", "j"}, f"an edge of graphs[{mode_key}]")
            i, j = edge["i"], edge["j"]
            for v in (i, j):
                if isinstance(v, bool) or not isinstance(v, int):
                    raise ConfigError(f"edge endpoints in graphs[{mode_key}] must be integers")
            if not (1 <= i <= n and 1 <= j <= n):
                raise ConfigError(f"edge ({i}, {j}) out of range 1..{n} in graphs[{mode_key}]")
            if i == j:
                raise ConfigError(f"self-loop ({i}, {i}) in graphs[{mode_key}]")
            if (min(i, j), max(i, j)) in seen:
                raise ConfigError(f"duplicate edge ({i}, {j}) in graphs[{mode_key}]")
            seen.add((min(i, j), max(i, j)))
            w = _number(edge.get("w", 1.0), f"weight of edge ({i}, {j})")
            if not (w > 0.0):
                raise ConfigError(f"edge ({i}, {j}) weight must be positive")
            parsed.append((i, j, w))
        graphs[mode] = tuple(parsed)

    sched = doc["schedule"]
    _require_keys(sched, {"kind", "events", "t_prime", "horizon"}, {"kind"}, "schedule")
    if sched["kind"] == "explicit":
        for key in ("t_prime", "horizon"):
            if key in sched:
                raise ConfigError(f"an explicit schedule takes no {key!r}")
        events = sched.get("events")
        if not isinstance(events, list) or not events:
            raise ConfigError("explicit schedule needs a nonempty events list")
        parsed_events = []
        for ev in events:
            _require_keys(ev, {"t", "mode"}, {"t", "mode"}, "a schedule event")
            t = _number(ev["t"], "event time")
            mode = ev["mode"]
            if isinstance(mode, bool) or not isinstance(mode, int):
                raise ConfigError("event modes must be integers")
            if mode not in graphs:
                raise ConfigError(f"event mode {mode} has no graph")
            parsed_events.append({"t": t, "mode": mode})
        times = [e["t"] for e in parsed_events]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ConfigError("event times must be strictly increasing")
        schedule = {"kind": "explicit", "events": parsed_events}
    elif sched["kind"] == "section4d":
        if "events" in sched:
            raise ConfigError("a section4d schedule takes no events list")
        t_prime = _number(sched.get("t_prime"), "schedule t_prime") if "t_prime" in sched else None
        if t_prime is None or not (t_prime > 0.0):
            raise ConfigError("section4d schedule needs a positive t_prime")
        schedule = {"kind": "section4d", "t_prime": t_prime}
        if "horizon" in sched:
            horizon = _number(sched["horizon"], "schedule horizon")
            if not (horizon > 0.0):
                raise ConfigError("schedule horizon must be positive")
            schedule["horizon"] = horizon
    else:
        raise ConfigError(f"unknown schedule kind {sched.get('kind')!r}")

    _require_keys(doc["controller"], {"kv", "kw"}, {"kv", "kw"}, "controller")
    kv = _number(doc["controller"]["kv"], "kv")
    kw = _number(doc["controller"]["kw"], "kw")
    if not (kv > 0.0):
        raise ConfigError(f"controller gain kv must be positive, got {kv}")
    if not (kw > 0.0):
        raise ConfigError(f"controller gain kw must be positive, got {kw}")

    exc = doc["excitation"]
    _require_keys(exc, {"T", "T0", "c"}, {"T", "T0", "c"}, "excitation")
    t_small = _number(exc["T"], "excitation T")
    t_big = _number(exc["T0"], "excitation T0")
    if not (t_small > 0.0):
        raise ConfigError("excitation T must be positive")
    if not (t_big > 2.0 * t_small):
        raise ConfigError("excitation must satisfy T0 > 2 T")
    cspec = exc["c"]
    _require_keys(cspec, {"kind", "value", "times", "values"}, {"kind"}, "excitation c")
    if cspec["kind"] == "constant":
        if "value" not in cspec:
            raise ConfigError("constant c needs a value")
        c_spec = {"kind": "constant", "value": _number(cspec["value"], "c value")}
    elif cspec["kind"] == "table":
        for key in ("times", "values"):
            if key not in cspec or not isinstance(cspec[key], list):
                raise ConfigError(f"table c needs a {key} list")
        c_spec = {
            "kind": "table",
            "times": [_number(v, "c table time") for v in cspec["times"]],
            "values": [_number(v, "c table value") for v in cspec["values"]],
        }
    else:
        raise ConfigError(f"unknown c kind {cspec.get('kind')!r}")

    integ = doc["integrator"]
    _require_keys(integ, {"step", "t0", "tf"}, {"step", "t0", "tf"}, "integrator")
    step = None if integ["step"] is None else _number(integ["step"], "step")
    if step is not None and not (step > 0.0):
        raise ConfigError("integrator step must be positive")
    t0 = _number(integ["t0"], "t0")
    tf = _number(integ["tf"], "tf")
    if t0 < 0.0:
        raise ConfigError("t0 must be nonnegative")
    if not (tf > t0):
        raise ConfigError("need tf > t0")

    init = doc["init"]
    _require_keys(init, {"kind", "states", "bound", "seed"}, {"kind"}, "init")
    if init["kind"] == "explicit":
        states = init.get("states")
        if not isinstance(states, list) or len(states) != n:
            raise ConfigError(f"explicit init needs exactly {n} states")
        parsed_states = []
        for s in states:
            _require_keys(s, {"x", "y", "theta"}, {"x", "y", "theta"}, "an initial state")
            parsed_states.append(
                {k: _number(s[k], f"initial {k}") for k in ("x", "y", "theta")}
            )
        init_spec = {"kind": "explicit", "states": parsed_states}
    elif init["kind"] == "random":
        bound = _number(init.get("bound", 10.0), "init bound")
        if not (bound > 0.0):
            raise ConfigError("init bound must be positive")
        seed = init.get("seed", 0)
        if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
            raise ConfigError("init seed must be a nonnegative integer")
        init_spec = {"kind": "random", "bound": bound, "seed": seed}
    else:
        raise ConfigError(f"unknown init kind {init.get('kind')!r}")

    output = doc.get("output")
    if output is not None and not isinstance(output, str):
        raise ConfigError("output must be a path string")

    if schedule["kind"] == "explicit":
        if schedule["events"][0]["t"] > t0:
            raise ConfigError("the schedule must start at or before integrator t0")
    schedule_modes = (
        {e["mode"] for e in schedule["events"]}
        if schedule["kind"] == "explicit"
        else {1, 2, 3}
    )
    for mode in schedule_modes:
        if mode not in graphs:
            raise ConfigError(f"schedule uses mode {mode} with no graph")

    cfg = ScenarioConfig(
        n=n,
        graphs=graphs,
        schedule=schedule,
        kv=kv,
        kw=kw,
        t_small=t_small,
        t_big=t_big,
        c_spec=c_spec,
        step=step,
        t0=t0,
        tf=tf,
        init=init_spec,
        output=output,
    )

    if enforce_phase:
        phase = check_phase_condition(cfg.profile())
        if not phase.ok:
            raise ConfigError(
                "excitation fails the phase condition: segment integral "
                f"{phase.integral:.12g} sits within {phase.distance:.3g} of "
                f"{phase.nearest_k} * pi"
            )
    return cfg


def serialize(cfg: ScenarioConfig) -> dict:
    """Plain JSON document for a config; inverse of :func:`parse_config`."""
    doc = {
        "n": cfg.n,
        "graphs": {
            str(mode): [{"i": i, "j": j, "w": w} for i, j, w in edges]
            for mode, edges in sorted(cfg.graphs.items())
        },
        "schedule": json.loads(json.dumps(cfg.schedule)),
        "controller": {"kv": cfg.kv, "kw": cfg.kw},
        "excitation": {"T": cfg.t_small, "T0": cfg.t_big, "c": json.loads(json.dumps(cfg.c_spec))},
        "integrator": {"step": cfg.step, "t0": cfg.t0, "tf": cfg.tf},
        "init": json.loads(json.dumps(cfg.init)),
    }
    if cfg.output is not None:
        doc["output"] = cfg.output
    return doc


def default_scenario_path() -> Path:
    """Path of the bundled benchmark scenario document."""
    return Path(__file__).parent / "data" / "scenario_4d.json"


def write_trajectory_csv(path, traj: Trajectory) -> None:
    """Write a trajectory in the documented CSV format (deterministic bytes)."""
    channels = trajectory_channels(traj)
    n = traj.n
    agent_cols = []
    for i in range(1, n + 1):
        agent_cols += [f"x{i}", f"y{i}", f"theta{i}"]
    header = "t,mode," + ",".join(agent_cols) + ",dist_omega,W,U,V,h1,h_norm_sq"
    dist = channels["dist"]
    w_ch = channels["heading_energy"]
    u_ch = channels["position_energy"]
    v_ch = channels["dist_sq"]
    h1 = channels["h1"]
    hns = channels["h_norm_sq"]
    with open(path, "w", newline="\n") as fh:
        fh.write(header + "\n")
        for k in range(traj.n_samples):
            row = [f"{traj.times[k]:.17g}", str(int(traj.modes[k]))]
            for i in range(n):
                row.append(f"{traj.x[k, i]:.17g}")
                row.append(f"{traj.y[k, i]:.17g}")
                row.append(f"{traj.theta[k, i]:.17g}")
            row.append(f"{dist[k]:.17g}")
            row.append(f"{w_ch[k]:.17g}")
            row.append(f"{u_ch[k]:.17g}")
            row.append(f"{v_ch[k]:.17g}")
            row.append(f"{h1[k]:.17g}")
            row.append(f"{hns[k]:.17g}")
            fh.write(",".join(row) + "\n")


@dataclass(frozen=True)
class RunReport:
    """Everything a completed scenario run certifies, JSON-serializable."""

    gujc: dict
    connectivity_margin: float | None
    final_distance: float
    time_to_threshold: float | None
    threshold: float
    decay: dict
    energy: dict
    switch_count: int
    sample_count: int
    wall_clock_s: float
    warnings: list[str] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    csv_path: str | None = None
    report_path: str | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def run_scenario(
    cfg: ScenarioConfig,
    out_path=None,
    write_files: bool = True,
) -> tuple[RunReport, Trajectory]:
    """Execute a scenario end to end and certify its run-time properties.

    Checks joint connectivity of the schedule and the excitation margin,
    integrates the world-frame loop, computes the consensus diagnostics,
    fits the heading decay, evaluates the output-energy budget on 20
    windows, and (unless ``write_files`` is false) writes the trajectory CSV
    plus a JSON report next to it. A failing phase condition or a
    disconnected schedule is reported as a warning, not an error, so
    deliberately broken scenarios can serve as negative controls.
    """
    start = time.perf_counter()
    warnings: list[str] = []
    notes: list[str] = []

    family = cfg.family()
    sched = cfg.schedule_obj()
    prof = cfg.profile()
    params = cfg.controller()

    phase = check_phase_condition(prof)
    if not phase.ok:
        warnings.append(
            f"phase condition fails: segment integral {phase.integral:.12g} "
            f"is within {phase.distance:.3g} of {phase.nearest_k} * pi"
        )

    window = prof.t_small
    tau_a = TAU_A_FRACTION * window
    horizon = GUJC_HORIZON_WINDOWS * window
    gujc_params = JointGraphParams(tau_a=tau_a, window=window)
    gujc = check_gujc(sched, family, gujc_params, horizon)
    if not gujc.holds_on_horizon:
        warnings.append(
            f"joint connectivity fails on the horizon (first bad window start "
            f"t={gujc.witness_t})"
        )
    try:
        margin = connectivity_margin(family, tau_a)
    except ValueError as exc:
        margin = None
        warnings.append(f"no connectivity margin: {exc}")

    if cfg.init["kind"] == "random":
        notes.append(
            f"initial states drawn uniformly in [-{cfg.init['bound']}, "
            f"{cfg.init['bound']}] per coordinate from PCG64 seed {cfg.init['seed']}"
        )
    step = cfg.step_value(sched)
    if cfg.step is None:
        notes.append(f"integrator step defaulted to {step:.6g} s")
    notes.append(f"horizon [{cfg.t0}, {cfg.tf}] s")

    traj = integrate(
        "world", sched, family, params, prof,
        cfg.initial_state(), cfg.t0, cfg.tf, step,
    )

    channels = trajectory_channels(traj)
    dist = channels["dist"]
    below = np.nonzero(dist < CONSENSUS_THRESHOLD)[0]
    time_to_threshold = float(traj.times[below[0]]) if below.size else None

    heading_norm = np.sqrt(channels["heading_energy"])
    try:
        fit = fit_exponential_decay(traj.times, heading_norm)
        if not fit.rate > 0.0:
            raise ValueError(f"fitted rate {fit.rate:.3e} is not positive")
    except ValueError as exc:
        fit = DecayFit(amplitude=1.0, rate=math.inf, log_residual_rms=0.0, samples_used=0)
        warnings.append(f"decay fit unavailable ({exc}); using a unit envelope")
    consts = BoundConstants.from_fit(fit, family, params, prof)

    # Same mode-correct quadrature that output_energy uses, one pass.
    span = cfg.tf - cfg.t0
    n_windows = 20
    cum = switched_energy_cumulative(traj)
    cum_joint = cum["h_norm_sq"]
    cum_head = cum["h1_sq"]
    slacks = []
    heading_slacks = []
    for i in range(n_windows):
        s = cfg.t0 + span * i / n_windows
        lo = int(np.searchsorted(traj.times, s, side="left"))
        bound_joint = energy_bound(traj.body_state(lo), consts)
        slacks.append(bound_joint - (cum_joint[-1] - cum_joint[lo]))
        bound_head = channels["heading_energy"][lo]
        heading_slacks.append(bound_head - (cum_head[-1] - cum_head[lo]))
    slacks_arr = np.array(slacks)
    energy = {
        "windows": n_windows,
        "min_slack": float(slacks_arr.min()),
        "negative_count": int(np.sum(slacks_arr < 0.0)),
        "heading_min_slack": float(np.array(heading_slacks).min()),
        "constants_source": consts.source,
    }

    csv_path = None
    report_path = None
    if write_files:
        target = Path(out_path) if out_path is not None else Path(cfg.output or "trajectory.csv")
        target.parent.mkdir(parents=True, exist_ok=True)
        write_trajectory_csv(target, traj)
        csv_path = str(target)
        report_path = str(target.with_suffix(".report.json"))

    report = RunReport(
        gujc={
            "holds_on_horizon": gujc.holds_on_horizon,
            "witness_t": gujc.witness_t,
            "tau_a": tau_a,
            "window": window,
            "horizon": horizon,
        },
        connectivity_margin=margin,
        final_distance=float(dist[-1]),
        time_to_threshold=time_to_threshold,
        threshold=CONSENSUS_THRESHOLD,
        decay=asdict(fit),
        energy=energy,
        switch_count=traj.switch_count,
        sample_count=traj.n_samples,
        wall_clock_s=time.perf_counter() - start,
        warnings=warnings,
        notes=notes,
        csv_path=csv_path,
        report_path=report_path,
    )
    if write_files:
        with open(report_path, "w", newline="\n") as fh:
            json.dump(report.to_dict(), fh, indent=2, sort_keys=True, default=_json_default)
            fh.write("\n")
    return report, traj


def _run_seed(args):
    cfg_doc, seed, out_path = args
    cfg = parse_config(cfg_doc, enforce_phase=False)
    cfg = replace(cfg, init={**cfg.init, "seed": seed})
    report, _ = run_scenario(cfg, out_path=out_path)
    return seed, report


def run_batch(
    cfg: ScenarioConfig,
    seeds,
    out_dir,
    max_workers: int | None = None,
) -> dict[int, RunReport]:
    """Run one scenario across several seeds, optionally in parallel.

    Worker count comes from ``max_workers`` or the ``SWSIM_THREADS``
    environment variable (default 1, i.e. serial in-process execution).
    Each seed writes ``seed<k>.csv`` plus its report into ``out_dir``.
    Requires a seeded-random init block.
    """
    if cfg.init["kind"] != "random":
        raise ValueError("run_batch needs a random init block to vary seeds")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if max_workers is None:
        max_workers = int(os.environ.get("SWSIM_THREADS", "1"))
    if max_workers < 1:
        raise ValueError("max_workers must be at least 1")
    doc = serialize(cfg)
    jobs = [(doc, int(seed), str(out_dir / f"seed{int(seed)}.csv")) for seed in seeds]
    results: dict[int, RunReport] = {}
    if max_workers == 1:
        for job in jobs:
            seed, report = _run_seed(job)
            results[seed] = report
    else:
        with ProcessPoolExecutor(max_workers=max_workers) as pool:
            for seed, report in pool.map(_run_seed, jobs):
                results[seed] = report
    return results
