"""Deterministic discrete-event loop: cameras -> server pipeline -> handover, plus dense traces.

Decisions run on a sparse event queue ordered by (due time, insertion seq).
Trace samples sit on a fixed ``sample_dt`` grid. Before an event runs, every
sample strictly earlier than its due time is emitted, so a sample at time t
reflects all events due at or before t.
"""

from __future__ import annotations

import enum
import heapq
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from . import channel as ch
from .errors import ConfigError
from .perception import (OBSTACLE_CLASSES, Frame, SceneObject, project, start_track, update_track)
from .pho import (Abort, HoMachine, HoState, NoTargetError, PhoEvent, ReactiveConfig, TimingBudget,
                  detect_blk, pho_step, plan_trigger, reactive_step, select_target, trigger_table)
from .predictor import RegressionNet, oracle_time, predict
from .scene import Scene, entry_point, exit_time, mph_to_mps, position_at, positions_at, shadows

STRATEGIES = ("proactive", "reactive", "none")
SWEEP_AXES = ("speed", "trigger_offset", "blockage_loss")
TRACE_COLUMNS = ("t_s", "x_m", "serving_id", "rssi_dbm", "rssi_norm", "mos", "state")


class EventKind(enum.Enum):
    FRAME_CAPTURE = "FrameCapture"
    IMAGES_AT_SERVER = "ImagesAtServer"
    DETECTION_DONE = "DetectionDone"
    INFERENCE_DONE = "InferenceDone"
    TRIGGER_FIRE = "TriggerFire"
    HO_COMPLETE = "HoComplete"
    SAMPLE = "Sample"


@dataclass(frozen=True)
class Event:
    due_time: float
    seq: int
    kind: EventKind
    payload: object = None


class NetPredictor:
    """Adapter so a trained RegressionNet can drive the engine."""

    def __init__(self, net: RegressionNet):
        self.net = net

    def __call__(self, x, y, speed, blocked_start_x=None, direction=1):
        return predict(self.net, x, y, speed)


class OraclePredictor:
    """Exact time to the blocked area from the observed position and speed."""

    def __call__(self, x, y, speed, blocked_start_x=None, direction=1):
        return oracle_time(x, speed, blocked_start_x, direction)


@dataclass(frozen=True)
class Models:
    rss: ch.RssModel
    blockage: ch.BlockageModel = ch.BlockageModel()
    mos: ch.MosMapping = ch.MosMapping()
    predictor: Callable = field(default_factory=OraclePredictor)


@dataclass(frozen=True)
class RunConfig:
    strategy: str = "proactive"
    seed: int = 0
    horizon_s: float = 60.0
    sample_dt: float = 1e-3
    fps: float = 26.0
    complete_at_boundary: bool = True
    trigger_offset_m: float = 0.0
    reactive: ReactiveConfig = ReactiveConfig()
    noise_px: float = 0.0
    miss_prob: float = 0.0
    jitter_db: float = 0.0
    user_size_m: tuple = (4.5, 1.8)
    record_frames: bool = False


@dataclass(frozen=True)
class Scenario:
    scene: Scene
    models: Models
    budget: TimingBudget = TimingBudget()
    run: RunConfig = RunConfig()


@dataclass
class RunResult:
    t: np.ndarray
    x: np.ndarray
    serving: np.ndarray
    rssi: np.ndarray
    rssi_unblocked: np.ndarray
    in_shadow: np.ndarray
    mos: np.ndarray
    state: list
    rss_by_sbs: dict
    records: list
    plan: object
    shadows: dict
    sample_dt: float
    strategy: str
    initial_serving: int
    shadow_entry_t: Optional[float]
    frames: list = field(default_factory=list)
    event_log: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    @property
    def rssi_norm(self) -> np.ndarray:
        return ch.normalize(self.rssi)


def _best_sbs(rss_now: dict) -> int:
    return max(sorted(rss_now), key=lambda k: rss_now[k])


def validate(sc: Scenario):
    cfg = sc.run
    if cfg.strategy not in STRATEGIES:
        raise ConfigError(f"strategy: must be one of {STRATEGIES}, got {cfg.strategy!r}")
    if not cfg.sample_dt > 0:
        raise ConfigError("run.sample_dt: must be positive")
    if not cfg.horizon_s > 0:
        raise ConfigError("run.horizon_s: must be positive")
    if not cfg.fps > 0:
        raise ConfigError("camera.fps: must be positive")
    if not 0 <= cfg.miss_prob < 1:
        raise ConfigError("camera.miss_prob: must be in [0, 1)")
    if cfg.noise_px < 0 or cfg.jitter_db < 0:
        raise ConfigError("noise levels must be non-negative")
    missing = set(sc.scene.sbs_ids) - set(sc.models.rss.bells)
    if missing:
        raise ConfigError(f"channel: no RSS model for SBS {sorted(missing)}")
    if not sc.scene.sbs_list:
        raise ConfigError("scene.sbs: at least one SBS is required")


class Simulation:
    def __init__(self, sc: Scenario):
        validate(sc)
        self.sc = sc
        self.scene = sc.scene
        self.cfg = sc.run
        self.budget = sc.budget
        self.models = sc.models
        self.traj = sc.scene.trajectory
        self.shadows = shadows(sc.scene)
        self.t_end = min(self.cfg.horizon_s, exit_time(sc.scene))
        ss = np.random.SeedSequence(self.cfg.seed)
        self.rng_cam, self.rng_chan = (np.random.default_rng(s) for s in ss.spawn(2))

        x0 = self.traj.x_start
        start_rss = {i: ch.link_rssi(self.models.rss, self.models.blockage, self.shadows, i, x0)
                     for i in self.scene.sbs_ids}
        self.initial_serving = _best_sbs(start_rss)
        self.machine = HoMachine(self.initial_serving)
        rcfg = self.cfg.reactive
        if rcfg.threshold_dbm is None:
            peak = self.models.rss.bells[self.initial_serving].peak_dbm
            rcfg = replace(rcfg, threshold_dbm=peak - 20.0)
        self.reactive_cfg = rcfg

        self.queue = []
        self._seq = 0
        self.track = None
        self.prev_frames = None
        self.records = []
        self.frames = []
        self.event_log = []

        n = int(math.floor(self.t_end / self.cfg.sample_dt + 1e-9)) + 1
        self.sample_t = np.arange(n) * self.cfg.sample_dt
        self.next_sample = 0
        self.rows = {k: [] for k in ("t", "x", "serving", "rssi", "unblocked", "state")}
        self.rss_rows = {i: [] for i in self.scene.sbs_ids}

    # -- queue -------------------------------------------------------------
    def schedule(self, t, kind, payload=None):
        ev = Event(t, self._seq, kind, payload)
        self._seq += 1
        heapq.heappush(self.queue, (t, ev.seq, ev))

    def run(self) -> RunResult:
        self.schedule(0.0, EventKind.FRAME_CAPTURE, 0)
        handlers = {
            EventKind.FRAME_CAPTURE: self.on_frame,
            EventKind.IMAGES_AT_SERVER: self.on_images,
            EventKind.DETECTION_DONE: self.on_detection,
            EventKind.INFERENCE_DONE: self.on_inference,
            EventKind.TRIGGER_FIRE: self.on_trigger,
            EventKind.HO_COMPLETE: self.on_complete,
        }
        reactive = self.cfg.strategy == "reactive"
        while self.queue:
            t, _, ev = heapq.heappop(self.queue)
            if t > self.t_end:
                break
            if reactive:
                self.emit_samples(t)
            before = (self.machine.serving, self.machine.state)
            tag = ev.payload if ev.kind is EventKind.FRAME_CAPTURE else ev.payload["pair"]
            self.event_log.append((t, ev.kind.value, tag))
            handlers[ev.kind](t, ev.payload)
            # handlers never read the trace, so samples are only flushed when the
            # serving link or state is about to change
            if not reactive and (self.machine.serving, self.machine.state) != before:
                self.emit_samples(t, *before)
        self.emit_samples(math.inf)
        return self.result()

    # -- channel helpers ---------------------------------------------------
    def link(self, sbs_id, x, jitter=False):
        return ch.link_rssi(self.models.rss, self.models.blockage, self.shadows, sbs_id, x,
                            self.cfg.jitter_db if jitter else 0.0, self.rng_chan)

    def x_at(self, t):
        return position_at(self.traj, t, self.scene.street_length_m).x

    def record(self, t, transition, **kw):
        rec = {"t": t, "transition": transition, "serving": self.machine.serving,
               "target": self.machine.target, "t_to_blk": None, "t_w": None, "d": None}
        rec.update(kw)
        self.records.append(rec)

    # -- trace sampling ----------------------------------------------------
    def emit_samples(self, t_limit, serving=None, state=None):
        """Emit samples strictly before ``t_limit``; ``serving``/``state`` default to the
        machine's current values."""
        i0 = self.next_sample
        i1 = int(np.searchsorted(self.sample_t, t_limit, side="left"))
        if i1 <= i0:
            return
        if self.cfg.strategy == "reactive":
            for i in range(i0, i1):
                self._reactive_sample(self.sample_t[i])
        else:
            ts = self.sample_t[i0:i1]
            xs = positions_at(self.traj, ts, self.scene.street_length_m)
            per = {i: self.link(i, xs, jitter=True) for i in self.scene.sbs_ids}
            s = self.machine.serving if serving is None else serving
            st = self.machine.state if state is None else state
            self._append(ts, xs, np.full(len(ts), s), per[s], ch.rss(self.models.rss, s, xs),
                         [st.value] * len(ts), per)
        self.next_sample = i1

    def _reactive_sample(self, t):
        x = self.x_at(t)
        per = {i: float(self.link(i, x, jitter=True)) for i in self.scene.sbs_ids}
        m = self.machine
        before = (m.state, m.serving)
        reactive_step(m, per[m.serving], t, self.reactive_cfg, per)
        if (m.state, m.serving) != before:
            if m.state is HoState.INTERRUPTED:
                self.record(t, "Interrupted", rssi_dbm=per[m.serving])
            elif m.state is HoState.RECONNECTED:
                self.record(t, "Reconnected", serving=m.serving, rssi_dbm=per[m.serving])
        s = m.serving
        self._append(np.array([t]), np.array([x]), np.array([s]), np.array([per[s]]),
                     np.array([ch.rss(self.models.rss, s, x)]), [m.state.value],
                     {i: np.array([v]) for i, v in per.items()})

    def _append(self, ts, xs, serving, rssi, unblocked, states, per):
        r = self.rows
        r["t"].append(ts)
        r["x"].append(xs)
        r["serving"].append(serving)
        r["rssi"].append(np.asarray(rssi, dtype=float))
        r["unblocked"].append(np.asarray(unblocked, dtype=float))
        r["state"].extend(states)
        for i, v in per.items():
            self.rss_rows[i].append(np.asarray(v, dtype=float))

    # -- camera / server pipeline -----------------------------------------
    def _scene_objects(self, t):
        objs = [SceneObject("car", self.x_at(t), self.traj.y_lane, *self.cfg.user_size_m)]
        ob = self.scene.obstacle
        if ob is not None and ob.class_label in OBSTACLE_CLASSES:
            x0, x1, y0, y1 = ob.footprint
            cx, cy = ob.center
            objs.append(SceneObject(ob.class_label, cx, cy, x1 - x0, y1 - y0))
        return objs

    def on_frame(self, t, seq_no):
        objs = self._scene_objects(t)
        frames = []
        for site in sorted(self.scene.sbs_list, key=lambda s: s.id):
            dets = []
            for obj in objs:
                if self.cfg.miss_prob > 0 and self.rng_cam.random() < self.cfg.miss_prob:
                    continue
                d = project(site.camera, obj, self.cfg.noise_px, self.rng_cam)
                if d is not None:
                    dets.append(d)
            frames.append(Frame(site.id, seq_no, t, dets))
        if self.cfg.record_frames:
            self.frames.extend(frames)
        if seq_no % 2 == 1 and self.prev_frames is not None:
            pair = {"pair": seq_no // 2, "frames": (self.prev_frames, frames)}
            self.schedule(t + self.budget.t_rgb, EventKind.IMAGES_AT_SERVER, pair)
        self.prev_frames = frames
        t_next = (seq_no + 1) / self.cfg.fps
        if t_next <= self.t_end:
            self.schedule(t_next, EventKind.FRAME_CAPTURE, seq_no + 1)

    def on_images(self, t, pair):
        self.schedule(t + self.budget.t_odl, EventKind.DETECTION_DONE, pair)

    def _user_detection(self, frames):
        """The car detection sitting most centrally in its camera's view."""
        best = None
        for f in frames:
            cam = self.scene.sbs(f.camera_id).camera
            for d in f.detections:
                if d.class_label != "car":
                    continue
                col = d.center[0]
                margin = min(col, cam.image_width_px - col)
                if best is None or margin > best[0]:
                    best = (margin, d, cam)
        return None if best is None else best[1:]

    def on_detection(self, t, pair):
        fa, fb = pair["frames"]
        ua, ub = self._user_detection(fa), self._user_detection(fb)
        if ua is None or ub is None:
            return
        ta, tb = fa[0].timestamp, fb[0].timestamp
        if self.track is None:
            self.track = start_track(1, ua[0], ua[1], ta)
        elif ta > self.track.last_update:
            self.track = update_track(self.track, ua[0], ua[1], ta)
        first = self.track
        self.track = update_track(self.track, ub[0], ub[1], tb)
        if self.cfg.strategy != "proactive" or not self.machine.accepts_blk:
            return
        seen = any(d.class_label in OBSTACLE_CLASSES for f in (*fa, *fb) for d in f.detections)
        blk = detect_blk(self.track, seen, self.shadows, self.machine.serving, t)
        if blk is None:
            return
        pho_step(self.machine, PhoEvent.BLK, t)
        self.record(t, "BlkDetected")
        payload = {"pair": pair["pair"], "pos": first.last_pos_m, "anchor": ta,
                   "speed": self.track.speed_mps, "heading": self.track.heading, "blk": blk}
        self.schedule(t + self.budget.t_inf, EventKind.INFERENCE_DONE, payload)

    def on_inference(self, t, p):
        blk = p["blk"]
        start = entry_point(blk.shadow, p["heading"])
        t_to_blk = float(self.models.predictor(p["pos"][0], p["pos"][1], p["speed"], start, p["heading"]))
        try:
            target = select_target(self.scene, self.models.rss, self.shadows, blk.serving_sbs)
        except NoTargetError as exc:
            pho_step(self.machine, PhoEvent.ABORT, t)
            self.record(t, "Abort", t_to_blk=t_to_blk, reason=str(exc))
            return
        plan = plan_trigger(t_to_blk, self.budget, p["speed"], anchor_time=p["anchor"],
                            target_sbs=target, trigger_offset_m=self.cfg.trigger_offset_m,
                            complete_at_boundary=self.cfg.complete_at_boundary)
        if isinstance(plan, Abort):
            pho_step(self.machine, PhoEvent.ABORT, t)
            self.record(t, "Abort", t_to_blk=t_to_blk, reason=plan.reason)
            return
        pho_step(self.machine, PhoEvent.PLAN, t, plan)
        self.record(t, "Waiting", t_to_blk=plan.t_to_blk, t_w=plan.t_w, d=plan.trigger_distance_d,
                    t_exec=plan.t_exec)
        self.schedule(max(plan.trigger_at, t), EventKind.TRIGGER_FIRE, {"pair": p["pair"]})

    def on_trigger(self, t, p):
        m = self.machine
        pho_step(m, PhoEvent.TRIGGER, t)
        x = self.x_at(t)
        self.record(t, "HoTriggered", t_to_blk=m.plan.t_to_blk, t_w=m.plan.t_w,
                    d=m.plan.trigger_distance_d, t_exec=m.plan.t_exec, x_m=x,
                    rssi_dbm=float(self.link(m.serving, x)))
        self.schedule(t + self.budget.t_ho, EventKind.HO_COMPLETE, p)

    def on_complete(self, t, p):
        m = self.machine
        plan = m.plan
        pho_step(m, PhoEvent.COMPLETE, t)
        x = self.x_at(t)
        self.record(t, "HoComplete", t_to_blk=plan.t_to_blk, t_w=plan.t_w,
                    d=plan.trigger_distance_d, t_exec=plan.t_exec, x_m=x,
                    rssi_dbm=float(self.link(m.serving, x)))

    # -- result ------------------------------------------------------------
    def result(self) -> RunResult:
        r = self.rows
        cat = lambda k, dt=float: np.concatenate(r[k]).astype(dt) if r[k] else np.zeros(0, dt)
        t, x = cat("t"), cat("x")
        serving = cat("serving", int)
        in_shadow = np.zeros(len(t), dtype=bool)
        for sid, sh in self.shadows.items():
            if sh is not None:
                in_shadow |= (serving == sid) & sh.contains(x)
        sh0 = self.shadows.get(self.initial_serving)
        entry_t = None
        if sh0 is not None:
            gap = (entry_point(sh0, self.traj.direction) - self.traj.x_start) * self.traj.direction
            if gap >= 0:
                entry_t = gap / self.traj.speed_mps
        res = RunResult(
            t=t, x=x, serving=serving, rssi=cat("rssi"), rssi_unblocked=cat("unblocked"),
            in_shadow=in_shadow, mos=ch.mos(self.models.mos, cat("rssi")), state=list(r["state"]),
            rss_by_sbs={i: (np.concatenate(v) if v else np.zeros(0)) for i, v in self.rss_rows.items()},
            records=self.records, plan=self.machine.plan,
            shadows=self.shadows, sample_dt=self.cfg.sample_dt, strategy=self.cfg.strategy,
            initial_serving=self.initial_serving, shadow_entry_t=entry_t,
            frames=self.frames, event_log=self.event_log,
        )
        res.summary = metrics(res)
        return res


def run(scenario: Scenario) -> RunResult:
    return Simulation(scenario).run()


def metrics(res: RunResult) -> dict:
    dt = res.sample_dt
    n = len(res.t)
    interrupted = np.array([s == HoState.INTERRUPTED.value for s in res.state], dtype=bool)
    out = {
        "strategy": res.strategy,
        "duration_s": float(res.t[-1]) if n else 0.0,
        "samples": n,
        "initial_serving": res.initial_serving,
        "in_shadow_s": float(res.in_shadow.sum() * dt),
        "interruption_s": float((res.in_shadow | interrupted).sum() * dt),
        "mos_min": float(res.mos.min()) if n else None,
        "mos_mean": float(res.mos.mean()) if n else None,
        "rssi_min_dbm": float(res.rssi.min()) if n else None,
        "blockage_dip_db": float(np.max(res.rssi_unblocked - res.rssi)) if n else 0.0,
        "mos_region_fraction": {},
        "handovers": sum(1 for r in res.records if r["transition"] in ("HoComplete", "Reconnected")),
        "shadow_entry_t": res.shadow_entry_t,
    }
    if n:
        regions = [ch.mos_region(m) for m in res.mos]
        for name, _ in ch.MOS_REGIONS:
            out["mos_region_fraction"][name] = regions.count(name) / n
        mos_ref = float(res.mos.max())
        out["mos_ref"] = mos_ref
        out["qoe_drop_pct"] = 100.0 * (mos_ref - out["mos_min"]) / mos_ref
    rmax = float(res.rssi.max()) if n else None
    trig = [r for r in res.records if r["transition"] == "HoTriggered"]
    comp = [r for r in res.records if r["transition"] == "HoComplete"]
    if comp:
        c = comp[0]
        out.update({
            "t_trigger": trig[0]["t"] if trig else None,
            "t_complete": c["t"],
            "x_complete": c["x_m"],
            "rssi_at_trigger_dbm": trig[0]["rssi_dbm"] if trig else None,
            "rssi_at_complete_dbm": c["rssi_dbm"],
            "rssi_norm_at_complete": 10.0 ** ((c["rssi_dbm"] - rmax) / 10.0),
            "rssi_norm_drop_at_ho_pct": 100.0 * (1.0 - 10.0 ** ((c["rssi_dbm"] - rmax) / 10.0)),
            "t_to_blk": c["t_to_blk"],
            "t_w": c["t_w"],
            "d": c["d"],
            "t_exec": c["t_exec"],
            "completion_margin_s": (res.shadow_entry_t - c["t"]) if res.shadow_entry_t is not None else None,
        })
    if res.plan is not None:
        out["plan"] = {"t_to_blk": res.plan.t_to_blk, "t_w": res.plan.t_w,
                       "d": res.plan.trigger_distance_d, "t_exec": res.plan.t_exec,
                       "speed_mps": res.plan.speed, "anchor_time": res.plan.anchor_time,
                       "target": res.plan.target_sbs}
    return out


def compare(baseline: dict, proactive: dict) -> dict:
    """QoE gain of the proactive run over a baseline run (both metric dicts)."""
    ref = max(baseline.get("mos_ref", 5.0), proactive.get("mos_ref", 5.0))
    return {
        "mos_min_baseline": baseline["mos_min"],
        "mos_min_proactive": proactive["mos_min"],
        "qoe_improvement_pct": 100.0 * (proactive["mos_min"] - baseline["mos_min"]) / ref,
        "interruption_saved_s": baseline["interruption_s"] - proactive["interruption_s"],
    }


def with_axis(sc: Scenario, axis: str, value: float) -> Scenario:
    if axis == "speed":
        traj = replace(sc.scene.trajectory, speed_mps=mph_to_mps(value))
        return replace(sc, scene=replace(sc.scene, trajectory=traj))
    if axis == "trigger_offset":
        return replace(sc, run=replace(sc.run, trigger_offset_m=float(value)))
    if axis == "blockage_loss":
        blk = replace(sc.models.blockage, extra_loss_db=float(value))
        return replace(sc, models=replace(sc.models, blockage=blk))
    raise ConfigError(f"sweep axis must be one of {SWEEP_AXES}, got {axis!r}")


def sweep(base: Scenario, axis: str, values, workers: int = 1) -> list:
    """Independent runs per value, results in input order."""
    values = list(values)
    if not values:
        raise ConfigError("sweep needs at least one value")
    scenarios = [with_axis(base, axis, v) for v in values]
    for s in scenarios:
        validate(s)
    if workers > 1 and len(scenarios) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(run, scenarios))
    return [run(s) for s in scenarios]


def request_distance(sc: Scenario) -> Optional[float]:
    """Distance from the trajectory start to the serving shadow entry."""
    shs = shadows(sc.scene)
    x0 = sc.scene.trajectory.x_start
    rss_now = {i: ch.link_rssi(sc.models.rss, sc.models.blockage, shs, i, x0) for i in sc.scene.sbs_ids}
    sh = shs.get(_best_sbs(rss_now))
    if sh is None:
        return None
    d = sc.scene.trajectory.direction
    return (entry_point(sh, d) - x0) * d


def sweep_table(base: Scenario, axis: str, values, results, request_distance_m=None) -> list:
    """One row per swept value combining planned and simulated quantities.

    For the speed axis the planned columns assume the BLK request is raised
    ``request_distance_m`` before the blocked area (default: the scenario's own
    start-to-entry distance); ``sim_*`` columns come from the runs themselves.
    """
    rows = []
    if axis == "speed":
        dist = request_distance_m if request_distance_m is not None else request_distance(base)
        planned = trigger_table(dist, [mph_to_mps(v) for v in values], base.budget) if dist else None
        for i, (v, res) in enumerate(zip(values, results)):
            s = res.summary
            row = {"speed_mph": v, "speed_mps": mph_to_mps(v)}
            if planned:
                row.update({"t_to_blk": planned[i]["t_to_blk"], "t_w": planned[i]["t_w"],
                            "d": planned[i]["d"]})
            row.update({"sim_t_to_blk": s.get("t_to_blk"), "sim_t_w": s.get("t_w"), "sim_d": s.get("d"),
                        "in_shadow_s": s["in_shadow_s"], "mos_min": s["mos_min"]})
            rows.append(row)
    elif axis == "trigger_offset":
        ref = None
        for v, res in zip(values, results):
            if v == 0:
                ref = res.summary.get("rssi_norm_at_complete")
        if ref is None:
            ref = max((r.summary.get("rssi_norm_at_complete") or 0.0) for r in results)
        for v, res in zip(values, results):
            s = res.summary
            nrm = s.get("rssi_norm_at_complete")
            rows.append({"trigger_offset_m": v, "x_complete": s.get("x_complete"),
                         "rssi_at_complete_dbm": s.get("rssi_at_complete_dbm"),
                         "rssi_norm_at_complete": nrm,
                         "norm_rssi_drop_pct": None if nrm is None or not ref else 100.0 * (1.0 - nrm / ref),
                         "mos_min": s["mos_min"]})
    else:
        for v, res in zip(values, results):
            s = res.summary
            rows.append({"blockage_loss_db": v, "blockage_dip_db": s["blockage_dip_db"],
                         "mos_min": s["mos_min"], "interruption_s": s["interruption_s"]})
    return rows
