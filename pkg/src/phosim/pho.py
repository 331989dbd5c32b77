"""BLK event detection, execution-time budget, trigger planning and handover state machines."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .channel import rss
from .perception import Track
from .scene import Scene, ShadowInterval


class StateMachineError(RuntimeError):
    pass


class NoTargetError(RuntimeError):
    pass


@dataclass(frozen=True)
class TimingBudget:
    t_rgb: float = 1e-5
    t_odl: float = 0.102
    t_inf: float = 0.001
    t_ho: float = 0.050

    def __post_init__(self):
        for name in ("t_rgb", "t_odl", "t_inf", "t_ho"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    @property
    def t_pipeline(self) -> float:
        """Capture to inference-done: everything before the wait."""
        return self.t_rgb + self.t_odl + self.t_inf

    @property
    def t_s(self) -> float:
        return self.t_rgb + self.t_odl + self.t_inf + self.t_ho

    def t_exec(self, t_w: float) -> float:
        return self.t_rgb + self.t_odl + self.t_inf + t_w + self.t_ho


@dataclass(frozen=True)
class BlkEvent:
    detected_at: float
    user_track: Track
    shadow: ShadowInterval
    serving_sbs: int


@dataclass(frozen=True)
class TriggerPlan:
    t_to_blk: float
    t_w: float
    trigger_distance_d: float
    trigger_at: float
    complete_at: float
    t_exec: float
    speed: float
    anchor_time: float
    target_sbs: Optional[int] = None


@dataclass(frozen=True)
class Abort:
    t_to_blk: float
    reason: str


def detect_blk(track: Optional[Track], obstacle_seen: bool, shadows: dict, serving_sbs: int,
               now: float) -> Optional[BlkEvent]:
    """A BLK event needs a visible obstacle, a shadow on the serving link, and a
    user ahead of that shadow heading into it."""
    if track is None or not obstacle_seen:
        return None
    shadow = shadows.get(serving_sbs)
    if shadow is None:
        return None
    if track.speed_mps <= 0 or track.heading == 0:
        return None
    x = track.last_pos_m[0]
    ahead = x < shadow.x_enter if track.heading > 0 else x > shadow.x_exit
    if not ahead:
        return None
    return BlkEvent(now, track, shadow, serving_sbs)


def plan_trigger(t_to_blk: float, budget: TimingBudget, speed: float, anchor_time: float = 0.0,
                 target_sbs: Optional[int] = None, trigger_offset_m: float = 0.0,
                 complete_at_boundary: bool = True):
    """Wait time and trigger distance for a predicted time-to-blockage.

    With ``complete_at_boundary`` the wait is ``t_to_blk - t_s`` so the handover
    completes as the user reaches the blocked area; otherwise the trigger fires
    there. ``trigger_offset_m`` shifts that point along the path (negative =
    earlier). Returns Abort when the prediction leaves less than ``t_s``.
    """
    if speed <= 0:
        raise ValueError("speed must be positive")
    if not np.isfinite(t_to_blk) or t_to_blk < 0:
        return Abort(float(t_to_blk), "invalid time to blockage")
    if t_to_blk < budget.t_s:
        return Abort(float(t_to_blk), "insufficient time before blockage")
    fixed = budget.t_s if complete_at_boundary else budget.t_pipeline
    t_w = max(0.0, t_to_blk - fixed + trigger_offset_m / speed)
    trigger_at = anchor_time + budget.t_rgb + budget.t_odl + budget.t_inf + t_w
    return TriggerPlan(
        t_to_blk=float(t_to_blk),
        t_w=t_w,
        trigger_distance_d=speed * t_w,
        trigger_at=trigger_at,
        complete_at=trigger_at + budget.t_ho,
        t_exec=budget.t_exec(t_w),
        speed=float(speed),
        anchor_time=anchor_time,
        target_sbs=target_sbs,
    )


def select_target(scene: Scene, rss_model, shadows: dict, serving_sbs: int) -> int:
    """Strongest SBS at the middle of the serving shadow among those with LoS there."""
    shadow = shadows.get(serving_sbs)
    if shadow is None:
        raise NoTargetError(f"SBS {serving_sbs} has no shadow to avoid")
    mid = shadow.midpoint
    best, best_rss = None, -np.inf
    for sid in scene.sbs_ids:
        if sid == serving_sbs:
            continue
        own = shadows.get(sid)
        if own is not None and own.contains(mid):
            continue
        r = rss(rss_model, sid, mid)
        if r > best_rss:
            best, best_rss = sid, r
    if best is None:
        raise NoTargetError("no candidate SBS with line of sight past the obstacle")
    return best


def trigger_table(distance_m: float, speeds_mps, budget: TimingBudget) -> list:
    """Time to blockage, wait and trigger distance for a user ``distance_m`` before
    the blocked area at each speed."""
    rows = []
    for v in speeds_mps:
        t = distance_m / v
        plan = plan_trigger(t, budget, v)
        if isinstance(plan, Abort):
            rows.append({"speed_mps": v, "t_to_blk": t, "t_w": None, "d": None})
        else:
            rows.append({"speed_mps": v, "t_to_blk": t, "t_w": plan.t_w, "d": plan.trigger_distance_d})
    return rows


class HoState(enum.Enum):
    MONITORING = "Monitoring"
    BLK_DETECTED = "BlkDetected"
    WAITING = "Waiting"
    HO_TRIGGERED = "HoTriggered"
    HO_COMPLETE = "HoComplete"
    INTERRUPTED = "Interrupted"
    RECONNECTED = "Reconnected"


class PhoEvent(enum.Enum):
    BLK = "blk"
    PLAN = "plan"
    ABORT = "abort"
    TRIGGER = "trigger"
    COMPLETE = "complete"


PHO_TRANSITIONS = {
    (HoState.MONITORING, PhoEvent.BLK): HoState.BLK_DETECTED,
    (HoState.HO_COMPLETE, PhoEvent.BLK): HoState.BLK_DETECTED,
    (HoState.BLK_DETECTED, PhoEvent.PLAN): HoState.WAITING,
    (HoState.BLK_DETECTED, PhoEvent.ABORT): HoState.MONITORING,
    (HoState.WAITING, PhoEvent.TRIGGER): HoState.HO_TRIGGERED,
    (HoState.HO_TRIGGERED, PhoEvent.COMPLETE): HoState.HO_COMPLETE,
}


@dataclass
class HoMachine:
    serving: int
    state: HoState = HoState.MONITORING
    target: Optional[int] = None
    plan: Optional[TriggerPlan] = None
    interruption_pending: bool = False
    below_since: Optional[float] = None
    interrupted_at: Optional[float] = None
    history: list = field(default_factory=list)  # (t, HoState)

    @property
    def last_time(self) -> float:
        return self.history[-1][0] if self.history else -np.inf

    def _enter(self, state: HoState, now: float):
        if now < self.last_time:
            raise StateMachineError(f"time went backwards: {now} < {self.last_time}")
        self.state = state
        self.history.append((now, state))

    @property
    def accepts_blk(self) -> bool:
        return (self.state, PhoEvent.BLK) in PHO_TRANSITIONS


def pho_step(m: HoMachine, event: PhoEvent, now: float, payload=None) -> HoMachine:
    """Advance the proactive machine. ``payload`` is the TriggerPlan for PLAN."""
    nxt = PHO_TRANSITIONS.get((m.state, event))
    if nxt is None:
        raise StateMachineError(f"illegal transition: {m.state.value} on {event.value}")
    if now < m.last_time:
        raise StateMachineError(f"time went backwards: {now} < {m.last_time}")
    if event is PhoEvent.PLAN and not isinstance(payload, TriggerPlan):
        raise StateMachineError("PLAN needs a TriggerPlan")
    # all checks done before any field changes, so a rejected step leaves m intact
    if event is PhoEvent.PLAN:
        m.plan = payload
        m.target = payload.target_sbs
    elif event is PhoEvent.ABORT:
        m.interruption_pending = True
        m.plan, m.target = None, None
    elif event is PhoEvent.COMPLETE:
        m.serving, m.target = m.target, None
    elif event is PhoEvent.BLK:
        m.interruption_pending = False
    m._enter(nxt, now)
    return m


@dataclass(frozen=True)
class ReactiveConfig:
    threshold_dbm: Optional[float] = None  # None: serving peak minus 20 dB
    time_to_trigger_s: float = 0.100
    reconnection_delay_s: float = 0.150


def reactive_step(m: HoMachine, rssi_dbm: float, now: float, cfg: ReactiveConfig,
                  candidates: Optional[dict] = None) -> HoMachine:
    """Baseline that only reacts to measured signal collapse.

    Serving RSSI below threshold for ``time_to_trigger_s`` declares an
    interruption; ``reconnection_delay_s`` later the user attaches to the
    strongest SBS in ``candidates`` (id -> current RSSI).
    """
    if cfg.threshold_dbm is None:
        raise ValueError("reactive threshold must be resolved before stepping")
    if now < m.last_time:
        raise StateMachineError(f"time went backwards: {now} < {m.last_time}")
    if m.state is HoState.INTERRUPTED:
        if now - m.interrupted_at >= cfg.reconnection_delay_s - 1e-12:
            if not candidates:
                raise NoTargetError("no SBS to reconnect to")
            best = max(sorted(candidates), key=lambda k: candidates[k])
            m.serving = best
            m.below_since = None
            m._enter(HoState.RECONNECTED, now)
        return m
    if rssi_dbm < cfg.threshold_dbm:
        if m.below_since is None:
            m.below_since = now
        if now - m.below_since >= cfg.time_to_trigger_s - 1e-12:
            m.interrupted_at = now
            m._enter(HoState.INTERRUPTED, now)
    else:
        m.below_since = None
    return m
