import itertools

import pytest

from phosim.perception import Track
from phosim.pho import (PHO_TRANSITIONS, Abort, HoMachine, HoState, NoTargetError, PhoEvent,
                        ReactiveConfig, StateMachineError, TimingBudget, TriggerPlan, detect_blk,
                        pho_step, plan_trigger, reactive_step, select_target, trigger_table)
from phosim.scene import ShadowInterval, mph_to_mps, shadows

BUDGET = TimingBudget()

# mph: (T_toBLK, T_w, D) as published
TABLE_II = {
    5: (9.85, 9.66, 21.67),
    10: (4.92, 4.76, 21.30),
    15: (3.28, 3.127, 20.96),
    20: (2.46, 2.30, 20.62),
    25: (1.97, 1.82, 20.19),
    30: (1.64, 1.487, 19.94),
    35: (1.40, 1.25, 19.58),
}


def test_budget_identity():
    assert BUDGET.t_s == pytest.approx(0.15301)
    assert round(BUDGET.t_s, 3) == 0.153
    assert BUDGET.t_pipeline == pytest.approx(0.10301)
    for t_w in (0.0, 0.5, 1.487):
        assert BUDGET.t_exec(t_w) == BUDGET.t_rgb + BUDGET.t_odl + BUDGET.t_inf + t_w + BUDGET.t_ho
    with pytest.raises(ValueError):
        TimingBudget(t_odl=-0.1)


@pytest.mark.parametrize("mph", sorted(TABLE_II))
def test_table_ii(mph):
    t_ref, w_ref, d_ref = TABLE_II[mph]
    row = trigger_table(22.0, [mph_to_mps(mph)], BUDGET)[0]
    assert row["t_to_blk"] == pytest.approx(t_ref, abs=0.01)
    assert row["t_w"] == pytest.approx(w_ref, abs=0.05)
    assert row["d"] == pytest.approx(d_ref, abs=0.2)


def test_plan_30mph_example():
    v = mph_to_mps(30)
    p = plan_trigger(1.64, BUDGET, v, anchor_time=0.0, target_sbs=2)
    assert p.t_w == pytest.approx(1.64 - 0.15301)
    assert p.trigger_distance_d == pytest.approx(v * (1.64 - 0.15301))
    assert p.t_exec == pytest.approx(1.64)
    assert p.trigger_at == pytest.approx(0.10301 + p.t_w)
    assert p.complete_at == pytest.approx(1.64)
    assert p.target_sbs == 2


def test_plan_variants():
    v = 10.0
    at_trigger = plan_trigger(2.0, BUDGET, v, complete_at_boundary=False)
    assert at_trigger.t_w == pytest.approx(2.0 - BUDGET.t_pipeline)
    assert at_trigger.trigger_at == pytest.approx(2.0)
    early = plan_trigger(2.0, BUDGET, v, trigger_offset_m=-5.0)
    assert early.t_w == pytest.approx(2.0 - 0.15301 - 0.5)
    clamped = plan_trigger(0.2, BUDGET, v, trigger_offset_m=-5.0)
    assert clamped.t_w == 0.0


def test_plan_aborts():
    assert isinstance(plan_trigger(0.1, BUDGET, 10.0), Abort)
    assert isinstance(plan_trigger(-1.0, BUDGET, 10.0), Abort)
    assert isinstance(plan_trigger(float("nan"), BUDGET, 10.0), Abort)
    assert not isinstance(plan_trigger(0.15301, BUDGET, 10.0), Abort)
    with pytest.raises(ValueError):
        plan_trigger(1.0, BUDGET, 0.0)


def test_trigger_table_marks_infeasible():
    rows = trigger_table(1.0, [10.0], BUDGET)
    assert rows[0]["t_w"] is None and rows[0]["t_to_blk"] == 0.1


# -- BLK detection / target ------------------------------------------------------------

SH = {1: ShadowInterval(1, 68.38, 90.0), 2: None}


def track(x, speed=13.4, heading=1):
    return Track(1, "car", (0, 0), (x, 9.0), speed, 0.0, heading)


def test_detect_blk_cases():
    ev = detect_blk(track(46.4), True, SH, 1, 0.14)
    assert ev is not None and ev.shadow is SH[1] and ev.serving_sbs == 1
    assert detect_blk(track(46.4), False, SH, 1, 0.1) is None  # no obstacle seen
    assert detect_blk(None, True, SH, 1, 0.1) is None
    assert detect_blk(track(46.4), True, SH, 2, 0.1) is None  # serving link not shadowed
    assert detect_blk(track(70.0), True, SH, 1, 0.1) is None  # already inside
    assert detect_blk(track(46.4, heading=-1), True, SH, 1, 0.1) is None  # moving away
    assert detect_blk(track(46.4, speed=0.0), True, SH, 1, 0.1) is None


def test_select_target(default_scenario):
    sc = default_scenario
    sh = shadows(sc.scene)
    assert select_target(sc.scene, sc.models.rss, sh, 1) == 2
    with pytest.raises(NoTargetError):
        select_target(sc.scene, sc.models.rss, {**sh, 2: ShadowInterval(2, 60.0, 90.0)}, 1)
    with pytest.raises(NoTargetError):
        select_target(sc.scene, sc.models.rss, sh, 2)


# -- proactive state machine --------------------------------------------------------

PLAN = TriggerPlan(1.6, 1.45, 19.4, 1.55, 1.6, 1.6, 13.4, 0.0, target_sbs=2)


def reference_step(state, event):
    """Independent restatement of the proactive flow; None = illegal."""
    if event == "blk":
        return "BlkDetected" if state in ("Monitoring", "HoComplete") else None
    if state == "BlkDetected":
        return {"plan": "Waiting", "abort": "Monitoring"}.get(event)
    if state == "Waiting" and event == "trigger":
        return "HoTriggered"
    if state == "HoTriggered" and event == "complete":
        return "HoComplete"
    return None


@pytest.mark.parametrize("length", range(1, 7))
def test_state_machine_exhaustive(length):
    events = list(PhoEvent)
    for seq in itertools.product(events, repeat=length):
        m = HoMachine(1)
        ref = "Monitoring"
        for k, ev in enumerate(seq):
            nxt = reference_step(ref, ev.value)
            if nxt is None:
                with pytest.raises(StateMachineError):
                    pho_step(m, ev, float(k), PLAN)
                break
            pho_step(m, ev, float(k), PLAN)
            ref = nxt
            assert m.state.value == ref
        assert m.history == sorted(m.history, key=lambda h: h[0])


def test_transition_table_size():
    assert len(PHO_TRANSITIONS) == 6


def test_pho_effects():
    m = HoMachine(1)
    pho_step(m, PhoEvent.BLK, 0.1)
    with pytest.raises(StateMachineError):
        pho_step(m, PhoEvent.PLAN, 0.2, payload=None)
    pho_step(m, PhoEvent.PLAN, 0.2, PLAN)
    assert m.target == 2 and m.plan is PLAN and not m.accepts_blk
    pho_step(m, PhoEvent.TRIGGER, 1.55)
    with pytest.raises(StateMachineError):
        pho_step(m, PhoEvent.COMPLETE, 1.0)  # time went backwards
    pho_step(m, PhoEvent.COMPLETE, 1.6)
    assert m.serving == 2 and m.target is None and m.accepts_blk

    m = HoMachine(1)
    pho_step(m, PhoEvent.BLK, 0.1)
    pho_step(m, PhoEvent.ABORT, 0.2)
    assert m.state is HoState.MONITORING and m.interruption_pending and m.serving == 1


# -- reactive baseline --------------------------------------------------------------------

RCFG = ReactiveConfig(threshold_dbm=-75.0)


def drive(values, dt=0.01, cands=None):
    m = HoMachine(1)
    for i, r in enumerate(values):
        reactive_step(m, r, i * dt, RCFG, cands or {1: r, 2: -60.0, 3: -60.0})
    return m


def test_reactive_interrupt_and_reconnect():
    m = drive([-70.0] * 5 + [-90.0] * 10)  # below from t=0.05; 0.1 s later is t=0.15
    assert m.state is HoState.MONITORING
    m = drive([-70.0] * 5 + [-90.0] * 11)
    assert m.state is HoState.INTERRUPTED and m.interrupted_at == pytest.approx(0.15)
    m = drive([-70.0] * 5 + [-90.0] * 26)  # reconnect at 0.15 + 0.15
    assert m.state is HoState.RECONNECTED
    assert m.serving == 2  # tie between 2 and 3 goes to the lower id
    assert [s for _, s in m.history] == [HoState.INTERRUPTED, HoState.RECONNECTED]


def test_reactive_bounce_resets_timer():
    vals = [-90.0] * 8 + [-70.0] + [-90.0] * 8
    assert drive(vals).state is HoState.MONITORING


def test_reactive_needs_threshold_and_candidates():
    with pytest.raises(ValueError):
        reactive_step(HoMachine(1), -90.0, 0.0, ReactiveConfig())
    m = drive([-90.0] * 11)
    with pytest.raises(Exception):
        reactive_step(m, -90.0, 1.0, RCFG, {})
    with pytest.raises(StateMachineError):
        reactive_step(m, -90.0, 0.0, RCFG, {1: -90.0})


def test_zero_ttt_interrupts_immediately():
    m = HoMachine(1)
    reactive_step(m, -90.0, 0.0, ReactiveConfig(-75.0, 0.0, 0.0), {1: -90.0, 2: -60.0})
    assert m.state is HoState.INTERRUPTED
    reactive_step(m, -90.0, 0.0, ReactiveConfig(-75.0, 0.0, 0.0), {1: -90.0, 2: -60.0})
    assert m.state is HoState.RECONNECTED and m.serving == 2
