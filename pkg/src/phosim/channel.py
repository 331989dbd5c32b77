"""Received-signal model along the lane, blockage loss, normalisation and RSSI -> MOS."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

DEFAULT_MOS_ANCHORS = (
    (-60.0, 5.0),
    (-70.0, 4.5),
    (-78.0, 4.0),
    (-85.0, 3.0),
    (-92.0, 2.0),
    (-100.0, 1.0),
)

# lower bounds of each opinion region, best first
MOS_REGIONS = (("excellent", 4.5), ("good", 3.5), ("fair", 2.5), ("poor", 1.5), ("bad", -np.inf))


@dataclass(frozen=True)
class BellParams:
    peak_dbm: float
    center_x: float
    width_m: float
    floor_dbm: float

    def __post_init__(self):
        if not self.peak_dbm > self.floor_dbm:
            raise ValueError("peak_dbm must exceed floor_dbm")
        if self.width_m <= 0:
            raise ValueError("bell width must be positive")

    @property
    def curvature(self) -> float:
        return (self.peak_dbm - self.floor_dbm) / self.width_m ** 2


@dataclass(frozen=True)
class RssModel:
    bells: dict = field(default_factory=dict)  # sbs_id -> BellParams

    @classmethod
    def for_sites(cls, sites, peak_dbm=-55.0, floor_dbm=-95.0, width_m=45.0, overrides=None):
        overrides = overrides or {}
        bells = {}
        for s in sites:
            kw = dict(peak_dbm=peak_dbm, floor_dbm=floor_dbm, width_m=width_m)
            kw.update(overrides.get(s.id, {}))
            bells[s.id] = BellParams(center_x=float(s.pos[0]), **kw)
        return cls(bells)


@dataclass(frozen=True)
class BlockageModel:
    extra_loss_db: float = 25.0
    transition_width_m: float = 0.5

    def __post_init__(self):
        if self.extra_loss_db < 20:
            raise ValueError("blockage loss below 20 dB is not a mmWave body/vehicle blockage")
        if self.transition_width_m < 0:
            raise ValueError("transition width must be non-negative")


@dataclass(frozen=True)
class MosMapping:
    anchors: tuple = DEFAULT_MOS_ANCHORS

    def __post_init__(self):
        a = np.asarray(self.anchors, dtype=float)
        if a.ndim != 2 or a.shape[1] != 2 or len(a) < 2:
            raise ValueError("MOS anchors must be a list of (rssi_dbm, mos) pairs")
        if np.any(np.diff(a[:, 0]) >= 0):
            raise ValueError("MOS anchors must be strictly decreasing in RSSI")
        if np.any(np.diff(a[:, 1]) > 0):
            raise ValueError("MOS must not increase as RSSI decreases")
        if a[:, 1].min() < 1 or a[:, 1].max() > 5:
            raise ValueError("MOS anchors must lie in [1, 5]")


@dataclass(frozen=True)
class RssSample:
    t: float
    x: float
    sbs_id: int
    rssi_dbm: float
    blocked: bool = False


def rss(model: RssModel, sbs_id: int, x):
    """Quadratic-in-dB bell peaking at the SBS x-position, floored."""
    try:
        b = model.bells[sbs_id]
    except KeyError:
        raise KeyError(f"no RSS model for SBS {sbs_id}") from None
    x = np.asarray(x, dtype=float)
    val = np.maximum(b.floor_dbm, b.peak_dbm - b.curvature * (x - b.center_x) ** 2)
    return float(val) if val.ndim == 0 else val


def blockage_loss(x, shadow, blk: BlockageModel):
    """Extra loss in dB at ``x``: full inside the shadow, ramped over the first and
    last ``transition_width_m`` metres, zero outside."""
    x = np.asarray(x, dtype=float)
    if shadow is None:
        loss = np.zeros_like(x)
    else:
        inside = (x >= shadow.x_enter) & (x <= shadow.x_exit)
        if blk.transition_width_m > 0:
            depth = np.minimum(x - shadow.x_enter, shadow.x_exit - x)
            ramp = np.clip(depth / blk.transition_width_m, 0.0, 1.0)
        else:
            ramp = np.ones_like(x)
        loss = np.where(inside, blk.extra_loss_db * ramp, 0.0)
    return float(loss) if loss.ndim == 0 else loss


def apply_blockage(rssi, x, shadow, blk: BlockageModel):
    out = np.asarray(rssi, dtype=float) - blockage_loss(x, shadow, blk)
    return float(out) if out.ndim == 0 else out


def normalize(trace) -> np.ndarray:
    """Linear-power RSSI relative to the trace maximum (1.0 at the max).

    Accepts a sequence of RssSample or plain dBm values.
    """
    vals = [s.rssi_dbm if isinstance(s, RssSample) else s for s in trace]
    if len(vals) == 0:
        raise ValueError("cannot normalise an empty trace")
    db = np.asarray(vals, dtype=float)
    return 10.0 ** ((db - db.max()) / 10.0)


def db_to_mw(dbm):
    return 10.0 ** (np.asarray(dbm, dtype=float) / 10.0)


def mos(mapping: MosMapping, rssi_dbm):
    a = np.asarray(mapping.anchors, dtype=float)[::-1]  # ascending RSSI for np.interp
    out = np.interp(np.asarray(rssi_dbm, dtype=float), a[:, 0], a[:, 1])
    return float(out) if np.ndim(out) == 0 else out


def mos_region(score: float) -> str:
    for name, lo in MOS_REGIONS:
        if score >= lo:
            return name
    return "bad"


def link_rssi(model: RssModel, blk: BlockageModel, shadows: dict, sbs_id: int, x,
              jitter_db: float = 0.0, rng: Optional[np.random.Generator] = None):
    """RSSI of one SBS at lane position(s) ``x`` including blockage and optional jitter."""
    val = apply_blockage(rss(model, sbs_id, x), x, shadows.get(sbs_id), blk)
    if jitter_db > 0:
        val = val + rng.normal(0.0, jitter_db, size=np.shape(val))
    return val
