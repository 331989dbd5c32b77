"""Scenario configuration: packaged YAML defaults, schema validation, hashing, object builders."""

from __future__ import annotations

import copy
import functools
import hashlib
import json
from importlib import resources

import jsonschema
import yaml

from .channel import BlockageModel, MosMapping, RssModel
from .engine import Models, NetPredictor, OraclePredictor, RunConfig, Scenario
from .errors import ConfigError
from .perception import CameraModel
from .pho import ReactiveConfig, TimingBudget
from .predictor import TrainConfig, load_model
from .scene import Obstacle, SbsSite, Scene, Trajectory, mph_to_mps, shadows


def _data(name: str) -> str:
    return resources.files("phosim").joinpath("data", name).read_text(encoding="utf-8")


def default_config() -> dict:
    return yaml.safe_load(_data("default_scenario.yaml"))


def schema() -> dict:
    return json.loads(_data("scenario.schema.json"))


def deep_merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in (over or {}).items():
        if isinstance(v, dict) and isinstance(out.get(k), dict) and k != "overrides":
            out[k] = deep_merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


@functools.lru_cache(maxsize=1)
def _validator():
    sch = schema()
    cls = jsonschema.validators.validator_for(sch)
    cls.check_schema(sch)
    return cls(sch)


def validate_config(cfg: dict):
    err = jsonschema.exceptions.best_match(_validator().iter_errors(cfg))
    if err is not None:
        where = ".".join(str(p) for p in err.absolute_path) or "<root>"
        raise ConfigError(f"{where}: {err.message}")


def load_config(path=None, overrides=None) -> dict:
    """Defaults, then the YAML file at ``path``, then ``overrides``; validated."""
    user = {}
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                user = yaml.safe_load(fh) or {}
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
        except yaml.YAMLError as exc:
            raise ConfigError(f"config {path} is not valid YAML: {exc}") from None
        if not isinstance(user, dict):
            raise ConfigError(f"config {path} must be a mapping at the top level")
    cfg = deep_merge(deep_merge(default_config(), user), overrides or {})
    validate_config(cfg)
    return cfg


def canonical_json(cfg: dict) -> str:
    return json.dumps(cfg, sort_keys=True, separators=(",", ":"))


def config_hash(cfg: dict) -> str:
    return hashlib.sha256(canonical_json(cfg).encode()).hexdigest()


def speed_mps(traj_cfg: dict) -> float:
    if traj_cfg.get("speed_mps") is not None:
        return float(traj_cfg["speed_mps"])
    if traj_cfg.get("speed_mph") is not None:
        return mph_to_mps(float(traj_cfg["speed_mph"]))
    raise ConfigError("scene.trajectory: speed_mph or speed_mps is required")


def build_camera(cfg: dict, start_x: float) -> CameraModel:
    c = cfg["camera"]
    return CameraModel(c["image_width_px"], c["image_height_px"], c["fov_deg"], c["coverage_width_m"],
                       float(start_x))


def build_scene(cfg: dict) -> Scene:
    s = cfg["scene"]
    try:
        sites = tuple(SbsSite(int(b["id"]), tuple(float(v) for v in b["pos"]),
                              build_camera(cfg, b.get("camera_start_x", 0.0)))
                      for b in s["sbs"])
        ob = s.get("obstacle")
        obstacle = None if ob is None else Obstacle(ob["class"], tuple(ob["footprint"]), ob["height_m"])
        t = s["trajectory"]
        traj = Trajectory(float(t["y_lane"]), float(t["x_start"]), int(t["direction"]), speed_mps(t))
        return Scene(sites, traj, obstacle, s["street"]["length_m"], s["street"]["width_m"],
                     s.get("blocked_region_start_x"))
    except ValueError as exc:
        raise ConfigError(f"scene: {exc}") from None


def build_scenario(cfg: dict, net=None) -> Scenario:
    """Turn a validated config into engine objects. ``net`` overrides paths.model."""
    scene = build_scene(cfg)
    ch = cfg["channel"]
    try:
        overrides = {int(k): v for k, v in ch.get("overrides", {}).items()}
        rss_model = RssModel.for_sites(scene.sbs_list, ch["peak_dbm"], ch["floor_dbm"], ch["width_m"],
                                       overrides)
        blk = BlockageModel(ch["blockage_loss_db"], ch["transition_width_m"])
        mos_map = MosMapping(tuple(tuple(a) for a in ch["mos_anchors"]))
        budget = TimingBudget(**cfg["budget"])
    except ValueError as exc:
        raise ConfigError(f"channel/budget: {exc}") from None
    st = cfg["strategy"]
    predictor = OraclePredictor()
    if st["predictor"] == "net":
        if net is None:
            path = cfg["paths"].get("model")
            if not path:
                raise ConfigError("strategy.predictor: 'net' needs paths.model")
            net = load_model(path)
        predictor = NetPredictor(net)
    r = st["reactive"]
    run = RunConfig(
        strategy=st["name"], seed=int(cfg["run"]["seed"]), horizon_s=cfg["run"]["horizon_s"],
        sample_dt=cfg["run"]["sample_dt"], fps=cfg["camera"]["fps"],
        complete_at_boundary=st["complete_at_boundary"], trigger_offset_m=st["trigger_offset_m"],
        reactive=ReactiveConfig(r["threshold_dbm"], r["time_to_trigger_s"], r["reconnection_delay_s"]),
        noise_px=cfg["camera"]["noise_px"], miss_prob=cfg["camera"]["miss_prob"],
        jitter_db=ch["jitter_db"], user_size_m=tuple(cfg["scene"]["user_size_m"]),
        record_frames=cfg["run"]["record_frames"],
    )
    return Scenario(scene, Models(rss_model, blk, mos_map, predictor), budget, run)


def dataset_blocked_start(cfg: dict) -> float:
    """Where the training labels count down to: the override, else the first shadow entry."""
    scene = build_scene(cfg)
    if scene.blocked_region_start_x is not None:
        return float(scene.blocked_region_start_x)
    entries = [s.x_enter for s in shadows(scene).values() if s is not None]
    if not entries:
        raise ConfigError("dataset: no blocked area (no obstacle shadow and no blocked_region_start_x)")
    return min(entries)


def train_config(cfg: dict, seed: int) -> TrainConfig:
    t = cfg["train"]
    return TrainConfig(epochs=t["epochs"], batch_size=t["batch_size"], hidden=tuple(t["hidden"]),
                       lr=t["lr"], lr_final=t["lr_final"], seed=seed)
