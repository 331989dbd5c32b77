"""``phosim`` command line: dataset generation, training, simulation, sweeps and plots."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import config as cf
from .engine import SWEEP_AXES, TRACE_COLUMNS, RunResult, run, sweep, sweep_table
from .errors import ConfigError
from .predictor import (Dataset, TrainingError, generate_dataset, r2_score, predict_batch,
                        save_model, split, train)
from .scene import mph_to_mps

log = logging.getLogger("phosim")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3


class UsageError(ConfigError):
    pass


# -- output bundle --------------------------------------------------------------

def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.floating):
        return float(v)
    return v


def _fmt(arr) -> list:
    # repr of a Python float is the shortest exact round-trip form
    return [repr(v) for v in np.asarray(arr, dtype=float).tolist()]


def _write_columns(path, header, columns):
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        fh.writelines(",".join(row) + "\n" for row in zip(*columns))


def write_trace(res: RunResult, path):
    norm = res.rssi_norm if len(res.rssi) else []
    _write_columns(path, TRACE_COLUMNS,
                   [_fmt(res.t), _fmt(res.x), [str(int(s)) for s in res.serving], _fmt(res.rssi),
                    _fmt(norm), _fmt(res.mos), res.state])


def write_rss(res: RunResult, path):
    ids = sorted(res.rss_by_sbs)
    _write_columns(path, ["t_s", "x_m", *(f"sbs{i}_dbm" for i in ids)],
                   [_fmt(res.t), _fmt(res.x), *(_fmt(res.rss_by_sbs[i]) for i in ids)])


def write_events(res: RunResult, path):
    with open(path, "w") as fh:
        for rec in res.records:
            fh.write(json.dumps(_jsonable(rec), sort_keys=True) + "\n")


def write_frames(res: RunResult, path):
    with open(path, "w") as fh:
        for fr in res.frames:
            fh.write(json.dumps(_jsonable(fr.to_record()), sort_keys=True) + "\n")


def write_bundle(res: RunResult, cfg: dict, out_dir, frame_log=False, rss=True) -> Path:
    """trace.csv, events.jsonl and summary.json; rss.csv (per-SBS traces for plots) unless
    ``rss`` is False; frames.jsonl on request."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_trace(res, out / "trace.csv")
    if rss:
        write_rss(res, out / "rss.csv")
    write_events(res, out / "events.jsonl")
    if frame_log:
        write_frames(res, out / "frames.jsonl")
    summary = {"config": cfg, "config_hash": cf.config_hash(cfg), "seed": cfg["run"]["seed"],
               "metrics": _jsonable(res.summary)}
    with open(out / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return out


def write_table(rows: list, path):
    if not rows:
        return
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: ("" if v is None else v) for k, v in r.items()})


# -- helpers --------------------------------------------------------------------

def parse_values(text: str) -> list:
    """``"5,10,15"`` or an inclusive range ``"start:stop:step"``."""
    text = (text or "").strip()
    if not text:
        raise UsageError("--values must not be empty")
    try:
        if ":" in text:
            parts = [float(p) for p in text.split(":")]
            if len(parts) != 3 or parts[2] == 0:
                raise UsageError("--values range must be start:stop:step with a non-zero step")
            a, b, step = parts
            n = int(np.floor((b - a) / step + 1e-9)) + 1
            if n <= 0:
                raise UsageError("--values range is empty")
            vals = [a + i * step for i in range(n)]
        else:
            vals = [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise UsageError(f"--values: cannot parse {text!r}") from None
    if not vals:
        raise UsageError("--values must not be empty")
    return [round(v, 9) for v in vals]


def _load(args, extra=None) -> dict:
    over = dict(extra or {})
    if getattr(args, "seed", None) is not None:
        over.setdefault("run", {})["seed"] = args.seed
    if getattr(args, "strategy", None):
        over.setdefault("strategy", {})["name"] = args.strategy
    if getattr(args, "model", None):
        over.setdefault("paths", {})["model"] = str(args.model)
        over.setdefault("strategy", {})["predictor"] = "net"
    return cf.load_config(args.config, over)


# -- commands -------------------------------------------------------------------

def cmd_generate_dataset(args) -> int:
    if args.n is not None and args.n <= 0:
        raise UsageError("--n must be positive")
    cfg = _load(args, {"dataset": {"n": args.n}} if args.n else None)
    d = cfg["dataset"]
    scene = cf.build_scene(cfg)
    ds = generate_dataset(scene.street_length_m, scene.street_width_m, cf.dataset_blocked_start(cfg),
                          n=d["n"], speeds=[mph_to_mps(v) for v in d["speeds_mph"]],
                          rng=np.random.default_rng(cfg["run"]["seed"]),
                          y_range=tuple(d["y_range"]) if d["y_range"] else None,
                          direction=scene.trajectory.direction)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    ds.to_csv(out)
    print(f"wrote {len(ds)} samples to {out}")
    return EXIT_OK


def cmd_train(args) -> int:
    cfg = _load(args)
    ds = Dataset.from_csv(args.dataset)
    seed = cfg["run"]["seed"]
    tr, va, te = split(ds, tuple(cfg["dataset"]["split"]), seed=seed)
    net, hist = train(tr, va, cf.train_config(cfg, seed))
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_model(net, out)
    hist_path = Path(args.history) if args.history else out.with_name(out.stem + "_history.csv")
    hist.to_csv(hist_path)
    if len(te):
        pred = predict_batch(net, te.features, warn=False)
        r2 = r2_score(te.labels, pred)
        mae = float(np.mean(np.abs(pred - te.labels)))
        print(f"test R2 = {r2:.6f}  MAE = {mae:.4f} s  (n = {len(te)})")
    print(f"model -> {out}\nhistory -> {hist_path}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = _load(args, {"run": {"record_frames": True}} if args.frame_log else None)
    res = run(cf.build_scenario(cfg))
    out = write_bundle(res, cfg, args.out or cfg["paths"]["out_dir"], frame_log=args.frame_log)
    m = res.summary
    print(f"{m['strategy']}: min MOS {m['mos_min']:.3f}, in-shadow {m['in_shadow_s']:.3f} s, "
          f"interruption {m['interruption_s']:.3f} s, handovers {m['handovers']} -> {out}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    if args.axis not in SWEEP_AXES:
        raise UsageError(f"--axis must be one of {SWEEP_AXES}")
    values = parse_values(args.values)
    cfg = _load(args)
    base = cf.build_scenario(cfg)
    results = sweep(base, args.axis, values, workers=args.workers)
    rows = sweep_table(base, args.axis, values, results,
                       cfg["strategy"]["request_distance_m"] if args.axis == "speed" else None)
    out = Path(args.out or cfg["paths"]["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    for v, res in zip(values, results):
        sub = _axis_override(args.axis, v)
        write_bundle(res, cf.deep_merge(cfg, sub), out / f"{args.axis}_{v:g}", rss=args.rss)
    write_table(rows, out / "table.csv")
    with open(out / "sweep.json", "w") as fh:
        json.dump({"axis": args.axis, "values": values, "config_hash": cf.config_hash(cfg),
                   "rows": _jsonable(rows)}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    cols = list(rows[0])
    print("  ".join(cols))
    for r in rows:
        print("  ".join("-" if r[c] is None else f"{r[c]:.4g}" for c in cols))
    return EXIT_OK


def _axis_override(axis, v) -> dict:
    if axis == "speed":
        return {"scene": {"trajectory": {"speed_mph": v, "speed_mps": None}}}
    if axis == "trigger_offset":
        return {"strategy": {"trigger_offset_m": v}}
    return {"channel": {"blockage_loss_db": v}}


def _read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def cmd_plot(args) -> int:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    bundle = Path(args.bundle)
    try:
        trace = _read_csv(bundle / "trace.csv")
    except FileNotFoundError:
        raise ConfigError(f"{bundle} has no trace.csv") from None
    if not trace:
        raise RuntimeError("trace.csv is empty; nothing to plot")
    rss = _read_csv(bundle / "rss.csv") if (bundle / "rss.csv").exists() else []
    events = []
    if (bundle / "events.jsonl").exists():
        events = [json.loads(l) for l in open(bundle / "events.jsonl") if l.strip()]
    out = Path(args.out) if args.out else bundle
    out.mkdir(parents=True, exist_ok=True)
    plt.rcParams["svg.hashsalt"] = "phosim"
    meta = {"Date": None}

    t = np.array([float(r["t_s"]) for r in trace])
    x = np.array([float(r["x_m"]) for r in trace])
    marks = [(e["transition"], e["t"], e.get("x_m")) for e in events
             if e["transition"] in ("HoTriggered", "HoComplete", "Interrupted", "Reconnected")]
    written = []

    fig, ax = plt.subplots(figsize=(7, 4))
    if rss:
        for col in [c for c in rss[0] if c.startswith("sbs")]:
            ax.plot([float(r["x_m"]) for r in rss], [float(r[col]) for r in rss], lw=1,
                    label=col.replace("_dbm", "").upper())
    ax.plot(x, [float(r["rssi_dbm"]) for r in trace], "k--", lw=1, label="serving")
    for name, te, xe in marks:
        xm = xe if xe is not None else float(np.interp(te, t, x))
        ax.axvline(xm, ls=":", color="C3" if name == "HoTriggered" else "C2", label=name)
    ax.set_xlabel("x (m)")
    ax.set_ylabel("RSSI (dBm)")
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(out / "rssi.svg", metadata=meta)
    plt.close(fig)
    written.append(out / "rssi.svg")

    fig, ax = plt.subplots(figsize=(7, 3))
    ax.plot(t, [float(r["mos"]) for r in trace], lw=1)
    for name, te, _ in marks:
        ax.axvline(te, ls=":", color="C3" if name == "HoTriggered" else "C2", label=name)
    ax.set_ylim(1, 5)
    ax.set_xlabel("t (s)")
    ax.set_ylabel("MOS")
    if marks:
        ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(out / "mos.svg", metadata=meta)
    plt.close(fig)
    written.append(out / "mos.svg")
    for p in written:
        print(p)
    return EXIT_OK


# -- entry point ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="phosim", description="Vision-aided proactive handover simulator")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, seed=True):
        sp.add_argument("--config", type=Path, help="YAML scenario (merged over the defaults)")
        if seed:
            sp.add_argument("--seed", type=int)

    g = sub.add_parser("generate-dataset", help="write a labelled training CSV")
    common(g)
    g.add_argument("--n", type=int)
    g.add_argument("--out", required=True, type=Path)
    g.set_defaults(func=cmd_generate_dataset)

    t = sub.add_parser("train", help="fit the time-to-blockage regressor")
    common(t)
    t.add_argument("--dataset", required=True, type=Path)
    t.add_argument("--out", required=True, type=Path)
    t.add_argument("--history", type=Path)
    t.set_defaults(func=cmd_train)

    s = sub.add_parser("simulate", help="run one scenario and write an output bundle")
    common(s)
    s.add_argument("--out", type=Path)
    s.add_argument("--strategy", choices=("proactive", "reactive", "none"))
    s.add_argument("--model", type=Path, help="trained model file; switches the predictor to it")
    s.add_argument("--frame-log", action="store_true")
    s.set_defaults(func=cmd_simulate)

    w = sub.add_parser("sweep", help="run one scenario per value of an axis")
    common(w)
    w.add_argument("--axis", required=True)
    w.add_argument("--values", required=True)
    w.add_argument("--out", type=Path)
    w.add_argument("--strategy", choices=("proactive", "reactive", "none"))
    w.add_argument("--model", type=Path)
    w.add_argument("--workers", type=int, default=1)
    w.add_argument("--rss", action="store_true", help="also write per-SBS rss.csv for each value")
    w.set_defaults(func=cmd_sweep)

    pl = sub.add_parser("plot", help="render SVG plots from a bundle")
    pl.add_argument("bundle", type=Path)
    pl.add_argument("--out", type=Path)
    pl.set_defaults(func=cmd_plot)
    return p


def main(argv=None) -> int:
    level = os.environ.get("PHOSIM_LOG_LEVEL", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, RuntimeError, ValueError, TrainingError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
