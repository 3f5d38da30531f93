"""CSV/JSON result files: raw.csv, summary.csv and meta.json."""
from __future__ import annotations

import csv
import json
import platform
from pathlib import Path

import numpy as np

from . import __version__
from .configs import config_from_mapping, config_to_mapping
from .simulator import ExperimentConfig, Summary, SummaryRow, Trajectory, summarize

RAW_HEADER = ["policy", "rep", "t", "cum_regret"]
SUMMARY_HEADER = ["policy", "t", "mean", "std", "q10", "q90"]


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def emit(trajectories, out_dir, config: ExperimentConfig | None = None,
         wall_time: float | None = None) -> dict[str, Path]:
    """Write the three result files; returns their paths keyed by name."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise OSError(f"cannot create output directory {out}: {e}") from e
    trajectories = list(trajectories)
    paths = {name: out / name for name in ("raw.csv", "summary.csv", "meta.json")}

    raw_rows = [
        (tr.label, tr.rep, t, repr(float(v)))
        for tr in trajectories
        for t, v in zip(tr.checkpoints, tr.regret)
    ]
    _write_csv(paths["raw.csv"], RAW_HEADER, raw_rows)

    summary_rows = []
    if trajectories:
        for r in summarize(trajectories).rows:
            summary_rows.append((r.policy, r.t, repr(r.mean), repr(r.std), repr(r.q10), repr(r.q90)))
    _write_csv(paths["summary.csv"], SUMMARY_HEADER, summary_rows)

    meta = {
        "config": config_to_mapping(config) if config is not None else None,
        "seed": config.master_seed if config is not None else None,
        "version": __version__,
        "python": platform.python_version(),
        "wall_time_s": wall_time,
    }
    with open(paths["meta.json"], "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2)
        fh.write("\n")
    return paths


def load_raw(path) -> list[Trajectory]:
    groups: dict[tuple, list] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != RAW_HEADER:
            raise ValueError(f"{path}: unexpected header {header}")
        for policy, rep, t, v in reader:
            groups.setdefault((policy, int(rep)), []).append((int(t), float(v)))
    out = []
    for (policy, rep), pts in groups.items():
        out.append(Trajectory(policy, rep, tuple(t for t, _ in pts), np.array([v for _, v in pts])))
    return out


def load_summary(path) -> Summary:
    rows = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != SUMMARY_HEADER:
            raise ValueError(f"{path}: unexpected header {header}")
        for policy, t, *vals in reader:
            rows.append(SummaryRow(policy, int(t), *map(float, vals)))
    return Summary(tuple(rows))


def load_meta_config(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        meta = json.load(fh)
    return config_from_mapping(meta["config"], source=str(path))
