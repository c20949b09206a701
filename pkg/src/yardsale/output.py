"""Writers and readers for trajectory CSVs and JSON report files."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Sequence


from .config import config_document
from .errors import YardSaleError
from .experiments import (CondensationRow, EnsembleSummary, Estimate, IncrementReport,
                          SummabilityReport, TrajectoryRecord, WinEstimate)
from .metrics import SNAPSHOT_FIELDS, Snapshots

CSV_HEADER = ",".join(SNAPSHOT_FIELDS)


class OutputError(YardSaleError, OSError):
    pass


def fmt(x: float) -> str:
    # 17 significant digits always round-trip a double
    return format(float(x), ".17g")


def trajectory_csv(snapshots: Snapshots) -> str:
    cols = [snapshots.step] + [getattr(snapshots, n) for n in SNAPSHOT_FIELDS[1:]]
    lines = [CSV_HEADER]
    for row in zip(*(c.tolist() for c in cols)):
        lines.append(",".join([str(row[0])] + [fmt(v) for v in row[1:]]))
    return "\n".join(lines) + "\n"


def parse_trajectory_csv(text: str) -> Snapshots:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or ",".join(rows[0]) != CSV_HEADER:
        raise YardSaleError(f"trajectory CSV header must be {CSV_HEADER!r}")
    body = rows[1:]
    if not body:
        return Snapshots.empty()
    cols = list(zip(*body))
    return Snapshots([int(v) for v in cols[0]], *([float(v) for v in c] for c in cols[1:]))


def read_trajectory_csv(path) -> Snapshots:
    return parse_trajectory_csv(Path(path).read_text())


def _estimate(e: Estimate | None):
    if e is None:
        return None
    lo, hi = e.ci
    return {"mean": e.mean, "stderr": e.stderr, "n": e.n, "ci3": [lo, hi]}


def summary_document(s: EnsembleSummary) -> dict:
    return {
        "config": config_document(s.config),
        "master_seed": s.master_seed,
        "n_trajectories": s.n_trajectories,
        "win_counts": list(s.win_counts),
        "n_condensed": s.n_condensed,
        "n_max_steps": s.n_max_steps,
        "condensation_step": _estimate(s.condensation_step),
        "cumulative_stake_sq": _estimate(s.cumulative_stake_sq),
        "norm_sq_series": {
            "step": s.norm_sq_steps.tolist(),
            "mean": s.norm_sq_mean.tolist(),
            "count": s.norm_sq_count.tolist(),
        },
    }


def win_document(summary: EnsembleSummary, estimates: Sequence[WinEstimate]) -> dict:
    return {
        "config": config_document(summary.config),
        "master_seed": summary.master_seed,
        "n_trajectories": summary.n_trajectories,
        "agents": [
            {"agent": e.agent, "initial_share": e.initial_share, "estimate": e.estimate,
             "ci3": [e.lo, e.hi], "consistent": e.consistent}
            for e in estimates
        ],
        "passed": all(e.consistent for e in estimates),
    }


def increment_document(r: IncrementReport, config, master_seed: int) -> dict:
    return {
        "config": config_document(config),
        "master_seed": master_seed,
        "delta": r.delta,
        "n_steps": r.n_steps,
        "n_trajectories": r.n_trajectories,
        "pooled_gap": _estimate(r.pooled_gap),
        "pooled_gap_z": r.pooled_gap_z,
        "pooled_residual": _estimate(r.pooled_resid),
        "pooled_residual_z": r.pooled_resid_z,
        "steps_beyond_3sigma": r.n_exceed,
        "steps_beyond_3sigma_allowed": r.allowed_exceed,
        "passed": r.passed,
        "per_step": {
            "mean_dnorm": r.mean_dnorm.tolist(),
            "mean_stake_sq": r.mean_stake_sq.tolist(),
            "gap_mean": r.gap_mean.tolist(),
            "gap_se": r.gap_se.tolist(),
            "predicted_gap": r.predicted_gap.tolist(),
            "residual_z": r.resid_z.tolist(),
        },
    }


def summability_document(r: SummabilityReport, config, master_seed: int) -> dict:
    return {
        "config": config_document(config),
        "master_seed": master_seed,
        "horizon": r.horizon,
        "n_trajectories": r.n_trajectories,
        "initial_norm_sq": r.initial_norm_sq,
        "stake_sq_sum": _estimate(r.stake_sq),
        "bound": r.bound,
        "coarse_bound": 0.5,
        "checkpoints": {"step": r.checkpoint_steps.tolist(), "mean": r.checkpoint_means.tolist()},
        "monotone": r.monotone,
        "passed": r.passed,
    }


CONDENSE_HEADER = "n_agents,delta,beta,epsilon,n_trajectories,n_condensed,mean,stderr,ci_lo,ci_hi,median"


def condensation_csv(rows: Sequence[CondensationRow]) -> str:
    lines = [CONDENSE_HEADER]
    for r in rows:
        pt = r.point
        if r.time is None:
            stats = ["", "", "", "", ""]
        else:
            lo, hi = r.time.ci
            stats = [fmt(r.time.mean), "" if r.time.stderr is None else fmt(r.time.stderr),
                     fmt(lo), fmt(hi), fmt(r.median)]
        lines.append(",".join([str(pt.n_agents), fmt(pt.delta), fmt(pt.beta), fmt(pt.epsilon),
                               str(r.n_trajectories), str(r.n_condensed)] + stats))
    return "\n".join(lines) + "\n"


def json_text(doc: dict) -> str:
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def write_text(path, text: str) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w") as fh:
            fh.write(text)
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror}") from exc
    return path


def write_outputs(result, prefix) -> Path:
    """Write a trajectory record or ensemble summary next to ``prefix``.

    Records go to ``<prefix>.trajectory.csv``, summaries to
    ``<prefix>.summary.json``.
    """
    if isinstance(result, TrajectoryRecord):
        return write_text(f"{prefix}.trajectory.csv", trajectory_csv(result.snapshots))
    if isinstance(result, Snapshots):
        return write_text(f"{prefix}.trajectory.csv", trajectory_csv(result))
    if isinstance(result, EnsembleSummary):
        return write_text(f"{prefix}.summary.json", json_text(summary_document(result)))
    raise TypeError(f"don't know how to write {type(result).__name__}")
