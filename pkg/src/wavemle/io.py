"""File formats: trajectory CSV with JSON sidecar, experiment report bundle.

Trajectory CSV: header ``t,u_1,...,u_N,v_1,...,v_N[,dw_1,...,dw_N]``, one row
per grid point; the dw columns hold the increment over (t_{i-1}, t_i] and are
empty on the first row.  Floats are serialized with 17 significant digits
(``%.17g``), which round-trips float64 exactly; the sidecar ``<path>.json``
stores the generating SimConfig.

All writes go through a temporary file in the destination directory followed
by an atomic rename.
"""

from __future__ import annotations

import csv
import json
import math
import os
import tempfile

import numpy as np

from .errors import DataIntegrityError
from .experiments import ExperimentReport
from .sim import SimConfig, TrajectorySet

FLOAT_FMT = "%.17g"
TRAJECTORY_FORMAT_VERSION = 1


def fmt(x: float) -> str:
    return FLOAT_FMT % x


def sidecar_path(csv_path: str) -> str:
    return csv_path + ".json"


def _atomic_write(path: str, writer) -> None:
    """Call ``writer(handle)`` on a temp file, then rename onto ``path``."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w", newline="") as handle:
            writer(handle)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_trajectory(traj: TrajectorySet, csv_path: str) -> None:
    """Write the trajectory CSV and its config sidecar atomically."""
    n = traj.config.n_modes
    m = traj.config.m_steps
    has_dw = traj.dw is not None
    header = (["t"] + [f"u_{k}" for k in range(1, n + 1)]
              + [f"v_{k}" for k in range(1, n + 1)]
              + ([f"dw_{k}" for k in range(1, n + 1)] if has_dw else []))

    def body(handle) -> None:
        handle.write(",".join(header) + "\n")
        for i in range(m + 1):
            cells = [fmt(traj.grid[i])]
            cells.extend(fmt(x) for x in traj.u[:, i])
            cells.extend(fmt(x) for x in traj.v[:, i])
            if has_dw:
                if i == 0:
                    cells.extend("" for _ in range(n))
                else:
                    cells.extend(fmt(x) for x in traj.dw[:, i - 1])
            handle.write(",".join(cells) + "\n")

    _atomic_write(csv_path, body)
    sidecar = {"format_version": TRAJECTORY_FORMAT_VERSION, "config": traj.config.to_dict()}
    _atomic_write(sidecar_path(csv_path), lambda h: h.write(json.dumps(sidecar, indent=2) + "\n"))


def read_trajectory(csv_path: str) -> TrajectorySet:
    """Parse a trajectory CSV plus sidecar back into a TrajectorySet."""
    side = sidecar_path(csv_path)
    try:
        with open(side, "r") as handle:
            sidecar = json.load(handle)
    except FileNotFoundError as exc:
        raise DataIntegrityError(f"missing config sidecar {side!r}") from exc
    except json.JSONDecodeError as exc:
        raise DataIntegrityError(f"malformed config sidecar {side!r}: {exc}") from exc
    if not isinstance(sidecar, dict) or "config" not in sidecar:
        raise DataIntegrityError(f"config sidecar {side!r} has no 'config' object")
    config = SimConfig.from_dict(sidecar["config"])

    n, m = config.n_modes, config.m_steps
    with open(csv_path, "r", newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise DataIntegrityError(f"{csv_path!r} is empty") from None
        has_dw = len(header) == 1 + 3 * n
        if not has_dw and len(header) != 1 + 2 * n:
            raise DataIntegrityError(
                f"{csv_path!r} header has {len(header)} columns; expected "
                f"{1 + 2 * n} or {1 + 3 * n} for n_modes={n}"
            )
        grid = np.empty(m + 1)
        u = np.empty((n, m + 1))
        v = np.empty((n, m + 1))
        dw = np.empty((n, m)) if has_dw else None
        rows = 0
        for i, row in enumerate(reader):
            if i > m:
                raise DataIntegrityError(f"{csv_path!r} has more than {m + 1} data rows")
            if len(row) != len(header):
                raise DataIntegrityError(f"{csv_path!r} row {i + 1} has {len(row)} cells")
            try:
                grid[i] = float(row[0])
                u[:, i] = [float(c) for c in row[1:1 + n]]
                v[:, i] = [float(c) for c in row[1 + n:1 + 2 * n]]
                if has_dw and i > 0:
                    dw[:, i - 1] = [float(c) for c in row[1 + 2 * n:]]
            except ValueError as exc:
                raise DataIntegrityError(f"{csv_path!r} row {i + 1}: {exc}") from exc
            rows += 1
        if rows != m + 1:
            raise DataIntegrityError(f"{csv_path!r} has {rows} data rows; expected {m + 1}")
    arrays = [grid, u, v] + ([dw] if has_dw else [])
    if not all(np.all(np.isfinite(a)) for a in arrays):
        raise DataIntegrityError(f"{csv_path!r} contains non-finite values")
    return TrajectorySet(config=config, grid=grid, u=u, v=v, dw=dw)


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj)!r}")


def _opt(x: float | None) -> str:
    if x is None:
        return ""
    return fmt(x)


def write_report(report: ExperimentReport, out_dir: str) -> dict[str, str]:
    """Write report.json plus companion CSVs; returns the path map."""
    os.makedirs(out_dir, exist_ok=True)
    paths = {"report": os.path.join(out_dir, "report.json"),
             "records": os.path.join(out_dir, "records.csv")}

    def records_body(handle) -> None:
        writer = csv.writer(handle)
        writer.writerow(["replication", "seed", "n", "lambda_hat", "z_canonical", "z_paper"])
        for rec in report.records:
            writer.writerow([rec.replication, rec.seed, rec.n, fmt(rec.lambda_hat),
                             _opt(rec.z_canonical), _opt(rec.z_paper)])

    _atomic_write(paths["records"], records_body)

    if report.histogram is not None:
        paths["histogram"] = os.path.join(out_dir, "histogram.csv")
        hist = report.histogram

        def hist_body(handle) -> None:
            writer = csv.writer(handle)
            writer.writerow(["bin_lo", "bin_hi", "count"])
            for b in range(hist.counts.size):
                writer.writerow([fmt(hist.edges[b]), fmt(hist.edges[b + 1]),
                                 int(hist.counts[b])])

        _atomic_write(paths["histogram"], hist_body)

    if report.rates is not None:
        paths["rates"] = os.path.join(out_dir, "rates.csv")

        def rates_body(handle) -> None:
            writer = csv.writer(handle)
            writer.writerow(["m", "mse_xi", "mse_j"])
            for row in report.rates:
                writer.writerow([row["m"], fmt(row["mse_xi"]), fmt(row["mse_j"])])

        _atomic_write(paths["rates"], rates_body)

    doc = {
        "schema_version": report.versions["report_schema"],
        "artifact_version": report.versions["artifact"],
        "experiment": report.experiment,
        "spec": report.spec.to_dict(),
        "record_count": len(report.records),
        "aggregates": report.aggregates,
        "rates": report.rates,
        "histogram": (None if report.histogram is None else {
            "edges": report.histogram.edges.tolist(),
            "counts": report.histogram.counts.tolist(),
            "below": report.histogram.below,
            "above": report.histogram.above,
        }),
        "wall_seconds": report.wall_seconds,
    }
    _atomic_write(paths["report"],
                  lambda h: h.write(json.dumps(doc, indent=2, default=_json_default) + "\n"))
    return paths


def estimate_payload(estimate) -> dict:
    """The estimate JSON document emitted by the CLI."""
    return {
        "lambda_hat": estimate.lambda_hat,
        "j_stat": estimate.stats.j_stat,
        "b_stat": estimate.stats.b_stat,
        "xi": estimate.stats.xi,
        "z_canonical": estimate.z_canonical,
        "z_paper": estimate.z_paper,
    }
