"""Seeded Monte-Carlo campaigns over the simulator and estimator.

Three experiment kinds:

* ``consistency_sweep`` -- per replication, simulate one N-mode trajectory and
  estimate from the leading n modes for every n in the sweep (prefix sums of
  the per-mode statistics, no re-simulation).
* ``normality`` -- R independent replications of the full estimate; collects
  the normalized errors, runs the Kolmogorov-Smirnov test against the
  standard normal and bins a histogram.
* ``rate_check`` -- per replication, simulate one fine path with m_ref steps
  and compare each coarse statistic (computed from subsampled grid points,
  with Brownian increments aggregated per coarse block) against its fine-grid
  value; reports mean squared discrepancies per coarse M and the fitted
  log-log slope against M.

Replication r of any campaign depends only on (base_seed, r, mode), so
records are identical no matter how many workers execute them; results are
always reduced in replication order.

Injection modes (config field ``injection``) replace the simulated data for
self-tests: ``zero_noise`` builds a noiseless synthetic trajectory whose
velocity increments are exactly -lam k^2 u dt (the estimator must return lam
exactly), and ``gaussian_z`` feeds i.i.d. standard normals through the
normality pipeline in place of simulated errors (null-distribution check).
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from multiprocessing import get_context

import numpy as np

from . import __version__
from ._kernels import kahan_rows_prod, kahan_rows_sq
from .errors import ConfigError, DegenerateDataError
from .estimator import mle, mode_statistics, z_scores
from .rng import mode_generator, replication_key
from .sim import SimConfig, TrajectorySet, simulate
from .stats import Histogram, histogram, ks_test, summarize

EXPERIMENTS = ("consistency_sweep", "normality", "rate_check")
INJECTIONS = ("none", "zero_noise", "gaussian_z")

REPORT_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class CampaignSpec:
    """One campaign: simulation parameters plus experiment-specific knobs."""

    sim: SimConfig
    replications: int
    experiment: str
    sweep_n: tuple[int, ...] | None = None
    m_values: tuple[int, ...] | None = None
    m_ref: int | None = None
    parallelism: int = 1
    injection: str = "none"
    hist_bins: int = 25
    hist_range: tuple[float, float] = (-4.0, 4.0)

    def __post_init__(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"experiment must be one of {EXPERIMENTS}, got {self.experiment!r}")
        if not (isinstance(self.replications, int) and self.replications >= 1):
            raise ConfigError(f"replications must be an integer >= 1, got {self.replications!r}")
        if not (isinstance(self.parallelism, int) and self.parallelism >= 1):
            raise ConfigError(f"parallelism must be an integer >= 1, got {self.parallelism!r}")
        if self.injection not in INJECTIONS:
            raise ConfigError(f"injection must be one of {INJECTIONS}, got {self.injection!r}")
        if not (isinstance(self.hist_bins, int) and self.hist_bins >= 1):
            raise ConfigError(f"hist_bins must be an integer >= 1, got {self.hist_bins!r}")
        lo, hi = self.hist_range
        if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
            raise ConfigError(f"hist_range must be a finite (lo, hi) with lo < hi, got {self.hist_range!r}")
        if self.experiment == "consistency_sweep":
            self._check_sweep()
        if self.experiment == "rate_check":
            self._check_rate()

    def _check_sweep(self) -> None:
        if not self.sweep_n:
            raise ConfigError("consistency_sweep requires a nonempty sweep_n")
        ns = self.sweep_n
        if any(not isinstance(n, int) or n < 1 for n in ns):
            raise ConfigError(f"sweep_n entries must be integers >= 1, got {ns!r}")
        if list(ns) != sorted(set(ns)):
            raise ConfigError(f"sweep_n must be strictly increasing, got {ns!r}")
        if ns[-1] > self.sim.n_modes:
            raise ConfigError(f"sweep_n may not exceed n_modes={self.sim.n_modes}, got {ns!r}")

    def _check_rate(self) -> None:
        if not self.m_values:
            raise ConfigError("rate_check requires a nonempty m_values")
        if not (isinstance(self.m_ref, int) and self.m_ref >= 1):
            raise ConfigError(f"rate_check requires an integer m_ref >= 1, got {self.m_ref!r}")
        ms = self.m_values
        if any(not isinstance(m, int) or m < 1 for m in ms):
            raise ConfigError(f"m_values entries must be integers >= 1, got {ms!r}")
        if list(ms) != sorted(set(ms)):
            raise ConfigError(f"m_values must be strictly increasing, got {ms!r}")
        bad = [m for m in ms if self.m_ref % m != 0]
        if bad:
            raise ConfigError(f"every coarse step count must divide m_ref={self.m_ref}; offending: {bad}")
        if ms[-1] > self.m_ref:
            raise ConfigError(f"coarse step counts must be <= m_ref={self.m_ref}, got {ms!r}")

    def to_dict(self) -> dict:
        doc = self.sim.to_dict()
        doc.update({
            "replications": self.replications,
            "experiment": self.experiment,
            "parallelism": self.parallelism,
            "injection": self.injection,
            "histogram_bins": self.hist_bins,
            "histogram_range": list(self.hist_range),
        })
        if self.sweep_n is not None:
            doc["sweep_n"] = list(self.sweep_n)
        if self.m_values is not None:
            doc["m_values"] = list(self.m_values)
        if self.m_ref is not None:
            doc["m_ref"] = self.m_ref
        return doc


@dataclass(frozen=True)
class ReplicationRecord:
    """One estimate: replication index, its stream key, truncation level n."""

    replication: int
    seed: int
    n: int
    lambda_hat: float
    z_canonical: float | None
    z_paper: float | None
    degenerate: bool = False


@dataclass(frozen=True)
class ExperimentReport:
    experiment: str
    spec: CampaignSpec
    records: list[ReplicationRecord]
    aggregates: dict
    rates: list[dict] | None
    histogram: Histogram | None
    wall_seconds: float
    versions: dict


def _versions() -> dict:
    return {"artifact": __version__, "report_schema": REPORT_SCHEMA_VERSION}


def _zero_noise_trajectory(sim: SimConfig) -> TrajectorySet:
    """Noiseless synthetic data: nonzero u pattern, v increments -lam k^2 u dt.

    The estimator collapses algebraically to lam on such data, for any
    pattern; the pattern here is a fixed small-integer lattice.
    """
    n, m = sim.n_modes, sim.m_steps
    dt = sim.dt
    grid = np.linspace(0.0, sim.t_final, m + 1)
    u = np.zeros((n, m + 1))
    for k in range(1, n + 1):
        for i in range(1, m + 1):
            u[k - 1, i] = 1.0 + (k + i) % 3
    v = np.zeros((n, m + 1))
    k_arr = np.arange(1, n + 1, dtype=np.float64)
    coef = sim.lam * k_arr * k_arr * dt
    for i in range(m):
        v[:, i + 1] = v[:, i] - coef * u[:, i]
    return TrajectorySet(config=sim, grid=grid, u=u, v=v, dw=None)


def _prefix_records(spec: CampaignSpec, rep: int,
                    j_modes: np.ndarray, b_modes: np.ndarray) -> list[ReplicationRecord]:
    sim = spec.sim
    seed = replication_key(sim.base_seed, rep)
    records = []
    for n in spec.sweep_n:
        j_n = math.fsum(j_modes[:n])
        b_n = math.fsum(b_modes[:n])
        if j_n == 0.0:
            records.append(ReplicationRecord(rep, seed, n, math.nan, None, None, degenerate=True))
            continue
        lam_hat = b_n / j_n
        z_c, z_p = z_scores(lam_hat, sim.lam, n, sim.t_final, sim.sigma)
        records.append(ReplicationRecord(rep, seed, n, lam_hat, z_c, z_p))
    return records


def _consistency_rep(spec: CampaignSpec, rep: int) -> list[ReplicationRecord]:
    if spec.injection == "zero_noise":
        traj = _zero_noise_trajectory(spec.sim)
    else:
        traj = simulate(spec.sim, rep)
    j_modes, b_modes, _ = mode_statistics(traj)
    return _prefix_records(spec, rep, j_modes, b_modes)


def _normality_rep(spec: CampaignSpec, rep: int) -> ReplicationRecord:
    sim = spec.sim
    seed = replication_key(sim.base_seed, rep)
    if spec.injection == "gaussian_z":
        z = float(mode_generator(sim.base_seed, rep, 0).standard_normal())
        scale = math.sqrt(12.0 * sim.lam) / (sim.t_final * sim.n_modes ** 1.5)
        lam_hat = sim.lam + z * scale
        return ReplicationRecord(rep, seed, sim.n_modes, lam_hat, z, -sim.sigma * z)
    if spec.injection == "zero_noise":
        traj = _zero_noise_trajectory(sim)
    else:
        traj = simulate(sim, rep)
    try:
        est = mle(traj, lambda_true=sim.lam)
    except DegenerateDataError as exc:
        raise DegenerateDataError(f"replication {rep} (seed {seed}): {exc}") from exc
    return ReplicationRecord(rep, seed, sim.n_modes, est.lambda_hat,
                             est.z_canonical, est.z_paper)


def _rate_rep(spec: CampaignSpec, rep: int) -> tuple[ReplicationRecord, list[float], list[float]]:
    sim = spec.sim
    fine = replace(sim, m_steps=spec.m_ref)
    traj = simulate(fine, rep, include_increments=True)
    j_modes, b_modes, xi_modes = mode_statistics(traj)
    j_ref = math.fsum(j_modes)
    xi_ref = math.fsum(xi_modes)
    seed = replication_key(sim.base_seed, rep)
    if j_ref == 0.0:
        record = ReplicationRecord(rep, seed, sim.n_modes, math.nan, None, None, degenerate=True)
    else:
        lam_hat = math.fsum(b_modes) / j_ref
        z_c, z_p = z_scores(lam_hat, sim.lam, sim.n_modes, sim.t_final, sim.sigma)
        record = ReplicationRecord(rep, seed, sim.n_modes, lam_hat, z_c, z_p)
    n = sim.n_modes
    k = np.arange(1, n + 1, dtype=np.float64)
    k2 = k * k
    sq_j: list[float] = []
    sq_xi: list[float] = []
    for m in spec.m_values:
        stride = spec.m_ref // m
        u_left = np.ascontiguousarray(traj.u[:, 0:spec.m_ref:stride])
        dw_blocks = traj.dw.reshape(n, m, stride).sum(axis=2)
        j_m = math.fsum((k2 * k2 * (sim.t_final / m)) * kahan_rows_sq(u_left))
        xi_m = math.fsum(k2 * kahan_rows_prod(u_left, np.ascontiguousarray(dw_blocks)))
        sq_j.append((j_m - j_ref) ** 2)
        sq_xi.append((xi_m - xi_ref) ** 2)
    return record, sq_j, sq_xi


def _run_indexed(spec: CampaignSpec, worker) -> list:
    """Run the worker over replication indices, in-order reduction."""
    reps = range(spec.replications)
    if spec.parallelism <= 1:
        return [worker(spec, r) for r in reps]
    ctx = get_context("fork")
    chunk = max(1, spec.replications // (spec.parallelism * 8))
    with ProcessPoolExecutor(max_workers=spec.parallelism, mp_context=ctx) as pool:
        return list(pool.map(worker, [spec] * spec.replications, reps, chunksize=chunk))


def _loglog_slope(ms, mses) -> float | None:
    pts = [(m, e) for m, e in zip(ms, mses) if e > 0.0]
    if len(pts) < 2:
        return None
    lx = np.log([p[0] for p in pts])
    ly = np.log([p[1] for p in pts])
    return float(np.polyfit(lx, ly, 1)[0])


def _summary_dict(samples) -> dict:
    s = summarize(samples)
    return {"mean": s.mean, "variance": s.variance, "min": s.min, "max": s.max, "n": s.n}


def run_consistency_sweep(spec: CampaignSpec) -> ExperimentReport:
    """Estimates from the leading n modes, for each n in the sweep."""
    if spec.experiment != "consistency_sweep":
        raise ConfigError(f"spec.experiment is {spec.experiment!r}")
    t0 = time.perf_counter()
    nested = _run_indexed(spec, _consistency_rep)
    records = [rec for per_rep in nested for rec in per_rep]
    by_n: dict[int, list[float]] = {n: [] for n in spec.sweep_n}
    degenerate = 0
    for rec in records:
        if rec.degenerate:
            degenerate += 1
        else:
            by_n[rec.n].append(rec.lambda_hat)
    aggregates = {
        "degenerate_records": degenerate,
        "lambda_hat_by_n": {
            str(n): (_summary_dict(vals) if len(vals) >= 2 else
                     {"mean": vals[0] if vals else None, "n": len(vals)})
            for n, vals in by_n.items()
        },
    }
    return ExperimentReport("consistency_sweep", spec, records, aggregates,
                            rates=None, histogram=None,
                            wall_seconds=time.perf_counter() - t0, versions=_versions())


def run_normality(spec: CampaignSpec) -> ExperimentReport:
    """R independent estimates; KS against the standard normal on z_canonical."""
    if spec.experiment != "normality":
        raise ConfigError(f"spec.experiment is {spec.experiment!r}")
    t0 = time.perf_counter()
    records = _run_indexed(spec, _normality_rep)
    zs = [rec.z_canonical for rec in records]
    lam_hats = [rec.lambda_hat for rec in records]
    ks = ks_test(zs)
    hist = histogram(zs, spec.hist_bins, spec.hist_range[0], spec.hist_range[1])
    aggregates = {
        "lambda_hat": _summary_dict(lam_hats),
        "z_canonical": _summary_dict(zs),
        "ks": {"d_stat": ks.d_stat, "p_value": ks.p_value, "n": ks.n},
        "histogram_out_of_range": {"below": hist.below, "above": hist.above},
    }
    return ExperimentReport("normality", spec, records, aggregates,
                            rates=None, histogram=hist,
                            wall_seconds=time.perf_counter() - t0, versions=_versions())


def run_rate_check(spec: CampaignSpec) -> ExperimentReport:
    """Mean squared coarse-vs-fine statistic discrepancies per coarse M."""
    if spec.experiment != "rate_check":
        raise ConfigError(f"spec.experiment is {spec.experiment!r}")
    t0 = time.perf_counter()
    results = _run_indexed(spec, _rate_rep)
    records = [rec for rec, _, _ in results]
    n_m = len(spec.m_values)
    mse_j = [math.fsum(sq[i] for _, sq, _ in results) / spec.replications for i in range(n_m)]
    mse_xi = [math.fsum(sq[i] for _, _, sq in results) / spec.replications for i in range(n_m)]
    rates = [{"m": m, "mse_xi": mx, "mse_j": mj}
             for m, mx, mj in zip(spec.m_values, mse_xi, mse_j)]
    lam_hats = [rec.lambda_hat for rec in records if not rec.degenerate]
    aggregates = {
        "m_ref": spec.m_ref,
        "slope_j": _loglog_slope(spec.m_values, mse_j),
        "slope_xi": _loglog_slope(spec.m_values, mse_xi),
        "lambda_hat": (_summary_dict(lam_hats) if len(lam_hats) >= 2 else {"n": len(lam_hats)}),
        "degenerate_records": sum(1 for rec in records if rec.degenerate),
    }
    return ExperimentReport("rate_check", spec, records, aggregates,
                            rates=rates, histogram=None,
                            wall_seconds=time.perf_counter() - t0, versions=_versions())


def run_campaign(spec: CampaignSpec) -> ExperimentReport:
    if spec.experiment == "consistency_sweep":
        return run_consistency_sweep(spec)
    if spec.experiment == "normality":
        return run_normality(spec)
    return run_rate_check(spec)


def default_parallelism() -> int:
    return os.cpu_count() or 1
