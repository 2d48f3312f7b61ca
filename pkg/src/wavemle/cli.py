"""Command-line entry point.

Subcommands: ``simulate`` (trajectory CSV + config sidecar), ``estimate``
(estimate JSON on stdout), ``fisher`` (information quantities), and
``experiment consistency|normality|rates`` (report bundle into a directory).

Exit codes partition the failure classes: 2 for configuration errors, 3 for
I/O or malformed-data errors, 4 for degenerate data (estimator undefined).
Everything is explicit via flags or the JSON config file; no environment
variables are consulted.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

from . import __version__
from .errors import ConfigError, DataIntegrityError, DegenerateDataError
from .estimator import mle
from .experiments import (
    REPORT_SCHEMA_VERSION,
    CampaignSpec,
    default_parallelism,
    run_campaign,
)
from .io import (
    TRAJECTORY_FORMAT_VERSION,
    estimate_payload,
    read_trajectory,
    write_report,
    write_trajectory,
)
from .moments import fisher_asymptotic, fisher_exact
from .sim import SimConfig, simulate

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_DEGENERATE = 4

_EXPERIMENT_KINDS = {
    "consistency": "consistency_sweep",
    "normality": "normality",
    "rates": "rate_check",
}


def _version_string() -> str:
    return (f"wavemle {__version__} "
            f"(report-schema {REPORT_SCHEMA_VERSION}, "
            f"trajectory-format {TRAJECTORY_FORMAT_VERSION})")


def _load_json(path: str) -> dict:
    with open(path, "r") as handle:
        try:
            doc = json.load(handle)
        except json.JSONDecodeError as exc:
            raise DataIntegrityError(f"config file {path!r} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"config file {path!r} must hold a JSON object")
    return doc


def _seed_from(args, doc: dict) -> int:
    if args.seed is not None:
        return args.seed
    if "base_seed" in doc:
        raw = doc["base_seed"]
        if isinstance(raw, bool) or not isinstance(raw, int):
            raise ConfigError(f"config field 'base_seed' must be an integer, got {raw!r}")
        return raw
    raise ConfigError("no seed given: pass --seed or set base_seed in the config file")


def _uint64(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError(f"{text!r} is not an unsigned 64-bit integer")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"{text!r} is not a positive integer")
    return value


def _cmd_simulate(args) -> int:
    doc = _load_json(args.config)
    config = SimConfig.from_dict(doc, base_seed=_seed_from(args, doc))
    traj = simulate(config, replication=0)
    write_trajectory(traj, args.out)
    print(f"wrote {args.out} and sidecar ({config.n_modes} modes, "
          f"{config.m_steps} steps, scheme={config.scheme})")
    return EXIT_OK


def _cmd_estimate(args) -> int:
    traj = read_trajectory(args.traj)
    if args.true_lambda is not None and not (math.isfinite(args.true_lambda) and args.true_lambda > 0):
        raise ConfigError(f"--true-lambda must be finite and > 0, got {args.true_lambda!r}")
    estimate = mle(traj, lambda_true=args.true_lambda)
    print(json.dumps(estimate_payload(estimate), indent=2))
    return EXIT_OK


def _cmd_fisher(args) -> int:
    try:
        exact = fisher_exact(args.n, args.t, args.lam, args.sigma)
        asymptotic = fisher_asymptotic(args.n, args.t, args.lam)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    print(json.dumps({"exact": exact, "asymptotic": asymptotic,
                      "ratio": exact / asymptotic}, indent=2))
    return EXIT_OK


def _campaign_spec(args) -> CampaignSpec:
    doc = _load_json(args.config)
    seed = _seed_from(args, doc)
    sim = SimConfig.from_dict(doc, base_seed=seed)
    experiment = _EXPERIMENT_KINDS[args.kind]
    reps = args.reps if args.reps is not None else doc.get("replications")
    if reps is None:
        raise ConfigError("no replication count: pass --reps or set replications in the config")
    if isinstance(reps, bool) or not isinstance(reps, int):
        raise ConfigError(f"replications must be an integer, got {reps!r}")
    threads = args.threads if args.threads is not None else doc.get("parallelism")
    if threads is None:
        threads = default_parallelism()
    if isinstance(threads, bool) or not isinstance(threads, int):
        raise ConfigError(f"parallelism must be an integer, got {threads!r}")

    def int_list(name: str):
        raw = doc.get(name)
        if raw is None:
            return None
        if not isinstance(raw, list) or any(isinstance(x, bool) or not isinstance(x, int) for x in raw):
            raise ConfigError(f"config field {name!r} must be a list of integers, got {raw!r}")
        return tuple(raw)

    hist_range = doc.get("histogram_range", [-4.0, 4.0])
    if (not isinstance(hist_range, list) or len(hist_range) != 2
            or any(not isinstance(x, (int, float)) or isinstance(x, bool) for x in hist_range)):
        raise ConfigError(f"config field 'histogram_range' must be [lo, hi], got {hist_range!r}")
    hist_bins = doc.get("histogram_bins", 25)
    if isinstance(hist_bins, bool) or not isinstance(hist_bins, int):
        raise ConfigError(f"config field 'histogram_bins' must be an integer, got {hist_bins!r}")
    injection = doc.get("injection", "none")
    m_ref = doc.get("m_ref")
    if m_ref is not None and (isinstance(m_ref, bool) or not isinstance(m_ref, int)):
        raise ConfigError(f"config field 'm_ref' must be an integer, got {m_ref!r}")

    return CampaignSpec(
        sim=sim,
        replications=reps,
        experiment=experiment,
        sweep_n=int_list("sweep_n"),
        m_values=int_list("m_values"),
        m_ref=m_ref,
        parallelism=threads,
        injection=injection,
        hist_bins=hist_bins,
        hist_range=(float(hist_range[0]), float(hist_range[1])),
    )


def _cmd_experiment(args) -> int:
    spec = _campaign_spec(args)
    report = run_campaign(spec)
    paths = write_report(report, args.out)
    agg = report.aggregates
    parts = [f"{args.kind}: R={spec.replications}"]
    if "lambda_hat" in agg and "mean" in agg.get("lambda_hat", {}):
        parts.append(f"lambda_hat_mean={agg['lambda_hat']['mean']:.6g}")
    if report.experiment == "normality":
        parts.append(f"ks_p={agg['ks']['p_value']:.4g}")
        parts.append(f"z_var={agg['z_canonical']['variance']:.4g}")
    if report.experiment == "rate_check" and agg.get("slope_j") is not None:
        parts.append(f"slope_j={agg['slope_j']:.3f}")
    if report.experiment == "consistency_sweep":
        parts.append(f"degenerate={agg['degenerate_records']}")
    parts.append(f"out={paths['report']}")
    print(" ".join(parts))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wavemle",
        description="Simulate the spectral modes of a noise-driven wave field, "
                    "estimate the wave-speed parameter, and run verification campaigns.",
    )
    parser.add_argument("--version", action="version", version=_version_string())
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="sample a trajectory and write CSV + sidecar")
    p_sim.add_argument("--config", required=True, help="JSON file with the physical parameters")
    p_sim.add_argument("--seed", type=_uint64, default=None, help="64-bit stream seed")
    p_sim.add_argument("--out", required=True, help="output CSV path")
    p_sim.set_defaults(func=_cmd_simulate)

    p_est = sub.add_parser("estimate", help="estimate the wave speed from a trajectory CSV")
    p_est.add_argument("--traj", required=True, help="trajectory CSV (sidecar expected next to it)")
    p_est.add_argument("--true-lambda", type=float, default=None,
                       help="known parameter; fills the normalized error fields")
    p_est.set_defaults(func=_cmd_estimate)

    p_fis = sub.add_parser("fisher", help="expected information: exact, asymptotic, ratio")
    p_fis.add_argument("--n", type=_positive_int, required=True)
    p_fis.add_argument("--t", type=float, required=True)
    p_fis.add_argument("--lambda", dest="lam", type=float, required=True)
    p_fis.add_argument("--sigma", type=float, required=True)
    p_fis.set_defaults(func=_cmd_fisher)

    p_exp = sub.add_parser("experiment", help="run a Monte-Carlo campaign")
    p_exp.add_argument("kind", choices=sorted(_EXPERIMENT_KINDS))
    p_exp.add_argument("--config", required=True, help="JSON campaign configuration")
    p_exp.add_argument("--reps", type=_positive_int, default=None)
    p_exp.add_argument("--seed", type=_uint64, default=None)
    p_exp.add_argument("--threads", type=_positive_int, default=None)
    p_exp.add_argument("--out", required=True, help="output directory for the report bundle")
    p_exp.set_defaults(func=_cmd_experiment)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DegenerateDataError as exc:
        print(f"degenerate data: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except DataIntegrityError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
