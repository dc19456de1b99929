"""Command-line front end: curves, sweeps, sampling, comparisons, file I/O.

Artifacts are CSV files with a metadata comment header plus a JSON mirror of
the same rows.  Identical job specifications and seeds produce byte-identical
artifacts apart from the ``generated`` timestamp line.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .counting import MeasurementProtocol
from .entropy import (
    averaged_correction,
    entropy_squeezed_double,
    entropy_squeezed_single,
    entropy_symmetric_multi,
    entropy_symmetric_single,
    unmeasured_entropy,
)
from .errors import (
    FeasibilityError,
    ForbiddenOutcomeError,
    QuadratureError,
    RegimeError,
)
from .extensions import GeometrySpec, fcs_generating_function, geometry_entropy
from .neel_exact import neel_entropy_exact, stirling_expansion
from .probability import (
    chain_distribution,
    monte_carlo_average,
    neel_exact_distribution,
    sample_many,
)
from .quadrature import QuadratureConfig
from .saddle import feasibility, solve_saddle_symmetric_single
from .states import Pairing, get_state

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INFEASIBLE = 3
EXIT_REGIME = 4
EXIT_QUADRATURE = 5
EXIT_OTHER = 1

_FMT = "%.17g"


# ---------------------------------------------------------------------------
# Job specification
# ---------------------------------------------------------------------------


@dataclasses.dataclass
class JobSpec:
    subcommand: str
    params: dict
    rtol: float = 1e-10
    seed: int | None = None
    out_dir: str = "."
    fmt: str = "both"
    workers: int = 1

    def to_dict(self):
        return dataclasses.asdict(self)

    @staticmethod
    def from_dict(d):
        return JobSpec(**d)

    def config_hash(self) -> str:
        canon = json.dumps(self.to_dict(), sort_keys=True)
        return hashlib.sha256(canon.encode()).hexdigest()[:16]

    def quad(self) -> QuadratureConfig:
        return QuadratureConfig(rtol=self.rtol)


def parse_grid(text: str):
    """`start:stop:count` -> inclusive linspace; `start:stop` -> integer steps;
    plain numbers and comma lists pass through."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) == 3:
            start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
            return list(np.linspace(start, stop, count))
        if len(parts) == 2:
            start, stop = int(float(parts[0])), int(float(parts[1]))
            return [float(v) for v in range(start, stop + 1)]
        raise ValueError(f"bad grid {text!r}")
    return [float(v) for v in text.split(",")]


def parse_charges(text: str, center: float, tau: float, ell: float, seed_default=0):
    """Charges: an integer, a comma list, or `sample:N:seed`."""
    if text.startswith("sample:"):
        _, n, seed = text.split(":")
        return ("sample", int(n), int(seed))
    return ("explicit", [float(v) for v in text.split(",")], None)


# ---------------------------------------------------------------------------
# Artifact output
# ---------------------------------------------------------------------------


def _write_artifact(job: JobSpec, name: str, header, rows, extra_meta=None):
    os.makedirs(job.out_dir, exist_ok=True)
    meta = {
        "tool": f"chargequench {__version__}",
        "config_hash": job.config_hash(),
        "seed": job.seed,
    }
    meta.update(extra_meta or {})
    paths = []
    if job.fmt in ("csv", "both"):
        path = os.path.join(job.out_dir, f"{name}.csv")
        with open(path, "w") as fh:
            for key, value in meta.items():
                fh.write(f"# {key}={value}\n")
            fh.write(f"# generated={datetime.now(timezone.utc).isoformat()}\n")
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(_FMT % v if isinstance(v, float) else str(v) for v in row) + "\n")
        paths.append(path)
    if job.fmt in ("json", "both"):
        path = os.path.join(job.out_dir, f"{name}.json")
        with open(path, "w") as fh:
            json.dump({"meta": meta, "columns": header, "rows": [list(r) for r in rows]}, fh)
        paths.append(path)
    return paths


def read_artifact_rows(path: str):
    """Rows of a CSV artifact, skipping the metadata header."""
    rows = []
    with open(path) as fh:
        for line in fh:
            if line.startswith("#"):
                continue
            parts = line.strip().split(",")
            if parts == [""]:
                continue
            rows.append(parts)
    header, data = rows[0], rows[1:]
    return header, [[float(v) for v in row] for row in data]


# ---------------------------------------------------------------------------
# Subcommand implementations
# ---------------------------------------------------------------------------


def _entropy_report(state, t, tau, ell, q_seq, config):
    occ = state.occupation
    if occ.pairing is Pairing.SYMMETRIC_PARTICLE_HOLE:
        if len(q_seq) == 1:
            return entropy_symmetric_single(t, tau, ell, q_seq[0], occ, config=config)
        return entropy_symmetric_multi(t, tau, ell, q_seq, occ, config=config)
    if len(q_seq) == 1:
        return entropy_squeezed_single(t, tau, ell, q_seq[0], occ, config=config)
    if len(q_seq) == 2:
        return entropy_squeezed_double(t, tau, ell, q_seq[0], q_seq[1], occ, config=config)
    raise RegimeError("squeezed protocols support at most two measurements")


def _cmd_curve(job: JobSpec):
    p = job.params
    state = get_state(p["state"], job.quad())
    ell, tau = p["ell"], p["tau"]
    q_seq = [float(v) for v in str(p["q"]).split(",")]
    t_grid = parse_grid(p["t_grid"]) if "t_grid" in p else [p["t"]]
    config = job.quad()

    def one(t):
        report = _entropy_report(state, t, tau, ell, q_seq, config)
        quantum = sum(v for _, v in report.quantum_corrections)
        tag, classical = report.classical_correction
        return (
            t,
            tau,
            *q_seq,
            report.baseline,
            quantum,
            classical if classical is not None else math.nan,
            report.total,
            tag,
        )

    with ThreadPoolExecutor(max_workers=job.workers) as pool:
        rows = list(pool.map(one, t_grid))
    header = ["t", "tau"] + [f"q{i + 1}" for i in range(len(q_seq))] + [
        "baseline", "quantum", "classical", "total", "flags",
    ]
    return _write_artifact(job, "curve", header, rows, {"state": p["state"]})


def _cmd_sweep(job: JobSpec):
    p = job.params
    state = get_state(p["state"], job.quad())
    ell, tau = p["ell"], p["tau"]
    t_grid = parse_grid(p["t_grid"]) if "t_grid" in p else [p["t"]]
    q_grid = parse_grid(str(p["q_grid"]))
    config = job.quad()
    jobs = [(ti, qi) for ti in t_grid for qi in q_grid]

    def one(args):
        t, q = args
        report = _entropy_report(state, t, tau, ell, [q], config)
        quantum = sum(v for _, v in report.quantum_corrections)
        tag, classical = report.classical_correction
        return (t, tau, q, report.baseline, quantum,
                classical if classical is not None else math.nan, report.total, tag)

    with ThreadPoolExecutor(max_workers=job.workers) as pool:
        rows = list(pool.map(one, jobs))
    header = ["t", "tau", "q", "baseline", "quantum", "classical", "total", "flags"]
    return _write_artifact(job, "sweep", header, rows, {"state": p["state"]})


def _cmd_saddle(job: JobSpec):
    p = job.params
    state = get_state(p["state"], job.quad())
    ell, tau = p["ell"], p["tau"]
    dq_grid = parse_grid(str(p["dq"]))
    config = job.quad()
    rows = []
    for dq in dq_grid:
        feasible = feasibility([dq], tau, state.occupation.pairing, config=config)[0]
        if feasible:
            exact = solve_saddle_symmetric_single(dq, tau, ell, state.occupation, config=config)
            lin = solve_saddle_symmetric_single(
                dq, tau, ell, state.occupation, mode="linearized", config=config
            )
            rows.append((dq, exact.lambdas[0], lin.lambdas[0], 1, exact.regime))
        else:
            rows.append((dq, math.nan, math.nan, 0, "infeasible"))
    header = ["dq", "lambda_exact", "lambda_linearized", "feasible", "regime"]
    return _write_artifact(job, "saddle", header, rows, {"state": p["state"]})


def _cmd_average(job: JobSpec):
    p = job.params
    state = get_state(p["state"], job.quad())
    ell, tau, t, m = p["ell"], p["tau"], p["t"], p.get("m", 1)
    config = job.quad()
    protocol = MeasurementProtocol(ell=ell, tau=tau, m=m, t=t)
    analytic, breakdown = averaged_correction(protocol, state.occupation, config=config)
    result = {"analytic_correction": analytic, "breakdown": breakdown}
    if p.get("samples"):
        dist = None
        if p["state"] == "neel" and p.get("exact_distribution"):
            dist = neel_exact_distribution(tau, ell, m)
        mean, stderr = monte_carlo_average(
            protocol, state.occupation, int(p["samples"]), job.seed or 0,
            distribution=dist, config=config,
        )
        baseline = unmeasured_entropy(1.0, t, ell, state.occupation, config=config)
        result.update(
            {"mc_mean": mean, "mc_stderr": stderr, "mc_correction": mean - baseline,
             "n_samples": int(p["samples"])}
        )
    os.makedirs(job.out_dir, exist_ok=True)
    path = os.path.join(job.out_dir, "average.json")
    with open(path, "w") as fh:
        json.dump(result, fh)
    return [path]


def _cmd_sample(job: JobSpec):
    p = job.params
    state = get_state(p["state"], job.quad())
    ell, tau, m = p["ell"], p["tau"], p.get("m", 1)
    config = job.quad()
    if p["state"] == "neel" and p.get("exact_distribution"):
        dist = neel_exact_distribution(tau, ell, m)
    else:
        dist = chain_distribution(tau, m, ell, state.occupation, config=config)
    seqs, rejections = sample_many(job.seed or 0, dist, int(p["samples"]))
    header = [f"q{i + 1}" for i in range(m)]
    rows = [tuple(int(v) for v in row) for row in seqs]
    return _write_artifact(job, "sample", header, rows, {"rejections": rejections})


def _cmd_neel(job: JobSpec):
    p = job.params
    tau = p["tau"]
    ell = p.get("ell", 100.0 * tau)
    t = p.get("t", p["tau"] * p.get("m", 1))
    config = job.quad()
    state = get_state("neel", config)
    rows = []
    for dq in parse_grid(str(p["dq"])):
        exact = neel_entropy_exact(t, tau, [dq], ell, config=config)
        saddle_report = entropy_symmetric_single(t, tau, ell, ell / 2 + dq, state.occupation, config=config)
        ent_p, ent_m, log_term = stirling_expansion(dq, tau)
        rows.append(
            (
                dq,
                sum(exact.corrections),
                saddle_report.total - saddle_report.baseline,
                ent_p + ent_m + log_term,
            )
        )
    header = ["dq", "exact", "saddle", "stirling"]
    return _write_artifact(job, "neel", header, rows, {"tau": tau, "t": t, "ell": ell})


def _cmd_fcs(job: JobSpec):
    p = job.params
    state = get_state(p["state"], job.quad())
    ell, tau = p["ell"], p["tau"]
    betas = parse_grid(str(p.get("beta_grid", f"{-math.pi:.6f}:{math.pi:.6f}:41")))
    config = job.quad()
    rows = []
    for beta in betas:
        value = fcs_generating_function(beta, tau, ell, state.occupation, config=config)
        rows.append((beta, value.real, value.imag))
    return _write_artifact(job, "fcs", ["beta", "re", "im"], rows, {"state": p["state"]})


def _cmd_geometry(job: JobSpec):
    p = job.params
    state = get_state(p["state"], job.quad())
    ell, q = p["ell"], p["q"]
    geom = GeometrySpec(
        measured_region=p["geometry"],
        distance=p.get("d", 0.0),
        ell_b=p.get("ell_b", 0.0),
        total_length=p.get("L", 0.0),
    )
    config = job.quad()
    t_grid = parse_grid(p["t_grid"]) if "t_grid" in p else [p["t"]]
    rows = []
    for t in t_grid:
        report = geometry_entropy(geom, t, ell, q, state.occupation, config=config)
        quantum = sum(v for _, v in report.quantum_corrections)
        rows.append((t, q, report.baseline, quantum, report.total))
    header = ["t", "q", "baseline", "quantum", "total"]
    return _write_artifact(job, "geometry", header, rows, {"geometry": p["geometry"]})


def _cmd_oracle(job: JobSpec):
    from .ed_oracle import run_protocol

    p = job.params
    forced = None
    if p.get("outcomes"):
        forced = [int(v) for v in str(p["outcomes"]).split(",")]
    record, series = run_protocol(
        p["state"], int(p["L"]), int(p["ell"]), p["tau"], int(p.get("m", 1)), p["t"],
        seed=job.seed, forced_outcomes=forced,
    )
    rows = [(time, s_a, s_num, s_conf, ds) for time, s_a, s_num, s_conf, ds in series]
    paths = _write_artifact(
        job, "oracle_series", ["t", "S_A", "S_num", "S_conf", "DeltaS_A"], rows,
        {"events": json.dumps(record.events)},
    )
    return paths


_COMMANDS = {
    "curve": _cmd_curve,
    "sweep": _cmd_sweep,
    "saddle": _cmd_saddle,
    "average": _cmd_average,
    "sample": _cmd_sample,
    "neel": _cmd_neel,
    "fcs": _cmd_fcs,
    "geometry": _cmd_geometry,
    "oracle": _cmd_oracle,
}


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


def _load_config_file(path):
    out = {}
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, _, value = line.partition("=")
            out[key.strip()] = value.strip()
    return out


def _build_parser():
    parser = argparse.ArgumentParser(prog="chargequench")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(sp):
        sp.add_argument("--state", default="neel")
        sp.add_argument("--ell", type=float)
        sp.add_argument("--tau", type=float)
        sp.add_argument("--t", type=float)
        sp.add_argument("--t-grid", dest="t_grid")
        sp.add_argument("--m", type=int)
        sp.add_argument("--rtol", type=float, default=1e-10)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out", default=os.environ.get("CHARGEQUENCH_OUTDIR", "."))
        sp.add_argument("--format", choices=("csv", "json", "both"), default="both")
        sp.add_argument("--config")
        sp.add_argument("--workers", type=int, default=1)

    for name in _COMMANDS:
        sp = sub.add_parser(name)
        common(sp)
        if name in ("curve",):
            sp.add_argument("--q", required=True)
        if name in ("sweep",):
            sp.add_argument("--q-grid", dest="q_grid", required=True)
        if name in ("saddle", "neel"):
            sp.add_argument("--dq", required=True)
        if name in ("average", "sample"):
            sp.add_argument("--samples", type=int)
            sp.add_argument("--exact-distribution", action="store_true",
                            dest="exact_distribution")
        if name == "fcs":
            sp.add_argument("--beta-grid", dest="beta_grid")
        if name == "geometry":
            sp.add_argument("--q", type=float, required=True)
            sp.add_argument("--geometry", required=True)
            sp.add_argument("--d", type=float, default=0.0)
            sp.add_argument("--ell-b", dest="ell_b", type=float, default=0.0)
            sp.add_argument("--L", type=float, default=0.0)
        if name == "oracle":
            sp.add_argument("--L", type=int, required=True)
            sp.add_argument("--outcomes")
    return parser


def build_job(argv) -> JobSpec:
    parser = _build_parser()
    args = vars(parser.parse_args(argv))
    subcommand = args.pop("subcommand")
    rtol = args.pop("rtol")
    seed = args.pop("seed")
    out_dir = args.pop("out")
    fmt = args.pop("format")
    workers = args.pop("workers")
    config_path = args.pop("config")
    params = {k: v for k, v in args.items() if v is not None and v is not False}
    if config_path:
        overrides = _load_config_file(config_path)
        for key, value in overrides.items():
            if key not in params:  # flags beat the config file
                try:
                    params[key] = float(value) if key not in ("state", "q", "dq", "t_grid", "q_grid", "outcomes", "geometry", "beta_grid") else value
                except ValueError:
                    params[key] = value
    return JobSpec(
        subcommand=subcommand, params=params, rtol=rtol, seed=seed,
        out_dir=out_dir, fmt=fmt, workers=workers,
    )


def run(job: JobSpec):
    """Execute a job; returns the artifact paths."""
    return _COMMANDS[job.subcommand](job)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        job = build_job(argv)
        paths = run(job)
        for path in paths:
            print(path)
        return EXIT_OK
    except (FeasibilityError, ForbiddenOutcomeError) as exc:
        _emit_error(exc)
        return EXIT_INFEASIBLE
    except RegimeError as exc:
        _emit_error(exc)
        return EXIT_REGIME
    except QuadratureError as exc:
        _emit_error(exc)
        return EXIT_QUADRATURE
    except SystemExit as exc:  # argparse
        return int(exc.code or 0)
    except Exception as exc:  # noqa: BLE001 - boundary of the CLI
        _emit_error(exc)
        return EXIT_OTHER


def _emit_error(exc):
    sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n")


if __name__ == "__main__":
    sys.exit(main())
