"""Command-line interface: generate / bound / sweep / baseline.

All randomness flows from --seed; re-running a command with the same
arguments is bit-identical. Exit status 0 means a valid result record
was written; solver failures and timeouts exit 1, usage errors exit 2.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from multiprocessing import Pool

import numpy as np

from . import data_io
from .pipeline import METHODS, certify
from .solver import NodeLimitExceeded, SolverError
from .types import Config, Dataset, SupportBox, as_order


def _box_for(d: int, half_width: float) -> SupportBox:
    return SupportBox(center=np.zeros(d), half_width=half_width)


def _parse_config_file(path) -> dict:
    """key = value lines; '#' starts a comment."""
    values = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key = value")
            key, val = (part.strip() for part in line.split("=", 1))
            values[key] = float(val)
    return values


def _moment_constant(args) -> float | None:
    if not args.config:
        return None
    values = _parse_config_file(args.config)
    key = f"E_{args.rho:g}"
    if key not in values:
        raise ValueError(f"{args.config}: missing {key}")
    return values[key]


def cmd_generate(args) -> int:
    box = _box_for(args.d, args.half_width)
    if args.dist == "gaussian":
        if args.sigma2 is None:
            raise ValueError("--dist gaussian needs --sigma2")
        data = data_io.gen_truncated_gaussian(
            args.n, args.d, args.sigma2**0.5, box, args.seed
        )
        params = {"sigma2": args.sigma2, "half_width": args.half_width}
    elif args.dist == "uniform":
        if args.diameter is None:
            raise ValueError("--dist uniform needs --diameter")
        data = data_io.gen_uniform(args.n, args.d, args.diameter, box, args.seed)
        params = {"diameter": args.diameter, "half_width": args.half_width}
    else:
        comps = data_io.DEFAULT_MIXTURE
        if args.mixture_json:
            comps = json.loads(args.mixture_json)
        data = data_io.gen_gaussian_mixture(args.n, args.d, comps, box, args.seed)
        params = {"components": [list(c) for c in comps], "half_width": args.half_width}
    data_io.save_csv(data, args.out)
    data_io.write_manifest(
        str(args.out) + ".manifest.json", args.n, args.d, args.dist, params, args.seed
    )
    print(f"wrote {args.n} x {args.d} samples to {args.out}")
    return 0


def _cfg_from(args, d: int) -> Config:
    return Config(
        rho=args.rho,
        norm_order=as_order(args.norm),
        beta=args.beta,
        dimension=d,
        rng_seed=args.seed,
    )


def _run_cell(task):
    """One (M, seed) sweep cell; runs inside the worker pool."""
    train, data, box, args_dict, M, seed = task
    cfg = Config(
        rho=args_dict["rho"],
        norm_order=as_order(args_dict["norm"]),
        beta=args_dict["beta"],
        dimension=data.dimension,
        rng_seed=seed,
    )
    t0 = time.perf_counter()
    try:
        res = certify(
            train,
            data,
            M,
            cfg,
            box,
            method=args_dict["method"],
            neighbor_frac=args_dict["neighbor_frac"],
            timeout_s=args_dict["timeout_s"],
            moment_constant=args_dict.get("moment_constant"),
        )
    except (SolverError, NodeLimitExceeded, ValueError) as exc:
        return {"M": M, "seed": seed, "error": str(exc)}
    return {
        "method": res.method,
        "M": M,
        "N": data.n,
        "rho": args_dict["rho"],
        "beta": args_dict["beta"],
        "seed": seed,
        "value": res.value,
        "runtime_ms": 1e3 * (time.perf_counter() - t0),
    }


def cmd_bound(args) -> int:
    data = data_io.load_csv(args.data, role="estimation")
    train = data_io.load_csv(args.train, role="training") if args.train else None
    cfg = _cfg_from(args, data.dimension)
    box = _box_for(data.dimension, args.half_width)
    record = {"method": args.method, "status": "ok"}
    try:
        res = certify(
            train,
            data,
            args.M,
            cfg,
            box,
            method=args.method,
            neighbor_frac=args.neighbor_frac,
            timeout_s=args.timeout_s,
            moment_constant=_moment_constant(args),
        )
        record = res.to_json_record()
        record["status"] = "ok"
        code = 0
    except NodeLimitExceeded as exc:
        record["status"] = "timeout_or_node_limit"
        record["detail"] = str(exc)
        code = 1
    with open(args.out, "w") as fh:
        json.dump(record, fh, indent=1)
    if code == 0:
        print(f"{args.method}: {record['value']:.6g} (wrote {args.out})")
    else:
        print(f"{args.method}: failed ({record['status']})", file=sys.stderr)
    return code


def cmd_sweep(args) -> int:
    data = data_io.load_csv(args.data, role="estimation")
    train = data_io.load_csv(args.train, role="training") if args.train else None
    box = _box_for(data.dimension, args.half_width)
    m_grid = [int(v) for v in args.M.split(",")]
    seeds = [int(v) for v in args.seeds.split(",")]
    args_dict = {
        "rho": args.rho,
        "beta": args.beta,
        "norm": args.norm,
        "method": args.method,
        "neighbor_frac": args.neighbor_frac,
        "timeout_s": args.timeout_s,
        "moment_constant": _moment_constant(args),
    }
    tasks = [(train, data, box, args_dict, M, seed) for M in m_grid for seed in seeds]
    if args.jobs > 1:
        with Pool(args.jobs) as pool:
            records = pool.map(_run_cell, tasks)
    else:
        records = [_run_cell(t) for t in tasks]

    failures = [r for r in records if "error" in r]
    records = [r for r in records if "error" not in r]
    with open(args.out, "w", newline="") as fh:
        writer = csv.DictWriter(
            fh,
            fieldnames=["method", "M", "N", "rho", "beta", "seed", "value", "runtime_ms"],
        )
        writer.writeheader()
        for rec in records:
            writer.writerow(rec)

    by_m = {}
    for rec in records:
        by_m.setdefault(rec["M"], []).append(rec["value"])
    for M in sorted(by_m):
        vals = np.array(by_m[M])
        print(f"M={M:5d}  mean={vals.mean():.6g}  std={vals.std():.3g}  runs={vals.size}")
    if by_m:
        best = min(by_m, key=lambda M: np.mean(by_m[M]))
        print(f"best M by mean bound: {best}")
    for rec in failures:
        print(f"FAILED M={rec['M']} seed={rec['seed']}: {rec['error']}", file=sys.stderr)
    return 1 if failures else 0


def cmd_baseline(args) -> int:
    cfg = Config(rho=args.rho, norm_order=as_order(args.norm), beta=args.beta,
                 dimension=args.d, rng_seed=args.seed)
    box = _box_for(args.d, args.half_width)
    moment = _moment_constant(args)
    if moment is None:
        raise ValueError("baseline needs --config with the moment constant")
    from .bounds import fournier_baseline

    res = fournier_baseline(args.N, args.beta, cfg, box.diameter(cfg.norm_order), moment)
    res.M = None
    with open(args.out, "w") as fh:
        json.dump(res.to_json_record(), fh, indent=1)
    print(f"fournier: {res.value:.6g} (wrote {args.out})")
    return 0


def _add_common(p):
    p.add_argument("--rho", type=float, default=1.0, choices=[1.0, 2.0])
    p.add_argument("--beta", type=float, default=1e-6)
    p.add_argument("--norm", default="2", choices=["1", "2", "inf"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--half-width", type=float, default=0.5)
    p.add_argument("--neighbor-frac", type=float, default=0.05)
    p.add_argument("--timeout-s", type=float, default=600.0)
    p.add_argument("--config", help="key = value file with moment constants (E_1, E_2)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wassquant",
        description="Distribution compression with certified Wasserstein bounds",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic sample CSV")
    p.add_argument("--dist", required=True, choices=["gaussian", "uniform", "mixture"])
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--sigma2", type=float)
    p.add_argument("--diameter", type=float)
    p.add_argument("--mixture-json", help="JSON list of [mean, sigma, weight]")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--half-width", type=float, default=0.5)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("bound", help="one certified bound from train/data CSVs")
    p.add_argument("--train")
    p.add_argument("--data", required=True)
    p.add_argument("--M", type=int, required=True)
    p.add_argument("--method", default="theorem1", choices=list(METHODS))
    p.add_argument("--out", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("sweep", help="grid over M values and seeds, CSV records")
    p.add_argument("--train")
    p.add_argument("--data", required=True)
    p.add_argument("--M", required=True, help="comma list, e.g. 5,10,20,50")
    p.add_argument("--seeds", default="0", help="comma list of seeds")
    p.add_argument("--method", default="theorem1", choices=list(METHODS))
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("baseline", help="closed-form concentration baseline")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--out", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_baseline)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, SolverError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
