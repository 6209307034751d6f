"""Command-line entry points.

Subcommands:

- ``run CONFIG.json``: execute a configured experiment, writing per-seed
  trace CSVs and a summary.json into the configured (or flagged) out dir
- ``check burkholder|umd|decoupling|rad-oracle|minimax``: statistical and
  exact verifiers, JSON report to stdout or a file
- ``spectral``: the desk-scale matrix prediction run
- ``report DIR``: digest all summary.json files under a directory

Thread count for multi-seed runs comes from the ZIGZAG_WORKERS environment
variable (default 1).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import pathlib
import sys

import numpy as np

from .burkholder import check_majorization, check_zigzag, make_spec
from .harness import brute_force_minimax, merge_reports, rad_exact_scalar, run_experiment, write_outputs
from .linalg import LpTag, OneTag, SupTag
from .rademacher import (
    DyadicTree,
    hitczenko_check,
    maximal_rad_estimate,
    maximal_rad_exact,
    rad_estimate,
    rad_exact,
    umd_check,
)
from .rng import substream
from .spectral import run_spectral

_TAGS = {"l2": lambda: LpTag(2.0), "l3": lambda: LpTag(3.0), "sup": SupTag, "one": OneTag}


def _emit(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True, default=_jsonable)
    if out:
        pathlib.Path(out).write_text(text)
    else:
        print(text)


def _jsonable(obj):
    if dataclasses.is_dataclass(obj):
        return dataclasses.asdict(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _cmd_run(args) -> int:
    config = json.loads(pathlib.Path(args.config).read_text())
    summary = run_experiment(config)
    out_dir = args.out or config.get("out_dir") or "runs"
    written = write_outputs(summary, out_dir)
    for path in written:
        print(path)
    return 0


def _cmd_check(args) -> int:
    if args.target == "burkholder":
        spec = make_spec(json.loads(args.spec))
        maj = check_majorization(spec, n_probes=args.probes, seed=args.seed, tol=args.tol)
        zz = check_zigzag(spec, n_probes=args.probes, seed=args.seed)
        payload = {"construction": spec.construction, "majorization": maj, "zigzag": zz}
        _emit(payload, args.out)
        return 0 if (maj.ok and zz.midpoint_violations == 0) else 1
    if args.target == "umd":
        rng = substream(args.seed, "cli-umd-tree")
        tree = DyadicTree.random_gaussian(args.depth, args.dim, rng)
        tag = _TAGS[args.norm]()
        report = umd_check(args.p, tag, tree, k_samples=args.samples, seed=args.seed)
        payload = {
            "p": report.p,
            "max_ratio_root": report.max_ratio_root,
            "reference": report.reference,
            "exact": report.exact,
            "rhs_mean": report.rhs_mean,
        }
        _emit(payload, args.out)
        return 0
    if args.target == "decoupling":
        tree = DyadicTree.prefix_sign(args.depth) if args.tree == "prefix-sign" else DyadicTree.random_gaussian(args.depth, 1, substream(args.seed, "cli-dec-tree"))
        report = hitczenko_check(tree, p=args.p, k_samples=args.samples, seed=args.seed)
        _emit(dataclasses.asdict(report), args.out)
        return 0 if report.bound_ok else 1
    if args.target == "rad-oracle":
        rng = substream(args.seed, "cli-rad")
        ok = True
        rows = []
        for trial in range(args.trials):
            zs = rng.normal(size=(args.depth, args.dim))
            exact = rad_exact(zs, LpTag(2.0))
            mean, se = rad_estimate(zs, LpTag(2.0), args.samples, seed=trial)
            exact_m = maximal_rad_exact(zs, LpTag(2.0))
            mean_m, se_m = maximal_rad_estimate(zs, LpTag(2.0), args.samples, seed=trial)
            ok &= abs(mean - exact) <= 3 * se and abs(mean_m - exact_m) <= 3 * se_m
            rows.append({"exact": exact, "mc": mean, "se": se, "exact_max": exact_m, "mc_max": mean_m, "se_max": se_m})
        _emit({"ok": ok, "trials": rows}, args.out)
        return 0 if ok else 1
    if args.target == "minimax":
        rng = substream(args.seed, "cli-minimax")
        rows = []
        ok = True
        for _ in range(args.trials):
            n = int(rng.integers(1, 4))
            xs = rng.uniform(-1, 1, size=n)
            value = brute_force_minimax(xs, args.loss)
            rad = rad_exact_scalar(xs)
            ok &= rad <= value + 0.05
            rows.append({"xs": xs.tolist(), "minimax": value, "rad_exact": rad})
        _emit({"ok": ok, "trials": rows}, args.out)
        return 0 if ok else 1
    raise ValueError(f"unknown check target {args.target!r}")


def _cmd_spectral(args) -> int:
    entries = None
    kind = args.entry_distribution
    if kind == "adversarial-file":
        entries = json.loads(pathlib.Path(args.file).read_text())
        kind = "explicit"
    res = run_spectral(
        d=args.d,
        r=args.r,
        tau=args.tau,
        n=args.n,
        stream_kind=kind,
        loss_name=args.loss,
        seed=args.seed,
        max_net=args.net_size,
        eta=args.eta,
        entries=entries,
    )
    payload = dataclasses.asdict(res)
    payload.pop("rows")
    _emit(payload, args.out)
    return 0


def _cmd_report(args) -> int:
    digest = merge_reports(args.directory)
    out = pathlib.Path(args.directory) / "report.json"
    out.write_text(json.dumps(digest, indent=2, sort_keys=True))
    print(out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="zigzag", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a configured experiment")
    p_run.add_argument("config")
    p_run.add_argument("--out", default=None)
    p_run.set_defaults(func=_cmd_run)

    p_check = sub.add_parser("check", help="statistical / exact verifiers")
    p_check.add_argument("target", choices=["burkholder", "umd", "decoupling", "rad-oracle", "minimax"])
    p_check.add_argument("--spec", default='{"construction": "scalar-p", "p": 3.0}', help="construction JSON for burkholder checks")
    p_check.add_argument("--probes", type=int, default=10_000)
    p_check.add_argument("--tol", type=float, default=1e-9)
    p_check.add_argument("--p", type=float, default=2.0)
    p_check.add_argument("--norm", choices=sorted(_TAGS), default="l2")
    p_check.add_argument("--depth", type=int, default=8)
    p_check.add_argument("--dim", type=int, default=4)
    p_check.add_argument("--tree", choices=["random", "prefix-sign"], default="random")
    p_check.add_argument("--samples", type=int, default=4000)
    p_check.add_argument("--trials", type=int, default=10)
    p_check.add_argument("--loss", choices=["hinge", "absolute", "linear"], default="absolute")
    p_check.add_argument("--seed", type=int, default=0)
    p_check.add_argument("--out", default=None)
    p_check.set_defaults(func=_cmd_check)

    p_spec = sub.add_parser("spectral", help="matrix prediction run")
    p_spec.add_argument("--d", type=int, default=3)
    p_spec.add_argument("--r", type=int, default=1)
    p_spec.add_argument("--tau", type=float, default=3.0)
    p_spec.add_argument("--n", type=int, default=200)
    p_spec.add_argument("--net-size", type=int, default=500)
    p_spec.add_argument("--seed", type=int, default=0)
    p_spec.add_argument("--eta", type=float, default=None)
    p_spec.add_argument("--loss", choices=["hinge", "absolute", "linear"], default="hinge")
    p_spec.add_argument(
        "--entry-distribution",
        choices=["uniform", "row-spiky", "adversarial-file"],
        default="uniform",
    )
    p_spec.add_argument("--file", default=None, help="entry triples JSON for adversarial-file")
    p_spec.add_argument("--out", default=None)
    p_spec.set_defaults(func=_cmd_spectral)

    p_rep = sub.add_parser("report", help="digest summary.json files under a directory")
    p_rep.add_argument("directory")
    p_rep.set_defaults(func=_cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
