"""Command-line front end.

Three subcommands:

``rotavg average``   robust-average a rotation list from a text file.
``rotavg bench``     Monte-Carlo accuracy/runtime sweeps on synthetic data.
``rotavg register``  recover the rotation between two corresponding clouds,
                     or corrupt one cloud into a full synthetic scenario.

Exit codes: 0 on success, 2 for unreadable/malformed inputs or bad
parameters, 3 when the numbers themselves defeat the computation
(non-rotation inputs without --repair, degenerate matrices, hypothesis
harvesting hitting its attempt cap).
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from rotavg import bench, fileio, registration, so3
from rotavg.averaging import EmptyInput, TludConfig, robust_average

__all__ = ["main"]


def _float_list(text: str) -> list[float]:
    try:
        return [float(f) for f in text.split(",") if f.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated number list: {text!r}") from None


def _int_list(text: str) -> list[int]:
    try:
        return [int(f) for f in text.split(",") if f.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated integer list: {text!r}") from None


def _dump_json(payload: dict, out_path: str | None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    sys.stdout.write(text)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _tlud_config(args: argparse.Namespace) -> TludConfig:
    return TludConfig(
        epsilon_c=args.epsilon_c,
        delta=args.delta,
        it_max=args.it_max,
        realternate=args.realternate,
    )


def _add_tlud_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--epsilon-c", type=float, default=0.5, metavar="EPS",
                   help="chordal inlier threshold (default 0.5)")
    p.add_argument("--delta", type=float, default=0.001, metavar="D",
                   help="refinement stop threshold in radians (default 0.001)")
    p.add_argument("--it-max", type=int, default=10, metavar="K",
                   help="max refinement iterations (default 10)")
    p.add_argument("--realternate", type=int, default=0, metavar="R",
                   help="extra select/refine rounds until the inlier set settles (default 0)")


def _cmd_average(args: argparse.Namespace) -> int:
    rotations, repaired = fileio.read_rotations(args.input, fmt=args.format, repair=args.repair)
    if repaired:
        print(f"warning: repaired {repaired} near-rotation row(s) by projection", file=sys.stderr)
    result = robust_average(rotations, _tlud_config(args))
    _dump_json(
        {
            "estimate": [float(v) for v in result.estimate.ravel()],
            "inlier_indices": [int(i) for i in result.inliers],
            "init_index": None if result.init_index is None else int(result.init_index),
            "iterations": int(result.iterations),
            "final_cost": float(result.final_cost),
        },
        args.out_json,
    )
    return 0


def _cmd_bench(args: argparse.Namespace) -> int:
    if args.preset == "desk":
        scenarios = bench.desk_preset(7 if args.seed is None else args.seed)
    else:
        seed0 = 0 if args.seed is None else args.seed
        scenarios = []
        for n in args.n:
            for ratio in args.ratio:
                for sigma in args.sigma:
                    scenarios.append(
                        bench.BenchScenario(
                            n_samples=n,
                            outlier_ratio=ratio,
                            sigma_deg=sigma,
                            n_trials=args.trials,
                            seed=seed0 + len(scenarios),
                        )
                    )
    estimators = bench.default_estimators()
    methods = {}
    for name in args.methods.split(","):
        name = name.strip()
        if name not in estimators:
            raise ValueError(f"unknown method {name!r}; available: {', '.join(sorted(estimators))}")
        methods[name] = estimators[name]
    rows = bench.sweep(scenarios, methods, n_workers=args.workers)
    timing = not args.no_timing
    print(bench.format_summary_table(rows, timing=timing))
    if args.out_csv:
        bench.write_trials_csv(args.out_csv, rows, timing=timing)
    if args.out_json:
        bench.write_summary_json(args.out_json, rows, timing=timing)
    return 0


def _cmd_register(args: argparse.Namespace) -> int:
    src = fileio.load_cloud(args.src)
    if args.dst is not None:
        # Two-file mode: clouds already correspond point-for-point.
        dst = fileio.load_cloud(args.dst)
        scen = registration.RegistrationScenario(
            scale=None,
            rotation=None,
            translation=None,
            noise_sigma=args.noise_sigma,
            outlier_fraction=0.0,
            n_hypotheses=args.hypotheses,
            ratio_tolerance=args.ratio_tol,
            seed=args.seed,
        )
        truth = None
    else:
        # Scenario mode: corrupt the cloud ourselves and score the recovery.
        rng = np.random.default_rng(
            np.random.SeedSequence([args.seed, registration._TAG_NORMALIZE])
        )
        src = registration.normalize_cloud(src, args.points, rng)
        scen = registration.make_scenario(
            seed=args.seed,
            outlier_fraction=args.outlier_fraction,
            n_hypotheses=args.hypotheses,
            noise_sigma=args.noise_sigma,
            ratio_tolerance=args.ratio_tol,
            scale=args.scale,
        )
        dst = registration.corrupt_cloud(src, scen)
        truth = scen.rotation

    hyps = registration.harvest_hypotheses(
        src, dst, scen, attempt_cap=args.attempt_cap, n_workers=args.workers
    )
    if args.out_hypotheses:
        fileio.write_rotations(args.out_hypotheses, hyps, header="hypothesis rotations, row-major")
    result = robust_average(hyps)
    payload = {
        "estimate": [float(v) for v in result.estimate.ravel()],
        "final_cost": float(result.final_cost),
        "inlier_count": int(len(result.inliers)),
        "iterations": int(result.iterations),
        "n_hypotheses": int(len(hyps)),
    }
    if truth is not None:
        payload["error_deg"] = float(
            np.degrees(so3.geodesic_distance(result.estimate, truth))
        )
    _dump_json(payload, args.out_json)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rotavg",
        description="Robust single rotation averaging: truncated-loss estimation, "
        "synthetic benchmarks, and hypothesis-based cloud registration.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_avg = sub.add_parser(
        "average",
        help="robust-average a rotation list from a text file",
        description="Read rotations (mat9 or quat lines) and print the robust "
        "average as JSON on stdout.",
    )
    p_avg.add_argument("input", help="rotation list file")
    p_avg.add_argument("--format", choices=("mat9", "quat"), default="mat9",
                       help="input line format (default mat9)")
    p_avg.add_argument("--repair", action="store_true",
                       help="project near-rotation mat9 rows instead of rejecting them")
    _add_tlud_flags(p_avg)
    p_avg.add_argument("--out-json", metavar="PATH", help="also write the JSON result here")
    p_avg.set_defaults(func=_cmd_average)

    p_bench = sub.add_parser(
        "bench",
        help="Monte-Carlo accuracy/runtime sweeps on synthetic rotation sets",
        description="Run trials over a grid of sample counts, outlier ratios, "
        "and inlier noise levels; print a summary table.",
    )
    p_bench.add_argument("--n", type=_int_list, default=[100], metavar="N1,N2,...",
                         help="sample counts (default 100)")
    p_bench.add_argument("--ratio", type=_float_list, default=[0.7], metavar="R1,R2,...",
                         help="outlier ratios in [0,1) (default 0.7)")
    p_bench.add_argument("--sigma", type=_float_list, default=[5.0], metavar="S1,S2,...",
                         help="inlier noise std devs in degrees (default 5)")
    p_bench.add_argument("--trials", type=int, default=50, metavar="T",
                         help="trials per scenario (default 50)")
    p_bench.add_argument("--seed", type=int, default=None, metavar="S",
                         help="base seed; scenario i uses S+i (default 0; desk preset 7)")
    p_bench.add_argument("--methods", default="tlud", metavar="M1,M2,...",
                         help="estimators to run: tlud, geodesic_l1 (default tlud)")
    p_bench.add_argument("--preset", choices=("desk",), default=None,
                         help="ignore the grid flags and run a canned sweep")
    p_bench.add_argument("--workers", type=int, default=1, metavar="W",
                         help="thread workers for trials (default 1; results identical)")
    p_bench.add_argument("--no-timing", action="store_true",
                         help="write zeros for runtime fields (byte-reproducible outputs)")
    p_bench.add_argument("--out-csv", metavar="PATH", help="write per-trial rows as CSV")
    p_bench.add_argument("--out-json", metavar="PATH", help="write the summary as JSON")
    p_bench.set_defaults(func=_cmd_bench)

    p_reg = sub.add_parser(
        "register",
        help="recover the rotation between corresponding point clouds",
        description="With one cloud, build a synthetic corrupted copy and "
        "report the recovery error; with two clouds (corresponding "
        "point-for-point), estimate the rotation between them.",
    )
    p_reg.add_argument("src", help="source cloud (.xyz or ASCII .ply)")
    p_reg.add_argument("dst", nargs="?", default=None,
                       help="corresponding target cloud (omit for scenario mode)")
    p_reg.add_argument("--outlier-fraction", type=float, default=0.9, metavar="F",
                       help="scenario mode: fraction of points replaced, in [0, 0.98] (default 0.9)")
    p_reg.add_argument("--scale", type=float, default=None, metavar="S",
                       help="scenario mode: similarity scale in (1, 5) (default: drawn from seed)")
    p_reg.add_argument("--noise-sigma", type=float, default=0.01, metavar="SIG",
                       help="scenario mode: Gaussian noise std dev (default 0.01)")
    p_reg.add_argument("--points", type=int, default=1000, metavar="N",
                       help="scenario mode: downsample the cloud to N points (default 1000)")
    p_reg.add_argument("--hypotheses", type=int, default=2000, metavar="H",
                       help="rotation hypotheses to harvest (default 2000)")
    p_reg.add_argument("--ratio-tol", type=float, default=0.1, metavar="TOL",
                       help="triangle side-ratio agreement tolerance (default 0.1)")
    p_reg.add_argument("--seed", type=int, default=0, metavar="S",
                       help="scenario seed (default 0)")
    p_reg.add_argument("--attempt-cap", type=int, default=1_000_000, metavar="A",
                       help="max 3-point samples before giving up (default 1000000)")
    p_reg.add_argument("--workers", type=int, default=1, metavar="W",
                       help="thread workers for harvesting (default 1; results identical)")
    p_reg.add_argument("--out-hypotheses", metavar="PATH",
                       help="write harvested hypotheses as mat9 text")
    p_reg.add_argument("--out-json", metavar="PATH", help="also write the JSON result here")
    p_reg.set_defaults(func=_cmd_register)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (fileio.RotationFormatError, fileio.CloudFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except fileio.RotationInvariantError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (so3.DegenerateMatrix, registration.AttemptCapExceeded) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (EmptyInput, registration.TooFewPoints, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
