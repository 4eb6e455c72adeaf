"""Command line client: train, recognize, infer, synth, eval, serve.

Every command is a thin wrapper around the HTTP API; by default it drives
the service in-process, with ``--server URL`` it targets a remote
instance.  ``--format json-lines`` emits one JSON record per line instead
of the human-readable table.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .client import ServiceClient
from .errors import IPrompsError


def _bool_flag(value: str) -> bool:
    lowered = value.strip().lower()
    if lowered in ("true", "1", "yes", "on"):
        return True
    if lowered in ("false", "0", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected true/false, got {value!r}")


def _add_common(parser):
    parser.add_argument("--server", default=None, help="base URL of a running service; default runs in-process")
    parser.add_argument("--format", choices=("table", "json-lines"), default="table")


def _add_train_options(parser, with_t_norm=True):
    parser.add_argument("--basis-n", type=int, default=20)
    parser.add_argument("--ridge", type=float, default=1e-6)
    parser.add_argument("--sigma-y", type=float, default=1e-4)
    if with_t_norm:
        parser.add_argument("--t-norm", type=int, default=100)
    parser.add_argument("--include-emg", type=_bool_flag, default=True, metavar="{true,false}")
    parser.add_argument("--sigma-alpha-floor", type=float, default=0.05)
    parser.add_argument("--emg-window", type=int, default=9, help="EMG envelope window; 0 = raw passthrough")


def _add_synth_options(parser):
    parser.add_argument("--n-tasks", type=int, default=3)
    parser.add_argument("--pose-channels", type=int, default=2)
    parser.add_argument("--emg-channels", type=int, default=2)
    parser.add_argument("--robot-channels", type=int, default=2)
    parser.add_argument("--t-norm", type=int, default=100)
    parser.add_argument("--pose-overlap", type=float, default=1.0)
    parser.add_argument("--emg-separation", type=float, default=5.0)
    parser.add_argument("--tempo-std", type=float, default=0.1)
    parser.add_argument("--noise-std", type=float, default=0.05)
    parser.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ipromps")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a task library from a dataset directory")
    p.add_argument("--demos-root", required=True, help="directory with <task_label>/<demo>.csv")
    p.add_argument("--out-model", required=True)
    p.add_argument("--register-as", default=None, help="also register the library on the server")
    _add_train_options(p)
    _add_common(p)

    p = sub.add_parser("recognize", help="classify the task behind a partial observation")
    p.add_argument("--model", required=True)
    p.add_argument("--obs", required=True, help="observation CSV (a demonstration file)")
    p.add_argument("--ratio", type=float, default=1.0)
    p.add_argument("--include-emg", type=_bool_flag, default=True, metavar="{true,false}")
    p.add_argument("--alpha-grid", type=int, default=100)
    _add_common(p)

    p = sub.add_parser("infer", help="recognize, then predict the full trajectory")
    p.add_argument("--model", required=True)
    p.add_argument("--obs", required=True)
    p.add_argument("--ratio", type=float, default=1.0)
    p.add_argument("--include-emg", type=_bool_flag, default=True, metavar="{true,false}")
    p.add_argument("--alpha-grid", type=int, default=100)
    p.add_argument("--t-out", type=int, default=None)
    p.add_argument("--out", required=True, help="prediction CSV output path")
    _add_common(p)

    p = sub.add_parser("synth", help="generate a synthetic train/test dataset")
    p.add_argument("--out-root", required=True)
    p.add_argument("--demos-per-task", type=int, default=20)
    p.add_argument("--test-per-task", type=int, default=10)
    _add_synth_options(p)
    _add_common(p)

    p = sub.add_parser("eval", help="run the with/without-EMG accuracy grid")
    p.add_argument("--out-report", default=None)
    p.add_argument("--demo-counts", default="20", help="comma list, e.g. 10,15,20")
    p.add_argument("--ratios", default="0.1", help="comma list, e.g. 0.1,0.2")
    p.add_argument("--cells", default=None,
                   help="explicit cells 'demos:ratio,...' overriding the cross product")
    p.add_argument("--trials", type=int, default=10)
    _add_synth_options(p)
    _add_train_options(p, with_t_norm=False)
    p.add_argument("--alpha-grid", type=int, default=100)
    _add_common(p)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)

    return parser


def _train_options(args) -> dict:
    return {
        "basis_n": args.basis_n,
        "ridge": args.ridge,
        "sigma_y": args.sigma_y,
        "t_norm": args.t_norm,
        "include_emg": args.include_emg,
        "sigma_alpha_floor": args.sigma_alpha_floor,
        "emg_window": args.emg_window,
    }


def _synth_spec(args) -> dict:
    return {
        "n_tasks": args.n_tasks,
        "p": args.pose_channels,
        "e": args.emg_channels,
        "j": args.robot_channels,
        "t_norm": args.t_norm,
        "pose_overlap": args.pose_overlap,
        "emg_separation": args.emg_separation,
        "tempo_std": args.tempo_std,
        "noise_std": args.noise_std,
        "seed": args.seed,
    }


def _emit(args, record: dict, table_lines) -> None:
    if args.format == "json-lines":
        print(json.dumps(record))
    else:
        for line in table_lines:
            print(line)


def _read_dataset_files(root: Path) -> dict:
    if not root.is_dir():
        raise IPrompsError(f"demos root is not a directory: {root}")
    files = {}
    for task_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        csvs = sorted(task_dir.glob("*.csv"))
        if not csvs:
            raise IPrompsError(f"no demonstrations in task directory {task_dir}")
        for f in csvs:
            files[f"{task_dir.name}/{f.name}"] = f.read_text(encoding="utf-8")
    if not files:
        raise IPrompsError(f"no demonstrations under {root}")
    return files


def cmd_train(args, client: ServiceClient) -> int:
    files = _read_dataset_files(Path(args.demos_root))
    result = client.train(files, _train_options(args), register_as=args.register_as)
    Path(args.out_model).write_text(json.dumps(result["library"], indent=2), encoding="utf-8")
    for task, info in sorted(result["summary"].items()):
        record = {"task": task, **info}
        _emit(args, record, [
            f"{task}: {info['demos']} demos, mu_alpha={info['mu_alpha']:.4f}, "
            f"sigma_alpha={info['sigma_alpha']:.4f}, "
            f"fit_residual_var={info['mean_residual_variance']:.3g}"
        ])
    if args.format == "table":
        print(f"library written to {args.out_model}")
    return 0


def _obs_options(args) -> dict:
    return {"ratio": args.ratio, "include_emg": args.include_emg}


def cmd_recognize(args, client: ServiceClient) -> int:
    library = json.loads(Path(args.model).read_text(encoding="utf-8"))
    result = client.recognize(
        Path(args.obs).read_text(encoding="utf-8"),
        library=library,
        options=_obs_options(args),
        alpha_grid=args.alpha_grid,
    )
    lines = [f"chosen: {result['chosen']}"]
    for task in result["posteriors"]:
        lines.append(
            f"  {task}: posterior={result['posteriors'][task]:.6f} "
            f"alpha={result['alphas'][task]:.4f} "
            f"loglik={result['log_likelihoods'][task]:.4f}"
        )
    _emit(args, result, lines)
    return 0


def cmd_infer(args, client: ServiceClient) -> int:
    library = json.loads(Path(args.model).read_text(encoding="utf-8"))
    result = client.infer(
        Path(args.obs).read_text(encoding="utf-8"),
        library=library,
        options=_obs_options(args),
        alpha_grid=args.alpha_grid,
        t_out=args.t_out,
    )
    Path(args.out).write_text(result["prediction_csv"], encoding="utf-8")
    record = {
        "chosen": result["recognition"]["chosen"],
        "duration": result["duration"],
        "out": args.out,
        "posteriors": result["recognition"]["posteriors"],
    }
    _emit(args, record, [
        f"chosen: {record['chosen']} (duration {record['duration']:.3f})",
        f"prediction written to {args.out}",
    ])
    return 0


def cmd_synth(args, client: ServiceClient) -> int:
    spec = _synth_spec(args)
    spec["demos_per_task"] = args.demos_per_task
    spec["test_per_task"] = args.test_per_task
    result = client.synth(spec)
    root = Path(args.out_root)
    for relpath, text in result["files"].items():
        target = root / relpath
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(text, encoding="utf-8")
    record = {"out_root": str(root), "files": len(result["files"]), "stats": result["stats"]}
    lines = [f"wrote {len(result['files'])} files under {root}"]
    for key, value in sorted(result["stats"].items()):
        lines.append(f"  {key}: {value:.4f}")
    _emit(args, record, lines)
    return 0


def _parse_cells(args) -> list:
    if args.cells:
        cells = []
        for item in args.cells.split(","):
            demos, _, ratio = item.partition(":")
            cells.append({"demos_per_task": int(demos), "ratio": float(ratio)})
        return cells
    demo_counts = [int(x) for x in args.demo_counts.split(",") if x]
    ratios = [float(x) for x in args.ratios.split(",") if x]
    return [
        {"demos_per_task": d, "ratio": r} for d in demo_counts for r in ratios
    ]


def cmd_eval(args, client: ServiceClient) -> int:
    spec = _synth_spec(args)
    result = client.evaluate({
        "cells": _parse_cells(args),
        "trials_per_task": args.trials,
        "seed": args.seed,
        "synth": spec,
        "train": _train_options(args),
        "alpha_grid": args.alpha_grid,
    })
    report = result["report"]
    if args.out_report:
        Path(args.out_report).write_text(json.dumps(report, indent=2), encoding="utf-8")
    if args.format == "json-lines":
        for entry in report["grid"]:
            print(json.dumps(entry))
        print(json.dumps({"aggregate": report["aggregate"]}))
        return 0
    by_key: dict = {}
    for entry in report["grid"]:
        key = (entry["demos_per_task"], entry["ratio"], entry["task"])
        by_key.setdefault(key, {})[entry["with_emg"]] = entry["accuracy"]
    header = f"{'demos':>6} {'ratio':>6} {'task':<10} {'without_emg':>12} {'with_emg':>9}"
    print(header)
    for (demos, ratio, task), accs in sorted(by_key.items()):
        print(f"{demos:>6} {ratio:>6.2f} {task:<10} {accs.get(False, float('nan')):>12.3f} "
              f"{accs.get(True, float('nan')):>9.3f}")
    agg = report["aggregate"]
    if agg["cells"]:
        print(f"mean accuracy without EMG: {agg['mean_without_emg']:.3f}")
        print(f"mean accuracy with EMG:    {agg['mean_with_emg']:.3f}")
        print(f"cells where with-EMG >= without: {agg['wins']}/{agg['cells']}")
    if args.out_report:
        print(f"report written to {args.out_report}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "serve":
        return cmd_serve(args)
    handlers = {
        "train": cmd_train,
        "recognize": cmd_recognize,
        "infer": cmd_infer,
        "synth": cmd_synth,
        "eval": cmd_eval,
    }
    try:
        with ServiceClient(server=args.server) as client:
            return handlers[args.command](args, client)
    except IPrompsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
