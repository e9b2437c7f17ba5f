"""Command-line entry point: run, ablate, verify-theorems, replay, divergence, serve."""
from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Any

from .config import (PRESETS, RunConfig, Variant, VariantKind, load_config)
from .engine import (ablation_suite, config_dict_shallow, episodes_to_reach,
                     format_ablation_table, modal_threshold, run_experiment,
                     window_fidelity, window_mean)
from .telemetry import LogParseError, LogWriter, divergence_report, replay
from . import theorems

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PROPERTY = 3


def _load_base_config(args: argparse.Namespace) -> RunConfig:
    if getattr(args, "config", None):
        cfg = load_config(args.config)
    elif getattr(args, "preset", None):
        cfg = PRESETS[args.preset]()
    else:
        cfg = RunConfig()
    overrides: dict[str, Any] = {}
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if getattr(args, "episodes", None) is not None:
        overrides["episodes"] = args.episodes
    if getattr(args, "variant", None):
        overrides["variant"] = Variant(
            kind=VariantKind(args.variant),
            fixed_tau=getattr(args, "fixed_tau", 0.7) or 0.7,
        )
    if overrides:
        d = config_dict_shallow(cfg)
        d.update(overrides)
        cfg = RunConfig(**d)
    return cfg


def cmd_run(args: argparse.Namespace) -> int:
    cfg = _load_base_config(args)
    writer = None
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        writer = LogWriter(os.path.join(args.out, "episodes.jsonl"), cfg)
    sink = writer.append if writer else None
    series, state = run_experiment(cfg, record_sink=sink)
    if writer:
        writer.close()
    n = cfg.episodes
    w = min(100, n)
    summary = {
        "seed": cfg.seed,
        "episodes": n,
        "variant": cfg.variant.kind.value,
        "first_window_loss": window_mean(series.loss, 0, w),
        "final_window_loss": window_mean(series.loss, n - w, n),
        "final_smoothed_reward": series.smoothed_reward[-1],
        "final_window_fidelity": window_fidelity(state.records, min(200, n)),
        "modal_threshold": modal_threshold(series.threshold, min(200, n)),
        "episodes_to_loss_0_2": episodes_to_reach(series.loss),
        "retrain_count": state.retrain_count,
        "config_hash": cfg.config_hash(),
    }
    if args.out:
        with open(os.path.join(args.out, "summary.json"), "w", encoding="utf-8") as fh:
            json.dump(summary, fh, indent=2)
        with open(os.path.join(args.out, "metrics.json"), "w", encoding="utf-8") as fh:
            json.dump(series.as_dict(), fh)
    print(json.dumps(summary, indent=2))
    return EXIT_OK


def cmd_ablate(args: argparse.Namespace) -> int:
    cfg = _load_base_config(args)
    seeds = [int(s) for s in args.seeds.split(",")] if args.seeds else list(range(10))
    result = ablation_suite(cfg, seeds)
    print(format_ablation_table(result))
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "ablation.json"), "w", encoding="utf-8") as fh:
            json.dump(result, fh, indent=2)
    return EXIT_OK


def cmd_verify_theorems(args: argparse.Namespace) -> int:
    cfg = _load_base_config(args)
    seeds = [int(s) for s in args.seeds.split(",")] if args.seeds else list(range(10))
    checks = theorems.run_all(cfg, seeds)
    failed = False
    for name, ok, detail in checks:
        print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
        failed = failed or not ok
    return EXIT_PROPERTY if failed else EXIT_OK


def cmd_replay(args: argparse.Namespace) -> int:
    try:
        series, audit = replay(args.log)
    except LogParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 1
    n = len(series)
    print(f"episodes: {n}")
    if n:
        w = min(100, n)
        print(f"first-window loss: {window_mean(series.loss, 0, w):.4f}")
        print(f"final-window loss: {window_mean(series.loss, n - w, n):.4f}")
        print(f"final smoothed reward: {series.smoothed_reward[-1]:.4f}")
    if audit.ok:
        print(f"audit: PASS ({audit.checked} records)")
        return EXIT_OK
    print(f"audit: FAIL ({len(audit.violations)} violations)")
    for episode, msg in audit.violations[:20]:
        print(f"  episode {episode}: {msg}")
    return 1


def cmd_divergence(args: argparse.Namespace) -> int:
    try:
        report = divergence_report(args.log, factor=args.factor)
    except LogParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 1
    print(json.dumps(report, indent=2))
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    from .service import serve
    cfg = _load_base_config(args)
    static_dir = args.static_dir
    if static_dir is None:
        candidate = os.path.join(os.getcwd(), "frontend", "dist")
        static_dir = candidate if os.path.isdir(candidate) else None
    server = serve(cfg, port=args.port, log_path=args.log, static_dir=static_dir)
    print(f"serving on http://localhost:{args.port}/ "
          f"(static: {static_dir or 'builtin placeholder'})")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.session.close()  # type: ignore[attr-defined]
        server.server_close()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="alignloop",
        description="Feedback-aligned decision loop: simulate, ablate, audit, serve.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="path to a JSON run config")
        p.add_argument("--preset", choices=sorted(PRESETS),
                       help="named config preset (ignored with --config)")
        p.add_argument("--seed", type=int)
        p.add_argument("--episodes", type=int)

    p_run = sub.add_parser("run", help="run one experiment")
    common(p_run)
    p_run.add_argument("--variant", choices=[v.value for v in VariantKind])
    p_run.add_argument("--fixed-tau", type=float, dest="fixed_tau")
    p_run.add_argument("--out", help="directory for episodes.jsonl/summary/metrics")
    p_run.set_defaults(func=cmd_run)

    p_abl = sub.add_parser("ablate", help="run the five-variant comparison")
    common(p_abl)
    p_abl.add_argument("--seeds", help="comma-separated seed list (default 0..9)")
    p_abl.add_argument("--out")
    p_abl.set_defaults(func=cmd_ablate)

    p_ver = sub.add_parser("verify-theorems", help="run convergence property checks")
    common(p_ver)
    p_ver.add_argument("--seeds", help="comma-separated seed list (default 0..9)")
    p_ver.set_defaults(func=cmd_verify_theorems)

    p_rep = sub.add_parser("replay", help="replay and audit an episode log")
    p_rep.add_argument("--log", required=True)
    p_rep.set_defaults(func=cmd_replay)

    p_div = sub.add_parser("divergence", help="policy-practice divergence report")
    p_div.add_argument("--log", required=True)
    p_div.add_argument("--factor", type=float, default=2.0)
    p_div.set_defaults(func=cmd_divergence)

    p_srv = sub.add_parser("serve", help="serve the live loop over HTTP")
    common(p_srv)
    p_srv.add_argument("--port", type=int, default=8080)
    p_srv.add_argument("--log", help="episode log path for the live session")
    p_srv.add_argument("--static-dir", help="console bundle directory")
    p_srv.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
