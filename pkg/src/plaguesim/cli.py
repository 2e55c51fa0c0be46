"""Command-line interface.

Verbs: run, batch, tune, compare-sir, serve.
"""

from __future__ import annotations

import argparse
import sys

from plaguesim import runner
from plaguesim.scenario import ScenarioError, load_scenario


def _parse_seed_range(text: str) -> list[int]:
    """Accept 'N..M' (inclusive) or a comma-separated list."""
    if ".." in text:
        lo, hi = text.split("..", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(x) for x in text.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plaguesim",
        description="Agent-based simulator of virtual plagues in a synthetic MMOG population",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--scenario", required=True, help="scenario file path or bundled name")
        p.add_argument("--seed", type=int, default=None, help="override the scenario seed")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--events", action="store_true", help="write the NDJSON event log")
        p.add_argument("--threshold", type=float, default=None, help="epidemic attack-rate threshold")

    p_run = sub.add_parser("run", help="execute one run")
    add_common(p_run)

    p_batch = sub.add_parser("batch", help="execute a batch of seeded runs")
    add_common(p_batch)
    p_batch.add_argument("--seeds", required=True, help="seed range N..M or comma list")
    p_batch.add_argument("--workers", type=int, default=1, help="parallel worker processes")

    p_tune = sub.add_parser("tune", help="bisect a channel beta to a target R0")
    add_common(p_tune)
    p_tune.add_argument("--channel", required=True)
    p_tune.add_argument("--target", type=float, default=1.0)
    p_tune.add_argument("--tolerance", type=float, default=0.1)
    p_tune.add_argument("--runs-per-eval", type=int, default=30)

    p_cmp = sub.add_parser("compare-sir", help="compare the scenario to an RK4 SIR baseline")
    add_common(p_cmp)
    p_cmp.add_argument("--beta", type=float, required=True, help="macro contact rate per day")
    p_cmp.add_argument("--gamma", type=float, required=True, help="macro recovery rate per day")
    p_cmp.add_argument("--seeds", default=None, help="seed range for the micro mean (default: scenario seed)")

    p_serve = sub.add_parser("serve", help="start the control service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8642)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "serve":
        import uvicorn

        from plaguesim.service import create_app

        uvicorn.run(create_app(), host=args.host, port=args.port, log_level="warning")
        return 0

    try:
        config = load_scenario(args.scenario)
    except ScenarioError as exc:
        print(f"scenario error:\n{exc}", file=sys.stderr)
        return 2
    if args.threshold is not None:
        config.epidemic_threshold = args.threshold

    if args.command == "run":
        result = runner.run(config, seed_override=args.seed, collect_events=args.events)
        print(runner.summary_report(result), end="")
        if args.out:
            runner.write_outputs(result, args.out)
            print(f"outputs written to {args.out}")
    elif args.command == "batch":
        seeds = _parse_seed_range(args.seeds)
        batch = runner.run_batch(config, seeds, workers=args.workers)
        print(batch.to_text(), end="")
        if args.out:
            from pathlib import Path

            out = Path(args.out)
            out.mkdir(parents=True, exist_ok=True)
            lines = ["seed,attack_rate,peak_prevalence,peak_tick,deaths,duration_ticks,epidemic_occurred"]
            for seed, s in zip(batch.seeds, batch.summaries):
                lines.append(
                    f"{seed},{s.attack_rate:.6g},{s.peak_prevalence:.6g},{s.peak_tick},"
                    f"{s.deaths},{s.duration_ticks},{int(s.epidemic_occurred)}"
                )
            (out / "batch.csv").write_text("\n".join(lines) + "\n")
            (out / "batch_summary.txt").write_text(batch.to_text())
            print(f"outputs written to {args.out}")
    elif args.command == "tune":
        if args.seed is not None:
            config.seed = args.seed
        try:
            tuned = runner.tune_beta_for_target_r0(
                config,
                channel=args.channel,
                target=args.target,
                tolerance=args.tolerance,
                runs_per_eval=args.runs_per_eval,
            )
        except runner.TuneError as exc:
            print(f"tune error: {exc}", file=sys.stderr)
            return 2
        status = "converged" if tuned.converged else "NOT converged (best found)"
        print(f"channel: {tuned.channel}")
        print(f"beta: {tuned.beta:.6g}")
        print(f"achieved mean first-generation R0: {tuned.achieved:.4g} (target {tuned.target} +/- {tuned.tolerance})")
        print(f"iterations: {tuned.iterations} ({status})")
    elif args.command == "compare-sir":
        seeds = _parse_seed_range(args.seeds) if args.seeds else [config.seed]
        comparison = runner.compare_scenario_to_sir(config, args.beta, args.gamma, seeds)
        r = comparison.report
        print(f"mean |I| gap per tick: {r.mean_i_gap:.4g}")
        print(f"peak time: macro {r.peak_time_macro:.4g}d vs micro {r.peak_time_micro:.4g}d (gap {r.peak_time_gap:.4g}d)")
        print(f"final size: macro {r.final_size_macro:.4g} vs micro {r.final_size_micro:.4g} (gap {r.final_size_gap:.4g})")
        if args.out:
            from pathlib import Path

            out = Path(args.out)
            out.mkdir(parents=True, exist_ok=True)
            (out / "sir_trajectory.csv").write_text(comparison.trajectory.to_csv())
            lines = ["tick,mean_infected"]
            for t, i in zip(comparison.micro_ticks, comparison.micro_mean_infected):
                lines.append(f"{t},{i:.6g}")
            (out / "micro_mean.csv").write_text("\n".join(lines) + "\n")
            print(f"outputs written to {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
