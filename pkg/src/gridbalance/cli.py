"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 invalid scenario, 3 runtime failure
(averaging did not converge, or an I/O error).
"""

from __future__ import annotations

import argparse
from dataclasses import replace
import logging
from pathlib import Path
import sys

from . import protocol
from .errors import AveragingError, GridBalanceError, ScenarioError
from .output import format_real, write_csv, write_svg
from .scenario import edge_fragment, load_scenario, paper_preset_text, sample_initial
from .topology import KINDS, generate

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2, 3

log = logging.getLogger("gridbalance")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gridbalance", description="Self-balancing microgrid demand simulator.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="simulate a scenario and write CSV (and SVG) output")
    run.add_argument("--scenario", required=True, type=Path)
    run.add_argument("--mode", choices=protocol.MODES, help="override protocol.mode")
    run.add_argument("--out", type=Path, help="output directory (default: output.dir)")
    run.add_argument("--svg", action="store_true", help="also render SVG charts")
    run.add_argument("--sample-initial", action="store_true",
                     help="draw initial demands from U[50, 100] using the seed")
    run.add_argument("--seed", type=int, help="override the scenario seed")

    pre = sub.add_parser("preset", help="write the bundled ten-building scenario file")
    pre.add_argument("--out", type=Path, default=Path("."), help="directory to write into")

    gen = sub.add_parser("gen-topology", help="print an edge-list config fragment")
    gen.add_argument("--kind", required=True, choices=KINDS)
    gen.add_argument("--n", required=True, type=int)
    gen.add_argument("--p", type=float, help="edge probability for erdos_renyi")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", type=Path, help="write to a file instead of stdout")

    val = sub.add_parser("validate", help="parse and check a scenario without running it")
    val.add_argument("--scenario", required=True, type=Path)
    return parser


def summary_line(record: protocol.SimulationRecord) -> str:
    eq = "none" if record.equilibrium_slot is None else str(record.equilibrium_slot)
    price_mean = record.final_price_mean
    ok = record.final_total < record.capacity
    return (
        f"mode={record.mode} slots={len(record.slots)} equilibrium={eq} "
        f"final_total={format_real(record.final_total)} "
        f"final_price_mean={'none' if price_mean is None else format_real(price_mean)} "
        f"constraint_ok={'true' if ok else 'false'}"
    )


def _cmd_run(args) -> int:
    scenario = load_scenario(args.scenario)
    if args.seed is not None:
        scenario = replace(scenario, seed=args.seed)
    if args.sample_initial:
        scenario = sample_initial(scenario, scenario.seed)
    out_dir = args.out or Path(scenario.output_dir)
    try:
        record = protocol.run(scenario, mode=args.mode)
    except AveragingError as err:
        print(f"error: {err}", file=sys.stderr)
        if err.record is not None:
            write_csv(err.record, out_dir)
            print(f"partial record written to {out_dir}", file=sys.stderr)
        return EXIT_RUNTIME
    write_csv(record, out_dir)
    if args.svg:
        write_svg(record, out_dir)
    if record.clamp_total:
        log.warning("demand floor clamped %d times", record.clamp_total)
    print(summary_line(record))
    return EXIT_OK


def _cmd_preset(args) -> int:
    args.out.mkdir(parents=True, exist_ok=True)
    path = args.out / "paper_preset.cfg"
    path.write_text(paper_preset_text(), encoding="utf-8", newline="\n")
    print(f"wrote {path}", file=sys.stderr)
    return EXIT_OK


def _cmd_gen_topology(args) -> int:
    try:
        g = generate(args.kind, args.n, seed=args.seed, p=args.p)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = edge_fragment(g)
    if args.out:
        args.out.write_text(text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_validate(args) -> int:
    scenario = load_scenario(args.scenario)
    g = scenario.build_graph()
    print(
        f"ok: n={scenario.n} edges={len(g.edges)} mode={scenario.protocol.mode} "
        f"capacity={format_real(scenario.pricing.capacity)} "
        f"initial_total={format_real(sum(scenario.initial_demand))}"
    )
    return EXIT_OK


_COMMANDS = {
    "run": _cmd_run,
    "preset": _cmd_preset,
    "gen-topology": _cmd_gen_topology,
    "validate": _cmd_validate,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return _COMMANDS[args.command](args)
    except ScenarioError as exc:
        print(f"invalid scenario: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except GridBalanceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
