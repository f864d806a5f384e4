"""Command-line front end: one subcommand per analysis, CSV on stdout.

Every table starts with ``# key=value`` lines holding the full parameter set,
so a table can be regenerated from its own header.  Output never contains
timestamps or host details and is byte-stable for a given command line.

Exit codes: 0 success, 2 invalid arguments, 3 more than 10% of the
simulated runs hit ``max_blocks`` without recovering.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
from dataclasses import dataclass, field
from typing import Callable, Sequence

from . import __version__
from .analytics import (
    ScenarioInputs,
    bribe_profitable,
    game_relative_difference,
    x_attack_threshold,
    y_init_threshold,
    y_join_threshold,
)
from .delay import t_eip, t_mitigated
from .mechanism import GeometricAvg, parse_kind
from .params import DemandParams, MinerPowers, ProtocolParams
from .simulator import PRNG_NAME, Axis, SimConfig, heatmap_cells, sweep

OUTPUT_DIR_ENV = "BASEFEE_OUTPUT_DIR"
EXIT_USAGE = 2
EXIT_TRUNCATED = 3
TRUNCATION_LIMIT = 0.10


class UsageError(Exception):
    pass


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


@dataclass
class OutputTable:
    schema: str
    columns: tuple[str, ...]
    rows: list[tuple] = field(default_factory=list)
    metadata: dict[str, object] = field(default_factory=dict)
    truncated_runs: int = 0
    total_runs: int = 0

    def add(self, *row) -> None:
        if len(row) != len(self.columns):
            raise ValueError(f"{self.schema}: expected {len(self.columns)} cells, got {len(row)}")
        self.rows.append(row)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# schema={self.schema}\n")
        buf.write(f"# tool=basefee {__version__}\n")
        for key, value in self.metadata.items():
            buf.write(f"# {key}={fmt(value)}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([fmt(cell) for cell in row])
        return buf.getvalue()


def grid(start: float, stop: float, step: float) -> list[float]:
    if step <= 0:
        raise UsageError("--step must be positive")
    if stop < start:
        raise UsageError("--to must not be below --from")
    n = int(round((stop - start) / step))
    return [round(start + k * step, 12) for k in range(n + 1)]


def linspace(start: float, stop: float, count: int) -> list[float]:
    if count < 1:
        raise UsageError("grid needs at least one point")
    if count == 1:
        return [start]
    return [round(start + k * (stop - start) / (count - 1), 12) for k in range(count)]


def float_list(text: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")


def _protocol(args) -> ProtocolParams:
    return ProtocolParams(phi=args.phi, target_size=args.s_star)


def _demand(args) -> DemandParams:
    return DemandParams(
        b_star=args.b_star,
        eps=args.eps_ratio * args.b_star,
        alpha=args.alpha,
        delta=getattr(args, "delta", 0.2),
    )


def _common_metadata(args, names: Sequence[str]) -> dict[str, object]:
    return {name: getattr(args, name) for name in names}


# -- analytic ---------------------------------------------------------------

_AXES = ("px", "py", "eps_ratio", "alpha", "delta")
_X_AXES = ("px", "eps_ratio", "alpha")
_DEFAULT_GRIDS = {
    "px": (0.05, 0.5, 0.01),
    "py": (0.01, 0.3, 0.01),
    "eps_ratio": (0.01, 0.2, 0.01),
    "alpha": (0.05, 1.0, 0.05),
    "delta": (0.0, 1.0, 0.05),
}


def cmd_analytic(args) -> OutputTable:
    axis = args.axis.replace("-", "_")
    if axis not in _AXES:
        raise UsageError(f"unknown axis {args.axis!r}")
    if args.scenario == "x" and axis not in _X_AXES:
        raise UsageError(f"axis {args.axis!r} has no meaning for scenario x")
    lo, hi, st = _DEFAULT_GRIDS[axis]
    values = grid(
        lo if args.start is None else args.start,
        hi if args.stop is None else args.stop,
        st if args.step is None else args.step,
    )

    table = OutputTable("analytic", ("axis_value", "rel_diff", "threshold_marker"))
    table.metadata = {"scenario": args.scenario, "axis": axis} | _common_metadata(
        args, ("px", "py", "py_ratio", "phi", "b_star", "s_star", "eps_ratio", "alpha", "delta")
    )

    def inputs_at(value: float) -> ScenarioInputs:
        point = {
            "px": args.px, "py": args.py, "eps_ratio": args.eps_ratio,
            "alpha": args.alpha, "delta": args.delta,
        }
        point[axis] = value
        if axis == "px" and args.py_ratio is not None:
            point["py"] = args.py_ratio * value
        if args.scenario == "x":
            point["py"] = 0.0
        protocol = ProtocolParams(phi=args.phi, target_size=args.s_star)
        demand = DemandParams(
            b_star=args.b_star, eps=point["eps_ratio"] * args.b_star,
            alpha=point["alpha"], delta=point["delta"],
        )
        return ScenarioInputs(protocol, demand, MinerPowers(point["px"], point["py"]))

    base = inputs_at(values[0])
    if args.scenario == "x" and axis == "px":
        table.metadata["threshold"] = x_attack_threshold(base.protocol, base.demand)
    elif args.scenario != "x" and axis == "py":
        finder = y_join_threshold if args.scenario == "y-join" else y_init_threshold
        found = finder(base)
        table.metadata["threshold"] = "none" if found is None else found

    previous = None
    for value in values:
        try:
            rel = game_relative_difference(args.scenario, inputs_at(value))
        except (ValueError, ZeroDivisionError) as exc:
            raise UsageError(f"{axis}={value}: {exc}") from None
        positive = rel > 0
        marker = int(previous is not None and positive != previous)
        table.add(value, rel, marker)
        previous = positive
    return table


# -- simulate / heatmap -----------------------------------------------------

def _sim_config(args) -> SimConfig:
    return SimConfig(
        protocol=_protocol(args),
        demand=_demand(args),
        p_x=args.px,
        runs=args.runs,
        base_seed=args.seed,
        recovery_fraction=args.recovery,
        max_blocks=args.max_blocks,
        instant_recovery=args.instant_recovery,
    )


_SIM_META = (
    "phi", "b_star", "s_star", "eps_ratio", "alpha", "px", "runs", "seed",
    "recovery", "max_blocks", "instant_recovery",
)


def cmd_simulate(args) -> OutputTable:
    axis = Axis(args.axis.replace("_", "-"))
    if axis is Axis.PX:
        default = (0.1, 0.5, 0.05)
    else:
        default = (0.01, 0.1, 0.01)
    values = grid(
        default[0] if args.start is None else args.start,
        default[1] if args.stop is None else args.stop,
        default[2] if args.step is None else args.step,
    )
    try:
        kinds = [parse_kind(text) for text in args.mechanisms.split(",")]
    except ValueError as exc:
        raise UsageError(str(exc)) from None

    table = OutputTable(
        "simulate", ("axis_value", "mechanism", "mean_excess", "ci_half_width", "truncated_runs")
    )
    table.metadata = {"axis": axis.value, "mechanisms": args.mechanisms} | _common_metadata(
        args, _SIM_META
    ) | {"prng": PRNG_NAME}
    for row in sweep(_sim_config(args), axis, values, kinds, workers=args.workers):
        s = row.summary
        table.add(row.axis_value, row.kind.label(), s.mean_excess, s.ci_half_width, s.truncated_runs)
        table.truncated_runs += s.truncated_runs
        table.total_runs += s.runs
    return table


def cmd_heatmap(args) -> OutputTable:
    px_values = linspace(args.px_from, args.px_to, args.px_steps)
    ratios = linspace(args.eps_from, args.eps_to, args.eps_steps)
    base = _sim_config(args)
    table = OutputTable("heatmap", ("p_x", "eps_ratio", "label"))
    table.metadata = {
        "q": args.q, "px_grid": f"{args.px_from}:{args.px_to}:{args.px_steps}",
        "eps_grid": f"{args.eps_from}:{args.eps_to}:{args.eps_steps}",
    } | _common_metadata(
        args, ("phi", "b_star", "s_star", "alpha", "runs", "seed", "recovery", "max_blocks")
    ) | {"prng": PRNG_NAME}
    for cell in heatmap_cells(px_values, ratios, args.q, base, args.workers):
        table.add(cell.p_x, cell.eps_ratio, cell.region.value)
        table.truncated_runs += cell.eip.truncated_runs + cell.mitigated.truncated_runs
        table.total_runs += cell.eip.runs + cell.mitigated.runs
    return table


# -- delay / bribe ----------------------------------------------------------

def cmd_delay(args) -> OutputTable:
    betas = grid(args.beta_from, args.beta_to, args.beta_step)
    if betas[0] < 1:
        raise UsageError("beta must be at least 1")
    table = OutputTable("delay", ("beta", "mechanism", "T"))
    table.metadata = {
        "phi": args.phi, "q": ",".join(fmt(q) for q in args.q),
        "beta_grid": f"{args.beta_from}:{args.beta_to}:{args.beta_step}",
    }
    for beta in betas:
        table.add(beta, "eip", t_eip(beta, args.phi))
        for q in args.q:
            table.add(beta, GeometricAvg(q).label(), t_mitigated(beta, args.phi, q))
    return table


def cmd_bribe(args) -> OutputTable:
    profitable, margin = bribe_profitable(args.gas, _protocol(args), _demand(args))
    table = OutputTable("bribe", ("gas", "margin", "profitable"))
    table.metadata = _common_metadata(args, ("phi", "b_star", "s_star", "eps_ratio"))
    table.add(args.gas, margin, profitable)
    return table


# -- parser -----------------------------------------------------------------

def _add_params(p: argparse.ArgumentParser, alpha: bool = True) -> None:
    p.add_argument("--phi", type=float, default=0.125, help="adjustment parameter (default 1/8)")
    p.add_argument("--b-star", type=float, default=1.0, help="target base fee")
    p.add_argument("--s-star", type=float, default=1.0, help="target block size")
    p.add_argument("--eps-ratio", type=float, default=0.04, help="tip over target base fee")
    if alpha:
        p.add_argument("--alpha", type=float, default=0.5, help="tip share kept by users")


def _add_grid(p: argparse.ArgumentParser) -> None:
    p.add_argument("--from", dest="start", type=float)
    p.add_argument("--to", dest="stop", type=float)
    p.add_argument("--step", type=float)


def _add_sim(p: argparse.ArgumentParser, runs: int) -> None:
    p.add_argument("--runs", type=int, default=runs)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--recovery", type=float, default=0.99, help="stop once b >= recovery * b*")
    p.add_argument("--max-blocks", type=int, default=10_000)
    p.add_argument("--workers", type=int, default=1, help="processes; output does not depend on it")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="basefee", description=__doc__.splitlines()[0])
    parser.add_argument("--out", help=f"write CSV here (relative paths resolve under ${OUTPUT_DIR_ENV})")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analytic", help="relative reward difference over a parameter grid")
    p.add_argument("--scenario", choices=("x", "y-join", "y-init"), default="x")
    p.add_argument("--axis", default="px", help="px, py, eps_ratio, alpha or delta")
    _add_grid(p)
    _add_params(p)
    p.add_argument("--px", type=float, default=0.3)
    p.add_argument("--py", type=float, default=0.18)
    p.add_argument("--py-ratio", type=float, help="on the px axis, set p_y = ratio * p_x")
    p.add_argument("--delta", type=float, default=0.2)
    p.set_defaults(func=cmd_analytic)

    p = sub.add_parser("simulate", help="Monte Carlo excess profit of the attack")
    p.add_argument("--axis", choices=("px", "eps-ratio", "eps_ratio"), default="px")
    _add_grid(p)
    p.add_argument("--mechanisms", default="eip,geo:0.25,geo:0.5,geo:0.75")
    _add_params(p)
    p.add_argument("--px", type=float, default=0.4)
    p.add_argument("--instant-recovery", action="store_true",
                   help="end runs when X's streak ends (closed-form assumption)")
    _add_sim(p, runs=10_000)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("heatmap", help="where the geometric mitigation removes the incentive")
    p.add_argument("--q", type=float, default=0.5)
    p.add_argument("--px-from", type=float, default=0.1)
    p.add_argument("--px-to", type=float, default=0.5)
    p.add_argument("--px-steps", type=int, default=10)
    p.add_argument("--eps-from", type=float, default=0.01)
    p.add_argument("--eps-to", type=float, default=0.1)
    p.add_argument("--eps-steps", type=int, default=10)
    _add_params(p)
    _add_sim(p, runs=2_000)
    p.set_defaults(func=cmd_heatmap, px=0.4, instant_recovery=False)

    p = sub.add_parser("delay", help="full blocks needed to raise the base fee beta-fold")
    p.add_argument("--beta-from", type=float, default=1.0)
    p.add_argument("--beta-to", type=float, default=100.0)
    p.add_argument("--beta-step", type=float, default=1.0)
    p.add_argument("--phi", type=float, default=0.125)
    p.add_argument("--q", type=float_list, default=[0.25, 0.5, 0.75])
    p.set_defaults(func=cmd_delay)

    p = sub.add_parser("bribe", help="whether a user bribe for an empty block pays")
    p.add_argument("--gas", type=float, default=1.0)
    _add_params(p, alpha=False)
    p.set_defaults(func=cmd_bribe, alpha=0.5)

    return parser


def _destination(path: str) -> str:
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not os.path.isabs(path):
        os.makedirs(base, exist_ok=True)
        return os.path.join(base, path)
    return path


def main(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    handler: Callable = args.func
    try:
        table = handler(args)
    except (UsageError, ValueError) as exc:
        print(f"basefee {args.command}: error: {exc}", file=stderr)
        return EXIT_USAGE

    text = table.to_csv()
    if args.out:
        with open(_destination(args.out), "w", newline="") as fh:
            fh.write(text)
    else:
        stdout.write(text)

    if table.truncated_runs:
        share = table.truncated_runs / table.total_runs
        print(
            f"warning: {table.truncated_runs} of {table.total_runs} runs "
            f"({share:.1%}) did not recover within max_blocks",
            file=stderr,
        )
        if share > TRUNCATION_LIMIT:
            return EXIT_TRUNCATED
    return 0


if __name__ == "__main__":
    sys.exit(main())
