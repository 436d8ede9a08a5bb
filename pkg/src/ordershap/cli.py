"""Command-line front end.

Builds a game from the ``--game`` spec, dispatches to exact or sampled
computation, and emits CSV or structured text.  Data goes to stdout and all
diagnostics (including the provenance block in CSV mode) to stderr.  Exit
statuses: 0 success, 2 configuration error, 3 oracle error, 4 a ``verify``
property failed.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass
from typing import Optional, Sequence

from . import sampling
from .axioms import run_axioms
from .bits import full_mask, iter_submasks_of_size
from .games import (
    Coalition,
    DEFAULT_EXACT_CAP,
    ExactLimitError,
    Game,
    GameConfigError,
    OracleError,
    build_game,
    coalition_from_mask_string,
    parse_game_spec,
    table_lines,
)
from .interactions import interaction, spectrum
from .setwise import b_significance, grabisch_index, shapley_taylor
from .shapley import shapley_order, shapley_value

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ORACLE = 3
EXIT_VERIFY_FAILED = 4


@dataclass
class Report:
    """Uniform tabular result: column names plus stringified rows."""

    fields: tuple[str, ...]
    rows: list[tuple[str, ...]]


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def emit(report: Report, fmt: str, out) -> None:
    """Write a report as CSV or structured text (trailing newline included)."""
    if fmt == "csv":
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(report.fields)
        writer.writerows(report.rows)
    else:
        for row in report.rows:
            for field, value in zip(report.fields, row):
                out.write(f"{field}: {value}\n")
            out.write("\n")


def _provenance_lines(args, game: Game) -> list[str]:
    lines = [
        f"command: {args.command}",
        f"game: {game.label}",
        f"mode: {args.mode}",
    ]
    if args.mode == "sampled":
        lines.append(f"samples: {args.samples}")
        lines.append(f"seed: {args.seed}")
    lines.append(f"evaluations: {game.eval_count}")
    return lines


def _parse_players(args, game: Game) -> list[tuple[int, int]]:
    if args.all_pairs:
        return [(i, j) for i in range(game.n) for j in range(i + 1, game.n)]
    if args.i is None or args.j is None:
        raise GameConfigError("provide --i and --j, or --all-pairs")
    for p in (args.i, args.j):
        if not 0 <= p < game.n:
            raise GameConfigError(f"player {p} outside 0..{game.n - 1}")
    if args.i == args.j:
        raise GameConfigError("--i and --j must differ")
    return [(args.i, args.j)]


def _parse_set(args, game: Game) -> Coalition:
    if not args.set:
        raise GameConfigError("this command needs --set MASKSTRING")
    return coalition_from_mask_string(args.set, game.n)


def _need_sampling_args(args) -> None:
    if args.samples is None:
        raise GameConfigError("--mode sampled requires --samples K")
    if args.samples < 2:
        raise GameConfigError("--samples must be at least 2")


def _estimate_cols(est: sampling.Estimate) -> tuple[str, ...]:
    return (_fmt(est.mean), _fmt(est.stderr), str(est.samples), str(est.seed))


_SAMPLED_SUFFIX = ("stderr", "samples", "seed")


def _cmd_shapley(args, game: Game) -> Report:
    players = [args.player] if args.player is not None else list(range(game.n))
    for p in players:
        if not 0 <= p < game.n:
            raise GameConfigError(f"player {p} outside 0..{game.n - 1}")
    if args.mode == "exact":
        return Report(
            ("player", "value"),
            [(str(i), _fmt(shapley_value(game, i))) for i in players],
        )
    _need_sampling_args(args)
    rows = []
    for i in players:
        est = sampling.estimate_shapley(game, i, args.samples, args.seed)
        rows.append((str(i),) + _estimate_cols(est))
    return Report(("player", "value") + _SAMPLED_SUFFIX, rows)


def _cmd_shapley_orders(args, game: Game) -> Report:
    if args.player is None:
        raise GameConfigError("shapley-orders needs --player I")
    if not 0 <= args.player < game.n:
        raise GameConfigError(f"player {args.player} outside 0..{game.n - 1}")
    ms = [args.m] if args.m is not None else list(range(game.n))
    if args.mode == "exact":
        return Report(
            ("player", "m", "value"),
            [
                (str(args.player), str(m), _fmt(shapley_order(game, args.player, m)))
                for m in ms
            ],
        )
    _need_sampling_args(args)
    rows = []
    for m in ms:
        est = sampling.estimate_shapley_order(
            game, args.player, m, args.samples, args.seed
        )
        rows.append((str(args.player), str(m)) + _estimate_cols(est))
    return Report(("player", "m", "value") + _SAMPLED_SUFFIX, rows)


def _cmd_interaction(args, game: Game) -> Report:
    pairs = _parse_players(args, game)
    if args.mode == "exact":
        return Report(
            ("i", "j", "value"),
            [(str(i), str(j), _fmt(interaction(game, i, j))) for i, j in pairs],
        )
    _need_sampling_args(args)
    rows = []
    for i, j in pairs:
        est = sampling.estimate_interaction(
            game, i, j, args.samples, args.seed, stratified=args.stratified
        )
        rows.append((str(i), str(j)) + _estimate_cols(est))
    return Report(("i", "j", "value") + _SAMPLED_SUFFIX, rows)


def _cmd_spectrum(args, game: Game, kind: str) -> Report:
    pairs = _parse_players(args, game)
    if args.mode == "exact":
        rows = []
        for i, j in pairs:
            spec = spectrum(game, i, j, kind)
            rows.extend(
                (f"{i}-{j}", str(m), _fmt(v)) for m, v in enumerate(spec.values)
            )
        return Report(("pair", "m", "value"), rows)
    _need_sampling_args(args)
    estimator = (
        sampling.estimate_interaction_order
        if kind == "raw"
        else sampling.estimate_purified_order
    )
    rows = []
    for i, j in pairs:
        for m in range(game.n - 1):
            est = estimator(game, i, j, m, args.samples, args.seed)
            rows.append((f"{i}-{j}", str(m)) + _estimate_cols(est))
    return Report(("pair", "m", "value") + _SAMPLED_SUFFIX, rows)


def _cmd_grabisch(args, game: Game) -> Report:
    if args.mode != "exact":
        raise GameConfigError("grabisch supports --mode exact only")
    S = _parse_set(args, game)
    return Report(("set", "value"), [(args.set, _fmt(grabisch_index(game, S)))])


def _cmd_significance(args, game: Game) -> Report:
    if args.mode != "exact":
        raise GameConfigError("significance supports --mode exact only")
    S = _parse_set(args, game)
    report = b_significance(game, S)
    return Report(
        ("set", "b", "b_prime"),
        [(args.set, _fmt(report.b), _fmt(report.b_prime))],
    )


def _cmd_taylor(args, game: Game) -> Report:
    if args.k is None:
        raise GameConfigError("taylor needs --k K")
    if not 1 <= args.k <= game.n:
        raise GameConfigError(f"--k must be in 1..{game.n}")
    if args.set:
        sets = [coalition_from_mask_string(args.set, game.n)]
        if not 1 <= sets[0].size() <= args.k:
            raise GameConfigError(f"--set must have size 1..{args.k}")
    else:
        sets = [
            Coalition(smask, game.n)
            for size in range(1, args.k + 1)
            for smask in iter_submasks_of_size(full_mask(game.n), size)
        ]
    if args.mode == "exact":
        return Report(
            ("set", "k", "value"),
            [
                (S.to_mask_string(), str(args.k), _fmt(shapley_taylor(game, S, args.k)))
                for S in sets
            ],
        )
    _need_sampling_args(args)
    rows = []
    for S in sets:
        est = sampling.estimate_taylor(game, S, args.k, args.samples, args.seed)
        rows.append((S.to_mask_string(), str(args.k)) + _estimate_cols(est))
    return Report(("set", "k", "value") + _SAMPLED_SUFFIX, rows)


def _cmd_eval(args, game: Game, out) -> Optional[Report]:
    if args.mode != "exact":
        raise GameConfigError("eval supports --mode exact only")
    if args.all:
        # Table-file format so the export round-trips through --game table:
        for line in table_lines(game):
            out.write(line + "\n")
        return None
    S = _parse_set(args, game)
    return Report(("set", "value"), [(args.set, _fmt(game.evaluate(S)))])


def _cmd_verify(args, game: Game) -> tuple[Report, bool]:
    if args.mode != "exact":
        raise GameConfigError("verify supports --mode exact only")
    report = run_axioms(game, tolerance=args.tolerance, scope=args.scope or None)
    rows = [
        (
            c.name,
            _fmt(c.deviation),
            _fmt(c.tolerance),
            "true" if c.passed else "false",
            c.instance,
        )
        for c in report.checks
    ]
    return Report(("property", "deviation", "tolerance", "pass", "instance"), rows), (
        report.passed
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ordershap",
        description="Game-theoretic attribution: Shapley values, interaction "
        "spectra, set-wise indices, and a property verifier.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--game",
        required=True,
        help="additive:w1,w2,... | majority:n,t | pattern:n,mask,c | "
        "random:n,seed | table:PATH | exec:n,COMMAND",
    )
    common.add_argument("--mode", choices=("exact", "sampled"), default="exact")
    common.add_argument("--samples", type=int, help="sample count for --mode sampled")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=("csv", "text"), default="text")
    common.add_argument(
        "--exact-cap",
        type=int,
        default=DEFAULT_EXACT_CAP,
        help="override the exact-enumeration player cap",
    )

    p = sub.add_parser("shapley", parents=[common], help="classic Shapley values")
    p.add_argument("--player", type=int)

    p = sub.add_parser(
        "shapley-orders", parents=[common], help="order-m Shapley values"
    )
    p.add_argument("--player", type=int)
    p.add_argument("--m", type=int)

    for name, help_text in (
        ("interaction", "overall pairwise interaction"),
        ("spectrum", "raw interaction spectrum I^(m)"),
        ("purified", "purified interaction spectrum J^(m)"),
    ):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.add_argument("--i", type=int)
        p.add_argument("--j", type=int)
        p.add_argument("--all-pairs", action="store_true")
        if name == "interaction":
            p.add_argument(
                "--stratified",
                action=argparse.BooleanOptionalAction,
                default=True,
                help="equal samples per order (default) vs plain mixture",
            )

    p = sub.add_parser("grabisch", parents=[common], help="coalition interaction index")
    p.add_argument("--set", help="coalition mask string")

    p = sub.add_parser(
        "significance", parents=[common], help="signed/absolute significance of a set"
    )
    p.add_argument("--set", help="coalition mask string")

    p = sub.add_parser("taylor", parents=[common], help="cutoff-k attribution")
    p.add_argument("--k", type=int)
    p.add_argument("--set", help="coalition mask string (default: all sets up to k)")

    p = sub.add_parser("verify", parents=[common], help="run the property suite")
    p.add_argument("--tolerance", type=float, default=1e-9)
    p.add_argument("--scope", nargs="*", help="property names or prefixes")

    p = sub.add_parser("eval", parents=[common], help="evaluate coalitions")
    p.add_argument("--set", help="coalition mask string")
    p.add_argument("--all", action="store_true", help="export the full table as CSV")

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    out, err = sys.stdout, sys.stderr
    try:
        spec = parse_game_spec(args.game)
        game = build_game(spec, exact_cap=args.exact_cap)
    except GameConfigError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_CONFIG

    status = EXIT_OK
    try:
        if args.command == "verify":
            report, passed = _cmd_verify(args, game)
            if not passed:
                status = EXIT_VERIFY_FAILED
        elif args.command == "shapley":
            report = _cmd_shapley(args, game)
        elif args.command == "shapley-orders":
            report = _cmd_shapley_orders(args, game)
        elif args.command == "interaction":
            report = _cmd_interaction(args, game)
        elif args.command == "spectrum":
            report = _cmd_spectrum(args, game, "raw")
        elif args.command == "purified":
            report = _cmd_spectrum(args, game, "purified")
        elif args.command == "grabisch":
            report = _cmd_grabisch(args, game)
        elif args.command == "significance":
            report = _cmd_significance(args, game)
        elif args.command == "taylor":
            report = _cmd_taylor(args, game)
        else:
            report = _cmd_eval(args, game, out)

        provenance = _provenance_lines(args, game)
        if report is None:
            # eval --all keeps stdout as a pure table file; provenance is a
            # diagnostic.
            for line in provenance:
                err.write(line + "\n")
        elif args.format == "text":
            for line in provenance:
                out.write(line + "\n")
            out.write("\n")
            emit(report, "text", out)
        else:
            emit(report, "csv", out)
            for line in provenance:
                err.write(line + "\n")
    except OracleError as exc:
        err.write(f"oracle error: {exc}\n")
        return EXIT_ORACLE
    except (GameConfigError, ExactLimitError, ValueError) as exc:
        err.write(f"error: {exc}\n")
        return EXIT_CONFIG
    finally:
        game.close()
    return status


if __name__ == "__main__":
    sys.exit(main())
