"""Command-line front end.

Exit codes: 0 when the analysis ran (the verdict is in the report), 2 for
invalid input, 3 when an enumeration would exceed the budget.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Iterable, Sequence

from . import budget as _budget
from . import verify
from .analysis import (
    Bounds,
    ClassificationRow,
    Diamond,
    balance_report,
    check_diamond,
    classify,
    closing_preimage_build,
    diamond_search,
    extension_property_check,
    falsify_expansivity,
    is_permutive,
    myhill_collision_search,
    non_openness_evidence,
    orphan_search,
    over_mean_block,
    permutive_preimage_build,
    right_closing_at,
    right_closing_min_N,
)
from .analysis.classify import text_header
from .analysis.verdict import Verdict
from .dynamics import iterate, orbit, trajectory_set
from .errors import BudgetExceeded, InconsistencyError, TreecaError
from .rulespec import FAMILIES, LocalRule, builtin, count_rules, parse_rule, rule_from_number
from .treecore import Pattern, parse_letters, parse_pattern

EXIT_OK, EXIT_INVALID, EXIT_BUDGET = 0, 2, 3


class InputError(Exception):
    pass


# -- argument helpers -------------------------------------------------------------


def _positions(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad position list {text!r}")


def _common(p: argparse.ArgumentParser):
    p.add_argument("--budget", type=int, default=None,
                   help="max evaluated patterns per enumeration (default: $TREECA_BUDGET or 2^26)")
    p.add_argument("--format", choices=("text", "records"), default="text")


def _rule_args(p: argparse.ArgumentParser):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--rule", metavar="FILE", help="rule file")
    src.add_argument("--builtin", metavar="NAME", help=f"built-in family: {', '.join(FAMILIES)}")
    src.add_argument("--number", type=int, help="rule by table number")
    p.add_argument("--arity", type=int, default=2)
    p.add_argument("--alphabet", type=int, default=2)
    p.add_argument("--radius", type=int, default=1)
    p.add_argument("--positions", type=_positions, default=None,
                   help="neighborhood positions for sum-mod (comma separated)")
    _common(p)


def load_rule(args) -> LocalRule:
    if args.rule:
        try:
            with open(args.rule, encoding="utf-8") as fh:
                return parse_rule(fh.read())
        except OSError as e:
            raise InputError(f"cannot read rule file: {e}")
    if args.builtin:
        return builtin(args.builtin, args.arity, args.alphabet, args.radius, args.positions)
    total = count_rules(args.arity, args.alphabet, args.radius)
    if not 0 <= args.number < total:
        raise InputError(f"rule number must be in 0..{total - 1}")
    return rule_from_number(args.number, args.arity, args.alphabet, args.radius)


def _pattern(rule: LocalRule, text: str) -> Pattern:
    return parse_pattern(text, rule.geometry, rule.alphabet_size)


def _emit(args, lines: Iterable[str]):
    for line in lines:
        print(line)


def _verdict(args, v: Verdict, head: Sequence[str] = ()):
    if args.format == "records":
        print(" ".join(list(head) + [v.record()]))
    else:
        _emit(args, v.lines())


def _head(rule: LocalRule) -> list[str]:
    return [f"rule={rule.number}"]


# -- subcommands ------------------------------------------------------------------


def cmd_apply(args, rule):
    out = iterate(rule, _pattern(rule, args.pattern), args.steps)
    print(f"image={out}" if args.format == "records" else out)


def cmd_orbit(args, rule):
    for t, p in enumerate(orbit(rule, _pattern(rule, args.pattern), args.steps)):
        print(f"t={t} pattern={p}" if args.format == "records" else f"{t}: {p}")


def cmd_trajectory(args, rule):
    stats = trajectory_set(rule, args.n, args.t, args.budget, args.method)
    for line in stats.lines():
        print(f"n={args.n} {line}" if args.format == "records" else line)


def cmd_check_permutive(args, rule):
    _verdict(args, is_permutive(rule), _head(rule))


def cmd_find_orphan(args, rule):
    _verdict(args, orphan_search(rule, args.n_max, args.budget), _head(rule))


def cmd_balance(args, rule):
    report = balance_report(rule, args.level, args.budget)
    if args.format == "records":
        print(" ".join(_head(rule) + [report.record()]))
    else:
        _emit(args, report.lines())


def cmd_find_diamond(args, rule):
    if args.method == "direct":
        v = diamond_search(rule, args.n, strict=not args.relaxed, budget=args.budget)
    else:
        if args.q:
            q = _pattern(rule, args.q)
        else:
            q = over_mean_block(rule, args.level_max, args.budget)
            if q is None:
                raise InputError(f"no over-mean block up to level {args.level_max}; the rule is balanced there")
        v = myhill_collision_search(rule, q, args.m_max, args.budget)
    _verdict(args, v, _head(rule))
    if v.refuted and args.format == "text":
        d: Diamond = v.payload
        print(f"size: {d.size}")


def cmd_verify_diamond(args, rule):
    boundary = _pattern(rule, args.boundary)
    first, second = _pattern(rule, args.first), _pattern(rule, args.second)
    if first.depth != second.depth:
        raise InputError("both blocks must have the same depth")
    d = Diamond(boundary, first.depth, first, second)
    problems = check_diamond(rule, d, strict=not args.relaxed)
    slow = verify.verify_diamond(rule, boundary, first, second) if first.depth > rule.radius else False
    if not problems and not slow:
        raise InconsistencyError("fast and slow diamond checks disagree")
    valid = not problems
    if args.format == "records":
        print(" ".join(_head(rule) + [f"valid={'true' if valid else 'false'}", f"size={d.size}"]))
    else:
        print(f"valid: {'yes' if valid else 'no'}")
        print(f"size: {d.size}")
        for msg in problems:
            print(f"problem: {msg}")


def cmd_check_right_closing(args, rule):
    if args.N is not None:
        v = right_closing_at(rule, args.N, args.budget)
    else:
        v = right_closing_min_N(rule, args.N_max, args.budget)
    _verdict(args, v, _head(rule))


def cmd_check_extension_property(args, rule):
    _verdict(args, extension_property_check(rule, args.N, args.budget), _head(rule))


def cmd_build_preimage(args, rule):
    target = _pattern(rule, args.target)
    if args.mode == "permutive":
        if args.filler is None:
            raise InputError("--filler is required in permutive mode")
        g = permutive_preimage_build(rule, target, parse_letters(args.filler, rule.alphabet_size))
    else:
        if args.letter is None:
            raise InputError("--letter is required in closing mode")
        g = closing_preimage_build(rule, args.letter, target, args.N, args.budget)
    print(f"preimage={g} depth={g.depth}" if args.format == "records" else g)


def cmd_falsify_expansivity(args, rule):
    _verdict(args, falsify_expansivity(rule, args.N, args.T, args.budget), _head(rule))


def cmd_openness_evidence(args, rule):
    _verdict(args, non_openness_evidence(rule, args.letter, args.m, args.m_prime, args.budget), _head(rule))


# -- scan -------------------------------------------------------------------------


def _classify_number(job) -> str:
    number, arity, alphabet, radius, bounds = job
    return classify(rule_from_number(number, arity, alphabet, radius), bounds).record()


def _read_done(path: str) -> dict[int, str]:
    """Complete rows already in ``path``; a truncated last line is dropped."""
    done: dict[int, str] = {}
    if not os.path.exists(path):
        return done
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    for line in text.splitlines(keepends=True):
        if not line.endswith("\n"):
            break
        try:
            row = ClassificationRow.from_record(line.strip())
        except (KeyError, ValueError):
            break
        done[row.rule] = line.strip()
    return done


def cmd_scan(args):
    total = count_rules(args.arity, args.alphabet, args.radius)
    start, stop = args.start, total if args.stop is None else min(args.stop, total)
    if not 0 <= start <= stop:
        raise InputError("need 0 <= start <= stop")
    bounds = Bounds(args.orphan_n_max, args.balance_levels, args.diamond_n,
                    args.right_closing_N_max, args.extension_N_max, args.budget)
    done: dict[int, str] = {}
    if args.output and args.resume:
        done = _read_done(args.output)
    todo = [n for n in range(start, stop) if n not in done]
    _budget.require(len(todo), args.budget, "rule scan")
    out = None
    if args.output:
        # rewrite the kept rows so a truncated tail disappears before appending
        kept = [done[n] for n in sorted(done)]
        out = open(args.output, "w", encoding="utf-8")
        out.writelines(line + "\n" for line in kept)
        out.flush()

    def show(record: str):
        if args.format == "records":
            print(record)
        else:
            print(ClassificationRow.from_record(record).text())

    if args.format == "text":
        print(text_header())
    jobs = [(n, args.arity, args.alphabet, args.radius, bounds) for n in todo]
    pool = ProcessPoolExecutor(max_workers=args.workers) if args.workers > 1 else None
    try:
        if pool:
            results = pool.map(_classify_number, jobs, chunksize=max(1, len(jobs) // (8 * args.workers)))
        else:
            results = map(_classify_number, jobs)
        # map keeps job order, so fresh rows arrive in rule-key order
        for n in range(start, stop):
            if n in done:
                show(done[n])
                continue
            record = next(results)
            if out:
                out.write(record + "\n")
                out.flush()
            show(record)
    finally:
        if out:
            out.close()
        if pool:
            pool.shutdown(cancel_futures=True)


# -- parser -----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="treeca", description="Cellular automata on k-ary tree shifts.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("apply", help="apply the rule to a block")
    _rule_args(p)
    p.add_argument("--pattern", required=True)
    p.add_argument("--steps", type=int, default=1)
    p.set_defaults(func=cmd_apply)

    p = sub.add_parser("orbit", help="print a block and its iterates")
    _rule_args(p)
    p.add_argument("--pattern", required=True)
    p.add_argument("--steps", type=int, default=1)
    p.set_defaults(func=cmd_orbit)

    p = sub.add_parser("trajectory", help="count observed trajectories and entropy estimates")
    _rule_args(p)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--t", type=int, default=4)
    p.add_argument("--method", choices=("columns", "bases"), default="columns")
    p.set_defaults(func=cmd_trajectory)

    p = sub.add_parser("check-permutive")
    _rule_args(p)
    p.set_defaults(func=cmd_check_permutive)

    p = sub.add_parser("find-orphan")
    _rule_args(p)
    p.add_argument("--n-max", type=int, default=3)
    p.set_defaults(func=cmd_find_orphan)

    p = sub.add_parser("balance")
    _rule_args(p)
    p.add_argument("--level", type=int, default=1)
    p.set_defaults(func=cmd_balance)

    p = sub.add_parser("find-diamond")
    _rule_args(p)
    p.add_argument("--n", type=int, default=5)
    p.add_argument("--relaxed", action="store_true", help="allow sizes up to 2r+2")
    p.add_argument("--method", choices=("direct", "collision"), default="direct")
    p.add_argument("--q", default=None, help="over-mean block for the collision method")
    p.add_argument("--level-max", type=int, default=2, help="levels searched for an over-mean block")
    p.add_argument("--m-max", type=int, default=2)
    p.set_defaults(func=cmd_find_diamond)

    p = sub.add_parser("verify-diamond")
    _rule_args(p)
    p.add_argument("--boundary", required=True)
    p.add_argument("--first", required=True)
    p.add_argument("--second", required=True)
    p.add_argument("--relaxed", action="store_true")
    p.set_defaults(func=cmd_verify_diamond)

    p = sub.add_parser("check-right-closing")
    _rule_args(p)
    p.add_argument("--N", type=int, default=None, help="check this N only")
    p.add_argument("--N-max", type=int, default=3)
    p.set_defaults(func=cmd_check_right_closing)

    p = sub.add_parser("check-extension-property")
    _rule_args(p)
    p.add_argument("--N", type=int, default=1)
    p.set_defaults(func=cmd_check_extension_property)

    p = sub.add_parser("build-preimage")
    _rule_args(p)
    p.add_argument("--mode", choices=("permutive", "closing"), default="permutive")
    p.add_argument("--target", required=True)
    p.add_argument("--filler", default=None, help="letters for the r levels below the target")
    p.add_argument("--letter", type=int, default=None, help="root letter (closing mode)")
    p.add_argument("--N", type=int, default=1)
    p.set_defaults(func=cmd_build_preimage)

    p = sub.add_parser("falsify-expansivity")
    _rule_args(p)
    p.add_argument("--N", type=int, default=1)
    p.add_argument("--T", type=int, default=2)
    p.set_defaults(func=cmd_falsify_expansivity)

    p = sub.add_parser("openness-evidence")
    _rule_args(p)
    p.add_argument("--letter", type=int, default=0)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--m-prime", type=int, default=2)
    p.set_defaults(func=cmd_openness_evidence)

    p = sub.add_parser("scan", help="classify every rule of a rule space")
    p.add_argument("--arity", type=int, default=2)
    p.add_argument("--alphabet", type=int, default=2)
    p.add_argument("--radius", type=int, default=1)
    p.add_argument("--start", type=int, default=0)
    p.add_argument("--stop", type=int, default=None)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--output", default=None, help="append rows here as they finish")
    p.add_argument("--resume", action="store_true", help="skip rules already in --output")
    p.add_argument("--orphan-n-max", type=int, default=3)
    p.add_argument("--balance-levels", type=int, default=2)
    p.add_argument("--diamond-n", type=int, default=None)
    p.add_argument("--right-closing-N-max", type=int, default=3)
    p.add_argument("--extension-N-max", type=int, default=2)
    _common(p)
    p.set_defaults(func=None)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_INVALID if e.code else EXIT_OK
    try:
        if args.budget is not None and args.budget < 1:
            raise InputError("--budget must be positive")
        if args.command == "scan":
            if args.workers < 1:
                raise InputError("--workers must be >= 1")
            if args.resume and not args.output:
                raise InputError("--resume needs --output")
            cmd_scan(args)
        else:
            args.func(args, load_rule(args))
    except BudgetExceeded as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_BUDGET
    except InconsistencyError:
        raise
    except (InputError, TreecaError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
