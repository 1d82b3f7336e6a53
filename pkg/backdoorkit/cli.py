"""
Command Line
============

``backdoor-tool`` subcommands: recognize, solve, detect, evaluate, count,
tree and generate. Every command prints one JSON run report on stdout
(``generate`` without ``--output`` prints DIMACS instead); diagnostics go to
stderr and optionally a log file.

Exit codes: 0 success / member / found, 1 non-member / none within k /
rejected, 2 input or usage error, 3 budget exceeded.
"""

import argparse
import hashlib
import json
import logging
import sys
import time
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Any, Callable, Dict, FrozenSet, List, Optional, Sequence, Tuple

from backdoorkit import __version__, evaluate, genbench
from backdoorkit.detect import (
    ALGORITHMS, BackdoorKind, detect, supported_algorithms, verify_backdoor,
)
from backdoorkit.errors import BackdoorKitError, BudgetExceeded
from backdoorkit.formula import (
    CnfFormula, SatResult, Weighting, brute_force_count, brute_force_sat,
    parse_dimacs, parse_weights, write_dimacs,
)
from backdoorkit.islands import (
    BaseClass, Island, find_renaming, is_member, subsolver_run,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_ERROR = 2
EXIT_BUDGET = 3

LOG_FORMAT = '%(asctime)s - %(levelname)s - %(message)s'

CONSTRUCTIONS = (
    "or-gadget", "hs-weak", "rhorn-weak", "strong-rhorn", "tree-family",
    "pclique", "lemma-chain", "random",
)


def setup_logging(verbose: int = 0, log_file: Optional[str] = None) -> None:
    level = logging.WARNING if verbose <= 0 else logging.INFO if verbose == 1 else logging.DEBUG
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if log_file:
        handlers.append(logging.FileHandler(log_file))
    logging.basicConfig(level=level, format=LOG_FORMAT, handlers=handlers, force=True)


@dataclass
class RunReport:
    command: List[str]
    input_digest: Optional[str]
    result: Dict[str, Any]
    algorithm: Optional[str]
    wall_time_ms: float
    seed: Optional[int]

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2)


@dataclass
class Input:
    formula: CnfFormula
    digest: str


# Argument helpers

def _var_list(text: str) -> FrozenSet[int]:
    try:
        values = frozenset(int(tok) for tok in text.replace(" ", "").split(",") if tok)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected comma-separated variable ids, got {text!r}") from None
    if any(v < 1 for v in values):
        raise argparse.ArgumentTypeError(f"variable ids start at 1: {text!r}")
    return values


def _set_family(text: str) -> List[FrozenSet[int]]:
    return [_var_list(part) for part in text.split(";") if part.strip()]


def _edge_list(text: str) -> List[Tuple[int, int]]:
    edges = []
    for token in (t for t in text.replace(" ", "").split(",") if t):
        try:
            u, v = (int(x) for x in token.split("-"))
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected edges like 1-3, got {token!r}") from None
        edges.append((u, v))
    return edges


def _base_class(token: str) -> BaseClass:
    try:
        return BaseClass.parse(token)
    except BackdoorKitError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def _read_input(path: str, strip_tautologies: bool) -> Input:
    if path == "-":
        data = sys.stdin.buffer.read()
    else:
        with open(path, "rb") as handle:
            data = handle.read()
    formula = parse_dimacs(data, strip_tautologies=strip_tautologies)
    logger.info(f"Read {len(formula)} clauses over {len(formula.variables)} variables from {path}")
    return Input(formula, hashlib.sha256(data).hexdigest())


def _assignment_json(tau: Optional[Dict[int, int]]) -> Optional[Dict[str, int]]:
    if tau is None:
        return None
    return {str(var): tau[var] for var in sorted(tau)}


def _model_json(result: SatResult) -> Optional[Dict[str, int]]:
    return _assignment_json(result.model)


def _fraction_json(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"


def _weighting(args: argparse.Namespace) -> Weighting:
    if not args.weights:
        return Weighting.uniform()
    with open(args.weights, "rb") as handle:
        return parse_weights(handle.read())


# Commands: each returns (payload, algorithm, exit code)

Outcome = Tuple[Dict[str, Any], Optional[str], int]


def cmd_recognize(args: argparse.Namespace, source: Input) -> Outcome:
    base: BaseClass = args.base
    member = is_member(base, source.formula)
    payload: Dict[str, Any] = {"class": base.token, "member": member}
    if base.island is Island.RHORN:
        renaming = find_renaming(source.formula)
        payload["renaming"] = None if renaming is None else sorted(renaming)
    if base.is_subsolver:
        trace = subsolver_run(base.island, source.formula)
        payload["trace"] = {
            "outcome": trace.outcome.value,
            "steps": [{"rule": s.rule, "literal": s.literal} for s in trace.steps],
        }
    return payload, None, EXIT_OK if member else EXIT_NEGATIVE


def cmd_solve(args: argparse.Namespace, source: Input) -> Outcome:
    formula = source.formula
    if args.base is None:
        result = brute_force_sat(formula)
        payload = {"satisfiable": result.satisfiable, "model": _model_json(result)}
        return payload, "bruteforce", EXIT_OK

    base: BaseClass = args.base
    backdoor = args.backdoor
    algorithm = "given"
    if args.weak:
        if backdoor is None:
            found = detect(formula, BackdoorKind.WEAK, base, len(formula.variables),
                           force=args.force, progress=args.progress, jobs=args.jobs)
            if found is None:
                return {"witnessed": False, "backdoor": None}, "auto", EXIT_NEGATIVE
            backdoor, algorithm = found.variables, found.algorithm
        weak = evaluate.sat_via_weak(formula, backdoor, base, jobs=args.jobs)
        payload = {"witnessed": weak is not None, "backdoor": sorted(backdoor)}
        if weak is not None:
            payload.update(satisfiable=True, model=_model_json(weak))
        return payload, algorithm, EXIT_OK if weak is not None else EXIT_NEGATIVE

    if backdoor is None:
        found = detect(formula, BackdoorKind.STRONG, base, len(formula.variables),
                       force=args.force, progress=args.progress, jobs=args.jobs)
        if found is None:
            return {"satisfiable": None, "backdoor": None}, "auto", EXIT_NEGATIVE
        backdoor, algorithm = found.variables, found.algorithm
    result = evaluate.sat_via_strong(formula, backdoor, base, jobs=args.jobs)
    payload = {"satisfiable": result.satisfiable, "model": _model_json(result),
               "backdoor": sorted(backdoor)}
    return payload, algorithm, EXIT_OK


def cmd_detect(args: argparse.Namespace, source: Input) -> Outcome:
    kind = BackdoorKind(args.kind)
    base: BaseClass = args.base
    found = detect(source.formula, kind, base, args.k, algorithm=args.algorithm,
                   force=args.force, progress=args.progress, jobs=args.jobs)
    if found:
        algorithm = found.algorithm
    elif args.algorithm == "auto":
        algorithm = supported_algorithms(kind, base)[0]
    else:
        algorithm = args.algorithm
    payload = {
        "kind": kind.value,
        "class": base.token,
        "k": args.k,
        "found": found is not None,
        "backdoor": found.to_dict() if found else None,
    }
    return payload, algorithm, EXIT_OK if found else EXIT_NEGATIVE


def cmd_evaluate(args: argparse.Namespace, source: Input) -> Outcome:
    formula, base = source.formula, args.base
    if args.tree is not None:
        text = args.tree
        if text.startswith("@"):
            with open(text[1:], "r", encoding="utf-8") as handle:
                text = handle.read()
        tree = evaluate.parse_tree(text)
        verdict = evaluate.validate_tree(formula, tree, base)
        payload: Dict[str, Any] = {
            "accepted": verdict.accepted,
            "leaves": evaluate.leaf_count(tree),
            "reason": verdict.reason or None,
        }
        if verdict:
            result = evaluate.sat_via_tree(formula, tree, base)
            payload.update(satisfiable=result.satisfiable, model=_model_json(result))
        return payload, "tree", EXIT_OK if verdict else EXIT_NEGATIVE

    kind = BackdoorKind(args.kind)
    backdoor = args.backdoor if args.backdoor is not None else frozenset()
    verdict = verify_backdoor(formula, backdoor, kind, base, jobs=args.jobs)
    payload = {
        "kind": kind.value,
        "backdoor": sorted(backdoor),
        "accepted": verdict.accepted,
        "witness": _assignment_json(verdict.certificate),
        "counterexample": _assignment_json(verdict.counterexample),
        "reason": verdict.reason or None,
    }
    if verdict and kind is BackdoorKind.STRONG:
        result = evaluate.sat_via_strong(formula, backdoor, base, jobs=args.jobs)
        payload.update(satisfiable=result.satisfiable, model=_model_json(result))
    return payload, "verify", EXIT_OK if verdict else EXIT_NEGATIVE


def cmd_count(args: argparse.Namespace, source: Input) -> Outcome:
    formula = source.formula
    weighting = _weighting(args)
    payload: Dict[str, Any] = {"variables": len(formula.variables)}
    if args.base is None:
        value, algorithm = brute_force_count(formula, weighting), "bruteforce"
        payload["backdoor"] = None
    else:
        backdoor = args.backdoor
        algorithm = "given"
        if backdoor is None:
            found = detect(formula, BackdoorKind.STRONG, args.base,
                           len(formula.variables), force=args.force,
                           progress=args.progress, jobs=args.jobs)
            if found is None:
                payload.update(count=None, backdoor=None)
                return payload, "auto", EXIT_NEGATIVE
            backdoor, algorithm = found.variables, found.algorithm
        value = evaluate.count_via_strong(formula, backdoor, args.base, weighting, jobs=args.jobs)
        payload["backdoor"] = sorted(backdoor)
    payload["count"] = _fraction_json(value)
    if not args.weights:
        payload["models"] = int(value * 2 ** len(formula.variables))
    return payload, algorithm, EXIT_OK


def cmd_tree(args: argparse.Namespace, source: Input) -> Outcome:
    if args.backdoor is not None:
        tree = evaluate.tree_from_backdoor(args.backdoor)
        algorithm = "complete"
    else:
        tree = evaluate.min_leaf_tree(source.formula, args.base, args.max_leaves,
                                      candidates=args.candidates, progress=args.progress)
        algorithm = "min-leaf"
    if tree is None:
        return {"tree": None, "leaves": None}, algorithm, EXIT_NEGATIVE
    verdict = evaluate.validate_tree(source.formula, tree, args.base)
    payload = {"tree": evaluate.format_tree(tree), "leaves": evaluate.leaf_count(tree),
               "valid": verdict.accepted}
    return payload, algorithm, EXIT_OK if verdict else EXIT_NEGATIVE


def _generate(args: argparse.Namespace) -> Tuple[CnfFormula, Dict[str, Any]]:
    name = args.construction
    described: Dict[str, Any] = {"construction": name}
    if name == "or-gadget":
        formula = genbench.or_gadget(args.base, args.external)
        described.update({"class": args.base.token, "external": sorted(args.external)})
    elif name in ("hs-weak", "rhorn-weak", "strong-rhorn"):
        system = genbench.SetSystem.of(args.sets, args.k)
        if name == "hs-weak":
            formula = genbench.hs_weak_instance(system, args.base)
            described["class"] = args.base.token
        elif name == "rhorn-weak":
            formula = genbench.rhorn_weak_instance(system)
        else:
            formula = genbench.strong_rhorn_instance(system)
        described.update({"sets": [sorted(s) for s in system.sets], "k": args.k,
                          "external": sorted(system.universe)})
    elif name == "tree-family":
        formula = genbench.backdoor_tree_family(args.n)
        described.update({"n": args.n, "y_vars": sorted(genbench.family_y_vars(args.n))})
    elif name == "pclique":
        graph = genbench.PartiteGraph.of(args.sets, args.edges)
        formula = genbench.pclique_instance(graph)
        described.update({"parts": [sorted(p) for p in graph.parts],
                          "edges": sorted(sorted(e) for e in graph.edges)})
    elif name == "lemma-chain":
        source = _read_input(args.input, args.strip_tautologies)
        f2, f2star = genbench.lemma_2sat_chain(source.formula, args.k)
        formula = f2star if args.star else f2
        described.update({"k": args.k, "formula": "f2star" if args.star else "f2",
                          "input_digest": source.digest})
    else:
        formula = genbench.random_cnf(args.n, args.m, args.width, args.seed)
        described.update({"n": args.n, "m": args.m, "width": args.width, "seed": args.seed})
    return formula, described


# Parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="backdoor-tool",
        description="Backdoor sets for SAT: detect, evaluate, count, generate.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="count", default=0,
                        help="-v for INFO, -vv for DEBUG")
    common.add_argument("--log-file", help="also write the log to this file")
    common.add_argument("--jobs", type=int, default=1, help="worker processes (0 = all cores)")
    common.add_argument("--force", action="store_true", help="ignore the brute-force budget")
    common.add_argument("--seed", type=int, help="random seed, echoed in the report")
    common.add_argument("--progress", dest="progress", action="store_true", default=None,
                        help="show progress bars (default: only when stderr is a terminal)")
    common.add_argument("--no-progress", dest="progress", action="store_false", default=None,
                        help="hide progress bars")
    common.add_argument("--strip-tautologies", action="store_true",
                        help="drop tautological clauses instead of rejecting the input")

    sub = parser.add_subparsers(dest="command", required=True)

    def with_input(name: str, help_text: str) -> argparse.ArgumentParser:
        cmd = sub.add_parser(name, parents=[common], help=help_text)
        cmd.add_argument("input", help="DIMACS CNF file, '-' for stdin")
        return cmd

    recognize = with_input("recognize", "test membership in a base class")
    recognize.add_argument("--class", dest="base", type=_base_class, required=True)

    solve = with_input("solve", "decide satisfiability, through a backdoor when a class is given")
    solve.add_argument("--class", dest="base", type=_base_class)
    solve.add_argument("--backdoor", type=_var_list, help="comma-separated backdoor variables")
    solve.add_argument("--weak", action="store_true", help="treat the backdoor as weak")

    find = with_input("detect", "find a minimum backdoor set of size at most k")
    find.add_argument("--kind", choices=[k.value for k in BackdoorKind], required=True)
    find.add_argument("--class", dest="base", type=_base_class, required=True)
    find.add_argument("-k", type=int, required=True)
    find.add_argument("--algorithm", choices=("auto",) + ALGORITHMS, default="auto")

    check = with_input("evaluate", "verify a backdoor set or a backdoor tree")
    check.add_argument("--class", dest="base", type=_base_class, required=True)
    check.add_argument("--kind", choices=[k.value for k in BackdoorKind], default="strong")
    check.add_argument("--backdoor", type=_var_list)
    check.add_argument("--tree", help="serialized tree, or @path to read it from a file")

    count = with_input("count", "weighted model count")
    count.add_argument("--class", dest="base", type=_base_class, help="clu or forest")
    count.add_argument("--backdoor", type=_var_list)
    count.add_argument("--weights", help="weights file with 'w <var> <num>/<den>' lines")

    tree = with_input("tree", "backdoor tree with the fewest leaves")
    tree.add_argument("--class", dest="base", type=_base_class, required=True)
    tree.add_argument("--max-leaves", type=int)
    tree.add_argument("--candidates", type=_var_list, help="restrict branching to these variables")
    tree.add_argument("--backdoor", type=_var_list,
                      help="emit the complete tree over this set instead")

    gen = sub.add_parser("generate", parents=[common], help="write a benchmark formula")
    gen.add_argument("construction", choices=CONSTRUCTIONS)
    gen.add_argument("--class", dest="base", type=_base_class, default=BaseClass(Island.HORN))
    gen.add_argument("--external", type=_var_list, default=frozenset({1}))
    gen.add_argument("--sets", type=_set_family, default=[], help="sets or parts, e.g. '1,2;2,3'")
    gen.add_argument("--edges", type=_edge_list, default=[], help="edges, e.g. '1-3,2-4'")
    gen.add_argument("-k", type=int, default=0)
    gen.add_argument("-n", type=int, default=1, help="family index or variable count")
    gen.add_argument("-m", type=int, default=0, help="clause count")
    gen.add_argument("--width", type=int, default=3)
    gen.add_argument("--input", default="-", help="source formula for lemma-chain")
    gen.add_argument("--star", action="store_true", help="lemma-chain: emit F2* instead of F2")
    gen.add_argument("--output", help="write DIMACS here and the JSON sidecar next to it")
    return parser


COMMANDS: Dict[str, Callable[[argparse.Namespace, Input], Outcome]] = {
    "recognize": cmd_recognize,
    "solve": cmd_solve,
    "detect": cmd_detect,
    "evaluate": cmd_evaluate,
    "count": cmd_count,
    "tree": cmd_tree,
}


def _run_generate(args: argparse.Namespace, argv: Sequence[str], start: float) -> int:
    if args.construction == "random" and args.seed is None:
        args.seed = 0
    formula, described = _generate(args)
    text = write_dimacs(formula, comments=[f"backdoor-tool generate {args.construction}"])
    if not args.output:
        sys.stdout.write(text)
        return EXIT_OK
    with open(args.output, "w", encoding="utf-8") as handle:
        handle.write(text)
    with open(args.output + ".json", "w", encoding="utf-8") as handle:
        json.dump(described, handle, sort_keys=True, indent=2)
    logger.info(f"Wrote {len(formula)} clauses to {args.output}")
    digest = hashlib.sha256(text.encode("utf-8")).hexdigest()
    report = RunReport(list(argv), digest, described, args.construction,
                       round((time.perf_counter() - start) * 1000, 3), args.seed)
    print(report.to_json())
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    setup_logging(args.verbose, args.log_file)
    if args.progress is None:
        args.progress = sys.stderr.isatty()
    start = time.perf_counter()
    try:
        if args.command == "generate":
            return _run_generate(args, argv, start)
        source = _read_input(args.input, args.strip_tautologies)
        payload, algorithm, code = COMMANDS[args.command](args, source)
    except BudgetExceeded as e:
        logger.error(f"Budget exceeded: {e} (use --force to run anyway)")
        return EXIT_BUDGET
    except (BackdoorKitError, OSError, ValueError) as e:
        logger.error(f"{args.command} failed: {e}")
        return EXIT_ERROR

    report = RunReport(argv, source.digest, payload, algorithm,
                       round((time.perf_counter() - start) * 1000, 3), args.seed)
    print(report.to_json())
    logger.info(f"{args.command} finished with exit code {code}")
    return code
