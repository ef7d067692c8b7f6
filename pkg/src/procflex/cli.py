"""Command line front end.

Verbs mirror the library: validate, decompose, design, gap, augment, plan,
simulate, verify.  Instances travel as JSON documents with fields m, n,
demand, supply, edges; rationals are integers or exact strings like "3/2".
Results are wrapped in a single envelope {schema_version, command, seed,
input, options, result} printed with sorted keys, so equal inputs produce
byte-identical output.  `simulate` emits CSV by default (sweeps want columns,
not trees); `--format json` switches it to the envelope.

Exit codes: 0 success, 1 domain errors (infeasible instance, invalid target,
failed verification), 2 malformed documents, unreadable files or bad usage.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from fractions import Fraction

from .augmentation import add_edge_effect, best_single_edge
from .core import (
    Assignment,
    ProblemInstance,
    format_rational,
    is_feasible,
    parse_rational,
    validate_instance,
)
from .decomposition import crp_decomposition, crp_graph, ssc_basis
from .design import design_flexibility
from .errors import ProcflexError, VerificationFailed
from .planning import plan_schedule
from .queuesim import heavy_traffic_check
from .robustness import check_perturbation, crp_gap

SCHEMA_VERSION = 1


class DocumentError(Exception):
    """Malformed or unreadable input; rendered with exit code 2."""


def _load_json(path: str):
    try:
        if path == "-":
            return json.load(sys.stdin)
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise DocumentError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DocumentError(f"{path} is not valid JSON: {exc}") from exc


def _load_instance(path: str) -> ProblemInstance:
    doc = _load_json(path)
    try:
        return validate_instance(doc)
    except (ValueError, TypeError) as exc:
        # structural problems are parse errors; rate/edge domain errors pass
        raise DocumentError(f"{path}: {exc}") from exc


def _instance_from_doc(doc) -> ProblemInstance:
    try:
        return validate_instance(doc)
    except (ValueError, TypeError) as exc:
        raise DocumentError(f"embedded instance is malformed: {exc}") from exc


def _assignment_doc(assignment: Assignment) -> list:
    return [[i, j, str(v)] for (i, j), v in sorted(assignment.entries.items())]


def _envelope(command: str, seed: int, input_doc, options: dict, result) -> str:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "seed": seed,
        "input": input_doc,
        "options": options,
        "result": result,
    }
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


# ---------------------------------------------------------------------------
# result builders, shared by the direct verbs and by verify's replay


def _result_validate(inst: ProblemInstance) -> dict:
    out = inst.to_dict()
    out["total"] = format_rational(inst.total)
    out["feasible"] = is_feasible(inst)
    return out


def _result_decompose(inst: ProblemInstance) -> dict:
    decomp = crp_decomposition(inst)
    dag = crp_graph(decomp, inst)
    basis = ssc_basis(decomp)
    out = decomp.to_dict()
    for comp, entry in zip(decomp.components, out["components"]):
        entry["demand_total"] = format_rational(
            sum((inst.demand[i - 1] for i in comp.demands), Fraction(0))
        )
        entry["supply_total"] = format_rational(
            sum((inst.supply[j - 1] for j in comp.supplies), Fraction(0))
        )
    out["crp_graph"] = dag.to_dict()
    out["ssc_basis"] = [list(v) for v in basis.vectors]
    return out


def _result_design(inst: ProblemInstance, erp: int) -> dict:
    res = design_flexibility(inst.demand, inst.supply, erp)
    return {
        "erp": res.achieved_erp,
        "edge_count": res.edge_count,
        "edges": [list(e) for e in sorted(res.edges)],
        "assignment": _assignment_doc(res.assignment),
        "used_cycle": res.used_cycle,
    }


def _result_gap(inst: ProblemInstance, omegas: list | None) -> dict:
    out = crp_gap(inst).to_dict()
    if omegas is not None:
        checks = []
        for omega in omegas:
            vec = [parse_rational(w) for w in omega]
            checks.append(check_perturbation(inst, vec).to_dict())
        out["perturbations"] = checks
    return out


def _result_augment(inst: ProblemInstance, edge, best: bool) -> dict:
    if best:
        _, effect = best_single_edge(inst)
    else:
        effect = add_edge_effect(inst, tuple(edge))
    return effect.to_dict()


def _result_plan(eta: int, budget: int, objective_opt) -> dict:
    spec = objective_opt["tables"] if isinstance(objective_opt, dict) else objective_opt
    return plan_schedule(eta, budget, spec).to_dict()


def _result_simulate(inst: ProblemInstance, opts: dict, seed: int) -> dict:
    report = heavy_traffic_check(
        inst,
        opts["eps"],
        horizon=opts["horizon"],
        warmup=opts["warmup"],
        seed=seed,
        replications=opts["reps"],
        arrival_levels=opts["levels"],
    )
    return report.to_dict()


# ---------------------------------------------------------------------------
# verb handlers


def _cmd_validate(args) -> int:
    inst = _load_instance(args.instance)
    sys.stdout.write(
        _envelope("validate", args.seed, inst.to_dict(), {}, _result_validate(inst))
    )
    return 0


def _cmd_decompose(args) -> int:
    inst = _load_instance(args.instance)
    sys.stdout.write(
        _envelope("decompose", args.seed, inst.to_dict(), {}, _result_decompose(inst))
    )
    return 0


def _cmd_design(args) -> int:
    inst = _load_instance(args.instance)
    options = {"erp": args.erp}
    result = _result_design(inst, args.erp)
    sys.stdout.write(_envelope("design", args.seed, inst.to_dict(), options, result))
    return 0


def _parse_perturb_file(path: str) -> list:
    doc = _load_json(path)
    if isinstance(doc, dict) and "omegas" in doc:
        omegas = doc["omegas"]
    elif isinstance(doc, dict) and "omega" in doc:
        omegas = [doc["omega"]]
    else:
        raise DocumentError(f"{path}: expected an object with 'omega' or 'omegas'")
    if not isinstance(omegas, list) or not all(isinstance(o, list) for o in omegas):
        raise DocumentError(f"{path}: omegas must be lists of rationals")
    return [[str(w) for w in o] for o in omegas]


def _cmd_gap(args) -> int:
    inst = _load_instance(args.instance)
    omegas = _parse_perturb_file(args.perturb) if args.perturb else None
    options = {"perturb": omegas}
    result = _result_gap(inst, omegas)
    sys.stdout.write(_envelope("gap", args.seed, inst.to_dict(), options, result))
    return 0


def _cmd_augment(args) -> int:
    inst = _load_instance(args.instance)
    options = {"best": True} if args.best else {"edge": list(args.edge)}
    result = _result_augment(inst, args.edge, args.best)
    sys.stdout.write(_envelope("augment", args.seed, inst.to_dict(), options, result))
    return 0


def _objective_option(spec: str):
    """Normalize --objective into an envelope-storable value."""
    if spec in ("sum", "final"):
        return spec
    if spec.startswith("file:"):
        path = spec[5:]
        doc = _load_json(path)
        if not isinstance(doc, list):
            raise DocumentError(f"{path}: objective tables must be a list of rows")
        try:
            tables = [[format_rational(parse_rational(v)) for v in row] for row in doc]
        except (ValueError, TypeError) as exc:
            raise DocumentError(f"{path}: {exc}") from exc
        return {"tables": tables}
    raise DocumentError(f"unknown objective {spec!r}; use sum, final or file:<path>")


def _cmd_plan(args) -> int:
    objective_opt = _objective_option(args.objective)
    options = {"eta": args.eta, "budget": args.budget, "objective": objective_opt}
    result = _result_plan(args.eta, args.budget, objective_opt)
    sys.stdout.write(_envelope("plan", args.seed, None, options, result))
    return 0


def _cmd_simulate(args) -> int:
    inst = _load_instance(args.instance)
    opts = {
        "eps": args.eps,
        "horizon": args.horizon,
        "warmup": args.warmup,
        "reps": args.reps,
        "levels": args.levels,
        "format": args.format,
    }
    result = _result_simulate(inst, opts, args.seed)
    if args.format == "json":
        sys.stdout.write(_envelope("simulate", args.seed, inst.to_dict(), opts, result))
        return 0
    writer = csv.writer(sys.stdout, lineterminator="\n")
    header = ["eps"]
    header += [f"q_mean_{i}" for i in range(1, inst.m + 1)]
    header += ["lhs", "rhs", "ratio", "ssc_ratio", "lhs_se", "ssc_se"]
    writer.writerow(header)
    for row in result["rows"]:
        record = [row["eps"]]
        record += [repr(v) for v in row["queue_means"]]
        record += [
            repr(row["lhs"]),
            result["rhs"],
            repr(row["ratio"]),
            repr(row["ssc_ratio"]),
            repr(row["lhs_se"]),
            repr(row["ssc_se"]),
        ]
        writer.writerow(record)
    return 0


def _replay(doc) -> dict:
    """Recompute the result a stored envelope claims."""
    try:
        command = doc["command"]
        seed = doc["seed"]
        options = doc["options"]
        input_doc = doc["input"]
    except (KeyError, TypeError) as exc:
        raise DocumentError(f"envelope missing field: {exc}") from exc
    inst = _instance_from_doc(input_doc) if input_doc is not None else None
    if command == "validate":
        return _result_validate(inst)
    if command == "decompose":
        return _result_decompose(inst)
    if command == "design":
        return _result_design(inst, options["erp"])
    if command == "gap":
        return _result_gap(inst, options.get("perturb"))
    if command == "augment":
        return _result_augment(inst, options.get("edge"), options.get("best", False))
    if command == "plan":
        return _result_plan(options["eta"], options["budget"], options["objective"])
    if command == "simulate":
        return _result_simulate(inst, options, seed)
    raise DocumentError(f"cannot verify command {command!r}")


def _cmd_verify(args) -> int:
    doc = _load_json(args.document)
    if not isinstance(doc, dict) or doc.get("schema_version") != SCHEMA_VERSION:
        raise DocumentError("not a result document with a known schema_version")
    replayed = _replay(doc)
    if replayed != doc["result"]:
        raise VerificationFailed(
            f"stored result for {doc['command']!r} does not match recomputation"
        )
    result = {"verified": True, "command": doc["command"]}
    sys.stdout.write(_envelope("verify", args.seed, None, {}, result))
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def _edge_arg(text: str) -> tuple[int, int]:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("edge must look like i,j")
    try:
        return int(parts[0]), int(parts[1])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"edge must be two integers: {exc}")


def _count_arg(text: str) -> int:
    """Step counts; scientific notation like 1e7 is accepted."""
    try:
        value = float(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))
    if value != int(value):
        raise argparse.ArgumentTypeError(f"{text} is not a whole number")
    return int(value)


def _eps_arg(text: str) -> list[str]:
    values = [part.strip() for part in text.split(",") if part.strip()]
    if not values:
        raise argparse.ArgumentTypeError("need at least one eps value")
    return values


def _levels_arg(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"levels must be integers: {exc}")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="procflex",
        description="Flexibility-graph analysis and MaxWeight simulation.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="rng seed (default 0)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common], help="check an instance file")
    p.add_argument("instance", help="instance JSON path, or - for stdin")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser(
        "decompose", parents=[common], help="redundant edges, blocks, ERP, CRP graph"
    )
    p.add_argument("instance")
    p.set_defaults(func=_cmd_decompose)

    p = sub.add_parser(
        "design", parents=[common], help="sparsest graph hitting a target ERP"
    )
    p.add_argument("instance", help="only demand and supply are read")
    p.add_argument("--erp", type=int, required=True, help="target component count")
    p.set_defaults(func=_cmd_design)

    p = sub.add_parser(
        "gap", parents=[common], help="pooling gap and perturbation harness"
    )
    p.add_argument("instance")
    p.add_argument("--perturb", help="JSON file with omega or omegas")
    p.set_defaults(func=_cmd_gap)

    p = sub.add_parser("augment", parents=[common], help="single-edge addition effect")
    p.add_argument("instance")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--edge", type=_edge_arg, help="candidate edge i,j")
    group.add_argument("--best", action="store_true", help="search for the best edge")
    p.set_defaults(func=_cmd_augment)

    p = sub.add_parser(
        "plan", parents=[common], help="multi-step upgrade schedule for a diagonal start"
    )
    p.add_argument("--eta", type=int, required=True, help="initial number of pairs")
    p.add_argument("--budget", type=int, required=True, help="edges to add, one per step")
    p.add_argument(
        "--objective", default="sum", help="sum, final, or file:<tables.json>"
    )
    p.set_defaults(func=_cmd_plan)

    p = sub.add_parser(
        "simulate", parents=[common], help="MaxWeight runs and heavy-traffic ratios"
    )
    p.add_argument("instance")
    p.add_argument("--eps", type=_eps_arg, required=True, help="comma-separated list")
    p.add_argument("--horizon", type=_count_arg, required=True)
    p.add_argument("--warmup", type=_count_arg, default=None, help="default horizon/10")
    p.add_argument("--reps", type=int, default=1)
    p.add_argument("--levels", type=_levels_arg, default=None, help="arrival highs")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser(
        "verify", parents=[common], help="replay a result document and compare"
    )
    p.add_argument("document")
    p.set_defaults(func=_cmd_verify)
    return parser


def _diagnostic(name: str, message: str) -> None:
    sys.stderr.write(json.dumps({"error": name, "message": message}, sort_keys=True) + "\n")


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return args.func(args)
    except DocumentError as exc:
        _diagnostic("DocumentError", str(exc))
        return 2
    except ProcflexError as exc:
        _diagnostic(type(exc).__name__, str(exc))
        return 1
    except (ValueError, TypeError) as exc:
        # library-level rejections of a requested target
        _diagnostic(type(exc).__name__, str(exc))
        return 1


if __name__ == "__main__":
    sys.exit(main())
