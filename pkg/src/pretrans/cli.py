"""Command-line interface.

Exit codes: 0 success (valid / found / irreducible / no counterexample),
1 negative result (invalid / not found / reducible / counterexample),
2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .decide import SearchBudget, countermodel_search, inclusion_probe
from .filtration import (FiltrationError, FrameClassError, countermodel_root,
                         extract_gl, extract_k4, is_selective)
from .formats import (FormatError, dump_json, frame_from_json, frame_to_json,
                      load_json, model_from_json, model_to_json, to_dot)
from .formula import (FormulaSyntaxError, SchemeError, SchemeId, from_json,
                      parse, render, scheme, to_json)
from .kripke import frame_class_checks, members, skeleton, truth_sets
from .paths import (LabeledPath, PreconditionError, bounds, find_reduction,
                    find_zigzag_link, grid_link, is_optimal)
from .validity import (BudgetExceeded, CATALOG, LogicSpec, failing_axioms,
                       is_lambda_frame, logic, refute_bruteforce, valid_axiom,
                       valid_bruteforce)

THREADS_ENV = "PRETRANS_THREADS"


class UsageError(Exception):
    pass


def _emit(args, data: dict, text: str) -> None:
    print(json.dumps(data, indent=2) if args.json else text)


def _formula(text: str | None, what: str = "--formula"):
    if text is None:
        raise UsageError(f"{what} is required")
    return parse(text)


def _logic_from(args, prefix: str = "") -> LogicSpec:
    name = getattr(args, f"{prefix}logic")
    path = getattr(args, f"{prefix}logic_file")
    if path:
        return LogicSpec.from_json(load_json(path))
    if not name:
        raise UsageError(f"--{prefix.replace('_', '-')}logic or --{prefix.replace('_', '-')}logic-file is required")
    n = getattr(args, f"{prefix}n", None)
    gamma = getattr(args, f"{prefix}gamma", None)
    beta = getattr(args, f"{prefix}beta", None)
    return logic(name, n=n, gamma=gamma and parse(gamma), beta=beta and parse(beta))


# --------------------------------------------------------------------------
# verbs


def cmd_parse(args) -> int:
    if args.input:
        f = from_json(load_json(args.input))
    else:
        f = _formula(args.text, "--text or --in")
    tree = to_json(f)
    if args.json or not args.render:
        print(json.dumps(tree))
    else:
        print(render(f))
    return 0


def cmd_eval(args) -> int:
    m = model_from_json(load_json(args.model))
    f = _formula(args.formula)
    truth = truth_sets(m, f)[f]
    if args.world is not None:
        ok = bool(truth >> args.world & 1)
        _emit(args, {"world": args.world, "true": ok}, "true" if ok else "false")
        return 0 if ok else 1
    ok = truth == m.frame.worlds
    _emit(args, {"true_at": members(truth), "everywhere": ok},
          f"true at {members(truth)}")
    return 0 if ok else 1


def cmd_frame_check(args) -> int:
    frame = frame_from_json(load_json(args.frame))
    fc = frame_class_checks(frame, args.n)
    sk = skeleton(frame)
    data = {"n": args.n, "n_transitive": fc.n_transitive,
            "conversely_well_founded": fc.conversely_well_founded,
            "irreflexive": fc.irreflexive,
            "clusters": [members(c) for c in sk.clusters]}
    code = 0
    if args.logic or args.logic_file:
        spec = _logic_from(args)
        data["logic"] = spec.name
        data["in_class"] = is_lambda_frame(frame, spec, args.limit)
        data["failing"] = [render(scheme(a)) for a in failing_axioms(frame, spec, args.limit)]
        code = 0 if data["in_class"] else 1
    text = "\n".join(f"{k}: {v}" for k, v in data.items())
    _emit(args, data, text)
    return code


def cmd_valid(args) -> int:
    frame = frame_from_json(load_json(args.frame))
    if args.scheme:
        sid = SchemeId(args.scheme, n=args.n, gamma=args.gamma and parse(args.gamma),
                       beta=args.beta and parse(args.beta))
        phi = scheme(sid)
        ok = valid_bruteforce(frame, phi, args.limit) if args.bruteforce \
            else valid_axiom(frame, sid, args.limit)
    elif args.formula:
        phi = parse(args.formula)
        ok = valid_bruteforce(frame, phi, args.limit)
    elif args.logic or args.logic_file:
        spec = _logic_from(args)
        ok = is_lambda_frame(frame, spec, args.limit)
        phi = None
    else:
        raise UsageError("one of --scheme, --formula, --logic, --logic-file is required")
    data = {"valid": ok}
    if phi is not None:
        data["formula"] = render(phi)
        if not ok and frame.size * len(set(_vars(phi))) <= args.limit:
            val, world = refute_bruteforce(frame, phi, args.limit)
            data["refutation"] = {"valuation": {k: members(v) for k, v in val.items()},
                                  "world": world}
    _emit(args, data, "valid" if ok else "invalid")
    return 0 if ok else 1


def _vars(phi):
    from .formula import variables
    return variables(phi)


def cmd_filter(args) -> int:
    big = model_from_json(load_json(args.model))
    zeta = _formula(args.formula)
    x = args.x if args.x is not None else countermodel_root(big, zeta, args.variant)
    if x is None:
        print("zeta holds at every world; pass --x to pick a root", file=sys.stderr)
        return 1
    run = extract_k4 if args.variant == "k4" else extract_gl
    small, trace = run(big, x, zeta, args.n, validate=not args.no_validate)
    if args.trace:
        dump_json(trace.to_json(), args.trace)
    out = model_to_json(small)
    out["embedding"] = trace.embedding
    if args.out:
        dump_json(out, args.out)
    if args.dot:
        index = {w: i for i, w in enumerate(trace.embedding)}
        links = [(index[u], index[v]) for u, v in trace.link_rel]
        with open(args.dot, "w") as fh:
            fh.write(to_dot(small.frame, small.valuation, dashed=links) + "\n")
    selective = is_selective(small, big, trace.embedding, zeta)
    data = {"root": x, "kept_worlds": trace.embedding, "layers": len(trace.layers) - 1,
            "selective": selective, "model": out}
    _emit(args, data, f"kept {len(trace.embedding)} worlds {trace.embedding} "
                      f"in {len(trace.layers) - 1} layers; selective={selective}")
    return 0


def _budget(args) -> SearchBudget:
    up_to = args.exhaustive_up_to if args.exhaustive_up_to is not None \
        else min(args.max_worlds, 4)
    return SearchBudget(args.max_worlds, args.max_frames, args.seed, up_to)


def cmd_search(args) -> int:
    spec = _logic_from(args)
    zeta = _formula(args.formula)
    result = countermodel_search(spec, zeta, _budget(args), args.limit)
    data = result.to_json()
    if args.out:
        dump_json(data, args.out)
    if result.found:
        text = f"countermodel: {json.dumps(model_to_json(result.model))} refutes at world {result.world}"
    else:
        text = (f"absent within budget ({result.frames_scanned} frames scanned); "
                f"completeness threshold {result.fmp_threshold} not reached")
    _emit(args, data, text)
    return 0 if result.found else 1


def cmd_include(args) -> int:
    weak = _logic_from(args, "weak_")
    strong = _logic_from(args, "strong_")
    verdict = inclusion_probe(weak, strong, _budget(args), args.limit)
    data = verdict.to_json()
    if verdict.verdict == "counterexample":
        what = render(verdict.scheme_formula()) if verdict.scheme else "converse well-foundedness"
        text = f"counterexample: {json.dumps(frame_to_json(verdict.frame))} refutes {what}"
    else:
        text = f"no counterexample within budget ({verdict.frames_scanned} frames scanned)"
    _emit(args, data, text)
    return 0 if verdict.verdict == "no_counterexample" else 1


def cmd_paths(args) -> int:
    if args.grid:
        grid = load_json(args.grid)
        if args.model:
            m = model_from_json(load_json(args.model))
            lines = [LabeledPath.from_json(p) for p in grid]
            link = grid_link(m, args.n, lines)
        else:
            frame = frame_from_json(load_json(args.frame))
            link = find_zigzag_link(frame, args.n, grid)
        _emit(args, {"link": list(link)}, "link i={} i'={} j={}".format(*link))
        return 0
    if not (args.model and args.path):
        raise UsageError("paths needs --model with --path, or --grid")
    m = model_from_json(load_json(args.model))
    path = LabeledPath.from_json(load_json(args.path))
    red = find_reduction(m, path)
    opt = is_optimal(m, path)
    data = {"reducible": red is not None, "witness": list(red) if red else None,
            "optimal": opt}
    text = (f"reducible at k={red[0]} k'={red[1]}" if red else "irreducible") + \
        f"; optimal={opt}"
    _emit(args, data, text)
    return 1 if red else 0


def cmd_bounds(args) -> int:
    b = bounds(args.n, args.psi)
    data = {"N": b.N, "M": b.M, "C_k4": b.C_k4, "C_gl": b.C_gl}
    _emit(args, data, " ".join(f"{k}={v}" for k, v in data.items()))
    return 0


def cmd_catalog(args) -> int:
    if args.show:
        spec = logic(args.show, n=args.n, gamma=args.gamma and parse(args.gamma),
                     beta=args.beta and parse(args.beta))
        data = spec.to_json()
        text = "\n".join([f"{spec.name}: {spec.description}",
                          *(f"  {render(f)}" for f in spec.formulas()),
                          f"  pretransitivity degree {spec.pretrans_degree}"
                          + ("; conversely well-founded" if spec.requires_cwf else "")])
        _emit(args, data, text)
        return 0
    data = {name: desc for name, (desc, _) in CATALOG.items()}
    _emit(args, data, "\n".join(f"{k:12} {v}" for k, v in data.items()))
    return 0


# --------------------------------------------------------------------------
# parser


def _add_logic(p, prefix=""):
    dash = prefix.replace("_", "-")
    p.add_argument(f"--{dash}logic", help="catalog name (see `catalog`)")
    p.add_argument(f"--{dash}logic-file", help="LogicSpec JSON file")
    p.add_argument(f"--{dash}n", type=int)
    p.add_argument(f"--{dash}gamma")
    p.add_argument(f"--{dash}beta")


def _add_budget(p):
    p.add_argument("--max-worlds", type=int, default=4)
    p.add_argument("--max-frames", type=int, default=0,
                   help="random frames tried after the exhaustive phase")
    p.add_argument("--exhaustive-up-to", type=int)
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--limit", type=int, default=24,
                        help="brute-force cap on worlds x variables")
    common.add_argument("--threads", type=int,
                        default=int(os.environ.get(THREADS_ENV, "1")),
                        help=f"worker cap (default from ${THREADS_ENV}); work runs in one thread")

    top = argparse.ArgumentParser(prog="pretrans", description=__doc__,
                                  formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = top.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("parse", parents=[common], help="parse a formula, print its JSON tree")
    p.add_argument("--text")
    p.add_argument("--in", dest="input", help="JSON tree file")
    p.add_argument("--render", action="store_true", help="print text instead of JSON")
    p.set_defaults(run=cmd_parse)

    p = sub.add_parser("eval", parents=[common],
                       help="truth set of a formula; exit 0 if true (at --world or everywhere)")
    p.add_argument("--model", required=True)
    p.add_argument("--formula", required=True)
    p.add_argument("--world", type=int)
    p.set_defaults(run=cmd_eval)

    p = sub.add_parser("frame-check", parents=[common],
                       help="n-transitivity, cwf, clusters; with --logic exit 1 if outside the class")
    p.add_argument("--frame", required=True)
    _add_logic(p)
    p.set_defaults(run=cmd_frame_check, n=1)

    p = sub.add_parser("valid", parents=[common], help="frame validity; exit 0 valid, 1 invalid")
    p.add_argument("--frame", required=True)
    p.add_argument("--scheme")
    p.add_argument("--formula")
    p.add_argument("--bruteforce", action="store_true", help="enumerate valuations")
    _add_logic(p)
    p.set_defaults(run=cmd_valid)

    p = sub.add_parser("filter", parents=[common], help="selective filtration of a model")
    p.add_argument("--model", required=True)
    p.add_argument("--formula", required=True, help="zeta")
    p.add_argument("--variant", choices=["k4", "gl"], default="k4")
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--x", type=int, help="root world (default: a refuting world)")
    p.add_argument("--no-validate", action="store_true")
    p.add_argument("--trace")
    p.add_argument("--out")
    p.add_argument("--dot")
    p.set_defaults(run=cmd_filter)

    p = sub.add_parser("search", parents=[common],
                       help="bounded countermodel search; exit 0 found, 1 absent")
    p.add_argument("--formula", required=True)
    p.add_argument("--out")
    _add_logic(p)
    _add_budget(p)
    p.set_defaults(run=cmd_search)

    p = sub.add_parser("include", parents=[common],
                       help="probe weak <= strong; exit 0 no counterexample, 1 counterexample")
    _add_logic(p, "weak_")
    _add_logic(p, "strong_")
    _add_budget(p)
    p.set_defaults(run=cmd_include)

    p = sub.add_parser("paths", parents=[common],
                       help="reducibility of a labeled path (exit 1 if reducible) or grid links")
    p.add_argument("--model")
    p.add_argument("--frame")
    p.add_argument("--path", help="JSON [w, formula, w, ...]")
    p.add_argument("--grid", help="JSON list of lines")
    p.add_argument("--n", type=int, default=1)
    p.set_defaults(run=cmd_paths)

    p = sub.add_parser("bounds", parents=[common], help="N, M, C_k4, C_gl")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--psi", type=int, required=True)
    p.set_defaults(run=cmd_bounds)

    p = sub.add_parser("catalog", parents=[common], help="list built-in logics")
    p.add_argument("--show", help="print one logic's axioms")
    p.add_argument("--n", type=int)
    p.add_argument("--gamma")
    p.add_argument("--beta")
    p.set_defaults(run=cmd_catalog)
    return top


INPUT_ERRORS = (UsageError, FormulaSyntaxError, SchemeError, FormatError, OSError,
                PreconditionError, FrameClassError, BudgetExceeded, ValueError, KeyError)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.threads < 1:
        print("error: --threads must be at least 1", file=sys.stderr)
        return 2
    try:
        return args.run(args)
    except FiltrationError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 3
    except INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
