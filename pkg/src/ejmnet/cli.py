"""Command-line front door: one subcommand per reproducible artifact.

All output is deterministic for a fixed configuration and seed; JSON is
emitted with sorted keys and CSV with a fixed column order, so identical
invocations are byte-identical.  Exit codes: 0 success, 1 validation
failure, 2 capacity exceeded, 64 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import belllp, verify
from .bases import BASIS_NAMES, basis_by_name, basis_from_json_dict, validate_basis
from .errors import (
    CapacityError,
    DomainError,
    NonDyadicError,
    UnknownEventError,
    ValidationError,
)
from .localmodels import (
    MAX_ALL_EQUAL,
    MIN_L1,
    MIN_LINF,
    AnnealSchedule,
    anneal_search,
    asymmetric_model,
    evaluate_model,
    exhaustive_search,
    model_to_json_dict,
    q_model,
    q_model_all_equal,
    q_model_flag_audit,
)
from .network import (
    JointDistribution,
    coincidence_stats,
    distribution_to_json_dict,
    dyadic_reconstruct,
    event_probability,
    joint_distribution_naive,
    open_line,
    polygon,
    table2_rows,
)

_OBJECTIVES = {"all-equal": MAX_ALL_EQUAL, "l1": MIN_L1, "linf": MIN_LINF}


def _write(args, text: str):
    out = getattr(args, "out", None)
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _emit_json(args, payload: dict):
    _write(args, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _emit_csv(args, fieldnames: list[str], rows: list[dict]):
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fieldnames, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: ("" if row.get(k) is None else row.get(k)) for k in fieldnames})
    _write(args, buf.getvalue())


def _distribution_rows(dist_dict: dict) -> list[dict]:
    rows = []
    for entry in dist_dict["probabilities"]:
        dyadic = entry["dyadic"]
        rows.append(
            {
                "outcome": ",".join(str(a) for a in entry["outcome"]),
                "p": repr(entry["p"]),
                "dyadic_num": None if dyadic is None else dyadic["num"],
                "dyadic_log2den": None if dyadic is None else dyadic["log2den"],
            }
        )
    return rows


def _maybe_dyadic(p: float, log2den: int):
    try:
        dy = dyadic_reconstruct(p, log2den)
        return {"num": dy.numerator, "log2den": dy.log2_denominator}
    except NonDyadicError:
        return None


def _parse_event_flag(raw: str, n: int):
    if raw == "all-equal":
        return "all-equal"
    if raw.startswith("prefix"):
        _, _, count = raw.partition(":")
        return ("prefix-equal", int(count) if count else n)
    if raw.startswith("tuple="):
        return tuple(int(a) for a in raw.removeprefix("tuple=").split(","))
    raise UnknownEventError(f"unknown event {raw!r}; use all-equal, prefix:K or tuple=a,b,...")


# ---------------------------------------------------------------------------
# Subcommand handlers


def _cmd_validate(args) -> int:
    report = {"reproduces": "joint-measurement basis orthonormality and marginal geometry", "bases": {}}
    failures = 0
    names = list(BASIS_NAMES) if args.basis == "all" else [args.basis]
    entries = [(name, basis_by_name(name)) for name in names]
    if args.basis_file:
        payload = json.loads(Path(args.basis_file).read_text(encoding="utf-8"))
        entries.append((f"file:{args.basis_file}", basis_from_json_dict(payload)))
    for name, basis in entries:
        try:
            diag = validate_basis(basis)
            report["bases"][name] = {
                "ok": True,
                "gram_residual": diag.gram_residual,
                "partial_bloch_norms": [float(x) for x in diag.partial_bloch_norms],
                "schmidt": [[float(x) for x in pair] for pair in diag.schmidt],
            }
        except ValidationError as exc:
            failures += 1
            report["bases"][name] = {
                "ok": False,
                "error": str(exc),
                "residual": exc.residual,
                "worst_pair": None if not exc.detail else list(exc.detail["worst_pair"]),
            }
    report["ok"] = failures == 0
    _emit_json(args, report)
    return 0 if failures == 0 else 1


def _cmd_triangle(args) -> int:
    dist = joint_distribution_naive(polygon(3), basis_by_name(args.basis))
    payload = distribution_to_json_dict(dist)
    if args.format == "csv":
        _emit_csv(args, ["outcome", "p", "dyadic_num", "dyadic_log2den"], _distribution_rows(payload))
    else:
        _emit_json(
            args,
            {
                "reproduces": "triangle joint-outcome distribution from three singlets",
                "distribution": payload,
            },
        )
    return 0


def _cmd_chain(args) -> int:
    top = open_line(args.n) if args.topology == "line" else polygon(args.n)
    basis = basis_by_name(args.basis)
    if args.event:
        event = _parse_event_flag(args.event, args.n)
        p = event_probability(top, basis, event)
        # Beyond 48 fractional bits a float cannot pin the exact numerator;
        # a prefix event's denominator is set by the prefix length alone.
        scale = event[1] if isinstance(event, tuple) and event[0] == "prefix-equal" else args.n
        exponent = 4 * scale + 4
        payload = {
            "reproduces": "event probability on a singlet network via transfer matrices",
            "topology": top.kind,
            "n": top.n_parties,
            "basis": basis.label,
            "event": args.event,
            "p": p,
            "dyadic": _maybe_dyadic(p, exponent) if exponent <= 48 else None,
        }
        _emit_json(args, payload)
        return 0
    dist = joint_distribution_naive(top, basis)
    payload = distribution_to_json_dict(dist)
    if args.format == "csv":
        _emit_csv(args, ["outcome", "p", "dyadic_num", "dyadic_log2den"], _distribution_rows(payload))
    else:
        _emit_json(
            args,
            {
                "reproduces": "full joint-outcome distribution by direct contraction",
                "distribution": payload,
            },
        )
    return 0


def _cmd_table2(args) -> int:
    rows = table2_rows(args.max_n)
    fields = ["N", "line", "polygon", "conditional", "line_exact", "polygon_exact", "conditional_exact"]
    if args.format == "json":
        _emit_json(
            args,
            {
                "reproduces": "all-equal probabilities for chains and rings with their exact forms",
                "rows": rows,
            },
        )
    else:
        printable = [
            {**row, "line": repr(row["line"]),
             "polygon": None if row["polygon"] is None else repr(row["polygon"]),
             "conditional": None if row["conditional"] is None else repr(row["conditional"])}
            for row in rows
        ]
        _emit_csv(args, fields, printable)
    return 0


def _cmd_stats(args) -> int:
    top = open_line(args.n) if args.topology == "line" else polygon(args.n)
    dist = joint_distribution_naive(top, basis_by_name(args.basis))
    stats = coincidence_stats(dist)
    _emit_json(
        args,
        {
            "reproduces": "pair/triple coincidence rates and coincidence-pattern classes",
            "topology": top.kind,
            "n": top.n_parties,
            "basis": dist.basis_label,
            "p_pair_equal": stats.p_pair_equal,
            "p_all_equal": stats.p_all_equal,
            "p_cond_pair": stats.p_cond_pair,
            "p_cond_triple": stats.p_cond_triple,
            "pattern_classes": stats.pattern_classes,
        },
    )
    return 0


def _cmd_qmodel(args) -> int:
    if args.q is not None:
        qs = [args.q]
    else:
        lo, hi, step = (float(x) for x in args.scan.split(":"))
        count = int(round((hi - lo) / step))
        qs = [lo + i * step for i in range(count + 1)]
    rows = []
    for q in qs:
        p = coincidence_stats(evaluate_model(q_model(q))).p_all_equal
        rows.append({"q": q, "p_all_equal": p, "closed_form": q_model_all_equal(q)})
    peak = max(rows, key=lambda r: r["p_all_equal"])
    payload = {
        "reproduces": "flagged-dit model all-equal rate (13+9q-9q^2)/64 with peak 61/256",
        "rows": rows,
        "peak": {"q": peak["q"], "p_all_equal": peak["p_all_equal"]},
    }
    if args.audit:
        payload["flag_audit"] = q_model_flag_audit()
    if args.format == "csv":
        printable = [
            {"q": repr(r["q"]), "p_all_equal": repr(r["p_all_equal"]), "closed_form": repr(r["closed_form"])}
            for r in rows
        ]
        _emit_csv(args, ["q", "p_all_equal", "closed_form"], printable)
    else:
        _emit_json(args, payload)
    return 0


def _cmd_asym(args) -> int:
    model = asymmetric_model()
    dist = evaluate_model(model)
    stats = coincidence_stats(dist)
    zero_distinct = sum(
        1
        for idx in np.ndindex(4, 4, 4)
        if len(set(idx)) == 3 and dist.probs[idx] == 0.0
    )
    _emit_json(
        args,
        {
            "reproduces": "deterministic complementary-bit triangle model statistics",
            "p_all_equal": stats.p_all_equal,
            "p_pair_equal": stats.p_pair_equal,
            "p_cond_triple": stats.p_cond_triple,
            "zero_all_distinct_patterns": zero_distinct,
            "model": model_to_json_dict(model),
        },
    )
    return 0


def _search_target(args):
    name = args.target
    if name == "none":
        return None
    dist = joint_distribution_naive(polygon(3), basis_by_name("ejm"))
    if name == "ejm-triangle":
        return dist
    if name == "ejm-triangle-coarse":
        # Group outcomes {1,2} and {3,4} on every party, supported on {1,2}^3.
        coarse = np.zeros((4, 4, 4))
        groups = np.array([0, 0, 1, 1])
        for idx in np.ndindex(4, 4, 4):
            coarse[tuple(groups[list(idx)])] += dist.probs[idx]
        return JointDistribution(dist.topology, "ejm-coarse", coarse)
    raise DomainError(f"unknown search target {name!r}")


def _cmd_search(args) -> int:
    objective = _OBJECTIVES[args.objective]
    target = _search_target(args)
    if args.method == "exhaustive":
        result = exhaustive_search(args.cardinality, objective, target, args.optimize_weights)
        recheck = coincidence_stats(evaluate_model(result.witness)).p_all_equal
        payload = {
            "reproduces": "deterministic-strategy enumeration over uniform binary sources",
            "method": "exhaustive",
            "objective": args.objective,
            "value": result.value,
            "candidates": result.candidates,
            "weights_refined": result.weights_refined,
            "witness": model_to_json_dict(result.witness),
            "witness_all_equal": recheck,
        }
    else:
        schedule = AnnealSchedule(steps=args.steps, cooling=args.cooling)
        result = anneal_search(
            args.cardinality,
            objective,
            target,
            topology=polygon(args.n),
            seed=args.seed,
            schedule=schedule,
        )
        payload = {
            "reproduces": "stochastic probe of network-local model space",
            "method": "anneal",
            "objective": args.objective,
            "value": result.value,
            "seed": result.seed,
            "steps": result.schedule.steps,
            "trace": [[step, value] for step, value in result.trace],
            "witness": model_to_json_dict(result.witness),
        }
    _emit_json(args, payload)
    return 0


def _cmd_bell_check(args) -> int:
    if args.target_file:
        target = np.asarray(json.loads(Path(args.target_file).read_text(encoding="utf-8")))
    elif args.target == "ejm-line":
        target = belllp.line_conditional_target()
    elif args.target == "uniform":
        target = belllp.uniform_target()
    else:
        target = belllp.pr_box_target()
    certificate = belllp.bell_lp_check(target)
    payload = {
        "reproduces": "local-polytope membership of a four-outcome two-party behaviour",
        "target": args.target if not args.target_file else f"file:{args.target_file}",
        "verdict": certificate.verdict,
        "verification": belllp.verify_certificate(certificate, target),
    }
    if certificate.verdict == belllp.LOCAL:
        support = np.flatnonzero(certificate.weights > 1e-12)
        payload["weights"] = {str(int(i)): float(certificate.weights[i]) for i in support}
        payload["reconstruction_residual"] = certificate.reconstruction_residual
    elif certificate.verdict == belllp.NONLOCAL:
        payload["functional"] = certificate.functional.tolist()
        payload["classical_bound"] = certificate.classical_bound
        payload["target_value"] = certificate.target_value
        payload["margin"] = certificate.margin
    else:
        payload["solver_status"] = certificate.solver_status
    _emit_json(args, payload)
    return 0 if certificate.verdict != belllp.INCONCLUSIVE else 1


def _cmd_verify_all(args) -> int:
    results = verify.run_all_checks(tolerance=args.tol, include_lp=not args.no_lp)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        residual = "inf" if r.residual == float("inf") else f"{r.residual:.3g}"
        sys.stderr.write(f"{status} {r.name} (residual {residual}) {r.detail}\n")
    _emit_json(args, {"reproduces": "aggregate reproduction suite", **verify.summarize(results)})
    return 0 if all(r.passed for r in results) else 1


# ---------------------------------------------------------------------------
# Parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ejmnet",
        description="Quantum correlations of joint measurements on singlet networks, "
        "and classical network-local models probing them.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, basis=True, fmt=None):
        p.add_argument("--out", default=None, help="write the report to this path instead of stdout")
        if basis:
            p.add_argument("--basis", default="ejm", choices=list(BASIS_NAMES))
        if fmt:
            p.add_argument("--format", default=fmt, choices=["json", "csv"])

    p = sub.add_parser("validate", help="orthonormality and marginal diagnostics of the bases")
    p.add_argument("--basis", default="all", choices=["all", *BASIS_NAMES])
    p.add_argument("--basis-file", default=None, help="also validate a basis stored as JSON")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("triangle", help="full 64-entry outcome table of the three-party ring")
    add_common(p, fmt="json")
    p.set_defaults(func=_cmd_triangle)

    for name, topo in (("line", "line"), ("polygon", "polygon")):
        p = sub.add_parser(name, help=f"distribution or event probability on a {name}")
        p.add_argument("--n", type=int, required=True)
        p.add_argument(
            "--event",
            default=None,
            help="all-equal, prefix:K, or tuple=a,b,... (omit for the full table, n <= 8)",
        )
        add_common(p, fmt="json")
        p.set_defaults(func=_cmd_chain, topology=topo)

    p = sub.add_parser("table2", help="all-equal probabilities for chains and rings")
    p.add_argument("--max-n", type=int, default=10)
    add_common(p, basis=False, fmt="csv")
    p.set_defaults(func=_cmd_table2)

    p = sub.add_parser("stats", help="coincidence statistics of a network distribution")
    p.add_argument("--topology", default="polygon", choices=["line", "polygon"])
    p.add_argument("--n", type=int, default=3)
    add_common(p)
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("qmodel", help="flagged-dit triangle model scan and audit")
    p.add_argument("--q", type=float, default=None)
    p.add_argument("--scan", default="0:1:0.25", help="LO:HI:STEP grid over q")
    p.add_argument("--audit", action="store_true", help="include the 8-row flag audit")
    add_common(p, basis=False, fmt="json")
    p.set_defaults(func=_cmd_qmodel)

    p = sub.add_parser("asym", help="deterministic complementary-bit triangle model")
    add_common(p, basis=False)
    p.set_defaults(func=_cmd_asym)

    p = sub.add_parser("search", help="search network-local model space")
    p.add_argument("--method", default="exhaustive", choices=["exhaustive", "anneal"])
    p.add_argument("--cardinality", type=int, default=2)
    p.add_argument("--objective", default="all-equal", choices=list(_OBJECTIVES))
    p.add_argument(
        "--target",
        default="none",
        choices=["none", "ejm-triangle", "ejm-triangle-coarse"],
        help="target distribution for the distance objectives",
    )
    p.add_argument("--n", type=int, default=3, help="ring size for annealing")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--steps", type=int, default=100_000)
    p.add_argument("--cooling", type=float, default=0.999)
    p.add_argument("--optimize-weights", action="store_true")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_search)

    p = sub.add_parser("bell-check", help="local-polytope membership LP")
    p.add_argument("--target", default="ejm-line", choices=["ejm-line", "uniform", "pr-box"])
    p.add_argument("--target-file", default=None, help="JSON (4,4,4,4) nested array [x][y][a][b]")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_bell_check)

    p = sub.add_parser("verify-all", help="run the whole reproduction suite")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--no-lp", action="store_true", help="skip the membership LPs")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_verify_all)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 64
    try:
        return args.func(args)
    except CapacityError as exc:
        sys.stderr.write(f"capacity error: {exc}\n")
        return 2
    except (ValidationError, DomainError, UnknownEventError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


def console_entry():
    sys.exit(main())


if __name__ == "__main__":
    console_entry()
