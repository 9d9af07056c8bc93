"""Command-line surface.

Exit codes: 0 success or verified; 1 verification failure or UNSAT;
2 usage or input error; 3 budget exceeded.  Every certificate-producing
command re-verifies its own output before reporting success, embeds
input digests in the artifact, and writes a run manifest next to the
output file.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from . import artifacts, engine, oracle, report, weights
from .artifacts import (
    FORMAT_VERSION,
    TOOL_NAME,
    TOOL_VERSION,
    canonical_dumps,
    file_digest,
    load_artifact,
    make_provenance,
    save_artifact,
)
from .config import DEFAULT_BUDGETS, Budgets, budgets_from_env
from .engine import (
    GeneralResult,
    PartitionCertificate,
    ProductInstance,
    verify_certificate,
)
from .errors import (
    ArtifactError,
    BudgetExceededError,
    PosetError,
    PosetilesError,
    ValidationError,
)
from .posets import LatticeCertificate, Poset, verify_lattice_partition
from .weights import WeakCertificate, verify_weak_certificate

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_BUDGET = 3


def _budgets_from_args(args) -> Budgets:
    budgets = budgets_from_env(DEFAULT_BUDGETS)
    overrides = {}
    if getattr(args, "budget_cells", None) is not None:
        overrides["cells"] = args.budget_cells
    if getattr(args, "budget_nodes", None) is not None:
        overrides["nodes"] = args.budget_nodes
    if getattr(args, "embed_cap", None) is not None:
        overrides["embed_dim_cap"] = args.embed_cap
    if getattr(args, "enum_cap", None) is not None:
        overrides["enum_dim_cap"] = args.enum_cap
    return replace(budgets, **overrides) if overrides else budgets


def _load(path, want, what: str):
    artifact = load_artifact(path)
    if not isinstance(artifact, want):
        raise ArtifactError(f"{path} is not a {what} artifact")
    return artifact


def _write_manifest(out_path, command, inputs, outputs, budgets, outcome):
    manifest = {
        "format": FORMAT_VERSION,
        "kind": "manifest",
        "tool": f"{TOOL_NAME} {TOOL_VERSION}",
        "command": command,
        "inputs": {str(p): d for p, d in sorted(inputs.items())},
        "outputs": {str(p): d for p, d in sorted(outputs.items())},
        "budgets": make_provenance(command, {}, budgets)["budgets"],
        "outcome": outcome,
    }
    path = Path(str(out_path) + ".manifest.json")
    path.write_text(canonical_dumps(manifest))


def _emit(args, artifact, command, inputs, budgets, outcome) -> None:
    if getattr(args, "out", None) is None:
        return
    provenance = make_provenance(command, inputs, budgets)
    digest = save_artifact(args.out, artifact, provenance)
    _write_manifest(args.out, command, inputs, {args.out: digest}, budgets, outcome)
    print(f"wrote {args.out}")


def _report_result(rep) -> int:
    print(rep.summary())
    return EXIT_OK if rep.ok else EXIT_FAIL


# ------------------------------------------------------------- commands


def cmd_poset_validate(args) -> int:
    try:
        poset = _load(args.poset, Poset, "poset")
    except (ArtifactError, PosetError) as exc:
        print(f"invalid poset: {exc}")
        return EXIT_FAIL
    print(
        f"poset ok: {len(poset)} elements, top={poset.top!r}, "
        f"bottom={poset.bottom!r}"
    )
    return EXIT_OK


def cmd_rpart_build(args) -> int:
    budgets = _budgets_from_args(args)
    poset = _load(args.poset, Poset, "poset")
    cert = weights.build_r_certificate(poset, budgets)
    rep = verify_weak_certificate(cert, budgets)
    print(f"built r-partition certificate: n={cert.n}, r={cert.r}, "
          f"support={len(cert.weights.entries)}")
    print(rep.summary())
    if not rep.ok:
        return EXIT_FAIL
    _emit(args, cert, "rpart build", {args.poset: file_digest(args.poset)},
          budgets, "verified")
    return EXIT_OK


def cmd_rpart_verify(args) -> int:
    budgets = _budgets_from_args(args)
    cert = _load(args.cert, WeakCertificate, "weak certificate")
    if cert.kind != "r-partition":
        raise ValidationError(f"{args.cert} is a {cert.kind} certificate")
    return _report_result(verify_weak_certificate(cert, budgets))


def cmd_modpart_build(args) -> int:
    budgets = _budgets_from_args(args)
    poset = _load(args.poset, Poset, "poset")
    cert = weights.build_mod_certificate(poset, args.r, budgets)
    rep = verify_weak_certificate(cert, budgets)
    print(f"built mod-partition certificate: n={cert.n}, r={cert.r}, "
          f"support={len(cert.weights.entries)} "
          f"(integer stage {len(cert.z_stage.entries)})")
    print(rep.summary())
    if not rep.ok:
        return EXIT_FAIL
    _emit(args, cert, "modpart build", {args.poset: file_digest(args.poset)},
          budgets, "verified")
    return EXIT_OK


def cmd_modpart_verify(args) -> int:
    budgets = _budgets_from_args(args)
    cert = _load(args.cert, WeakCertificate, "weak certificate")
    if cert.kind != "mod-partition":
        raise ValidationError(f"{args.cert} is a {cert.kind} certificate")
    return _report_result(verify_weak_certificate(cert, budgets))


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x != ""]
    except ValueError:
        raise ValidationError(f"expected a comma-separated integer list, got {text!r}")


def _engine_emit(args, cert, command, inputs, budgets) -> int:
    rep = verify_certificate(cert, budgets)
    print(f"{command}: {len(cert.tiles)} tiles over {rep.cells} cells")
    print(rep.summary())
    if not rep.ok:
        return EXIT_FAIL
    _emit(args, cert, command, inputs, budgets, "verified")
    return EXIT_OK


def cmd_engine_onecorner(args) -> int:
    budgets = _budgets_from_args(args)
    inst = _load(args.instance, ProductInstance, "instance")
    cert = engine.partition_onecorner(args.k, args.i, inst, budgets)
    return _engine_emit(args, cert, "engine onecorner",
                        {args.instance: file_digest(args.instance)}, budgets)


def cmd_engine_modify(args) -> int:
    budgets = _budgets_from_args(args)
    inst = _load(args.instance, ProductInstance, "instance")
    base = _load(args.cert, PartitionCertificate, "tile certificate")
    cert = engine.partition_modify(base, args.i, inst, budgets)
    inputs = {
        args.instance: file_digest(args.instance),
        args.cert: file_digest(args.cert),
    }
    return _engine_emit(args, cert, "engine modify", inputs, budgets)


def cmd_engine_changes(args) -> int:
    budgets = _budgets_from_args(args)
    inst = _load(args.instance, ProductInstance, "instance")
    cert = engine.partition_multiplechanges(
        args.k, args.l, _int_list(args.iset), _int_list(args.jset), inst, budgets
    )
    return _engine_emit(args, cert, "engine changes",
                        {args.instance: file_digest(args.instance)}, budgets)


def cmd_engine_fillin(args) -> int:
    budgets = _budgets_from_args(args)
    inst = _load(args.instance, ProductInstance, "instance")
    ids = [x for x in args.members.split(",") if x] if args.members else []
    cert = engine.partition_fillin(ids, inst, budgets)
    return _engine_emit(args, cert, "engine fillin",
                        {args.instance: file_digest(args.instance)}, budgets)


def cmd_engine_manychoices(args) -> int:
    budgets = _budgets_from_args(args)
    inst = _load(args.instance, ProductInstance, "instance")
    cert = engine.partition_manychoices(
        args.kbound, inst, _int_list(args.jset), budgets
    )
    return _engine_emit(args, cert, "engine manychoices",
                        {args.instance: file_digest(args.instance)}, budgets)


def cmd_engine_main(args) -> int:
    budgets = _budgets_from_args(args)
    inst = _load(args.instance, ProductInstance, "instance")
    n, cert = engine.partition_main(inst, budgets)
    print(f"main construction dimension: n={n} (certificate covers S^2 x U^{n})")
    return _engine_emit(args, cert, "engine main",
                        {args.instance: file_digest(args.instance)}, budgets)


def cmd_engine_general(args) -> int:
    budgets = _budgets_from_args(args)
    inst = _load(args.instance, ProductInstance, "instance")
    result = engine.partition_general(inst, args.mode, budgets)
    inputs = {args.instance: file_digest(args.instance)}
    stage_reports = [
        verify_certificate(s.main_certificate, budgets) for s in result.stages
    ]
    for stage, rep in zip(result.stages, stage_reports):
        print(f"stage {stage.index}: p={stage.p}, q={stage.q}, "
              f"{'verified' if rep.ok else 'FAILED'}")
    if not all(r.ok for r in stage_reports):
        return EXIT_FAIL
    if result.mode == "full":
        print(f"full certificate: S^{result.n}")
        return _engine_emit(args, result.certificate, "engine general",
                            inputs, budgets)
    print(f"plan-only outcome: n={result.n}, cover size {len(result.cover)} "
          "(full expansion over budget)")
    _emit(args, result, "engine general", inputs, budgets, "plan-only")
    return EXIT_OK


def cmd_engine_compose(args) -> int:
    budgets = _budgets_from_args(args)
    c1 = _load(args.cert1, LatticeCertificate, "lattice certificate")
    c2 = _load(args.cert2, LatticeCertificate, "lattice certificate")
    cert = engine.product_compose(c1, c2)
    rep = verify_lattice_partition(cert, budgets)
    print(f"composed partition of B({cert.dimension}) into "
          f"{len(cert.tiles)} product copies")
    print(rep.summary())
    if not rep.ok:
        return EXIT_FAIL
    inputs = {
        args.cert1: file_digest(args.cert1),
        args.cert2: file_digest(args.cert2),
    }
    _emit(args, cert, "engine compose", inputs, budgets, "verified")
    return EXIT_OK


def cmd_oracle_cover(args) -> int:
    budgets = _budgets_from_args(args)
    poset = _load(args.poset, Poset, "poset")
    result = oracle.direct_lattice_partition(poset, args.n, args.mode, budgets)
    inputs = {args.poset: file_digest(args.poset)}
    if args.mode == "count":
        print(f"exact covers: {result}")
        return EXIT_OK
    if args.mode == "first":
        if result is None:
            print("UNSAT: no partition into copies exists")
            return EXIT_FAIL
        rep = verify_lattice_partition(result, budgets)
        print(f"partition found: {len(result.tiles)} tiles")
        print(rep.summary())
        if not rep.ok:
            return EXIT_FAIL
        _emit(args, result, "oracle cover", inputs, budgets, "verified")
        return EXIT_OK
    print(f"{len(result)} partitions found")
    if result and getattr(args, "out", None):
        _emit(args, result[0], "oracle cover", inputs, budgets, "verified")
    return EXIT_OK if result else EXIT_FAIL


def cmd_oracle_weak(args) -> int:
    inst = _load(args.instance, ProductInstance, "instance")
    findings = oracle.weak_partition_search(
        inst.ground, dict(inst.family), args.rmax, args.weight_bound
    )
    for f in findings:
        print(f"{f.kind} r={f.r}: weights {dict(sorted(f.weights.items()))}")
    if not findings:
        print("no weak-partition witnesses within the bounds")
    if getattr(args, "out", None):
        obj = artifacts.findings_to_obj(
            inst.ground, dict(inst.family), findings, args.rmax, args.weight_bound
        )
        budgets = _budgets_from_args(args)
        obj["provenance"] = make_provenance(
            "oracle weak", {args.instance: file_digest(args.instance)}, budgets
        )
        Path(args.out).write_text(canonical_dumps(obj))
        _write_manifest(args.out, "oracle weak",
                        {args.instance: file_digest(args.instance)},
                        {args.out: file_digest(args.out)}, budgets, "reported")
        print(f"wrote {args.out}")
    return EXIT_OK


def cmd_verify(args) -> int:
    budgets = _budgets_from_args(args)
    artifact = load_artifact(args.cert)
    if isinstance(artifact, WeakCertificate):
        rep = verify_weak_certificate(artifact, budgets)
    elif isinstance(artifact, PartitionCertificate):
        rep = verify_certificate(artifact, budgets)
    elif isinstance(artifact, LatticeCertificate):
        rep = verify_lattice_partition(artifact, budgets)
    elif isinstance(artifact, GeneralResult):
        reports = [
            verify_certificate(s.main_certificate, budgets)
            for s in artifact.stages
        ]
        for stage, rep in zip(artifact.stages, reports):
            print(f"stage {stage.index}: "
                  f"{'verified' if rep.ok else 'FAILED'}")
            if not rep.ok:
                print(rep.summary())
        ok = all(r.ok for r in reports)
        print(f"plan-only artifact: n={artifact.n}, "
              f"{'all stages verified' if ok else 'stage failures'}")
        return EXIT_OK if ok else EXIT_FAIL
    else:
        raise ValidationError(f"{args.cert} is not a verifiable certificate")
    return _report_result(rep)


def cmd_report(args) -> int:
    budgets = _budgets_from_args(args)
    artifact = load_artifact(args.artifact)
    paths = report.render_report(artifact, args.out_dir, budgets)
    for p in paths:
        print(f"wrote {p}")
    return EXIT_OK


# --------------------------------------------------------------- parser


def _add_budget_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--budget-cells", type=int, default=None,
                        help="cell budget for construction and verification")
    parser.add_argument("--budget-nodes", type=int, default=None,
                        help="node budget for backtracking searches")
    parser.add_argument("--embed-cap", type=int, default=None,
                        help="largest base embedding dimension tried")
    parser.add_argument("--enum-cap", type=int, default=None,
                        help="largest lattice dimension for enumeration")
    parser.add_argument("--seed", type=int, default=None,
                        help="seed for randomized test-case generation "
                             "(core builders take no randomness)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="posetiles",
        description="Constructive engine and verifier for tiling product "
                    "sets and Boolean lattices with copies of a poset",
    )
    parser.add_argument("--version", action="version",
                        version=f"{TOOL_NAME} {TOOL_VERSION}")
    sub = parser.add_subparsers(dest="command")

    p_poset = sub.add_parser("poset", help="poset file operations")
    poset_sub = p_poset.add_subparsers(dest="subcommand")
    pv = poset_sub.add_parser("validate", help="validate a poset file")
    pv.add_argument("--poset", required=True)
    _add_budget_flags(pv)
    pv.set_defaults(func=cmd_poset_validate)

    p_rpart = sub.add_parser("rpart", help="r-partition certificates")
    rpart_sub = p_rpart.add_subparsers(dest="subcommand")
    rb = rpart_sub.add_parser("build")
    rb.add_argument("--poset", required=True)
    rb.add_argument("--out")
    _add_budget_flags(rb)
    rb.set_defaults(func=cmd_rpart_build)
    rv = rpart_sub.add_parser("verify")
    rv.add_argument("--cert", required=True)
    _add_budget_flags(rv)
    rv.set_defaults(func=cmd_rpart_verify)

    p_mod = sub.add_parser("modpart", help="(1 mod r)-partition certificates")
    mod_sub = p_mod.add_subparsers(dest="subcommand")
    mb = mod_sub.add_parser("build")
    mb.add_argument("--poset", required=True)
    mb.add_argument("--r", type=int, required=True)
    mb.add_argument("--out")
    _add_budget_flags(mb)
    mb.set_defaults(func=cmd_modpart_build)
    mv = mod_sub.add_parser("verify")
    mv.add_argument("--cert", required=True)
    _add_budget_flags(mv)
    mv.set_defaults(func=cmd_modpart_verify)

    p_engine = sub.add_parser("engine", help="product-system constructions")
    engine_sub = p_engine.add_subparsers(dest="subcommand")

    eo = engine_sub.add_parser("onecorner")
    eo.add_argument("--instance", required=True)
    eo.add_argument("--k", type=int, required=True)
    eo.add_argument("--i", type=int, required=True)
    eo.add_argument("--out")
    _add_budget_flags(eo)
    eo.set_defaults(func=cmd_engine_onecorner)

    em = engine_sub.add_parser("modify")
    em.add_argument("--instance", required=True)
    em.add_argument("--cert", required=True)
    em.add_argument("--i", type=int, required=True)
    em.add_argument("--out")
    _add_budget_flags(em)
    em.set_defaults(func=cmd_engine_modify)

    ec = engine_sub.add_parser("changes")
    ec.add_argument("--instance", required=True)
    ec.add_argument("--k", type=int, required=True)
    ec.add_argument("--l", type=int, required=True)
    ec.add_argument("--iset", default="")
    ec.add_argument("--jset", default="")
    ec.add_argument("--out")
    _add_budget_flags(ec)
    ec.set_defaults(func=cmd_engine_changes)

    ef = engine_sub.add_parser("fillin")
    ef.add_argument("--instance", required=True)
    ef.add_argument("--members", default="")
    ef.add_argument("--out")
    _add_budget_flags(ef)
    ef.set_defaults(func=cmd_engine_fillin)

    ey = engine_sub.add_parser("manychoices")
    ey.add_argument("--instance", required=True)
    ey.add_argument("--kbound", type=int, required=True)
    ey.add_argument("--jset", required=True)
    ey.add_argument("--out")
    _add_budget_flags(ey)
    ey.set_defaults(func=cmd_engine_manychoices)

    ema = engine_sub.add_parser("main")
    ema.add_argument("--instance", required=True)
    ema.add_argument("--out")
    _add_budget_flags(ema)
    ema.set_defaults(func=cmd_engine_main)

    eg = engine_sub.add_parser("general")
    eg.add_argument("--instance", required=True)
    eg.add_argument("--mode", choices=["auto", "plan", "full"], default="auto")
    eg.add_argument("--out")
    _add_budget_flags(eg)
    eg.set_defaults(func=cmd_engine_general)

    ek = engine_sub.add_parser("compose")
    ek.add_argument("--cert1", required=True)
    ek.add_argument("--cert2", required=True)
    ek.add_argument("--out")
    _add_budget_flags(ek)
    ek.set_defaults(func=cmd_engine_compose)

    p_oracle = sub.add_parser("oracle", help="independent brute-force searches")
    oracle_sub = p_oracle.add_subparsers(dest="subcommand")
    oc = oracle_sub.add_parser("cover")
    oc.add_argument("--poset", required=True)
    oc.add_argument("--n", type=int, required=True)
    oc.add_argument("--mode", choices=["first", "count", "all"], default="first")
    oc.add_argument("--out")
    _add_budget_flags(oc)
    oc.set_defaults(func=cmd_oracle_cover)
    ow = oracle_sub.add_parser("weak")
    ow.add_argument("--instance", required=True)
    ow.add_argument("--rmax", type=int, default=3)
    ow.add_argument("--weight-bound", type=int, default=6)
    ow.add_argument("--out")
    _add_budget_flags(ow)
    ow.set_defaults(func=cmd_oracle_weak)

    p_verify = sub.add_parser("verify", help="verify any certificate file")
    p_verify.add_argument("cert")
    _add_budget_flags(p_verify)
    p_verify.set_defaults(func=cmd_verify)

    p_report = sub.add_parser(
        "report", help="render figures and CSV tables for an artifact"
    )
    p_report.add_argument("artifact")
    p_report.add_argument("--out-dir", default=".")
    _add_budget_flags(p_report)
    p_report.set_defaults(func=cmd_report)

    return parser


def dispatch(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    if not hasattr(args, "func"):
        parser.print_help()
        return EXIT_USAGE
    try:
        return args.func(args)
    except BudgetExceededError as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (ArtifactError, ValidationError, PosetError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PosetilesError as exc:  # pragma: no cover - safety net
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))
