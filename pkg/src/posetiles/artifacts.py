"""Canonical file I/O for every artifact kind.

One self-describing JSON format, discriminated by a "kind" field and
carrying a format version.  Serialization is canonical (sorted keys,
sorted lists wherever order carries no meaning, compact separators), so
equal artifacts are byte-identical and save(load(x)) == x for files
produced here.
"""

from __future__ import annotations

import hashlib
import json
from fractions import Fraction
from pathlib import Path

from .engine import (
    Box,
    GeneralResult,
    GeneralStage,
    PartitionCertificate,
    ProductInstance,
    TilePlacement,
)
from .errors import ArtifactError
from .oracle import WeakFinding
from .posets import (
    Embedding,
    LatticeCertificate,
    Poset,
    elems_of,
    make_poset,
    mask_of,
)
from .weights import WeakCertificate, WeightFunction

FORMAT_VERSION = 1
TOOL_NAME = "posetiles"
TOOL_VERSION = "0.1.0"


def canonical_dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


def file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _require(obj: dict, key: str, kind: str):
    if key not in obj:
        raise ArtifactError(f"missing field {key!r} in {kind} artifact")
    return obj[key]


# ---------------------------------------------------------------- posets


def poset_to_obj(p: Poset) -> dict:
    return {
        "format": FORMAT_VERSION,
        "kind": "poset",
        "elements": list(p.elements),
        "covers": sorted([a, b] for a, b in p.covers),
    }


def obj_to_poset(obj: dict) -> Poset:
    elements = _require(obj, "elements", "poset")
    covers = _require(obj, "covers", "poset")
    return make_poset(elements, [tuple(c) for c in covers])


def parse_poset(text: str) -> Poset:
    """Parse the structured poset description (fields: elements, covers)."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ArtifactError(f"poset parse error: {exc}") from None
    return obj_to_poset(obj)


# -------------------------------------------------------------- instances


def instance_to_obj(inst: ProductInstance) -> dict:
    obj = {
        "format": FORMAT_VERSION,
        "kind": "instance",
        "ground": sorted(inst.ground),
        "family": {mid: sorted(m) for mid, m in inst.family.items()},
        "a": sorted(inst.a_set),
        "b": sorted(inst.b_set),
        "r_witness": None,
        "mod_witness": None,
    }
    if inst.r_witness is not None:
        r, ids = inst.r_witness
        obj["r_witness"] = {"r": r, "members": list(ids)}
    if inst.mod_witness is not None:
        obj["mod_witness"] = {"members": list(inst.mod_witness)}
    return obj


def obj_to_instance(obj: dict) -> ProductInstance:
    r_witness = obj.get("r_witness")
    if r_witness is not None:
        r_witness = (
            _require(r_witness, "r", "instance.r_witness"),
            tuple(_require(r_witness, "members", "instance.r_witness")),
        )
    mod_witness = obj.get("mod_witness")
    if mod_witness is not None:
        mod_witness = tuple(_require(mod_witness, "members", "instance.mod_witness"))
    return ProductInstance(
        ground=tuple(_require(obj, "ground", "instance")),
        family={
            mid: frozenset(m)
            for mid, m in _require(obj, "family", "instance").items()
        },
        a_set=frozenset(_require(obj, "a", "instance")),
        b_set=frozenset(_require(obj, "b", "instance")),
        r_witness=r_witness,
        mod_witness=mod_witness,
    )


# ------------------------------------------------------ weak certificates


def _copy_to_obj(copy) -> list:
    return [list(elems_of(m)) for m in copy]


def _obj_to_copy(obj) -> tuple:
    return tuple(sorted(mask_of(elems) for elems in obj))


def weak_cert_to_obj(cert: WeakCertificate) -> dict:
    entries = []
    for key in cert.weights.support():
        v = Fraction(cert.weights.entries[key])
        entries.append([_copy_to_obj(key), v.numerator, v.denominator])
    obj = {
        "format": FORMAT_VERSION,
        "kind": "weak-certificate",
        "partition_kind": cert.kind,
        "poset": poset_to_obj(cert.poset),
        "n": cert.n,
        "r": cert.r,
        "weights": entries,
        "base_dimension": cert.base_dimension,
        "psi": None,
        "scattered_copies": None,
        "z_weights": None,
        "provenance": cert.provenance,
    }
    if cert.psi is not None:
        obj["psi"] = {
            e: list(elems_of(m)) for e, m in sorted(cert.psi.image.items())
        }
    if cert.scattered_copies is not None:
        obj["scattered_copies"] = [
            [list(levels), _copy_to_obj(copy)]
            for levels, copy in sorted(cert.scattered_copies.items())
        ]
    if cert.z_stage is not None:
        obj["z_weights"] = [
            [_copy_to_obj(key), int(cert.z_stage.entries[key])]
            for key in cert.z_stage.support()
        ]
    return obj


def obj_to_weak_cert(obj: dict) -> WeakCertificate:
    poset = obj_to_poset(_require(obj, "poset", "weak-certificate"))
    kind = _require(obj, "partition_kind", "weak-certificate")
    entries = {}
    for item in _require(obj, "weights", "weak-certificate"):
        copy, num, den = item
        entries[_obj_to_copy(copy)] = Fraction(num, den)
    domain = "Q+" if kind == "r-partition" else "Z+"
    weights = WeightFunction(entries, domain=domain)
    psi = None
    if obj.get("psi") is not None:
        image = {e: mask_of(elems) for e, elems in obj["psi"].items()}
        psi = Embedding(
            source=poset, dimension=obj.get("base_dimension") or 0, image=image
        )
    scattered = None
    if obj.get("scattered_copies") is not None:
        scattered = {
            tuple(levels): _obj_to_copy(copy)
            for levels, copy in obj["scattered_copies"]
        }
    z_stage = None
    if obj.get("z_weights") is not None:
        z_stage = WeightFunction(
            {_obj_to_copy(copy): v for copy, v in obj["z_weights"]}, domain="Z"
        )
    return WeakCertificate(
        kind=kind,
        poset=poset,
        n=_require(obj, "n", "weak-certificate"),
        r=_require(obj, "r", "weak-certificate"),
        weights=weights,
        base_dimension=obj.get("base_dimension"),
        psi=psi,
        scattered_copies=scattered,
        z_stage=z_stage,
        provenance=obj.get("provenance"),
    )


# ------------------------------------------------------ tile certificates


def tile_cert_to_obj(cert: PartitionCertificate) -> dict:
    region = sorted(
        [sorted(f) for f in box.factors] for box in cert.region
    )
    tiles = sorted(
        [t.member, t.host, [[c, v] for c, v in t.fixed]] for t in cert.tiles
    )
    return {
        "format": FORMAT_VERSION,
        "kind": "tile-certificate",
        "ground": sorted(cert.ground),
        "members": {mid: sorted(m) for mid, m in cert.members.items()},
        "dimension": cert.dimension,
        "region": region,
        "tiles": tiles,
        "notes": cert.notes,
        "provenance": cert.provenance,
    }


def obj_to_tile_cert(obj: dict) -> PartitionCertificate:
    members = {
        mid: frozenset(m)
        for mid, m in _require(obj, "members", "tile-certificate").items()
    }
    tiles = []
    for item in _require(obj, "tiles", "tile-certificate"):
        member, host, fixed = item
        if member not in members:
            raise ArtifactError(
                f"tile references undefined member id {member!r}"
            )
        tiles.append(
            TilePlacement(member, host, tuple((c, v) for c, v in fixed))
        )
    region = [
        Box(tuple(frozenset(f) for f in factors))
        for factors in _require(obj, "region", "tile-certificate")
    ]
    return PartitionCertificate(
        ground=tuple(_require(obj, "ground", "tile-certificate")),
        members=members,
        dimension=_require(obj, "dimension", "tile-certificate"),
        region=region,
        tiles=tiles,
        notes=obj.get("notes") or {},
        provenance=obj.get("provenance"),
    )


# --------------------------------------------------- lattice certificates


def lattice_cert_to_obj(cert: LatticeCertificate) -> dict:
    return {
        "format": FORMAT_VERSION,
        "kind": "lattice-certificate",
        "poset": poset_to_obj(cert.poset),
        "dimension": cert.dimension,
        "tiles": sorted(_copy_to_obj(t) for t in cert.tiles),
        "provenance": cert.provenance,
    }


def obj_to_lattice_cert(cert_obj: dict) -> LatticeCertificate:
    n = _require(cert_obj, "dimension", "lattice-certificate")
    tiles = []
    for tile in _require(cert_obj, "tiles", "lattice-certificate"):
        masks = _obj_to_copy(tile)
        if masks and masks[-1] >= (1 << n):
            raise ArtifactError(
                f"tile element {tile} does not fit in dimension {n}"
            )
        tiles.append(masks)
    return LatticeCertificate(
        poset=obj_to_poset(_require(cert_obj, "poset", "lattice-certificate")),
        dimension=n,
        tiles=tuple(sorted(tiles)),
        provenance=cert_obj.get("provenance"),
    )


# ----------------------------------------------------------------- plans


def plan_to_obj(result: GeneralResult) -> dict:
    return {
        "format": FORMAT_VERSION,
        "kind": "general-plan",
        "label": "plan-only",
        "n": result.n,
        "cover": list(result.cover),
        "stages": [
            {
                "index": s.index,
                "p": s.p,
                "q": s.q,
                "a_union": list(s.a_union),
                "next_cover_id": s.next_cover_id,
                "main_certificate": tile_cert_to_obj(s.main_certificate),
            }
            for s in result.stages
        ],
        "provenance": result.provenance,
    }


def obj_to_plan(obj: dict) -> GeneralResult:
    stages = [
        GeneralStage(
            index=_require(s, "index", "general-plan.stage"),
            p=_require(s, "p", "general-plan.stage"),
            q=_require(s, "q", "general-plan.stage"),
            a_union=tuple(_require(s, "a_union", "general-plan.stage")),
            next_cover_id=_require(s, "next_cover_id", "general-plan.stage"),
            main_certificate=obj_to_tile_cert(
                _require(s, "main_certificate", "general-plan.stage")
            ),
        )
        for s in _require(obj, "stages", "general-plan")
    ]
    return GeneralResult(
        mode="plan",
        n=_require(obj, "n", "general-plan"),
        cover=tuple(_require(obj, "cover", "general-plan")),
        stages=stages,
        certificate=None,
        provenance=obj.get("provenance"),
    )


# -------------------------------------------------------------- findings


def findings_to_obj(ground, family, findings, r_max, weight_bound) -> dict:
    return {
        "format": FORMAT_VERSION,
        "kind": "findings",
        "ground": sorted(ground),
        "family": {mid: sorted(m) for mid, m in family.items()},
        "r_max": r_max,
        "weight_bound": weight_bound,
        "findings": [
            {"kind": f.kind, "r": f.r, "weights": dict(sorted(f.weights.items()))}
            for f in findings
        ],
    }


def obj_to_findings(obj: dict) -> list[WeakFinding]:
    return [
        WeakFinding(kind=f["kind"], r=f["r"], weights=dict(f["weights"]))
        for f in _require(obj, "findings", "findings")
    ]


# ------------------------------------------------------------ dispatching

_TO_OBJ = {
    Poset: poset_to_obj,
    ProductInstance: instance_to_obj,
    WeakCertificate: weak_cert_to_obj,
    PartitionCertificate: tile_cert_to_obj,
    LatticeCertificate: lattice_cert_to_obj,
    GeneralResult: plan_to_obj,
}

_FROM_OBJ = {
    "poset": obj_to_poset,
    "instance": obj_to_instance,
    "weak-certificate": obj_to_weak_cert,
    "tile-certificate": obj_to_tile_cert,
    "lattice-certificate": obj_to_lattice_cert,
    "general-plan": obj_to_plan,
    "findings": obj_to_findings,
}


def artifact_to_obj(artifact) -> dict:
    for cls, fn in _TO_OBJ.items():
        if isinstance(artifact, cls):
            return fn(artifact)
    if isinstance(artifact, dict) and "kind" in artifact:
        return artifact
    raise ArtifactError(f"cannot serialize object of type {type(artifact).__name__}")


def save_artifact(path, artifact, provenance: dict | None = None) -> str:
    """Write an artifact in canonical form; returns the file digest."""
    obj = artifact_to_obj(artifact)
    if provenance is not None:
        obj = dict(obj)
        obj["provenance"] = provenance
    text = canonical_dumps(obj)
    Path(path).write_text(text)
    return hashlib.sha256(text.encode()).hexdigest()


def load_artifact(path):
    """Load any artifact file; the kind field selects the decoder."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ArtifactError(f"cannot read {path}: {exc}") from None
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ArtifactError(
            f"parse error in {path} at line {exc.lineno} column {exc.colno}: "
            f"{exc.msg}"
        ) from None
    if not isinstance(obj, dict):
        raise ArtifactError(f"{path}: artifact must be a JSON object")
    kind = _require(obj, "kind", "artifact")
    version = _require(obj, "format", "artifact")
    if version != FORMAT_VERSION:
        raise ArtifactError(
            f"{path}: unsupported format version {version} (expected "
            f"{FORMAT_VERSION})"
        )
    if kind not in _FROM_OBJ:
        raise ArtifactError(f"{path}: unknown artifact kind {kind!r}")
    return _FROM_OBJ[kind](obj)


def make_provenance(command: str, inputs: dict, budgets) -> dict:
    """Provenance block embedded in emitted artifacts: the digest of
    every input the artifact depends on, plus tool and budgets."""
    return {
        "tool": f"{TOOL_NAME} {TOOL_VERSION}",
        "command": command,
        "inputs": {str(p): d for p, d in sorted(inputs.items())},
        "budgets": {
            "embed_dim_cap": budgets.embed_dim_cap,
            "enum_dim_cap": budgets.enum_dim_cap,
            "weak_dim_cap": budgets.weak_dim_cap,
            "cells": budgets.cells,
            "nodes": budgets.nodes,
        },
    }
