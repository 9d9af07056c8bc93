"""Product-set tiling engine: corner boxes, the recursive constructions,
and exact cell-level certificate verification.

Cells are tuples over a finite labeled ground set S.  Every tile is a
clone of a 1-dimensional member: one host coordinate ranges over the
member set, all other coordinates are pinned to constants.  Regions are
disjoint unions of coordinate-wise boxes.

Member ids "A", "B" and "S" are reserved for the instance's two chosen
subsets and the full ground set; each certificate carries its own
id-to-set bindings so it verifies standalone.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .config import Budgets, DEFAULT_BUDGETS
from .errors import BudgetExceededError, ValidationError
from .posets import LatticeCertificate, product_poset

RESERVED_IDS = ("A", "B", "S", "U")


@dataclass(frozen=True)
class Box:
    """Cartesian product of per-coordinate subsets of the ground set."""

    factors: tuple

    def __post_init__(self):
        object.__setattr__(
            self, "factors", tuple(frozenset(f) for f in self.factors)
        )

    @property
    def dimension(self) -> int:
        return len(self.factors)

    def is_empty(self) -> bool:
        return any(not f for f in self.factors)

    def size(self) -> int:
        return math.prod(len(f) for f in self.factors)

    def cells(self):
        return itertools.product(*(sorted(f) for f in self.factors))

    def intersects(self, other: "Box") -> bool:
        return all(f & g for f, g in zip(self.factors, other.factors))

    def contains_cell(self, cell) -> bool:
        return all(v in f for v, f in zip(cell, self.factors))


def box_minus(box: Box, hole: Box) -> list[Box]:
    """Difference of two boxes as a disjoint list of boxes."""
    if box.is_empty():
        return []
    if hole.is_empty() or not box.intersects(hole):
        return [box]
    out = []
    prefix: list = []
    for j in range(box.dimension):
        rest = box.factors[j] - hole.factors[j]
        if rest:
            out.append(
                Box(tuple(prefix) + (rest,) + box.factors[j + 1 :])
            )
        prefix.append(box.factors[j] & hole.factors[j])
    return out


def region_difference(base: Box, holes) -> list[Box]:
    """Disjoint boxes covering base minus the union of the holes."""
    boxes = [base] if not base.is_empty() else []
    for hole in holes:
        boxes = [piece for b in boxes for piece in box_minus(b, hole)]
    return boxes


def region_cells(boxes) -> int:
    return sum(b.size() for b in boxes)


@dataclass(frozen=True)
class TilePlacement:
    """Clone of a member: host coordinate free, all others pinned."""

    member: str
    host: int
    fixed: tuple  # sorted tuple of (coordinate, value)

    def __post_init__(self):
        object.__setattr__(self, "fixed", tuple(sorted(self.fixed)))

    def cells(self, member_set):
        pinned = dict(self.fixed)
        dim = len(self.fixed) + 1
        for v in sorted(member_set):
            yield tuple(
                v if c == self.host else pinned[c] for c in range(1, dim + 1)
            )


@dataclass
class ProductInstance:
    """Ground set, subset family, chosen subsets A and B, and witnesses.

    ``r_witness`` is (r, member id list) with every ground element in
    exactly r of the listed members, counted with repetition.
    ``mod_witness`` is a member id list with every element in 1 + r*a
    members for some a >= 0.
    """

    ground: tuple
    family: dict
    a_set: frozenset
    b_set: frozenset
    r_witness: tuple | None = None
    mod_witness: tuple | None = None

    def __post_init__(self):
        self.ground = tuple(sorted(set(self.ground)))
        self.family = {mid: frozenset(m) for mid, m in self.family.items()}
        self.a_set = frozenset(self.a_set)
        self.b_set = frozenset(self.b_set)
        self.validate()

    @property
    def s_set(self) -> frozenset:
        return frozenset(self.ground)

    @property
    def u_set(self) -> frozenset:
        return self.a_set | self.b_set

    @property
    def ac(self) -> frozenset:
        return self.u_set - self.a_set

    @property
    def bc(self) -> frozenset:
        return self.u_set - self.b_set

    def validate(self):
        if not self.ground:
            raise ValidationError("ground set is empty")
        types = {type(x) for x in self.ground}
        if len(types) > 1:
            raise ValidationError("ground elements must share one type")
        sset = self.s_set
        for mid, members in self.family.items():
            if mid in RESERVED_IDS:
                raise ValidationError(f"family id {mid!r} is reserved")
            if not isinstance(mid, str):
                raise ValidationError(f"family ids must be strings, got {mid!r}")
            if not members:
                raise ValidationError(f"family member {mid!r} is empty")
            if not members <= sset:
                raise ValidationError(f"member {mid!r} is not a subset of S")
        if not self.a_set <= sset or not self.b_set <= sset:
            raise ValidationError("A and B must be subsets of S")
        if self.r_witness is not None:
            r, ids = self.r_witness
            self.r_witness = (int(r), tuple(ids))
            if r < 1:
                raise ValidationError(f"witness r must be positive, got {r}")
            for mid in ids:
                if mid not in self.family:
                    raise ValidationError(f"r-witness names unknown member {mid!r}")
            for x in self.ground:
                count = sum(1 for mid in ids if x in self.family[mid])
                if count != r:
                    raise ValidationError(
                        f"r-witness multiplicity of {x!r} is {count}, expected {r}"
                    )
        if self.mod_witness is not None:
            if self.r_witness is None:
                raise ValidationError("mod witness requires an r-witness for r")
            r = self.r_witness[0]
            self.mod_witness = tuple(self.mod_witness)
            for mid in self.mod_witness:
                if mid not in self.family:
                    raise ValidationError(
                        f"mod-witness names unknown member {mid!r}"
                    )
            for x in self.ground:
                count = sum(1 for mid in self.mod_witness if x in self.family[mid])
                if count < 1 or (count - 1) % r != 0:
                    raise ValidationError(
                        f"mod-witness multiplicity of {x!r} is {count}, "
                        f"not 1 mod {r}"
                    )

    def member_set(self, mid: str) -> frozenset:
        if mid == "A":
            return self.a_set
        if mid == "B":
            return self.b_set
        if mid == "S":
            return self.s_set
        if mid == "U":
            return self.u_set
        try:
            return self.family[mid]
        except KeyError:
            raise ValidationError(f"unknown member id {mid!r}") from None

    def ab_members(self) -> dict:
        return {"A": self.a_set, "B": self.b_set}


@dataclass
class PartitionCertificate:
    """Tile list claimed to exactly cover the region."""

    ground: tuple
    members: dict
    dimension: int
    region: tuple
    tiles: tuple
    notes: dict = field(default_factory=dict)
    provenance: dict | None = None

    def __post_init__(self):
        self.ground = tuple(self.ground)
        self.members = {mid: frozenset(m) for mid, m in self.members.items()}
        self.region = tuple(self.region)
        self.tiles = tuple(self.tiles)

    def member_set(self, mid: str) -> frozenset:
        try:
            return self.members[mid]
        except KeyError:
            raise ValidationError(
                f"certificate references undefined member id {mid!r}"
            ) from None

    def cell_count(self) -> int:
        return region_cells(self.region)


def corner_box(i: int, d: int, inst: ProductInstance) -> Box:
    """Corner region: factor i is the complement of B, others the
    complement of A (all complements taken inside A union B)."""
    if i < 0 or i > d:
        raise ValidationError(f"corner index {i} outside 0..{d}")
    if i == 0:
        return Box((inst.ac,) * d)
    return Box((inst.ac,) * (i - 1) + (inst.bc,) + (inst.ac,) * (d - i))


def _u_box(inst: ProductInstance, k: int) -> Box:
    return Box((inst.u_set,) * k)


def _shift_tiles(tiles, extra_fixed) -> list[TilePlacement]:
    return [
        TilePlacement(t.member, t.host, t.fixed + tuple(extra_fixed))
        for t in tiles
    ]


def permute_certificate(cert: PartitionCertificate, perm: dict) -> PartitionCertificate:
    """Apply a coordinate permutation (1-based mapping) to a certificate."""
    full = {c: perm.get(c, c) for c in range(1, cert.dimension + 1)}
    if sorted(full.values()) != list(range(1, cert.dimension + 1)):
        raise ValidationError("coordinate permutation is not a bijection")
    boxes = []
    for box in cert.region:
        factors = [None] * cert.dimension
        for c in range(1, cert.dimension + 1):
            factors[full[c] - 1] = box.factors[c - 1]
        boxes.append(Box(tuple(factors)))
    tiles = [
        TilePlacement(
            t.member, full[t.host], tuple((full[c], v) for c, v in t.fixed)
        )
        for t in cert.tiles
    ]
    notes = dict(cert.notes)
    applied = notes.get("permutations", [])
    notes["permutations"] = applied + [sorted(perm.items())]
    return PartitionCertificate(
        ground=cert.ground, members=dict(cert.members),
        dimension=cert.dimension, region=boxes, tiles=tiles, notes=notes,
    )


def _check_ab_tiles(cert: PartitionCertificate, op: str):
    bad = sorted({t.member for t in cert.tiles} - {"A", "B"})
    if bad:
        raise ValidationError(f"{op} requires tiles of A and B only, found {bad}")


def partition_blowup(
    cert: PartitionCertificate,
    inst: ProductInstance,
    budgets: Budgets = DEFAULT_BUDGETS,
) -> PartitionCertificate:
    """Lift a partition of U^k minus a hole X to one of U^(k+1) minus
    X times the A-complement: clone the input into every low slice and
    lay A-tiles over the rest."""
    _check_ab_tiles(cert, "blowup")
    k = cert.dimension
    u = inst.u_set
    if len(u) ** (k + 1) > budgets.cells:
        raise BudgetExceededError(
            f"blowup to dimension {k + 1} exceeds cell budget {budgets.cells}"
        )
    tiles: list[TilePlacement] = []
    for y in sorted(inst.ac):
        tiles += _shift_tiles(cert.tiles, [(k + 1, y)])
    if inst.a_set:
        for ucell in _u_box(inst, k).cells():
            tiles.append(
                TilePlacement("A", k + 1, tuple(enumerate(ucell, start=1)))
            )
    region = [Box(b.factors + (inst.ac,)) for b in cert.region if not b.is_empty()]
    if inst.a_set and u:
        region.append(Box((u,) * k + (inst.a_set,)))
    return PartitionCertificate(
        ground=inst.ground, members=inst.ab_members(), dimension=k + 1,
        region=region, tiles=tiles,
    )


def partition_onecorner(
    k: int, i: int, inst: ProductInstance, budgets: Budgets = DEFAULT_BUDGETS
) -> PartitionCertificate:
    """Partition U^k minus one corner into clones of A and B."""
    if k < 1:
        raise ValidationError(f"k must be at least 1, got {k}")
    if i < 0 or i > k:
        raise ValidationError(f"corner index {i} outside 0..{k}")
    if i == k and k >= 2:
        # Swap the corner into coordinate 1 and permute the result back.
        base = partition_onecorner(k, 1, inst, budgets)
        return permute_certificate(base, {1: k, k: 1})
    if k == 1:
        member = "A" if i == 0 else "B"
        mset = inst.member_set(member)
        tiles = [TilePlacement(member, 1, ())] if mset else []
        region = region_difference(_u_box(inst, 1), [corner_box(i, 1, inst)])
        return PartitionCertificate(
            ground=inst.ground, members=inst.ab_members(), dimension=1,
            region=region, tiles=tiles,
        )
    sub = partition_onecorner(k - 1, i, inst, budgets)
    return partition_blowup(sub, inst, budgets)


def _hole_boxes(cert: PartitionCertificate, inst: ProductInstance) -> list[Box]:
    return region_difference(_u_box(inst, cert.dimension), cert.region)


def partition_modify(
    cert: PartitionCertificate,
    i: int,
    inst: ProductInstance,
    budgets: Budgets = DEFAULT_BUDGETS,
) -> PartitionCertificate:
    """Lift a partition of U^k minus X while trading the corner i kept
    inside X for the new top corner of U^(k+1)."""
    _check_ab_tiles(cert, "modify")
    k = cert.dimension
    if i < 0 or i > k:
        raise ValidationError(f"corner index {i} outside 0..{k}")
    corner = corner_box(i, k, inst)
    if any(corner.intersects(b) for b in cert.region):
        raise ValidationError(f"corner {i} is not contained in the hole")
    u = inst.u_set
    if len(u) ** (k + 1) > budgets.cells:
        raise BudgetExceededError(
            f"modify to dimension {k + 1} exceeds cell budget {budgets.cells}"
        )

    tiles: list[TilePlacement] = []
    if inst.bc and k >= 1:
        oc0 = partition_onecorner(k, 0, inst, budgets)
        for y in sorted(inst.bc):
            tiles += _shift_tiles(oc0.tiles, [(k + 1, y)])
    mid = inst.a_set & inst.b_set
    if mid and k >= 1:
        oci = partition_onecorner(k, i, inst, budgets)
        for y in sorted(mid):
            tiles += _shift_tiles(oci.tiles, [(k + 1, y)])
    if inst.b_set and not corner.is_empty():
        for cell in corner.cells():
            tiles.append(
                TilePlacement("B", k + 1, tuple(enumerate(cell, start=1)))
            )
    for y in sorted(inst.ac):
        tiles += _shift_tiles(cert.tiles, [(k + 1, y)])

    holes = [Box(b.factors + (inst.ac,)) for b in _hole_boxes(cert, inst)]
    holes.append(corner_box(k + 1, k + 1, inst))
    region = region_difference(_u_box(inst, k + 1), holes)
    carved_back = Box(corner.factors + (inst.ac,))
    if not carved_back.is_empty():
        region.append(carved_back)
    return PartitionCertificate(
        ground=inst.ground, members=inst.ab_members(), dimension=k + 1,
        region=region, tiles=tiles,
    )


def partition_multiplechanges(
    k: int,
    l: int,
    iset,
    jset,
    inst: ProductInstance,
    budgets: Budgets = DEFAULT_BUDGETS,
) -> PartitionCertificate:
    """Partition U^(k+l) minus the low block with corners in J added and
    corners in I carved back out; |I| = |J|."""
    iset = sorted(set(iset))
    jset = sorted(set(jset))
    if k < 0 or l < 0:
        raise ValidationError("dimensions must be nonnegative")
    if len(iset) != len(jset):
        raise ValidationError(f"|I| = {len(iset)} differs from |J| = {len(jset)}")
    if iset and (iset[0] < 0 or iset[-1] > k):
        raise ValidationError(f"I = {iset} not within 0..{k}")
    if jset and (jset[0] <= k or jset[-1] > k + l):
        raise ValidationError(f"J = {jset} not within {k + 1}..{k + l}")
    if l == 0:
        return PartitionCertificate(
            ground=inst.ground, members=inst.ab_members(), dimension=k,
            region=(), tiles=(),
        )
    if k + l in jset:
        i_star = iset[0]
        sub = partition_multiplechanges(
            k, l - 1, iset[1:], [j for j in jset if j != k + l], inst, budgets
        )
        return partition_modify(sub, i_star, inst, budgets)
    sub = partition_multiplechanges(k, l - 1, iset, jset, inst, budgets)
    return partition_blowup(sub, inst, budgets)


def partition_fillin(
    member_ids,
    inst: ProductInstance,
    budgets: Budgets = DEFAULT_BUDGETS,
) -> PartitionCertificate:
    """Partition S x U^t minus the staircase of member-by-corner blocks.

    Coordinate 1 ranges over S; coordinates 2..t+1 over U.  Block 0 is
    S times the all-Ac corner, block i is member P_i times corner i.
    """
    member_ids = tuple(member_ids)
    for mid in member_ids:
        if mid not in inst.family:
            raise ValidationError(f"fill-in member {mid!r} is not in the family")
    t = len(member_ids)
    sset = inst.s_set
    u = inst.u_set
    if len(sset) * max(len(u), 1) ** t > budgets.cells:
        raise BudgetExceededError(
            f"fill-in with t={t} exceeds cell budget {budgets.cells}"
        )

    def q_box(idx: int) -> Box:
        first = sset if idx == 0 else inst.family[member_ids[idx - 1]]
        return Box((first,) + corner_box(idx, t, inst).factors)

    region = region_difference(
        Box((sset,) + (u,) * t), [q_box(idx) for idx in range(t + 1)]
    )
    members = dict(inst.ab_members())
    for mid in member_ids:
        members[mid] = inst.family[mid]

    if t == 0:
        return PartitionCertificate(
            ground=inst.ground, members=members, dimension=1,
            region=region, tiles=(),
        )

    sub = partition_fillin(member_ids[:-1], inst, budgets)
    tiles: list[TilePlacement] = []
    for y in sorted(inst.ac):
        tiles += _shift_tiles(sub.tiles, [(t + 1, y)])
    last = inst.family[member_ids[-1]]
    if inst.a_set:
        uncut = region_difference(
            Box((sset,) + (u,) * (t - 1)),
            [Box((last,) + corner_box(0, t - 1, inst).factors)],
        )
        for box in uncut:
            for cell in box.cells():
                tiles.append(
                    TilePlacement("A", t + 1, tuple(enumerate(cell, start=1)))
                )
    mid_band = inst.a_set & inst.b_set
    if mid_band:
        low_corner = corner_box(0, t - 1, inst)
        if not low_corner.is_empty():
            for ucell in low_corner.cells():
                for y in sorted(mid_band):
                    fixed = tuple(enumerate(ucell, start=2)) + ((t + 1, y),)
                    tiles.append(TilePlacement(member_ids[-1], 1, fixed))
    return PartitionCertificate(
        ground=inst.ground, members=members, dimension=t + 1,
        region=region, tiles=tiles,
    )


def manychoices_dimension(k_bound: int, inst: ProductInstance) -> int:
    """Smallest l compatible with the r-witness: k + ceil((k-1)m/r)."""
    if inst.r_witness is None:
        raise ValidationError("instance carries no r-witness")
    r, ids = inst.r_witness
    m = len(ids)
    if k_bound < 1:
        raise ValidationError(f"k bound must be positive, got {k_bound}")
    return k_bound + -(-(k_bound - 1) * m // r)


def partition_manychoices(
    k_bound: int,
    inst: ProductInstance,
    jset,
    budgets: Budgets = DEFAULT_BUDGETS,
) -> PartitionCertificate:
    """Partition S x (U^l minus the corners indexed by J).

    Coordinate 1 ranges over S.  The construction works for the right
    aligned corner set; a stored coordinate permutation carries it to
    the requested J.
    """
    if inst.r_witness is None:
        raise ValidationError("instance carries no r-witness")
    r, r_ids = inst.r_witness
    m = len(r_ids)
    jset = sorted(set(jset))
    t = len(jset)
    if t < 1:
        raise ValidationError("J must be nonempty")
    if t > k_bound:
        raise ValidationError(f"|J| = {t} exceeds the bound k = {k_bound}")
    if (t - 1) % r != 0:
        raise ValidationError(f"|J| = {t} is not 1 mod r = {r}")
    l = manychoices_dimension(k_bound, inst)
    if jset[0] < 1 or jset[-1] > l:
        raise ValidationError(f"J = {jset} not within 1..{l}")
    sset, u = inst.s_set, inst.u_set
    if len(sset) * max(len(u), 1) ** l > budgets.cells:
        raise BudgetExceededError(
            f"many-choices at l={l} exceeds cell budget {budgets.cells}"
        )

    a = (t - 1) // r
    am = a * m
    fill_ids = tuple(r_ids) * a
    j_canon = list(range(l - t + 1, l + 1))

    c_fill = partition_fillin(fill_ids, inst, budgets)
    tiles: list[TilePlacement] = []
    for y_tuple in itertools.product(sorted(inst.ac), repeat=l - am):
        extra = tuple(enumerate(y_tuple, start=am + 2))
        tiles += _shift_tiles(c_fill.tiles, extra)

    for z in sorted(sset):
        i_z = [0] + [
            idx for idx in range(1, am + 1) if z in inst.family[fill_ids[idx - 1]]
        ]
        assert len(i_z) == t
        c_z = partition_multiplechanges(am, l - am, i_z, j_canon, inst, budgets)
        shifted = [
            TilePlacement(
                tile.member,
                tile.host + 1,
                tuple((c + 1, v) for c, v in tile.fixed) + ((1, z),),
            )
            for tile in c_z.tiles
        ]
        tiles += shifted

    members = dict(inst.ab_members())
    for mid in fill_ids:
        members[mid] = inst.family[mid]
    region = [
        Box((sset,) + b.factors)
        for b in region_difference(
            _u_box(inst, l), [corner_box(j, l, inst) for j in jset]
        )
    ]
    cert = PartitionCertificate(
        ground=inst.ground, members=members, dimension=l + 1,
        region=region, tiles=tiles,
    )
    if jset != j_canon:
        rest_from = [c for c in range(1, l + 1) if c not in j_canon]
        rest_to = [c for c in range(1, l + 1) if c not in jset]
        mapping = dict(zip(j_canon, jset)) | dict(zip(rest_from, rest_to))
        perm = {c + 1: mapping[c] + 1 for c in range(1, l + 1)}
        tiles = [
            TilePlacement(
                t_.member,
                perm.get(t_.host, t_.host),
                tuple((perm.get(c, c), v) for c, v in t_.fixed),
            )
            for t_ in cert.tiles
        ]
        cert = PartitionCertificate(
            ground=cert.ground, members=cert.members, dimension=cert.dimension,
            region=region, tiles=tiles,
            notes={"u_permutation": sorted((a_, b_) for a_, b_ in mapping.items())},
        )
    return cert


def partition_main(
    inst: ProductInstance, budgets: Budgets = DEFAULT_BUDGETS
) -> tuple[int, PartitionCertificate]:
    """Partition S^2 x U^n into clones of family members, A and B.

    Coordinates 1 and 2 range over S, the rest over U.  Corner i of the
    U-block is paired with the i-th mod-witness member laid along
    coordinate 2; every remaining slice is handled by many-choices.
    """
    if inst.r_witness is None or inst.mod_witness is None:
        raise ValidationError("instance must carry both witnesses")
    r, _ = inst.r_witness
    mod_ids = inst.mod_witness
    k = len(mod_ids)
    n = manychoices_dimension(k, inst)
    sset, u = inst.s_set, inst.u_set
    if len(sset) ** 2 * max(len(u), 1) ** n > budgets.cells:
        raise BudgetExceededError(
            f"main certificate needs {len(sset) ** 2 * len(u) ** n} cells, "
            f"budget {budgets.cells}"
        )

    tiles: list[TilePlacement] = []
    members = dict(inst.ab_members())
    for idx, mid in enumerate(mod_ids, start=1):
        members[mid] = inst.family[mid]
        corner = corner_box(idx, n, inst)
        if corner.is_empty():
            continue
        for s in sorted(sset):
            for cell in corner.cells():
                fixed = ((1, s),) + tuple(enumerate(cell, start=3))
                tiles.append(TilePlacement(mid, 2, fixed))

    for y in sorted(sset):
        j_y = [
            idx for idx, mid in enumerate(mod_ids, start=1)
            if y in inst.family[mid]
        ]
        c_y = partition_manychoices(k, inst, j_y, budgets)
        for tile in c_y.tiles:
            host = tile.host if tile.host == 1 else tile.host + 1
            fixed = tuple((c if c == 1 else c + 1, v) for c, v in tile.fixed)
            tiles.append(TilePlacement(tile.member, host, fixed + ((2, y),)))
        for mid, mset in c_y.members.items():
            members.setdefault(mid, mset)

    region = [Box((sset, sset) + (u,) * n)]
    cert = PartitionCertificate(
        ground=inst.ground, members=members, dimension=n + 2,
        region=region, tiles=tiles,
    )
    return n, cert


def _tile_coords(tile: TilePlacement, member_set) -> list:
    """Cells of a tile as explicit (coordinate, value) listings."""
    out = []
    for v in sorted(member_set):
        out.append(tuple(sorted(tile.fixed + ((tile.host, v),))))
    return out


def partition_buildbigger(
    cp: PartitionCertificate,
    cq: PartitionCertificate,
    inst: ProductInstance,
    budgets: Budgets = DEFAULT_BUDGETS,
) -> PartitionCertificate:
    """Combine a partition of S^p over members plus a distinguished set A
    with one of S^2 x A^q to cover S^(pq+2).

    Blocks made purely of A-tiles of the first certificate are filled
    with clones of the second; every other block is filled member-wise
    along its first non-A factor.
    """
    sset = inst.s_set
    p = cp.dimension
    if list(cp.region) != [Box((sset,) * p)]:
        raise ValidationError("first certificate must cover a full power of S")
    q = cq.dimension - 2
    if q < 1:
        raise ValidationError("second certificate must have dimension >= 3")
    if "A" not in cp.members:
        raise ValidationError("first certificate carries no A binding")
    a_set = cp.members["A"]
    expected = Box((sset, sset) + (a_set,) * q)
    if list(cq.region) != [expected]:
        raise ValidationError(
            "second certificate must cover S^2 x A^q for the first "
            "certificate's A"
        )
    for tile in cp.tiles:
        if tile.member != "A" and tile.member not in inst.family:
            raise ValidationError(
                f"first certificate tile member {tile.member!r} is neither "
                "a family member nor A"
            )
    n_out = p * q + 2
    if len(sset) ** n_out > budgets.cells:
        raise BudgetExceededError(
            f"output needs {len(sset) ** n_out} cells, budget {budgets.cells}"
        )

    def offset(block: int) -> int:
        return 2 + (block - 1) * p

    tiles: list[TilePlacement] = []
    for combo in itertools.product(cp.tiles, repeat=q):
        if all(t.member == "A" for t in combo):
            block_fixed = []
            for b_idx, z in enumerate(combo, start=1):
                block_fixed += [(offset(b_idx) + c, v) for c, v in z.fixed]
            for tile in cq.tiles:
                if tile.host <= 2:
                    host = tile.host
                else:
                    z = combo[tile.host - 3]
                    host = offset(tile.host - 2) + z.host
                fixed = list(block_fixed)
                for c, v in tile.fixed:
                    if c <= 2:
                        fixed.append((c, v))
                    else:
                        z = combo[c - 3]
                        fixed.append((offset(c - 2) + z.host, v))
                tiles.append(TilePlacement(tile.member, host, tuple(fixed)))
        else:
            j_star = next(
                b for b, t in enumerate(combo, start=1) if t.member != "A"
            )
            z_star = combo[j_star - 1]
            host = offset(j_star) + z_star.host
            star_fixed = [(offset(j_star) + c, v) for c, v in z_star.fixed]
            other_cells = [
                _tile_coords(z, cp.member_set(z.member) if z.member != "A" else a_set)
                for b, z in enumerate(combo, start=1)
                if b != j_star
            ]
            other_blocks = [b for b in range(1, q + 1) if b != j_star]
            for s1 in sorted(sset):
                for s2 in sorted(sset):
                    for choice in itertools.product(*other_cells):
                        fixed = [(1, s1), (2, s2)] + list(star_fixed)
                        for b_idx, cell in zip(other_blocks, choice):
                            fixed += [(offset(b_idx) + c, v) for c, v in cell]
                        tiles.append(
                            TilePlacement(z_star.member, host, tuple(fixed))
                        )

    members = {
        mid: mset for mid, mset in cq.members.items()
    }
    for tile in cp.tiles:
        if tile.member != "A":
            members.setdefault(tile.member, inst.family[tile.member])
    region = [Box((sset,) * n_out)]
    return PartitionCertificate(
        ground=inst.ground, members=members, dimension=n_out,
        region=region, tiles=tiles, notes={"p": p, "q": q},
    )


@dataclass
class GeneralStage:
    index: int
    p: int
    q: int
    a_union: tuple
    next_cover_id: str
    main_certificate: PartitionCertificate


@dataclass
class GeneralResult:
    """Outcome of the full product-power construction.

    mode "full" carries the expanded certificate for S^n; mode "plan"
    is the labeled plan-only fallback carrying the dimension sequence
    and the per-stage certificates.
    """

    mode: str
    n: int
    cover: tuple
    stages: list
    certificate: PartitionCertificate | None = None
    provenance: dict | None = None


def _greedy_cover(inst: ProductInstance) -> list[str]:
    r, ids = inst.r_witness
    support = []
    for mid in ids:
        if mid not in support:
            support.append(mid)
    covered: set = set()
    cover = []
    while covered != set(inst.ground):
        candidates = [mid for mid in support if inst.family[mid] - covered]
        if not candidates:  # pragma: no cover - witness guarantees coverage
            raise ValidationError("r-witness support does not cover S")
        best = min(candidates, key=lambda mid: (-len(inst.family[mid] - covered), mid))
        cover.append(best)
        covered |= inst.family[best]
        support.remove(best)
    return cover


def _rewrite_member(cert: PartitionCertificate, old: str, new: str, new_set):
    tiles = [
        TilePlacement(new if t.member == old else t.member, t.host, t.fixed)
        for t in cert.tiles
    ]
    members = {mid: m for mid, m in cert.members.items() if mid != old}
    members[new] = frozenset(new_set)
    return PartitionCertificate(
        ground=cert.ground, members=members, dimension=cert.dimension,
        region=cert.region, tiles=tiles, notes=dict(cert.notes),
    )


def partition_general(
    inst: ProductInstance,
    mode: str = "auto",
    budgets: Budgets = DEFAULT_BUDGETS,
) -> GeneralResult:
    """Partition a power of S into clones of family members.

    Reverse induction over a greedy cover extracted from the r-witness
    support; each stage runs the main construction and the block
    composition.  When the projected cell count exceeds the budget the
    labeled plan (dimension sequence plus verified per-stage
    certificates) is returned instead of the expansion.
    """
    if mode not in ("auto", "full", "plan"):
        raise ValidationError(f"unknown mode {mode!r}")
    if inst.r_witness is None or inst.mod_witness is None:
        raise ValidationError("instance must carry both witnesses")
    sset = inst.s_set

    full_ids = sorted(mid for mid, m in inst.family.items() if m == sset)
    if full_ids:
        mid = full_ids[0]
        cert = PartitionCertificate(
            ground=inst.ground, members={mid: sset}, dimension=1,
            region=[Box((sset,))], tiles=[TilePlacement(mid, 1, ())],
        )
        return GeneralResult(mode="full", n=1, cover=(mid,), stages=[],
                             certificate=cert)

    cover = _greedy_cover(inst)
    kc = len(cover)
    q = manychoices_dimension(len(inst.mod_witness), inst)
    p = {kc: 1}
    for i in range(kc - 1, 0, -1):
        p[i] = p[i + 1] * q + 2

    stages = []
    for i in range(kc - 1, 0, -1):
        a_i = frozenset().union(*(inst.family[c] for c in cover[:i]))
        b_next = cover[i]
        inst_i = ProductInstance(
            ground=inst.ground, family=dict(inst.family),
            a_set=a_i, b_set=inst.family[b_next],
            r_witness=inst.r_witness, mod_witness=inst.mod_witness,
        )
        q_i, main_cert = partition_main(inst_i, budgets)
        assert q_i == q
        main_cert = _rewrite_member(main_cert, "B", b_next, inst.family[b_next])
        stages.append(
            GeneralStage(
                index=i, p=p[i], q=q, a_union=tuple(sorted(a_i)),
                next_cover_id=b_next, main_certificate=main_cert,
            )
        )

    n_final = p[1]
    projected = len(sset) ** n_final
    if mode == "plan" or (mode == "auto" and projected > budgets.cells):
        return GeneralResult(mode="plan", n=n_final, cover=tuple(cover),
                             stages=stages)
    if projected > budgets.cells:
        raise BudgetExceededError(
            f"full expansion needs {projected} cells, budget {budgets.cells}; "
            "rerun with plan mode"
        )

    a_top = frozenset(sset)
    cert = PartitionCertificate(
        ground=inst.ground, members={"A": a_top}, dimension=1,
        region=[Box((sset,))], tiles=[TilePlacement("A", 1, ())],
    )
    for stage in stages:
        cert = partition_buildbigger(cert, stage.main_certificate, inst, budgets)
        assert cert.dimension == stage.p
    cert = _rewrite_member(cert, "A", cover[0], inst.family[cover[0]])
    return GeneralResult(mode="full", n=n_final, cover=tuple(cover),
                         stages=stages, certificate=cert)


@dataclass
class TileReport:
    ok: bool
    checks: list
    violations: list
    cells: int = 0

    def summary(self) -> str:
        lines = [f"{'PASS' if ok else 'FAIL'}  {name}" for name, ok in self.checks]
        lines += [f"violation: {v}" for v in self.violations]
        return "\n".join(lines)


def verify_certificate(
    cert: PartitionCertificate,
    budgets: Budgets = DEFAULT_BUDGETS,
    max_violations: int = 10,
) -> TileReport:
    """Exhaustive cell-level check of a tile certificate.

    Confirms every tile is a well-formed clone of a known member, the
    region boxes are disjoint, and the tiles cover the region exactly
    once with nothing outside it.
    """
    dim = cert.dimension
    violations: list[str] = []

    domains: list[list] = [set() for _ in range(dim)]
    for box in cert.region:
        if box.dimension != dim:
            raise ValidationError(
                f"region box has dimension {box.dimension}, certificate {dim}"
            )
        for j, f in enumerate(box.factors):
            domains[j] |= f
    structural_ok = True
    for idx, tile in enumerate(cert.tiles):
        coords = sorted(c for c, _ in tile.fixed) + [tile.host]
        if sorted(coords) != list(range(1, dim + 1)):
            structural_ok = False
            if len(violations) < max_violations:
                violations.append(
                    f"tile {idx}: fixed coordinates plus host do not cover "
                    f"1..{dim} exactly"
                )
            continue
        try:
            mset = cert.member_set(tile.member)
        except ValidationError:
            structural_ok = False
            if len(violations) < max_violations:
                violations.append(
                    f"tile {idx}: unknown member id {tile.member!r}"
                )
            continue
        if not mset:
            structural_ok = False
            if len(violations) < max_violations:
                violations.append(f"tile {idx}: member {tile.member!r} is empty")
            continue
        domains[tile.host - 1] |= mset
        for c, v in tile.fixed:
            domains[c - 1].add(v)

    domains = [sorted(d) for d in domains]
    index_of = [{v: i for i, v in enumerate(d)} for d in domains]
    ambient = math.prod(len(d) for d in domains) if dim else 1
    if ambient > budgets.cells:
        raise BudgetExceededError(
            f"verification needs {ambient} cells, budget {budgets.cells}"
        )
    strides = [0] * dim
    acc = 1
    for j in range(dim - 1, -1, -1):
        strides[j] = acc
        acc *= len(domains[j])

    def decode(flat: int) -> tuple:
        out = []
        for j in range(dim):
            out.append(domains[j][flat // strides[j]])
            flat %= strides[j]
        return tuple(out)

    region_count = np.zeros(ambient, dtype=np.uint16)
    for box in cert.region:
        if box.is_empty():
            continue
        idx = np.zeros(1, dtype=np.int64)
        for j, f in enumerate(box.factors):
            vals = np.array(
                [index_of[j][v] * strides[j] for v in sorted(f)], dtype=np.int64
            )
            idx = (idx[:, None] + vals[None, :]).ravel()
        np.add.at(region_count, idx, 1)
    region_disjoint = True
    overlap_boxes = np.nonzero(region_count > 1)[0]
    if overlap_boxes.size:
        region_disjoint = False
        for flat in overlap_boxes[:max_violations]:
            violations.append(f"region boxes overlap at cell {decode(int(flat))}")

    coverage = np.zeros(ambient, dtype=np.uint32)
    if structural_ok:
        for tile in cert.tiles:
            mset = cert.member_set(tile.member)
            base = sum(strides[c - 1] * index_of[c - 1][v] for c, v in tile.fixed)
            vals = np.array(
                [index_of[tile.host - 1][v] for v in sorted(mset)],
                dtype=np.int64,
            )
            np.add.at(coverage, base + vals * strides[tile.host - 1], 1)

    inside = region_count > 0
    if structural_ok:
        over = np.nonzero(coverage > 1)[0]
        uncovered = np.nonzero(inside & (coverage == 0))[0]
        outside = np.nonzero(~inside & (coverage > 0))[0]
        disjoint_ok = over.size == 0
        exact_ok = uncovered.size == 0 and outside.size == 0
        for flat in over[:max_violations]:
            violations.append(f"overlap at cell {decode(int(flat))}")
        for flat in uncovered[:max_violations]:
            violations.append(f"uncovered region cell {decode(int(flat))}")
        for flat in outside[:max_violations]:
            violations.append(f"covered cell outside region {decode(int(flat))}")
    else:
        disjoint_ok = exact_ok = False

    checks = [
        ("tiles are well-formed clones", structural_ok),
        ("region boxes pairwise disjoint", region_disjoint),
        ("tiles pairwise disjoint", disjoint_ok),
        ("tiles cover the region exactly", exact_ok),
    ]
    ok = structural_ok and region_disjoint and disjoint_ok and exact_ok
    return TileReport(
        ok=ok, checks=checks, violations=violations, cells=int(inside.sum())
    )


def product_compose(
    c1: LatticeCertificate, c2: LatticeCertificate
) -> LatticeCertificate:
    """Partition of B(n+m) into copies of the product poset, formed by
    pairwise products of the two input partitions' tiles."""
    n = c1.dimension
    poset = product_poset(c1.poset, c2.poset)
    tiles = []
    for t1 in c1.tiles:
        for t2 in c2.tiles:
            tiles.append(
                tuple(sorted(m1 | (m2 << n) for m1 in t1 for m2 in t2))
            )
    return LatticeCertificate(
        poset=poset, dimension=n + c2.dimension, tiles=tuple(sorted(tiles))
    )
