"""Finite posets, Boolean-lattice elements as bitmasks, and embedding search.

Elements of the lattice B(n) are subsets of {1..n} stored as integer
bitmasks, ground element j mapped to bit j-1.  A "copy" of a poset P in
B(n) is a subset of B(n) on which inclusion induces a poset isomorphic
to P; copies are encoded as sorted tuples of masks.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .config import Budgets, DEFAULT_BUDGETS
from .errors import BudgetExceededError, PosetError, ValidationError

Mask = int
Copy = tuple  # sorted tuple of masks


def mask_of(elems) -> Mask:
    """Bitmask of a collection of 1-based ground elements."""
    m = 0
    for e in elems:
        if e < 1:
            raise ValidationError(f"ground elements are 1-based, got {e}")
        m |= 1 << (e - 1)
    return m


def elems_of(mask: Mask) -> tuple[int, ...]:
    """Sorted 1-based ground elements of a bitmask."""
    out = []
    j = 1
    while mask:
        if mask & 1:
            out.append(j)
        mask >>= 1
        j += 1
    return tuple(out)


def full_mask(n: int) -> Mask:
    return (1 << n) - 1


def level(mask: Mask) -> int:
    return mask.bit_count()


def is_submask(a: Mask, b: Mask) -> bool:
    return a & b == a


def is_scattered(values, d: int) -> bool:
    """True if all pairwise gaps in ``values`` are at least ``d``."""
    vs = sorted(values)
    return all(vs[i + 1] - vs[i] >= d for i in range(len(vs) - 1))


@dataclass(frozen=True)
class Poset:
    """Finite poset over string element ids.

    ``up[e]`` is the reflexive up-set of e, so ``leq(a, b)`` is
    ``b in up[a]``.  ``linext`` is a fixed linear extension (Kahn order,
    ties broken by input position); all deterministic searches iterate
    elements in this order.
    """

    elements: tuple[str, ...]
    up: dict = field(compare=False)
    covers: tuple = ()
    top: str | None = None
    bottom: str | None = None
    linext: tuple[str, ...] = ()

    def __post_init__(self):
        rel = frozenset((a, b) for a, ups in self.up.items() for b in ups)
        object.__setattr__(self, "_rel", rel)

    def leq(self, a: str, b: str) -> bool:
        return b in self.up[a]

    def __len__(self) -> int:
        return len(self.elements)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Poset):
            return NotImplemented
        return self.elements == other.elements and self._rel == other._rel

    def __hash__(self) -> int:
        return hash((self.elements, self._rel))

    def height(self) -> int:
        """Number of elements in a longest chain."""
        best = {}
        for e in self.linext:
            best[e] = 1 + max(
                (best[f] for f in self.elements if f != e and self.leq(f, e)),
                default=0,
            )
        return max(best.values(), default=0)


def make_poset(elements, covers) -> Poset:
    """Build a validated poset from element ids and cover relations.

    Raises PosetError on duplicate ids, unknown ids in covers, or cycles.
    Top and bottom elements are detected if present.
    """
    elements = tuple(elements)
    if len(set(elements)) != len(elements):
        dupes = sorted({e for e in elements if list(elements).count(e) > 1})
        raise PosetError(f"duplicate element ids: {dupes}")
    for e in elements:
        if not isinstance(e, str):
            raise PosetError(f"element ids must be strings, got {e!r}")
    index = {e: i for i, e in enumerate(elements)}
    succ = {e: set() for e in elements}
    for pair in covers:
        a, b = pair
        if a not in index or b not in index:
            raise PosetError(f"cover {a!r} < {b!r} names an unknown element")
        if a == b:
            raise PosetError(f"cycle detected: {a!r} < {a!r}")
        succ[a].add(b)

    # Kahn topological order doubles as the cycle check.
    indeg = {e: 0 for e in elements}
    for a in elements:
        for b in succ[a]:
            indeg[b] += 1
    ready = [e for e in elements if indeg[e] == 0]
    linext = []
    while ready:
        ready.sort(key=index.__getitem__)
        e = ready.pop(0)
        linext.append(e)
        for b in sorted(succ[e], key=index.__getitem__):
            indeg[b] -= 1
            if indeg[b] == 0:
                ready.append(b)
    if len(linext) != len(elements):
        stuck = sorted(set(elements) - set(linext), key=index.__getitem__)
        raise PosetError(f"cycle detected among {stuck}")

    up = {e: {e} for e in elements}
    for e in reversed(linext):
        for b in succ[e]:
            up[e] |= up[b]
    up = {e: frozenset(s) for e, s in up.items()}

    top = bottom = None
    for e in elements:
        if all(e in up[f] for f in elements):
            top = e
        if up[e] == frozenset(elements):
            bottom = e
    return Poset(
        elements=elements,
        up=up,
        covers=tuple((a, b) for a, b in covers),
        top=top,
        bottom=bottom,
        linext=tuple(linext),
    )


def chain_poset(size: int, prefix: str = "c") -> Poset:
    ids = [f"{prefix}{i}" for i in range(1, size + 1)]
    return make_poset(ids, [(ids[i], ids[i + 1]) for i in range(size - 1)])


def diamond_poset() -> Poset:
    return make_poset(
        ["o", "a", "b", "i"], [("o", "a"), ("o", "b"), ("a", "i"), ("b", "i")]
    )


def product_poset(p: Poset, q: Poset) -> Poset:
    """Componentwise-ordered product with ids "(x,y)"."""
    ids = {}
    elements = []
    for x in p.elements:
        for y in q.elements:
            e = f"({x},{y})"
            ids[(x, y)] = e
            elements.append(e)
    covers = []
    for x in p.elements:
        for y in q.elements:
            for x2 in p.elements:
                if x2 != x and p.leq(x, x2):
                    covers.append((ids[(x, y)], ids[(x2, y)]))
            for y2 in q.elements:
                if y2 != y and q.leq(y, y2):
                    covers.append((ids[(x, y)], ids[(x, y2)]))
    return make_poset(elements, covers)


@dataclass
class Embedding:
    """Order embedding of a poset into B(dimension), image as masks."""

    source: Poset
    dimension: int
    image: dict

    def levels(self) -> tuple[int, ...]:
        return tuple(sorted(level(m) for m in self.image.values()))

    def copy(self) -> Copy:
        return tuple(sorted(self.image.values()))


def is_embedding(p: Poset, n: int, mapping: dict) -> bool:
    """True iff mapping is injective and order-preserving both ways."""
    if set(mapping) != set(p.elements):
        raise ValidationError("mapping must be total on the poset's elements")
    fm = full_mask(n)
    for m in mapping.values():
        if m < 0 or m > fm:
            raise ValidationError(f"mask {m} outside B({n})")
    if len(set(mapping.values())) != len(mapping):
        return False
    for a in p.elements:
        for b in p.elements:
            if is_submask(mapping[a], mapping[b]) != p.leq(a, b):
                return False
    return True


def _compatible(p: Poset, e: str, c: Mask, assigned: dict) -> bool:
    for e2, c2 in assigned.items():
        if p.leq(e2, e) != is_submask(c2, c):
            return False
        if p.leq(e, e2) != is_submask(c, c2):
            return False
    return True


def find_base_embedding(
    p: Poset, budgets: Budgets = DEFAULT_BUDGETS
) -> tuple[int, Embedding]:
    """Smallest-dimension embedding sending top to top and bottom to bottom.

    Dimensions are tried in increasing order; within one dimension the
    search backtracks over elements in the fixed linear extension with
    candidate masks in numeric order, so the first embedding found is
    reproducible.
    """
    if p.top is None or p.bottom is None:
        raise PosetError("poset must have greatest and least elements")
    size = len(p)
    d_min = max(p.height() - 1, (size - 1).bit_length() if size > 1 else 0, 0)
    for d in range(d_min, budgets.embed_dim_cap + 1):
        emb = _search_extreme_embedding(p, d)
        if emb is not None:
            return d, emb
    raise BudgetExceededError(
        f"no base embedding found up to dimension cap {budgets.embed_dim_cap}"
    )


def _search_extreme_embedding(p: Poset, d: int) -> Embedding | None:
    fm = full_mask(d)
    order = p.linext
    assigned: dict = {}

    def backtrack(i: int) -> bool:
        if i == len(order):
            return True
        e = order[i]
        if e == p.bottom and e == p.top:
            candidates = (0,) if fm == 0 else ()
        elif e == p.bottom:
            candidates = (0,)
        elif e == p.top:
            candidates = (fm,)
        else:
            candidates = range(fm + 1)
        for c in candidates:
            if c in assigned.values():
                continue
            if _compatible(p, e, c, assigned):
                assigned[e] = c
                if backtrack(i + 1):
                    return True
                del assigned[e]
        return False

    if backtrack(0):
        return Embedding(source=p, dimension=d, image=dict(assigned))
    return None


def scattered_embedding(p: Poset, psi: Embedding, n: int, levels_set) -> Embedding:
    """Re-embed p into B(n) with image levels equal to a scattered set.

    ``psi`` is a base embedding into B(d) preserving the extremes.  The
    target levels must form a d-scattered subset of {0..n} of size |p|,
    and n must be at least (|p|-1)*d.  Element i (ordered by psi-level,
    ties by id) keeps its psi-image on coordinates {1..d} and is padded
    with the run {d+1, ...} up to its target level.
    """
    d = psi.dimension
    a_sorted = sorted(levels_set)
    if len(a_sorted) != len(set(a_sorted)):
        raise ValidationError("target level set has repeated values")
    if len(a_sorted) != len(p):
        raise ValidationError(
            f"target level set has size {len(a_sorted)}, expected {len(p)}"
        )
    if n < (len(p) - 1) * d:
        raise ValidationError(f"dimension {n} below ({len(p)}-1)*{d}")
    if a_sorted and (a_sorted[0] < 0 or a_sorted[-1] > n):
        raise ValidationError("target levels must lie within {0..n}")
    if not is_scattered(a_sorted, d):
        raise ValidationError(f"target level set is not {d}-scattered")

    by_level = sorted(p.elements, key=lambda e: (level(psi.image[e]), e))
    image = {}
    for e, target in zip(by_level, a_sorted):
        base = psi.image[e]
        pad = target - level(base)
        image[e] = base | (((1 << pad) - 1) << d)
    emb = Embedding(source=p, dimension=n, image=image)
    if not is_embedding(p, n, image):  # pragma: no cover - proof guarantees
        raise ValidationError("internal error: scattered embedding invalid")
    return emb


def enumerate_copies(
    p: Poset, n: int, budgets: Budgets = DEFAULT_BUDGETS
) -> list[Copy]:
    """All subsets of B(n) inducing p, canonically ordered.

    Complete backtracking over images; distinct embeddings with equal
    image (automorphisms) are deduplicated.
    """
    if n > budgets.enum_dim_cap:
        raise BudgetExceededError(
            f"dimension {n} exceeds enumeration cap {budgets.enum_dim_cap}"
        )
    fm = full_mask(n)
    order = p.linext
    found = set()
    assigned: dict = {}
    nodes = 0

    def backtrack(i: int):
        nonlocal nodes
        if i == len(order):
            found.add(tuple(sorted(assigned.values())))
            return
        e = order[i]
        for c in range(fm + 1):
            nodes += 1
            if nodes > budgets.nodes:
                raise BudgetExceededError(
                    f"copy enumeration exceeded node budget {budgets.nodes}"
                )
            if c in assigned.values():
                continue
            if _compatible(p, e, c, assigned):
                assigned[e] = c
                backtrack(i + 1)
                del assigned[e]

    backtrack(0)
    return sorted(found)


def induces(p: Poset, masks) -> bool:
    """True iff inclusion on the given masks induces a poset isomorphic to p."""
    ms = sorted(set(masks))
    if len(ms) != len(p) or len(ms) != len(masks):
        return False
    order = p.linext
    assigned: dict = {}

    def backtrack(i: int) -> bool:
        if i == len(order):
            return True
        e = order[i]
        for c in ms:
            if c in assigned.values():
                continue
            if _compatible(p, e, c, assigned):
                assigned[e] = c
                if backtrack(i + 1):
                    return True
                del assigned[e]
        return False

    return backtrack(0)


def _spread(base: Mask, slots: tuple[int, ...]) -> Mask:
    """Map bit j-1 of a B(d) mask onto ground element slots[j-1]."""
    out = 0
    j = 0
    while base:
        if base & 1:
            out |= 1 << (slots[j] - 1)
        base >>= 1
        j += 1
    return out


def copy_with_extreme(
    p: Poset, psi: Embedding, n: int, x: Mask, role: str
) -> Copy:
    """Copy of p in B(n) whose greatest (role="top") or least
    (role="bottom") element is x.

    The copy lives in the interval below x (top) or above x (bottom)
    spanned by D, the d lowest-numbered ground elements of x or of its
    complement, so the output is canonical.
    """
    d = psi.dimension
    if role not in ("top", "bottom"):
        raise ValidationError(f"role must be 'top' or 'bottom', got {role!r}")
    if x < 0 or x > full_mask(n):
        raise ValidationError(f"element {x} outside B({n})")
    if role == "top":
        if level(x) < d:
            raise ValidationError(f"|x|={level(x)} < d={d} for role=top")
        slots = elems_of(x)[:d]
        base = x & ~mask_of(slots)
    else:
        if level(x) > n - d:
            raise ValidationError(f"|x|={level(x)} > n-d={n - d} for role=bottom")
        slots = elems_of(full_mask(n) & ~x)[:d]
        base = x
    return tuple(sorted(base | _spread(psi.image[e], slots) for e in p.elements))


@dataclass
class LatticeCertificate:
    """Partition of B(dimension) into poset-sense copies of ``poset``."""

    poset: Poset
    dimension: int
    tiles: tuple  # tuple of Copy
    provenance: dict | None = None


@dataclass
class LatticeReport:
    ok: bool
    checks: list
    violations: list

    def summary(self) -> str:
        lines = [f"{'PASS' if ok else 'FAIL'}  {name}" for name, ok in self.checks]
        lines += [f"violation: {v}" for v in self.violations]
        return "\n".join(lines)


def verify_lattice_partition(
    cert: LatticeCertificate,
    budgets: Budgets = DEFAULT_BUDGETS,
    max_violations: int = 10,
) -> LatticeReport:
    """Check tiles are disjoint copies of the poset covering all of B(n)."""
    n = cert.dimension
    if n > budgets.enum_dim_cap:
        raise BudgetExceededError(
            f"dimension {n} exceeds enumeration cap {budgets.enum_dim_cap}"
        )
    violations = []
    copies_ok = True
    for idx, tile in enumerate(cert.tiles):
        if not induces(cert.poset, tile):
            copies_ok = False
            if len(violations) < max_violations:
                violations.append(f"tile {idx} does not induce the poset: {tile}")
    seen = {}
    cover_ok = True
    for idx, tile in enumerate(cert.tiles):
        for m in tile:
            if m in seen:
                cover_ok = False
                if len(violations) < max_violations:
                    violations.append(
                        f"overlap at element {elems_of(m)} (tiles {seen[m]}, {idx})"
                    )
            else:
                seen[m] = idx
    for m in range(1 << n):
        if m not in seen:
            cover_ok = False
            if len(violations) < max_violations:
                violations.append(f"uncovered element {elems_of(m)}")
            break
    checks = [("tiles induce the poset", copies_ok), ("exact cover of B(n)", cover_ok)]
    return LatticeReport(ok=copies_ok and cover_ok, checks=checks, violations=violations)
