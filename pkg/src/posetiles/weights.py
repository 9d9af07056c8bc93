"""Weight functions on set families and weak-partition certificate builders.

A weight function is a sparse map from family members (canonically
encoded as sorted tuples) to exact weights.  Two certificate kinds are
built here:

* r-partition: positive rational weights on copies of P in B(n) whose
  level totals equal the binomial coefficients exactly, so the
  symmetrized weighting gives every element multiplicity 1.
* mod-partition: integer weights on copies of P in B(n), |P| a power of
  two, whose multiplicity is exactly 1 everywhere before reduction and
  congruent to 1 mod r after reduction into {0..r-1}.

All arithmetic is exact; no floating point anywhere.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

from .config import Budgets, DEFAULT_BUDGETS
from .errors import BudgetExceededError, PosetError, ValidationError
from .posets import (
    Copy,
    Embedding,
    Poset,
    copy_with_extreme,
    find_base_embedding,
    full_mask,
    induces,
    is_scattered,
    level,
    scattered_embedding,
)

Key = tuple  # canonical member encoding: sorted tuple of points


@dataclass
class WeightFunction:
    """Sparse exact weights on a family; ``domain`` is "Q+", "Z+" or "Z"."""

    entries: dict
    domain: str = "Q+"

    def __post_init__(self):
        if self.domain not in ("Q+", "Z+", "Z"):
            raise ValidationError(f"unknown weight domain {self.domain!r}")
        cleaned = {}
        for key, value in self.entries.items():
            if value == 0:
                continue
            if self.domain in ("Q+", "Z+") and value < 0:
                raise ValidationError(
                    f"negative weight {value} not allowed in domain {self.domain}"
                )
            if self.domain in ("Z+", "Z") and Fraction(value).denominator != 1:
                raise ValidationError(f"non-integer weight {value} in {self.domain}")
            cleaned[tuple(key)] = value
        self.entries = cleaned

    def support(self):
        return sorted(self.entries)

    def total(self):
        return sum(self.entries.values())


def multiplicity(w: WeightFunction, x):
    """Total weight of the members containing x."""
    return sum(v for key, v in w.entries.items() if x in key)


def multiplicity_over(w: WeightFunction, ys):
    return sum(multiplicity(w, y) for y in ys)


def level_profile(w: WeightFunction, n: int) -> dict:
    """Per-level multiplicity totals of a weight function on copies in B(n)."""
    profile = {k: Fraction(0) for k in range(n + 1)}
    for key, v in w.entries.items():
        for mask in key:
            profile[level(mask)] += v
    return profile


def symmetrized_multiplicity(w: WeightFunction, n: int, x: int):
    """Multiplicity of x under the average of w over all coordinate
    permutations, via the closed form N_w(L_k) / C(n,k)."""
    k = level(x)
    return Fraction(level_profile(w, n)[k], math.comb(n, k))


def permute_mask(mask: int, perm: tuple[int, ...]) -> int:
    """Image of a mask under a permutation of ground elements.

    ``perm[j-1]`` is where ground element j is sent (1-based).
    """
    out = 0
    j = 1
    while mask:
        if mask & 1:
            out |= 1 << (perm[j - 1] - 1)
        mask >>= 1
        j += 1
    return out


def symmetrize(w: WeightFunction, n: int) -> WeightFunction:
    """Explicit average of w over all n! coordinate permutations."""
    if w.domain == "Z":
        raise ValidationError("symmetrization is defined for nonnegative weights")
    entries: dict = {}
    count = 0
    for perm in itertools.permutations(range(1, n + 1)):
        count += 1
        for key, v in w.entries.items():
            pk = tuple(sorted(permute_mask(m, perm) for m in key))
            entries[pk] = entries.get(pk, Fraction(0)) + Fraction(v)
    return WeightFunction(
        {k: v / count for k, v in entries.items()}, domain="Q+"
    )


def greedy_t_subset_weights(f: dict, t: int) -> WeightFunction:
    """Weights on t-subsets of X realizing prescribed multiplicities.

    Requires t * max f <= sum f.  After scaling to integers the builder
    repeatedly picks the t-set A consisting of the current maxima padded
    with the largest remaining values (ties to the smallest point) and
    decrements it by the largest step that keeps every value nonnegative
    and the maximum at most sum/t.  Each phase either zeroes a point or
    promotes an outside point to the maximum, so there are at most
    |X| + t + 1 phases and the support stays small.
    """
    if t < 1:
        raise ValidationError(f"t must be positive, got {t}")
    points = sorted(f)
    values = {x: Fraction(f[x]) for x in points}
    if any(v < 0 for v in values.values()):
        raise ValidationError("multiplicity targets must be nonnegative")
    total = sum(values.values())
    if total == 0:
        return WeightFunction({}, domain="Q+")
    if t > len(points):
        raise ValidationError(f"t={t} exceeds |X|={len(points)} with nonzero targets")
    peak = max(values.values())
    if t * peak > total:
        raise ValidationError(
            f"hypothesis violated: t*max = {t * peak} > sum = {total}"
        )

    scale = t * math.lcm(*(v.denominator for v in values.values()))
    g = {x: int(v * scale) for x, v in values.items()}
    remaining = sum(g.values())
    assert remaining % t == 0
    n_phases = 0
    accum: dict = {}
    while remaining > 0:
        n_phases += 1
        assert n_phases <= len(points) + t + 1, "phase bound exceeded"
        cap = remaining // t
        forced = [x for x in points if g[x] == cap]
        pad = sorted(
            (x for x in points if g[x] > 0 and g[x] < cap),
            key=lambda x: (-g[x], x),
        )
        chosen = forced + pad[: t - len(forced)]
        assert len(chosen) == t
        key = tuple(sorted(chosen))
        inside_min = min(g[x] for x in chosen)
        outside = [g[x] for x in points if x not in set(chosen)]
        step = inside_min if not outside else min(inside_min, cap - max(outside))
        assert step >= 1
        accum[key] = accum.get(key, 0) + step
        for x in chosen:
            g[x] -= step
        remaining -= step * t

    return WeightFunction(
        {key: Fraction(v, scale) for key, v in accum.items()}, domain="Q+"
    )


def split_scattered(bset, d: int) -> list[tuple[int, ...]]:
    """Partition a sorted k-set into d scattered sets by taking every
    d-th element starting from each offset."""
    if d < 1:
        raise ValidationError(f"d must be positive, got {d}")
    bs = sorted(bset)
    if len(bs) % d != 0:
        raise ValidationError(f"{d} does not divide |B| = {len(bs)}")
    pieces = [tuple(bs[i::d]) for i in range(d)]
    assert all(is_scattered(piece, d) for piece in pieces)
    return pieces


@dataclass
class WeakCertificate:
    """Weight-function certificate for a weak partition of B(n).

    kind "r-partition": weights are Q+ and the level totals equal
    C(n, i) exactly; ``r`` is n! times the lcm of the denominators.
    kind "mod-partition": weights are the reduction into {0..r-1} of the
    integer stage ``z_stage`` which has multiplicity exactly 1
    everywhere.
    """

    kind: str
    poset: Poset
    n: int
    r: int
    weights: WeightFunction
    base_dimension: int | None = None
    psi: Embedding | None = None
    scattered_copies: dict | None = None  # level tuple -> Copy
    z_stage: WeightFunction | None = None
    provenance: dict | None = None


def build_r_certificate(
    p: Poset, budgets: Budgets = DEFAULT_BUDGETS
) -> WeakCertificate:
    """r-partition certificate: level totals equal to binomials exactly.

    Pipeline: base embedding dimension d, k = |P| d, the smallest n with
    k * C(n, ceil(n/2)) <= 2^n, greedy weights on k-subsets of {0..n}
    hitting f(i) = C(n, i), split into d-scattered level sets, one
    canonical scattered copy per level set.
    """
    if p.top is None or p.bottom is None:
        raise PosetError("poset must have greatest and least elements")
    size = len(p)
    if size == 1:
        n = 1
        w = WeightFunction({(0,): Fraction(1), (1,): Fraction(1)}, domain="Q+")
        return WeakCertificate(
            kind="r-partition", poset=p, n=n, r=math.factorial(n), weights=w,
            base_dimension=0, psi=None, scattered_copies=None,
        )
    d, psi = find_base_embedding(p, budgets)
    k = size * d
    n = None
    for cand in range(1, budgets.weak_dim_cap + 1):
        if k * math.comb(cand, -(-cand // 2)) <= 2**cand:
            n = cand
            break
    if n is None:
        raise BudgetExceededError(
            f"no dimension up to {budgets.weak_dim_cap} satisfies the "
            f"binomial inequality for k={k}"
        )

    targets = {i: Fraction(math.comb(n, i)) for i in range(n + 1)}
    w_prime = greedy_t_subset_weights(targets, k)

    w_double: dict = {}
    for bset, v in w_prime.entries.items():
        for piece in split_scattered(bset, d):
            w_double[piece] = w_double.get(piece, Fraction(0)) + v

    copies: dict = {}
    entries: dict = {}
    for levels_set in sorted(w_double):
        copy = scattered_embedding(p, psi, n, levels_set).copy()
        copies[levels_set] = copy
        entries[copy] = w_double[levels_set]
    w = WeightFunction(entries, domain="Q+")

    denom_lcm = math.lcm(*(v.denominator for v in w.entries.values()))
    return WeakCertificate(
        kind="r-partition", poset=p, n=n, r=math.factorial(n) * denom_lcm,
        weights=w, base_dimension=d, psi=psi, scattered_copies=copies,
    )


def reduce_mod_r(w: WeightFunction, r: int) -> WeightFunction:
    """Replace every weight by its residue in {0..r-1}."""
    if r < 1:
        raise ValidationError(f"r must be positive, got {r}")
    return WeightFunction({k: v % r for k, v in w.entries.items()}, domain="Z+")


class _ModMoves:
    """Bookkeeping for the integer-stage construction of a mod certificate.

    All realized functions are integer combinations of copy indicators.
    Moves available at dimension n = 2d-1:

    * top(x), |x| >= d: indicator of x minus indicator of the full set,
      via a copy with greatest element x and its top swapped out.
    * bottom(x), |x| <= n-d: indicator of x minus indicator of the empty
      set, symmetric construction.
    * bridge: indicator of the full set minus indicator of the empty
      set.  The two zones meet nowhere, so the bridge is assembled from
      a pair of copies that differ in a single mid element placed low in
      one and high in the other.
    """

    def __init__(self, p: Poset, psi: Embedding, n: int):
        self.p = p
        self.psi = psi
        self.n = n
        self.d = psi.dimension
        self.x_top = full_mask(n)
        self.weights: dict = {}
        self._swap = None

    def _add(self, copy: Copy, c: int):
        self.weights[copy] = self.weights.get(copy, 0) + c

    def top_move(self, x: int, c: int):
        """Add c * (ind{x} - ind{top of B(n)}) to the realized function."""
        if x == self.x_top or c == 0:
            return
        a = copy_with_extreme(self.p, self.psi, self.n, x, "top")
        swapped = tuple(sorted(m for m in a if m != x)) + (self.x_top,)
        self._add(a, c)
        self._add(tuple(sorted(swapped)), -c)

    def bottom_move(self, x: int, c: int):
        """Add c * (ind{x} - ind{bottom of B(n)})."""
        if x == 0 or c == 0:
            return
        a = copy_with_extreme(self.p, self.psi, self.n, x, "bottom")
        swapped = tuple(sorted(m for m in a if m != x)) + (0,)
        self._add(a, c)
        self._add(tuple(sorted(swapped)), -c)

    def _swap_pair(self):
        """Two copies differing in one element on opposite sides of level d.

        Start from the base copy on coordinates {1..d} with its top
        replaced by the global top; the image of a maximal non-top
        element can then absorb every extra coordinate without touching
        the rest, moving from level <= d-1 up to level >= d.
        """
        if self._swap is not None:
            return self._swap
        p, psi, n, d = self.p, self.psi, self.n, self.d
        if len(p) < 3 or n <= d:
            raise ValidationError("no swap pair exists for this poset")
        maximal = [
            e
            for e in p.elements
            if e != p.top
            and all(f in (e, p.top) for f in p.elements if p.leq(e, f))
        ]
        star = sorted(maximal)[0]
        base = [psi.image[e] for e in p.elements]
        t_low = full_mask(d)
        extra = full_mask(n) & ~t_low
        a1 = tuple(sorted([m for m in base if m != t_low] + [self.x_top]))
        u = psi.image[star]
        v = u | extra
        a2 = tuple(sorted([m for m in a1 if m != u] + [v]))
        assert induces(p, a1) and induces(p, a2)
        self._swap = (a1, a2, u, v)
        return self._swap

    def bridge_move(self, c: int):
        """Add c * (ind{top of B(n)} - ind{bottom of B(n)})."""
        if c == 0:
            return
        a1, a2, u, v = self._swap_pair()
        self.bottom_move(u, c)
        self._add(a1, -c)
        self._add(a2, c)
        self.top_move(v, -c)

    def transfer(self, x: int, y: int, c: int):
        """Add c * (ind{x} - ind{y})."""
        d = self.d
        x_high, y_high = level(x) >= d, level(y) >= d
        if x_high and y_high:
            self.top_move(x, c)
            self.top_move(y, -c)
        elif not x_high and not y_high:
            self.bottom_move(x, c)
            self.bottom_move(y, -c)
        elif x_high:
            self.top_move(x, c)
            self.bridge_move(c)
            self.bottom_move(y, -c)
        else:
            self.bottom_move(x, c)
            self.bridge_move(-c)
            self.top_move(y, -c)


def build_mod_certificate(
    p: Poset, r: int, budgets: Budgets = DEFAULT_BUDGETS
) -> WeakCertificate:
    """(1 mod r)-partition certificate for a poset of power-of-two size.

    Builds an integer stage with multiplicity exactly 1 at every element
    of B(2d-1): a single copy carries weight 2^(n-k') and the deficit is
    routed with elementary moves, pairing surplus and deficit cells
    greedily by level.  The emitted weights are the residues mod r.
    """
    if r < 1:
        raise ValidationError(f"r must be positive, got {r}")
    if p.top is None or p.bottom is None:
        raise PosetError("poset must have greatest and least elements")
    size = len(p)
    if size & (size - 1):
        raise ValidationError(f"|P| = {size} is not a power of two")
    k_exp = size.bit_length() - 1

    d, psi = find_base_embedding(p, budgets)
    n = max(2 * d - 1, 0)
    if n > budgets.enum_dim_cap:
        raise BudgetExceededError(
            f"mod certificate needs dimension {n} > cap {budgets.enum_dim_cap}"
        )

    if size == 1:
        z_entries = {(x,): 1 for x in range(1 << n)}
        z_stage = WeightFunction(z_entries, domain="Z")
        return WeakCertificate(
            kind="mod-partition", poset=p, n=n, r=r,
            weights=reduce_mod_r(z_stage, r), base_dimension=d, psi=psi,
            z_stage=z_stage,
        )

    base_copy = copy_with_extreme(p, psi, n, full_mask(n), "top")
    moves = _ModMoves(p, psi, n)
    moves._add(base_copy, 2 ** (n - k_exp))

    counts = {x: 0 for x in range(1 << n)}
    for m in base_copy:
        counts[m] += 2 ** (n - k_exp)
    need = [(x, 1 - c) for x, c in counts.items() if c < 1]
    excess = [(x, c - 1) for x, c in counts.items() if c > 1]
    need.sort(key=lambda t: (level(t[0]), t[0]))
    excess.sort(key=lambda t: (level(t[0]), t[0]))

    excess = [list(t) for t in excess]
    for x, amount in need:
        while amount > 0:
            pick = min(
                (e for e in excess if e[1] > 0),
                key=lambda e: (abs(level(e[0]) - level(x)), level(e[0]), e[0]),
            )
            c = min(amount, pick[1])
            moves.transfer(x, pick[0], c)
            pick[1] -= c
            amount -= c

    z_stage = WeightFunction(dict(moves.weights), domain="Z")
    for x in range(1 << n):
        if multiplicity(z_stage, x) != 1:  # pragma: no cover - construction
            raise ValidationError(f"internal error: z-stage multiplicity at {x}")
    return WeakCertificate(
        kind="mod-partition", poset=p, n=n, r=r,
        weights=reduce_mod_r(z_stage, r), base_dimension=d, psi=psi,
        z_stage=z_stage,
    )


@dataclass
class WeakReport:
    ok: bool
    checks: list
    violations: list

    def summary(self) -> str:
        lines = [f"{'PASS' if ok else 'FAIL'}  {name}" for name, ok in self.checks]
        lines += [f"violation: {v}" for v in self.violations]
        return "\n".join(lines)


def verify_weak_certificate(
    cert: WeakCertificate,
    budgets: Budgets = DEFAULT_BUDGETS,
    max_violations: int = 20,
) -> WeakReport:
    """Recompute every claimed identity of a weak certificate.

    r-partition: all level totals against binomials, plus for n <= 5 a
    materialized permutation average checked elementwise.  mod: the
    residue of the multiplicity at every element of B(n), plus the exact
    integer stage when present.
    """
    checks = []
    violations = []
    fm = full_mask(cert.n)

    def masks_check(w: WeightFunction) -> bool:
        ok = True
        for key in w.support():
            if any(m < 0 or m > fm for m in key):
                ok = False
                if len(violations) < max_violations:
                    violations.append(
                        f"support member outside B({cert.n}): {key}"
                    )
        return ok

    def copies_check(w: WeightFunction) -> bool:
        if len(w.entries) > 10_000:
            return True  # too large to re-derive; the sum checks still apply
        ok = True
        for key in w.support():
            if not induces(cert.poset, key):
                ok = False
                if len(violations) < max_violations:
                    violations.append(f"support member is not a copy: {key}")
        return ok

    masks_ok = masks_check(cert.weights)
    if cert.z_stage is not None:
        masks_ok = masks_check(cert.z_stage) and masks_ok
    checks.append(("support members lie inside B(n)", masks_ok))
    if not masks_ok:
        return WeakReport(ok=False, checks=checks, violations=violations)

    if cert.kind == "r-partition":
        profile = level_profile(cert.weights, cert.n)
        levels_ok = True
        for i in range(cert.n + 1):
            target = math.comb(cert.n, i)
            if profile[i] != target:
                levels_ok = False
                if len(violations) < max_violations:
                    violations.append(
                        f"level {i}: total {profile[i]} != C({cert.n},{i}) = {target}"
                    )
        checks.append(("level totals equal binomials", levels_ok))
        checks.append(("support members induce the poset", copies_check(cert.weights)))
        if cert.n <= 5:
            sym = symmetrize(cert.weights, cert.n)
            sym_ok = True
            for x in range(1 << cert.n):
                if multiplicity(sym, x) != 1:
                    sym_ok = False
                    if len(violations) < max_violations:
                        violations.append(
                            f"permutation average multiplicity at {x} is "
                            f"{multiplicity(sym, x)} != 1"
                        )
            checks.append(("materialized permutation average is 1", sym_ok))
    elif cert.kind == "mod-partition":
        if (1 << cert.n) > budgets.cells:
            raise BudgetExceededError(
                f"2^{cert.n} elements exceed cell budget {budgets.cells}"
            )
        range_ok = all(0 <= v < cert.r for v in cert.weights.entries.values())
        checks.append(("weights reduced into {0..r-1}", range_ok))
        mod_ok = True
        for x in range(1 << cert.n):
            if multiplicity(cert.weights, x) % cert.r != 1 % cert.r:
                mod_ok = False
                if len(violations) < max_violations:
                    violations.append(
                        f"multiplicity at {x} is "
                        f"{multiplicity(cert.weights, x)}, not 1 mod {cert.r}"
                    )
        checks.append(("multiplicity is 1 mod r everywhere", mod_ok))
        if cert.z_stage is not None:
            z_ok = True
            for x in range(1 << cert.n):
                if multiplicity(cert.z_stage, x) != 1:
                    z_ok = False
                    if len(violations) < max_violations:
                        violations.append(
                            f"integer stage multiplicity at {x} is "
                            f"{multiplicity(cert.z_stage, x)} != 1"
                        )
            checks.append(("integer stage multiplicity is exactly 1", z_ok))
            resid_ok = all(
                (multiplicity(cert.z_stage, x) - multiplicity(cert.weights, x))
                % cert.r
                == 0
                for x in range(1 << cert.n)
            )
            checks.append(("reduction preserves residues", resid_ok))
            checks.append(
                ("support members induce the poset", copies_check(cert.z_stage))
            )
    else:
        raise ValidationError(f"unknown certificate kind {cert.kind!r}")

    ok = all(flag for _, flag in checks)
    return WeakReport(ok=ok, checks=checks, violations=violations)
