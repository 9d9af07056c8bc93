"""Independent brute-force machinery: exact-cover search and bounded
weak-partition witness search.

These searches never share code paths with the constructive builders,
so agreement between the two is a real cross-check.  UNSAT and budget
exhaustion are distinct outcomes: a search that runs out of nodes makes
no claim.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .config import Budgets, DEFAULT_BUDGETS
from .errors import BudgetExceededError, ValidationError
from .posets import (
    LatticeCertificate,
    Poset,
    enumerate_copies,
)


@dataclass
class CoverProblem:
    """Universe and candidate subsets for exact cover."""

    universe: tuple
    candidates: dict

    def __post_init__(self):
        self.universe = tuple(self.universe)
        if len(set(self.universe)) != len(self.universe):
            raise ValidationError("cover universe has repeated elements")
        uni = set(self.universe)
        self.candidates = {
            cid: frozenset(members) for cid, members in self.candidates.items()
        }
        for cid, members in self.candidates.items():
            if not members:
                raise ValidationError(f"candidate {cid!r} is empty")
            if not members <= uni:
                raise ValidationError(f"candidate {cid!r} leaves the universe")


class _CoverSearch:
    """Deterministic Algorithm X style backtracking over candidate sets.

    Column selection: uncovered element with the fewest remaining
    candidates, ties broken by universe order; candidates tried in
    sorted id order.
    """

    def __init__(self, problem: CoverProblem, budgets: Budgets):
        self.order = {x: i for i, x in enumerate(problem.universe)}
        self.by_elem = {x: [] for x in problem.universe}
        self.candidates = problem.candidates
        for cid in sorted(problem.candidates):
            for x in problem.candidates[cid]:
                self.by_elem[x].append(cid)
        self.budgets = budgets
        self.nodes = 0
        self.solutions: list = []
        self.count = 0

    def run(self, mode: str):
        uncovered = set(self.order)
        active = {cid: True for cid in self.candidates}
        chosen: list = []
        self._search(uncovered, active, chosen, mode)
        return self

    def _search(self, uncovered, active, chosen, mode) -> bool:
        self.nodes += 1
        if self.nodes > self.budgets.nodes:
            raise BudgetExceededError(
                f"exact cover search exceeded node budget {self.budgets.nodes}"
            )
        if not uncovered:
            if mode == "count":
                self.count += 1
                return False
            self.solutions.append(sorted(chosen))
            return mode == "first"
        pivot = min(
            uncovered,
            key=lambda x: (
                sum(1 for cid in self.by_elem[x] if active[cid]),
                self.order[x],
            ),
        )
        for cid in self.by_elem[pivot]:
            if not active[cid]:
                continue
            members = self.candidates[cid]
            if not members <= uncovered:
                continue
            disabled = []
            for x in members:
                for other in self.by_elem[x]:
                    if active[other]:
                        active[other] = False
                        disabled.append(other)
            chosen.append(cid)
            uncovered -= members
            done = self._search(uncovered, active, chosen, mode)
            uncovered |= members
            chosen.pop()
            for other in disabled:
                active[other] = True
            if done:
                return True
        return False


def exact_cover_solve(
    problem: CoverProblem,
    mode: str = "first",
    budgets: Budgets = DEFAULT_BUDGETS,
):
    """Solve an exact-cover instance.

    mode "first": one solution as a sorted candidate id list, or None
    for UNSAT.  mode "count": the number of exact covers.  mode "all":
    every solution, canonically sorted.
    """
    if mode not in ("first", "count", "all"):
        raise ValidationError(f"unknown mode {mode!r}")
    search = _CoverSearch(problem, budgets).run(mode)
    if mode == "count":
        return search.count
    if mode == "first":
        return search.solutions[0] if search.solutions else None
    return sorted(search.solutions)


def naive_cover_count(problem: CoverProblem) -> int:
    """Reference count by enumerating all candidate subsets."""
    ids = sorted(problem.candidates)
    if len(ids) > 20:
        raise ValidationError("naive count only supports up to 20 candidates")
    uni = set(problem.universe)
    count = 0
    for size in range(len(ids) + 1):
        for combo in itertools.combinations(ids, size):
            picked = [problem.candidates[cid] for cid in combo]
            if sum(len(p) for p in picked) != len(uni):
                continue
            union: set = set()
            for p in picked:
                union |= p
            if union == uni:
                count += 1
    return count


def direct_lattice_partition(
    p: Poset,
    n: int,
    mode: str = "first",
    budgets: Budgets = DEFAULT_BUDGETS,
):
    """Partition B(n) into poset-sense copies by exact-cover search.

    Returns a LatticeCertificate (or a list of them for mode "all"),
    None for UNSAT, or the solution count for mode "count".
    """
    copies = enumerate_copies(p, n, budgets)
    problem = CoverProblem(
        universe=tuple(range(1 << n)),
        candidates={f"t{idx:06d}": set(c) for idx, c in enumerate(copies)},
    )
    result = exact_cover_solve(problem, mode, budgets)
    if mode == "count":
        return result

    def to_cert(solution) -> LatticeCertificate:
        tiles = tuple(
            sorted(tuple(sorted(problem.candidates[cid])) for cid in solution)
        )
        return LatticeCertificate(poset=p, dimension=n, tiles=tiles)

    if mode == "first":
        return None if result is None else to_cert(result)
    return [to_cert(sol) for sol in result]


@dataclass
class WeakFinding:
    """One witness found by the exhaustive weight search."""

    kind: str  # "exact-partition" | "r-partition" | "mod-partition"
    r: int
    weights: dict  # member id -> nonnegative integer weight

    def as_list(self, family_order) -> list:
        """Witness as an id list with repetition matching the weights."""
        out = []
        for mid in family_order:
            out += [mid] * self.weights.get(mid, 0)
        return out


def weak_partition_search(
    ground,
    family: dict,
    r_max: int,
    weight_bound: int,
) -> list[WeakFinding]:
    """Exhaustive search for weak-partition witnesses with integer
    weights of total at most ``weight_bound``.

    Reports, for each r up to r_max, the first weight vector (in
    lexicographic order over the sorted member ids) giving every element
    multiplicity exactly r, and the first giving every element
    multiplicity 1 mod r; plus whether the family contains an exact
    partition.
    """
    ground = tuple(sorted(set(ground)))
    ids = sorted(family)
    sets = {mid: frozenset(family[mid]) for mid in ids}
    for mid in ids:
        if not sets[mid] <= set(ground):
            raise ValidationError(f"member {mid!r} leaves the ground set")
    if r_max < 1:
        raise ValidationError(f"r_max must be positive, got {r_max}")

    found: dict = {}

    def vectors(prefix, remaining, budget):
        if not remaining:
            yield prefix
            return
        mid = remaining[0]
        for w in range(budget + 1):
            yield from vectors(prefix + [(mid, w)], remaining[1:], budget - w)

    for vec in vectors([], ids, weight_bound):
        weights = dict(vec)
        if all(w == 0 for w in weights.values()):
            continue
        mult = {
            x: sum(w for mid, w in weights.items() if x in sets[mid])
            for x in ground
        }
        values = set(mult.values())
        if len(values) == 1:
            r = values.pop()
            if r == 1 and "exact" not in found:
                found["exact"] = WeakFinding("exact-partition", 1, weights)
            if 1 <= r <= r_max and ("r", r) not in found:
                found[("r", r)] = WeakFinding("r-partition", r, weights)
        for r in range(1, r_max + 1):
            if ("mod", r) in found:
                continue
            if all(m >= 1 and (m - 1) % r == 0 for m in mult.values()):
                found[("mod", r)] = WeakFinding("mod-partition", r, weights)

    def sort_key(finding: WeakFinding):
        kind_rank = {"exact-partition": 0, "r-partition": 1, "mod-partition": 2}
        return (kind_rank[finding.kind], finding.r)

    return sorted(found.values(), key=sort_key)


def search_joint_instance(
    max_ground: int = 6,
    max_family: int = 8,
    r_max: int = 3,
    weight_bound: int = 4,
    r_min: int = 1,
):
    """Bounded deterministic search for an instance carrying both an
    r-partition and a (1 mod r)-partition witness for the same r.

    Scans families of 2-element subsets of {1..s} in lexicographic
    order, smallest ground set first, and returns the first hit as
    (ground, family, r, r_ids, mod_ids).  Families containing the whole
    ground set are skipped: those admit a one-tile partition outright.
    Returns None if the scanned space contains no such instance.
    """
    for s in range(2, max_ground + 1):
        ground = tuple(range(1, s + 1))
        pool = [pair for pair in itertools.combinations(ground, 2) if len(pair) < s]
        for size in range(1, min(max_family, len(pool)) + 1):
            for combo in itertools.combinations(pool, size):
                family = {
                    "m" + "".join(str(x) for x in pair): set(pair)
                    for pair in combo
                }
                findings = weak_partition_search(
                    ground, family, r_max, weight_bound
                )
                by_key = {(f.kind, f.r): f for f in findings}
                order = sorted(family)
                for r in range(r_min, r_max + 1):
                    r_find = by_key.get(("r-partition", r))
                    mod_find = by_key.get(("mod-partition", r))
                    if r_find and mod_find:
                        return (
                            ground,
                            family,
                            r,
                            tuple(r_find.as_list(order)),
                            tuple(mod_find.as_list(order)),
                        )
    return None
