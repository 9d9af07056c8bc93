import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from posetiles.config import Budgets
from posetiles.errors import BudgetExceededError, ValidationError
from posetiles.oracle import (
    CoverProblem,
    direct_lattice_partition,
    exact_cover_solve,
    naive_cover_count,
    search_joint_instance,
    weak_partition_search,
)
from posetiles.posets import verify_lattice_partition
from posetiles.weights import WeightFunction, multiplicity


class TestExactCover:
    def test_simple(self):
        p = CoverProblem((1, 2, 3), {"a": {1, 2}, "b": {3}, "c": {2, 3}})
        assert exact_cover_solve(p, "first") == ["a", "b"]

    def test_triangle_unsat(self):
        p = CoverProblem((1, 2, 3), {"ab": {1, 2}, "bc": {2, 3}, "ac": {1, 3}})
        assert exact_cover_solve(p, "first") is None
        assert exact_cover_solve(p, "count") == 0

    def test_count_matches_naive(self):
        p = CoverProblem(
            (1, 2, 3, 4),
            {"a": {1, 2}, "b": {3, 4}, "c": {1, 3}, "d": {2, 4}, "e": {1, 2, 3, 4}},
        )
        assert exact_cover_solve(p, "count") == naive_cover_count(p) == 3

    def test_all_mode(self):
        p = CoverProblem(
            (1, 2, 3, 4),
            {"a": {1, 2}, "b": {3, 4}, "c": {1, 3}, "d": {2, 4}},
        )
        sols = exact_cover_solve(p, "all")
        assert sols == [["a", "b"], ["c", "d"]]

    def test_budget_distinct_from_unsat(self):
        p = CoverProblem(
            tuple(range(12)),
            {f"c{i}": {i, (i + 1) % 12} for i in range(12)},
        )
        with pytest.raises(BudgetExceededError):
            exact_cover_solve(p, "count", Budgets(nodes=3))

    def test_empty_candidate_rejected(self):
        with pytest.raises(ValidationError, match="empty"):
            CoverProblem((1,), {"z": set()})

    @given(
        n_elems=st.integers(min_value=1, max_value=5),
        seed=st.integers(min_value=0, max_value=10**6),
    )
    @settings(max_examples=60, deadline=None)
    def test_count_agrees_with_naive_random(self, n_elems, seed):
        import random

        rng = random.Random(seed)
        universe = tuple(range(n_elems))
        candidates = {}
        for i in range(rng.randint(1, 6)):
            size = rng.randint(1, n_elems)
            candidates[f"c{i}"] = set(rng.sample(universe, size))
        p = CoverProblem(universe, candidates)
        assert exact_cover_solve(p, "count") == naive_cover_count(p)

    def test_solutions_reverify(self):
        p = CoverProblem(
            (1, 2, 3, 4, 5, 6),
            {
                "a": {1, 2, 3},
                "b": {4, 5, 6},
                "c": {1, 4},
                "d": {2, 5},
                "e": {3, 6},
            },
        )
        for sol in exact_cover_solve(p, "all"):
            covered = [x for cid in sol for x in p.candidates[cid]]
            assert sorted(covered) == sorted(p.universe)


class TestDirectLatticePartition:
    def test_two_chain_b3(self, chain2):
        cert = direct_lattice_partition(chain2, 3)
        assert len(cert.tiles) == 4
        assert verify_lattice_partition(cert).ok

    def test_four_chain_b3_unsat(self, chain4):
        assert direct_lattice_partition(chain4, 3) is None

    def test_diamond_b2_single_tile(self, diamond):
        cert = direct_lattice_partition(diamond, 2)
        assert len(cert.tiles) == 1
        assert verify_lattice_partition(cert).ok

    def test_count_b2_two_chains(self, chain2):
        assert direct_lattice_partition(chain2, 2, "count") == 2


class TestWeakPartitionSearch:
    def test_triangle(self):
        fam = {"ab": {1, 2}, "bc": {2, 3}, "ac": {1, 3}}
        findings = weak_partition_search((1, 2, 3), fam, 2, 4)
        kinds = {(f.kind, f.r) for f in findings}
        assert ("r-partition", 2) in kinds
        assert ("mod-partition", 2) not in kinds
        r2 = next(f for f in findings if f.kind == "r-partition" and f.r == 2)
        assert r2.weights == {"ab": 1, "bc": 1, "ac": 1}

    def test_full_ground_member(self):
        findings = weak_partition_search((1, 2), {"s": {1, 2}}, 3, 4)
        kinds = {(f.kind, f.r) for f in findings}
        for r in (1, 2, 3):
            assert ("r-partition", r) in kinds
            assert ("mod-partition", r) in kinds
        mod = next(f for f in findings if f.kind == "mod-partition" and f.r == 2)
        assert sum(mod.weights.values()) == 1

    def test_pentagon(self):
        fam = {f"e{i}": {i, i % 5 + 1} for i in range(1, 6)}
        findings = weak_partition_search((1, 2, 3, 4, 5), fam, 2, 5)
        kinds = {(f.kind, f.r) for f in findings}
        assert ("r-partition", 2) in kinds
        assert ("mod-partition", 2) not in kinds

    def test_findings_reverify_via_multiplicity(self):
        fam = {"ab": {1, 2}, "cd": {3, 4}, "ac": {1, 3}, "bd": {2, 4}}
        findings = weak_partition_search((1, 2, 3, 4), fam, 3, 5)
        for f in findings:
            w = WeightFunction(
                {tuple(sorted(fam[mid])): wt for mid, wt in f.weights.items() if wt},
                domain="Z+",
            )
            for x in (1, 2, 3, 4):
                m = multiplicity(w, x)
                if f.kind == "r-partition":
                    assert m == f.r
                elif f.kind == "exact-partition":
                    assert m == 1
                else:
                    assert m >= 1 and (m - 1) % f.r == 0


class TestJointSearch:
    def test_first_hit(self):
        hit = search_joint_instance()
        assert hit is not None
        ground, family, r, r_ids, mod_ids = hit
        assert ground == (1, 2, 3, 4)
        assert sorted(family) == ["m12", "m34"]
        assert r == 1

    def test_r_two_hit(self):
        ground, family, r, r_ids, mod_ids = search_joint_instance(r_min=2)
        assert r == 2
        counts = {x: sum(1 for mid in r_ids if x in family[mid]) for x in ground}
        assert set(counts.values()) == {2}
        mod_counts = {
            x: sum(1 for mid in mod_ids if x in family[mid]) for x in ground
        }
        assert all((c - 1) % 2 == 0 and c >= 1 for c in mod_counts.values())
