import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import (
    assert_exact_cover,
    changes_expected,
    fillin_expected,
    main_expected,
    manychoices_expected,
    onecorner_expected,
    region_cell_set,
    tile_cell_set,
)
from posetiles.config import Budgets
from posetiles.engine import (
    Box,
    PartitionCertificate,
    ProductInstance,
    TilePlacement,
    box_minus,
    corner_box,
    partition_blowup,
    partition_buildbigger,
    partition_fillin,
    partition_general,
    partition_main,
    partition_manychoices,
    partition_modify,
    partition_multiplechanges,
    partition_onecorner,
    product_compose,
    verify_certificate,
)
from posetiles.errors import BudgetExceededError, ValidationError
from posetiles.posets import (
    LatticeCertificate,
    chain_poset,
    verify_lattice_partition,
)


def make_inst(ac, mid, bc, rest=0, **kw):
    """Instance from zone sizes: |B-complement|=bc inside A, |A&B|=mid,
    |A-complement|=ac inside B, plus ``rest`` elements outside A union B."""
    labels = list(range(1, ac + mid + bc + rest + 1))
    a = set(labels[: bc + mid])
    b = set(labels[bc : bc + mid + ac])
    return ProductInstance(
        ground=labels, family=kw.pop("family", {"m": set(labels[:1])}),
        a_set=a, b_set=b, **kw
    )


def zone_instances(max_u=4, rest=0):
    out = []
    for total in range(1, max_u + 1):
        for bc in range(total + 1):
            for mid in range(total - bc + 1):
                ac = total - bc - mid
                out.append(make_inst(ac, mid, bc, rest))
    return out


class TestBoxes:
    def test_corner_examples(self, inst3):
        assert corner_box(0, 2, inst3) == Box((inst3.ac, inst3.ac))
        assert corner_box(1, 1, inst3) == Box((inst3.bc,))
        with pytest.raises(ValidationError):
            corner_box(3, 2, inst3)

    def test_empty_corner_when_ac_empty(self):
        inst = make_inst(ac=0, mid=2, bc=1)
        assert corner_box(1, 2, inst).is_empty()

    @given(
        box_f=st.lists(st.sets(st.integers(0, 4), min_size=1, max_size=4),
                       min_size=1, max_size=3),
        hole_f=st.lists(st.sets(st.integers(0, 4), max_size=4),
                        min_size=1, max_size=3),
    )
    @settings(max_examples=200, deadline=None)
    def test_box_minus_enumeration(self, box_f, hole_f):
        if len(box_f) != len(hole_f):
            return
        box, hole = Box(tuple(box_f)), Box(tuple(hole_f))
        pieces = box_minus(box, hole)
        expected = set(box.cells()) - set(hole.cells())
        got = set()
        for piece in pieces:
            for cell in piece.cells():
                assert cell not in got
                got.add(cell)
        assert got == expected


class TestOnecorner:
    def test_base_cases(self, inst3):
        c = partition_onecorner(1, 1, inst3)
        assert [t.member for t in c.tiles] == ["B"]
        c = partition_onecorner(1, 0, inst3)
        assert [t.member for t in c.tiles] == ["A"]

    def test_spec_count(self, inst3):
        c = partition_onecorner(3, 2, inst3)
        assert len(c.tiles) == 13
        assert_exact_cover(c)
        assert region_cell_set(c) == onecorner_expected(inst3, 3, 2)

    def test_empty_ac_all_a_tiles(self):
        inst = make_inst(ac=0, mid=2, bc=1)
        c = partition_onecorner(2, 1, inst)
        assert {t.member for t in c.tiles} == {"A"}
        assert_exact_cover(c)
        assert region_cell_set(c) == onecorner_expected(inst, 2, 1)

    def test_sweep_all_instances_small(self):
        for inst in zone_instances(max_u=3):
            for k in range(1, 4):
                for i in range(k + 1):
                    c = partition_onecorner(k, i, inst)
                    assert_exact_cover(c)
                    assert region_cell_set(c) == onecorner_expected(inst, k, i)

    def test_parameter_range(self, inst3):
        with pytest.raises(ValidationError):
            partition_onecorner(0, 0, inst3)
        with pytest.raises(ValidationError):
            partition_onecorner(2, 3, inst3)


class TestBlowup:
    def test_from_onecorner(self, inst3):
        c = partition_blowup(partition_onecorner(1, 1, inst3), inst3)
        assert_exact_cover(c)
        # region is U^2 minus Bc x Ac
        u = sorted(inst3.u_set)
        expected = {
            (x, y)
            for x in u
            for y in u
            if not (x in inst3.bc and y in inst3.ac)
        }
        assert region_cell_set(c) == expected

    def test_double_blowup_cells(self, inst3):
        base = partition_onecorner(1, 1, inst3)
        twice = partition_blowup(partition_blowup(base, inst3), inst3)
        u = sorted(inst3.u_set)
        expected = {
            (x, y, z)
            for x in u for y in u for z in u
            if not (x in inst3.bc and y in inst3.ac and z in inst3.ac)
        }
        assert_exact_cover(twice)
        assert region_cell_set(twice) == expected

    def test_rejects_family_tiles(self, inst3):
        c = partition_fillin(["e12"], inst3)
        with pytest.raises(ValidationError, match="A and B"):
            partition_blowup(c, inst3)


class TestModify:
    def test_spec_region_identity(self, inst3):
        base = partition_onecorner(1, 1, inst3)
        c = partition_modify(base, 1, inst3)
        assert_exact_cover(c)
        assert region_cell_set(c) == onecorner_expected(inst3, 2, 2)

    def test_corner_not_in_hole(self, inst3):
        base = partition_onecorner(1, 1, inst3)  # hole is corner 1
        with pytest.raises(ValidationError, match="not contained"):
            partition_modify(base, 0, inst3)

    def test_random_k2_cases(self):
        rng = random.Random(7)
        for _ in range(50):
            inst = random.Random(rng.random()).choice(zone_instances(max_u=4))
            i = rng.randint(0, 2)
            base = partition_onecorner(2, i, inst)
            c = partition_modify(base, i, inst)
            assert_exact_cover(c)


class TestMultipleChanges:
    def test_trivial(self, inst3):
        c = partition_multiplechanges(2, 0, [], [], inst3)
        assert c.tiles == () and c.region == ()

    def test_small_verified(self, inst3):
        c = partition_multiplechanges(1, 1, [0], [2], inst3)
        assert_exact_cover(c)
        assert region_cell_set(c) == changes_expected(inst3, 1, 1, [0], [2])

    def test_size_mismatch(self, inst3):
        with pytest.raises(ValidationError, match="differs"):
            partition_multiplechanges(1, 1, [0, 1], [2], inst3)

    def test_index_ranges(self, inst3):
        with pytest.raises(ValidationError):
            partition_multiplechanges(1, 1, [2], [2], inst3)
        with pytest.raises(ValidationError):
            partition_multiplechanges(1, 1, [0], [1], inst3)

    def test_sweep_with_independent_region(self):
        for inst in zone_instances(max_u=3):
            for k in range(3):
                for l in range(3 - 1 * 0):
                    if k + l > 4 or l == 0:
                        continue
                    i_opts = list(range(k + 1))
                    j_opts = list(range(k + 1, k + l + 1))
                    for size in range(min(len(i_opts), len(j_opts)) + 1):
                        for iset in itertools.combinations(i_opts, size):
                            for jset in itertools.combinations(j_opts, size):
                                c = partition_multiplechanges(
                                    k, l, iset, jset, inst
                                )
                                assert_exact_cover(c)
                                assert region_cell_set(c) == changes_expected(
                                    inst, k, l, iset, jset
                                )


class TestFillin:
    def test_empty(self, inst3):
        c = partition_fillin([], inst3)
        assert c.tiles == () and c.region == ()

    def test_spec_single_member(self, inst3):
        c = partition_fillin(["e23"], inst3)
        assert_exact_cover(c)
        assert region_cell_set(c) == {(1, 1), (1, 2), (2, 2), (3, 2)}

    def test_two_members(self, inst3):
        c = partition_fillin(["e12", "e23"], inst3)
        assert_exact_cover(c)
        assert region_cell_set(c) == fillin_expected(inst3, ["e12", "e23"])

    def test_repeated_members(self, inst3):
        ids = ["e23", "e23", "e12"]
        c = partition_fillin(ids, inst3)
        assert_exact_cover(c)
        assert region_cell_set(c) == fillin_expected(inst3, ids)

    def test_unknown_member(self, inst3):
        with pytest.raises(ValidationError, match="not in the family"):
            partition_fillin(["zz"], inst3)


class TestManychoices:
    def test_whole_ground_member(self):
        inst = ProductInstance(
            ground=(1, 2), family={"s": {1, 2}}, a_set={1}, b_set={2},
            r_witness=(1, ("s",)),
        )
        c = partition_manychoices(1, inst, [1])
        assert_exact_cover(c)
        assert region_cell_set(c) == manychoices_expected(inst, 1, [1])

    def test_wrong_residue(self, inst_cycle4):
        with pytest.raises(ValidationError, match="not 1 mod"):
            partition_manychoices(2, inst_cycle4, [1, 2])

    def test_too_many_corners(self, inst_cycle4):
        with pytest.raises(ValidationError, match="exceeds"):
            partition_manychoices(1, inst_cycle4, [1, 2, 3])

    def test_j_out_of_range(self, inst_cycle4):
        with pytest.raises(ValidationError, match="not within"):
            partition_manychoices(2, inst_cycle4, [9])

    def test_cycle4_permuted(self, inst_cycle4):
        for jset in ([1], [3], [4]):
            c = partition_manychoices(2, inst_cycle4, jset)
            assert_exact_cover(c)
            assert region_cell_set(c) == manychoices_expected(inst_cycle4, 4, jset)

    def test_pentagon(self):
        pent = ProductInstance(
            ground=(1, 2, 3, 4, 5),
            family={f"e{i}": {i, i % 5 + 1} for i in range(1, 6)},
            a_set={1, 2}, b_set={2, 3},
            r_witness=(2, ("e1", "e2", "e3", "e4", "e5")),
        )
        c = partition_manychoices(3, pent, [2, 5, 7])
        assert_exact_cover(c)
        assert region_cell_set(c) == manychoices_expected(pent, 8, [2, 5, 7])

    def test_missing_witness(self, inst3):
        with pytest.raises(ValidationError, match="r-witness"):
            partition_manychoices(1, inst3, [1])


class TestMain:
    def test_cycle4(self, inst_cycle4):
        n, cert = partition_main(inst_cycle4)
        assert n == 4
        assert_exact_cover(cert)
        assert region_cell_set(cert) == main_expected(inst_cycle4, n)
        assert verify_certificate(cert).ok

    def test_trivial_mod_witness(self, inst_full_member):
        n, cert = partition_main(inst_full_member)
        assert n == 1
        assert_exact_cover(cert)

    def test_missing_witness(self, inst3):
        with pytest.raises(ValidationError, match="witness"):
            partition_main(inst3)

    def test_invalid_r_witness_rejected(self):
        with pytest.raises(ValidationError, match="multiplicity"):
            ProductInstance(
                ground=(1, 2, 3),
                family={"e12": {1, 2}, "e23": {2, 3}},
                a_set={1}, b_set={2},
                r_witness=(1, ("e12", "e23")),
            )

    def test_deep_mod_witness(self):
        # a mod witness with multiplicity 3 = 1 + 2a exercises a > 0 paths
        inst = ProductInstance(
            ground=(1, 2, 3, 4),
            family={"e12": {1, 2}, "e34": {3, 4}},
            a_set={1}, b_set={2},
            r_witness=(2, ("e12", "e12", "e34", "e34")),
            mod_witness=("e12", "e12", "e12", "e34"),
        )
        n, cert = partition_main(inst)
        assert n == 10
        assert_exact_cover(cert)
        assert region_cell_set(cert) == main_expected(inst, n)


class TestBuildBigger:
    def test_general_cover2_full(self):
        inst = ProductInstance(
            ground=(1, 2, 3, 4),
            family={"e12": {1, 2}, "e34": {3, 4}},
            a_set={1, 2}, b_set={3, 4},
            r_witness=(1, ("e12", "e34")),
            mod_witness=("e12", "e34"),
        )
        res = partition_general(inst)
        assert res.mode == "full"
        assert res.n == 6
        assert_exact_cover(res.certificate)
        assert {t.member for t in res.certificate.tiles} <= {"e12", "e34"}
        assert verify_certificate(res.certificate).ok

    def test_mixed_blocks(self):
        # first certificate mixes an A-tile with a family tile, so the
        # output needs both the clone-lift and the member-wise block fill
        inst = ProductInstance(
            ground=(1, 2, 3, 4),
            family={"e12": {1, 2}, "e34": {3, 4}},
            a_set={1}, b_set={2},
            r_witness=(1, ("e12", "e34")),
            mod_witness=("e12", "e34"),
        )
        sset = inst.s_set
        a_set = frozenset({1, 2})
        cp = PartitionCertificate(
            ground=inst.ground, members={"A": a_set, "e34": {3, 4}},
            dimension=1, region=[Box((sset,))],
            tiles=[TilePlacement("A", 1, ()), TilePlacement("e34", 1, ())],
        )
        _, cq = partition_main(inst)  # covers S^2 x U^4 with U = {1, 2} = A
        assert cq.region == (Box((sset, sset) + (a_set,) * 4),)
        out = partition_buildbigger(cp, cq, inst)
        assert out.dimension == 1 * 4 + 2
        assert_exact_cover(out)
        assert verify_certificate(out).ok
        assert "e34" in {t.member for t in out.tiles}

    def test_mismatched_a_rejected(self, inst3):
        sset = inst3.s_set
        cp = PartitionCertificate(
            ground=inst3.ground, members={"A": {1}},
            dimension=1, region=[Box((sset,))],
            tiles=[TilePlacement("A", 1, ())],
        )
        cq = PartitionCertificate(
            ground=inst3.ground, members={"B": {2}},
            dimension=3, region=[Box((sset, sset, frozenset({2})))],
            tiles=[],
        )
        with pytest.raises(ValidationError, match="S\\^2 x A\\^q"):
            partition_buildbigger(cp, cq, inst3)

    def test_non_family_tile_rejected(self, inst3):
        sset = inst3.s_set
        cp = PartitionCertificate(
            ground=inst3.ground, members={"A": {1}, "X": {2, 3}},
            dimension=1, region=[Box((sset,))],
            tiles=[TilePlacement("A", 1, ()), TilePlacement("X", 1, ())],
        )
        cq = PartitionCertificate(
            ground=inst3.ground, members={"B": {2}},
            dimension=3, region=[Box((sset, sset, frozenset({1})))],
            tiles=[],
        )
        with pytest.raises(ValidationError, match="neither"):
            partition_buildbigger(cp, cq, inst3)


class TestGeneral:
    def test_trivial_cover(self, inst_full_member):
        res = partition_general(inst_full_member)
        assert res.mode == "full" and res.n == 1
        assert len(res.certificate.tiles) == 1
        assert res.certificate.tiles[0].member == "all"
        assert verify_certificate(res.certificate).ok

    def test_plan_only(self, inst_singletons):
        res = partition_general(inst_singletons)
        assert res.mode == "plan"
        assert res.n == 101
        assert [s.p for s in res.stages] == [11, 101]
        for stage in res.stages:
            assert verify_certificate(stage.main_certificate).ok

    def test_forced_plan_mode(self, inst_full_member):
        inst = ProductInstance(
            ground=(1, 2, 3, 4),
            family={"e12": {1, 2}, "e34": {3, 4}},
            a_set={1, 2}, b_set={3, 4},
            r_witness=(1, ("e12", "e34")),
            mod_witness=("e12", "e34"),
        )
        res = partition_general(inst, mode="plan")
        assert res.mode == "plan"
        assert res.certificate is None

    def test_full_mode_over_budget(self, inst_singletons):
        with pytest.raises(BudgetExceededError, match="plan"):
            partition_general(
                inst_singletons, mode="full", budgets=Budgets(cells=10**6)
            )

    def test_missing_witness(self, inst3):
        with pytest.raises(ValidationError, match="witness"):
            partition_general(inst3)


class TestVerifyCertificate:
    def test_duplicate_tile_overlap(self, inst3):
        c = partition_onecorner(2, 1, inst3)
        tampered = PartitionCertificate(
            ground=c.ground, members=c.members, dimension=c.dimension,
            region=c.region, tiles=c.tiles + (c.tiles[0],),
        )
        rep = verify_certificate(tampered)
        assert not rep.ok
        assert any("overlap" in v for v in rep.violations)

    def test_wrong_member_clone(self, inst3):
        c = partition_onecorner(2, 1, inst3)
        first = c.tiles[0]
        swapped = "B" if first.member == "A" else "A"
        tiles = (TilePlacement(swapped, first.host, first.fixed),) + c.tiles[1:]
        tampered = PartitionCertificate(
            ground=c.ground, members=c.members, dimension=c.dimension,
            region=c.region, tiles=tiles,
        )
        assert not verify_certificate(tampered).ok

    def test_undefined_member(self, inst3):
        c = partition_onecorner(2, 1, inst3)
        tiles = (TilePlacement("zz", 1, ((2, 1),)),) + c.tiles
        tampered = PartitionCertificate(
            ground=c.ground, members=c.members, dimension=c.dimension,
            region=c.region, tiles=tiles,
        )
        rep = verify_certificate(tampered)
        assert not rep.ok
        assert any("unknown member" in v for v in rep.violations)

    def test_missing_fixed_coordinate(self, inst3):
        tampered = PartitionCertificate(
            ground=inst3.ground, members={"A": inst3.a_set}, dimension=2,
            region=[Box((inst3.u_set, inst3.u_set))],
            tiles=[TilePlacement("A", 1, ())],
        )
        rep = verify_certificate(tampered)
        assert not rep.ok
        assert any("do not cover" in v for v in rep.violations)

    def test_budget(self, inst_cycle4):
        _, cert = partition_main(inst_cycle4)
        with pytest.raises(BudgetExceededError):
            verify_certificate(cert, Budgets(cells=100))

    def test_determinism_byte_identical(self, inst_cycle4):
        from posetiles.artifacts import canonical_dumps, tile_cert_to_obj

        a = partition_main(inst_cycle4)[1]
        b = partition_main(inst_cycle4)[1]
        assert canonical_dumps(tile_cert_to_obj(a)) == canonical_dumps(
            tile_cert_to_obj(b)
        )


class TestProductCompose:
    def test_whole_lattices(self, chain2):
        b1 = LatticeCertificate(poset=chain2, dimension=1, tiles=((0, 1),))
        out = product_compose(b1, b1)
        assert out.dimension == 2
        assert out.tiles == ((0, 1, 2, 3),)
        assert verify_lattice_partition(out).ok

    def test_matching_times_b1(self, chain2):
        m = LatticeCertificate(poset=chain2, dimension=2, tiles=((0, 1), (2, 3)))
        b1 = LatticeCertificate(poset=chain2, dimension=1, tiles=((0, 1),))
        out = product_compose(m, b1)
        assert len(out.tiles) == 2
        assert verify_lattice_partition(out).ok

    def test_triple_product(self, chain2, diamond):
        b1 = LatticeCertificate(poset=chain2, dimension=1, tiles=((0, 1),))
        d1 = LatticeCertificate(poset=diamond, dimension=2, tiles=((0, 1, 2, 3),))
        out = product_compose(b1, d1)
        assert verify_lattice_partition(out).ok
        assert len(out.poset) == 8
