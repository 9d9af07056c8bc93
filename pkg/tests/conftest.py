import pytest

from posetiles.engine import ProductInstance
from posetiles.posets import chain_poset, diamond_poset, make_poset


@pytest.fixture
def chain2():
    return chain_poset(2)


@pytest.fixture
def chain3():
    return chain_poset(3)


@pytest.fixture
def chain4():
    return chain_poset(4)


@pytest.fixture
def diamond():
    return diamond_poset()


@pytest.fixture
def vee():
    # top but no bottom
    return make_poset(["a", "b", "t"], [("a", "t"), ("b", "t")])


@pytest.fixture
def inst3():
    return ProductInstance(
        ground=(1, 2, 3),
        family={"e12": {1, 2}, "e23": {2, 3}},
        a_set={1, 2},
        b_set={2, 3},
    )


@pytest.fixture
def inst_cycle4():
    return ProductInstance(
        ground=(1, 2, 3, 4),
        family={"e12": {1, 2}, "e23": {2, 3}, "e34": {3, 4}, "e14": {1, 4}},
        a_set={1, 2},
        b_set={2, 3},
        r_witness=(2, ("e12", "e23", "e34", "e14")),
        mod_witness=("e12", "e34"),
    )


@pytest.fixture
def inst_full_member():
    return ProductInstance(
        ground=(1, 2, 3),
        family={"all": {1, 2, 3}, "e12": {1, 2}},
        a_set={1, 2},
        b_set={1, 3},
        r_witness=(1, ("all",)),
        mod_witness=("all",),
    )


@pytest.fixture
def inst_singletons():
    return ProductInstance(
        ground=(1, 2, 3),
        family={"e1": {1}, "e2": {2}, "e3": {3}},
        a_set={1},
        b_set={2},
        r_witness=(1, ("e1", "e2", "e3")),
        mod_witness=("e1", "e2", "e3"),
    )
