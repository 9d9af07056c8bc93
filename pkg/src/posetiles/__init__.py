"""posetiles: partition product sets and Boolean lattices into copies of
a fixed poset, with independently verifiable certificates."""

from .config import Budgets, DEFAULT_BUDGETS
from .errors import (
    ArtifactError,
    BudgetExceededError,
    PosetError,
    PosetilesError,
    ValidationError,
)
from .posets import (
    Embedding,
    LatticeCertificate,
    Poset,
    chain_poset,
    copy_with_extreme,
    diamond_poset,
    enumerate_copies,
    find_base_embedding,
    is_embedding,
    make_poset,
    product_poset,
    scattered_embedding,
    verify_lattice_partition,
)
from .weights import (
    WeakCertificate,
    WeightFunction,
    build_mod_certificate,
    build_r_certificate,
    greedy_t_subset_weights,
    multiplicity,
    reduce_mod_r,
    split_scattered,
    symmetrized_multiplicity,
    verify_weak_certificate,
)
from .engine import (
    Box,
    GeneralResult,
    PartitionCertificate,
    ProductInstance,
    TilePlacement,
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
from .oracle import (
    CoverProblem,
    WeakFinding,
    direct_lattice_partition,
    exact_cover_solve,
    weak_partition_search,
)
from .artifacts import load_artifact, parse_poset, save_artifact

__version__ = "0.1.0"
