"""Desk-scale structural Ramsey theory over finite ordered relational
structures: products, type-preserving maps, adversarial coloring search,
and index-structured indiscernibility, all with deterministic outputs."""

__version__ = "0.1.0"

from .generators import (
    AgeSpec,
    age_generate,
    chain,
    conv_equiv,
    extension_property_check,
    ordered_graphs_upto,
    random_ordered_graph,
    tree_fragment,
)
from .indiscernibles import (
    EMRuleTable,
    IndexedFamily,
    extract_em_rules,
    is_indexed_indiscernible,
    locally_based_check,
    reduct_gap,
    tuple_equivalent,
)
from .products import (
    AmalgamationProblem,
    ProductStructure,
    amalgamate_product,
    check_class_properties,
    check_prop_red,
    gr,
    ordered_union,
    product_ramsey_witness,
    red,
    semidirect_product,
)
from .ramsey import (
    Coloring,
    RamseyCertificate,
    ShapeColoring,
    check_color_homogenizing,
    find_bad_coloring,
    find_homogeneous_copy,
    is_homogeneous,
    iterated_witness,
    multi_shape_find,
    sub_shapes,
    thm2_pipeline,
    verify_ramsey,
    witness_search,
)
from .search import CapExceeded, DEFAULT_NODE_CAP
from .semiretract import (
    SemiRetractionWitness,
    check_semiretraction,
    is_qftp_preserving,
    search_retraction_map,
    treecor_witness,
)
from .structures import (
    FinStructure,
    Signature,
    StructureMap,
    TupleType,
    are_isomorphic,
    enumerate_copies,
    induced_substructure,
    is_embedding,
    qftp,
    reduct,
    same_qftp,
)
