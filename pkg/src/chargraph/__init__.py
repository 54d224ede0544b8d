"""Characteristic-graph rate bounds for multi-server multi-function
distributed computation: probability models, placements, demands,
confusability graphs, entropy solvers, rate bounds, and an end-to-end
zero-error simulator."""

from .errors import (
    ChargraphError,
    DecodeError,
    DeskScaleError,
    MisStructureError,
    ModelIntegrityError,
    ValidationError,
)
from .functions import (
    DemandSpec,
    GeneralTable,
    LinearlySeparable,
    MultiLinear,
    demand_from_json,
    demand_to_json,
    evaluate_demand,
    restrict_to_server,
)
from .graphs import (
    CharGraph,
    MisFamily,
    build_char_graph,
    enumerate_mis,
    exact_min_coloring,
    graph_to_dot,
    greedy_coloring,
    make_graph,
    or_power,
    union_graph,
)
from .probability import (
    JointPmf,
    Pmf,
    SkewParams,
    binary_entropy,
    crossover_joint,
    diniz_entropy,
    diniz_joint,
    diniz_pair_joint,
    diniz_parity,
    entropy,
    iid_bernoulli_joint,
    joint_from_array,
    mutual_information,
    parity_param,
    pearson_rho,
    product_joint,
    product_param,
    uniform_joint,
)
from .rates import (
    Codebook,
    GainReport,
    RateReport,
    chain_rate,
    default_codebook,
    gains,
    multilinear_rates,
    prop1_rate,
    prop2_rate,
    prop3_rate,
    scenario1_rates,
    scenario2_diniz_rates,
    scenario2_table2_rates,
    scenario3_rates,
    slepian_wolf_rate,
    theorem1_sum_rate,
)
from .simulator import (
    DecodeTable,
    Encoder,
    SimResult,
    build_decode_table,
    build_encoders,
    expected_rates,
    run_simulation,
)
from .solvers import (
    GraphEntropyResult,
    SolverOptions,
    chromatic_entropy,
    conditional_graph_entropy,
    graph_entropy,
)
from .topology import (
    DerivedParams,
    Placement,
    Topology,
    coverage_check,
    cyclic_placement,
    derived_params,
    placement_from_json,
    placement_to_json,
)

__version__ = "0.1.0"

__all__ = [
    "ChargraphError",
    "DecodeError",
    "DeskScaleError",
    "MisStructureError",
    "ModelIntegrityError",
    "ValidationError",
    "DemandSpec",
    "GeneralTable",
    "LinearlySeparable",
    "MultiLinear",
    "demand_from_json",
    "demand_to_json",
    "evaluate_demand",
    "restrict_to_server",
    "CharGraph",
    "MisFamily",
    "build_char_graph",
    "enumerate_mis",
    "exact_min_coloring",
    "graph_to_dot",
    "greedy_coloring",
    "make_graph",
    "or_power",
    "union_graph",
    "JointPmf",
    "Pmf",
    "SkewParams",
    "binary_entropy",
    "crossover_joint",
    "diniz_entropy",
    "diniz_joint",
    "diniz_pair_joint",
    "diniz_parity",
    "entropy",
    "iid_bernoulli_joint",
    "joint_from_array",
    "mutual_information",
    "parity_param",
    "pearson_rho",
    "product_joint",
    "product_param",
    "uniform_joint",
    "Codebook",
    "GainReport",
    "RateReport",
    "chain_rate",
    "default_codebook",
    "gains",
    "multilinear_rates",
    "prop1_rate",
    "prop2_rate",
    "prop3_rate",
    "scenario1_rates",
    "scenario2_diniz_rates",
    "scenario2_table2_rates",
    "scenario3_rates",
    "slepian_wolf_rate",
    "theorem1_sum_rate",
    "DecodeTable",
    "Encoder",
    "SimResult",
    "build_decode_table",
    "build_encoders",
    "expected_rates",
    "run_simulation",
    "GraphEntropyResult",
    "SolverOptions",
    "chromatic_entropy",
    "conditional_graph_entropy",
    "graph_entropy",
    "DerivedParams",
    "Placement",
    "Topology",
    "coverage_check",
    "cyclic_placement",
    "derived_params",
    "placement_from_json",
    "placement_to_json",
]
