"""Semilinear and spectral execution of 1D binary cellular automata.

Reference rule-table evolution, neighborhood-pattern projector algebra,
rule truncation and split linearization, DFT-domain (holographic) update
steps, a CA reservoir-computing harness, and a deterministic ring of
active-router agents exchanging bit-exact frames.
"""

from .core import (
    ELEMENTARY,
    ConvolutionMask,
    NeighborhoodSpec,
    RulePolynomial,
    RuleTable,
    addressing_mask,
    apply_circulant,
    evolve,
    interpolated_rule_polynomial,
    parse_rule,
    polynomial_from_rule_roots,
    polynomial_step,
    step_reference,
)
from .linearize import (
    RuleStats,
    SplitForm,
    TruncatedRule,
    classify_efficient_rules,
    rule_stats,
    search_linear_mask,
    split_linearize,
    split_step,
    truncate_rule,
    truncated_rule_codes,
    truncated_step,
)
from .projectors import (
    PatternProjector,
    evolve_via_projectors,
    expand_projector_multinomial,
    langlet_matrix,
    project_pattern,
    resolution_of_identity,
)
from .reservoir import ReadoutModel, ReservoirConfig, TaskSpec, expand_reservoir, run_task, train_readout
from .spectral import (
    circulant_eigenvalues,
    dft,
    idft,
    spectral_polynomial_step,
    spectral_product,
    spectral_projector_step,
    spectral_split_step,
    spectrum_to_bits,
)
from .armas import (
    AgentFrame,
    ArmasNetwork,
    TrajectoryWindow,
    build_network,
    decode_frame,
    encode_frame,
    inject,
    run_cycles,
)

__version__ = "0.1.0"
