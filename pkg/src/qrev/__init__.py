"""Reversibility of quantum channels on families of states.

Kraus-form channels, Petz recovery, entropic quantities and structural
criteria built on the complementary channel.
"""

from ._accel import BACKEND
from .channels import (
    CqStructure,
    KrausChannel,
    apply,
    basis_projectors,
    block_dilation_channel,
    choi,
    choi_distance,
    complementary,
    cq_channel,
    dephasing,
    depolarize_to,
    detect_cq,
    dual_apply,
    find_equivalence_witness,
    gram_channel,
    identity,
    minimal_kraus,
    output_span_and_m,
    partial_trace_channel,
    pinching,
    random_channel,
    reexpand_kraus,
    unitary,
    verify_isometric_equivalence,
)
from .criteria import (
    OndDecomposition,
    capacity_saturation_check,
    check_general_criterion,
    check_orthogonal_criterion,
    extract_complement_kraus,
    gram_reconstruct,
    ond_decompose,
    strict_concavity_gap,
    strict_decrease_gap,
    verify_w_condition,
)
from .divergences import (
    conditional_entropy,
    donald_residual,
    entropy_gain,
    holevo_chi,
    relative_entropy,
    von_neumann_entropy,
)
from .errors import QrevError
from .petz import check_family, check_pair, petz_channel, petz_t_channel, recovery_residual, theta_t_convergence
from .report import CriterionReport, Statement, Verdict
from .states import (
    DiscreteEnsemble,
    PureStateFamily,
    average_state,
    dual_overcomplete,
    is_complete,
    random_pure_family,
    random_state,
)

__version__ = "0.1.0"
