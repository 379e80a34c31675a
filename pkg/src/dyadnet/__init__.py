"""Binary digital nets, dyadic Walsh analysis, and discrepancy diagnostics."""

__version__ = "0.1.0"

from .f2core import (
    DyadicCoord,
    DyadicPoint,
    F2Subspace,
    iter_grid,
    oplus,
    pairing,
    rt_weight,
)
from .nets import (
    DigitShift,
    GeneratorSet,
    NetQuality,
    PointSet,
    as_subspace,
    certify_deficiency,
    load_generators,
    net_points,
    random_shift,
    rescale_to_N,
    sobol_generators,
    van_der_corput_generators,
    verify_box_counts,
)
from .walsh import (
    IndexDecomposition,
    StepFunction,
    decompose,
    fine_coefficient,
    fine_coefficient_nd,
    omega,
    rademacher,
    truncated_projection,
    walsh_1d,
    walsh_nd,
)
from .discrepancy import (
    DiscrepancyContext,
    approximation_gap,
    delta_indicator,
    discrepancy_exact,
    lambda_group,
    m_direct,
    m_dual_sum,
)
from .norms import (
    NormReport,
    dn_sampler,
    exp_orlicz_estimate,
    hyperbolic_lp_ratio,
    khinchin_ratio,
    l2_m_exact,
    lq_norm_mc,
    lq_norms_mc,
    m_sampler,
)

__all__ = [
    "DigitShift",
    "DiscrepancyContext",
    "DyadicCoord",
    "DyadicPoint",
    "F2Subspace",
    "GeneratorSet",
    "IndexDecomposition",
    "NetQuality",
    "NormReport",
    "PointSet",
    "StepFunction",
    "approximation_gap",
    "as_subspace",
    "certify_deficiency",
    "decompose",
    "delta_indicator",
    "discrepancy_exact",
    "dn_sampler",
    "exp_orlicz_estimate",
    "fine_coefficient",
    "fine_coefficient_nd",
    "hyperbolic_lp_ratio",
    "iter_grid",
    "khinchin_ratio",
    "l2_m_exact",
    "lambda_group",
    "load_generators",
    "lq_norm_mc",
    "lq_norms_mc",
    "m_direct",
    "m_dual_sum",
    "m_sampler",
    "net_points",
    "omega",
    "oplus",
    "pairing",
    "rademacher",
    "random_shift",
    "rescale_to_N",
    "rt_weight",
    "sobol_generators",
    "truncated_projection",
    "van_der_corput_generators",
    "verify_box_counts",
    "walsh_1d",
    "walsh_nd",
]
