"""Certified approximate regularization paths for Hankel nuclear-norm minimization.

The problem family is

    minimize ||H(g)||_*  subject to  ||g - g_o||_2 <= lam,

for an impulse response ``g_o`` of odd length ``n = 2p - 1``.
"""

from hankelpath.hankel import (
    as_impulse_response,
    cn_constant,
    frobenius_constant,
    hankel_adjoint,
    hankel_map,
    multiplicities,
)
from hankelpath.spectral import (
    CompactSvd,
    compact_svd,
    nuclear_norm,
    orth_complement,
    singular_values,
    sv_distance_sq,
    svt,
)
from hankelpath.admm import AdmmConfig, AdmmReport, HankelAdmm, solve
from hankelpath.certify import (
    SubgradientCertificate,
    build_certificate,
    duality_gap,
    next_lambda_cost,
    next_lambda_sv,
    recover_w_perp,
    sv_bound,
)
from hankelpath.fw import FwConfig, gap_gradient, lmo, optimize_w
from hankelpath.path import (
    PathResult,
    ToleranceSpec,
    max_evals_cost,
    max_evals_sv,
    run_path,
)

__version__ = "0.1.0"
