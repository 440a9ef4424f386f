"""Read-type operators without invariant subspaces on Fréchet spaces without continuous norm."""

from .analysis import (
    certify_D,
    cyclic_approx,
    find_cyclic_poly,
    kn_locate,
    kn_membership,
    norm_N,
    tail_margin,
    tau_restrict,
)
from .certificates import CertificateReport, verify_certificates, verify_state
from .construction import advance_stage, build, init_construction, nn_schedule, u_vector
from .operator import (
    Polynomial,
    apply_poly,
    apply_T,
    continuity_constant,
    continuity_margin,
    gamma,
)
from .spaces import (
    basis_constant,
    classify_isp,
    fresh_indices,
    level_of,
    make_space,
    power_space,
    seminorm,
)
from .state import ConstructionState
from .vectors import FinVector

__version__ = "0.1.0"

__all__ = [
    "CertificateReport",
    "ConstructionState",
    "FinVector",
    "Polynomial",
    "advance_stage",
    "apply_T",
    "apply_poly",
    "basis_constant",
    "build",
    "certify_D",
    "classify_isp",
    "continuity_constant",
    "continuity_margin",
    "cyclic_approx",
    "find_cyclic_poly",
    "fresh_indices",
    "gamma",
    "init_construction",
    "kn_locate",
    "kn_membership",
    "level_of",
    "make_space",
    "nn_schedule",
    "norm_N",
    "power_space",
    "seminorm",
    "tail_margin",
    "tau_restrict",
    "u_vector",
    "verify_certificates",
    "verify_state",
]
