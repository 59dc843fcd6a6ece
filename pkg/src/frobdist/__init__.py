"""Frobenius numbers of random coprime vectors: exact engines, limit laws, lattice geometry."""

import os as _os

# numba's TBB layer warns about old TBB builds; the workqueue layer is all we need
_os.environ.setdefault("NUMBA_THREADING_LAYER", "workqueue")

__version__ = "0.1.0"

from .core import (  # noqa: E402
    MAGNITUDE_CAP,
    CoprimeVector,
    FrobeniusResult,
    NormalizationKind,
    cutoff_radius,
    fsineq_rhs,
    gcd_vector,
    prod_norm_factor,
    s_norm,
    schur_bound,
    support_min,
)
from .errors import BudgetError, CapacityError, FrobdistError, UsageError  # noqa: E402
from .frobenius import frobenius, frobenius_dp_oracle, residue_table, sylvester  # noqa: E402
from .analytic import (  # noqa: E402
    constants,
    main_term,
    moment_exact_d3,
    psi3_cdf,
    psi3_density,
    psi3_tail,
    zeta_real,
)
from .lattice import (  # noqa: E402
    LatticeBasis,
    MinimaProfile,
    check_aliev_henk,
    kernel_lattice,
    lll_reduce,
    ratio_statistics,
    sample_mu2,
    successive_minima,
)
from .simplex import (  # noqa: E402
    CoverInterval,
    Direction,
    covering_radius_2d,
    mc_volume_K,
    mc_width_integral,
    simplex_gauge,
    width,
)
from .statistics import (  # noqa: E402
    Box,
    EmpiricalDistribution,
    ExperimentConfig,
    Histogram,
    concentration_fraction,
    count_unbalanced,
    empirical_psi,
    histogram,
    ks_distance,
    moment_estimate,
    sample_coprime,
    tail_constant,
)
