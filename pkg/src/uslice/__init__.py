"""Sliced unbalanced optimal transport between discrete positive measures.

Two sliced relaxations of KL-unbalanced transport are solved by Frank-Wolfe
ascent on their duals: ``suot`` relaxes the marginals slice by slice while
``usot`` relaxes them once for all slices. Exact 1D transport, USOT
barycenters and independent reference solvers are included.
"""

from .barycenter import BarycenterProblem, GridMeasure, barycenter, regular_grid, usot_gradient_wrt_beta
from .divergences import (DivergenceSpec, Kind, SolverError, UnbalancedParams, kl_divergence,
                          phi_circ, tv_divergence)
from .docclass import classify
from .fw import FWState, fw_step, lambda_star, norm, uot1d
from .measures import (DiscreteMeasure, Measure1D, MeasureError, mass, normalize_to_probability,
                       reweight)
from .ot1d import DualPotentials, UnbalancedInputError, ot1d_duals, ot1d_loss, sliced_ot_loss
from .slicing import ProjectionSet, project, sample_directions
from .suot import suot, suot_marginals
from .usot import avg_pot, usot, usot_marginals, usot_stochastic

__version__ = "0.1.0"

__all__ = [
    "BarycenterProblem", "DiscreteMeasure", "DivergenceSpec", "DualPotentials", "FWState",
    "GridMeasure", "Kind", "Measure1D", "MeasureError", "ProjectionSet", "SolverError",
    "UnbalancedInputError", "UnbalancedParams", "avg_pot", "barycenter", "classify", "fw_step",
    "kl_divergence", "lambda_star", "mass", "norm", "normalize_to_probability", "ot1d_duals",
    "ot1d_loss", "phi_circ", "project", "regular_grid", "reweight", "sample_directions",
    "sliced_ot_loss", "suot", "suot_marginals", "tv_divergence", "uot1d", "usot",
    "usot_gradient_wrt_beta", "usot_marginals", "usot_stochastic",
]
