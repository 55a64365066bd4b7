"""Closed-form generalisation error of linear spectral GNNs."""

from .filters import FilterSpec, GraphContext, effective_spectrum, normalize_response, response
from .graph import Graph, GraphFormatError, cycle_block_graph, heterophilic_perturbation, homophily_ratio
from .risk import (
    EigenGroup,
    PowerLawProfile,
    RiskProblem,
    gat_specformer_gap,
    misalignment,
    powerlaw_risk,
    risk_exact,
    risk_homophily_sweep,
    risk_isotropic,
)
from .spectral import Spectrum, eigendecompose, graph_spectrum, multiplicity_profile, normalized_laplacian

__version__ = "0.1.0"

__all__ = [
    "EigenGroup",
    "FilterSpec",
    "Graph",
    "GraphContext",
    "GraphFormatError",
    "PowerLawProfile",
    "RiskProblem",
    "Spectrum",
    "cycle_block_graph",
    "effective_spectrum",
    "eigendecompose",
    "gat_specformer_gap",
    "graph_spectrum",
    "heterophilic_perturbation",
    "homophily_ratio",
    "misalignment",
    "multiplicity_profile",
    "normalize_response",
    "normalized_laplacian",
    "powerlaw_risk",
    "response",
    "risk_exact",
    "risk_homophily_sweep",
    "risk_isotropic",
]
