"""Desk-scale toolkit for low-degree polynomial estimation in planted models.

Modules: graphs (labeled multigraph enumeration), models (samplers),
basis (orthonormal systems, c and M), oracle (exact Corr/MMSE),
certificate (lower-bound vectors u), cumulants (spiked-model kappa
machinery), estimators (tree and self-avoiding-walk polynomials),
thresholds (sharp-threshold calculators), cli (experiment runner).
"""

from .graphs import GraphClassSpec, MultiGraph, enumerate_class, graph_stats
from .guards import GuardError
from .models import (PdsParams, PriorSpec, SbmParams, SubmatrixParams,
                     WignerParams, sample)

__all__ = [
    "GraphClassSpec", "MultiGraph", "enumerate_class", "graph_stats",
    "GuardError", "PriorSpec", "SubmatrixParams", "PdsParams", "WignerParams",
    "SbmParams", "sample",
]

__version__ = "0.1.0"
