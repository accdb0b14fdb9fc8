"""Spread hypergraphs, thresholds and expectation-thresholds at desk scale."""

from spreadlab.hypergraph import (
    Hypergraph,
    MinGenerators,
    SpreadCertificate,
    ell_bound,
    is_kappa_spread,
    make_hypergraph,
    min_generators,
    spread_kappa,
    uniformize,
    up_closure_contains,
)
from spreadlab.kernels import BACKEND

__all__ = [
    "BACKEND",
    "Hypergraph",
    "MinGenerators",
    "SpreadCertificate",
    "ell_bound",
    "is_kappa_spread",
    "make_hypergraph",
    "min_generators",
    "spread_kappa",
    "uniformize",
    "up_closure_contains",
]

__version__ = "0.1.0"
