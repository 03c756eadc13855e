"""Spectral clustering of signed graphs.

SPONGE and SPONGE_sym embeddings, the usual signed-Laplacian baselines,
a signed stochastic block model sampler, k-means++ rounding, agreement
metrics and closed-form checks for the two-cluster model.
"""

__version__ = "0.1.0"

from .graph import LaplacianKind, SignedGraph, build_from_edges, laplacian  # noqa: E402
from .ssbm import SsbmParams, generate  # noqa: E402
from .embeddings import Method, MethodSpec, embed  # noqa: E402
from .clustering import KmeansConfig, kmeanspp  # noqa: E402
from .metrics import adjusted_rand_index, rand_index, sin_theta_distance  # noqa: E402

__all__ = [
    "LaplacianKind", "SignedGraph", "build_from_edges", "laplacian",
    "SsbmParams", "generate", "Method", "MethodSpec", "embed",
    "KmeansConfig", "kmeanspp", "adjusted_rand_index", "rand_index", "sin_theta_distance",
]
