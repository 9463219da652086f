from .certificate_engine import CertificateEngine
from .dynamics_engine import DynamicsEngine, IntegratorOptions, PhaseState, Trajectory
from .graph_engine import Graph, GraphEngine
from .moment_engine import MomentEngine, MomentSet
from .region_engine import FeasibilityRegion, RegionEngine
from .spectral_engine import SpectralEngine

__all__ = [
    "CertificateEngine",
    "DynamicsEngine",
    "IntegratorOptions",
    "PhaseState",
    "Trajectory",
    "Graph",
    "GraphEngine",
    "MomentEngine",
    "MomentSet",
    "FeasibilityRegion",
    "RegionEngine",
    "SpectralEngine",
]
