import logging
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

from kuramoto_certify.config import Config
from kuramoto_certify.engines.certificate_engine import CertificateEngine
from kuramoto_certify.engines.dynamics_engine import DynamicsEngine, PhaseState
from kuramoto_certify.engines.graph_engine import Graph, GraphEngine
from kuramoto_certify.engines.region_engine import FeasibilityRegion, RegionEngine
from kuramoto_certify.engines.spectral_engine import SpectralEngine
from kuramoto_certify.exceptions import DomainError
from kuramoto_certify.utils.file_utils import FileUtils
from kuramoto_certify.utils.json_utils import JSONUtils

logger = logging.getLogger("kuramoto_certify.tools.certify")

EXIT_OK = 0
EXIT_INCONSISTENT = 4


def certify_state(g: Graph, s: PhaseState, tol: Optional[float] = None) -> Tuple[Dict[str, Any], int]:
    """精化、规范化后计算谱与证书报告；返回 (JSON 载荷, 退出码)"""
    if s.n != g.n:
        raise DomainError(f"state has {s.n} phases but graph has {g.n} nodes")
    s = DynamicsEngine.normalize_phase(DynamicsEngine.refine_equilibrium(g, s))
    spectrum = SpectralEngine.spectrum(g, s)
    report = CertificateEngine.certificate_report(g, s, spectrum, tol)
    violations = report.violations()
    consistent = report.consistent_with(spectrum.classification)
    if consistent:
        logger.info("%r: %s, certificates consistent", g, spectrum.classification.value)
    else:
        logger.error("%r: %s but certificates fail: %s", g, spectrum.classification.value, violations)

    payload = {
        "graph": {"n": g.n, "self_loops": g.self_loops, "edges": g.edge_count},
        "connectivity": GraphEngine.connectivity(g),
        "state": {"theta": s.theta, "pinned": s.pinned, "residual": DynamicsEngine.residual(g, s)},
        "spectrum": spectrum.to_export(),
        "certificate": report,
        "violations": violations,
        "consistent": consistent,
    }
    return payload, EXIT_OK if consistent else EXIT_INCONSISTENT


def run_certify(
    graph_file: Optional[str] = None,
    state_file: Optional[str] = None,
    graph: Optional[str] = None,
    tol: Optional[float] = None,
    output_path: Optional[str] = None,
) -> Tuple[Dict[str, Any], int]:
    if graph_file:
        g = FileUtils.load_graph(graph_file)
    elif graph:
        g = GraphEngine.from_descriptor(graph)
    else:
        raise DomainError("certify needs a graph file or a graph descriptor")
    if not state_file:
        raise DomainError("certify needs a state file")
    payload, code = certify_state(g, FileUtils.load_state(state_file), tol)
    if output_path:
        JSONUtils.write_json(payload, output_path)
    return payload, code


def run_region_scan(
    mu_tilde: float = Config.CASE_II_MU_TILDE,
    grid_step: Optional[float] = None,
    output_path: Optional[str] = None,
    stride: Optional[int] = None,
) -> FeasibilityRegion:
    """
    扫描可行域并写出 JSON 摘要；点云 CSV 写在同名 _points.csv，
    细网格时按 stride 抽稀到约 1e−3 的间距
    """
    grid_step = Config.GRID_STEP if grid_step is None else grid_step
    region = RegionEngine.feasibility_scan(mu_tilde, grid_step)
    for box in region.components:
        logger.info("component: rho1 in [%.4f, %.4f], |rho2| in [%.5f, %.5f], %d points",
                    box.rho1_min, box.rho1_max, box.rho2_min, box.rho2_max, box.points)

    if output_path:
        stride = stride or max(1, int(round(Config.GRID_STEP / grid_step)))
        summary_path = Path(output_path)
        JSONUtils.write_json(region.summary(), summary_path)
        FileUtils.write_csv(
            summary_path.with_name(summary_path.stem + "_points.csv"),
            ["rho1", "rho2_abs", "feasible"],
            region.iter_rows(stride),
        )
    return region
