import logging
from multiprocessing.pool import ThreadPool
from typing import List, Optional, Tuple

from kuramoto_certify.config import Config
from kuramoto_certify.engines.dynamics_engine import DynamicsEngine
from kuramoto_certify.engines.graph_engine import GraphEngine
from kuramoto_certify.engines.spectral_engine import SpectralEngine
from kuramoto_certify.exceptions import DomainError
from kuramoto_certify.schemas import Figure1Row, RazorEdgeRow, Stability
from kuramoto_certify.tools.basin_tools import run_basin
from kuramoto_certify.tools.pattern_tools import run_pattern_search
from kuramoto_certify.utils.file_utils import FileUtils
from kuramoto_certify.utils.json_utils import JSONUtils

logger = logging.getLogger("kuramoto_certify.tools.figure")

FIGURE1_HEADER = [
    "n", "bound", "bound_value", "pattern_mu", "pattern_offsets",
    "pattern_q", "pattern_complete", "red_square",
]


def figure1_row(n: int, budget: Optional[int] = None) -> Figure1Row:
    bound = GraphEngine.sync_sufficient_mu(n)
    record = run_pattern_search(n, budget, workers=1)
    red_square = None
    if n % 4 == 0:
        base = GraphEngine.connectivity(GraphEngine.cycle(4))
        red_square = float(GraphEngine.twin_connectivity(base, n // 4))
    return Figure1Row(
        n=n,
        bound=str(bound),
        bound_value=float(bound),
        pattern_mu=record.mu,
        pattern_offsets=" ".join(str(s) for s in record.offsets) if record.offsets else None,
        pattern_q=record.q,
        pattern_complete=record.complete,
        red_square=red_square,
    )


def run_figure1(
    n_range: Tuple[int, int] = (5, 50),
    budget: Optional[int] = None,
    output_path: Optional[str] = None,
    workers: Optional[int] = None,
) -> List[Figure1Row]:
    """
    每个 n 输出：同步充分界、循环图搜索得到的最稠密稳定图案、
    以及 n ≡ 0 (mod 4) 时 twin(C₄, n/4) 的连通度
    """
    lo, hi = n_range
    if not 5 <= lo <= hi <= 200:
        raise DomainError(f"n_range must lie within [5, 200], got {n_range}")
    ns = list(range(lo, hi + 1))
    rows: List[Optional[Figure1Row]] = [None] * len(ns)

    def build(index: int) -> None:
        rows[index] = figure1_row(ns[index], budget)

    with ThreadPool(min(len(ns), workers or Config.POOL_SIZE)) as pool:
        pool.map(build, range(len(ns)))

    for row in rows:
        if row.pattern_mu is not None and row.pattern_mu > row.bound_value:
            logger.error("n=%d: pattern density %.4f above the bound %.4f",
                         row.n, row.pattern_mu, row.bound_value)

    if output_path:
        FileUtils.write_csv(
            output_path,
            FIGURE1_HEADER,
            ([getattr(row, column) for column in FIGURE1_HEADER] for row in rows),
        )
    return rows


def run_razor_edge(
    m_range: Tuple[int, int] = (1, 8),
    trials: int = 0,
    seed: Optional[int] = None,
    output_path: Optional[str] = None,
) -> List[RazorEdgeRow]:
    """twin(C₄, m) 上继承父相位 {0, π/2, π, 3π/2} 的 q=1 扭曲态"""
    lo, hi = m_range
    if not 1 <= lo <= hi:
        raise DomainError(f"m_range must satisfy 1 <= lo <= hi, got {m_range}")
    c4 = GraphEngine.cycle(4)
    parent = DynamicsEngine.twisted_state(4, 1)

    rows = []
    for m in range(lo, hi + 1):
        g = GraphEngine.twin(c4, m)
        s = DynamicsEngine.lift_state(parent, m)
        residual = DynamicsEngine.residual(g, s)
        spectrum = SpectralEngine.spectrum(g, s)
        connectivity = GraphEngine.connectivity(g).mu_fraction
        if spectrum.classification != Stability.MARGINAL:
            logger.warning("twin(C4, %d): expected Marginal, got %s", m, spectrum.classification.value)

        basin_fraction = None
        if trials > 0:
            basin_fraction = run_basin(g, trials, seed, graph_id=f"twin-c4:{m}").fraction
        rows.append(RazorEdgeRow(
            m=m,
            n=g.n,
            connectivity=str(connectivity),
            connectivity_value=float(connectivity),
            residual=residual,
            spectrum=spectrum,
            basin_fraction=basin_fraction,
        ))
        logger.info("twin(C4, %d): mu=%s residual=%.2e zeros=%d %s",
                    m, connectivity, residual, spectrum.zero_multiplicity, spectrum.classification.value)

    if output_path:
        JSONUtils.write_json(rows, output_path)
    return rows
