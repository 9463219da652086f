import logging
from fractions import Fraction
from functools import partial
from itertools import islice
from math import gcd
from multiprocessing.pool import ThreadPool
from typing import Iterable, List, Optional, Sequence, Tuple

from kuramoto_certify.config import Config
from kuramoto_certify.engines.certificate_engine import CertificateEngine
from kuramoto_certify.engines.dynamics_engine import DynamicsEngine, PhaseState
from kuramoto_certify.engines.graph_engine import Graph, GraphEngine
from kuramoto_certify.engines.spectral_engine import SpectralEngine
from kuramoto_certify.exceptions import ConsistencyViolation, DomainError, RefinementError
from kuramoto_certify.schemas import (
    CertificateReport,
    ChainSweepReport,
    PatternRecord,
    SpectrumReport,
    Stability,
)
from kuramoto_certify.tools.basin_tools import run_basin

logger = logging.getLogger("kuramoto_certify.tools.pattern")


def circulant_descriptor(n: int, offsets: Sequence[int]) -> str:
    return f"circulant:{n}:{','.join(str(s) for s in offsets)}"


def stable_twists(n: int, offsets: Tuple[int, ...]) -> List[int]:
    """闭式谱预筛：按升序返回全部谱稳定的扭曲数 q"""
    qs = range(1, n // 2 + 1)
    spectra = SpectralEngine.circulant_twisted_spectra(n, offsets, qs)
    zero_tol = Config.zero_tol(n)
    return [
        q for q, eigenvalues in zip(qs, spectra)
        if SpectralEngine.classify(eigenvalues, zero_tol).classification == Stability.STABLE
    ]


def confirm_twist(
    g: Graph, q: int
) -> Optional[Tuple[PhaseState, SpectrumReport, CertificateReport]]:
    """Newton 精化 + 对称特征值求解复核预筛结果，并计算证书"""
    try:
        s = DynamicsEngine.refine_equilibrium(g, DynamicsEngine.twisted_state(g.n, q))
    except RefinementError as exc:
        logger.warning("%r q=%d: refinement failed (%s)", g, q, exc)
        return None
    spectrum = SpectralEngine.spectrum(g, s)
    if spectrum.classification != Stability.STABLE:
        logger.warning("%r q=%d: closed form says Stable, eigensolver says %s",
                       g, q, spectrum.classification.value)
        return None
    return s, spectrum, CertificateEngine.certificate_report(g, s, spectrum)


def first_confirmed_twist(
    g: Graph, qs: Iterable[int]
) -> Optional[Tuple[int, PhaseState, SpectrumReport, CertificateReport]]:
    """按顺序复核预筛通过的 q，返回第一个确认稳定的"""
    for q in qs:
        confirmed = confirm_twist(g, q)
        if confirmed is not None:
            return (q, *confirmed)
    return None


def run_pattern_search(n: int, budget: Optional[int] = None, workers: Optional[int] = None) -> PatternRecord:
    """
    按度数从高到低枚举 n 节点循环图，寻找承载谱稳定扭曲态的最稠密者。
    每个度数层最多检查 剩余预算 / 剩余层数 个偏移集合；
    找到的层之上若有层被截断，则结果标记为 incomplete
    """
    if n < 5:
        raise DomainError(f"pattern search needs n >= 5, got {n}")
    budget = Config.PATTERN_BUDGET if budget is None else budget
    if budget < 1:
        raise DomainError(f"budget must be >= 1, got {budget}")

    degrees = list(range(n - 1, 1, -1))
    remaining, examined, truncated = budget, 0, False
    for index, degree in enumerate(degrees):
        if remaining <= 0:
            truncated = True
            break
        cap = max(1, remaining // (len(degrees) - index))
        batch = list(islice(GraphEngine.circulant_offset_level(n, degree), cap + 1))
        if len(batch) > cap:
            truncated = True
            batch = batch[:cap]
        remaining -= len(batch)
        batch = [offsets for offsets in batch if gcd(n, *offsets) == 1]
        if not batch:
            continue
        examined += len(batch)

        with ThreadPool(min(len(batch), workers or Config.POOL_SIZE)) as pool:
            hits = pool.map(partial(stable_twists, n), batch)

        for offsets, qs in zip(batch, hits):
            if not qs:
                continue
            confirmed = first_confirmed_twist(GraphEngine.circulant(n, offsets), qs)
            if confirmed is None:
                continue
            q, _, spectrum, certificate = confirmed
            mu = Fraction(degree, n - 1)
            descriptor = circulant_descriptor(n, offsets)
            if mu > GraphEngine.sync_sufficient_mu(n):
                raise ConsistencyViolation(
                    f"stable q={q} pattern on {descriptor} with mu={mu} above the synchrony bound",
                    [descriptor],
                )
            failed = certificate.violations()
            if failed:
                raise ConsistencyViolation(
                    f"stable q={q} pattern on {descriptor} violates {failed}", failed,
                )
            logger.info("n=%d: densest stable pattern %s q=%d mu=%s (examined %d)",
                        n, descriptor, q, mu, examined)
            return PatternRecord(
                n=n,
                found=True,
                complete=not truncated,
                examined=examined,
                offsets=list(offsets),
                degree=degree,
                mu=float(mu),
                q=q,
                spectrum=spectrum,
                certificate=certificate,
            )

    if truncated:
        logger.warning("n=%d: budget %d exhausted before any stable pattern was found", n, budget)
    return PatternRecord(n=n, found=False, complete=not truncated, examined=examined)


def run_chain_sweep(
    n_max: int = 24,
    trials: int = 100,
    seed: Optional[int] = None,
    n_min: int = 5,
    t_end: Optional[float] = None,
) -> ChainSweepReport:
    """
    μ̃ > 3/4 的全部连通循环图上的一致性检查：
    任何扭曲态都不得谱稳定，稳定态必须满足全部证书，随机初值必须同步
    """
    if n_min < 3 or n_max < n_min:
        raise DomainError(f"invalid sweep range [{n_min}, {n_max}]")
    report = ChainSweepReport(n_max=n_max, graphs_checked=0, states_checked=0)

    for n in range(n_min, n_max + 1):
        # μ̃ = (degree+1)/n > 3/4
        for degree in range(n - 1, 1, -1):
            if 4 * (degree + 1) <= 3 * n:
                break
            for offsets in GraphEngine.circulant_offset_level(n, degree):
                if gcd(n, *offsets) != 1:
                    continue
                g = GraphEngine.circulant(n, offsets)
                descriptor = circulant_descriptor(n, offsets)
                report.graphs_checked += 1

                candidates = [(0, DynamicsEngine.all_in_phase(n))]
                candidates += [(q, DynamicsEngine.twisted_state(n, q)) for q in range(1, n // 2 + 1)]
                for q, s0 in candidates:
                    s = DynamicsEngine.refine_equilibrium(g, s0)
                    spectrum = SpectralEngine.spectrum(g, s)
                    report.states_checked += 1
                    if spectrum.classification != Stability.STABLE:
                        continue
                    if q > 0:
                        report.stable_patterns.append(f"{descriptor} q={q}")
                    failed = CertificateEngine.certificate_report(g, s, spectrum).violations()
                    if failed:
                        report.certificate_failures.append(f"{descriptor} q={q}: {','.join(failed)}")

                if trials > 0:
                    basin = run_basin(g, trials, seed, graph_id=descriptor, t_end=t_end)
                    if basin.synced < trials:
                        report.basin_failures.append(f"{descriptor}: {basin.synced}/{trials}")

    level = logging.INFO if report.passed else logging.ERROR
    logger.log(level, "chain sweep n<=%d: %d graphs, %d states, %d stable patterns, %d certificate failures, %d basin failures",
               n_max, report.graphs_checked, report.states_checked, len(report.stable_patterns),
               len(report.certificate_failures), len(report.basin_failures))
    return report
