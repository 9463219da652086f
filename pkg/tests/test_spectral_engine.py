import numpy as np
import pytest

from kuramoto_certify.engines.dynamics_engine import DynamicsEngine, PhaseState
from kuramoto_certify.engines.graph_engine import GraphEngine
from kuramoto_certify.engines.spectral_engine import SpectralEngine
from kuramoto_certify.exceptions import PreconditionError
from kuramoto_certify.schemas import Stability

from tests.conftest import random_graph, random_state


def test_jacobian_all_in_phase_is_negative_laplacian():
    g = GraphEngine.complete(5)
    jac = SpectralEngine.jacobian(g, DynamicsEngine.all_in_phase(5))
    laplacian = np.diag(g.degrees) - g.coupling
    np.testing.assert_allclose(jac, -laplacian, atol=1e-15)


def test_jacobian_matches_central_differences(rng):
    h = 1e-6
    for n in range(3, 11):
        for _ in range(5):
            g = random_graph(rng, n, density=rng.uniform(0.3, 0.9), self_loops=bool(rng.integers(2)))
            s = random_state(rng, n)
            jac = SpectralEngine.jacobian(g, s, override=True)
            numeric = np.empty((n, n))
            for k in range(n):
                step = np.zeros(n)
                step[k] = h
                plus = DynamicsEngine.rhs(g, PhaseState(s.theta + step))
                minus = DynamicsEngine.rhs(g, PhaseState(s.theta - step))
                numeric[:, k] = (plus - minus) / (2 * h)
            assert np.max(np.abs(jac - numeric)) < 1e-5


def test_spectrum_all_in_phase_k4():
    report = SpectralEngine.spectrum(GraphEngine.complete(4), DynamicsEngine.all_in_phase(4))
    np.testing.assert_allclose(report.eigenvalues, [-4.0, -4.0, -4.0, 0.0], atol=1e-12)
    assert report.zero_multiplicity == 1
    assert report.classification == Stability.STABLE


@pytest.mark.parametrize("g", [
    GraphEngine.cycle(7),
    GraphEngine.circulant(10, {1, 4}),
    GraphEngine.add_self_loops(GraphEngine.cycle(6)),
    GraphEngine.twin(GraphEngine.cycle(4), 3),
])
def test_spectrum_all_in_phase_always_stable(g):
    assert SpectralEngine.spectrum(g, DynamicsEngine.all_in_phase(g.n)).classification == Stability.STABLE


def test_twisted_c4_jacobian_vanishes():
    g, s = GraphEngine.cycle(4), DynamicsEngine.twisted_state(4, 1)
    np.testing.assert_allclose(SpectralEngine.jacobian(g, s), 0.0, atol=1e-15)
    report = SpectralEngine.spectrum(g, s)
    assert report.zero_multiplicity == 4
    assert report.classification == Stability.MARGINAL


@pytest.mark.parametrize("m", range(1, 9))
def test_twin_c4_lift_is_marginal(m):
    g = GraphEngine.twin(GraphEngine.cycle(4), m)
    s = DynamicsEngine.lift_state(DynamicsEngine.twisted_state(4, 1), m)
    report = SpectralEngine.spectrum(g, s)
    assert report.classification == Stability.MARGINAL
    assert report.zero_multiplicity == 4


def test_twisted_c5_is_stable():
    report = SpectralEngine.spectrum(GraphEngine.cycle(5), DynamicsEngine.twisted_state(5, 1))
    assert report.classification == Stability.STABLE
    assert report.zero_multiplicity == 1
    nonzero = [v for v in report.eigenvalues if abs(v) >= report.zero_tol]
    assert max(nonzero) < 0.0


def test_anti_phase_pair_is_unstable():
    report = SpectralEngine.spectrum(GraphEngine.complete(2), PhaseState([0.0, np.pi]))
    np.testing.assert_allclose(report.eigenvalues, [0.0, 2.0], atol=1e-12)
    assert report.classification == Stability.UNSTABLE


def test_jacobian_requires_equilibrium():
    g = GraphEngine.complete(4)
    s = PhaseState([0.0, 0.5, 1.0, 1.5])
    with pytest.raises(PreconditionError):
        SpectralEngine.jacobian(g, s)
    jac = SpectralEngine.jacobian(g, s, override=True)
    assert np.max(np.abs(jac - jac.T)) == 0.0


def test_classify_thresholds():
    assert SpectralEngine.classify(np.array([-2.0, -1.0, 0.0]), 1e-8).classification == Stability.STABLE
    assert SpectralEngine.classify(np.array([-1.0, 1e-9, -1e-9]), 1e-8).classification == Stability.MARGINAL
    assert SpectralEngine.classify(np.array([0.0, 1e-3]), 1e-8).classification == Stability.UNSTABLE


@pytest.mark.parametrize("n, offsets", [(10, {1, 3}), (10, {1, 5}), (9, {2, 3, 4}), (12, {1, 2, 6})])
def test_closed_form_matches_eigensolver(n, offsets):
    g = GraphEngine.circulant(n, offsets)
    qs = range(0, n // 2 + 1)
    closed = SpectralEngine.circulant_twisted_spectra(n, offsets, qs)
    for q, row in zip(qs, closed):
        s = DynamicsEngine.twisted_state(n, q)
        numeric = SpectralEngine.spectrum(g, s).eigenvalues
        np.testing.assert_allclose(row, numeric, atol=1e-10)
    np.testing.assert_allclose(SpectralEngine.circulant_twisted_spectrum(n, offsets, 1), closed[1], atol=1e-12)


def test_export_format():
    exported = SpectralEngine.spectrum(GraphEngine.cycle(5), DynamicsEngine.twisted_state(5, 1)).to_export()
    assert set(exported) == {"eigenvalues", "zero_multiplicity", "classification"}
    assert exported["classification"] == "Stable"
