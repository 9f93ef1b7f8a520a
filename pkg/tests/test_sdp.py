import numpy as np
import pytest
from hypothesis import given, strategies as st

from vlcbo import sdp
from vlcbo.errors import NoFeasibleCandidate


def random_instance(seed, n=4, m=3):
    """Equality-form SDP with a known strictly feasible primal and dual point."""
    rng = np.random.default_rng(seed)
    As = [(lambda a: (a + a.T) / 2)(rng.standard_normal((n, n))) for _ in range(m)]
    B = rng.standard_normal((n, n))
    X0 = B @ B.T + 0.1 * np.eye(n)
    b = [float(np.sum(a * X0)) for a in As]
    B = rng.standard_normal((n, n))
    C = B @ B.T + 0.1 * np.eye(n) + sum(y * a for y, a in zip(rng.standard_normal(m), As))
    prob = sdp.SdpProblem([n], cost={0: C})
    for a, bb in zip(As, b):
        prob.add_constraint({0: a}, "=", bb)
    return prob, C, As, b


def oracle_value(C, As, b):
    cp = pytest.importorskip("cvxpy")
    X = cp.Variable(C.shape, PSD=True)
    pr = cp.Problem(cp.Minimize(cp.trace(C @ X)), [cp.trace(a @ X) == bb for a, bb in zip(As, b)])
    pr.solve(solver="CLARABEL")
    return pr.value


def test_trace_with_corner_bound():
    prob = sdp.SdpProblem([2], cost={0: np.eye(2)})
    prob.add_constraint({0: np.diag([1.0, 0.0])}, ">=", 1.0)
    s = sdp.solve(prob)
    assert s.status == sdp.OPTIMAL
    assert s.objective == pytest.approx(1.0, abs=1e-7)
    np.testing.assert_allclose(s.blocks[0], np.diag([1.0, 0.0]), atol=1e-7)


def test_unconstrained_psd_cost():
    s = sdp.solve(sdp.SdpProblem([3], cost={0: np.diag([1.0, 2.0, 3.0])}))
    assert s.status == sdp.OPTIMAL
    assert abs(s.objective) < 1e-7 and np.abs(s.blocks[0]).max() < 1e-7


def test_primal_infeasible():
    prob = sdp.SdpProblem([2], cost={0: np.eye(2)})
    prob.add_constraint({0: np.diag([1.0, 0.0])}, "<=", -1.0)
    s = sdp.solve(prob)
    assert (s.status, s.certificate) == (sdp.INFEASIBLE, "primal")


def test_dual_infeasible():
    s = sdp.solve(sdp.SdpProblem([2], cost={0: -np.diag([1.0, 0.0])}))
    assert (s.status, s.certificate) == (sdp.INFEASIBLE, "dual")


def test_scalar_blocks_act_as_lp():
    # min x + 2y  s.t.  x + y >= 1,  x <= 0.25
    prob = sdp.SdpProblem([1, 1], cost={0: [[1.0]], 1: [[2.0]]})
    prob.add_constraint({0: [[1.0]], 1: [[1.0]]}, ">=", 1.0)
    prob.add_constraint({0: [[1.0]]}, "<=", 0.25)
    s = sdp.solve(prob)
    assert s.objective == pytest.approx(0.25 + 1.5, abs=1e-7)


def test_bad_input():
    with pytest.raises(ValueError):
        sdp.SdpProblem([0])
    prob = sdp.SdpProblem([2])
    with pytest.raises(ValueError):
        prob.add_constraint({0: np.eye(2)}, "<", 1.0)
    with pytest.raises(ValueError):
        prob.add_constraint({0: np.eye(3)}, "=", 1.0)


def test_text_dump():
    prob = sdp.SdpProblem([2], cost={0: np.eye(2)})
    prob.add_constraint({0: np.diag([1.0, 0.0])}, ">=", 1.0)
    text = prob.to_text()
    assert text.splitlines()[0].startswith("blocks")
    assert "con 1 >= 1" in text


@pytest.mark.parametrize("seed", range(50))
def test_random_instances_against_oracle(seed):
    prob, C, As, b = random_instance(seed)
    s = sdp.solve(prob)
    assert s.status == sdp.OPTIMAL
    assert s.rel_gap <= 1e-8
    assert s.objective == pytest.approx(oracle_value(C, As, b), abs=1e-5)
    assert np.linalg.eigvalsh(s.blocks[0]).min() >= -1e-8
    final = s.history[-1]
    assert final["pobj"] >= final["dobj"] - 1e-8 * (1 + abs(final["pobj"]))
    assert all(h["complementarity"] >= -1e-12 for h in s.history)


def test_extract_rank_one():
    p = np.array([0.3, 0.1, 0.7])
    np.testing.assert_allclose(sdp.extract_rank_one(np.outer(p, p)), p, atol=1e-12)
    np.testing.assert_allclose(sdp.extract_rank_one(np.outer(-p, -p)), p, atol=1e-12)
    assert sdp.extract_rank_one(np.eye(2)) is None
    np.testing.assert_allclose(sdp.extract_rank_one(np.diag([1.0, 1e-8])), [1.0, 0.0], atol=1e-12)
    assert sdp.extract_rank_one(np.zeros((2, 2))) is None


def _rate_feasibility(g, c2, cap):
    def feas(x):
        x = x * (c2 / float(g @ x))
        return x if x.max() <= cap else None
    return feas


def test_randomization_rank_one_input():
    p = np.array([0.2, 0.5])
    g = np.array([1.0, 2.0])
    feas = _rate_feasibility(g, float(g @ p), 1.0)
    np.testing.assert_allclose(sdp.gaussian_randomization(np.outer(p, p), feas, 50, 0), p, atol=1e-6)


def test_randomization_zero_matrix():
    feas = _rate_feasibility(np.ones(2), 1.0, 1.0)
    with pytest.raises(NoFeasibleCandidate):
        sdp.gaussian_randomization(np.zeros((2, 2)), feas, 100, 0)


@given(st.integers(0, 2 ** 31 - 1))
def test_randomization_reproducible(seed):
    X = np.array([[1.0, 0.3], [0.3, 0.5]])
    feas = _rate_feasibility(np.array([1.0, 1.0]), 1.0, 10.0)
    a = sdp.gaussian_randomization(X, feas, 20, seed)
    b = sdp.gaussian_randomization(X, feas, 20, seed)
    assert np.array_equal(a, b)
