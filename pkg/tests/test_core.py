import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gelfand.core import (
    EXPONENTIAL,
    Nonlinearity,
    Power,
    ProblemParams,
    SolutionPair,
    branch_monotonicity_check,
    jacobian,
    minimal_solution,
    newton_solve,
    residual,
    residual_tolerance,
)
from gelfand.errors import Diverged, InvalidParameter, MeshMismatch
from gelfand.linalg import join
from gelfand.mesh import build_mesh, with_boundary
from oracles import SCALAR_N3_LAM2


def test_nonlinearity_parse_round_trip():
    assert Nonlinearity.parse("exp") == EXPONENTIAL
    p = Nonlinearity.parse("power:3.5")
    assert p == Power(3.5) and Nonlinearity.parse(str(p)) == p
    for bad in ("cosh", "power:x", "power:1"):
        with pytest.raises(InvalidParameter):
            Nonlinearity.parse(bad)


def test_params_validation_message():
    m = build_mesh(3, 20)
    with pytest.raises(InvalidParameter, match="λ must be positive"):
        ProblemParams(-1.0, 1.0, m)
    with pytest.raises(InvalidParameter, match="γ must be positive"):
        ProblemParams(1.0, 0.0, m)
    with pytest.raises(InvalidParameter):
        ProblemParams(float("nan"), 1.0, m)


def test_diagonal_case_has_equal_components():
    pair = minimal_solution(ProblemParams(0.5, 0.5, build_mesh(3, 200)))
    np.testing.assert_allclose(pair.u, pair.v, atol=1e-9)
    assert pair.minimal and pair.info["polished"]


def test_matches_shooting_solution():
    m = build_mesh(3, 400)
    pair = minimal_solution(ProblemParams(2.0, 2.0, m))
    assert pair.u[0] == pytest.approx(SCALAR_N3_LAM2[0.0], abs=2e-5)
    assert pair.u[200] == pytest.approx(SCALAR_N3_LAM2[0.5], abs=2e-5)


def test_swap_symmetry_is_exact():
    m = build_mesh(4, 100)
    a = minimal_solution(ProblemParams(3.0, 1.2, m))
    b = minimal_solution(ProblemParams(1.2, 3.0, m))
    np.testing.assert_array_equal(a.u, b.v)
    np.testing.assert_array_equal(a.v, b.u)


def test_diverges_above_critical_value():
    with pytest.raises(Diverged) as info:
        minimal_solution(ProblemParams(3.0, 3.0, build_mesh(2, 200)))
    assert info.value.last_sup_norm > 50 and info.value.iterations >= 1


def test_iteration_budget_raises_diverged():
    with pytest.raises(Diverged):
        minimal_solution(ProblemParams(1.5, 1.5, build_mesh(2, 100)), max_iter=3)


def test_residual_below_tolerance():
    params = ProblemParams(4.0, 2.0, build_mesh(5, 200))
    pair = minimal_solution(params)
    ru, rv = residual(params, pair)
    res = max(np.max(np.abs(ru)), np.max(np.abs(rv)))
    assert res <= residual_tolerance(params, pair.u, pair.v)
    assert pair.residual_norm == pytest.approx(res)


def test_newton_recovers_from_perturbation():
    params = ProblemParams(2.0, 1.0, build_mesh(3, 100))
    pair = minimal_solution(params)
    bumped = SolutionPair(pair.u + 0.01 * (1 - pair.params.mesh.radii**2), pair.v.copy(), params)
    back = newton_solve(params, bumped)
    np.testing.assert_allclose(back.u, pair.u, atol=1e-10)
    assert back.newton_iterations <= 6


def test_branch_is_monotone_in_lambda():
    m = build_mesh(3, 100)
    pairs = [minimal_solution(ProblemParams.on_ray(lam, 0.7, m)) for lam in (0.5, 1.0, 2.0, 3.0)]
    assert branch_monotonicity_check(pairs) >= 0.0
    with pytest.raises(MeshMismatch):
        branch_monotonicity_check([pairs[0], minimal_solution(ProblemParams(0.5, 0.35, build_mesh(3, 50)))])
    with pytest.raises(InvalidParameter):
        branch_monotonicity_check([pairs[0], minimal_solution(ProblemParams(0.5, 0.5, m))])


def test_power_nonlinearity_solve():
    params = ProblemParams(0.5, 0.5, build_mesh(3, 200), Power(2.0))
    pair = minimal_solution(params)
    ru, _ = residual(params, pair)
    assert np.max(np.abs(ru)) <= residual_tolerance(params, pair.u, pair.v)
    np.testing.assert_allclose(pair.u, pair.v, atol=1e-9)


def _fd_defect(params, u, v, d, eps=1e-6):
    """Relative gap between a central difference of the residual and J d."""
    def F(x):
        return join(*residual(params, SolutionPair(with_boundary(x[0::2]), with_boundary(x[1::2]), params)))

    x = join(u, v)
    fd = (F(x + eps * d) - F(x - eps * d)) / (2 * eps)
    jd = jacobian(params, SolutionPair(with_boundary(u), with_boundary(v), params)) @ d
    return np.max(np.abs(fd - jd)) / np.max(np.abs(jd))


@given(
    st.integers(min_value=0, max_value=2**31),
    st.sampled_from(["exp", "power:2", "power:3.5"]),
    st.integers(min_value=1, max_value=10),
)
def test_jacobian_matches_finite_differences(seed, nl, N):
    rng = np.random.default_rng(seed)
    n = 60
    params = ProblemParams(rng.uniform(0.1, 10), rng.uniform(0.1, 10), build_mesh(N, n), Nonlinearity.parse(nl))
    u, v = rng.uniform(0, 3, size=n), rng.uniform(0, 3, size=n)
    d = rng.normal(size=2 * n)
    assert _fd_defect(params, u, v, d) <= 1e-5


@given(
    st.floats(min_value=0.05, max_value=1.0),
    st.floats(min_value=0.1, max_value=1.0),
    st.integers(min_value=1, max_value=6),
)
def test_minimal_solution_properties(lam, sigma, N):
    pair = minimal_solution(ProblemParams.on_ray(lam, sigma, build_mesh(N, 60)))
    assert np.all(pair.u[:-1] > 0) and np.all(pair.v[:-1] > 0)
    assert pair.u[-1] == 0.0 and pair.v[-1] == 0.0
    # radially decreasing
    assert np.all(np.diff(pair.u) <= 1e-12) and np.all(np.diff(pair.v) <= 1e-12)
    # γ <= λ: σu <= v <= u
    assert np.min(pair.u - pair.v) >= -1e-8
    assert np.min(pair.v - sigma * pair.u) >= -1e-8
