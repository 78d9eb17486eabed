import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gelfand.analysis import comparison_margins, energy_report, exponent_window, hardy_check, select_t
from gelfand.core import Power, ProblemParams, minimal_solution
from gelfand.errors import EmptyWindow, InvalidDimension, InvalidParameter, InvalidT, NonpositiveE
from gelfand.linalg import smallest_eigenpair
from gelfand.mesh import build_mesh, laplacian_operator, with_boundary
from gelfand.stability import stability_certificate


def test_select_t_midpoint():
    assert select_t(3, 1.0) == pytest.approx(0.5 * (0.25 + 2.0))
    assert select_t(9, 0.9) == pytest.approx(0.5 * (1.75 + 1.8))
    with pytest.raises(EmptyWindow):
        select_t(9, 0.85)
    with pytest.raises(EmptyWindow):
        select_t(10, 1.0)


def test_exponent_window():
    assert exponent_window(3, 1.0) and exponent_window(5, 0.6) and exponent_window(9, 0.9)
    assert not exponent_window(9, 0.85) and not exponent_window(10, 1.0)
    assert exponent_window(3, 7.9) and not exponent_window(3, 8.1)
    with pytest.raises(InvalidDimension):
        exponent_window(2, 1.0)


@given(st.integers(min_value=3, max_value=9), st.floats(min_value=0.01, max_value=1.0))
def test_window_consistent_with_t(N, sigma):
    if sigma > (N - 2) / 8.0:
        t = select_t(N, sigma)
        assert (N - 2) / 4.0 < t < 2 * sigma
        assert 2 * t + 1 > N / 2.0
    else:
        with pytest.raises(EmptyWindow):
            select_t(N, sigma)


@given(st.integers(min_value=1, max_value=10), st.integers(min_value=0, max_value=2**31))
def test_discrete_hardy_inequality(N, seed):
    m = build_mesh(N, 60)
    _, e = smallest_eigenpair(laplacian_operator(m))
    beta = with_boundary(np.random.default_rng(seed).normal(size=60))
    lhs, rhs = hardy_check(m, with_boundary(e), beta)
    assert lhs <= rhs * (1 + 1e-10) + 1e-12


def test_hardy_with_quadratic_weight():
    m = build_mesh(4, 100)
    E = 1 - m.radii**2
    lhs, rhs = hardy_check(m, E, E**3)
    assert lhs <= rhs


def test_hardy_validation():
    m = build_mesh(3, 20)
    with pytest.raises(NonpositiveE):
        hardy_check(m, np.zeros(21), np.zeros(21))
    with pytest.raises(InvalidParameter):
        hardy_check(m, np.ones(21), np.ones(21))


def _branch_point(N, lam, sigma, n):
    params = ProblemParams.on_ray(lam, sigma, build_mesh(N, n))
    pair = minimal_solution(params)
    return params, pair, stability_certificate(params, pair)


def test_energy_chain_holds():
    params, pair, cert = _branch_point(5, 7.5, 0.6, 200)
    rep = energy_report(params, pair, cert, select_t(5, 0.6))
    assert rep.ok and rep.z_slack > 0 and rep.final_slack > 0
    assert rep.hardy_lhs <= rep.hardy_rhs
    assert rep.norm_exp_v > 0 and math.isfinite(rep.norm_exp_v)


def test_zz_identity_second_order():
    res = []
    for n in (100, 200, 400):
        params, pair, cert = _branch_point(3, 3.0, 1.0, n)
        res.append(energy_report(params, pair, cert, select_t(3, 1.0)).identity_zz_residual)
    assert math.log2(res[0] / res[1]) > 1.8 and math.log2(res[1] / res[2]) > 1.8


def test_energy_report_orients_components():
    params, pair, cert = _branch_point(3, 1.5, 2.0, 100)
    rep = energy_report(params, pair, cert, select_t(3, 0.5))
    assert rep.sigma == pytest.approx(0.5)
    assert rep.z_ok and rep.final_ok


def test_energy_report_rejects_bad_input():
    params, pair, cert = _branch_point(3, 1.0, 1.0, 60)
    with pytest.raises(InvalidT):
        energy_report(params, pair, cert, 2.5)
    p2 = ProblemParams(0.5, 0.5, build_mesh(3, 60), Power(2.0))
    pair2 = minimal_solution(p2)
    with pytest.raises(InvalidParameter):
        energy_report(p2, pair2, stability_certificate(p2, pair2), 1.0)


def test_comparison_margins_swap_invariant():
    _, pair, _ = _branch_point(4, 2.0, 0.5, 80)
    m1, m2 = comparison_margins(pair)
    assert m1 >= -1e-8 and m2 >= -1e-8
    assert comparison_margins(pair.swapped()) == (m1, m2)
