import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import hankelpath.path as path_mod
from hankelpath.admm import AdmmConfig
from hankelpath.certify import build_certificate, duality_gap, next_lambda_cost
from hankelpath.errors import PathError, ValidationError
from hankelpath.fw import FwConfig, optimize_w
from hankelpath.hankel import cn_constant, frobenius_constant, hankel_map
from hankelpath.oracle import dense_path
from hankelpath.path import ToleranceSpec, max_evals_cost, max_evals_sv, run_path
from hankelpath.spectral import nuclear_norm, sv_distance_sq


def _jmax(g):
    return nuclear_norm(hankel_map(g))


def _two_mode(n=5):
    k = np.arange(n)
    return 1.0 * 0.7**k + 0.6 * (-0.5) ** k


def test_spec_validation():
    for bad in (dict(algorithm="x"), dict(eps=0), dict(c_a_mode="x"), dict(w_policy="x"), dict(fw_iters=-1)):
        with pytest.raises(ValidationError):
            ToleranceSpec(**bad)


def test_max_evals_cost_examples():
    g = np.array([1.0, 0.0, 0.0])
    assert cn_constant(2) == pytest.approx(math.sqrt(6))
    assert max_evals_cost(g, 0.5) == 4
    assert max_evals_cost(g, 0.5, "general") == 9
    assert max_evals_cost(g, 10.0) == 1
    with pytest.raises(ValidationError):
        max_evals_cost(g, 0.5, "other")


def test_max_evals_sv_examples():
    g = np.array([1.0, 0.0, 0.0])
    assert max_evals_sv(g, 0.5, 3) == 6
    assert max_evals_sv(g, 1e9, 3) == 1
    with pytest.raises(ValidationError):
        max_evals_sv(g, 0.0, 3)


@given(st.integers(1, 400), st.integers(1, 10), st.integers(0, 10**6))
def test_grid_count_round_trip(M, p, seed):
    g = np.random.default_rng(seed).standard_normal(2 * p - 1)
    C_A = frobenius_constant(g.shape[0])
    assert max_evals_sv(g, C_A * float(g @ g) / M, C_A) == M


def test_huge_eps_gives_single_point():
    g = _two_mode()
    res = run_path(g, ToleranceSpec("cost", cn_constant(3) * np.linalg.norm(g)))
    assert res.grid == [0.0] and res.m == 0 and res.complete


def test_zero_input_is_trivial():
    res = run_path(np.zeros(5), ToleranceSpec("sv", 1.0))
    assert res.complete and res.m == 0


def test_sv_grid_without_first_bound_is_square_root_sequence():
    g = _two_mode(7)
    C_A = frobenius_constant(7)
    eps = C_A * float(g @ g) / 17
    res = run_path(g, ToleranceSpec("sv", eps, use_first_bound=False))
    expected = [math.sqrt(i * eps / C_A) for i in range(len(res.grid))]
    np.testing.assert_allclose(res.grid, expected, rtol=0, atol=1e-12)
    assert res.right[-1] == res.lam_max
    assert res.m <= res.m_bound == 17


@pytest.mark.parametrize("algorithm", ["cost", "sv"])
def test_partition_and_anchoring(algorithm):
    g = _two_mode(9)
    eps = 0.2 * _jmax(g) if algorithm == "cost" else frobenius_constant(9) * float(g @ g) / 30
    res = run_path(g, ToleranceSpec(algorithm, eps))
    assert res.grid[0] == 0.0
    assert np.array_equal(res.solutions[0], g)
    assert all(a < b for a, b in zip(res.grid, res.right))
    assert res.right[:-1] == res.grid[1:]
    assert res.right[-1] == res.lam_max
    assert max(res.bound_trace) <= eps * (1 + 1e-12)
    assert res.m <= res.m_bound
    assert res.interval_index(res.lam_max) is None
    assert res.objective_at(res.lam_max * 2) == 0.0
    i = len(res.grid) // 2
    np.testing.assert_array_equal(res.solution_at(res.grid[i]), res.solutions[i])
    assert np.array_equal(res.sigma_at(1e9), np.zeros(5))


@settings(max_examples=15)
@given(st.integers(2, 5), st.floats(0.1, 0.7), st.integers(0, 10**6))
def test_grid_count_within_a_priori_bounds(p, frac, seed):
    g = np.random.default_rng(seed).standard_normal(2 * p - 1)
    res = run_path(g, ToleranceSpec("cost", frac * _jmax(g)))
    assert res.m <= max_evals_cost(g, frac * _jmax(g))
    C_A = frobenius_constant(g.shape[0])
    eps = frac * C_A * float(g @ g)
    res = run_path(g, ToleranceSpec("sv", eps))
    assert res.m <= max_evals_sv(g, eps, C_A)


def test_two_mode_sv_path_certified_against_oracle():
    g = _two_mode(5)
    eps = 5 * float(g @ g) / 30
    res = run_path(g, ToleranceSpec("sv", eps))
    assert res.m <= 30
    for lam, x, _, _ in dense_path(g, 60, workers=1, restarts=3):
        err = sv_distance_sq(hankel_map(res.solution_at(lam)), hankel_map(x))
        assert err <= eps + 2e-3


def test_strict_zero_policy_stalls_where_best_policy_succeeds():
    g = np.random.default_rng(0).standard_normal(5)
    eps = 0.2 * _jmax(g)
    with pytest.raises(PathError, match="cannot advance") as info:
        run_path(g, ToleranceSpec("cost", eps, w_policy="zero"))
    assert info.value.partial is not None and not info.value.partial.complete
    res = run_path(g, ToleranceSpec("cost", eps))
    assert res.complete and res.m <= res.m_bound
    assert res.uses_general_w()


def test_strict_zero_policy_can_exceed_the_bound():
    g = np.random.default_rng(7).standard_normal(5)
    with pytest.raises(PathError, match="a-priori bound"):
        run_path(g, ToleranceSpec("cost", 0.2 * _jmax(g), w_policy="zero"))


def test_frank_wolfe_policy():
    g = np.random.default_rng(0).standard_normal(5)
    res = run_path(g, ToleranceSpec("cost", 0.2 * _jmax(g), w_policy="zero", use_fw=True))
    assert res.complete and "fw" in res.w_modes
    assert res.m <= res.m_bound


def test_fw_interval_never_shorter_when_gap_is_lower():
    g = np.random.default_rng(3).standard_normal(7)
    lam = 0.5 * np.linalg.norm(g)
    from hankelpath.admm import solve

    rep = solve(g, lam)
    cert0 = build_certificate(lam, rep.g_opt, rank=path_mod._admm_rank(rep))
    eps = 0.1 * _jmax(g)
    nxt0 = next_lambda_cost(cert0, g, eps, np.linalg.norm(g))
    cand = max(lam, nxt0)
    fw = optimize_w(cert0, g, cand, FwConfig(max_iters=100))
    assert duality_gap(fw, g, cand) <= duality_gap(cert0, g, cand)
    assert next_lambda_cost(fw, g, eps, np.linalg.norm(g)) >= nxt0


def test_admm_failure_aborts_with_partial():
    g = _two_mode(7)
    with pytest.raises(PathError, match="did not converge") as info:
        run_path(g, ToleranceSpec("cost", 0.2 * _jmax(g)), AdmmConfig(max_iters=2))
    assert info.value.partial.grid == [0.0]


def test_abort_guard(monkeypatch):
    monkeypatch.setattr(path_mod, "ABORT_FACTOR", 0)
    g = _two_mode(7)
    with pytest.raises(PathError, match="a-priori bound"):
        run_path(g, ToleranceSpec("sv", 0.01))


def test_cost_grid_denser_at_small_lambda():
    k = np.arange(21)
    g = 1.0 * 0.8**k - 0.5 * 0.6**k + 0.3 * 0.3**k
    res = run_path(g, ToleranceSpec("cost", 0.3 * _jmax(g)))
    widths = np.diff(res.grid + [res.right[-1]])
    assert widths[0] < widths[-1]
