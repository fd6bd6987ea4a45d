import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_feasible_w
from hankelpath.admm import AdmmConfig, solve
from hankelpath.certify import (
    alignment,
    build_certificate,
    check_membership,
    duality_gap,
    gap_raw,
    next_lambda_cost,
    next_lambda_sv,
    recover_w_perp,
    sv_bound,
    sv_first_bound,
)
from hankelpath.errors import ValidationError
from hankelpath.hankel import cn_constant, frobenius_constant, hankel_map
from hankelpath.oracle import dense_path
from hankelpath.spectral import compact_svd, sv_distance_sq

TIGHT = AdmmConfig(eps_abs=1e-11, eps_rel=1e-11, max_iters=200000)


@pytest.fixture
def unit_cert():
    # x_star = e_1 gives a = e_1; g_o - x_star = 0.5 e_1
    return build_certificate(0.5, [1.0, 0.0, 0.0]), np.array([1.5, 0.0, 0.0])


def test_a_vec_examples(unit_cert):
    cert, _ = unit_cert
    np.testing.assert_allclose(cert.a_vec, [1, 0, 0], atol=1e-15)
    zero = build_certificate(0.0, np.zeros(5))
    assert zero.svd.rank == 0 and not zero.a_vec.any()


@given(st.integers(1, 10), st.integers(0, 10**6))
def test_a_vec_norm_bounds(p, seed):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(2 * p - 1)
    x[rng.uniform(size=x.shape) < 0.3] = 0.0
    cert = build_certificate(0.0, x)
    assert cert.a_norm <= cn_constant(p) * (1 + 1e-12)
    W = random_feasible_w(rng, cert.svd.U, cert.svd.V, p)
    general = cert.with_w(W)
    assert general.a_norm <= 2 * cn_constant(p) * (1 + 1e-12)
    # every entry of a subgradient lies in [-1, 1], so c_n also bounds the general case
    assert general.a_norm <= cn_constant(p) * (1 + 1e-9)


def test_duality_gap_examples(unit_cert):
    cert, g_o = unit_cert
    assert duality_gap(cert, g_o, 1.0) == pytest.approx(0.5)
    assert duality_gap(cert, g_o, 2.0) >= duality_gap(cert, g_o, 1.0)
    with pytest.raises(ValidationError):
        duality_gap(cert, g_o, 0.25)


def test_gap_vanishes_with_recovered_w():
    g_o = np.random.default_rng(0).standard_normal(5)
    lam = 0.5 * np.linalg.norm(g_o)
    rep = solve(g_o, lam, TIGHT)
    rank = compact_svd(rep.H, 1e-9).rank
    base = build_certificate(lam, rep.g_opt, rank=rank)
    cert = base.with_w(recover_w_perp(base, g_o, rep.Z))
    check_membership(cert.svd, cert.W)
    assert duality_gap(cert, g_o, lam) <= 1e-6
    assert math.degrees(math.acos(min(1.0, alignment(cert, g_o)))) <= 5.0


def test_recover_w_perp_degenerate_cases():
    g_o = np.array([1.0, 2.0, 0.5])
    cert0 = build_certificate(0.0, g_o)
    assert not recover_w_perp(cert0, g_o, np.ones((2, 2))).any()
    cert = build_certificate(0.3, [1.0, 0.0, 0.0])
    assert not recover_w_perp(cert, g_o, cert.svd.uvt()).any()


def test_membership_violations_are_named():
    cert = build_certificate(0.0, [1.0, 0.0, 0.0])
    with pytest.raises(ValidationError, match="U'W"):
        build_certificate(0.0, [1.0, 0.0, 0.0], W=np.eye(2))
    with pytest.raises(ValidationError, match=r"\|\|W\|\|"):
        build_certificate(0.0, [1.0, 0.0, 0.0], W=np.diag([0.0, 2.0]))
    with pytest.raises(ValidationError, match="WV"):
        # U = e1 but W has a component along V = e1 on the right only
        check_membership(cert.svd, np.array([[0.0, 0.0], [1.0, 0.0]]))
    with pytest.raises(ValidationError):
        check_membership(cert.svd, np.zeros((3, 3)))


def test_sv_bound_examples():
    cert = build_certificate(1.0, [3.0, 0.0, 1.0])
    C_A = frobenius_constant(3)
    assert sv_first_bound(cert) == pytest.approx(18.0)
    assert sv_bound(cert, 2.0, C_A) == pytest.approx(9.0)
    assert sv_bound(cert, 1.0, C_A) == 0.0
    assert sv_bound(cert, 1e6, C_A) == pytest.approx(18.0)
    assert sv_bound(cert, 1e6, C_A, use_first=False) == pytest.approx(3 * (1e12 - 1))


def test_sv_first_bound_tie_breaking():
    # equal singular values: either choice gives the same value
    cert = build_certificate(0.0, [1.0, 0.0, 1.0])
    assert sv_first_bound(cert) == pytest.approx(1 + (1 - 2) ** 2)


def test_next_lambda_cost_examples(unit_cert):
    cert, g_o = unit_cert
    assert next_lambda_cost(cert, g_o, 0.25, 10.0) == pytest.approx(0.75)
    assert next_lambda_cost(cert, g_o, 100.0, 10.0) == 10.0
    zero = build_certificate(0.2, np.zeros(3))
    assert next_lambda_cost(zero, g_o, 0.1, 3.0) == 3.0
    with pytest.raises(ValidationError):
        next_lambda_cost(cert, g_o, 0.0, 10.0)


def test_next_lambda_sv_examples():
    big = build_certificate(0.0, [3.0, 0.0, 1.0])
    assert next_lambda_sv(big, 0.3, 3.0, 10.0) == pytest.approx(math.sqrt(0.1))
    small = build_certificate(0.0, [math.sqrt(0.1), 0.0, 0.0])
    assert sv_first_bound(small) == pytest.approx(0.2)
    assert next_lambda_sv(small, 0.3, 3.0, 10.0) == 10.0
    step = build_certificate(math.sqrt(0.1), [3.0, 0.0, 1.0])
    assert next_lambda_sv(step, 0.3, 3.0, 10.0) == pytest.approx(math.sqrt(0.2))
    with pytest.raises(ValidationError):
        next_lambda_sv(big, -1.0, 3.0, 10.0)


@given(st.integers(1, 6), st.floats(0.0, 3.0), st.integers(0, 10**6))
def test_relaxed_minimizer_attains_bound(p, lam_star, seed):
    # the relaxed problem min a'(x - x_star) over ||x - g_o|| <= lam is solved by g_o - lam a/||a||
    rng = np.random.default_rng(seed)
    x_star = rng.standard_normal(2 * p - 1)
    g_o = x_star + rng.standard_normal(2 * p - 1)
    cert = build_certificate(lam_star, x_star)
    lam = lam_star + 1.0
    a = cert.a_vec
    x_rel = g_o - lam * a / np.linalg.norm(a)
    assert a @ (x_rel - x_star) == pytest.approx(-gap_raw(cert, g_o, lam), abs=1e-12 * (1 + lam * np.linalg.norm(a)))


@given(st.integers(1, 6), st.integers(0, 10**6))
def test_bounds_monotone_in_lambda(p, seed):
    rng = np.random.default_rng(seed)
    x_star = rng.standard_normal(2 * p - 1)
    g_o = x_star + rng.standard_normal(2 * p - 1)
    cert = build_certificate(0.3, x_star)
    lams = np.linspace(0.3, 5.0, 20)
    d = [gap_raw(cert, g_o, lam) for lam in lams]
    np.testing.assert_allclose(np.diff(d, 2), 0.0, atol=1e-10)
    assert np.all(np.diff(d) >= 0)
    s = [sv_bound(cert, lam, 3.0) for lam in lams]
    assert np.all(np.diff(s) >= 0)


def test_truncated_support_keeps_gap_an_upper_bound():
    x = np.array([1.0, 0.0, 1e-3, 0.0, 0.0])
    full = build_certificate(0.0, x)
    cut = build_certificate(0.0, x, rank=1)
    assert cut.tail_mass > 0 and full.tail_mass == 0
    assert cut.slack == 2 * cut.tail_mass


def test_soundness_against_oracle_sweep():
    g_o = np.random.default_rng(4).standard_normal(5)
    C_A = frobenius_constant(5)
    sweep = dense_path(g_o, 30, workers=1, restarts=3)
    for k in (4, 12, 20):
        lam_star = sweep[k][0]
        rep = solve(g_o, lam_star, TIGHT)
        cert = build_certificate(lam_star, rep.g_opt)
        for lam, g, _, obj in sweep[k:]:
            assert rep.objective - obj <= duality_gap(cert, g_o, lam) + 1e-6
            assert sv_distance_sq(hankel_map(rep.g_opt), hankel_map(g)) <= sv_bound(cert, lam, C_A) + 1e-6
            assert cert.a_vec @ (g - rep.g_opt) <= 1e-8
            assert np.sum((rep.g_opt - g) ** 2) <= lam**2 - lam_star**2 + 1e-8
