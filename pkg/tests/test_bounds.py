import math

import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, strategies as st

from krylov_errest.bounds import (bound_report, bound_thm41, bound_thm42, bound_thm43, bound_thm44,
                                  estimate_interval, expm1_ratio, gamma1, sampled_moment_max)
from krylov_errest.dense_funm import MatrixFunctionSpec
from krylov_errest.errors import InputError
from krylov_errest.estimates import xi_estimates
from krylov_errest.krylov import arnoldi, krylov_approx, lanczos
from krylov_errest.oracle import reference_fAv
from krylov_errest.sparse_ops import SparseMatrix, SpectralInterval, log_norm_neg

I04 = SpectralInterval(0.0, 4.0)


def exp_spec(tau):
    return MatrixFunctionSpec("exp", tau)


def converging_steps(A, v, spec, build, first=1, last=64):
    """(m, dec, err) up to the first step with relative error <= 1e-12.

    Past that point the computed error is rounding noise while the bounds
    describe the exact-arithmetic error.
    """
    exact = reference_fAv(A, v, spec).exact
    norm = np.linalg.norm(exact)
    for m in range(first, last + 1):
        dec = build(A, v, m)
        err = np.linalg.norm(exact - krylov_approx(dec, spec))
        yield m, dec, err
        if err <= 1e-12 * norm:
            return


@pytest.fixture(scope="module")
def v64():
    return np.random.default_rng(11).random(64)


# constants

@pytest.mark.parametrize("tau, value", [(0.1, math.e**4), (0.5, math.e**20), (1.0, math.e**40)])
def test_gamma1_example_interval(tau, value):
    assert gamma1(SpectralInterval(0, 40), 0.0, tau) == pytest.approx(value, rel=1e-14)


def test_gamma1_tau_zero():
    assert gamma1(SpectralInterval(-1, 3), -1.0, 0.0) == 1.0


def test_gamma1_rejects_negative_tau():
    with pytest.raises(InputError):
        gamma1(I04, 0.0, -1.0)


@given(st.floats(-5, 0), st.floats(0, 3), st.floats(0, 3))
def test_gamma1_monotone_in_tau(lmin, t1, t2):
    iv = SpectralInterval(lmin, lmin + 2)
    lo, hi = sorted((t1, t2))
    assert gamma1(iv, lmin, lo) <= gamma1(iv, lmin, hi) * (1 + 1e-14)


@given(st.floats(-1e-6, 1e-6))
def test_expm1_ratio_series_branch(x):
    exact = 1 + x / 2 + x * x / 6
    assert expm1_ratio(x) == pytest.approx(exact, rel=1e-14)


def test_expm1_ratio_continuity():
    for x in (1e-6, -1e-6):
        assert expm1_ratio(x * 0.999999) == pytest.approx(math.expm1(x) / x, rel=1e-13)


# sampled maximum

def test_sampled_max_matches_direct_sampling(rng):
    H = rng.standard_normal((5, 5)) + 2 * np.eye(5)
    tau, n_t = 0.8, 33
    ts = np.linspace(0, tau, n_t)
    direct = max(abs(sla.expm(-t * H)[-1, 0]) for t in ts)
    assert sampled_moment_max(H, tau, n_t, refine=0) == pytest.approx(direct, rel=1e-10)
    z0 = H[0, 0]

    def phi_moment(t):
        if t == 0:
            return 0.0
        M = np.zeros((6, 6))
        M[:5, :5], M[5, 4], M[5, 5] = -t * H, 1.0, -t * z0
        return abs(sla.expm(M)[5, 0])

    direct_phi = max(phi_moment(t) for t in ts)
    assert sampled_moment_max(H, tau, n_t, z0=z0, refine=0) == pytest.approx(direct_phi, rel=1e-10)


def test_refinement_resolves_narrow_peak(convdiff4):
    dec = arnoldi(convdiff4, np.ones(64), 10)
    fine = max(abs(sla.expm(-t * dec.H)[-1, 0]) for t in np.linspace(0, 0.05, 20001))
    coarse = sampled_moment_max(dec.H, 1.0, 257, refine=0)
    refined = sampled_moment_max(dec.H, 1.0, 257)
    assert coarse < refined
    assert refined == pytest.approx(fine, rel=1e-6)
    assert sampled_moment_max(dec.H, 1.0, 513) == pytest.approx(refined, rel=1e-8)


def test_sampled_max_one_by_one():
    assert sampled_moment_max(np.array([[2.0]]), 1.0, 9) == 1.0


# bound values

def test_bound41_zero_at_breakdown():
    A = SparseMatrix.from_dense(np.eye(3))
    dec = arnoldi(A, np.ones(3), 2)
    assert bound_thm41(dec, exp_spec(1.0), 0.0) == 0.0
    assert bound_thm43(A, dec, exp_spec(1.0), 0.0)[0] == 0.0


def test_bound42_zero_at_exhaustion():
    A = SparseMatrix.from_dense(np.diag([0.0, 1.0, 2.0]))
    dec = lanczos(A, np.ones(3), 3)
    assert bound_thm42(dec, exp_spec(1.0), SpectralInterval(0, 2), 0.0) == 0.0


def test_bound44_zero_for_tau_zero(diag64, v64):
    dec = lanczos(diag64, v64, 5)
    b, _ = bound_thm44(diag64, dec, exp_spec(0.0), I04, 0.0)
    assert b == 0.0


def test_bound43_gamma2_zero_log_norm(diag64, v64):
    dec = lanczos(diag64, v64, 5)
    tau = 0.5
    _, g2 = bound_thm43(diag64, dec, exp_spec(tau), 0.0)
    w = diag64.matvec(dec.v_next) - dec.z0 * dec.v_next
    assert g2 == pytest.approx(tau * np.linalg.norm(w), rel=1e-14)


def test_bound42_is_gamma1_tau_xi1(diag64, v64):
    tau = 0.5
    dec = lanczos(diag64, v64, 6)
    _, est = xi_estimates(dec, exp_spec(tau))
    want = gamma1(I04, 0.0, tau) * tau * est.xi1
    assert bound_thm42(dec, exp_spec(tau), I04, 0.0) == pytest.approx(want, rel=1e-10)


def test_bound44_is_one_plus_gamma3_times_xi2(diag64, v64):
    tau = 0.5
    dec = lanczos(diag64, v64, 6)
    _, est = xi_estimates(dec, exp_spec(tau))
    b, g3 = bound_thm44(diag64, dec, exp_spec(tau), I04, 0.0)
    assert b == pytest.approx((1 + g3) * est.xi2, rel=1e-10)


@pytest.mark.parametrize("tau", [0.1, 0.5, 1.0])
def test_hermitian_bounds_dominate_error(diag64, v64, tau):
    spec = exp_spec(tau)
    mu2 = log_norm_neg(diag64)
    for m, dec, err in converging_steps(diag64, v64, spec, lanczos):
        rep = bound_report(diag64, dec, spec, mu2, I04, 0.0)
        for b in (rep.bound_41, rep.bound_42, rep.bound_43, rep.bound_44):
            assert b >= err


def test_general_bounds_dominate_error_nonsymmetric(convdiff8):
    spec = exp_spec((1 / 9) ** 2)
    v = np.ones(512)
    mu2 = log_norm_neg(convdiff8)
    for m, dec, err in converging_steps(convdiff8, v, spec, arnoldi, last=120):
        rep = bound_report(convdiff8, dec, spec, mu2)
        assert rep.bound_42 is None and rep.bound_44 is None
        assert rep.bound_41 >= err and rep.bound_43 >= err


def test_bounds_reject_trigonometric(diag64, v64):
    dec = lanczos(diag64, v64, 3)
    with pytest.raises(InputError, match="exponential-only"):
        bound_thm41(dec, MatrixFunctionSpec("cos", 1.0), 0.0)


def test_hermitian_bounds_need_tridiagonal(convdiff4):
    dec = arnoldi(convdiff4, np.ones(64), 3)
    with pytest.raises(InputError):
        bound_thm42(dec, exp_spec(1.0), I04, 0.0)


def test_bound44_checks_z0_in_interval(diag64, v64):
    dec = lanczos(diag64, v64, 3)
    with pytest.raises(InputError):
        bound_thm44(diag64, dec, exp_spec(1.0), I04, 0.0, z0=10.0)


def test_log_norm_is_minus_lambda_min(rng):
    M = rng.standard_normal((30, 30))
    S = SparseMatrix.from_dense(M + M.T)
    assert log_norm_neg(S) == pytest.approx(-np.linalg.eigvalsh(M + M.T).min(), rel=1e-8)


def test_estimate_interval_contains_spectrum(rng):
    M = rng.standard_normal((40, 40))
    S = SparseMatrix.from_dense(M + M.T)
    iv = estimate_interval(S)
    ev = np.linalg.eigvalsh(M + M.T)
    assert iv.a < ev.min() and ev.max() < iv.b
