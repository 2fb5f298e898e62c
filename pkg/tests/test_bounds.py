"""Norm estimation and the two families of dispersive bounds.

Closed-form oracles: for the diagonal contraction with rate lam the n-step
determinant is exp(-n d lam tau) independent of xi, so both bounds reduce to
elementary expressions that are frozen here and compared digit by digit.
"""

import math

import numpy as np
import pytest

from fiochain.bounds import (
    DENSE_AUTO_LIMIT,
    decay_rate_fit,
    loglog_slope,
    measure_chain_norms,
    operator_norm,
    thm2_bound,
    thm3_bound,
    trivial_bound,
)
from fiochain.dynamics import ChainSpec
from fiochain.scenarios import build_scenario, make_operators
from fiochain.symbols import Box

from test_dynamics import block_diag_map, contraction_map


def test_operator_norm_known_singular_values():
    rng = np.random.default_rng(0)
    # random matrix with planted top singular value
    u = rng.standard_normal(40)
    u /= np.linalg.norm(u)
    v = rng.standard_normal(40)
    v /= np.linalg.norm(v)
    m = 3.7 * np.outer(u, v) + 0.1 * rng.standard_normal((40, 40))
    exact = float(np.linalg.svd(m, compute_uv=False)[0])
    est_d = operator_norm(m, method="dense_svd")
    assert est_d.value == pytest.approx(exact, rel=1e-12)
    assert est_d.converged and est_d.method == "dense_svd"
    est_p = operator_norm(m, method="power_iteration", tol=1e-10, seed=3)
    assert est_p.value == pytest.approx(exact, rel=1e-6)
    assert est_p.converged


def test_power_iteration_diagonal_matrix():
    m = np.diag([3.0, 2.0, 1.0, 0.5])
    est = operator_norm(m, method="power_iteration", tol=1e-12)
    assert est.value == pytest.approx(3.0, rel=1e-9)


def test_power_iteration_nonconvergence_flagged():
    # two equal top singular values: the Rayleigh quotient still converges to
    # the right value, so force non-convergence with a tiny iteration budget
    rng = np.random.default_rng(5)
    m = rng.standard_normal((60, 60))
    est = operator_norm(m, method="power_iteration", tol=1e-14, max_iter=2)
    assert not est.converged
    assert est.iterations == 2


def test_operator_norm_on_chain_matches_dense():
    spec = build_scenario("isotropic_contraction", {"hbar": 2e-2, "n_points": 128})
    ops = make_operators(spec, 12)
    dense = operator_norm(ops, method="dense_svd")
    power = operator_norm(ops, method="power_iteration", tol=1e-10)
    assert power.value == pytest.approx(dense.value, rel=1e-6)
    auto = operator_norm(ops, method="auto")
    assert auto.method == "dense_svd"  # 128 <= DENSE_AUTO_LIMIT
    assert auto.value == pytest.approx(dense.value, rel=1e-12)


def test_auto_switches_to_power_iteration():
    spec = build_scenario("isotropic_contraction", {"hbar": 1e-2, "n_points": 2048})
    assert spec.grid.n_points > DENSE_AUTO_LIMIT
    ops = make_operators(spec, 12)
    est = operator_norm(ops, method="auto", tol=1e-8)
    assert est.method == "power_iteration"
    assert est.converged


def test_measure_chain_norms_prefixes():
    spec = build_scenario("isotropic_contraction", {"hbar": 2e-2, "n_points": 128})
    ops = make_operators(spec, 6)
    ns = [1, 3, 6]
    out = measure_chain_norms(ops, ns, method="dense_svd")
    assert sorted(out) == ns
    for n in ns:
        direct = operator_norm(ops[:n], method="dense_svd")
        assert out[n].value == pytest.approx(direct.value, rel=1e-12)
    # norms never increase along a sub-unitary chain modulo O(hbar) slack
    vals = [out[n].value for n in ns]
    assert vals[0] <= 1.0 + 5 * spec.grid.hbar
    assert vals[2] <= vals[0] * (1.0 + 5 * spec.grid.hbar) ** 6


def test_trivial_bound_is_product_of_step_norms():
    spec = build_scenario("isotropic_contraction", {"hbar": 2e-2, "n_points": 128})
    ops = make_operators(spec, 4)
    tb = trivial_bound(ops, method="dense_svd")
    assert tb.method == "product_of_step_norms"
    prod = 1.0
    for op in ops:
        prod *= operator_norm([op], method="dense_svd").value
    assert tb.value == pytest.approx(prod, rel=1e-10)
    # trivial bound dominates the measured chain norm
    measured = operator_norm(ops, method="dense_svd").value
    assert measured <= tb.value * (1 + 1e-10)
    # repeated steps share the cached per-step norm, so a second call is exact
    tb2 = trivial_bound(ops, method="dense_svd")
    assert tb2.value == tb.value


def test_thm2_bound_closed_form():
    # diagonal contraction: sup det = exp(-n lam tau) exactly, so
    # bound = (2 pi h)^{-1/2} sqrt(|W|) exp(-n lam tau / 2)
    lam, tau, n, hbar = 1.0, 0.35, 6, 1e-2
    chain = ChainSpec.repeated(contraction_map(lam, tau), n)
    window = Box((-0.55,), (1.55,))
    got = thm2_bound(chain, hbar, window, n)
    expected = (
        (2 * math.pi * hbar) ** -0.5 * math.sqrt(2.1) * math.exp(-n * lam * tau / 2)
    )
    assert got == pytest.approx(expected, rel=1e-12)


def test_thm2_bound_uses_sup_over_window():
    # xi-dependent determinant: sup must sit at the window corner
    def p(xi):
        return np.array([xi[0] - 0.1 * xi[0] ** 2])

    def grad_p(xi):
        return np.array([[1.0 - 0.2 * xi[0]]])

    from fiochain.dynamics import MomentumMap

    m = MomentumMap(1, p, grad_p, lambda xi: 0.0, lambda xi: np.zeros(1))
    chain = ChainSpec((m,))
    window = Box((0.0,), (1.0,))
    hbar = 1e-2
    got = thm2_bound(chain, hbar, window, 1, samples_per_axis=101)
    sup_det = 1.0  # attained at xi = 0
    expected = (2 * math.pi * hbar) ** -0.5 * 1.0 * math.sqrt(sup_det)
    assert got == pytest.approx(expected, rel=1e-12)


def test_thm3_bound_closed_form_block_diag():
    # head contracts at rate mu, leaf is an isometry: the leaf inf is 1 and
    # only r = 1 powers of hbar appear
    tau, rate, n, hbar = 0.7, 0.5, 4, 1e-2
    chain = ChainSpec.repeated(block_diag_map(rate, 0.0, tau), n)
    window = Box((-0.5, 0.1), (0.5, 1.0))
    got = thm3_bound(chain, hbar, window, n)
    sup_det = math.exp(-n * tau * rate)
    expected = (2 * math.pi * hbar) ** -0.5 * math.sqrt(sup_det)
    assert got == pytest.approx(expected, rel=1e-12)
    # and it beats the full-volume bound at this hbar
    assert got < thm2_bound(chain, hbar, window, n)


def test_thm3_bound_contracting_leaf():
    tau, head, leaf, n, hbar = 0.7, 0.5, 0.25, 3, 1e-2
    chain = ChainSpec.repeated(block_diag_map(head, leaf, tau), n)
    window = Box((-0.5, 0.1), (0.5, 1.0))
    got = thm3_bound(chain, hbar, window, n)
    sup_det = math.exp(-n * tau * (head + leaf))
    inf_tilde = math.exp(-n * tau * leaf)
    expected = (2 * math.pi * hbar) ** -0.5 * math.sqrt(sup_det / inf_tilde)
    assert got == pytest.approx(expected, rel=1e-10)


def test_thm3_requires_blocks():
    chain = ChainSpec.repeated(contraction_map(), 2)
    with pytest.raises(ValueError):
        thm3_bound(chain, 1e-2, Box((-0.5,), (1.5,)), 2)


def test_thm3_full_rank_equals_pointwise_form():
    # r = d: no leaf directions, bound = (2 pi h)^{-d/2} sqrt(sup det)
    from fiochain.dynamics import BlockSplit, MomentumMap

    base = contraction_map()
    split = BlockSplit(r=1, tilde_p=lambda xt: xt, grad_tilde_p=lambda xt: np.ones((0, 0)))
    m = MomentumMap(1, base.p, base.grad_p, base.alpha, base.grad_alpha, block=split)
    n, hbar = 3, 1e-2
    chain = ChainSpec.repeated(m, n)
    window = Box((-0.55,), (1.55,))
    got = thm3_bound(chain, hbar, window, n)
    expected = (2 * math.pi * hbar) ** -0.5 * math.exp(-n * 0.35 / 2)
    assert got == pytest.approx(expected, rel=1e-12)


def test_decay_rate_fit_exact_exponential():
    ns = np.arange(4, 20)
    rate = -0.17
    vals = 2.3 * np.exp(rate * ns)
    fit = decay_rate_fit(ns, vals)
    assert fit.slope == pytest.approx(rate, abs=1e-12)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)
    assert fit.n_points == len(ns)
    assert math.exp(fit.intercept) == pytest.approx(2.3, rel=1e-10)


def test_decay_rate_fit_requires_points():
    with pytest.raises(ValueError):
        decay_rate_fit([1, 2, 3], [1.0, 0.5, 0.25])  # fewer than 4
    with pytest.raises(ValueError):
        decay_rate_fit([1, 2, 3, 4], [1.0, 0.5, 0.0, 0.25])  # nonpositive value


def test_loglog_slope_power_law():
    hs = np.array([1 / 200, 1 / 400, 1 / 800])
    vals = 7.0 * hs**1.3
    assert loglog_slope(hs, vals) == pytest.approx(1.3, abs=1e-12)
    with pytest.raises(ValueError):
        loglog_slope([1.0], [2.0])


def test_norm_estimates_record_timing_fields():
    spec = build_scenario("isotropic_contraction", {"hbar": 2e-2, "n_points": 128})
    ops = make_operators(spec, 2)
    out = measure_chain_norms(ops, [1, 2], method="dense_svd")
    for est in out.values():
        assert est.wall_ms is None or est.wall_ms >= 0.0
