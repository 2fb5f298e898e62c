"""Measured chain norms and the analytic bounds they are compared against.

Three quantities are attached to a chain of n quantized steps:

* the measured L2 operator norm (dense SVD on small grids, power iteration on
  A*A otherwise),
* the volume bound
      (2 pi hbar)^(-d/2) |W|^(1/2) sup_W |det grad_p_chain|^(1/2)
  over a momentum window W that contains every contributing orbit, and
* the block-refined bound
      (2 pi hbar)^(-r/2) sup_W |det grad_p_chain|^(1/2)
                       / inf_{W~} |det grad_ptilde_chain|^(1/2)
  available when every step preserves the same r-codimension block split;
  only the r contracted directions pay the hbar power.

The volume bound crosses the trivial product-of-norms bound after roughly
|log(2 pi hbar)| / rate steps; past that point the chain norm itself decays at
half the Jacobian rate, which is what the gated slope fit extracts.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .grid import Wavefunction, POSITION, l2_norm
from .dynamics import ChainSpec, jacobian_chain, tilde_jacobian_chain
from .symbols import Box
from .fio import DenseOperator, FioOperator, chain_adjoint_apply, chain_apply

__all__ = [
    "NormEstimate",
    "operator_norm",
    "measure_chain_norms",
    "trivial_bound",
    "thm2_bound",
    "thm3_bound",
    "DecayFit",
    "decay_rate_fit",
    "loglog_slope",
    "NormReport",
]

DENSE_AUTO_LIMIT = 1024


@dataclass
class NormEstimate:
    value: float
    converged: bool
    iterations: int
    method: str
    wall_ms: float | None = None


def _as_matrix(op) -> np.ndarray:
    if isinstance(op, DenseOperator):
        return op.matrix
    return np.asarray(op)


def _is_fio_list(ops) -> bool:
    return all(isinstance(op, FioOperator) for op in ops)


def _dense_chain_matrix(ops: list[FioOperator]) -> np.ndarray:
    total = None
    for op in ops:
        B = op.to_dense().matrix
        total = B if total is None else B @ total
    return total


def _power_iteration_fio(
    ops: list[FioOperator], tol: float, max_iter: int, seed: int
) -> NormEstimate:
    grid = ops[0].grid
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    vf = Wavefunction(grid, v, POSITION)
    nv = l2_norm(vf)
    if nv == 0.0:
        raise ValueError("degenerate start vector")
    vf = Wavefunction(grid, vf.values / nv, POSITION)
    sigma_prev = -1.0
    for it in range(1, max_iter + 1):
        w = chain_apply(ops, vf)
        sigma = l2_norm(w)
        if sigma == 0.0:
            return NormEstimate(0.0, True, it, "power_iteration")
        if sigma_prev >= 0.0 and abs(sigma - sigma_prev) <= tol * sigma:
            return NormEstimate(sigma, True, it, "power_iteration")
        sigma_prev = sigma
        back = chain_adjoint_apply(ops, w)
        nb = l2_norm(back)
        if nb == 0.0:
            return NormEstimate(sigma, True, it, "power_iteration")
        vf = Wavefunction(grid, back.values / nb, POSITION)
    return NormEstimate(sigma_prev, False, max_iter, "power_iteration")


def _power_iteration_dense(
    mats: list[np.ndarray], tol: float, max_iter: int, seed: int
) -> NormEstimate:
    rng = np.random.default_rng(seed)
    dim = mats[0].shape[1]
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    v = v / np.linalg.norm(v)
    sigma_prev = -1.0
    for it in range(1, max_iter + 1):
        w = v
        for m in mats:
            w = m @ w
        sigma = float(np.linalg.norm(w))
        if sigma == 0.0:
            return NormEstimate(0.0, True, it, "power_iteration")
        if sigma_prev >= 0.0 and abs(sigma - sigma_prev) <= tol * sigma:
            return NormEstimate(sigma, True, it, "power_iteration")
        sigma_prev = sigma
        back = w
        for m in reversed(mats):
            back = m.conj().T @ back
        nb = np.linalg.norm(back)
        if nb == 0.0:
            return NormEstimate(sigma, True, it, "power_iteration")
        v = back / nb
    return NormEstimate(sigma_prev, False, max_iter, "power_iteration")


def operator_norm(
    ops,
    method: str = "auto",
    tol: float = 1e-6,
    max_iter: int = 500,
    seed: int = 0,
) -> NormEstimate:
    """L2 operator norm of a chain (applied first-to-last).

    `ops` is a list of quantized operators, dense realizations, or plain
    matrices.  `method` is "dense_svd", "power_iteration", or "auto" (dense
    below DENSE_AUTO_LIMIT grid points).  Power iteration runs on A*A with a
    seeded random start and converges when two successive singular-value
    estimates agree to relative tol; non-convergence is reported, not raised.
    """
    if not isinstance(ops, (list, tuple)):
        ops = [ops]
    ops = list(ops)
    if not ops:
        raise ValueError("need at least one operator")
    if _is_fio_list(ops):
        size = ops[0].grid.size
        if method == "auto":
            method = "dense_svd" if size <= DENSE_AUTO_LIMIT else "power_iteration"
        if method == "dense_svd":
            total = _dense_chain_matrix(ops)
            return NormEstimate(float(np.linalg.norm(total, 2)), True, 1, "dense_svd")
        if method == "power_iteration":
            return _power_iteration_fio(ops, tol, max_iter, seed)
        raise ValueError(f"unknown norm method {method!r}")
    mats = [_as_matrix(op) for op in ops]
    if method == "auto":
        method = "dense_svd" if mats[0].shape[1] <= DENSE_AUTO_LIMIT else "power_iteration"
    if method == "dense_svd":
        total = None
        for m in mats:
            total = m if total is None else m @ total
        return NormEstimate(float(np.linalg.norm(total, 2)), True, 1, "dense_svd")
    if method == "power_iteration":
        return _power_iteration_dense(mats, tol, max_iter, seed)
    raise ValueError(f"unknown norm method {method!r}")


def measure_chain_norms(
    ops: list[FioOperator],
    ns: list[int],
    method: str = "auto",
    tol: float = 1e-6,
    max_iter: int = 500,
    seed: int = 0,
) -> dict[int, NormEstimate]:
    """Chain norms at several prefix lengths, sharing work on the dense path.

    The dense path accumulates one running product and takes an SVD snapshot
    at each requested length, so an n-sweep costs one pass instead of one
    pass per n.
    """
    ns = sorted(set(ns))
    if not ns or ns[0] < 1 or ns[-1] > len(ops):
        raise ValueError("prefix lengths must satisfy 1 <= n <= len(ops)")
    if method == "auto":
        method = "dense_svd" if ops[0].grid.size <= DENSE_AUTO_LIMIT else "power_iteration"
    out: dict[int, NormEstimate] = {}
    if method == "dense_svd":
        total = None
        k = 0
        for n in ns:
            t0 = time.perf_counter()
            while k < n:
                B = ops[k].to_dense().matrix
                total = B if total is None else B @ total
                k += 1
            value = float(np.linalg.norm(total, 2))
            wall = (time.perf_counter() - t0) * 1e3
            out[n] = NormEstimate(value, True, 1, "dense_svd", wall_ms=wall)
        return out
    for n in ns:
        t0 = time.perf_counter()
        est = operator_norm(ops[:n], method=method, tol=tol, max_iter=max_iter, seed=seed)
        est.wall_ms = (time.perf_counter() - t0) * 1e3
        out[n] = est
    return out


def trivial_bound(
    ops: list[FioOperator],
    method: str = "auto",
    tol: float = 1e-6,
    max_iter: int = 500,
    seed: int = 0,
) -> NormEstimate:
    """Product of the measured single-step norms (submultiplicative bound).

    Single-step norms are cached on the operator instances, so repeated
    chains pay for one measurement.
    """
    value = 1.0
    converged = True
    iters = 0
    for op in ops:
        if op._norm_cache is None:
            est = operator_norm([op], method=method, tol=tol, max_iter=max_iter, seed=seed)
            op._norm_cache = est.value
            converged = converged and est.converged
            iters = max(iters, est.iterations)
        value *= op._norm_cache
    return NormEstimate(value, converged, iters, "product_of_step_norms")


def _chain_det_sup(chain: ChainSpec, box: Box, n: int, samples_per_axis: int) -> float:
    pts = box.sample_lattice(samples_per_axis)
    sup = 0.0
    for xi in pts:
        _, det = jacobian_chain(chain.prefix(n), xi)
        sup = max(sup, abs(det))
    return sup


def thm2_bound(
    chain: ChainSpec,
    hbar: float,
    omega2_tilde: Box,
    n: int | None = None,
    samples_per_axis: int = 64,
) -> float:
    """Volume bound over the enlarged momentum window.

    The window must contain the n-step orbit of the symbol support; that
    containment is the caller's obligation (scenario validation enforces it).
    """
    if n is None:
        n = len(chain)
    d = chain.dimension
    sup = _chain_det_sup(chain, omega2_tilde, n, samples_per_axis)
    return (2.0 * math.pi * hbar) ** (-d / 2.0) * math.sqrt(omega2_tilde.volume) * math.sqrt(sup)


def thm3_bound(
    chain: ChainSpec,
    hbar: float,
    omega2_tilde: Box,
    n: int | None = None,
    samples_per_axis: int = 64,
) -> float:
    """Block-refined bound; requires a common block split along the chain.

    Only the r contracted directions contribute the hbar power; the leaf
    directions contribute the worst-case ratio of chain determinants to
    leaf-map determinants.
    """
    if n is None:
        n = len(chain)
    blocks = [m.block for m in chain.maps[:n]]
    if any(b is None for b in blocks):
        raise ValueError("block-refined bound needs a block split on every step")
    r = blocks[0].r
    if any(b.r != r for b in blocks):
        raise ValueError("block splits along the chain must share the same r")
    d = chain.dimension
    sup = _chain_det_sup(chain, omega2_tilde, n, samples_per_axis)
    if r == d:
        inf_tilde = 1.0
    else:
        tilde_box = Box(omega2_tilde.lo[r:], omega2_tilde.hi[r:])
        inf_tilde = math.inf
        for xi_t in tilde_box.sample_lattice(samples_per_axis):
            det_t = tilde_jacobian_chain(chain, xi_t, n)
            inf_tilde = min(inf_tilde, abs(det_t))
        if inf_tilde == 0.0:
            raise ValueError("leaf-map determinant vanishes on the window")
    return (2.0 * math.pi * hbar) ** (-r / 2.0) * math.sqrt(sup) / math.sqrt(inf_tilde)


@dataclass
class DecayFit:
    slope: float
    intercept: float
    r_squared: float
    n_points: int


def decay_rate_fit(ns, values) -> DecayFit:
    """Least-squares fit of log(values) against ns; needs >= 4 positive points."""
    ns = np.asarray(ns, dtype=float)
    values = np.asarray(values, dtype=float)
    if ns.shape != values.shape or ns.ndim != 1:
        raise ValueError("ns and values must be 1-d arrays of equal length")
    if ns.size < 4:
        raise ValueError("need at least 4 points for a decay-rate fit")
    if np.any(values <= 0.0):
        raise ValueError("values must be positive to fit a log-linear decay")
    y = np.log(values)
    slope, intercept = np.polyfit(ns, y, 1)
    resid = y - (slope * ns + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0.0 else 1.0
    return DecayFit(float(slope), float(intercept), r2, int(ns.size))


def loglog_slope(xs, ys) -> float:
    """Slope of log(ys) against log(xs); both must be positive."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.size < 2:
        raise ValueError("need at least 2 points")
    if np.any(xs <= 0.0) or np.any(ys <= 0.0):
        raise ValueError("log-log slope needs positive data")
    slope, _ = np.polyfit(np.log(xs), np.log(ys), 1)
    return float(slope)


@dataclass
class NormReport:
    """One measured-vs-bounds row, in the layout the CSV writer emits."""

    scenario: str
    hbar: float
    n: int
    measured_norm: float
    trivial_bound: float
    thm2_bound: float
    thm3_bound: float | None = None
    wkb_residual_rel: float | None = None
    converged: bool = True
    wall_ms: float | None = None
    method: str = ""
