"""Almost-orthogonal block decomposition of a chain in leading form.

The chain in leading form has the kernel

    K(x', x) = (2 pi hbar)^(-d) int exp(i(<xi_n(theta), x'> + A_n(theta)
               - <theta, x>)/hbar) det_chain(theta)^(1/2) b0(x', theta) dtheta,

and the blocks insert a cutoff chi(xi_tilde_n(theta)/(2 pi hbar) - ell) that
localizes the leaf coordinates of the final momentum to a cell of side
2 pi hbar.  The cutoff chi1(t) = s(t+1) - s(t) telescopes, so the cells sum
to one exactly and the blocks reassemble the chain to machine precision.

On the lattice every block factors as A_ell = P D_ell F with a shared phase
matrix P (N^d x K over the window lattice S), a diagonal cell weight D_ell,
and the restricted Fourier matrix F satisfying F F^H = (wx/wxi) I.  All block
and cross norms then reduce to singular values of K x K matrices:

    ||A_ell||          = sqrt(c) sigma(P D_ell)
    ||A_l^* A_m||      = c sigma(D_l (P^H P) D_m)
    ||A_l A_m^*||      = c sigma(P sqrt(D_l D_m))^2         (c = wx/wxi)

which avoids ever materializing a dense block unless explicitly requested.
The almost-orthogonality constant is

    R = max( sup_l sum_m ||A_l^* A_m||^(1/2),
             sup_l sum_m ||A_l A_m^*||^(1/2) ),

and bounds the norm of the reassembled sum.  The product table is banded by
construction (cells overlap only when adjacent); the star table decays
because distant cells receive stationary-phase-incompatible momenta.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .grid import GridSpec
from .dynamics import ChainSpec, evolve_momentum, jacobian_chain, phase_cocycle
from .symbols import Box, SymbolSpec, smoothstep, leading_symbol_product
from .fio import DENSE_SIZE_LIMIT, DenseOperator, FioOperator

__all__ = [
    "chi1",
    "PartitionOfUnity",
    "BlockFamily",
    "build_block_family",
    "DenseBlock",
    "block_operator",
    "cotlar_stein_bound",
    "OffdiagFit",
    "offdiagonal_decay_fit",
    "CotlarReport",
]

ZERO_FLOOR = 1e-13


def chi1(t):
    """Unit cell of the telescoping partition: s(t+1) - s(t), support [-1, 1]."""
    t = np.asarray(t, dtype=float)
    return smoothstep(t + 1.0) - smoothstep(t)


@dataclass(frozen=True)
class PartitionOfUnity:
    """Product partition of unity on cells of side `scale` (= 2 pi hbar)."""

    n_axes: int
    scale: float

    @classmethod
    def for_hbar(cls, n_axes: int, hbar: float) -> "PartitionOfUnity":
        return cls(n_axes, 2.0 * math.pi * hbar)

    def weight(self, xi_tilde: np.ndarray, ell) -> np.ndarray:
        """chi values of cell `ell` at points (..., n_axes)."""
        pts = np.asarray(xi_tilde, dtype=float)
        if pts.shape[-1] != self.n_axes:
            raise ValueError("point dimension does not match the partition")
        ell = np.asarray(ell, dtype=float)
        t = pts / self.scale - ell
        w = chi1(t[..., 0])
        for a in range(1, self.n_axes):
            w = w * chi1(t[..., a])
        return w

    def active_indices(self, xi_tilde: np.ndarray) -> list[tuple[int, ...]]:
        """All cells whose support can meet the given points.

        The returned range telescopes to exactly one on the points, so the
        cells reassemble whatever is partitioned with them.
        """
        pts = np.atleast_2d(np.asarray(xi_tilde, dtype=float))
        t = pts / self.scale
        ranges = []
        for a in range(self.n_axes):
            lo = int(math.ceil(t[:, a].min() - 1.0))
            hi = int(math.floor(t[:, a].max() + 1.0))
            ranges.append(range(lo, hi + 1))
        return [tuple(idx) for idx in itertools.product(*ranges)]


def _sigma_max(m: np.ndarray) -> float:
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))


@dataclass
class BlockFamily:
    """Factored blocks of one chain: shared P and F, one diagonal per cell."""

    grid: GridSpec
    theta: np.ndarray
    support_idx: np.ndarray
    phase_matrix: np.ndarray
    xi_tilde_n: np.ndarray
    partition: PartitionOfUnity
    ells: list[tuple[int, ...]]
    weights: dict[tuple[int, ...], np.ndarray]
    c: float
    label: str = ""
    _gram: np.ndarray | None = field(default=None, repr=False)

    def gram(self) -> np.ndarray:
        if self._gram is None:
            self._gram = self.phase_matrix.conj().T @ self.phase_matrix
        return self._gram

    def block_norm(self, ell) -> float:
        d = self.weights[tuple(ell)]
        if not np.any(d):
            return 0.0
        return math.sqrt(self.c) * _sigma_max(self.phase_matrix * d[None, :])

    def parent_norm(self) -> float:
        return math.sqrt(self.c) * _sigma_max(self.phase_matrix)

    def sum_norm(self) -> float:
        total = np.zeros(self.theta.shape[0])
        for d in self.weights.values():
            total = total + d
        return math.sqrt(self.c) * _sigma_max(self.phase_matrix * total[None, :])

    def reconstruction_error(self) -> float:
        """Operator norm of (sum of blocks) - parent; telescoping makes it ~0."""
        total = np.zeros(self.theta.shape[0])
        for d in self.weights.values():
            total = total + d
        return math.sqrt(self.c) * _sigma_max(self.phase_matrix * (total - 1.0)[None, :])

    def star_norm(self, ell, em) -> float:
        """||A_ell^* A_em||; symmetric in its arguments."""
        dl = self.weights[tuple(ell)]
        dm = self.weights[tuple(em)]
        if not (np.any(dl) and np.any(dm)):
            return 0.0
        g = self.gram()
        return self.c * _sigma_max(dl[:, None] * g * dm[None, :])

    def prod_norm(self, ell, em) -> float:
        """||A_ell A_em^*||; vanishes unless the cells are adjacent."""
        dl = self.weights[tuple(ell)]
        dm = self.weights[tuple(em)]
        w = np.sqrt(dl * dm)
        if not np.any(w):
            return 0.0
        return self.c * _sigma_max(self.phase_matrix * w[None, :]) ** 2

    def cotlar_bound(self) -> float:
        ells = self.ells
        star_rows = np.zeros(len(ells))
        prod_rows = np.zeros(len(ells))
        for i, l in enumerate(ells):
            for m in ells:
                star_rows[i] += math.sqrt(self.star_norm(l, m))
                prod_rows[i] += math.sqrt(self.prod_norm(l, m))
        return float(max(star_rows.max(), prod_rows.max()))

    def to_dense_block(self, ell) -> DenseOperator:
        g = self.grid
        if g.size > DENSE_SIZE_LIMIT:
            raise ValueError(
                f"dense block refused: N^d = {g.size} exceeds {DENSE_SIZE_LIMIT}"
            )
        X = g.position_points()
        scale = g.position_weight() * (2.0 * math.pi * g.hbar) ** (-g.dimension / 2.0)
        ft_rows = np.exp(-1j * (self.theta @ X.T) / g.hbar) * scale
        d = self.weights[tuple(ell)]
        return DenseOperator((self.phase_matrix * d[None, :]) @ ft_rows, source="block")

    def separation(self, ell, em) -> int:
        return int(max(abs(a - b) for a, b in zip(ell, em)))


def build_block_family(
    ops: list[FioOperator],
    omega2_tilde: Box,
    n: int | None = None,
    label: str = "",
) -> BlockFamily:
    """Assemble the factored blocks of the leading form of a chain.

    Every map must carry the same block split; the leaf coordinates are the
    last d - r axes.  The momentum quadrature runs over the lattice inside
    the enlarged window, which must contain the theta support of the first
    step (columns outside it vanish anyway through the symbol product).
    """
    if not ops:
        raise ValueError("need at least one operator")
    if n is None:
        n = len(ops)
    ops = ops[:n]
    grid = ops[0].grid
    if any(op.grid != grid for op in ops):
        raise ValueError("all operators must share one grid")
    maps = [op.map for op in ops]
    blocks = [m.block for m in maps]
    if any(b is None for b in blocks):
        raise ValueError("block decomposition needs a block split on every step")
    r = blocks[0].r
    if any(b.r != r for b in blocks):
        raise ValueError("block splits along the chain must share the same r")
    d = grid.dimension
    if r >= d:
        raise ValueError("no leaf coordinates to partition (r must be < d)")
    chain = ChainSpec(tuple(maps))
    symbols = [op.symbol for op in ops]

    pts = grid.momentum_points()
    mask = omega2_tilde.contains(pts)
    support_idx = np.flatnonzero(mask)
    if support_idx.size == 0:
        raise ValueError("the window contains no momentum lattice points")
    theta = pts[support_idx]
    K = theta.shape[0]

    X = grid.position_points()
    hbar = grid.hbar
    P = np.empty((grid.size, K), dtype=complex)
    xi_n = np.empty((K, d))
    pref = grid.momentum_weight() * (2.0 * math.pi * hbar) ** (-d / 2.0)
    for s in range(K):
        orbit = evolve_momentum(chain, theta[s], n)
        xi_n[s] = orbit[-1]
        action = phase_cocycle(chain, theta[s], n)
        _, det = jacobian_chain(chain, theta[s])
        if det <= 0.0:
            raise ValueError("chain Jacobian determinant must be positive on the window")
        b0 = np.asarray(
            leading_symbol_product(chain, symbols, X, theta[s], n), dtype=complex
        )
        phase = (X @ xi_n[s] + action) / hbar
        P[:, s] = pref * math.sqrt(det) * b0 * np.exp(1j * phase)

    xi_tilde_n = xi_n[:, r:]
    partition = PartitionOfUnity.for_hbar(d - r, hbar)
    ells = partition.active_indices(xi_tilde_n)
    weights = {ell: partition.weight(xi_tilde_n, ell) for ell in ells}
    c = grid.position_weight() / grid.momentum_weight()
    return BlockFamily(
        grid=grid,
        theta=theta,
        support_idx=support_idx,
        phase_matrix=P,
        xi_tilde_n=xi_tilde_n,
        partition=partition,
        ells=ells,
        weights=weights,
        c=c,
        label=label,
    )


@dataclass
class DenseBlock:
    ell: tuple[int, ...]
    operator: DenseOperator
    is_zero: bool


def block_operator(ops: list[FioOperator], ell, omega2_tilde: Box) -> DenseBlock:
    """One dense block; building many blocks through a family is cheaper."""
    family = build_block_family(ops, omega2_tilde)
    ell = tuple(int(e) for e in np.atleast_1d(ell))
    if ell not in family.weights:
        d = family.partition.weight(family.xi_tilde_n, ell)
        family.weights[ell] = d
        family.ells.append(ell)
    dense = family.to_dense_block(ell)
    is_zero = not np.any(family.weights[ell])
    return DenseBlock(ell=ell, operator=dense, is_zero=is_zero)


def cotlar_stein_bound(operators) -> float:
    """Almost-orthogonality constant of a finite family of dense operators.

    Accepts matrices or dense realizations; all must act on one space.  The
    result bounds the operator norm of the sum of the family.
    """
    mats = [op.matrix if isinstance(op, DenseOperator) else np.asarray(op) for op in operators]
    if not mats:
        raise ValueError("need at least one operator")
    m = len(mats)
    star = np.zeros((m, m))
    prod = np.zeros((m, m))
    for a in range(m):
        for b in range(a, m):
            star[a, b] = star[b, a] = _sigma_max(mats[a].conj().T @ mats[b])
            prod[a, b] = prod[b, a] = _sigma_max(mats[a] @ mats[b].conj().T)
    row_star = np.sqrt(star).sum(axis=1).max()
    row_prod = np.sqrt(prod).sum(axis=1).max()
    return float(max(row_star, row_prod))


@dataclass
class OffdiagFit:
    exponent: float
    r_squared: float
    n_points: int
    infinite_decay: bool


def offdiagonal_decay_fit(entries) -> OffdiagFit:
    """Least-squares exponent of log(value) against log(1 + separation).

    `entries` is an iterable of (separation, value) with separation >= 1; the
    worst value at each separation forms the decay envelope that is fitted as
    value ~ C (1 + sep)^(-exponent).  Values below ZERO_FLOOR times the
    largest entry are treated as exact zeros and excluded.  Degenerate but
    valid outcomes are reported as infinite decay: no off-diagonal pairs at
    all (single-block family), everything zero, or a compactly supported
    envelope with fewer than 3 surviving separations.  A fit over nonzero
    values needs at least 5 distinct separations in the input.
    """
    by_sep: dict[int, float] = {}
    vmax = 0.0
    for sep, value in entries:
        sep = int(sep)
        if sep < 1:
            continue
        by_sep[sep] = max(by_sep.get(sep, 0.0), float(value))
        vmax = max(vmax, float(value))
    if not by_sep:
        return OffdiagFit(math.inf, 1.0, 0, True)
    floor = ZERO_FLOOR * max(vmax, 1e-300)
    seps = np.array(sorted(s for s, v in by_sep.items() if v > floor), dtype=float)
    if seps.size == 0:
        return OffdiagFit(math.inf, 1.0, 0, True)
    if len(by_sep) < 5:
        raise ValueError("need at least 5 distinct separations for a decay fit")
    if seps.size < 3:
        # zeros beyond the last nonzero cell: compact support in separation
        return OffdiagFit(math.inf, 1.0, int(seps.size), True)
    vals = np.array([by_sep[int(s)] for s in seps])
    x = np.log1p(seps)
    y = np.log(vals)
    slope, _ = np.polyfit(x, y, 1)
    pred = slope * x + (y - slope * x).mean()
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum((y - pred) ** 2)) / ss_tot if ss_tot > 0.0 else 1.0
    return OffdiagFit(float(-slope), r2, int(seps.size), False)


@dataclass
class CotlarReport:
    scenario: str
    hbar: float
    n: int
    n_blocks: int
    n_nonzero_blocks: int
    cotlar_bound: float
    parent_norm: float
    sum_norm: float
    reconstruction_error: float
    max_block_norm: float
    decay_exponent: float
    decay_r_squared: float
    infinite_decay: bool


def family_report(family: BlockFamily, scenario: str, hbar: float, n: int) -> CotlarReport:
    """Summarize a block family: bounds, reassembly error, and decay."""
    norms = {ell: family.block_norm(ell) for ell in family.ells}
    nonzero = sum(1 for v in norms.values() if v > 0.0)
    entries = []
    for l in family.ells:
        for m in family.ells:
            sep = family.separation(l, m)
            if sep >= 1:
                entries.append((sep, family.star_norm(l, m)))
    fit = offdiagonal_decay_fit(entries)
    return CotlarReport(
        scenario=scenario,
        hbar=hbar,
        n=n,
        n_blocks=len(family.ells),
        n_nonzero_blocks=nonzero,
        cotlar_bound=family.cotlar_bound(),
        parent_norm=family.parent_norm(),
        sum_norm=family.sum_norm(),
        reconstruction_error=family.reconstruction_error(),
        max_block_norm=max(norms.values()) if norms else 0.0,
        decay_exponent=fit.exponent,
        decay_r_squared=fit.r_squared,
        infinite_decay=fit.infinite_decay,
    )
