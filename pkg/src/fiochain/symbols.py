"""Compactly supported principal symbols with smooth cutoffs.

Cutoffs are built from the standard C-infinity generator g(t) = exp(-1/t):
the smoothstep s(t) = g(t) / (g(t) + g(1-t)) rises from 0 at t <= 0 to 1 at
t >= 1 and s(t) + s(1-t) = 1 exactly.  A box bump is the product over axes of
a 1-d profile (rise on [support_lo, plateau_lo], 1 on the plateau, fall on
[plateau_hi, support_hi]); it is 1 on the plateau box, 0 outside the support
box, and takes values in [0, 1] everywhere.

A symbol is kept in product form a0(x, x', theta) = u(x) * v(x', theta).
The x factor u is only present on the first operator of a chain (it truncates
the incoming function and makes the box quadrature exact); all later operators
are x-independent.  v carries the mandatory x'- and theta-cutoffs so the
operator's momentum sum can be restricted to the theta support by construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import ndimage

from .dynamics import ChainSpec, MomentumMap, evolve_momentum
from .grid import GridSpec

__all__ = [
    "smoothstep",
    "Box",
    "CutoffBump",
    "box_bump",
    "SymbolSpec",
    "bump_symbol",
    "transfer_step",
    "leading_symbol_product",
    "PLATEAU_FRACTION",
]

# Fraction of each support half-width occupied by the plateau.  Fixed as a
# shared default so that acceptance numbers are reproducible.
PLATEAU_FRACTION = 0.7


def smoothstep(t):
    """C-infinity step: 0 for t <= 0, 1 for t >= 1, g(t)/(g(t)+g(1-t)) between."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    out[t >= 1.0] = 1.0
    mid = (t > 0.0) & (t < 1.0)
    if np.any(mid):
        tm = t[mid]
        # 1/tm overflows to inf for denormal tm; exp(-inf) = 0 is the right limit
        with np.errstate(over="ignore"):
            g = np.exp(-1.0 / tm)
            g1 = np.exp(-1.0 / (1.0 - tm))
        out[mid] = g / (g + g1)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class Box:
    """Axis-aligned box prod_a [lo_a, hi_a]."""

    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def __post_init__(self):
        lo = tuple(float(v) for v in np.atleast_1d(self.lo))
        hi = tuple(float(v) for v in np.atleast_1d(self.hi))
        if len(lo) != len(hi):
            raise ValueError("lo and hi must have equal length")
        if any(l >= h for l, h in zip(lo, hi)):
            raise ValueError(f"degenerate box: lo={lo} hi={hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dimension(self) -> int:
        return len(self.lo)

    @property
    def volume(self) -> float:
        return float(np.prod(np.array(self.hi) - np.array(self.lo)))

    def center(self) -> np.ndarray:
        return (np.array(self.lo) + np.array(self.hi)) / 2.0

    def contains(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        lo = np.array(self.lo)
        hi = np.array(self.hi)
        return np.all((pts >= lo) & (pts <= hi), axis=-1)

    def strictly_inside(self, other: "Box", margin: float = 0.0) -> bool:
        """True if this box sits strictly inside ``other`` with the given margin."""
        return all(
            sl > ol + margin and sh < oh - margin
            for sl, sh, ol, oh in zip(self.lo, self.hi, other.lo, other.hi)
        )

    def shrink(self, fraction: float) -> "Box":
        """Concentric box whose half-widths are scaled by ``fraction``."""
        if not 0.0 < fraction < 1.0:
            raise ValueError("fraction must be in (0, 1)")
        c = self.center()
        h = (np.array(self.hi) - np.array(self.lo)) / 2.0 * fraction
        return Box(tuple(c - h), tuple(c + h))

    def pad(self, amount) -> "Box":
        """Concentric box grown by ``amount`` per side (scalar or per-axis)."""
        a = np.broadcast_to(np.asarray(amount, dtype=float), (self.dimension,))
        return Box(
            tuple(np.array(self.lo) - a),
            tuple(np.array(self.hi) + a),
        )

    def sample_lattice(self, per_axis: int) -> np.ndarray:
        """Deterministic inclusive sampling lattice, shape (per_axis^d, d)."""
        if per_axis < 2:
            raise ValueError("need at least 2 samples per axis")
        axes = [np.linspace(l, h, per_axis) for l, h in zip(self.lo, self.hi)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack(mesh, axis=-1).reshape(-1, self.dimension)


@dataclass(frozen=True)
class CutoffBump:
    """Smooth box bump: 1 on the plateau box, 0 outside the support box."""

    support: Box
    plateau: Box

    def __post_init__(self):
        if self.support.dimension != self.plateau.dimension:
            raise ValueError("support and plateau dimensions differ")
        if not self.plateau.strictly_inside(self.support):
            raise ValueError("plateau must lie strictly inside support")

    @classmethod
    def from_support(cls, support: Box, plateau_fraction: float = PLATEAU_FRACTION) -> "CutoffBump":
        return cls(support, support.shrink(plateau_fraction))

    def __call__(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        scalar_input = pts.ndim == 1
        pts = np.atleast_2d(pts)
        out = np.ones(pts.shape[:-1])
        for a in range(self.support.dimension):
            sl, sh = self.support.lo[a], self.support.hi[a]
            pl, ph = self.plateau.lo[a], self.plateau.hi[a]
            t = pts[..., a]
            rise = smoothstep((t - sl) / (pl - sl))
            fall = smoothstep((sh - t) / (sh - ph))
            out = out * np.minimum(rise, fall)
        return float(out[0]) if scalar_input else out


def box_bump(point, plateau_box: Box, support_box: Box):
    """Evaluate the smooth box bump with the given plateau/support at a point."""
    return CutoffBump(support_box, plateau_box)(point)


@dataclass(frozen=True)
class SymbolSpec:
    """Principal symbol in product form a0(x, x', theta) = u(x) * v(x', theta).

    ``u`` is None for x-independent symbols (u == 1).  ``v`` must accept
    broadcastable arrays of shape (..., d) for both arguments and return the
    elementwise product values; the bundled constructor builds it from the
    x'-cutoff on omega1 and the theta-cutoff on omega2, so |a0| <= 1 holds by
    construction and a0 vanishes outside omega1 x omega2.
    """

    omega1: Box
    omega2: Box
    v: Callable[[np.ndarray, np.ndarray], np.ndarray]
    u: Callable[[np.ndarray], np.ndarray] | None = None
    omega: Box | None = None

    @property
    def x_independent(self) -> bool:
        return self.u is None

    def u_values(self, x) -> np.ndarray:
        if self.u is None:
            return np.ones(np.asarray(x, dtype=float).shape[:-1])
        return np.asarray(self.u(x))

    def a0(self, x, xp, theta) -> np.ndarray:
        """Evaluate a0 on broadcastable batches of (x, x', theta)."""
        vv = np.asarray(self.v(xp, theta))
        if self.u is None:
            return vv
        return np.asarray(self.u(x)) * vv


def bump_symbol(
    omega1: Box,
    omega2: Box,
    omega: Box | None = None,
    plateau_fraction: float = PLATEAU_FRACTION,
) -> SymbolSpec:
    """Standard symbol: product of box bumps on omega1 (x'), omega2 (theta), omega (x)."""
    vx = CutoffBump.from_support(omega1, plateau_fraction)
    vtheta = CutoffBump.from_support(omega2, plateau_fraction)

    def v(xp, theta):
        return vx(xp) * vtheta(theta)

    u = CutoffBump.from_support(omega, plateau_fraction) if omega is not None else None
    return SymbolSpec(omega1=omega1, omega2=omega2, v=v, u=u, omega=omega)


def transfer_step(
    map_: MomentumMap,
    symbol: SymbolSpec,
    xi,
    b_values: np.ndarray,
    grid: GridSpec,
) -> np.ndarray:
    """One application of the transfer operator (T b)(x') = a0(x, x', xi) b(x).

    Here x = grad_p(xi)^T x' + grad_alpha(xi) is the pullback of the grid point
    x' through the canonical step at frozen momentum xi.  b is given by its
    samples on the position grid; off-grid pullback values are obtained by
    separable cubic interpolation, and pullbacks landing outside the box are
    treated as b = 0, consistent with compactly supported inputs.
    """
    xi = np.asarray(xi, dtype=float).reshape(grid.dimension)
    b_values = np.asarray(b_values)
    if b_values.shape != grid.shape:
        raise ValueError("b_values must be sampled on the position grid")
    xp = grid.position_points()
    x = xp @ map_.grad_p_at(xi) + map_.grad_alpha_at(xi)

    # fractional lattice coordinates of the pullback points, per axis
    coords = np.empty((grid.dimension, x.shape[0]))
    for a in range(grid.dimension):
        coords[a] = (x[:, a] + grid.half_width[a]) / grid.dx[a]

    def interp(comp):
        return ndimage.map_coordinates(comp, coords, order=3, mode="constant", cval=0.0)

    if np.iscomplexobj(b_values):
        pulled = interp(b_values.real) + 1j * interp(b_values.imag)
    else:
        pulled = interp(b_values)
    weight = symbol.a0(x, xp, np.broadcast_to(xi, x.shape))
    return (weight * pulled).reshape(grid.shape)


def leading_symbol_product(
    chain: ChainSpec,
    symbols: list[SymbolSpec],
    x_n,
    xi0,
    n: int | None = None,
) -> np.ndarray:
    """Leading-order symbol product b0 along the backward-reconstructed orbit.

    Given the endpoint position(s) x_n and the initial momentum xi0, positions
    are reconstructed backwards through x_{j-1} = grad_p_j(xi_{j-1})^T x_j +
    grad_alpha_j(xi_{j-1}) (no matrix inversion needed), and the product

        b0 = prod_{j=1..n} a0_j(x_{j-1}, x_j, xi_{j-1})

    is accumulated.  x_n may be a single point (d,) or a batch (..., d); the
    result matches the batch shape.  Trajectories leaving the supports give 0
    automatically through the cutoffs.
    """
    if n is None:
        n = len(chain)
    if len(symbols) < n:
        raise ValueError(f"need {n} symbols, got {len(symbols)}")
    x = np.asarray(x_n, dtype=float)
    scalar_input = x.ndim == 1
    x = np.atleast_2d(x)
    orbit = evolve_momentum(chain, xi0, n)
    result = np.ones(x.shape[:-1], dtype=complex)
    for j in range(n, 0, -1):
        m = chain.maps[j - 1]
        xi_prev = orbit[j - 1]
        x_prev = x @ m.grad_p_at(xi_prev) + m.grad_alpha_at(xi_prev)
        theta = np.broadcast_to(xi_prev, x.shape)
        result = result * symbols[j - 1].a0(x_prev, x, theta)
        x = x_prev
    if np.all(result.imag == 0.0):
        result = result.real
    return result[0] if scalar_input else result
