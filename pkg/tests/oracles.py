"""Independent reference implementations used to pin the library's outputs.

Everything here is deliberately slow and structurally different from the
library code: direct quadrature sums instead of FFTs, central finite
differences instead of analytic derivatives, explicit scalar loops instead of
vectorized matrix algebra.  Tests compare the fast paths against these.
"""

from __future__ import annotations

import numpy as np


def slow_hbar_dft(values: np.ndarray, grid) -> np.ndarray:
    """Direct O(N^2) evaluation of the hbar-scaled Fourier sum, no FFT."""
    X = grid.position_points()
    Theta = grid.momentum_points()
    kernel = np.exp(-1j * (Theta @ X.T) / grid.hbar)
    out = kernel @ values.ravel() * grid.position_weight()
    out *= (2.0 * np.pi * grid.hbar) ** (-grid.dimension / 2.0)
    return out.reshape(grid.shape)


def slow_hbar_inverse_dft(values: np.ndarray, grid) -> np.ndarray:
    """Direct inverse sum over the momentum lattice."""
    X = grid.position_points()
    Theta = grid.momentum_points()
    kernel = np.exp(1j * (X @ Theta.T) / grid.hbar)
    out = kernel @ values.ravel() * grid.momentum_weight()
    out *= (2.0 * np.pi * grid.hbar) ** (-grid.dimension / 2.0)
    return out.reshape(grid.shape)


def fd_gradient(f, x, h: float = 1e-6) -> np.ndarray:
    """Central-difference gradient of a scalar or vector function at x."""
    x = np.asarray(x, dtype=float)
    f0 = np.asarray(f(x), dtype=float)
    cols = []
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = h
        cols.append((np.asarray(f(x + e), dtype=float) - np.asarray(f(x - e), dtype=float)) / (2 * h))
    return np.stack(cols, axis=-1)


def fd_jacobian(p, xi, h: float = 1e-6) -> np.ndarray:
    """Finite-difference Jacobian J[i, j] = d p_i / d xi_j."""
    return fd_gradient(p, xi, h)


def symplectic_defect(map_, x, xi, h: float = 1e-6) -> float:
    """Max-abs entry of Dkappa^T J Dkappa - J for the full phase-space step.

    kappa(x, xi) = (x'(x, xi), p(xi)) built from apply_canonical; a canonical
    transformation makes the defect vanish up to differencing error.
    """
    from fiochain.dynamics import apply_canonical

    d = map_.dimension
    x = np.asarray(x, dtype=float)
    xi = np.asarray(xi, dtype=float)

    def kappa(z):
        xn, pn = apply_canonical(map_, z[:d], z[d:])
        return np.concatenate([xn, pn])

    z0 = np.concatenate([x, xi])
    M = fd_gradient(kappa, z0, h)
    J = np.zeros((2 * d, 2 * d))
    J[:d, d:] = np.eye(d)
    J[d:, :d] = -np.eye(d)
    return float(np.max(np.abs(M.T @ J @ M - J)))


def backward_positions(chain, x_n, xi0, n: int) -> list[np.ndarray]:
    """Scalar-loop backward position reconstruction [x_n, x_{n-1}, ..., x_0]."""
    orbit = [np.asarray(xi0, dtype=float)]
    for j in range(n):
        orbit.append(chain.maps[j].p_at(orbit[-1]))
    xs = [np.asarray(x_n, dtype=float)]
    for j in range(n, 0, -1):
        J = chain.maps[j - 1].grad_p_at(orbit[j - 1])
        ga = chain.maps[j - 1].grad_alpha_at(orbit[j - 1])
        xs.append(J.T @ xs[-1] + ga)
    return xs


def direct_symbol_product(chain, symbols, x_n, xi0, n: int) -> complex:
    """Pointwise b0 via the scalar backward loop, no vectorization."""
    orbit = [np.asarray(xi0, dtype=float)]
    for j in range(n):
        orbit.append(chain.maps[j].p_at(orbit[-1]))
    xs = backward_positions(chain, x_n, xi0, n)
    total = 1.0 + 0.0j
    for j in range(n, 0, -1):
        x_j = xs[n - j]
        x_prev = xs[n - j + 1]
        total *= complex(
            np.asarray(symbols[j - 1].a0(x_prev, x_j, orbit[j - 1])).reshape(())
        )
    return total
