"""Cutoffs, symbol classes, and the leading-order transfer product."""

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fiochain.dynamics import ChainSpec, MomentumMap
from fiochain.grid import GridSpec
from fiochain.symbols import (
    PLATEAU_FRACTION,
    Box,
    CutoffBump,
    SymbolSpec,
    box_bump,
    bump_symbol,
    leading_symbol_product,
    smoothstep,
    transfer_step,
)
from oracles import direct_symbol_product

from test_dynamics import contraction_map, curved_map_2d


@given(st.floats(-3.0, 3.0))
def test_smoothstep_partition(t):
    s = smoothstep(t)
    assert 0.0 <= s <= 1.0
    assert smoothstep(t) + smoothstep(1.0 - t) == pytest.approx(1.0, abs=1e-12)


def test_smoothstep_saturation():
    assert smoothstep(0.0) == 0.0
    assert smoothstep(1.0) == 1.0
    assert smoothstep(-5.0) == 0.0
    assert smoothstep(7.0) == 1.0
    ts = np.linspace(-1, 2, 301)
    vals = smoothstep(ts)
    assert np.all(np.diff(vals) >= 0.0)


def test_box_semantics():
    b = Box((-1.0, 0.0), (1.0, 2.0))
    assert b.dimension == 2
    assert b.volume == pytest.approx(4.0)
    assert np.allclose(b.center(), [0.0, 1.0])
    assert b.contains(np.array([1.0, 2.0])).all()  # boundary inclusive
    assert not b.contains(np.array([1.0001, 1.0])).any()
    inner = b.shrink(0.5)
    assert inner.strictly_inside(b)
    assert not b.strictly_inside(b)
    padded = b.pad(0.25)
    assert b.strictly_inside(padded)
    with pytest.raises(ValueError):
        Box((0.0,), (0.0,))


def test_box_sample_lattice():
    b = Box((-1.0,), (1.0,))
    pts = b.sample_lattice(5)
    assert pts.shape == (5, 1)
    assert pts[0, 0] == -1.0 and pts[-1, 0] == 1.0
    b2 = Box((0.0, 0.0), (1.0, 2.0))
    assert b2.sample_lattice(3).shape == (9, 2)


def test_cutoff_bump_shape():
    support = Box((-1.0,), (1.0,))
    plateau = support.shrink(PLATEAU_FRACTION)
    bump = CutoffBump(support, plateau)
    xs = np.linspace(-1.5, 1.5, 401).reshape(-1, 1)
    vals = bump(xs)
    assert np.all(vals >= 0.0) and np.all(vals <= 1.0)
    assert np.all(vals[np.abs(xs[:, 0]) >= 1.0] == 0.0)
    assert np.all(vals[np.abs(xs[:, 0]) <= PLATEAU_FRACTION - 1e-9] == 1.0)
    # scalar evaluation agrees with batched
    assert bump(np.array([0.85])) == pytest.approx(float(bump(np.array([[0.85]]))[0]), abs=1e-14)


def test_cutoff_bump_requires_nesting():
    support = Box((-1.0,), (1.0,))
    with pytest.raises(ValueError):
        CutoffBump(support, Box((-1.0,), (1.0,)))
    with pytest.raises(ValueError):
        CutoffBump(support, Box((-2.0,), (2.0,)))


def test_box_bump_matches_cutoff():
    support = Box((-1.0, 0.0), (1.0, 2.0))
    plateau = support.shrink(0.6)
    bump = CutoffBump(support, plateau)
    pts = np.array([[0.0, 1.0], [0.9, 1.9], [-0.75, 0.3], [2.0, 1.0]])
    assert np.allclose(box_bump(pts, plateau, support), bump(pts))


def test_bump_symbol_bounds_and_support():
    omega1 = Box((-0.5,), (0.5,))
    omega2 = Box((0.4,), (1.4,))
    sym = bump_symbol(omega1, omega2)
    assert sym.x_independent
    rng = np.random.default_rng(0)
    xp = rng.uniform(-1, 1, size=(200, 1))
    th = rng.uniform(0, 2, size=(200, 1))
    vals = sym.a0(xp, xp, th)
    assert np.all(np.abs(vals) <= 1.0)
    outside = ~(omega1.contains(xp) & omega2.contains(th))
    assert np.all(vals[outside] == 0.0)
    # plateau center evaluates to exactly 1
    assert sym.a0(np.zeros((1, 1)), np.zeros((1, 1)), np.array([[0.9]]))[0] == 1.0


def test_bump_symbol_with_input_cutoff():
    omega1 = Box((-0.5,), (0.5,))
    omega2 = Box((0.4,), (1.4,))
    omega = Box((-0.8,), (0.8,))
    sym = bump_symbol(omega1, omega2, omega=omega)
    assert not sym.x_independent
    x = np.array([[0.9]])  # outside omega
    assert sym.a0(x, np.zeros((1, 1)), np.array([[0.9]]))[0] == 0.0
    assert sym.u_values(np.zeros((1, 1)))[0] == 1.0


def test_leading_symbol_product_matches_scalar_oracle():
    n = 4
    chain = ChainSpec.repeated(curved_map_2d(), n)
    omega1 = Box((-0.6, -0.6), (0.6, 0.6))
    omega2 = Box((-0.2, 0.3), (0.9, 1.3))
    symbols = [bump_symbol(omega1, omega2) for _ in range(n)]
    xi0 = np.array([0.3, 0.8])
    rng = np.random.default_rng(1)
    for _ in range(10):
        x_n = rng.uniform(-0.5, 0.5, size=2)
        fast = leading_symbol_product(chain, symbols, x_n, xi0, n)
        slow = direct_symbol_product(chain, symbols, x_n, xi0, n)
        assert complex(fast) == pytest.approx(slow, abs=1e-12)


def test_leading_symbol_product_batched():
    n = 3
    chain = ChainSpec.repeated(contraction_map(), n)
    omega1 = Box((-0.8,), (0.8,))
    omega2 = Box((-0.4,), (1.4,))
    symbols = [bump_symbol(omega1, omega2)] * n
    xs = np.linspace(-0.7, 0.7, 25).reshape(-1, 1)
    batch = leading_symbol_product(chain, symbols, xs, [1.0], n)
    assert batch.shape == (25,)
    for i in range(25):
        assert batch[i] == pytest.approx(
            complex(direct_symbol_product(chain, symbols, xs[i], [1.0], n)), abs=1e-12
        )
    assert np.all(np.abs(batch) <= 1.0)


def test_leading_symbol_product_needs_enough_symbols():
    chain = ChainSpec.repeated(contraction_map(), 3)
    omega1 = Box((-0.8,), (0.8,))
    omega2 = Box((-0.4,), (1.4,))
    with pytest.raises(ValueError):
        leading_symbol_product(chain, [bump_symbol(omega1, omega2)], [0.0], [1.0], 3)


def test_transfer_step_identity_map():
    # identity canonical map with full-plateau symbol: T b == b on the plateau
    ident = MomentumMap(
        dimension=1,
        p=lambda xi: xi,
        grad_p=lambda xi: np.eye(1),
        alpha=lambda xi: 0.0,
        grad_alpha=lambda xi: np.zeros(1),
    )
    g = GridSpec(1, 1.0, 128, 1e-2)
    omega1 = Box((-0.8,), (0.8,))
    omega2 = Box((-0.4,), (1.4,))
    sym = bump_symbol(omega1, omega2)
    xs = g.axis_positions(0)
    b = np.exp(-8 * xs**2)
    out = transfer_step(ident, sym, [0.9], b, g)
    plateau = np.abs(xs) <= 0.8 * PLATEAU_FRACTION
    assert np.max(np.abs(out[plateau] - b[plateau])) < 1e-12
    assert np.all(np.abs(out) <= np.abs(b) + 1e-12)


def test_transfer_step_contraction_pullback():
    # for the linear contraction the pullback is exact on lattice-aligned data
    m = contraction_map(c=0.0)
    g = GridSpec(1, 1.0, 256, 1e-2)
    omega1 = Box((-0.9,), (0.9,))
    omega2 = Box((-0.4,), (1.4,))
    sym = bump_symbol(omega1, omega2)
    xs = g.axis_positions(0)
    b = np.cos(3 * xs)
    out = transfer_step(m, sym, [1.0], b, g)
    mu = float(m.grad_p_at(np.array([1.0]))[0, 0])
    expected = sym.a0(
        (xs * mu).reshape(-1, 1), xs.reshape(-1, 1), np.full((len(xs), 1), 1.0)
    ) * np.cos(3 * mu * xs)
    interior = np.abs(xs * mu) <= 0.95  # cubic interpolation error away from the edge
    assert np.max(np.abs(out[interior] - expected[interior])) < 5e-6


def test_transfer_step_rejects_bad_shape():
    g = GridSpec(1, 1.0, 64, 1e-2)
    omega1 = Box((-0.8,), (0.8,))
    omega2 = Box((-0.4,), (1.4,))
    sym = bump_symbol(omega1, omega2)
    with pytest.raises(ValueError):
        transfer_step(contraction_map(), sym, [1.0], np.zeros(32), g)
