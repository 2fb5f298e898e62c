"""Preconfigured model chains used by the experiments and the CLI.

Four families, all with analytic derivatives and calibrated supports:

* ``identity``: p = id, alpha = 0.  The chain norm must stay pinned near 1,
  which separates genuine contraction effects from quadrature drift.
* ``isotropic_contraction`` (d=1): p(xi) = exp(-lam*tau) xi with a quadratic
  phase alpha = c xi^2 / 2.  The chain determinant decays like
  exp(-n*lam*tau), so the measured norm holds near 1 for about
  |log(2 pi hbar)| / (lam*tau) steps and then decays at half that rate.
* ``surface_model`` (d=2): momentum (X, eps) with p = (exp(-tau*sqrt(2 eps)) X,
  eps).  The contraction rate depends on the conserved coordinate eps, the
  leaf map is the identity, and the block split (r = 1) feeds the refined
  bound and the cell decomposition.
* ``block_root_model``: diagonal p_i = exp(-tau * rate_i) xi_i with the
  contracted axes leading and the leaf axes trailing; leaf rates may be
  nonzero, which exercises the leaf-determinant denominator of the refined
  bound.

Supports are fixed fractions of the box so the validation invariants (strict
nesting, orbit containment, window clearance) hold for every hbar the
experiments use; the builders re-check them numerically and refuse silently
aliasing configurations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .grid import GridSpec
from .dynamics import BlockSplit, ChainSpec, MomentumMap, evolve_momentum
from .symbols import PLATEAU_FRACTION, Box, CutoffBump, SymbolSpec, bump_symbol
from .fio import FioOperator

__all__ = ["ScenarioSpec", "build_scenario", "make_operators", "validate_scenario", "SCENARIOS"]

# fraction of the box half-width allotted to the position supports
_POSITION_SUPPORT_FRACTION = 0.8


@dataclass
class ScenarioSpec:
    """Everything needed to instantiate a chain of a given length."""

    name: str
    grid: GridSpec
    step_map: MomentumMap
    symbol_first: SymbolSpec
    symbol_tail: SymbolSpec
    omega2: Box
    omega2_tilde: Box
    xi0: np.ndarray
    n_max: int
    params: dict
    _first_op: FioOperator | None = field(default=None, repr=False)
    _tail_op: FioOperator | None = field(default=None, repr=False)

    def chain(self, n: int) -> ChainSpec:
        return ChainSpec.repeated(self.step_map, n)

    @property
    def has_block(self) -> bool:
        return self.step_map.block is not None


def make_operators(spec: ScenarioSpec, n: int) -> list[FioOperator]:
    """Instantiate the n-step chain; step instances are shared and cached.

    Only the first step carries the incoming x-cutoff; later steps are
    x-independent, so one operator instance (and its cached matrices and
    measured norm) serves steps 2..n.
    """
    if n < 1:
        raise ValueError("chain length must be >= 1")
    if n > spec.n_max:
        raise ValueError(
            f"chain length {n} exceeds n_max={spec.n_max}; orbit containment "
            "was only validated up to n_max"
        )
    if spec._first_op is None:
        spec._first_op = FioOperator(spec.step_map, spec.symbol_first, spec.grid)
    if n > 1 and spec._tail_op is None:
        spec._tail_op = FioOperator(spec.step_map, spec.symbol_tail, spec.grid)
    return [spec._first_op] + [spec._tail_op] * (n - 1)


def _position_boxes(grid: GridSpec) -> tuple[Box, Box]:
    hw = np.array(grid.half_width)
    sup = _POSITION_SUPPORT_FRACTION * hw
    return Box(tuple(-sup), tuple(sup)), Box(tuple(-hw), tuple(hw))


def _symbols(
    omega1: Box, omega2: Box, omega: Box, plateau_fraction: float
) -> tuple[SymbolSpec, SymbolSpec]:
    first = bump_symbol(omega1, omega2, omega=omega, plateau_fraction=plateau_fraction)
    tail = bump_symbol(omega1, omega2, plateau_fraction=plateau_fraction)
    return first, tail


def validate_scenario(spec: ScenarioSpec) -> None:
    """Numeric checks of the invariants every experiment relies on.

    Raises ValueError naming the violated precondition.  Checks: support
    nesting, window clearance (momentum and position), containment of the
    n_max-step orbit of the theta support in the enlarged window, positivity
    of the step determinant there, and that xi0 sits on the theta plateau.
    """
    g = spec.grid
    if spec.n_max < 1:
        raise ValueError("n_max must be >= 1")
    if not spec.omega2.strictly_inside(spec.omega2_tilde):
        raise ValueError("omega2 must sit strictly inside omega2_tilde")
    half = g.momentum_half_width
    window = Box(tuple(-half), tuple(half))
    if not spec.omega2_tilde.strictly_inside(window):
        raise ValueError(
            f"omega2_tilde {spec.omega2_tilde} is not strictly inside the momentum "
            f"window {window}; increase n_points or decrease half_width"
        )
    pos_sup, pos_box = _position_boxes(g)
    if not pos_sup.strictly_inside(pos_box):
        raise ValueError("position supports must sit strictly inside the box")
    samples = np.vstack(
        [spec.omega2.sample_lattice(5), spec.omega2.center()[None, :]]
    )
    chain = spec.chain(spec.n_max)
    for xi in samples:
        orbit = evolve_momentum(chain, xi, spec.n_max)
        if not np.all(spec.omega2_tilde.contains(orbit)):
            raise ValueError(
                f"the {spec.n_max}-step orbit of omega2 leaves omega2_tilde "
                f"(started at {xi}); shrink n_max or enlarge the window"
            )
    for xi in spec.omega2_tilde.sample_lattice(5):
        J = spec.step_map.grad_p_at(xi)
        if np.linalg.det(J) <= 0.0:
            raise ValueError(f"step determinant must be positive on omega2_tilde, fails at {xi}")
        if not g.momentum_in_window(spec.step_map.p_at(xi)[None, :]):
            raise ValueError(f"p maps {xi} outside the momentum window; output would alias")
    plateau = CutoffBump.from_support(
        spec.omega2, spec.params.get("plateau_fraction", PLATEAU_FRACTION)
    )
    if plateau(spec.xi0) < 0.9:
        raise ValueError(
            f"xi0={spec.xi0} is not on the theta plateau; the plane-wave image would "
            "be dominated by cutoff effects"
        )


_COMMON_KEYS = {"hbar", "n_points", "half_width", "n_max", "xi0", "plateau_fraction"}


def _resolve(params: dict, specific_defaults: dict, name: str) -> dict:
    unknown = set(params) - set(specific_defaults) - _COMMON_KEYS
    if unknown:
        raise ValueError(f"unknown parameters for scenario {name!r}: {sorted(unknown)}")
    if "hbar" not in params:
        raise ValueError("params must include 'hbar'")
    return {**specific_defaults, **params}


def _build_identity(params: dict) -> ScenarioSpec:
    p = _resolve(params, {"dimension": 1}, "identity")
    d = int(p["dimension"])
    n_points = int(p.get("n_points", 128 if d == 1 else 32))
    half_width = p.get("half_width", 1.0 if d == 1 else 0.5)
    grid = GridSpec(d, half_width, n_points, float(p["hbar"]))
    pf = float(p.get("plateau_fraction", PLATEAU_FRACTION))

    ident = lambda xi: xi
    grad = lambda xi: np.eye(d)
    block = BlockSplit(r=0, tilde_p=ident, grad_tilde_p=grad)
    step = MomentumMap(
        dimension=d,
        p=ident,
        grad_p=grad,
        alpha=lambda xi: 0.0,
        grad_alpha=lambda xi: np.zeros(d),
        block=block,
        label="identity",
    )
    omega2 = Box((-0.72,) * d, (0.72,) * d)
    omega2_tilde = Box((-0.9,) * d, (0.9,) * d)
    pos_sup, _ = _position_boxes(grid)
    first, tail = _symbols(pos_sup, omega2, pos_sup, pf)
    xi0 = np.asarray(p.get("xi0", (0.35,) * d), dtype=float)
    spec = ScenarioSpec(
        name="identity",
        grid=grid,
        step_map=step,
        symbol_first=first,
        symbol_tail=tail,
        omega2=omega2,
        omega2_tilde=omega2_tilde,
        xi0=xi0,
        n_max=int(p.get("n_max", 12)),
        params=p,
    )
    validate_scenario(spec)
    return spec


def _build_isotropic_contraction(params: dict) -> ScenarioSpec:
    p = _resolve(params, {"lam": 1.0, "tau": 0.35, "alpha_coeff": 0.4}, "isotropic_contraction")
    lam, tau, c = float(p["lam"]), float(p["tau"]), float(p["alpha_coeff"])
    n_points = int(p.get("n_points", 512))
    half_width = p.get("half_width", 1.0)
    grid = GridSpec(1, half_width, n_points, float(p["hbar"]))
    pf = float(p.get("plateau_fraction", PLATEAU_FRACTION))
    factor = math.exp(-lam * tau)

    step = MomentumMap(
        dimension=1,
        p=lambda xi: factor * xi,
        grad_p=lambda xi: np.array([[factor]]),
        alpha=lambda xi: 0.5 * c * float(xi[0]) ** 2,
        grad_alpha=lambda xi: c * xi,
        label="isotropic_contraction",
    )
    omega2 = Box((-0.4,), (1.4,))
    omega2_tilde = Box((-0.55,), (1.55,))
    pos_sup, _ = _position_boxes(grid)
    first, tail = _symbols(pos_sup, omega2, pos_sup, pf)
    xi0 = np.asarray(p.get("xi0", (1.0,)), dtype=float)
    spec = ScenarioSpec(
        name="isotropic_contraction",
        grid=grid,
        step_map=step,
        symbol_first=first,
        symbol_tail=tail,
        omega2=omega2,
        omega2_tilde=omega2_tilde,
        xi0=xi0,
        n_max=int(p.get("n_max", 30)),
        params=p,
    )
    validate_scenario(spec)
    return spec


def _build_surface_model(params: dict) -> ScenarioSpec:
    p = _resolve(params, {"tau": 0.7, "eta": 0.4}, "surface_model")
    tau, eta = float(p["tau"]), float(p["eta"])
    if not 0.0 < eta < 1.0:
        raise ValueError("eta must lie in (0, 1) so the energy window stays positive")
    n_points = int(p.get("n_points", 48))
    half_width = p.get("half_width", 0.3)
    grid = GridSpec(2, half_width, n_points, float(p["hbar"]))
    pf = float(p.get("plateau_fraction", PLATEAU_FRACTION))

    def pmap(xi):
        X, eps = xi
        return np.array([math.exp(-tau * math.sqrt(2.0 * eps)) * X, eps])

    def grad(xi):
        X, eps = xi
        a = math.sqrt(2.0 * eps)
        e = math.exp(-tau * a)
        return np.array([[e, -tau * X * e / a], [0.0, 1.0]])

    block = BlockSplit(
        r=1,
        tilde_p=lambda xt: xt,
        grad_tilde_p=lambda xt: np.eye(1),
        m=lambda xi: pmap(xi)[:1],
    )
    step = MomentumMap(
        dimension=2,
        p=pmap,
        grad_p=grad,
        alpha=lambda xi: 0.0,
        grad_alpha=lambda xi: np.zeros(2),
        block=block,
        label="surface_model",
    )
    eps_lo = 0.5 * (1.0 - eta) ** 2
    eps_hi = 0.5 * (1.0 + eta) ** 2
    omega2 = Box((-0.4, eps_lo), (0.4, eps_hi))
    omega2_tilde = omega2.pad((0.1, 0.04))
    if omega2_tilde.lo[1] <= 0.0:
        raise ValueError("the enlarged energy window must stay positive")
    pos_sup, _ = _position_boxes(grid)
    first, tail = _symbols(pos_sup, omega2, pos_sup, pf)
    xi0 = np.asarray(p.get("xi0", (0.15, 0.5)), dtype=float)
    spec = ScenarioSpec(
        name="surface_model",
        grid=grid,
        step_map=step,
        symbol_first=first,
        symbol_tail=tail,
        omega2=omega2,
        omega2_tilde=omega2_tilde,
        xi0=xi0,
        n_max=int(p.get("n_max", 8)),
        params=p,
    )
    validate_scenario(spec)
    return spec


def _build_block_root_model(params: dict) -> ScenarioSpec:
    p = _resolve(
        params,
        {"contracted_rates": (1.0,), "leaf_rates": (0.0,), "tau": 0.7},
        "block_root_model",
    )
    tau = float(p["tau"])
    contracted = tuple(float(v) for v in p["contracted_rates"])
    leaf = tuple(float(v) for v in p["leaf_rates"])
    r, dt = len(contracted), len(leaf)
    d = r + dt
    if d < 1 or d > 3:
        raise ValueError("total dimension must be 1..3")
    rates = np.array(contracted + leaf)
    diag = np.exp(-tau * rates)
    n_points = int(p.get("n_points", 32 if d <= 2 else 24))
    half_width = p.get("half_width", 0.3)
    grid = GridSpec(d, half_width, n_points, float(p["hbar"]))
    pf = float(p.get("plateau_fraction", PLATEAU_FRACTION))

    leaf_diag = diag[r:]
    block = BlockSplit(
        r=r,
        tilde_p=lambda xt: leaf_diag * xt,
        grad_tilde_p=lambda xt: np.diag(leaf_diag),
        m=lambda xi: diag[:r] * xi[:r],
    )
    step = MomentumMap(
        dimension=d,
        p=lambda xi: diag * xi,
        grad_p=lambda xi: np.diag(diag),
        alpha=lambda xi: 0.0,
        grad_alpha=lambda xi: np.zeros(d),
        block=block,
        label="block_root_model",
    )
    lo = (-0.4,) * r + (0.2,) * dt
    hi = (0.4,) * r + (1.0,) * dt
    omega2 = Box(lo, hi)
    omega2_tilde = omega2.pad((0.08,) * r + (0.2,) * dt)
    pos_sup, _ = _position_boxes(grid)
    first, tail = _symbols(pos_sup, omega2, pos_sup, pf)
    xi0 = np.asarray(p.get("xi0", (0.0,) * r + (0.6,) * dt), dtype=float)
    spec = ScenarioSpec(
        name="block_root_model",
        grid=grid,
        step_map=step,
        symbol_first=first,
        symbol_tail=tail,
        omega2=omega2,
        omega2_tilde=omega2_tilde,
        xi0=xi0,
        n_max=int(p.get("n_max", 6)),
        params=p,
    )
    validate_scenario(spec)
    return spec


SCENARIOS = {
    "identity": _build_identity,
    "isotropic_contraction": _build_isotropic_contraction,
    "surface_model": _build_surface_model,
    "block_root_model": _build_block_root_model,
}


def build_scenario(name: str, params: dict) -> ScenarioSpec:
    """Build and validate a named scenario; params must include 'hbar'."""
    if name not in SCENARIOS:
        raise ValueError(f"unknown scenario {name!r}; available: {sorted(SCENARIOS)}")
    return SCENARIOS[name](dict(params))
