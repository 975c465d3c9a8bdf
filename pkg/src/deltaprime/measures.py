"""The delta'-operator over a measured set: kernels, discretization, spectra.

A finite atomic Radon measure carries the generalized boundary data:
the measure derivative of a function is its jump divided by the atom
weight, and the delta' conditions read dpsi'/dmu = 0,
dpsi/dmu = beta psi'_r on every atom.  Boxing the operator between a
Dirichlet end at `a` and a Neumann end at `b` makes its inverse an
integral operator with the explicitly known kernel

    G(x, s) = min(x, s) - a + sum_{x_k < min(x,s)} beta(x_k) w_k,

whose symmetrized Nystrom matrix delivers the negative spectrum: the
negative eigenvalues of the operator are the reciprocals of the
negative eigenvalues of the kernel matrix.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np
from scipy.linalg import eigh

from .errors import (
    DepthTooLarge,
    EvaluationOnAtom,
    JumpOffSupport,
    UnconvergedEigenvalue,
)

ATOM_TOL = 1e-12
NEG_EIG_REL = 1e-12   # kernel eigenvalues below -NEG_EIG_REL * ||M|| count as negative


# ---------------------------------------------------------------------------
# atomic measures and intensity functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AtomicMeasure:
    """Finite positive measure supported on finitely many atoms."""

    positions: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        x = np.atleast_1d(np.array(self.positions, dtype=float))
        w = np.atleast_1d(np.array(self.weights, dtype=float))
        if x.shape != w.shape:
            raise ValueError("positions and weights must align")
        if x.size > 1 and not np.all(np.diff(x) > 0):
            raise ValueError("atom positions must be strictly increasing")
        if np.any(w <= 0):
            raise ValueError("atom weights must be positive")
        x.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "positions", x)
        object.__setattr__(self, "weights", w)

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum())

    @property
    def support(self) -> tuple[float, float]:
        return float(self.positions[0]), float(self.positions[-1])

    def __len__(self) -> int:
        return self.positions.size


class BetaFunction:
    """Real intensity function evaluated on the atoms of a measure."""

    def __init__(self, rule: Union[float, Sequence[float], Callable[[np.ndarray], np.ndarray]]):
        self._rule = rule

    @classmethod
    def constant(cls, value: float) -> "BetaFunction":
        return cls(float(value))

    def at_atoms(self, mu: AtomicMeasure) -> np.ndarray:
        if callable(self._rule):
            vals = np.asarray(self._rule(mu.positions), dtype=float)
        elif np.ndim(self._rule) == 0:
            vals = np.full(len(mu), float(self._rule))
        else:
            vals = np.asarray(self._rule, dtype=float)
        if vals.shape != mu.positions.shape:
            raise ValueError("beta values must align with the atoms")
        if not np.all(np.isfinite(vals)):
            raise ValueError("beta must be finite on the atoms")
        return vals


def cantor_measure(depth: int, interval: tuple[float, float] = (0.0, 1.0)) -> AtomicMeasure:
    """Uniform mass on the midpoints of the level-`depth` middle-thirds pieces.

    2^depth atoms of weight 2^-depth; total mass 1 at every depth.
    Midpoints keep the atoms off the uniform quadrature grids used by
    `discretize`.
    """
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    if depth > 20:
        raise DepthTooLarge("cantor depth capped at 20")
    c0, c1 = float(interval[0]), float(interval[1])
    if c1 <= c0:
        raise ValueError("interval must be nondegenerate")
    pieces = [(c0, c1)]
    for _ in range(depth):
        nxt = []
        for lo, hi in pieces:
            third = (hi - lo) / 3.0
            nxt.append((lo, lo + third))
            nxt.append((hi - third, hi))
        pieces = nxt
    mids = np.array([0.5 * (lo + hi) for lo, hi in pieces])
    return AtomicMeasure(mids, np.full(mids.size, 0.5 ** depth))


def cantor_blocks(depth: int, level: int) -> list[np.ndarray]:
    """Atom-index blocks of a depth-`depth` measure grouped at `level`.

    2^level blocks of 2^(depth-level) consecutive atoms each, matching
    the level-`level` construction intervals.
    """
    if not 0 <= level <= depth:
        raise ValueError("need 0 <= level <= depth")
    per = 2 ** (depth - level)
    return [np.arange(b * per, (b + 1) * per) for b in range(2 ** level)]


# ---------------------------------------------------------------------------
# measure boundary data
# ---------------------------------------------------------------------------

@dataclass
class MeasureBoundaryData:
    """Per-atom boundary data: measure derivatives and mean traces."""

    dpsi_dmu: np.ndarray
    dpsi_prime_dmu: np.ndarray
    psi_r: np.ndarray
    dpsi_r: np.ndarray


def mu_derivative(psi, mu: AtomicMeasure) -> MeasureBoundaryData:
    """Boundary data of a piecewise function with jumps only on the atoms.

    `psi` must expose one_sided(x, side) -> (value, derivative) and
    jump_points().  On an atom of weight w, dpsi/dmu is the value jump
    divided by w and dpsi'/dmu the derivative jump divided by w.
    """
    xs, ws = mu.positions, mu.weights
    for p in psi.jump_points():
        if np.min(np.abs(xs - p)) > ATOM_TOL:
            raise JumpOffSupport(f"jump at {p} off the measure support")
    n = len(mu)
    out = MeasureBoundaryData(
        np.zeros(n), np.zeros(n), np.zeros(n), np.zeros(n)
    )
    for i, (x, w) in enumerate(zip(xs, ws)):
        vm, dm = psi.one_sided(x, -1)
        vp, dp = psi.one_sided(x, +1)
        out.dpsi_dmu[i] = (vp - vm) / w
        out.dpsi_prime_dmu[i] = (dp - dm) / w
        out.psi_r[i] = 0.5 * (vp + vm)
        out.dpsi_r[i] = 0.5 * (dp + dm)
    return out


@dataclass
class PiecewiseFunction:
    """Helper wrapper: callables (f, f') valid between consecutive breakpoints."""

    breakpoints: np.ndarray
    values: list          # piece i valid on (breakpoints[i-1], breakpoints[i])
    derivatives: list

    def __post_init__(self):
        self.breakpoints = np.atleast_1d(np.asarray(self.breakpoints, dtype=float))
        if len(self.values) != self.breakpoints.size + 1:
            raise ValueError("need one piece more than breakpoints")

    def _piece(self, x: float, side: int) -> int:
        i = np.searchsorted(self.breakpoints, x, side="right" if side > 0 else "left")
        return int(i)

    def one_sided(self, x: float, side: int) -> tuple[float, float]:
        i = self._piece(x, side)
        return float(self.values[i](x)), float(self.derivatives[i](x))

    def jump_points(self) -> list[float]:
        out = []
        for b in self.breakpoints:
            vm, _ = self.one_sided(b, -1)
            vp, _ = self.one_sided(b, +1)
            if vm != vp:
                out.append(float(b))
        return out


# ---------------------------------------------------------------------------
# Green kernel and Nystrom discretization
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GreenKernel:
    """Kernel of the inverse boxed operator (Dirichlet at a, Neumann at b)."""

    a: float
    b: float
    mu: AtomicMeasure
    beta: BetaFunction

    def __post_init__(self):
        lo, hi = self.mu.support
        if not (self.a < lo and hi < self.b):
            raise ValueError("the box (a, b) must contain the support")

    def beta_weights(self) -> np.ndarray:
        return self.beta.at_atoms(self.mu) * self.mu.weights


def green_kernel_value(k: GreenKernel, x: float, s: float) -> float:
    """G(x,s) = min(x,s) - a + sum of beta*w over atoms strictly below min."""
    xs = k.mu.positions
    if np.min(np.abs(xs - x)) < ATOM_TOL or np.min(np.abs(xs - s)) < ATOM_TOL:
        raise EvaluationOnAtom("kernel evaluation requested on an atom")
    if not (k.a < x < k.b and k.a < s < k.b):
        raise ValueError("kernel arguments must lie inside the box")
    m = min(x, s)
    idx = np.searchsorted(xs, m, side="left")
    return m - k.a + float(np.cumsum(np.concatenate(([0.0], k.beta_weights())))[idx])


@dataclass
class DiscretizedOperator:
    grid: np.ndarray
    weights: np.ndarray
    matrix: np.ndarray
    kernel: GreenKernel


def discretize(k: GreenKernel, n: int) -> DiscretizedOperator:
    """Symmetrized Nystrom matrix M_ij = sqrt(h_i h_j) G(x_i, x_j).

    Midpoint rule applied per segment between consecutive atoms, with
    cells allocated proportionally to segment length.  Aligning the
    kernel's kink lines with cell boundaries keeps every node off the
    atoms by construction and makes the eigenvalue error a clean O(h^2),
    which the refinement extrapolation in negative_spectrum relies on.
    """
    if n < 8:
        raise ValueError("need n >= 8")
    xs = k.mu.positions
    edges = np.concatenate(([k.a], xs, [k.b]))
    lengths = np.diff(edges)
    total = k.b - k.a
    counts = np.maximum(1, np.floor(n * lengths / total).astype(int))
    # distribute the remainder by largest fractional part, deterministically
    frac = n * lengths / total - np.floor(n * lengths / total)
    short = n - counts.sum()
    if short > 0:
        for i in np.argsort(-frac, kind="stable")[:short]:
            counts[i] += 1
    grid_parts, weight_parts = [], []
    for lo, length, m in zip(edges[:-1], lengths, counts):
        h = length / m
        grid_parts.append(lo + (np.arange(m) + 0.5) * h)
        weight_parts.append(np.full(m, h))
    grid = np.concatenate(grid_parts)
    weights = np.concatenate(weight_parts)
    if np.min(np.abs(grid[:, None] - xs[None, :])) < 10 * ATOM_TOL:
        raise EvaluationOnAtom("grid node collided with an atom")

    cum = np.concatenate(([0.0], np.cumsum(k.beta_weights())))
    idx = np.searchsorted(xs, grid, side="left")
    mins = np.minimum.outer(grid, grid)
    base = mins - k.a
    atom_part = cum[np.minimum.outer(idx, idx)]
    sw = np.sqrt(weights)
    m = np.outer(sw, sw) * (base + atom_part)
    m = 0.5 * (m + m.T)   # exact symmetry against rounding
    return DiscretizedOperator(grid, weights, m, k)


@dataclass
class NegativeSpectrumResult:
    """Per-grid counts and eigenvalues plus the extrapolated spectrum."""

    grid_sizes: np.ndarray
    counts: np.ndarray
    per_grid: list[np.ndarray]     # operator eigenvalues 1/nu, ascending
    eigenvalues: np.ndarray        # extrapolated, ascending
    errors: np.ndarray             # estimated discretization error


def negative_spectrum(
    k_or_d: Union[GreenKernel, DiscretizedOperator],
    refine: Sequence[int],
) -> NegativeSpectrumResult:
    """Negative eigenvalues from kernel-matrix spectra across grid sizes.

    Every negative matrix eigenvalue nu maps to an operator eigenvalue
    1/nu; counts per grid are reported, and matched eigenvalues across
    the two finest grids are Richardson-refined with an error estimate.
    Raises UnconvergedEigenvalue when matched values disagree beyond
    10x the estimated rate.
    """
    kern = k_or_d.kernel if isinstance(k_or_d, DiscretizedOperator) else k_or_d
    sizes = np.asarray(sorted(refine), dtype=int)
    if sizes.size < 2:
        raise ValueError("refine must contain at least two grid sizes")
    per_grid, counts = [], []
    for n in sizes:
        disc = discretize(kern, int(n))
        nu = eigh(disc.matrix, eigvals_only=True)
        cut = -NEG_EIG_REL * float(np.abs(nu).max())
        neg = nu[nu < cut]
        lam = np.sort(1.0 / neg)
        per_grid.append(lam)
        counts.append(lam.size)
    counts = np.array(counts)

    m = int(min(counts[-1], counts[-2]))
    if m == 0:
        return NegativeSpectrumResult(sizes, counts, per_grid, np.array([]), np.array([]))
    # match from the shallow end: states closest to zero converge first
    fine = per_grid[-1][::-1][:m]
    prev = per_grid[-2][::-1][:m]
    diff = np.abs(fine - prev)
    rho = sizes[-1] / sizes[-2]
    # second-order midpoint-rule baseline; observed order used when stable
    order = 2.0
    if counts.size >= 3 and counts[-3] >= m:
        prev2 = per_grid[-3][::-1][:m]
        d1 = float(np.abs(prev - prev2).max())
        d2 = float(diff.max())
        if d2 > 10.0 * d1 and d1 > 0:
            raise UnconvergedEigenvalue(
                f"matched eigenvalue differences grew under refinement: {d1:g} -> {d2:g}"
            )
        if d1 > 0 and d2 > 0:
            est = np.log(d1 / d2) / np.log(sizes[-2] / sizes[-3])
            if 0.5 < est < 4.0:
                order = float(est)
    fac = rho ** order - 1.0
    extr = fine + (fine - prev) / fac
    err = diff / fac
    if counts[-1] != counts[-2]:
        warnings.warn(
            f"negative count changed across refinement: {counts.tolist()}",
            stacklevel=2,
        )
    asc = np.argsort(extr)
    return NegativeSpectrumResult(sizes, counts, per_grid, extr[asc], err[asc])


def atomic_to_point_system(mu: AtomicMeasure, beta: BetaFunction):
    """Bridge oracle: the measure system as local delta' point interactions.

    On an atom, dpsi/dmu = psi_s / w and the condition dpsi/dmu =
    beta psi'_r becomes psi_s = (beta w) psi'_r: a delta' point
    interaction of intensity beta(x_k) w_k.
    """
    from .line import delta_prime_system

    bw = beta.at_atoms(mu) * mu.weights
    return delta_prime_system(mu.positions, bw)
