"""Transfer matrices for delta-combs and piecewise-constant potentials.

A comb of delta scatterers is crossed by multiplying jump factors
[[1,0],[a,1]] with free propagators over the gaps; piecewise-constant
potentials use the constant-coefficient propagator at the local
wavenumber sqrt(lam^2 - v).  The approximation families reproduce the
short-range models whose transfer matrices converge (or fail to) as the
spacing goes to zero: two atoms limiting to a delta'-potential, three
atoms limiting to a delta'-potential while the potential itself tends
to a multiple of delta', and the four-atom presets with free and
Dirichlet-decoupled limits.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import AmbiguousClassification, ComplexCoefficient, GammaPole
from .interactions import POLE_TOL, TransmissionMatrix, theta_of_gamma

SERIES_CUT = 1e-4  # |lam*eps| below which sin(u)/lam switches to its series


@dataclass(frozen=True)
class DeltaComb:
    """Ordered delta scatterers (position, strength)."""

    positions: np.ndarray
    strengths: np.ndarray

    def __post_init__(self):
        x = np.atleast_1d(np.array(self.positions, dtype=float))
        a = np.atleast_1d(np.array(self.strengths, dtype=float))
        if x.shape != a.shape:
            raise ValueError("positions and strengths must align")
        if x.size > 1 and not np.all(np.diff(x) > 0):
            raise ValueError("positions must be strictly increasing")
        x.setflags(write=False)
        a.setflags(write=False)
        object.__setattr__(self, "positions", x)
        object.__setattr__(self, "strengths", a)

    def __len__(self) -> int:
        return self.positions.size

    def moments(self) -> tuple[float, float]:
        """(integral of v, delta'-coefficient -integral of x v)."""
        m0 = float(np.sum(self.strengths))
        m1 = -float(np.sum(self.strengths * self.positions))
        return m0, m1


@dataclass(frozen=True)
class PiecewisePotential:
    """Compactly supported piecewise-constant potential (zero outside)."""

    breakpoints: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        b = np.array(self.breakpoints, dtype=float)
        v = np.array(self.values, dtype=float)
        if b.size != v.size + 1:
            raise ValueError("need len(breakpoints) == len(values) + 1")
        if not np.all(np.diff(b) > 0):
            raise ValueError("breakpoints must be strictly increasing")
        b.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "breakpoints", b)
        object.__setattr__(self, "values", v)


def free_propagator(eps: float, lam: complex) -> np.ndarray:
    """Free transfer matrix over a gap of length eps at wavenumber lam.

    [[cos(lam eps), sin(lam eps)/lam], [-lam sin(lam eps), cos(lam eps)]];
    the (1,2) entry uses a short series near lam*eps = 0, where it tends
    to eps.  det = 1 identically.
    """
    if eps < 0:
        raise ValueError("gap length must be nonnegative")
    lam = complex(lam)
    u = lam * eps
    c = np.cos(u)
    s = np.sin(u)
    if abs(u) < SERIES_CUT:
        u2 = u * u
        e12 = eps * (1.0 - u2 / 6.0 + u2 * u2 / 120.0 - u2 * u2 * u2 / 5040.0)
    else:
        e12 = s / lam
    return np.array([[c, e12], [-lam * s, c]])


def _jump(a: float) -> np.ndarray:
    return np.array([[1.0, 0.0], [a, 1.0]], dtype=complex)


def comb_transfer(
    comb: DeltaComb,
    lam: complex,
    x_from: Optional[float] = None,
    x_to: Optional[float] = None,
) -> np.ndarray:
    """Transfer matrix of a comb from x_from-0 to x_to+0.

    Defaults to the span of the comb (just left of the first atom to
    just right of the last).  An empty comb propagates freely over the
    requested span.
    """
    if len(comb) == 0:
        if x_from is None or x_to is None:
            return np.eye(2, dtype=complex)
        return free_propagator(x_to - x_from, lam)
    xs = comb.positions
    if x_from is None:
        x_from = xs[0]
    if x_to is None:
        x_to = xs[-1]
    if x_from > xs[0] or x_to < xs[-1]:
        raise ValueError("span must contain all atoms")
    m = free_propagator(xs[0] - x_from, lam).astype(complex)
    m = _jump(comb.strengths[0]) @ m
    for i in range(1, len(comb)):
        m = free_propagator(xs[i] - xs[i - 1], lam) @ m
        m = _jump(comb.strengths[i]) @ m
    return free_propagator(x_to - xs[-1], lam) @ m


def pc_transfer(pot: PiecewisePotential, lam: complex) -> np.ndarray:
    """Transfer matrix of a piecewise-constant potential across its support.

    Each piece contributes the constant-coefficient propagator at local
    wavenumber sqrt(lam^2 - v); the branch is irrelevant (even entry
    dependence), det = 1.
    """
    lam = complex(lam)
    m = np.eye(2, dtype=complex)
    for i, v in enumerate(pot.values):
        w = pot.breakpoints[i + 1] - pot.breakpoints[i]
        k = np.sqrt(lam * lam - v + 0j)
        m = free_propagator(w, k) @ m
    return m


# ---------------------------------------------------------------------------
# approximation families
# ---------------------------------------------------------------------------

def family_3d(gamma: float, eps: float) -> DeltaComb:
    """Two-atom model of a delta'-potential: atoms a1/eps at 0, a2/eps at eps.

    a1 = g(1 - g/2)^(-1), a2 = -g(1 + g/2)^(-1); the transfer matrix
    tends to diag(theta, 1/theta) while the potentials have no
    distributional limit.
    """
    if abs(abs(gamma) - 2.0) < POLE_TOL:
        raise GammaPole("family 3d requires |gamma| != 2")
    a1 = gamma / (1.0 - 0.5 * gamma)
    a2 = -gamma / (1.0 + 0.5 * gamma)
    return DeltaComb([0.0, eps], [a1 / eps, a2 / eps])


def family_4d(gamma: float, sign: int, eps: float) -> DeltaComb:
    """Three-atom model at -eps, 0, eps limiting to a delta'-potential
    while the potential itself tends to kappa * delta' distributionally.

    a2 = sign * 2 g (g^2-4)^(-1/2) (real only for |g| > 2),
    a1 = g/2 - (a2/2)(1 + g/2),  a3 = -g/2 - (a2/2)(1 - g/2).
    The delta'-coefficient kappa = a1 - a3 depends on the sign choice,
    so it does not determine the intensity gamma.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    if gamma * gamma <= 4.0:
        raise ComplexCoefficient("family 4d coefficients are real only for |gamma| > 2")
    a2 = sign * 2.0 * gamma / np.sqrt(gamma * gamma - 4.0)
    a1 = 0.5 * gamma - 0.5 * a2 * (1.0 + 0.5 * gamma)
    a3 = -0.5 * gamma - 0.5 * a2 * (1.0 - 0.5 * gamma)
    return DeltaComb([-eps, 0.0, eps], [a1 / eps, a2 / eps, a3 / eps])


FAMILY_5D_PRESETS = {
    "free": (-1.0, 6.0, -3.0, -2.0),
    "dirichlet": (3.0, -3.0, -3.0, 3.0),
}


def family_5d(preset: str, eps: float) -> DeltaComb:
    """Four-atom presets at 0, eps, 2eps, 3eps.

    'free': strengths (-1,6,-3,-2)/eps; the potential tends to 6 delta'
    yet the transfer matrix tends to the identity (free operator).
    'dirichlet': (3,-3,-3,3)/eps; the potential tends to 0 yet the
    operators decouple into Dirichlet half-lines.
    """
    try:
        alphas = FAMILY_5D_PRESETS[preset]
    except KeyError:
        raise ValueError(f"unknown preset {preset!r}; choose from {sorted(FAMILY_5D_PRESETS)}")
    xs = [0.0, eps, 2.0 * eps, 3.0 * eps]
    return DeltaComb(xs, [a / eps for a in alphas])


def family_3d_limit(gamma: float) -> TransmissionMatrix:
    """Oracle for the family_3d limit: diag(theta, 1/theta)."""
    th = theta_of_gamma(gamma)
    return TransmissionMatrix(np.diag([th, 1.0 / th]))


# ---------------------------------------------------------------------------
# limit diagnostics
# ---------------------------------------------------------------------------

LIMIT = "limit"
DIRICHLET = "dirichlet-decoupling"
DIVERGENT = "divergent"


@dataclass
class ConvergenceReport:
    classification: str
    eps_seq: np.ndarray
    matrices: list[np.ndarray]
    diffs: np.ndarray                      # per-entry |M_k - M_{k+1}|
    limit: Optional[TransmissionMatrix] = None
    observed_order: Optional[float] = None
    decoupling_ratios: Optional[np.ndarray] = None
    notes: list[str] = field(default_factory=list)


def limit_diagnose(
    family: Callable[[float], DeltaComb],
    lam: complex,
    eps_seq: Sequence[float],
) -> ConvergenceReport:
    """Classify the eps -> 0 behavior of a comb family's transfer matrices.

    Limit: entrywise Cauchy; the limit is Richardson-extrapolated at the
    observed order (order estimated from consecutive differences, with
    first-order fallback).  Dirichlet decoupling: |M21| grows without
    bound while M11/M21 and M22/M21 tend to zero (the transfer-matrix
    signature of separated Dirichlet conditions).  Otherwise divergent;
    mixed signals raise AmbiguousClassification.
    """
    eps_seq = np.asarray(eps_seq, dtype=float)
    if eps_seq.size < 3:
        raise ValueError("need at least three eps values")
    if not np.all(np.diff(eps_seq) < 0) or eps_seq[-1] <= 0:
        raise ValueError("eps_seq must decrease strictly to positive values")

    mats = [comb_transfer(family(e), lam) for e in eps_seq]
    diffs = np.array([np.abs(m2 - m1) for m1, m2 in zip(mats, mats[1:])])
    dstep = diffs.max(axis=(1, 2))
    scale = max(1.0, float(np.abs(mats[-1]).max()))

    m21 = np.array([abs(m[1, 0]) for m in mats])
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.array(
            [[abs(m[0, 0]) / abs(m[1, 0]), abs(m[1, 1]) / abs(m[1, 0])] for m in mats]
        )

    cauchy = bool(np.all(dstep[1:] <= dstep[:-1] * 0.9 + 1e-14)) and dstep[-1] < 1e-3 * scale
    blowing = bool(np.all(m21[1:] >= m21[:-1] * 1.5)) and m21[-1] > 1e2 * scale_free(mats)
    ratios_decay = bool(np.all(ratios[-1] < 1e-2)) and bool(
        np.all(ratios[-1] <= ratios[0] + 1e-14)
    )

    if cauchy:
        order = _estimate_order(eps_seq, dstep)
        p = order if order is not None and 0.2 < order < 6 else 1.0
        rho = eps_seq[-2] / eps_seq[-1]
        extrap = mats[-1] + (mats[-1] - mats[-2]) / (rho ** p - 1.0)
        rep = ConvergenceReport(
            LIMIT, eps_seq, mats, diffs,
            limit=TransmissionMatrix(extrap),
            observed_order=order if order is not None else p,
            decoupling_ratios=ratios,
        )
        if order is None:
            rep.notes.append("order estimate unstable; first-order Richardson used")
        return rep
    if blowing and ratios_decay:
        return ConvergenceReport(
            DIRICHLET, eps_seq, mats, diffs, decoupling_ratios=ratios
        )
    if blowing != ratios_decay:
        raise AmbiguousClassification(
            "M21 growth and off-ratio decay disagree over the eps sequence"
        )
    return ConvergenceReport(DIVERGENT, eps_seq, mats, diffs, decoupling_ratios=ratios)


def scale_free(mats: list[np.ndarray]) -> float:
    """Scale reference excluding the blowing entry: max |M11|, |M12|, |M22|."""
    sel = np.array([[m[0, 0], m[0, 1], m[1, 1]] for m in mats])
    return max(1.0, float(np.abs(sel).max()))


def _estimate_order(eps_seq: np.ndarray, dstep: np.ndarray) -> Optional[float]:
    if np.any(dstep <= 0):
        return None
    with np.errstate(divide="ignore"):
        ps = np.log(dstep[:-1] / dstep[1:]) / np.log(eps_seq[:-2] / eps_seq[1:-1])
    ps = ps[np.isfinite(ps)]
    if ps.size == 0:
        return None
    med = float(np.median(ps))
    if ps.size >= 2 and np.abs(ps - med).max() > 0.75:
        return None
    return med
