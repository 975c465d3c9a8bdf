"""Algebra of one-point boundary conditions on the line.

A self-adjoint point interaction at x0 is a Lagrangian plane in the
four-dimensional space of boundary traces

    (psi(x0+0), psi(x0-0), psi'(x0+0), psi'(x0-0)).

The plane can be presented as a transmission matrix Lambda linking
(psi, psi') across the point, as a Hermitian intensity matrix B acting
on jump/mean traces, or as the Cayley unitary of either coordinate
chart.  This module holds the four canonical interaction types
(delta, delta', delta'-potential, delta-magnetic), the transparent
conditions, the conversions between the parametrizations, and the
composition laws for merging adjacent interactions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import (
    CharacteristicPole,
    DegenerateComposition,
    GammaPole,
    PlaneNotGraph,
    SingularD,
    SplitHasNoLambda,
)

POLE_TOL = 1e-12


# ---------------------------------------------------------------------------
# trace vectors and the boundary form
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundaryTraces:
    """One-sided boundary values of psi and psi' at an interaction point."""

    v_plus: complex
    v_minus: complex
    d_plus: complex
    d_minus: complex

    @property
    def psi_s(self) -> complex:
        return self.v_plus - self.v_minus

    @property
    def dpsi_s(self) -> complex:
        return self.d_plus - self.d_minus

    @property
    def psi_r(self) -> complex:
        return 0.5 * (self.v_plus + self.v_minus)

    @property
    def dpsi_r(self) -> complex:
        return 0.5 * (self.d_plus + self.d_minus)


def boundary_form(p: BoundaryTraces, q: BoundaryTraces) -> complex:
    """Sesquilinear boundary form omega(Gamma p, Gamma q).

    Antisymmetric in the sense omega(p, q) = -conj(omega(q, p)); a
    boundary condition is self-adjoint iff omega vanishes on all pairs
    of traces satisfying it.
    """
    return (
        p.d_plus * np.conj(q.v_plus)
        - p.v_plus * np.conj(q.d_plus)
        - p.d_minus * np.conj(q.v_minus)
        + p.v_minus * np.conj(q.d_minus)
    )


# ---------------------------------------------------------------------------
# parametrizations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TransmissionMatrix:
    """2x2 matrix Lambda with col(v+, d+) = Lambda col(v-, d-).

    Self-adjointness requires Lambda = e^{i eta} R with R real and
    det R = 1; equivalently |det Lambda| = 1 and e^{-i eta} Lambda real
    for eta = arg(det Lambda)/2.
    """

    entries: np.ndarray

    def __post_init__(self):
        m = np.array(self.entries, dtype=complex)
        if m.shape != (2, 2):
            raise ValueError("transmission matrix must be 2x2")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @property
    def eta(self) -> float:
        """Phase with e^{-i eta} Lambda real, in (-pi/2, pi/2] mod pi."""
        return 0.5 * np.angle(np.linalg.det(self.entries))

    def phase_defect(self) -> float:
        """Distance from the e^{i eta} * (real, det 1) family."""
        det = np.linalg.det(self.entries)
        d_mod = abs(abs(det) - 1.0)
        r = self.entries * np.exp(-1j * self.eta)
        # eta is defined mod pi; both branches give R or -R, equally real
        d_real = float(np.abs(r.imag).max())
        return max(d_mod, d_real)

    def is_self_adjoint_plane(self, tol: float = 1e-12) -> bool:
        return self.phase_defect() <= tol

    def apply(self, v_minus: complex, d_minus: complex) -> tuple[complex, complex]:
        out = self.entries @ np.array([v_minus, d_minus], dtype=complex)
        return out[0], out[1]

    def traces(self, v_minus: complex, d_minus: complex) -> BoundaryTraces:
        v_plus, d_plus = self.apply(v_minus, d_minus)
        return BoundaryTraces(v_plus, v_minus, d_plus, d_minus)


@dataclass(frozen=True)
class SelfAdjointB:
    """Intensity matrix of the jump/mean chart: col(psi'_s, psi_s) = B col(psi_r, -psi'_r).

    Units: alpha ~ 1/length, beta ~ length, gamma and mu dimensionless.
    """

    alpha: float = 0.0
    beta: float = 0.0
    gamma: float = 0.0
    mu: float = 0.0

    @property
    def matrix(self) -> np.ndarray:
        a, b, g, m = self.alpha, self.beta, self.gamma, self.mu
        return np.array([[a, g - 1j * m], [g + 1j * m, -b]], dtype=complex)


@dataclass(frozen=True)
class AdditiveCharacteristic:
    """Additive coordinates (xi, s) of a delta'-potential: (2+g)/(2-g) = s e^xi."""

    xi: float
    s: int

    def __add__(self, other: "AdditiveCharacteristic") -> "AdditiveCharacteristic":
        return AdditiveCharacteristic(self.xi + other.xi, self.s * other.s)


# ---------------------------------------------------------------------------
# interaction kinds (tagged union)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Delta:
    alpha: float


@dataclass(frozen=True)
class DeltaPrime:
    beta: float


@dataclass(frozen=True)
class DeltaPrimePotential:
    gamma: float

    def __post_init__(self):
        if abs(abs(self.gamma) - 2.0) < POLE_TOL:
            raise GammaPole("delta'-potential requires |gamma| != 2")


@dataclass(frozen=True)
class DeltaMagnetic:
    mu: float


@dataclass(frozen=True)
class Transparent:
    lambda0: float

    def __post_init__(self):
        if self.lambda0 == 0:
            raise ValueError("transparent conditions require lambda0 != 0")


@dataclass(frozen=True)
class Split:
    """Separated conditions cos(a)psi - sin(a)psi' = 0 on each side."""

    alpha_plus: float
    alpha_minus: float


@dataclass(frozen=True)
class GeneralLambda:
    matrix: TransmissionMatrix


@dataclass(frozen=True)
class GeneralB:
    b: SelfAdjointB


InteractionKind = Union[
    Delta, DeltaPrime, DeltaPrimePotential, DeltaMagnetic,
    Transparent, Split, GeneralLambda, GeneralB,
]


def theta_of_gamma(gamma: float) -> float:
    if abs(2.0 - gamma) < POLE_TOL or abs(2.0 + gamma) < POLE_TOL:
        raise GammaPole(f"theta pole at gamma = {gamma}")
    return (2.0 + gamma) / (2.0 - gamma)


def lambda_of(kind: InteractionKind) -> TransmissionMatrix:
    """Canonical transmission matrix of a (non-split) interaction kind."""
    if isinstance(kind, Split):
        raise SplitHasNoLambda("split conditions have no transmission matrix")
    if isinstance(kind, Delta):
        m = np.array([[1.0, 0.0], [kind.alpha, 1.0]], dtype=complex)
    elif isinstance(kind, DeltaPrime):
        m = np.array([[1.0, kind.beta], [0.0, 1.0]], dtype=complex)
    elif isinstance(kind, DeltaPrimePotential):
        th = theta_of_gamma(kind.gamma)
        m = np.diag([th, 1.0 / th]).astype(complex)
    elif isinstance(kind, DeltaMagnetic):
        eta = mu_to_eta(kind.mu)
        m = np.exp(1j * eta) * np.eye(2, dtype=complex)
    elif isinstance(kind, Transparent):
        l0 = kind.lambda0
        m = 1j * np.array([[0.0, -1.0 / l0], [l0, 0.0]], dtype=complex)
    elif isinstance(kind, GeneralLambda):
        return kind.matrix
    elif isinstance(kind, GeneralB):
        return b_to_lambda(kind.b)
    else:
        raise TypeError(f"unknown interaction kind {kind!r}")
    return TransmissionMatrix(m)


def b_to_lambda(b: SelfAdjointB) -> TransmissionMatrix:
    """Transmission matrix of the intensity matrix B.

    Lambda = (1/D) [[th+, beta], [alpha, th-]] with
    D = (1 - i mu/2)^2 - alpha beta/4 - gamma^2/4 and
    th_pm = (1 +- gamma/2)^2 + alpha beta/4 + mu^2/4.
    """
    a, be, g, m = b.alpha, b.beta, b.gamma, b.mu
    d = (1.0 - 0.5j * m) ** 2 - 0.25 * a * be - 0.25 * g * g
    if abs(d) < POLE_TOL:
        raise SingularD("decoupling limit: D = 0")
    th_p = (1.0 + 0.5 * g) ** 2 + 0.25 * a * be + 0.25 * m * m
    th_m = (1.0 - 0.5 * g) ** 2 + 0.25 * a * be + 0.25 * m * m
    return TransmissionMatrix(np.array([[th_p, be], [a, th_m]], dtype=complex) / d)


def b_to_unitary(b: SelfAdjointB) -> np.ndarray:
    """Cayley unitary (B - i)^(-1) (B + i) of the jump/mean chart."""
    m = b.matrix
    eye = np.eye(2, dtype=complex)
    return np.linalg.solve(m - 1j * eye, m + 1j * eye)


def compose(left: TransmissionMatrix, right: TransmissionMatrix) -> TransmissionMatrix:
    """Merge two adjacent interactions: Lambda = Lambda_left @ Lambda_right.

    `left` is the interaction crossed second (larger x), matching the
    matrix product Lambda = Lambda^+ Lambda^-.
    """
    return TransmissionMatrix(left.entries @ right.entries)


def gamma_compose(gm: float, gp: float) -> float:
    """Total delta'-potential intensity of two merged interactions."""
    den = 1.0 + 0.25 * gm * gp
    if abs(den) < POLE_TOL:
        raise DegenerateComposition(
            "product leaves the delta'-potential family (1 + gm*gp/4 = 0)"
        )
    return (gm + gp) / den


def gamma_to_characteristic(gamma: float) -> AdditiveCharacteristic:
    """Additive characteristic (xi, s) with (2+g)/(2-g) = s e^xi."""
    if abs(abs(gamma) - 2.0) < POLE_TOL:
        raise CharacteristicPole("characteristic undefined at |gamma| = 2")
    ratio = (2.0 + gamma) / (2.0 - gamma)
    s = 1 if abs(gamma) < 2.0 else -1
    return AdditiveCharacteristic(float(np.log(abs(ratio))), s)


def characteristic_to_gamma(c: AdditiveCharacteristic) -> float:
    """Inverse of gamma_to_characteristic."""
    t = c.s * np.exp(c.xi)  # theta
    return 2.0 * (t - 1.0) / (t + 1.0)


def mu_to_eta(mu: float) -> float:
    """Phase eta = 2 arctan(mu/2) of the delta-magnetic potential."""
    return 2.0 * np.arctan(0.5 * mu)


def eta_to_mu(eta: float) -> float:
    """Intensity mu = 2 tan(eta/2); eta normalized to (-pi, pi]."""
    eta = normalize_eta(eta)
    return 2.0 * np.tan(0.5 * eta)


def normalize_eta(eta: float) -> float:
    out = np.mod(eta + np.pi, 2.0 * np.pi) - np.pi
    if out == -np.pi:
        out = np.pi
    return float(out)


# ---------------------------------------------------------------------------
# unitary charts of Lagrangian planes
# ---------------------------------------------------------------------------
#
# Two Darboux charts are in use:
#   plain:  Gamma1 = (d+, -d-),          Gamma2 = (v+, v-)
#   hatted: Ghat1  = (dpsi_s, psi_s),    Ghat2  = (psi_r, -dpsi_r)
# Each parametrizes self-adjoint planes via the Cayley condition
#   G1 + i G2 = U (G1 - i G2).
# The charts describe the same plane, so U and U_hat are linked by the
# explicit linear change of trace coordinates below, which is fully
# determined by the chart definitions.

def _cayley_from_columns(g1: np.ndarray, g2: np.ndarray) -> np.ndarray:
    num = g1 + 1j * g2
    den = g1 - 1j * g2
    if abs(np.linalg.det(den)) < 1e-13 * max(1.0, np.abs(den).max() ** 2):
        raise PlaneNotGraph("plane admits no unitary parametrization")
    return num @ np.linalg.inv(den)


def _plane_basis_from_unitary(u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Columns of (G1, G2) spanning the plane parametrized by u."""
    u = np.asarray(u, dtype=complex)
    g1 = 0.5 * (u + np.eye(2))
    g2 = (u - np.eye(2)) / 2j
    return g1, g2


def _traces_from_plain(g1: np.ndarray, g2: np.ndarray) -> np.ndarray:
    """Stack (v+, v-, d+, d-) rows from plain-chart basis columns."""
    return np.vstack([g2[0], g2[1], g1[0], -g1[1]])


def unitary_of_lambda(lam: TransmissionMatrix) -> np.ndarray:
    """Plain-chart Cayley unitary of a transmission-matrix plane."""
    m = lam.entries
    # basis: (v-, d-) = e1, e2; (v+, d+) = Lambda columns
    v_plus, d_plus = m[0], m[1]
    v_minus = np.array([1.0, 0.0], dtype=complex)
    d_minus = np.array([0.0, 1.0], dtype=complex)
    g1 = np.vstack([d_plus, -d_minus])
    g2 = np.vstack([v_plus, v_minus])
    return _cayley_from_columns(g1, g2)


def split_unitary(kind: Split) -> np.ndarray:
    """Diagonal plain-chart unitary of split conditions."""
    return np.diag(
        [np.exp(2j * kind.alpha_plus), np.exp(-2j * kind.alpha_minus)]
    ).astype(complex)


def u_hat_from_u(u: np.ndarray) -> np.ndarray:
    """Re-express a plain-chart unitary in the jump/mean chart.

    The plane is reconstructed from u, its traces are converted to
    (Ghat1, Ghat2) coordinates, and the hatted Cayley unitary is solved
    for.  Raises PlaneNotGraph if the transformed plane is numerically
    not a unitary graph (cannot happen for genuine Lagrangian planes).
    """
    g1, g2 = _plane_basis_from_unitary(u)
    t = _traces_from_plain(g1, g2)
    v_p, v_m, d_p, d_m = t
    ghat1 = np.vstack([d_p - d_m, v_p - v_m])
    ghat2 = np.vstack([0.5 * (v_p + v_m), -0.5 * (d_p + d_m)])
    return _cayley_from_columns(ghat1, ghat2)


def u_from_u_hat(u_hat: np.ndarray) -> np.ndarray:
    """Inverse of u_hat_from_u."""
    h1, h2 = _plane_basis_from_unitary(u_hat)
    dpsi_s, psi_s = h1[0], h1[1]
    psi_r, dpsi_r = h2[0], -h2[1]
    v_p, v_m = psi_r + 0.5 * psi_s, psi_r - 0.5 * psi_s
    d_p, d_m = dpsi_r + 0.5 * dpsi_s, dpsi_r - 0.5 * dpsi_s
    g1 = np.vstack([d_p, -d_m])
    g2 = np.vstack([v_p, v_m])
    return _cayley_from_columns(g1, g2)
