"""Rigid-body core for a torque-free flat disk with a controllable inertia matrix.

The disk carries two pairs of internal masses that slide symmetrically along
the two in-plane principal axes.  Shifting a pair changes the corresponding
diagonal inertia entry, so all actuation happens through the inertia matrix:
no external torque is ever applied and the world-frame angular momentum
``R @ I @ w`` stays constant while the body rate redistributes between axes.

Conventions used throughout the package:

* ``x = (w1, w2, w3, I2, I3)``: body-frame rotation rate [rad/s] and the two
  in-plane principal inertias [kg m^2].  The spin-axis inertia ``I1`` is never
  stored: a planar mass distribution always satisfies ``I1 = I2 + I3``, so
  ``I1`` is derived on demand and the constraint holds by construction.
* ``u = (u1, u2) = (dI2/dt, dI3/dt)``: commanded inertia rates [kg m^2 / s].
* ``R``: body-to-world attitude matrix in SO(3).

The rate dynamics in the body frame are

    dw1/dt = -w1/(I2+I3) * (u1+u2) - (I3-I2)/(I2+I3) * w2*w3
    dw2/dt = -w2/I2 * u1 - w3*w1
    dw3/dt = -w3/I3 * u2 + w1*w2

together with ``dI2/dt = u1``, ``dI3/dt = u2`` and the attitude kinematics
``dR/dt = R @ skew(w)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DomainError, InfeasibleInertiaError


@dataclass(frozen=True)
class DiskParams:
    """Mass and radius of the disk.

    The rest inertias follow from the geometry: ``Ibar1 = m r^2 / 2`` about
    the spin axis and ``Ibar2 = Ibar3 = m r^2 / 4`` in the plane.  The
    defaults give ``m r^2 = 4``, i.e. rest inertia diag(2, 1, 1).
    """

    m: float = 4.0
    r: float = 1.0

    def __post_init__(self):
        if self.m <= 0.0 or self.r <= 0.0:
            raise DomainError(f"mass and radius must be positive, got m={self.m}, r={self.r}")

    @classmethod
    def from_mr2(cls, mr2: float) -> "DiskParams":
        """Build parameters from the product m*r^2 alone (unit radius)."""
        if mr2 <= 0.0:
            raise DomainError(f"m*r^2 must appear positive, got {mr2}")
        return cls(m=float(mr2), r=1.0)

    @property
    def mr2(self) -> float:
        return self.m * self.r * self.r

    @property
    def Ibar1(self) -> float:
        return 0.5 * self.mr2

    @property
    def Ibar2(self) -> float:
        return 0.25 * self.mr2

    @property
    def Ibar3(self) -> float:
        return 0.25 * self.mr2

    def nominal_inertia(self) -> "InertiaState":
        """Inertia with both mass pairs at the center."""
        return InertiaState(self.Ibar2, self.Ibar3)


@dataclass(frozen=True)
class InertiaState:
    """In-plane principal inertias of the disk.

    The spin-axis entry is exposed as the derived property ``I1 = I2 + I3``
    and is intentionally not a field: integrating it separately could let the
    planarity constraint drift.
    """

    I2: float
    I3: float

    def __post_init__(self):
        if self.I2 <= 0.0 or self.I3 <= 0.0:
            raise DomainError(f"inertia entries must be positive, got I2={self.I2}, I3={self.I3}")

    @property
    def I1(self) -> float:
        return self.I2 + self.I3

    def diag(self) -> np.ndarray:
        """Principal inertias as the 3-vector (I1, I2, I3)."""
        return np.array([self.I1, self.I2, self.I3])


class ControlInput(NamedTuple):
    """Commanded rates of change of I2 and I3 [kg m^2 / s]."""

    u1: float
    u2: float


ZERO_INPUT = ControlInput(0.0, 0.0)


@dataclass(frozen=True)
class BodyState:
    """Full simulation state: attitude, body rate, and inertia."""

    R: np.ndarray
    omega: np.ndarray
    inertia: InertiaState

    def __post_init__(self):
        object.__setattr__(self, "R", np.asarray(self.R, dtype=float))
        object.__setattr__(self, "omega", np.asarray(self.omega, dtype=float))
        if self.R.shape != (3, 3):
            raise DomainError(f"attitude must be a 3x3 matrix, got shape {self.R.shape}")
        if self.omega.shape != (3,):
            raise DomainError(f"omega must be a 3-vector, got shape {self.omega.shape}")

    def state_vector(self) -> np.ndarray:
        """The 5-vector (w1, w2, w3, I2, I3)."""
        return np.array([*self.omega, self.inertia.I2, self.inertia.I3])


def _as5(state) -> tuple[float, float, float, float, float]:
    w1, w2, w3, I2, I3 = (float(v) for v in state)
    return w1, w2, w3, I2, I3


def _check_inertia(I2: float, I3: float):
    if I2 <= 0.0 or I3 <= 0.0:
        raise DomainError(f"inertia entries must stay positive, got I2={I2}, I3={I3}")


def _drift_terms(w1, w2, w3, I2, I3):
    # Rate part of the uncontrolled (u = 0) dynamics.
    return (-(I3 - I2) / (I2 + I3) * w2 * w3, -w3 * w1, w1 * w2)


def _control_terms(w1, w2, w3, I2, I3):
    # Nonzero rate entries of the two input fields: g1 = (c1, c2, 0, 1, 0),
    # g2 = (c1, 0, c3, 0, 1).
    return (-w1 / (I2 + I3), -w2 / I2, -w3 / I3)


def _precession_terms(w1, w2, w3, I2, I3):
    # Components of w x (I w) with the planarity reduction I1 - I3 = I2 and
    # I2 - I1 = -I3 applied; shared so every caller rounds identically.
    return ((I3 - I2) * w2 * w3, I2 * w3 * w1, -(I3 * w1 * w2))


def inertia_from_lengths(params: DiskParams, l2: float, l3: float) -> InertiaState:
    """Inertia produced by mass-pair offsets l2, l3 [m] from the center."""
    if l2 < 0.0 or l3 < 0.0:
        raise DomainError(f"mass offsets must be nonnegative, got l2={l2}, l3={l3}")
    rest = 0.25 * params.mr2
    return InertiaState(rest + 0.5 * l2 * l2, rest + 0.5 * l3 * l3)


def lengths_from_inertia(params: DiskParams, inertia: InertiaState) -> tuple[float, float]:
    """Mass-pair offsets that realize the given inertia.

    Inverse of :func:`inertia_from_lengths`.  Raises
    :class:`InfeasibleInertiaError` if an entry sits below the rest value by
    more than a 1e-12 relative tolerance; entries within tolerance map to 0.
    """
    rest = 0.25 * params.mr2
    tol = 1e-12 * max(1.0, rest)
    lengths = []
    for name, value in (("I2", inertia.I2), ("I3", inertia.I3)):
        excess = value - rest
        if excess < -tol:
            raise InfeasibleInertiaError(
                f"{name}={value} is below the rest inertia {rest}; no real mass offset produces it"
            )
        lengths.append(math.sqrt(2.0 * excess) if excess > 0.0 else 0.0)
    return lengths[0], lengths[1]


def drift_field(state) -> np.ndarray:
    """Uncontrolled part f(x) of the affine dynamics dx/dt = f + g1 u1 + g2 u2."""
    w1, w2, w3, I2, I3 = _as5(state)
    _check_inertia(I2, I3)
    f1, f2, f3 = _drift_terms(w1, w2, w3, I2, I3)
    return np.array([f1, f2, f3, 0.0, 0.0])


def control_fields(state) -> tuple[np.ndarray, np.ndarray]:
    """Input fields (g1, g2) of the affine dynamics."""
    w1, w2, w3, I2, I3 = _as5(state)
    _check_inertia(I2, I3)
    c1, c2, c3 = _control_terms(w1, w2, w3, I2, I3)
    g1 = np.array([c1, c2, 0.0, 1.0, 0.0])
    g2 = np.array([c1, 0.0, c3, 0.0, 1.0])
    return g1, g2


def state_rhs(state, u) -> np.ndarray:
    """Time derivative of the 5-state under input u = (u1, u2)."""
    w1, w2, w3, I2, I3 = _as5(state)
    _check_inertia(I2, I3)
    u1, u2 = u
    f1, f2, f3 = _drift_terms(w1, w2, w3, I2, I3)
    c1, c2, c3 = _control_terms(w1, w2, w3, I2, I3)
    return np.array([
        c1 * (u1 + u2) + f1,
        c2 * u1 + f2,
        c3 * u2 + f3,
        u1,
        u2,
    ])


def skew(v) -> np.ndarray:
    """Antisymmetric matrix of v, such that skew(v) @ w == cross(v, w)."""
    x, y, z = (float(c) for c in v)
    return np.array([
        [0.0, -z, y],
        [z, 0.0, -x],
        [-y, x, 0.0],
    ])


def attitude_rhs(R, omega) -> np.ndarray:
    """Attitude kinematics dR/dt = R @ skew(omega) for a body-frame rate."""
    return np.asarray(R, dtype=float) @ skew(omega)


def rotation_exp(phi) -> np.ndarray:
    """Rotation matrix exp(skew(phi)) via the Rodrigues closed form.

    Exactly orthogonal up to roundoff; switches to a series for the
    sin(t)/t and (1-cos(t))/t^2 factors below t = 1e-8.
    """
    x, y, z = (float(c) for c in phi)
    t2 = x * x + y * y + z * z
    t = math.sqrt(t2)
    if t < 1e-8:
        a = 1.0 - t2 / 6.0
        b = 0.5 - t2 / 24.0
    else:
        a = math.sin(t) / t
        b = (1.0 - math.cos(t)) / t2
    return np.array([
        [1.0 - b * (y * y + z * z), -a * z + b * x * y, a * y + b * x * z],
        [a * z + b * x * y, 1.0 - b * (x * x + z * z), -a * x + b * y * z],
        [-a * y + b * x * z, a * x + b * y * z, 1.0 - b * (x * x + y * y)],
    ])


def attitude_defect(R) -> float:
    """Max-abs deviation of R^T R from the identity."""
    R = np.asarray(R, dtype=float)
    return float(np.max(np.abs(R.T @ R - np.eye(3))))


def angular_momentum(state: BodyState) -> np.ndarray:
    """World-frame angular momentum R @ (I w); constant along any trajectory."""
    return state.R @ (state.inertia.diag() * state.omega)


def kinetic_energy(state: BodyState) -> float:
    """Rotational kinetic energy (1/2) w^T I w [J]."""
    w1, w2, w3 = state.omega
    inertia = state.inertia
    return 0.5 * (inertia.I1 * w1 * w1 + inertia.I2 * w2 * w2 + inertia.I3 * w3 * w3)


def precession_norm_sq(state) -> float:
    """Squared norm of w x (I w), zero exactly when w lies on a principal axis.

    Uses the planarity reduction I1 - I3 = I2 and I2 - I1 = -I3, so the value
    is a function of the 5-state alone.
    """
    w1, w2, w3, I2, I3 = _as5(state)
    _check_inertia(I2, I3)
    a, b, c = _precession_terms(w1, w2, w3, I2, I3)
    return a * a + b * b + c * c
