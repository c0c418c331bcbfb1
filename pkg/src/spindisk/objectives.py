"""Objective functions and the descent control law for the disk.

Each objective is a nonnegative scalar V of the 5-state that vanishes exactly
on its target set.  Writing the dynamics in affine form
``dx/dt = f(x) + g1(x) u1 + g2(x) u2`` gives

    dV/dt = <grad V, f> + <grad V, g1> u1 + <grad V, g2> u2
          = LfV + a1 u1 + a2 u2

and the unit-magnitude input minimizing dV/dt is ``u = -(a1, a2) / |a|``.
The control law applies that direction (scaled by a configurable gain)
whenever ``|a|`` exceeds a small deadband, and outputs zero inside it.

Three objectives are provided:

* ``ALIGNMENT``: penalizes the off-axis rate components w2, w3 together with
  the inertia offset from rest, steering the spin onto the first principal
  axis.
* ``PASSIVE``: mechanical energy, i.e. kinetic energy plus an artificial
  potential in the inertia offsets, so the closed loop dissipates energy.
* ``PRECESSION``: squared norm of w x (I w) plus the inertia offsets; zero
  means the body rate sits on a principal axis and the free rotation is
  steady.

For ALIGNMENT and PASSIVE the drift term LfV is identically zero, so the
closed loop satisfies dV/dt = -gain * |a| <= 0 everywhere outside the
deadband.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .rigidbody import (
    ControlInput,
    DiskParams,
    ZERO_INPUT,
    _as5,
    _check_inertia,
    _control_terms,
    _drift_terms,
    _precession_terms,
)


class ObjectiveKind(enum.Enum):
    """Closed set of objective functions the controller can descend."""

    ALIGNMENT = "alignment"
    PASSIVE = "passive"
    PRECESSION = "precession"

    @classmethod
    def parse(cls, text: str) -> "ObjectiveKind":
        try:
            return cls(text.strip().lower())
        except ValueError:
            valid = ", ".join(k.value for k in cls)
            raise ConfigError(f"unknown objective {text!r}; expected one of: {valid}") from None


@dataclass(frozen=True)
class ObjectiveEval:
    """Objective value, its gradient over the 5-state, and the Lie derivatives.

    ``LfV``, ``Lg1V``, ``Lg2V`` are the directional derivatives of V along the
    drift and the two input fields, computed as dot products with the
    gradient.
    """

    V: float
    grad: np.ndarray
    LfV: float
    Lg1V: float
    Lg2V: float


@dataclass(frozen=True)
class ControlLawConfig:
    """Deadband and output magnitude of the descent control law.

    ``deadband_eps`` guards the normalization by |a|: below it the output is
    zero.  ``gain`` is the output magnitude outside the deadband (1 gives a
    unit-norm input).  Setting ``deadband_eps = math.inf`` disables the
    controller entirely, which is handy for free-rotation runs.
    """

    deadband_eps: float = 1e-9
    gain: float = 1.0

    def __post_init__(self):
        if not self.deadband_eps > 0.0:
            raise ConfigError(f"deadband_eps must be positive, got {self.deadband_eps}")
        if not self.gain > 0.0:
            raise ConfigError(f"gain must be positive, got {self.gain}")


@dataclass(frozen=True)
class SchedulePlan:
    """Ordered (end_time, kind) segments; the last segment extends forever.

    Segments are half-open: at exactly an end time the next segment's
    objective is already active.
    """

    segments: tuple

    def __post_init__(self):
        segs = tuple((float(end), kind) for end, kind in self.segments)
        object.__setattr__(self, "segments", segs)
        if not segs:
            raise ConfigError("schedule plan must contain at least one segment")
        for (prev, _), (cur, _) in zip(segs, segs[1:]):
            if cur <= prev:
                raise ConfigError(f"plan end times must be strictly increasing, got {prev} then {cur}")
        for _, kind in segs:
            if not isinstance(kind, ObjectiveKind):
                raise ConfigError(f"plan segment kind must be an ObjectiveKind, got {kind!r}")

    @classmethod
    def single(cls, kind: ObjectiveKind, end_time: float = math.inf) -> "SchedulePlan":
        return cls(((end_time, kind),))


def scheduled_kind(plan: SchedulePlan, t: float) -> ObjectiveKind:
    """Objective active at time t: first segment with end_time > t, else the last."""
    if not plan.segments:
        raise ConfigError("schedule plan must contain at least one segment")
    for end, kind in plan.segments:
        if t < end:
            return kind
    return plan.segments[-1][1]


def evaluate(kind: ObjectiveKind, state, params: DiskParams) -> ObjectiveEval:
    """Evaluate an objective, its gradient, and its Lie derivatives at a state."""
    w1, w2, w3, I2, I3 = _as5(state)
    _check_inertia(I2, I3)
    d2 = I2 - params.Ibar2
    d3 = I3 - params.Ibar3

    if kind is ObjectiveKind.ALIGNMENT:
        V = 0.5 * (w2 * w2 + w3 * w3 + d2 * d2 + d3 * d3)
        grad = (0.0, w2, w3, d2, d3)
    elif kind is ObjectiveKind.PASSIVE:
        V = (
            0.5 * (I2 + I3) * w1 * w1
            + 0.5 * I2 * w2 * w2
            + 0.5 * I3 * w3 * w3
            + 0.5 * d2 * d2
            + 0.5 * d3 * d3
        )
        grad = (
            (I2 + I3) * w1,
            I2 * w2,
            I3 * w3,
            0.5 * w1 * w1 + 0.5 * w2 * w2 + d2,
            0.5 * w1 * w1 + 0.5 * w3 * w3 + d3,
        )
    elif kind is ObjectiveKind.PRECESSION:
        a, b, c = _precession_terms(w1, w2, w3, I2, I3)
        V = 0.5 * (a * a + b * b + c * c) + 0.5 * d2 * d2 + 0.5 * d3 * d3
        dI = I3 - I2
        grad = (
            I2 * I2 * w1 * w3 * w3 + I3 * I3 * w1 * w2 * w2,
            dI * dI * w2 * w3 * w3 + I3 * I3 * w1 * w1 * w2,
            dI * dI * w2 * w2 * w3 + I2 * I2 * w1 * w1 * w3,
            -(dI * w2 * w2 * w3 * w3) + I2 * w1 * w1 * w3 * w3 + d2,
            dI * w2 * w2 * w3 * w3 + I3 * w1 * w1 * w2 * w2 + d3,
        )
    else:
        raise ConfigError(f"unknown objective kind {kind!r}")

    f1, f2, f3 = _drift_terms(w1, w2, w3, I2, I3)
    c1, c2, c3 = _control_terms(w1, w2, w3, I2, I3)
    g = grad
    # Dot products with f = (f1, f2, f3, 0, 0), g1 = (c1, c2, 0, 1, 0) and
    # g2 = (c1, 0, c3, 0, 1); the structurally zero entries are skipped.
    LfV = g[0] * f1 + g[1] * f2 + g[2] * f3
    Lg1V = g[0] * c1 + g[1] * c2 + g[3]
    Lg2V = g[0] * c1 + g[2] * c3 + g[4]
    return ObjectiveEval(V=V, grad=np.array(grad), LfV=LfV, Lg1V=Lg1V, Lg2V=Lg2V)


def control_law(ev: ObjectiveEval, cfg: ControlLawConfig) -> ControlInput:
    """Steepest-descent input of magnitude ``gain``, zero inside the deadband."""
    n = math.hypot(ev.Lg1V, ev.Lg2V)
    if n < cfg.deadband_eps:
        return ZERO_INPUT
    return ControlInput(-(cfg.gain * ev.Lg1V) / n, -(cfg.gain * ev.Lg2V) / n)
