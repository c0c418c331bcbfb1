"""Finite-difference verification of the analytic gradients and Lie derivatives.

Every objective's gradient is hand-derived, so an independent numerical check
guards against transcription slips: central differences approximate the
gradient of V, and dotting that numerical gradient with the drift and input
fields reproduces LfV, Lg1V, Lg2V without touching the analytic formulas.
All objectives are polynomials of per-coordinate degree two, so the central
difference carries no truncation error on them and the comparison is limited
by roundoff only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .objectives import ObjectiveKind, evaluate
from .rigidbody import DiskParams, control_fields, drift_field

DEFAULT_FD_STEP = 1e-5


@dataclass(frozen=True)
class VerificationReport:
    """Worst-case relative errors of one objective over a random sample set.

    Relative error is measured as ``|analytic - reference| / (1 + |reference|)``
    with the finite-difference value as the reference.  ``passed`` holds
    exactly when all four maxima are below ``tol``.
    """

    kind: ObjectiveKind
    samples: int
    tol: float
    max_rel_error_grad: float
    max_rel_error_LfV: float
    max_rel_error_Lg1V: float
    max_rel_error_Lg2V: float
    worst_state: np.ndarray
    passed: bool

    def summary_line(self) -> str:
        status = "pass" if self.passed else "FAIL"
        return (
            f"{self.kind.value:11s} {status}  samples={self.samples}  "
            f"grad={self.max_rel_error_grad:.3e}  LfV={self.max_rel_error_LfV:.3e}  "
            f"Lg1V={self.max_rel_error_Lg1V:.3e}  Lg2V={self.max_rel_error_Lg2V:.3e}"
        )


def fd_gradient(fn, x, h: float = DEFAULT_FD_STEP) -> np.ndarray:
    """Central-difference gradient of a scalar function of a 5-vector.

    If an offset point falls outside the function's valid domain (it raises
    :class:`DomainError`), the step for that coordinate shrinks tenfold, up
    to three times, before giving up.
    """
    if not h > 0.0:
        raise ValueError(f"finite-difference step must be positive, got {h}")
    x = np.asarray(x, dtype=float)
    grad = np.empty_like(x)
    for i in range(x.size):
        hi = h
        for _ in range(4):
            xp = x.copy()
            xp[i] += hi
            xm = x.copy()
            xm[i] -= hi
            try:
                vp = fn(xp)
                vm = fn(xm)
            except DomainError:
                hi /= 10.0
                continue
            grad[i] = (vp - vm) / (2.0 * hi)
            break
        else:
            raise DomainError(
                f"coordinate {i}: no valid finite-difference step found near x[{i}]={x[i]}"
            )
    return grad


def _rel(analytic: float, reference: float) -> float:
    return abs(analytic - reference) / (1.0 + abs(reference))


def verify_objective(
    kind: ObjectiveKind,
    n_samples: int = 1000,
    tol: float = 1e-6,
    seed: int = 42,
    params: DiskParams = DiskParams(),
    h: float = DEFAULT_FD_STEP,
) -> VerificationReport:
    """Compare analytic gradients and Lie derivatives against finite differences.

    States are sampled with the rate components uniform in [-10, 10] and each
    inertia entry uniform in [0.5, 3] times its rest value.  Deterministic for
    a fixed seed.
    """
    if n_samples < 1:
        raise ValueError(f"need at least one sample, got {n_samples}")
    rng = np.random.default_rng(seed)
    max_errors = {"grad": 0.0, "LfV": 0.0, "Lg1V": 0.0, "Lg2V": 0.0}
    worst_state = None
    worst_overall = -1.0

    for _ in range(n_samples):
        x = np.array([
            rng.uniform(-10.0, 10.0),
            rng.uniform(-10.0, 10.0),
            rng.uniform(-10.0, 10.0),
            rng.uniform(0.5 * params.Ibar2, 3.0 * params.Ibar2),
            rng.uniform(0.5 * params.Ibar3, 3.0 * params.Ibar3),
        ])
        ev = evaluate(kind, x, params)
        num_grad = fd_gradient(lambda s: evaluate(kind, s, params).V, x, h)
        f = drift_field(x)
        g1, g2 = control_fields(x)
        errors = {
            "grad": max(_rel(a, r) for a, r in zip(ev.grad, num_grad)),
            "LfV": _rel(ev.LfV, float(num_grad @ f)),
            "Lg1V": _rel(ev.Lg1V, float(num_grad @ g1)),
            "Lg2V": _rel(ev.Lg2V, float(num_grad @ g2)),
        }
        for key, err in errors.items():
            max_errors[key] = max(max_errors[key], err)
        sample_worst = max(errors.values())
        if sample_worst > worst_overall:
            worst_overall = sample_worst
            worst_state = x

    return VerificationReport(
        kind=kind,
        samples=n_samples,
        tol=tol,
        max_rel_error_grad=max_errors["grad"],
        max_rel_error_LfV=max_errors["LfV"],
        max_rel_error_Lg1V=max_errors["Lg1V"],
        max_rel_error_Lg2V=max_errors["Lg2V"],
        worst_state=worst_state,
        passed=all(err < tol for err in max_errors.values()),
    )
