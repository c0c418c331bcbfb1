"""Tests for the finite-difference gradient and Lie-derivative verification."""

import numpy as np
import pytest

from spindisk import DomainError, ObjectiveKind, evaluate, fd_gradient, verify_objective
from spindisk.rigidbody import DiskParams

PARAMS = DiskParams()


def test_fd_gradient_quadratic():
    # quadratics have no truncation error; what remains is the cancellation
    # roundoff eps * |V| / (2h), so keep |V| of order one
    rng = np.random.default_rng(20)
    for _ in range(20):
        x = rng.uniform(-1.5, 1.5, 5)
        grad = fd_gradient(lambda s: 0.5 * float(s @ s), x, h=1e-5)
        assert np.max(np.abs(grad - x)) < 1e-10


def test_fd_gradient_constant():
    grad = fd_gradient(lambda s: 3.25, np.ones(5))
    assert np.array_equal(grad, np.zeros(5))


def test_fd_gradient_cubic_self_test():
    # central differences on sum(c_i x_i^3) have truncation error exactly c_i h^2
    coeffs = np.array([0.3, -0.5, 0.7, 0.4, -0.9])
    x = np.array([1.2, -0.7, 0.5, 2.0, -1.1])
    grad = fd_gradient(lambda s: float(coeffs @ s**3), x, h=1e-4)
    assert np.max(np.abs(grad - 3.0 * coeffs * x**2)) < 1e-8


def test_fd_gradient_matches_alignment_gradient():
    rng = np.random.default_rng(21)
    for _ in range(20):
        x = np.array([*rng.uniform(-10.0, 10.0, 3), *rng.uniform(0.5, 3.0, 2)])
        ev = evaluate(ObjectiveKind.ALIGNMENT, x, PARAMS)
        num = fd_gradient(lambda s: evaluate(ObjectiveKind.ALIGNMENT, s, PARAMS).V, x)
        assert np.max(np.abs(num - ev.grad) / (1.0 + np.abs(num))) < 1e-6


def test_fd_gradient_shrinks_step_near_domain_edge():
    # I2 below the default step: the first tries leave the valid domain and
    # the per-coordinate step must shrink until they do not
    x = np.array([1.0, 2.0, 3.0, 5e-6, 1.0])
    grad = fd_gradient(lambda s: evaluate(ObjectiveKind.ALIGNMENT, s, PARAMS).V, x, h=1e-5)
    assert np.all(np.isfinite(grad))


def test_fd_gradient_gives_up_after_three_shrinks():
    x = np.array([1.0, 2.0, 3.0, 5e-10, 1.0])
    with pytest.raises(DomainError):
        fd_gradient(lambda s: evaluate(ObjectiveKind.ALIGNMENT, s, PARAMS).V, x, h=1e-5)


def test_fd_gradient_rejects_bad_step():
    with pytest.raises(ValueError):
        fd_gradient(lambda s: 0.0, np.zeros(5), h=0.0)


@pytest.mark.parametrize("kind", list(ObjectiveKind))
def test_verify_objective_passes(kind):
    report = verify_objective(kind, n_samples=400, tol=1e-6, seed=42)
    assert report.passed, report.summary_line()
    assert report.samples == 400
    assert report.worst_state is not None and report.worst_state.shape == (5,)


def test_verify_passive_drift_term_is_zero():
    # the analytic drift Lie derivative of the energy objective is identically
    # zero; the finite-difference route must agree at tolerance
    report = verify_objective(ObjectiveKind.PASSIVE, n_samples=400, tol=1e-6, seed=7)
    assert report.max_rel_error_LfV < 1e-6


def test_verify_objective_deterministic():
    a = verify_objective(ObjectiveKind.PRECESSION, n_samples=100, tol=1e-6, seed=42)
    b = verify_objective(ObjectiveKind.PRECESSION, n_samples=100, tol=1e-6, seed=42)
    assert a.max_rel_error_grad == b.max_rel_error_grad
    assert a.max_rel_error_LfV == b.max_rel_error_LfV
    assert np.array_equal(a.worst_state, b.worst_state)


def test_verify_objective_validates_sample_count():
    with pytest.raises(ValueError):
        verify_objective(ObjectiveKind.ALIGNMENT, n_samples=0)
