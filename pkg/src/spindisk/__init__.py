"""Inertia-shaping spin control of a torque-free flat disk: model, controllers, simulation."""

from .errors import ConfigError, DomainError, InfeasibleInertiaError, IntegrationError
from .rigidbody import (
    BodyState,
    ControlInput,
    DiskParams,
    InertiaState,
    ZERO_INPUT,
    angular_momentum,
    attitude_defect,
    attitude_rhs,
    control_fields,
    drift_field,
    inertia_from_lengths,
    kinetic_energy,
    lengths_from_inertia,
    precession_norm_sq,
    rotation_exp,
    skew,
    state_rhs,
)
from .objectives import (
    ControlLawConfig,
    ObjectiveEval,
    ObjectiveKind,
    SchedulePlan,
    control_law,
    evaluate,
    scheduled_kind,
)
from .simulation import (
    Scenario,
    Trace,
    TraceRow,
    builtin_scenario,
    builtin_scenarios,
    rk4_step,
    run,
    with_overrides,
)
from .gradcheck import VerificationReport, fd_gradient, verify_objective

__version__ = "0.1.0"
