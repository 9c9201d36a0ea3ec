"""Lifted system, observer, invariant errors and error dynamics.

All group-valued arguments accept either a :class:`~eqobs.lie.GroupElement`
or a raw matrix; results are raw arrays (tangent matrices, algebra
coordinates, manifold points).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .equivariance import InputAction, LiftFunction, check_equivariance, check_lift
from .errors import RegistrationError, UnsupportedError
from .homogeneous import GroupAction, check_action_axioms, d_group_at_identity
from .kinematics import ConfigurationOutput, SystemFunction, VelocityOutput, check_compatibility
from .lie import GroupElement, MatrixLieGroup, as_rng


def _m(x) -> np.ndarray:
    return x.matrix if isinstance(x, GroupElement) else np.asarray(x, dtype=float)


@dataclass
class EquivariantSystem:
    """Everything the observer needs about one kinematic model with symmetry."""

    name: str
    action: GroupAction
    f: SystemFunction
    g: VelocityOutput
    h: ConfigurationOutput
    psi: InputAction
    lift: LiftFunction
    origin: np.ndarray
    lift_is_equivariant: bool = True
    innovation_kind: str | None = None
    output_refs: np.ndarray | None = None
    description: str = ""
    meta: dict = field(default_factory=dict)

    @property
    def group(self) -> MatrixLieGroup:
        return self.action.group

    @property
    def manifold(self):
        return self.action.manifold

    def section(self, xi) -> np.ndarray:
        return self.action.section_fn(self.origin, np.asarray(xi, dtype=float))

    def validate(self, rng=0, n: int = 3, tol: float = 1e-8) -> None:
        """Fail fast if the registered pieces disagree at a few random samples."""
        rng = as_rng(rng)
        g, m = self.group, self.manifold
        for _ in range(n):
            a, b = g.random_matrix(rng), g.random_matrix(rng)
            xi = m.random_point(rng)
            v = rng.normal(size=self.f.input_dim)
            eta = m.random_tangent(xi, rng)
            checks = {
                "action axioms": check_action_axioms(self.action, a, b, xi),
                "compatibility": check_compatibility(self.f, self.g, xi, eta),
                "equivariance": check_equivariance(self, a, xi, v),
                "lift": check_lift(self.action, self.f, self.lift, xi, v),
            }
            for label, resid in checks.items():
                if not resid <= tol:
                    raise RegistrationError(f"{self.name}: {label} residual {resid:.3e}")


@dataclass(frozen=True)
class ObserverState:
    xhat: np.ndarray
    time: float = 0.0

    def estimate(self, system: EquivariantSystem) -> np.ndarray:
        return project_state(system, self.xhat)


@dataclass(frozen=True)
class Innovation:
    """``Delta_t(Xhat, y)`` returning algebra coordinates."""

    name: str
    gain: float
    fn: Callable[[float, np.ndarray, np.ndarray], np.ndarray]

    def __call__(self, t, xhat, y):
        return self.fn(t, _m(xhat), np.asarray(y, dtype=float))


def zero_innovation(group: MatrixLieGroup) -> Innovation:
    zero = np.zeros(group.dim)
    return Innovation("zero", 0.0, lambda t, xhat, y: zero.copy())


def reference_innovation(system, k: float = 1.0) -> Innovation:
    """One constructive correction per catalog system.

    Each pulls the outputs transported back to the origin, ``q_i``, onto their
    reference values ``p_i``.  The cross-product sign was fixed so that the
    cost ``sum |q_i - p_i|^2 / 2`` (equivalently ``1 - p . q`` for unit
    directions) is non-increasing under zero velocity.
    """
    if isinstance(system, str):
        from .catalog import get_system

        system = get_system(system)
    kind = system.innovation_kind
    refs = np.asarray(system.output_refs, dtype=float)
    k = float(k)
    if kind == "direction":
        p = refs.reshape(3)

        def fn(t, xhat, y):
            return k * np.cross(xhat @ y, p)
    elif kind == "directions":
        def fn(t, xhat, y):
            q = y.reshape(-1, 3) @ xhat.T
            return k * np.cross(q, refs).sum(axis=0)
    elif kind == "landmarks":
        def fn(t, xhat, y):
            ys = y.reshape(-1, 3)
            q = ys @ xhat[:3, :3].T + xhat[:3, 3]
            return np.concatenate([k * np.cross(q, refs).sum(axis=0), -k * (q - refs).sum(axis=0)])
    else:
        raise UnsupportedError(f"no reference innovation for system kind {kind!r}")
    return Innovation(f"reference[{kind}]", k, fn)


def lift_coords(system: EquivariantSystem, x, v) -> np.ndarray:
    """``Lambda(phi_origin(X), v)``: left-trivialized lifted velocity."""
    x = _m(x)
    return system.lift(system.action.apply(x, system.origin), np.asarray(v, dtype=float))


def lifted_field(system: EquivariantSystem, x, v) -> np.ndarray:
    x = _m(x)
    return x @ system.group.hat(lift_coords(system, x, v))


def project_state(system: EquivariantSystem, x) -> np.ndarray:
    return system.action.apply(_m(x), system.origin)


def observer_velocity(system: EquivariantSystem, innovation: Innovation, t, xhat, v, y) -> np.ndarray:
    """Left-trivialized observer velocity ``Lambda + Ad_{Xhat^-1} Delta``."""
    g = system.group
    xhat = _m(xhat)
    delta = innovation(t, xhat, y)
    return lift_coords(system, xhat, v) + g.adjoint_coords(g.inverse_matrix(xhat), delta)


def observer_field(system: EquivariantSystem, innovation: Innovation, t, xhat, v, y) -> np.ndarray:
    """``dL_Xhat Lambda(phi_origin(Xhat), v) + dR_Xhat Delta_t(Xhat, y)`` as a matrix."""
    g = system.group
    xhat = _m(xhat)
    return xhat @ g.hat(lift_coords(system, xhat, v)) + g.hat(innovation(t, xhat, y)) @ xhat


def state_error(system: EquivariantSystem, xhat, xi) -> np.ndarray:
    g = system.group
    return system.action.apply(g.inverse_matrix(_m(xhat)), np.asarray(xi, dtype=float))


def group_error(xhat, x):
    """``X Xhat^-1``; keeps the wrapper type of its inputs."""
    if isinstance(x, GroupElement):
        return GroupElement(x.group, x.matrix @ x.group.inverse_matrix(_m(xhat)))
    return np.asarray(x) @ np.linalg.inv(_m(xhat))


def check_error_invariance(system: EquivariantSystem, xhat, xi, z) -> float:
    """``|e(Xhat Z, phi_Z xi) - e(Xhat, xi)|``."""
    xhat, z = _m(xhat), _m(z)
    moved = state_error(system, xhat @ z, system.action.apply(z, xi))
    return float(np.abs(moved - state_error(system, xhat, xi)).max())


def naive_error(system: EquivariantSystem, xhat, xi) -> np.ndarray:
    """Ambient difference ``xi - phi_origin(Xhat)``; not invariant."""
    return np.asarray(xi, dtype=float) - project_state(system, xhat)


def check_naive_invariance(system: EquivariantSystem, xhat, xi, z) -> float:
    xhat, z = _m(xhat), _m(z)
    moved = naive_error(system, xhat @ z, system.action.apply(z, xi))
    return float(np.abs(moved - naive_error(system, xhat, xi)).max())


def error_dynamics_rhs_plain(system: EquivariantSystem, innovation: Innovation, t, xhat, e, v) -> np.ndarray:
    """``de/dt`` with the observer state kept explicit (valid for any lift)."""
    g, act = system.group, system.action
    xhat = _m(xhat)
    e = np.asarray(e, dtype=float)
    v = np.asarray(v, dtype=float)
    xi = act.apply(xhat, e)
    y = system.h(xi)
    diff = system.lift(xi, v) - system.lift(act.apply(xhat, system.origin), v)
    drive = d_group_at_identity(act, e, g.adjoint_coords(xhat, diff))
    return drive - d_group_at_identity(act, e, innovation(t, xhat, y))


def error_dynamics_rhs(system: EquivariantSystem, innovation: Innovation, t, xhat, e, v) -> np.ndarray:
    """``de/dt`` in the equivariant form driven by ``w = psi_{Xhat^-1}(v)``.

    Falls back to :func:`error_dynamics_rhs_plain` when the registered lift
    is not equivariant.
    """
    if not system.lift_is_equivariant:
        return error_dynamics_rhs_plain(system, innovation, t, xhat, e, v)
    g, act = system.group, system.action
    xhat = _m(xhat)
    e = np.asarray(e, dtype=float)
    w = system.psi(g.inverse_matrix(xhat), np.asarray(v, dtype=float))
    y = system.h(act.apply(xhat, e))
    diff = system.lift(e, w) - system.lift(system.origin, w)
    return d_group_at_identity(act, e, diff) - d_group_at_identity(act, e, innovation(t, xhat, y))


def group_error_rhs(system: EquivariantSystem, innovation: Innovation, t, xhat, x, v, y=None) -> np.ndarray:
    """``dE/dt = E Ad_Xhat(Lambda(phi(X)) - Lambda(phi(Xhat))) - E Delta`` as a matrix."""
    g = system.group
    xhat, x = _m(xhat), _m(x)
    if y is None:
        y = system.h(project_state(system, x))
    e_mat = x @ g.inverse_matrix(xhat)
    diff = lift_coords(system, x, v) - lift_coords(system, xhat, v)
    return e_mat @ g.hat(g.adjoint_coords(xhat, diff)) - e_mat @ g.hat(innovation(t, xhat, y))
