"""Concrete systems: a direction on the sphere, attitude on SO(3), pose on SE(3).

Plus two deliberately defective variants used to exercise the checks: a
gyro-driven sphere with its input space truncated to one axis (not closed
under the induced action) and the two-output azimuth/elevation velocity
sensor (incomplete at the poles).
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from . import kernels
from .equivariance import InputAction, LiftFunction, lift_from_pseudoinverse
from .errors import UsageError
from .homogeneous import SPHERE, GroupAction, torsor_manifold
from .kinematics import ConfigurationOutput, SystemFunction, VelocityOutput
from .lie import SE3, SO3, MatrixLieGroup
from .observer import EquivariantSystem

E1, E2, E3 = np.eye(3)

ATTITUDE_DIRECTIONS = np.array([E3, E1])
POSE_LANDMARKS = np.array([[1.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 1.5], [1.0, 1.0, 1.0]])


def _rotation_between(a, b):
    """Minimal rotation ``Q`` with ``Q a = b`` (half turn about a fixed normal if antipodal)."""
    axis = np.cross(a, b)
    s = np.linalg.norm(axis)
    c = float(np.dot(a, b))
    if s < 1e-12:
        if c > 0:
            return np.eye(3)
        normal = np.cross(a, E1)
        if np.linalg.norm(normal) < 1e-6:
            normal = np.cross(a, E2)
        return kernels.so3_exp(np.pi * normal / np.linalg.norm(normal))
    return kernels.so3_exp(np.arctan2(s, c) * axis / s)


def sphere_action() -> GroupAction:
    """``phi(R, xi) = R^T xi``."""

    def stabilizer(xi, rng):
        return kernels.so3_exp(rng.uniform(-np.pi, np.pi) * np.asarray(xi, dtype=float))

    return GroupAction(
        group=SO3,
        manifold=SPHERE,
        apply=lambda r, xi: r.T @ xi,
        d_state_fn=lambda r, xi, eta: r.T @ eta,
        d_origin_fn=lambda xi, u: np.cross(xi, u),
        stabilizer_fn=stabilizer,
        section_fn=lambda origin, xi: _rotation_between(origin, xi).T,
    )


def torsor_action(group: MatrixLieGroup) -> GroupAction:
    """Right translation ``phi(X, P) = P X``; free and transitive."""
    return GroupAction(
        group=group,
        manifold=torsor_manifold(group),
        apply=lambda x, p: p @ x,
        d_state_fn=lambda x, p, eta: eta @ x,
        d_origin_fn=lambda p, u: p @ group.hat(u),
        section_fn=lambda origin, p: group.inverse_matrix(origin) @ p,
        free=True,
    )


def _unit_constraint(y):
    return float(np.max(np.abs(np.linalg.norm(np.reshape(y, (-1, 3)), axis=1) - 1.0)))


def direction_output(manifold, *refs) -> ConfigurationOutput:
    """``h(R) = (R^T r_1, ..., R^T r_k)`` on an SO(3) torsor."""
    refs = np.array(refs, dtype=float)
    if len(refs) == 1:
        return ConfigurationOutput(manifold, (3,), lambda r: r.T @ refs[0], _unit_constraint)
    return ConfigurationOutput(manifold, refs.shape, lambda r: refs @ r, _unit_constraint)


def s2_direction(lift: str = "registered") -> EquivariantSystem:
    """Unit direction driven by a body-frame gyro: ``xi' = xi x Omega``."""
    action = sphere_action()
    f = SystemFunction(SPHERE, 3, lambda xi, om: np.cross(xi, om))
    g = VelocityOutput(SPHERE, 3, lambda xi, eta: np.cross(eta, xi))
    h = ConfigurationOutput(SPHERE, (3,), lambda xi: np.array(xi, dtype=float),
                            lambda y: abs(np.linalg.norm(y) - 1.0))
    psi = InputAction(SO3, 3, lambda r, om: r.T @ om)
    system = EquivariantSystem(
        name="s2_direction",
        action=action, f=f, g=g, h=h, psi=psi,
        lift=LiftFunction(SO3, lambda xi, om: np.array(om, dtype=float), name="registered"),
        origin=E3.copy(),
        innovation_kind="direction",
        output_refs=E3.copy(),
        description="direction on S2 with gyro input, SO(3) symmetry, full-vector output",
    )
    if lift == "pseudoinverse":
        system.lift = lift_from_pseudoinverse(action, f)
        system.name = "s2_direction_pinv"
    elif lift != "registered":
        raise UsageError(f"unknown lift {lift!r}")
    system.validate()
    return system


def so3_attitude() -> EquivariantSystem:
    """Attitude kinematics ``R' = R hat(omega)`` observed through two directions."""
    action = torsor_action(SO3)
    m = action.manifold
    system = EquivariantSystem(
        name="so3_attitude",
        action=action,
        f=SystemFunction(m, 3, lambda r, om: r @ kernels.so3_hat(np.asarray(om, dtype=float))),
        g=VelocityOutput(m, 3, lambda r, eta: SO3.vee(r.T @ eta, tol=None)),
        h=direction_output(m, *ATTITUDE_DIRECTIONS),
        psi=InputAction(SO3, 3, lambda x, om: x.T @ om),
        lift=LiftFunction(SO3, lambda r, om: np.array(om, dtype=float), name="registered"),
        origin=np.eye(3),
        innovation_kind="directions",
        output_refs=ATTITUDE_DIRECTIONS.copy(),
        description="attitude on SO(3) torsor, gyro input, two reference directions",
    )
    system.validate()
    return system


def se3_pose() -> EquivariantSystem:
    """Pose kinematics ``T' = T hat(omega, v)`` observed through body-frame landmarks."""
    action = torsor_action(SE3)
    m = action.manifold
    marks = np.hstack([POSE_LANDMARKS, np.ones((len(POSE_LANDMARKS), 1))])

    def output(t):
        return (marks @ SE3.inverse_matrix(t).T)[:, :3]

    system = EquivariantSystem(
        name="se3_pose",
        action=action,
        f=SystemFunction(m, 6, lambda t, u: t @ SE3.hat(u)),
        g=VelocityOutput(m, 6, lambda t, eta: SE3.vee(SE3.inverse_matrix(t) @ eta, tol=None)),
        h=ConfigurationOutput(m, POSE_LANDMARKS.shape, output),
        psi=InputAction(SE3, 6, lambda x, u: SE3.adjoint_coords(SE3.inverse_matrix(x), u)),
        lift=LiftFunction(SE3, lambda t, u: np.array(u, dtype=float), name="registered"),
        origin=np.eye(4),
        innovation_kind="landmarks",
        output_refs=POSE_LANDMARKS.copy(),
        description="pose on SE(3) torsor, body twist input, four landmarks",
    )
    system.validate()
    return system


def s2_truncated():
    """Gyro on S2 with only the first axis measured; returns ``(action, f)``."""
    return sphere_action(), SystemFunction(SPHERE, 1, lambda xi, a: np.cross(xi, a[0] * E1))


def azimuth_elevation_output() -> VelocityOutput:
    """Two smooth angle-rate sensors about ``e3``.

    Components are ``cos^2(el) az'`` and ``cos(el) el'``, i.e.
    ``e3 . (xi x eta)`` and ``e3 . eta``; both vanish identically on the
    tangent planes at the poles.
    """
    return VelocityOutput(SPHERE, 2, lambda xi, eta: np.array(
        [np.dot(E3, np.cross(xi, eta)), np.dot(E3, eta)]))


BUILDERS = {
    "s2_direction": s2_direction,
    "so3_attitude": so3_attitude,
    "se3_pose": se3_pose,
}
CHECK_ONLY = {
    "s2_direction_pinv": "S2 direction with the minimum-norm pseudoinverse lift",
    "s2_truncated": "S2 gyro restricted to one axis (input closure counterexample)",
}
SYSTEM_IDS = tuple(BUILDERS)


@lru_cache(maxsize=None)
def get_system(system_id: str) -> EquivariantSystem:
    if system_id == "s2_direction_pinv":
        return s2_direction(lift="pseudoinverse")
    try:
        return BUILDERS[system_id]()
    except KeyError:
        raise UsageError(
            f"unknown system {system_id!r}; known: {', '.join(SYSTEM_IDS + tuple(CHECK_ONLY))}"
        ) from None
