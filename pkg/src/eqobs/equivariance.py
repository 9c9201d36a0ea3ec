"""Input actions, the induced action on vector fields, and equivariant lifts.

The check functions take a *system bundle*: any object exposing ``action``,
``f``, ``psi``, ``lift`` and ``origin`` (normally an
:class:`~eqobs.observer.EquivariantSystem`).  Lifts return algebra
coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import StabilizerCompatibilityError, UsageError
from .homogeneous import (
    GroupAction,
    d_group_at_identity,
    d_state,
    pseudo_right_inverse,
    stabilizer_sample,
)
from .kinematics import SystemFunction
from .lie import MatrixLieGroup, as_rng

WELL_DEFINED_TOL = 1e-9
COMPAT_REJECT_TOL = 1e-6


@dataclass(frozen=True)
class InputAction:
    """Linear right action ``psi(X, v)`` on the input space."""

    group: MatrixLieGroup
    input_dim: int
    fn: Callable[[np.ndarray, np.ndarray], np.ndarray]

    def __call__(self, x, v):
        return self.fn(x, v)


@dataclass(frozen=True)
class LiftFunction:
    group: MatrixLieGroup
    fn: Callable[[np.ndarray, np.ndarray], np.ndarray]
    name: str = "lift"

    def __call__(self, xi, v):
        return self.fn(xi, v)


@dataclass(frozen=True)
class OriginLift:
    """Value of a lift at the origin only, ``v -> Lambda(origin, v)``."""

    origin: np.ndarray
    fn: Callable[[np.ndarray], np.ndarray]

    def __call__(self, v):
        return self.fn(v)


def check_psi_axioms(psi: InputAction, a, b, v, w, alpha=0.7, beta=-1.3) -> float:
    """Identity, right-composition ``psi_A psi_B = psi_BA``, and linearity residuals."""
    g = psi.group
    ident = np.abs(psi.fn(g.identity_matrix, v) - v).max()
    comp = np.abs(psi.fn(a, psi.fn(b, v)) - psi.fn(b @ a, v)).max()
    lin = np.abs(psi.fn(a, alpha * v + beta * w)
                 - alpha * psi.fn(a, v) - beta * psi.fn(a, w)).max()
    return float(max(ident, comp, lin))


def check_equivariance(system, x, xi, v) -> float:
    """``|dphi_X f(xi, v) - f(phi_X xi, psi_X v)|``."""
    act = system.action
    lhs = d_state(act, x, xi, system.f(xi, v))
    rhs = system.f(act.apply(x, xi), system.psi(x, v))
    return float(np.abs(lhs - rhs).max())


def induced_field_action(action: GroupAction, z, field: Callable, xi) -> np.ndarray:
    """Push the vector field ``field`` forward by ``phi_Z`` and evaluate at ``xi``."""
    g = action.group
    back = action.apply(g.inverse_matrix(z), np.asarray(xi, dtype=float))
    return d_state(action, z, back, field(back))


def check_induced_action_law(action: GroupAction, x, y, field: Callable, xi) -> float:
    """Residual of ``d*phi_Y d*phi_X f == d*phi_{XY} f`` at ``xi``."""
    inner = lambda p: induced_field_action(action, x, field, p)
    lhs = induced_field_action(action, y, inner, xi)
    rhs = induced_field_action(action, x @ y, field, xi)
    return float(np.abs(lhs - rhs).max())


def check_input_closure(action: GroupAction, f: SystemFunction, rng, n_groups: int = 20,
                        n_points: int = 12, tol: float = 1e-6):
    """Is ``image f`` closed under the induced action?

    For sampled ``Z`` and basis inputs ``v``, solve for one ``w`` with
    ``f(xi_i, w) = (d*phi_Z f_v)(xi_i)`` at every sample point.  Returns
    ``(closed, max_residual, witness)`` where ``witness = (Z, v)`` attains the
    maximum.
    """
    rng = as_rng(rng)
    m = action.manifold
    points = [m.random_point(rng) for _ in range(n_points)]
    stacked = np.vstack([
        np.column_stack([np.ravel(f.fn(p, e)) for e in np.eye(f.input_dim)]) for p in points])
    worst, witness = 0.0, None
    for _ in range(n_groups):
        z = action.group.random_matrix(rng)
        for v in np.eye(f.input_dim):
            target = np.concatenate([
                np.ravel(induced_field_action(action, z, f.field(v), p)) for p in points])
            w, *_ = np.linalg.lstsq(stacked, target, rcond=None)
            resid = float(np.abs(stacked @ w - target).max())
            if resid > worst:
                worst, witness = resid, (z, v)
    return worst <= tol, worst, witness


def lift_from_pseudoinverse(system_or_action, f: SystemFunction | None = None) -> LiftFunction:
    """``Lambda(xi, v) = dphi_xi^+ f(xi, v)`` with the minimum-norm right inverse."""
    if f is None:
        action, f = system_or_action.action, system_or_action.f
    else:
        action = system_or_action
    return LiftFunction(
        action.group,
        lambda xi, v: pseudo_right_inverse(action, xi, f.fn(xi, v)),
        name="pseudoinverse",
    )


def check_lift(action: GroupAction, f: SystemFunction, lift, xi, v) -> float:
    """``|dphi_xi Lambda(xi, v) - f(xi, v)|``."""
    return float(np.abs(d_group_at_identity(action, xi, lift(xi, v)) - f.fn(xi, v)).max())


def check_equivariant_lift(action: GroupAction, psi, lift, x, xi, v) -> float:
    """``|Ad_{X^-1} Lambda(xi, v) - Lambda(phi_X xi, psi_X v)|`` in coordinates."""
    g = action.group
    lhs = g.adjoint_coords(g.inverse_matrix(x), lift(xi, v))
    rhs = lift(action.apply(x, xi), psi(x, v))
    return float(np.abs(lhs - rhs).max())


def check_origin_lift(action: GroupAction, f: SystemFunction, origin_lift: OriginLift, v) -> float:
    """Projection residual of the origin lift at its origin."""
    xi0 = origin_lift.origin
    return float(np.abs(d_group_at_identity(action, xi0, origin_lift(v)) - f.fn(xi0, v)).max())


def check_stabilizer_compatibility(origin_lift: OriginLift, system, rng, n: int = 50,
                                   inputs=None) -> tuple[float, tuple | None]:
    """Max of ``|Ad_{S^-1} L(v) - L(psi_S v)|`` over sampled stabilizer ``S`` and inputs."""
    rng = as_rng(rng)
    g = system.action.group
    stab = stabilizer_sample(system.action, origin_lift.origin, rng, n)
    if inputs is None:
        inputs = list(np.eye(system.f.input_dim)) + [rng.normal(size=system.f.input_dim)
                                                    for _ in range(3)]
    worst, witness = 0.0, None
    for s in stab:
        for v in inputs:
            r = np.abs(g.adjoint_coords(g.inverse_matrix(s), origin_lift(v))
                       - origin_lift(system.psi(s, v))).max()
            if r > worst:
                worst, witness = float(r), (s, np.asarray(v))
    return worst, witness


def build_equivariant_lift(origin_lift: OriginLift, system, rng=0, n_check: int = 10,
                           section: Callable | None = None) -> LiftFunction:
    """Extend an origin lift to the whole manifold.

    ``Lambda(xi, v) = Ad_{X^-1} L(psi_{X^-1} v)`` for any ``X`` with
    ``phi_X(origin) = xi``, taken from the system's registered section.  The
    origin lift is screened for stabilizer compatibility first; a violation
    rejects the construction with the witness attached.
    """
    act = system.action
    g = act.group
    section = section or act.section_fn
    if section is None:
        raise UsageError("build_equivariant_lift needs a section of the action")
    xi0 = np.asarray(origin_lift.origin, dtype=float)
    resid, witness = check_stabilizer_compatibility(origin_lift, system, rng, n_check)
    if resid > COMPAT_REJECT_TOL:
        raise StabilizerCompatibilityError(
            f"origin lift is not stabilizer compatible (residual {resid:.3e})",
            witness=witness, residual=resid)

    def fn(xi, v):
        x = section(xi0, xi)
        xinv = g.inverse_matrix(x)
        return g.adjoint_coords(xinv, origin_lift(system.psi(xinv, v)))

    return LiftFunction(g, fn, name="origin-extended")


def lift_two_section_residual(lift_origin: OriginLift, system, xi, v, s) -> float:
    """Compare the origin extension at ``xi`` through sections ``X`` and ``S X``."""
    g = system.action.group
    xi0 = np.asarray(lift_origin.origin, dtype=float)
    x = system.action.section_fn(xi0, xi)

    def through(y):
        yinv = g.inverse_matrix(y)
        return g.adjoint_coords(yinv, lift_origin(system.psi(yinv, v)))

    return float(np.abs(through(x) - through(s @ x)).max())


def construct_origin_lift(system, rng=0, orbit_samples: int = 16) -> OriginLift:
    """Finite version of the orbit-by-orbit lift construction.

    Walk a basis of the input space.  For each basis vector outside the span
    covered so far, pick the minimum-norm lift at the origin, then push it
    along the stabilizer orbit with ``psi_S(v) -> Ad_{S^-1} L(v)``.  Stop once
    the collected inputs span the input space and fit the linear map.  The fit
    must reproduce every collected pair; otherwise the orbit extension was not
    linear and the construction is rejected.
    """
    rng = as_rng(rng)
    act, f = system.action, system.f
    g = act.group
    xi0 = np.asarray(system.origin, dtype=float)
    m = f.input_dim
    inputs, images = [], []
    stab = stabilizer_sample(act, xi0, rng, orbit_samples)
    for v in np.eye(m):
        if inputs and np.linalg.matrix_rank(np.array(inputs + [v]), tol=1e-9) == \
                np.linalg.matrix_rank(np.array(inputs), tol=1e-9):
            continue
        lv = pseudo_right_inverse(act, xi0, f.fn(xi0, v))
        for s in [g.identity_matrix] + list(stab):
            inputs.append(system.psi(s, v))
            images.append(g.adjoint_coords(g.inverse_matrix(s), lv))
        if np.linalg.matrix_rank(np.array(inputs), tol=1e-9) == m:
            break
    a = np.array(inputs)
    b = np.array(images)
    sol, *_ = np.linalg.lstsq(a, b, rcond=None)
    resid = float(np.abs(a @ sol - b).max()) if len(a) else 0.0
    if resid > COMPAT_REJECT_TOL:
        raise StabilizerCompatibilityError(
            f"stabilizer orbit extension is not linear (fit residual {resid:.3e})",
            residual=resid)
    mat = sol.T.copy()
    return OriginLift(xi0, lambda v: mat @ np.asarray(v, dtype=float))
