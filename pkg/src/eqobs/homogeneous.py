"""Right group actions on embedded manifolds and their differentials.

Manifold points and tangent vectors are plain arrays in a fixed ambient
embedding: unit 3-vectors for the sphere, square matrices for torsors.  Group
elements may be passed either as :class:`~eqobs.lie.GroupElement` or as raw
matrices.

Each :class:`GroupAction` can carry closed-form differentials; when it does
they are authoritative, and the central-difference versions (``method="fd"``)
exist as independent checks.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np

from .errors import TransitivityError, UnsupportedError, UsageError
from .lie import GroupElement, MatrixLieGroup, as_rng

FD_STEP = 1e-6
RANK_TOL = 1e-10

Method = Literal["analytic", "fd"]


@dataclass(frozen=True)
class Manifold:
    """An embedded manifold.

    ``curve(xi, eta, t)`` must stay on the manifold and have velocity ``eta``
    at ``t = 0``; it is what the finite-difference differentials walk along.
    """

    name: str
    shape: tuple
    dim: int
    constraint_residual: Callable[[np.ndarray], float]
    tangency_residual: Callable[[np.ndarray, np.ndarray], float]
    tangent_basis: Callable[[np.ndarray], np.ndarray]
    curve: Callable[[np.ndarray, np.ndarray, float], np.ndarray]
    distance: Callable[[np.ndarray, np.ndarray], float]
    random_point: Callable[[np.random.Generator], np.ndarray]

    @property
    def ambient_size(self) -> int:
        return int(np.prod(self.shape))

    def random_tangent(self, xi, rng, scale=1.0) -> np.ndarray:
        basis = self.tangent_basis(xi)
        c = as_rng(rng).uniform(-scale, scale, basis.shape[0])
        return np.tensordot(c, basis, axes=1)

    def project_tangent(self, xi, eta) -> np.ndarray:
        basis = self.tangent_basis(xi).reshape(self.dim, -1)
        return (basis.T @ (basis @ np.ravel(eta))).reshape(self.shape)


def _sphere_basis(xi):
    xi = np.asarray(xi, dtype=float)
    # complete xi to an orthonormal frame; the last two columns span the tangent plane
    q, _ = np.linalg.qr(np.column_stack([xi, np.eye(3)]))
    return q[:, 1:3].T.copy()


def _sphere_curve(xi, eta, t):
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    n = np.linalg.norm(eta)
    if n == 0.0:
        return xi.copy()
    return np.cos(t * n) * xi + np.sin(t * n) * (eta / n)


def _sphere_random(rng):
    p = as_rng(rng).normal(size=3)
    return p / np.linalg.norm(p)


def _sphere_distance(a, b):
    return float(np.arctan2(np.linalg.norm(np.cross(a, b)), np.dot(a, b)))


SPHERE = Manifold(
    name="S2",
    shape=(3,),
    dim=2,
    constraint_residual=lambda xi: abs(np.linalg.norm(xi) - 1.0),
    tangency_residual=lambda xi, eta: abs(float(np.dot(xi, eta))),
    tangent_basis=_sphere_basis,
    curve=_sphere_curve,
    distance=_sphere_distance,
    random_point=_sphere_random,
)


def torsor_manifold(group: MatrixLieGroup) -> Manifold:
    """The group itself viewed as a manifold, embedded as its matrices."""
    n = group.matrix_size

    def basis(xi):
        vecs = np.einsum("ij,njk->nik", xi, group.basis).reshape(group.dim, -1)
        q, _ = np.linalg.qr(vecs.T)
        return q.T.reshape(group.dim, n, n)

    def tangency(xi, eta):
        # xi^-1 eta must be an algebra element
        m = group.inverse_matrix(xi) @ eta
        back = group.hat(group.vee(m, tol=None))
        return float(np.abs(back - m).max())

    def curve(xi, eta, t):
        u = group.vee(group.inverse_matrix(xi) @ eta, tol=None)
        return xi @ group.exp_coords(t * u)

    def distance(a, b):
        return float(np.linalg.norm(group.log_coords(group.inverse_matrix(a) @ b)))

    return Manifold(
        name=f"torsor({group.name})",
        shape=(n, n),
        dim=group.dim,
        constraint_residual=group.membership_residual,
        tangency_residual=tangency,
        tangent_basis=basis,
        curve=curve,
        distance=distance,
        random_point=group.random_matrix,
    )


def _matrix(x) -> np.ndarray:
    return x.matrix if isinstance(x, GroupElement) else np.asarray(x, dtype=float)


@dataclass(frozen=True)
class GroupAction:
    """A right action ``phi(A, phi(B, x)) == phi(BA, x)`` of ``group`` on ``manifold``.

    Optional members:

    ``d_state_fn(X, xi, eta)``
        differential of ``xi -> phi(X, xi)``.
    ``d_origin_fn(xi, u)``
        differential of ``X -> phi(X, xi)`` at the identity, ``u`` in algebra coordinates.
    ``stabilizer_fn(xi, rng)``
        one random element of the stabilizer of ``xi``.
    ``section_fn(origin, xi)``
        some ``X`` with ``phi(X, origin) == xi``.
    """

    group: MatrixLieGroup
    manifold: Manifold
    apply: Callable[[np.ndarray, np.ndarray], np.ndarray]
    d_state_fn: Callable | None = None
    d_origin_fn: Callable | None = None
    stabilizer_fn: Callable | None = None
    section_fn: Callable | None = None
    free: bool = False

    def __call__(self, x, xi):
        return self.apply(_matrix(x), np.asarray(xi, dtype=float))


def _check_group(action: GroupAction, x):
    if isinstance(x, GroupElement) and x.group is not action.group:
        raise UsageError(
            f"action of {action.group.name} cannot take a {x.group.name} element")


def act(action: GroupAction, x, xi) -> np.ndarray:
    _check_group(action, x)
    xi = np.asarray(xi, dtype=float)
    if xi.shape != action.manifold.shape:
        raise UsageError(f"point of shape {xi.shape} is not on {action.manifold.name}")
    return action.apply(_matrix(x), xi)


def d_state(action: GroupAction, x, xi, eta, method: Method = "analytic") -> np.ndarray:
    """Tangent map of ``phi_X`` at ``xi`` applied to ``eta``; based at ``phi_X(xi)``."""
    _check_group(action, x)
    x = _matrix(x)
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    if method == "analytic" and action.d_state_fn is not None:
        return action.d_state_fn(x, xi, eta)
    curve = action.manifold.curve
    h = FD_STEP
    fwd = action.apply(x, curve(xi, eta, h))
    bwd = action.apply(x, curve(xi, eta, -h))
    return (fwd - bwd) / (2 * h)


def d_group_at_identity(action: GroupAction, xi, u, method: Method = "analytic") -> np.ndarray:
    """``d/dt phi(exp(t u), xi)`` at ``t = 0``."""
    xi = np.asarray(xi, dtype=float)
    coords = u.coords if hasattr(u, "coords") else np.asarray(u, dtype=float)
    if method == "analytic" and action.d_origin_fn is not None:
        return action.d_origin_fn(xi, coords)
    g = action.group
    h = FD_STEP
    fwd = action.apply(g.exp_coords(h * coords), xi)
    bwd = action.apply(g.exp_coords(-h * coords), xi)
    return (fwd - bwd) / (2 * h)


def d_group_matrix(action: GroupAction, xi, method: Method = "analytic") -> np.ndarray:
    """Ambient Jacobian of the infinitesimal action at ``xi``, one column per basis vector."""
    cols = [np.ravel(d_group_at_identity(action, xi, e, method))
            for e in np.eye(action.group.dim)]
    return np.column_stack(cols)


def check_commutation(action: GroupAction, origin, x, u, method: Method = "analytic") -> float:
    """Residual of ``dphi_X dphi_origin u == dphi_{phi_X(origin)} Ad_{X^-1} u``."""
    x = _matrix(x)
    g = action.group
    coords = u.coords if hasattr(u, "coords") else np.asarray(u, dtype=float)
    lhs = d_state(action, x, origin, d_group_at_identity(action, origin, coords, method), method)
    moved = action.apply(x, np.asarray(origin, dtype=float))
    rhs = d_group_at_identity(action, moved, g.adjoint_coords(g.inverse_matrix(x), coords), method)
    return float(np.abs(lhs - rhs).max())


def check_action_axioms(action: GroupAction, a, b, xi) -> float:
    """Max residual of the right-action law and the identity law."""
    a, b = _matrix(a), _matrix(b)
    xi = np.asarray(xi, dtype=float)
    composed = np.abs(action.apply(a, action.apply(b, xi)) - action.apply(b @ a, xi)).max()
    ident = np.abs(action.apply(action.group.identity_matrix, xi) - xi).max()
    return float(max(composed, ident))


def stabilizer_sample(action: GroupAction, xi, rng, n: int) -> list[np.ndarray]:
    """Random elements fixing ``xi``; a free action yields only the identity."""
    if action.free:
        return [action.group.identity_matrix.copy()]
    if action.stabilizer_fn is None:
        raise UnsupportedError(f"no stabilizer parameterization for {action.manifold.name}")
    rng = as_rng(rng)
    xi = np.asarray(xi, dtype=float)
    return [action.stabilizer_fn(xi, rng) for _ in range(n)]


def infinitesimal_rank(action: GroupAction, xi) -> tuple[int, np.ndarray]:
    """Numerical rank and singular values of the infinitesimal action on ``T_xi M``."""
    jt = _tangent_jacobian(action, xi)
    s = np.linalg.svd(jt, compute_uv=False)
    return int(np.sum(s > RANK_TOL * max(1.0, s[0]))), s


def _tangent_jacobian(action, xi):
    m = action.manifold
    basis = m.tangent_basis(np.asarray(xi, dtype=float)).reshape(m.dim, -1)
    return basis @ d_group_matrix(action, xi)


def pseudo_right_inverse(action: GroupAction, xi, eta) -> np.ndarray:
    """Minimum-norm ``u`` (algebra coordinates) with ``dphi_xi(u) == eta``."""
    m = action.manifold
    xi = np.asarray(xi, dtype=float)
    basis = m.tangent_basis(xi).reshape(m.dim, -1)
    jt = basis @ d_group_matrix(action, xi)
    s = np.linalg.svd(jt, compute_uv=False)
    if s[-1] <= RANK_TOL * max(1.0, s[0]) or len(s) < m.dim:
        raise TransitivityError(
            f"infinitesimal action at {np.ravel(xi)} has rank below {m.dim}")
    return np.linalg.pinv(jt) @ (basis @ np.ravel(eta))
