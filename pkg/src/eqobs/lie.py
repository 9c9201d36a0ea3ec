"""Matrix Lie groups and their algebras.

A :class:`MatrixLieGroup` is the group descriptor: a name, a basis of the Lie
algebra as square matrices, and the exp/log/membership machinery.  Concrete
groups are :data:`SO3`, :data:`SE3`, :data:`SL3` and block-diagonal
:class:`ProductGroup` instances.

Descriptors work on raw ``ndarray`` values (matrices and coordinate vectors) so
the integrators and catalog systems stay cheap.  :class:`GroupElement` and
:class:`AlgebraElement` wrap those arrays with their descriptor for the public,
checked API (:func:`compose`, :func:`exp`, :func:`adjoint`, ...).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Literal, Sequence

import numpy as np

from . import kernels
from .errors import AlgebraConsistencyError, BranchCutError, GroupMismatchError

BRANCH_MARGIN = 1e-6
ALGEBRA_TOL = 1e-9


def as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


class MatrixLieGroup:
    """Descriptor of a matrix Lie group with a fixed algebra basis."""

    name: str
    matrix_size: int

    def __init__(self, name: str, basis: Sequence[np.ndarray]):
        basis = np.asarray(basis, dtype=float)
        self.name = name
        self.basis = basis
        self.dim = basis.shape[0]
        self.matrix_size = basis.shape[1]
        flat = basis.reshape(self.dim, -1).T
        if np.linalg.matrix_rank(flat, tol=1e-12) != self.dim:
            raise ValueError(f"{name}: algebra basis is linearly dependent")
        self._flat = flat
        self._proj = np.linalg.pinv(flat)

    def __repr__(self):
        return f"<{type(self).__name__} {self.name}>"

    # -- algebra -------------------------------------------------------------

    def hat(self, coords) -> np.ndarray:
        return np.tensordot(np.asarray(coords, dtype=float), self.basis, axes=1)

    def vee(self, m, tol: float | None = ALGEBRA_TOL) -> np.ndarray:
        """Basis coordinates of ``m``; raise if ``m`` is not in the algebra."""
        m = np.asarray(m, dtype=float)
        coords = self._proj @ m.reshape(-1)
        if tol is not None:
            resid = np.abs(self._flat @ coords - m.reshape(-1)).max()
            if resid > tol * max(1.0, np.abs(m).max()):
                raise AlgebraConsistencyError(
                    f"{self.name}: matrix leaves the algebra span (residual {resid:.3e})")
        return coords

    def bracket(self, u, v) -> np.ndarray:
        a, b = self.hat(u), self.hat(v)
        return self.vee(a @ b - b @ a)

    def structure_residual(self) -> float:
        """Largest distance of a basis commutator from the basis span."""
        worst = 0.0
        for i in range(self.dim):
            for j in range(i + 1, self.dim):
                c = self.basis[i] @ self.basis[j] - self.basis[j] @ self.basis[i]
                back = self._flat @ (self._proj @ c.reshape(-1))
                worst = max(worst, np.abs(back - c.reshape(-1)).max())
        return worst

    # -- group ---------------------------------------------------------------

    @cached_property
    def identity_matrix(self) -> np.ndarray:
        return np.eye(self.matrix_size)

    def inverse_matrix(self, x) -> np.ndarray:
        return np.linalg.inv(x)

    def exp_coords(self, u) -> np.ndarray:
        return kernels.expm_taylor(np.ascontiguousarray(self.hat(u)))

    def log_coords(self, x) -> np.ndarray:
        x = np.ascontiguousarray(x, dtype=float)
        eig = np.linalg.eigvals(x)
        if np.any(np.abs(np.angle(eig)) > np.pi - BRANCH_MARGIN):
            raise BranchCutError(f"{self.name}: eigenvalue on the negative real axis")
        return self.vee(kernels.logm_iss(x), tol=1e-8)

    def adjoint_coords(self, x, u) -> np.ndarray:
        return self.vee(x @ self.hat(u) @ self.inverse_matrix(x))

    def adjoint_matrix(self, x) -> np.ndarray:
        """Matrix of ``u -> Ad_x u`` in basis coordinates."""
        xinv = self.inverse_matrix(x)
        conj = np.einsum("ij,njk,kl->nil", x, self.basis, xinv)
        return self._proj @ conj.reshape(self.dim, -1).T

    def membership_residual(self, x) -> float:
        raise NotImplementedError

    def renormalize(self, x) -> np.ndarray:
        return np.asarray(x, dtype=float)

    def random_matrix(self, rng) -> np.ndarray:
        return self.exp_coords(as_rng(rng).uniform(-1.0, 1.0, self.dim))


def _so3_basis():
    return [kernels.so3_hat(e) for e in np.eye(3)]


class SO3Group(MatrixLieGroup):
    def __init__(self):
        super().__init__("SO3", _so3_basis())

    def hat(self, coords):
        return kernels.so3_hat(np.asarray(coords, dtype=float))

    def vee(self, m, tol=ALGEBRA_TOL):
        m = np.asarray(m, dtype=float)
        if tol is not None:
            sym = np.abs(m + m.T).max()
            if sym > 2 * tol * max(1.0, np.abs(m).max()):
                raise AlgebraConsistencyError(f"SO3: matrix not skew (residual {sym:.3e})")
        return 0.5 * np.array([m[2, 1] - m[1, 2], m[0, 2] - m[2, 0], m[1, 0] - m[0, 1]])

    def bracket(self, u, v):
        return np.cross(u, v)

    def inverse_matrix(self, x):
        return np.asarray(x).T.copy()

    def exp_coords(self, u):
        return kernels.so3_exp(np.ascontiguousarray(u, dtype=float))

    def log_coords(self, x):
        w, theta = kernels.so3_log(np.ascontiguousarray(x, dtype=float))
        if theta > np.pi - BRANCH_MARGIN:
            raise BranchCutError(f"SO3: rotation angle {theta:.9f} at the branch cut")
        return w

    def adjoint_coords(self, x, u):
        return np.asarray(x) @ np.asarray(u, dtype=float)

    def adjoint_matrix(self, x):
        return np.array(x, dtype=float)

    def membership_residual(self, x):
        x = np.asarray(x)
        resid = np.abs(x.T @ x - np.eye(3)).max()
        if np.linalg.det(x) <= 0:
            return np.inf
        return resid

    def renormalize(self, x):
        return kernels.polar_project(np.ascontiguousarray(x, dtype=float))

    def random_matrix(self, rng):
        # uniform (Haar) rotation from a normalized Gaussian quaternion
        q = as_rng(rng).normal(size=4)
        q /= np.linalg.norm(q)
        w, x, y, z = q
        return np.array([
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ])


def _se3_basis():
    basis = []
    for e in np.eye(3):
        b = np.zeros((4, 4))
        b[:3, :3] = kernels.so3_hat(e)
        basis.append(b)
    for e in np.eye(3):
        b = np.zeros((4, 4))
        b[:3, 3] = e
        basis.append(b)
    return basis


class SE3Group(MatrixLieGroup):
    """Rigid motions; algebra coordinates ordered ``(omega, rho)``."""

    def __init__(self):
        super().__init__("SE3", _se3_basis())

    def hat(self, coords):
        c = np.asarray(coords, dtype=float)
        m = np.zeros((4, 4))
        m[:3, :3] = kernels.so3_hat(c[:3])
        m[:3, 3] = c[3:]
        return m

    def inverse_matrix(self, x):
        x = np.asarray(x)
        out = np.eye(4)
        out[:3, :3] = x[:3, :3].T
        out[:3, 3] = -x[:3, :3].T @ x[:3, 3]
        return out

    def exp_coords(self, u):
        return kernels.se3_exp(np.ascontiguousarray(u, dtype=float))

    def log_coords(self, x):
        xi, theta = kernels.se3_log(np.ascontiguousarray(x, dtype=float))
        if theta > np.pi - BRANCH_MARGIN:
            raise BranchCutError(f"SE3: rotation angle {theta:.9f} at the branch cut")
        return xi

    def adjoint_coords(self, x, u):
        x = np.asarray(x)
        u = np.asarray(u, dtype=float)
        r, p = x[:3, :3], x[:3, 3]
        w = r @ u[:3]
        return np.concatenate([w, np.cross(p, w) + r @ u[3:]])

    def adjoint_matrix(self, x):
        x = np.asarray(x)
        r, p = x[:3, :3], x[:3, 3]
        out = np.zeros((6, 6))
        out[:3, :3] = r
        out[3:, 3:] = r
        out[3:, :3] = kernels.so3_hat(np.ascontiguousarray(p)) @ r
        return out

    def membership_residual(self, x):
        x = np.asarray(x)
        r = x[:3, :3]
        if np.linalg.det(r) <= 0:
            return np.inf
        bottom = np.abs(x[3] - np.array([0.0, 0.0, 0.0, 1.0])).max()
        return max(np.abs(r.T @ r - np.eye(3)).max(), bottom)

    def renormalize(self, x):
        out = np.array(x, dtype=float)
        out[:3, :3] = kernels.polar_project(np.ascontiguousarray(out[:3, :3]))
        out[3] = (0.0, 0.0, 0.0, 1.0)
        return out

    def random_matrix(self, rng):
        rng = as_rng(rng)
        out = np.eye(4)
        out[:3, :3] = SO3.random_matrix(rng)
        out[:3, 3] = rng.normal(size=3)
        return out


def _sl3_basis():
    basis = []
    for i in range(3):
        for j in range(3):
            if i != j:
                b = np.zeros((3, 3))
                b[i, j] = 1.0
                basis.append(b)
    basis.append(np.diag([1.0, -1.0, 0.0]))
    basis.append(np.diag([0.0, 1.0, -1.0]))
    return basis


class SL3Group(MatrixLieGroup):
    """Unimodular 3x3 matrices; exp/log by series (no closed form)."""

    def __init__(self):
        super().__init__("SL3", _sl3_basis())

    def membership_residual(self, x):
        return abs(np.linalg.det(x) - 1.0)

    def renormalize(self, x):
        x = np.asarray(x, dtype=float)
        return x / np.cbrt(np.linalg.det(x))

    def random_matrix(self, rng):
        return self.exp_coords(as_rng(rng).uniform(-0.5, 0.5, self.dim))


class ProductGroup(MatrixLieGroup):
    """Direct product realized as block-diagonal matrices."""

    def __init__(self, *factors: MatrixLieGroup):
        self.factors = factors
        sizes = [g.matrix_size for g in factors]
        n = sum(sizes)
        self._blocks = np.cumsum([0] + sizes)
        self._slices = np.cumsum([0] + [g.dim for g in factors])
        basis = []
        for k, g in enumerate(factors):
            a = self._blocks[k]
            for b in g.basis:
                m = np.zeros((n, n))
                m[a:a + b.shape[0], a:a + b.shape[0]] = b
                basis.append(m)
        super().__init__("x".join(g.name for g in factors), basis)

    def split(self, x):
        b = self._blocks
        return [np.asarray(x)[b[k]:b[k + 1], b[k]:b[k + 1]] for k in range(len(self.factors))]

    def split_coords(self, u):
        s = self._slices
        u = np.asarray(u, dtype=float)
        return [u[s[k]:s[k + 1]] for k in range(len(self.factors))]

    def join(self, blocks):
        n = self._blocks[-1]
        out = np.zeros((n, n))
        for k, blk in enumerate(blocks):
            a, b = self._blocks[k], self._blocks[k + 1]
            out[a:b, a:b] = blk
        return out

    def _map(self, fname, x):
        return self.join([getattr(g, fname)(blk) for g, blk in zip(self.factors, self.split(x))])

    def hat(self, coords):
        return self.join([g.hat(c) for g, c in zip(self.factors, self.split_coords(coords))])

    def vee(self, m, tol=ALGEBRA_TOL):
        return np.concatenate([g.vee(blk, tol) for g, blk in zip(self.factors, self.split(m))])

    def inverse_matrix(self, x):
        return self._map("inverse_matrix", x)

    def exp_coords(self, u):
        return self.join([g.exp_coords(c) for g, c in zip(self.factors, self.split_coords(u))])

    def log_coords(self, x):
        return np.concatenate([g.log_coords(blk) for g, blk in zip(self.factors, self.split(x))])

    def adjoint_coords(self, x, u):
        parts = zip(self.factors, self.split(x), self.split_coords(u))
        return np.concatenate([g.adjoint_coords(blk, c) for g, blk, c in parts])

    def membership_residual(self, x):
        off = np.asarray(x) - self.join(self.split(x))
        own = max(g.membership_residual(blk) for g, blk in zip(self.factors, self.split(x)))
        return max(own, np.abs(off).max())

    def renormalize(self, x):
        return self._map("renormalize", x)

    def random_matrix(self, rng):
        rng = as_rng(rng)
        return self.join([g.random_matrix(rng) for g in self.factors])


SO3 = SO3Group()
SE3 = SE3Group()
SL3 = SL3Group()

GROUPS = {"SO3": SO3, "SE3": SE3, "SL3": SL3}


# -- checked value types --------------------------------------------------------


@dataclass(frozen=True, eq=False, slots=True)
class GroupElement:
    group: MatrixLieGroup
    matrix: np.ndarray

    def __matmul__(self, other):
        return compose(self, other)


@dataclass(frozen=True, eq=False, slots=True)
class AlgebraElement:
    group: MatrixLieGroup
    coords: np.ndarray

    @property
    def matrix(self) -> np.ndarray:
        return self.group.hat(self.coords)

    def __add__(self, other):
        _same(self, other)
        return AlgebraElement(self.group, self.coords + other.coords)

    def __sub__(self, other):
        _same(self, other)
        return AlgebraElement(self.group, self.coords - other.coords)

    def __mul__(self, scalar):
        return AlgebraElement(self.group, self.coords * float(scalar))

    __rmul__ = __mul__


def _same(a, b):
    if a.group is not b.group:
        raise GroupMismatchError(f"descriptor mismatch: {a.group.name} vs {b.group.name}")


def element(group: MatrixLieGroup, matrix) -> GroupElement:
    return GroupElement(group, np.array(matrix, dtype=float))


def algebra(group: MatrixLieGroup, coords) -> AlgebraElement:
    coords = np.array(coords, dtype=float).reshape(-1)
    if coords.shape != (group.dim,):
        raise GroupMismatchError(f"{group.name} algebra needs {group.dim} coordinates")
    return AlgebraElement(group, coords)


def hat(group: MatrixLieGroup, coords) -> AlgebraElement:
    return algebra(group, coords)


def vee(group: MatrixLieGroup, m) -> AlgebraElement:
    return AlgebraElement(group, group.vee(m))


def identity(group: MatrixLieGroup) -> GroupElement:
    return GroupElement(group, group.identity_matrix.copy())


def compose(a: GroupElement, b: GroupElement) -> GroupElement:
    _same(a, b)
    return GroupElement(a.group, a.matrix @ b.matrix)


def inverse(a: GroupElement) -> GroupElement:
    return GroupElement(a.group, a.group.inverse_matrix(a.matrix))


def exp(u: AlgebraElement) -> GroupElement:
    return GroupElement(u.group, u.group.exp_coords(u.coords))


def log(a: GroupElement) -> AlgebraElement:
    return AlgebraElement(a.group, a.group.log_coords(a.matrix))


def adjoint(x: GroupElement, u: AlgebraElement) -> AlgebraElement:
    _same(x, u)
    return AlgebraElement(x.group, x.group.adjoint_coords(x.matrix, u.coords))


def bracket(u: AlgebraElement, v: AlgebraElement) -> AlgebraElement:
    _same(u, v)
    return AlgebraElement(u.group, u.group.bracket(u.coords, v.coords))


def translate_tangent(side: Literal["left", "right"], a: GroupElement, w) -> np.ndarray:
    """Push an ambient tangent matrix ``w`` at ``B`` to ``AB`` (left) or ``BA`` (right)."""
    w = np.asarray(w, dtype=float)
    if side == "left":
        return a.matrix @ w
    if side == "right":
        return w @ a.matrix
    raise ValueError(f"side must be 'left' or 'right', not {side!r}")


def membership_residual(a: GroupElement) -> float:
    return a.group.membership_residual(a.matrix)


def random_element(group: MatrixLieGroup, rng) -> GroupElement:
    return GroupElement(group, group.random_matrix(as_rng(rng)))


def random_algebra(group: MatrixLieGroup, rng, scale: float = 1.0) -> AlgebraElement:
    return AlgebraElement(group, as_rng(rng).uniform(-scale, scale, group.dim))
