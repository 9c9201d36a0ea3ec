"""Linear system functions, velocity outputs and configuration outputs.

A system function is evaluated pointwise, ``f(xi, v)`` returning an ambient
tangent vector at ``xi``; velocity outputs map ``(xi, eta)`` to the measured
input vector.  Neither is ever represented symbolically, so structural
properties (kernels, completeness) are found numerically from samples.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import UsageError
from .homogeneous import Manifold

COMPLETENESS_TOL = 1e-8
KERNEL_TOL = 1e-9


@dataclass(frozen=True)
class SystemFunction:
    manifold: Manifold
    input_dim: int
    fn: Callable[[np.ndarray, np.ndarray], np.ndarray]

    def __call__(self, xi, v):
        return self.fn(xi, v)

    def field(self, v) -> Callable[[np.ndarray], np.ndarray]:
        """The vector field ``f_v``."""
        v = np.asarray(v, dtype=float)
        return lambda xi: self.fn(xi, v)


@dataclass(frozen=True)
class VelocityOutput:
    manifold: Manifold
    output_dim: int
    fn: Callable[[np.ndarray, np.ndarray], np.ndarray]

    def __call__(self, xi, eta):
        return self.fn(xi, eta)


@dataclass(frozen=True)
class ConfigurationOutput:
    """``h: M -> N``; ``constraint`` measures how far a value is from ``N``."""

    manifold: Manifold
    output_shape: tuple
    fn: Callable[[np.ndarray], np.ndarray]
    constraint: Callable[[np.ndarray], float] | None = None

    def __call__(self, xi):
        return self.fn(xi)


def eval_system(f: SystemFunction, xi, v) -> np.ndarray:
    xi = np.asarray(xi, dtype=float)
    v = np.asarray(v, dtype=float)
    if v.shape != (f.input_dim,):
        raise UsageError(f"input has shape {v.shape}, system expects ({f.input_dim},)")
    if xi.shape != f.manifold.shape:
        raise UsageError(f"state has shape {xi.shape}, {f.manifold.name} expects {f.manifold.shape}")
    return f.fn(xi, v)


def system_matrix(f: SystemFunction, xi) -> np.ndarray:
    """Ambient matrix of ``v -> f(xi, v)``."""
    xi = np.asarray(xi, dtype=float)
    return np.column_stack([np.ravel(f.fn(xi, e)) for e in np.eye(f.input_dim)])


def check_linearity(f: SystemFunction, xi, v, w, a: float, b: float) -> float:
    lhs = f.fn(xi, a * np.asarray(v) + b * np.asarray(w))
    rhs = a * f.fn(xi, v) + b * f.fn(xi, w)
    return float(np.abs(lhs - rhs).max())


def check_compatibility(f: SystemFunction, g: VelocityOutput, xi, eta) -> float:
    """``|f(xi, g(eta)) - eta|``."""
    eta = np.asarray(eta, dtype=float)
    return float(np.abs(f.fn(xi, g.fn(xi, eta)) - eta).max())


def check_completeness(g: VelocityOutput, xi, tol: float = COMPLETENESS_TOL) -> tuple[bool, float]:
    """Is ``g`` injective on ``T_xi M``?  Returns the verdict and the smallest singular value."""
    basis = g.manifold.tangent_basis(np.asarray(xi, dtype=float))
    jac = np.column_stack([g.fn(xi, b) for b in basis])
    s = np.linalg.svd(jac, compute_uv=False)
    sigma_min = float(s[-1]) if len(s) == g.manifold.dim else 0.0
    return sigma_min > tol, sigma_min


def compute_kernel(f: SystemFunction, sample_points: Sequence[np.ndarray]) -> np.ndarray:
    """Orthonormal basis (columns) of the inputs that vanish at every sample point."""
    need = 3 * f.manifold.dim
    if len(sample_points) < need:
        raise UsageError(f"compute_kernel needs at least {need} sample points, got {len(sample_points)}")
    stacked = np.vstack([system_matrix(f, xi) for xi in sample_points])
    _, s, vt = np.linalg.svd(stacked)
    scale = max(1.0, s[0]) if len(s) else 1.0
    rank = int(np.sum(s > KERNEL_TOL * scale))
    return vt[rank:].T.copy()


def reduce_system(f: SystemFunction, g: VelocityOutput | None, kernel: np.ndarray):
    """Quotient out ``kernel``: inputs become coordinates on its orthogonal complement.

    Returns ``(f_bar, g_bar, q)`` where the columns of ``q`` span the
    complement; ``f_bar(xi, w) = f(xi, q w)`` and ``g_bar = q^T g``.
    """
    m = f.input_dim
    if kernel.size == 0:
        q = np.eye(m)
    else:
        full, _ = np.linalg.qr(np.column_stack([kernel, np.eye(m)]))
        q = full[:, kernel.shape[1]:m]
    f_bar = SystemFunction(f.manifold, q.shape[1], lambda xi, w: f.fn(xi, q @ w))
    g_bar = None
    if g is not None:
        g_bar = VelocityOutput(g.manifold, q.shape[1], lambda xi, eta: q.T @ g.fn(xi, eta))
    return f_bar, g_bar, q


def make_affine_system(manifold: Manifold, fields: Sequence[Callable]) -> SystemFunction:
    """``f_u(xi) = sum_j fields[j](xi) u_j``; ``fields[0]`` is the drift, driven by ``u_0 = 1``."""
    fields = list(fields)

    def fn(xi, u):
        out = np.zeros(manifold.shape)
        for fj, uj in zip(fields, u):
            if uj != 0.0:
                out = out + fj(xi) * uj
        return out

    return SystemFunction(manifold, len(fields), fn)


def eval_configuration_output(h: ConfigurationOutput, xi) -> np.ndarray:
    return h.fn(np.asarray(xi, dtype=float))
