"""Hot numeric kernels: closed-form SO(3)/SE(3) exp/log, series expm/logm,
polar projection, and batched SO(3) maps.

Every function here is written in the numpy subset numba understands, so the
same source serves both the compiled and the fallback path (see ``_accel``).
Inputs must be contiguous float64 arrays; the wrappers in ``lie`` take care of
that.  No kernel raises on domain problems; the callers check the returned
angles/flags and raise the library exceptions.
"""

import math

import numpy as np

from ._accel import jit

SMALL_ANGLE = 1e-5


@jit
def so3_hat(w):
    m = np.zeros((3, 3))
    m[0, 1] = -w[2]
    m[0, 2] = w[1]
    m[1, 0] = w[2]
    m[1, 2] = -w[0]
    m[2, 0] = -w[1]
    m[2, 1] = w[0]
    return m


@jit
def _so3_coeffs(theta):
    # A = sin(t)/t, B = (1 - cos t)/t^2, C = (t - sin t)/t^3
    t2 = theta * theta
    if theta < SMALL_ANGLE:
        a = 1.0 - t2 / 6.0
        b = 0.5 - t2 / 24.0
        c = 1.0 / 6.0 - t2 / 120.0
    else:
        s = math.sin(theta)
        h = math.sin(0.5 * theta)
        a = s / theta
        b = 2.0 * h * h / t2
        c = (theta - s) / (t2 * theta)
    return a, b, c


@jit
def so3_exp(w):
    theta = math.sqrt(w[0] * w[0] + w[1] * w[1] + w[2] * w[2])
    a, b, _ = _so3_coeffs(theta)
    k = so3_hat(w)
    return np.eye(3) + a * k + b * (k @ k)


@jit
def so3_log(r):
    """Return ``(w, theta)`` with ``exp(hat(w)) == r`` and ``theta = |w|``."""
    sx = 0.5 * (r[2, 1] - r[1, 2])
    sy = 0.5 * (r[0, 2] - r[2, 0])
    sz = 0.5 * (r[1, 0] - r[0, 1])
    s = math.sqrt(sx * sx + sy * sy + sz * sz)
    c = 0.5 * (r[0, 0] + r[1, 1] + r[2, 2] - 1.0)
    theta = math.atan2(s, c)
    w = np.empty(3)
    if theta < SMALL_ANGLE:
        f = 1.0 + theta * theta / 6.0
        w[0] = f * sx
        w[1] = f * sy
        w[2] = f * sz
    elif theta < 2.5:
        f = theta / s
        w[0] = f * sx
        w[1] = f * sy
        w[2] = f * sz
    else:
        # near pi the skew part is tiny; read the axis off the symmetric part
        # (r + r^T)/2 - c I = (1 - c) n n^T
        d = 1.0 - c
        diag = np.array([r[0, 0] - c, r[1, 1] - c, r[2, 2] - c])
        i = int(np.argmax(diag))
        n = np.empty(3)
        for j in range(3):
            n[j] = 0.5 * (r[i, j] + r[j, i]) / d
        if i == 0:
            n[0] = diag[0] / d
        elif i == 1:
            n[1] = diag[1] / d
        else:
            n[2] = diag[2] / d
        n = n / math.sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2])
        if n[0] * sx + n[1] * sy + n[2] * sz < 0.0:
            n = -n
        w[0] = theta * n[0]
        w[1] = theta * n[1]
        w[2] = theta * n[2]
    return w, theta


@jit
def se3_exp(xi):
    """``xi = (omega, rho)``; rotation coordinates first."""
    w = xi[0:3].copy()
    rho = xi[3:6].copy()
    theta = math.sqrt(w[0] * w[0] + w[1] * w[1] + w[2] * w[2])
    a, b, c = _so3_coeffs(theta)
    k = so3_hat(w)
    k2 = k @ k
    out = np.eye(4)
    out[0:3, 0:3] = np.eye(3) + a * k + b * k2
    v = np.eye(3) + b * k + c * k2
    out[0:3, 3] = v @ rho
    return out


@jit
def se3_log(t):
    """Return ``(xi, theta)`` with ``xi = (omega, rho)``."""
    r = t[0:3, 0:3].copy()
    p = t[0:3, 3].copy()
    w, theta = so3_log(r)
    k = so3_hat(w)
    t2 = theta * theta
    if theta < SMALL_ANGLE:
        d = 1.0 / 12.0 + t2 / 720.0
    else:
        a, b, _ = _so3_coeffs(theta)
        d = (1.0 - a / (2.0 * b)) / t2
    vinv = np.eye(3) - 0.5 * k + d * (k @ k)
    xi = np.empty(6)
    xi[0:3] = w
    xi[3:6] = vinv @ p
    return xi, theta


@jit
def expm_taylor(a, order=12):
    """Scaling and squaring with a plain Taylor polynomial of ``order``."""
    n = a.shape[0]
    norm = np.max(np.sum(np.abs(a), axis=0))
    s = 0
    if norm > 0.5:
        s = int(math.ceil(math.log2(norm / 0.5)))
    x = a / (2.0 ** s)
    out = np.eye(n)
    term = np.eye(n)
    for k in range(1, order + 1):
        term = term @ x / k
        out = out + term
    for _ in range(s):
        out = out @ out
    return out


@jit
def _sqrtm_db(a):
    # Denman-Beavers iteration
    n = a.shape[0]
    y = a.copy()
    z = np.eye(n)
    for _ in range(100):
        yi = np.linalg.inv(y)
        zi = np.linalg.inv(z)
        y_next = 0.5 * (y + zi)
        z = 0.5 * (z + yi)
        delta = np.max(np.abs(y_next - y))
        y = y_next
        if delta < 1e-15:
            break
    return y


@jit
def logm_iss(a):
    """Principal log by inverse scaling and squaring, Mercator series tail.

    Caller guarantees no eigenvalue on the closed negative real axis.
    """
    n = a.shape[0]
    x = a.copy()
    s = 0
    while np.max(np.sum(np.abs(x - np.eye(n)), axis=0)) > 0.02 and s < 60:
        x = _sqrtm_db(x)
        s += 1
    d = x - np.eye(n)
    out = np.zeros((n, n))
    term = np.eye(n)
    for k in range(1, 17):
        term = term @ d
        if k % 2 == 1:
            out = out + term / k
        else:
            out = out - term / k
    return out * (2.0 ** s)


@jit
def polar_project(m):
    """Nearest rotation (Frobenius norm) to ``m``, determinant +1."""
    u, _, vt = np.linalg.svd(m)
    r = u @ vt
    if np.linalg.det(r) < 0.0:
        u[:, -1] = -u[:, -1]
        r = u @ vt
    return r


@jit
def so3_exp_batch(ws):
    n = ws.shape[0]
    out = np.empty((n, 3, 3))
    for i in range(n):
        out[i] = so3_exp(ws[i])
    return out


@jit
def so3_log_batch(rs):
    n = rs.shape[0]
    out = np.empty((n, 3))
    for i in range(n):
        w, _ = so3_log(rs[i])
        out[i] = w
    return out


@jit
def so3_compose_batch(a, b):
    n = a.shape[0]
    out = np.empty((n, 3, 3))
    for i in range(n):
        out[i] = a[i] @ b[i]
    return out
