"""Kernels against scipy's matrix exponential/logarithm, in both code paths."""

import numpy as np
import pytest
from scipy.linalg import expm, logm

from eqobs import kernels

PATHS = ["compiled", "python"]


def _k(name, path):
    fn = getattr(kernels, name)
    return fn if path == "compiled" else fn.py_func


def _unit_angles(rng, n, max_angle=np.pi - 1e-6):
    d = rng.normal(size=(n, 3))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    return d * rng.uniform(0, max_angle, size=(n, 1))


@pytest.mark.parametrize("path", PATHS)
def test_so3_exp_matches_expm(path, rng):
    for w in _unit_angles(rng, 50):
        assert np.allclose(_k("so3_exp", path)(w), expm(kernels.so3_hat(w)), atol=1e-12)


@pytest.mark.parametrize("path", PATHS)
def test_so3_exp_small_angle_series(path):
    for s in (1e-3, 1e-6, 1e-9, 0.0):
        w = s * np.array([0.3, -0.5, 0.8])
        assert np.allclose(_k("so3_exp", path)(w), expm(kernels.so3_hat(w)), atol=1e-15)


@pytest.mark.parametrize("path", PATHS)
def test_so3_log_roundtrip_and_oracle(path, rng):
    log = _k("so3_log", path)
    for w in _unit_angles(rng, 50):
        r = kernels.so3_exp(w)
        back, theta = log(r)
        assert np.allclose(back, w, atol=1e-9)
        assert theta == pytest.approx(np.linalg.norm(w), abs=1e-9)
        assert np.allclose(kernels.so3_hat(back), np.real(logm(r)), atol=1e-8)


@pytest.mark.parametrize("path", PATHS)
def test_so3_log_near_half_turn(path):
    axis = np.array([1.0, 2.0, -2.0]) / 3.0
    w = (np.pi - 1e-7) * axis
    back, theta = _k("so3_log", path)(kernels.so3_exp(w))
    assert np.allclose(back, w, atol=1e-6)


@pytest.mark.parametrize("path", PATHS)
def test_se3_exp_log(path, rng):
    for _ in range(30):
        xi = np.concatenate([_unit_angles(rng, 1, 3.0)[0], rng.normal(size=3)])
        t = _k("se3_exp", path)(xi)
        hat = np.zeros((4, 4))
        hat[:3, :3] = kernels.so3_hat(xi[:3])
        hat[:3, 3] = xi[3:]
        assert np.allclose(t, expm(hat), atol=1e-11)
        back, _ = _k("se3_log", path)(t)
        assert np.allclose(back, xi, atol=1e-9)


@pytest.mark.parametrize("path", PATHS)
def test_generic_expm_logm(path, rng):
    for _ in range(20):
        a = rng.uniform(-1, 1, size=(3, 3))
        e = _k("expm_taylor", path)(a)
        assert np.allclose(e, expm(a), rtol=1e-12, atol=1e-12)
        back = _k("logm_iss", path)(e)
        assert np.allclose(back, np.real(logm(e)), atol=1e-9)


@pytest.mark.parametrize("path", PATHS)
def test_polar_project_restores_rotation(path, rng):
    r = kernels.so3_exp(rng.normal(size=3))
    noisy = r + 1e-4 * rng.normal(size=(3, 3))
    p = _k("polar_project", path)(noisy)
    assert np.allclose(p.T @ p, np.eye(3), atol=1e-13)
    assert np.linalg.det(p) == pytest.approx(1.0, abs=1e-13)
    assert np.abs(p - r).max() < 1e-3


@pytest.mark.parametrize("path", PATHS)
def test_batched_kernels_match_scalar(path, rng):
    ws = _unit_angles(rng, 40)
    rs = _k("so3_exp_batch", path)(ws)
    for w, r in zip(ws, rs):
        assert np.allclose(r, kernels.so3_exp(w), atol=1e-14)
    logs = _k("so3_log_batch", path)(rs)
    assert np.allclose(logs, ws, atol=1e-9)
    comp = _k("so3_compose_batch", path)(rs, rs[::-1].copy())
    assert np.allclose(comp, np.einsum("nij,njk->nik", rs, rs[::-1]), atol=1e-14)


def test_fallback_flag_runs_uncompiled(tmp_path):
    import subprocess
    import sys

    code = ("from eqobs import _accel, kernels; import numpy as np;"
            "assert not _accel.JIT_ENABLED;"
            "assert kernels.so3_exp.py_func is kernels.so3_exp;"
            "print(kernels.so3_exp(np.array([0.1, 0.2, 0.3]))[0, 0])")
    import os

    env = dict(os.environ, EQOBS_DISABLE_JIT="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    expected = kernels.so3_exp(np.array([0.1, 0.2, 0.3]))[0, 0]
    assert float(out.stdout) == pytest.approx(expected, abs=1e-15)
