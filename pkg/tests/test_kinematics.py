import numpy as np
import pytest

from eqobs.catalog import azimuth_elevation_output, get_system
from eqobs.errors import UsageError
from eqobs.homogeneous import SPHERE
from eqobs.kinematics import (
    ConfigurationOutput,
    SystemFunction,
    VelocityOutput,
    check_compatibility,
    check_completeness,
    check_linearity,
    compute_kernel,
    eval_configuration_output,
    eval_system,
    make_affine_system,
    reduce_system,
    system_matrix,
)

SYSTEMS = ["s2_direction", "so3_attitude", "se3_pose"]


def duplicated_gyro():
    f = SystemFunction(SPHERE, 6, lambda xi, v: np.cross(xi, v[:3] + v[3:]))
    g = VelocityOutput(SPHERE, 6, lambda xi, eta: 0.5 * np.concatenate([np.cross(eta, xi)] * 2))
    return f, g


@pytest.mark.parametrize("sid", SYSTEMS)
def test_linearity(sid, rng):
    s = get_system(sid)
    xi = s.manifold.random_point(rng)
    v, w = rng.normal(size=s.f.input_dim), rng.normal(size=s.f.input_dim)
    assert check_linearity(s.f, xi, v, w, 0.7, -2.1) < 1e-12


@pytest.mark.parametrize("sid", SYSTEMS)
def test_compatibility_and_completeness(sid, rng):
    s = get_system(sid)
    for _ in range(20):
        xi = s.manifold.random_point(rng)
        eta = s.manifold.random_tangent(xi, rng)
        assert check_compatibility(s.f, s.g, xi, eta) < 1e-12
        ok, sigma = check_completeness(s.g, xi)
        assert ok and sigma > 1e-3


@pytest.mark.parametrize("sid", SYSTEMS)
def test_outputs_live_in_target(sid, rng):
    s = get_system(sid)
    y = eval_configuration_output(s.h, s.manifold.random_point(rng))
    assert y.shape == tuple(s.h.output_shape)
    if s.h.constraint is not None:
        assert s.h.constraint(y) < 1e-12


def test_field_values_are_tangent(rng):
    s = get_system("s2_direction")
    xi = SPHERE.random_point(rng)
    assert SPHERE.tangency_residual(xi, eval_system(s.f, xi, rng.normal(size=3))) < 1e-14


def test_eval_system_dimension_errors():
    s = get_system("s2_direction")
    with pytest.raises(UsageError):
        eval_system(s.f, np.array([0, 0, 1.0]), np.zeros(2))
    with pytest.raises(UsageError):
        eval_system(s.f, np.eye(3), np.zeros(3))


def test_azimuth_elevation_incomplete_at_poles(rng):
    g = azimuth_elevation_output()
    for pole in (np.array([0, 0, 1.0]), np.array([0, 0, -1.0])):
        ok, sigma = check_completeness(g, pole)
        assert not ok and sigma <= 1e-8
    xi = np.array([1.0, 0.0, 0.0])
    ok, sigma = check_completeness(g, xi)
    assert ok and sigma == pytest.approx(1.0)
    # cos(el) factor: sigma shrinks approaching the pole
    near = np.array([np.sin(1e-3), 0.0, np.cos(1e-3)])
    assert check_completeness(g, near)[1] < 2e-3


def test_azimuth_elevation_matches_angle_rates(rng):
    g = azimuth_elevation_output()
    az, el = 0.4, 0.3
    daz, del_ = 0.7, -0.2

    def point(a, e):
        return np.array([np.cos(e) * np.cos(a), np.cos(e) * np.sin(a), np.sin(e)])

    h = 1e-6
    eta = (point(az + h * daz, el + h * del_) - point(az - h * daz, el - h * del_)) / (2 * h)
    out = g(point(az, el), eta)
    assert out[0] == pytest.approx(np.cos(el) ** 2 * daz, abs=1e-8)
    assert out[1] == pytest.approx(np.cos(el) * del_, abs=1e-8)


def test_kernel_of_duplicated_gyro(rng):
    f, g = duplicated_gyro()
    pts = [SPHERE.random_point(rng) for _ in range(6)]
    k = compute_kernel(f, pts)
    assert k.shape == (6, 3)
    for col in k.T:
        assert np.allclose(col[:3], -col[3:], atol=1e-12)
    # the kernel of the true gyro system is trivial
    assert compute_kernel(get_system("s2_direction").f, pts).shape == (3, 0)


def test_kernel_needs_enough_points(rng):
    f, _ = duplicated_gyro()
    with pytest.raises(UsageError):
        compute_kernel(f, [SPHERE.random_point(rng) for _ in range(5)])


def test_reduce_system(rng):
    f, g = duplicated_gyro()
    pts = [SPHERE.random_point(rng) for _ in range(8)]
    fb, gb, q = reduce_system(f, g, compute_kernel(f, pts))
    assert fb.input_dim == 3
    assert np.allclose(q.T @ q, np.eye(3), atol=1e-12)
    xi = SPHERE.random_point(rng)
    eta = SPHERE.random_tangent(xi, rng)
    assert check_compatibility(fb, gb, xi, eta) < 1e-12
    assert check_completeness(gb, xi)[0]
    assert np.linalg.matrix_rank(system_matrix(fb, xi)) == 2


def test_reduce_with_empty_kernel():
    s = get_system("s2_direction")
    fb, gb, q = reduce_system(s.f, s.g, np.zeros((3, 0)))
    assert np.allclose(q, np.eye(3))


def test_affine_system_as_linear():
    drift = lambda xi: np.cross(xi, [0, 0, 1.0])
    ctrl = lambda xi: np.cross(xi, [1.0, 0, 0])
    f = make_affine_system(SPHERE, [drift, ctrl])
    xi = np.array([0.0, 1.0, 0.0])
    assert np.allclose(f(xi, np.array([1.0, 0.0])), drift(xi))
    assert np.allclose(f(xi, np.array([1.0, 2.0])), drift(xi) + 2 * ctrl(xi))
    assert check_linearity(f, xi, np.array([1.0, 0.3]), np.array([0.2, -1.0]), 2.0, 3.0) < 1e-14


def test_configuration_output_wrapper():
    h = ConfigurationOutput(SPHERE, (1,), lambda xi: xi[2:])
    assert eval_configuration_output(h, [0, 0, 1]) == 1.0


def test_single_direction_output(rng):
    from eqobs.catalog import direction_output
    from eqobs.homogeneous import torsor_manifold
    from eqobs.lie import SO3

    r = np.array([0.0, 0.6, 0.8])
    h = direction_output(torsor_manifold(SO3), r)
    assert np.allclose(h(np.eye(3)), r)
    rot = SO3.random_matrix(rng)
    assert np.allclose(h(rot), rot.T @ r)
    assert h.constraint(h(rot)) < 1e-14
