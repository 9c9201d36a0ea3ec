import numpy as np
import pytest

from eqobs import lie
from eqobs.catalog import sphere_action, torsor_action
from eqobs.errors import TransitivityError, UnsupportedError, UsageError
from eqobs.homogeneous import (
    SPHERE,
    GroupAction,
    act,
    check_action_axioms,
    check_commutation,
    d_group_at_identity,
    d_state,
    infinitesimal_rank,
    pseudo_right_inverse,
    stabilizer_sample,
    torsor_manifold,
)
from eqobs.lie import SE3, SO3

ACTIONS = {
    "sphere": sphere_action(),
    "torsor_so3": torsor_action(SO3),
    "torsor_se3": torsor_action(SE3),
}


@pytest.fixture(params=list(ACTIONS))
def action(request):
    return ACTIONS[request.param]


def test_sphere_basis_and_curve(rng):
    for _ in range(20):
        xi = SPHERE.random_point(rng)
        b = SPHERE.tangent_basis(xi)
        assert np.allclose(b @ xi, 0, atol=1e-14)
        assert np.allclose(b @ b.T, np.eye(2), atol=1e-14)
        eta = SPHERE.random_tangent(xi, rng)
        c = SPHERE.curve(xi, eta, 0.3)
        assert SPHERE.constraint_residual(c) < 1e-14
        h = 1e-6
        fd = (SPHERE.curve(xi, eta, h) - SPHERE.curve(xi, eta, -h)) / (2 * h)
        assert np.allclose(fd, eta, atol=1e-8)


def test_sphere_distance():
    e1, e2, e3 = np.eye(3)
    assert SPHERE.distance(e1, e2) == pytest.approx(np.pi / 2)
    assert SPHERE.distance(e3, -e3) == pytest.approx(np.pi)
    assert SPHERE.distance(e3, e3) == 0.0


def test_torsor_manifold(rng):
    m = torsor_manifold(SE3)
    x = m.random_point(rng)
    assert m.constraint_residual(x) < 1e-12
    eta = m.random_tangent(x, rng)
    assert m.tangency_residual(x, eta) < 1e-12
    assert m.tangency_residual(x, np.eye(4)) > 0.1
    assert m.distance(x, x @ SE3.exp_coords(np.array([0.1, 0, 0, 0, 0, 0]))) == pytest.approx(0.1)


def test_action_axioms(action, rng):
    for _ in range(20):
        a, b = action.group.random_matrix(rng), action.group.random_matrix(rng)
        xi = action.manifold.random_point(rng)
        assert check_action_axioms(action, a, b, xi) < 1e-12


def test_action_keeps_points_on_manifold(action, rng):
    x = action.group.random_matrix(rng)
    xi = action.manifold.random_point(rng)
    assert action.manifold.constraint_residual(action(x, xi)) < 1e-12


def test_d_state_analytic_vs_fd(action, rng):
    for _ in range(10):
        x = action.group.random_matrix(rng)
        xi = action.manifold.random_point(rng)
        eta = action.manifold.random_tangent(xi, rng)
        a = d_state(action, x, xi, eta)
        f = d_state(action, x, xi, eta, method="fd")
        assert np.allclose(a, f, atol=1e-7)


def test_d_group_analytic_vs_fd(action, rng):
    for _ in range(10):
        xi = action.manifold.random_point(rng)
        u = rng.normal(size=action.group.dim)
        a = d_group_at_identity(action, xi, u)
        f = d_group_at_identity(action, xi, u, method="fd")
        assert np.allclose(a, f, atol=1e-7)


def test_sphere_infinitesimal_action_is_cross_product(rng):
    xi, u = SPHERE.random_point(rng), rng.normal(size=3)
    assert np.allclose(d_group_at_identity(ACTIONS["sphere"], xi, u), np.cross(xi, u))


def test_commutation(action, rng):
    for _ in range(10):
        x = action.group.random_matrix(rng)
        xi = action.manifold.random_point(rng)
        u = rng.normal(size=action.group.dim)
        assert check_commutation(action, xi, x, u) < 1e-12
        assert check_commutation(action, xi, x, u, method="fd") < 1e-6


def test_commutation_detects_wrong_adjoint(rng):
    # swapping Ad_{X^-1} for Ad_X breaks the identity
    action = ACTIONS["sphere"]
    x, xi, u = SO3.random_matrix(rng), SPHERE.random_point(rng), rng.normal(size=3)
    lhs = d_state(action, x, xi, d_group_at_identity(action, xi, u))
    wrong = d_group_at_identity(action, action(x, xi), SO3.adjoint_coords(x, u))
    assert np.abs(lhs - wrong).max() > 1e-3


def test_stabilizer_sample(rng):
    s_act = ACTIONS["sphere"]
    xi = SPHERE.random_point(rng)
    for s in stabilizer_sample(s_act, xi, rng, 10):
        assert np.allclose(s_act(s, xi), xi, atol=1e-14)
    free = stabilizer_sample(ACTIONS["torsor_so3"], np.eye(3), rng, 10)
    assert len(free) == 1 and np.allclose(free[0], np.eye(3))
    bare = GroupAction(SO3, SPHERE, apply=lambda r, xi: r.T @ xi)
    with pytest.raises(UnsupportedError):
        stabilizer_sample(bare, xi, rng, 3)


def test_pseudo_right_inverse(action, rng):
    xi = action.manifold.random_point(rng)
    eta = action.manifold.random_tangent(xi, rng)
    u = pseudo_right_inverse(action, xi, eta)
    assert np.allclose(d_group_at_identity(action, xi, u), eta, atol=1e-10)
    rank, _ = infinitesimal_rank(action, xi)
    assert rank == action.manifold.dim


def test_sphere_pseudo_inverse_is_min_norm(rng):
    xi = SPHERE.random_point(rng)
    eta = SPHERE.random_tangent(xi, rng)
    u = pseudo_right_inverse(ACTIONS["sphere"], xi, eta)
    # the stabilizer direction is xi itself; the minimum-norm lift has no xi component
    assert abs(np.dot(u, xi)) < 1e-12
    assert np.allclose(u, np.cross(eta, xi), atol=1e-12)


def test_non_transitive_action_raises(rng):
    trivial = GroupAction(SO3, SPHERE, apply=lambda r, xi: xi)
    with pytest.raises(TransitivityError):
        pseudo_right_inverse(trivial, np.array([0, 0, 1.0]), np.array([1.0, 0, 0]))


def test_act_rejects_mismatch(rng):
    with pytest.raises(UsageError):
        act(ACTIONS["sphere"], lie.random_element(SE3, rng), np.array([0, 0, 1.0]))
    with pytest.raises(UsageError):
        act(ACTIONS["sphere"], np.eye(3), np.zeros(4))
    assert np.allclose(act(ACTIONS["sphere"], lie.identity(SO3), np.array([0, 0, 1.0])), [0, 0, 1])
