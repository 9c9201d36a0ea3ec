"""Sampled property checks over catalog systems.

Every property draws ``n`` random samples from its own generator, seeded from
``(seed, system index, property index)``, so results do not depend on how the
work is spread over threads.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .catalog import SYSTEM_IDS, get_system, s2_truncated
from .equivariance import (
    OriginLift,
    build_equivariant_lift,
    check_equivariance,
    check_equivariant_lift,
    check_induced_action_law,
    check_input_closure,
    check_lift,
    check_psi_axioms,
    check_stabilizer_compatibility,
    lift_two_section_residual,
)
from .errors import UsageError
from .homogeneous import check_action_axioms, check_commutation, d_group_at_identity, stabilizer_sample
from .kinematics import check_compatibility, check_completeness
from .observer import (
    check_error_invariance,
    error_dynamics_rhs,
    error_dynamics_rhs_plain,
    group_error,
    group_error_rhs,
    lifted_field,
    reference_innovation,
    state_error,
)

ALL_SYSTEMS = SYSTEM_IDS + ("s2_direction_pinv",)
COMPLETENESS_FLOOR = 1e-3


@dataclass(frozen=True)
class PropertyResult:
    system: str
    name: str
    value: float
    tol: float
    passed: bool
    witness: object = None
    lower_bound: bool = False

    def line(self) -> str:
        rel = ">" if self.lower_bound else "<="
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.system:<18} {self.name:<26} {self.value:.3e} {rel} {self.tol:.1e}"


@dataclass(frozen=True)
class CheckReport:
    results: tuple[PropertyResult, ...]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def residuals(self) -> dict:
        return {(r.system, r.name): r.value for r in self.results}


def _max_over(n, sample: Callable):
    worst, witness = -np.inf, None
    for _ in range(n):
        r, w = sample()
        if r > worst:
            worst, witness = float(r), w
    return worst, witness


def _system_properties(system, n: int) -> list[tuple[str, float, Callable]]:
    """``(name, default tol, fn(rng) -> (value, witness))`` for one system."""
    act, f, g = system.action, system.f, system.group
    m = system.manifold
    xi0 = system.origin
    dim_v = f.input_dim
    lift_tol = 1e-8 if system.lift.name == "pseudoinverse" else 1e-9
    innovation = reference_innovation(system, 1.0)
    origin_lift = OriginLift(xi0, lambda v: system.lift(xi0, v))

    def each(draw):
        return lambda rng: _max_over(n, lambda: draw(rng))

    def axioms(rng):
        a, b, xi = g.random_matrix(rng), g.random_matrix(rng), m.random_point(rng)
        return check_action_axioms(act, a, b, xi), (a, b, xi)

    def commutation(method):
        def draw(rng):
            xi, x, u = m.random_point(rng), g.random_matrix(rng), rng.uniform(-1, 1, g.dim)
            return check_commutation(act, xi, x, u, method), (xi, x, u)
        return draw

    def compat(rng):
        xi = m.random_point(rng)
        eta = m.random_tangent(xi, rng)
        return check_compatibility(f, system.g, xi, eta), (xi, eta)

    def completeness(rng):
        worst, wit = np.inf, None
        for _ in range(n):
            xi = m.random_point(rng)
            _, s = check_completeness(system.g, xi)
            if s < worst:
                worst, wit = s, xi
        return worst, wit

    def psi_axioms(rng):
        a, b = g.random_matrix(rng), g.random_matrix(rng)
        v, w = rng.normal(size=dim_v), rng.normal(size=dim_v)
        return check_psi_axioms(system.psi, a, b, v, w), (a, b, v)

    def equivariance(rng):
        x, xi, v = g.random_matrix(rng), m.random_point(rng), rng.normal(size=dim_v)
        return check_equivariance(system, x, xi, v), (x, xi, v)

    def induced_law(rng):
        x, y, xi, v = g.random_matrix(rng), g.random_matrix(rng), m.random_point(rng), rng.normal(size=dim_v)
        return check_induced_action_law(act, x, y, f.field(v), xi), (x, y, xi, v)

    def closure(rng):
        _, worst, wit = check_input_closure(act, f, rng, n_groups=max(1, n // 5))
        return worst, wit

    def lift(rng):
        xi, v = m.random_point(rng), rng.normal(size=dim_v)
        return check_lift(act, f, system.lift, xi, v), (xi, v)

    def eq_lift(rng):
        x, xi, v = g.random_matrix(rng), m.random_point(rng), rng.normal(size=dim_v)
        return check_equivariant_lift(act, system.psi, system.lift, x, xi, v), (x, xi, v)

    def stab_compat(rng):
        return check_stabilizer_compatibility(origin_lift, system, rng, n=n)

    extended = build_equivariant_lift(origin_lift, system, rng=0)

    def reconstruction(rng):
        xi, v = m.random_point(rng), rng.normal(size=dim_v)
        return float(np.abs(extended(xi, v) - system.lift(xi, v)).max()), (xi, v)

    def two_section(rng):
        xi, v = m.random_point(rng), rng.normal(size=dim_v)
        s = stabilizer_sample(act, xi0, rng, 1)[0]
        return lift_two_section_residual(origin_lift, system, xi, v, s), (xi, v, s)

    def lifted_equiv(rng):
        x, z, v = g.random_matrix(rng), g.random_matrix(rng), rng.normal(size=dim_v)
        lhs = lifted_field(system, x, v) @ z
        rhs = lifted_field(system, x @ z, system.psi(z, v))
        return float(np.abs(lhs - rhs).max()), (x, z, v)

    def consistency(rng):
        xh = g.random_matrix(rng)
        return float(np.abs(state_error(system, xh, act.apply(xh, xi0)) - xi0).max()), xh

    def invariance(rng):
        xh, z, xi = g.random_matrix(rng), g.random_matrix(rng), m.random_point(rng)
        return check_error_invariance(system, xh, xi, z), (xh, xi, z)

    def group_err(rng):
        xh, x, a = g.random_matrix(rng), g.random_matrix(rng), g.random_matrix(rng)
        e_mat = group_error(xh, x)
        r1 = np.abs(group_error(xh @ a, x @ a) - e_mat).max()
        r2 = np.abs(act.apply(e_mat, xi0) - state_error(system, xh, act.apply(x, xi0))).max()
        return float(max(r1, r2)), (xh, x, a)

    def plain_vs_eq(rng):
        xh, xi, v = g.random_matrix(rng), m.random_point(rng), rng.normal(size=dim_v)
        e = state_error(system, xh, xi)
        lhs = error_dynamics_rhs(system, innovation, 0.0, xh, e, v)
        rhs = error_dynamics_rhs_plain(system, innovation, 0.0, xh, e, v)
        return float(np.abs(lhs - rhs).max()), (xh, xi, v)

    def state_vs_group(rng):
        xh, x, v = g.random_matrix(rng), g.random_matrix(rng), rng.normal(size=dim_v)
        e = state_error(system, xh, act.apply(x, xi0))
        e_mat = x @ g.inverse_matrix(xh)
        u = g.vee(g.inverse_matrix(e_mat) @ group_error_rhs(system, innovation, 0.0, xh, x, v), tol=None)
        direct = error_dynamics_rhs(system, innovation, 0.0, xh, e, v)
        return float(np.abs(d_group_at_identity(act, e, u) - direct).max()), (xh, x, v)

    return [
        ("action_axioms", 1e-9, each(axioms)),
        ("commutation_analytic", 1e-9, each(commutation("analytic"))),
        ("commutation_fd", 1e-6, each(commutation("fd"))),
        ("compatibility", 1e-9, each(compat)),
        ("completeness_sigma_min", COMPLETENESS_FLOOR, completeness),
        ("psi_axioms", 1e-9, each(psi_axioms)),
        ("equivariance", 1e-9, each(equivariance)),
        ("induced_action_law", 1e-9, each(induced_law)),
        ("input_closure", 1e-6, closure),
        ("lift_projection", lift_tol, each(lift)),
        ("equivariant_lift", 1e-9, each(eq_lift)),
        ("stabilizer_compatibility", 1e-9, stab_compat),
        ("origin_reconstruction", 1e-9, each(reconstruction)),
        ("section_well_defined", 1e-9, each(two_section)),
        ("lifted_equivariance", 1e-9, each(lifted_equiv)),
        ("error_consistency", 1e-9, each(consistency)),
        ("error_invariance", 1e-9, each(invariance)),
        ("group_error_identities", 1e-12, each(group_err)),
        ("error_dynamics_agreement", 1e-8, each(state_vs_group)),
        ("plain_vs_equivariant", 1e-8, each(plain_vs_eq)),
    ]


def _truncated_properties(n: int):
    action, f = s2_truncated()

    def closure(rng):
        _, worst, wit = check_input_closure(action, f, rng, n_groups=max(1, n // 5))
        return worst, wit

    return [("input_closure", 1e-6, closure)]


def _resolve(system_id: str) -> list[str]:
    if system_id == "all":
        return list(ALL_SYSTEMS)
    if system_id not in ALL_SYSTEMS + ("s2_truncated",):
        raise UsageError(f"unknown system {system_id!r}")
    return [system_id]


def run_checks(system_id: str = "all", n: int = 100, tol: float | None = None, seed: int = 0,
               workers: int = 1) -> CheckReport:
    """Run every property for the requested system(s).

    ``tol`` overrides all per-property tolerances except the completeness
    floor, which is a lower bound on a singular value rather than a residual.
    """
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
        raise UsageError(f"sample count must be a positive integer, got {n!r}")
    if tol is not None and not tol > 0:
        raise UsageError(f"tolerance must be positive, got {tol!r}")
    if workers < 1:
        raise UsageError(f"workers must be >= 1, got {workers}")
    tasks = []
    for si, sid in enumerate(_resolve(system_id)):
        props = _truncated_properties(n) if sid == "s2_truncated" \
            else _system_properties(get_system(sid), n)
        for pi, (name, default_tol, fn) in enumerate(props):
            tasks.append((sid, name, default_tol, fn, np.random.SeedSequence([seed, si, pi])))

    def run(task):
        sid, name, default_tol, fn, ss = task
        value, witness = fn(np.random.default_rng(ss))
        lower = name == "completeness_sigma_min"
        limit = default_tol if (tol is None or lower) else tol
        passed = value > limit if lower else value <= limit
        return PropertyResult(sid, name, float(value), limit, bool(passed), witness, lower)

    if workers == 1:
        results = [run(t) for t in tasks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, tasks))
    return CheckReport(tuple(results))
