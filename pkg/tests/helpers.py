"""Closed-loop stepping shared by the observer and acceptance tests."""

import numpy as np

from eqobs.integrators import IntegratorConfig, step_group
from eqobs.observer import lift_coords, observer_velocity, project_state


def closed_loop(system, innovation, x0, xhat0, v_fn, h, t_end, method="rkmk4"):
    """Return times, truth group states and observer states on a uniform grid."""
    g = system.group
    cfg = IntegratorConfig(method, h, renorm_every=10 ** 9)
    truth_field = lambda t, x: lift_coords(system, x, v_fn(t))
    n = int(round(t_end / h))
    xs, xhs = [np.array(x0)], [np.array(xhat0)]
    for k in range(n):
        t, x, xh = k * h, xs[-1], xhs[-1]

        def y_at(ts, t=t, x=x):
            if ts == t:
                return system.h(project_state(system, x))
            sub = IntegratorConfig(method, ts - t, renorm_every=10 ** 9)
            return system.h(project_state(system, step_group(sub, truth_field, t, x, g)))

        obs = lambda ts, xx: observer_velocity(system, innovation, ts, xx, v_fn(ts), y_at(ts))
        xs.append(step_group(cfg, truth_field, t, x, g))
        xhs.append(step_group(cfg, obs, t, xh, g))
    return np.arange(n + 1) * h, np.array(xs), np.array(xhs)
