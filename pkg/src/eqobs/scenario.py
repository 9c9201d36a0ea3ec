"""Scenario files, closed-loop simulation and CSV output.

A scenario is a TOML document::

    system = "s2_direction"
    t_end = 10.0
    dt = 0.01
    seed = 7                 # optional; falls back to $EQOBS_SEED, then 0

    [integrator]
    method = "rkmk4"         # or "lie_euler"
    renorm_every = 100

    [truth]
    state = [1.0, 0.0, 0.0]  # unit vector on S2, algebra coordinates on torsors

    [velocity]
    kind = "constant"        # coords = [...]
    # kind = "sinusoid"      # amplitude = [...], frequency = Hz, phase = rad or [...]

    [observer]
    initial = [0.0, 0.0, 1.0]  # same form as truth.state; or
    # offset = [...]            # algebra coordinates, Xhat(0) = X(0) exp(offset)
    gain = 1.0
    innovation = "reference"   # or "zero"

    [perturbation]
    velocity_std = 0.0
    output_std = 0.0

Unknown keys are rejected.
"""

from __future__ import annotations

import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .catalog import SYSTEM_IDS, get_system
from .errors import ConfigError, IntegrationError, UsageError
from .integrators import IntegratorConfig, step_group
from .observer import (
    EquivariantSystem,
    lift_coords,
    observer_velocity,
    project_state,
    reference_innovation,
    state_error,
    zero_innovation,
)

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

_SCHEMA = {
    None: {"system", "t_end", "dt", "seed", "integrator", "truth", "velocity", "observer", "perturbation"},
    "integrator": {"method", "renorm_every"},
    "truth": {"state"},
    "velocity": {"kind", "coords", "amplitude", "frequency", "phase"},
    "observer": {"initial", "offset", "gain", "innovation"},
    "perturbation": {"velocity_std", "output_std"},
}


@dataclass(frozen=True)
class VelocityProfile:
    kind: str = "constant"
    coords: np.ndarray | None = None
    amplitude: np.ndarray | None = None
    frequency: float = 0.0
    phase: np.ndarray | float = 0.0

    def __call__(self, t: float) -> np.ndarray:
        if self.kind == "constant":
            return self.coords
        return self.amplitude * np.sin(2 * np.pi * self.frequency * t + self.phase)


@dataclass(frozen=True)
class Scenario:
    system: str
    t_end: float
    dt: float
    truth_state: np.ndarray
    velocity: VelocityProfile
    integrator: IntegratorConfig
    seed: int = 0
    observer_initial: np.ndarray | None = None
    observer_offset: np.ndarray | None = None
    gain: float = 1.0
    innovation: str = "reference"
    velocity_std: float = 0.0
    output_std: float = 0.0

    @property
    def n_rows(self) -> int:
        return math.floor(self.t_end / self.dt + 1e-9) + 1


@dataclass
class TrajectoryRecord:
    columns: list[str]
    rows: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))

    def column(self, name: str) -> np.ndarray:
        return self.rows[:, self.columns.index(name)]


def _float(value, name) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"expected a number, got {value!r}", name)
    if not math.isfinite(value):
        raise ConfigError("must be finite", name)
    return float(value)


def _vector(value, name, size=None) -> np.ndarray:
    if not isinstance(value, list) or not all(
            isinstance(x, (int, float)) and not isinstance(x, bool) for x in value):
        raise ConfigError(f"expected a list of numbers, got {value!r}", name)
    arr = np.array(value, dtype=float)
    if size is not None and arr.shape != (size,):
        raise ConfigError(f"expected {size} entries, got {arr.size}", name)
    if not np.all(np.isfinite(arr)):
        raise ConfigError("must be finite", name)
    return arr


def _section(doc, name) -> dict:
    sec = doc.get(name, {})
    if not isinstance(sec, dict):
        raise ConfigError("expected a table", name)
    for key in sec:
        if key not in _SCHEMA[name]:
            raise ConfigError("unknown key", f"{name}.{key}")
    return sec


def _state_dim(system: EquivariantSystem) -> int:
    return 3 if system.manifold.name == "S2" else system.group.dim


def _state_from_config(system: EquivariantSystem, vec: np.ndarray, name: str) -> np.ndarray:
    if system.manifold.name == "S2":
        n = np.linalg.norm(vec)
        if abs(n - 1.0) > 1e-6:
            raise ConfigError(f"must be a unit vector (norm {n:.6g})", name)
        return vec / n
    return system.group.exp_coords(vec)


def scenario_from_dict(doc: dict) -> Scenario:
    for key in doc:
        if key not in _SCHEMA[None]:
            raise ConfigError("unknown key", key)
    sid = doc.get("system")
    if sid not in SYSTEM_IDS:
        raise ConfigError(f"unknown system {sid!r}; expected one of {SYSTEM_IDS}", "system")
    system = get_system(sid)
    for req in ("t_end", "dt"):
        if req not in doc:
            raise ConfigError("missing", req)
    t_end, dt = _float(doc["t_end"], "t_end"), _float(doc["dt"], "dt")
    if not 0 < dt < t_end:
        raise ConfigError(f"need 0 < dt < t_end (dt={dt}, t_end={t_end})", "dt")

    if "seed" in doc:
        seed = doc["seed"]
        if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
            raise ConfigError("expected a non-negative integer", "seed")
    else:
        env = os.environ.get("EQOBS_SEED", "0")
        try:
            seed = int(env)
        except ValueError:
            raise ConfigError(f"EQOBS_SEED is not an integer: {env!r}", "seed") from None

    integ = _section(doc, "integrator")
    try:
        cfg = IntegratorConfig(integ.get("method", "rkmk4"), dt, integ.get("renorm_every", 100))
    except UsageError as exc:
        raise ConfigError(str(exc), "integrator") from None

    truth = _section(doc, "truth")
    ndim = _state_dim(system)
    if "state" not in truth:
        raise ConfigError("missing", "truth.state")
    truth_state = _state_from_config(system, _vector(truth["state"], "truth.state", ndim), "truth.state")

    m = system.f.input_dim
    vel = _section(doc, "velocity")
    kind = vel.get("kind", "constant")
    if kind == "constant":
        extra = set(vel) - {"kind", "coords"}
        if extra:
            raise ConfigError("not allowed for a constant profile", f"velocity.{sorted(extra)[0]}")
        coords = _vector(vel.get("coords", [0.0] * m), "velocity.coords", m)
        profile = VelocityProfile("constant", coords=coords)
    elif kind == "sinusoid":
        if "coords" in vel:
            raise ConfigError("not allowed for a sinusoid profile", "velocity.coords")
        if "amplitude" not in vel:
            raise ConfigError("missing", "velocity.amplitude")
        amp = _vector(vel["amplitude"], "velocity.amplitude", m)
        freq = _float(vel.get("frequency", 1.0), "velocity.frequency")
        phase = vel.get("phase", 0.0)
        phase = _vector(phase, "velocity.phase", m) if isinstance(phase, list) \
            else _float(phase, "velocity.phase")
        profile = VelocityProfile("sinusoid", amplitude=amp, frequency=freq, phase=phase)
    else:
        raise ConfigError(f"expected 'constant' or 'sinusoid', got {kind!r}", "velocity.kind")

    obs = _section(doc, "observer")
    if "initial" in obs and "offset" in obs:
        raise ConfigError("give either initial or offset, not both", "observer.offset")
    initial = offset = None
    if "initial" in obs:
        initial = _state_from_config(system, _vector(obs["initial"], "observer.initial", ndim),
                                     "observer.initial")
    if "offset" in obs:
        offset = _vector(obs["offset"], "observer.offset", system.group.dim)
    gain = _float(obs.get("gain", 1.0), "observer.gain")
    innov = obs.get("innovation", "reference")
    if innov not in ("reference", "zero"):
        raise ConfigError(f"expected 'reference' or 'zero', got {innov!r}", "observer.innovation")

    pert = _section(doc, "perturbation")
    vstd = _float(pert.get("velocity_std", 0.0), "perturbation.velocity_std")
    ystd = _float(pert.get("output_std", 0.0), "perturbation.output_std")
    if vstd < 0:
        raise ConfigError("must be non-negative", "perturbation.velocity_std")
    if ystd < 0:
        raise ConfigError("must be non-negative", "perturbation.output_std")

    return Scenario(sid, t_end, dt, truth_state, profile, cfg, seed, initial, offset, gain, innov, vstd, ystd)


def load_scenario(path) -> Scenario:
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read scenario {path}: {exc.strerror}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed TOML: {exc}", str(path)) from None
    return scenario_from_dict(doc)


def _columns(system: EquivariantSystem) -> list[str]:
    size = system.manifold.ambient_size
    cols = ["t"]
    for prefix in ("truth", "est", "err"):
        cols += [f"{prefix}_{i}" for i in range(size)]
    return cols + ["error_metric", "innovation_norm"]


def run_simulation(scenario: Scenario) -> TrajectoryRecord:
    system = get_system(scenario.system)
    g = system.group
    cfg = scenario.integrator
    dt = scenario.dt
    rng = np.random.default_rng(scenario.seed)
    innovation = reference_innovation(system, scenario.gain) if scenario.innovation == "reference" \
        else zero_innovation(g)

    if system.manifold.name == "S2":
        x = system.section(scenario.truth_state)
    else:
        x = np.array(scenario.truth_state)
    if scenario.observer_initial is not None:
        xhat = system.section(scenario.observer_initial) if system.manifold.name == "S2" \
            else np.array(scenario.observer_initial)
    elif scenario.observer_offset is not None:
        xhat = x @ g.exp_coords(scenario.observer_offset)
    else:
        xhat = x.copy()

    vel = scenario.velocity
    truth_field = lambda t, xx: lift_coords(system, xx, vel(t))
    sub_cfgs = {}

    def truth_at(t_k, x_k, t):
        # output at a stage time comes from a truth sub-step from the last grid point
        if t == t_k:
            return x_k
        span = t - t_k
        c = sub_cfgs.get(span)
        if c is None:
            c = sub_cfgs[span] = IntegratorConfig(cfg.method, span, cfg.renorm_every)
        return step_group(c, truth_field, t_k, x_k, g)

    n = scenario.n_rows
    rows = np.empty((n, len(_columns(system))))
    xi0 = system.origin
    t = 0.0
    for k in range(n):
        t = k * dt
        xi = project_state(system, x)
        y_noise = rng.normal(scale=scenario.output_std, size=np.shape(system.h(xi))) \
            if scenario.output_std > 0 else 0.0
        v_noise = rng.normal(scale=scenario.velocity_std, size=system.f.input_dim) \
            if scenario.velocity_std > 0 else 0.0
        y_k = system.h(xi) + y_noise
        e = state_error(system, xhat, xi)
        delta = innovation(t, xhat, y_k)
        rows[k] = np.concatenate([
            [t], np.ravel(xi), np.ravel(project_state(system, xhat)), np.ravel(e),
            [system.manifold.distance(e, xi0), np.linalg.norm(delta)]])
        if k == n - 1:
            break

        cache = {}

        def y_at(ts, t_k=t, x_k=x):
            if ts not in cache:
                cache[ts] = system.h(project_state(system, truth_at(t_k, x_k, ts))) + y_noise
            return cache[ts]

        obs_field = lambda ts, xh: observer_velocity(system, innovation, ts, xh, vel(ts) + v_noise, y_at(ts))
        x_new = step_group(cfg, truth_field, t, x, g)
        xhat_new = step_group(cfg, obs_field, t, xhat, g)
        if not (np.all(np.isfinite(x_new)) and np.all(np.isfinite(xhat_new))):
            raise IntegrationError("non-finite state", last_good_time=t)
        if (k + 1) % cfg.renorm_every == 0:
            x_new, xhat_new = g.renormalize(x_new), g.renormalize(xhat_new)
        x, xhat = x_new, xhat_new
    return TrajectoryRecord(_columns(system), rows)


def write_csv(record: TrajectoryRecord, path) -> None:
    lines = [",".join(record.columns)]
    lines += [",".join("%.17g" % v for v in row) for row in record.rows]
    Path(path).write_bytes(("\n".join(lines) + "\n").encode("ascii"))


def read_csv(path) -> TrajectoryRecord:
    text = Path(path).read_text(encoding="ascii").splitlines()
    columns = text[0].split(",")
    rows = np.array([[float(v) for v in line.split(",")] for line in text[1:]]).reshape(-1, len(columns))
    return TrajectoryRecord(columns, rows)
