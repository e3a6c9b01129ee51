"""Scenario files: loading, validation, execution and logging.

A scenario is a TOML file with flat sections::

    name = "sphere_eta100"
    mode = "kinematic"            # kinematic | rolling | dynamic
    eta = 100.0                   # omit for plain geodesics

    [body1]                       # fingertip
    kind = "sphere"
    radius = 0.04

    [body2]                       # object
    kind = "sphere"
    radius = 0.1

    [sigma]
    coefficients = [0.001, 0.0, -0.4]   # ascending powers of t

    [[contact]]
    body1 = [1.5707963267948966, 0.0]
    body2 = [0.5235987755982988, 0.5235987755982988]
    psi = 3.141592653589793
    heading = 1.5707963267948966
    slip = [0.002, 0.001]

    [[disturbance]]
    kind = "acceleration"         # or "rate"
    values = [0.1, 0.0]
    t_start = 0.1
    t_end = 0.2
    contacts = [0, 1, 2]          # default: every contact

    [integrator]
    step = 1e-4
    horizon = 0.049

    [output]
    dir = "out/sphere_eta100"
    rejection_threshold = 1e-3

All values are SI units and radians.  Every check runs in load_scenario so a
bad file fails before any integration starts.
"""

from __future__ import annotations

import json
import math
import os
import sys
import warnings
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Optional

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .contact import ContactState, spin_rate, tangential_velocity
from .dynamics import (
    DynamicsParams,
    RigidBodyState,
    World,
    contact_samples,
    step_dynamics,
)
from .errors import GeoContactError, IntegrationError, ScenarioError
from .geodesic import (
    ContactPairSystem,
    ContractionWarning,
    Disturbance,
    SIGMA_MIN,
    SigmaProfile,
    contraction_margin,
    integrate,
)
from .rolling import (
    corollary_check,
    curve_points,
    geodesic_curvature,
    initial_state,
    plane_deviation,
    rolling_map,
    simulate_rolling,
)
from .surface import Chart, build_chart, check_orthogonality, frame_at, geometry_at

MODES = ("kinematic", "rolling", "dynamic")
OUTPUT_ENV = "GEOCONTACT_OUT"
DEFAULT_THRESHOLD = 1e-3

STATE_COLUMNS = ("t", "u1", "v1", "u2", "v2", "psi", "du1", "dv1", "du2", "dv2", "dpsi",
                 "v_rel_x", "v_rel_y")
FORCE_COLUMNS = ("f_N", "f_tx", "f_ty")
OBJECT_COLUMNS = ("t", "x", "y", "z", "qw", "qx", "qy", "qz", "vx", "vy", "vz", "wx", "wy", "wz")


# -- scenario model ------------------------------------------------------------


@dataclass(frozen=True)
class BodySpec:
    kind: str
    params: dict
    mass: Optional[float] = None

    def chart(self) -> Chart:
        return build_chart(self.kind, **self.params)


@dataclass(frozen=True)
class ContactSpec:
    body1: tuple[float, float]
    body2: tuple[float, float]
    psi: float
    heading: float = 0.0
    speed: float = 1.0
    slip: tuple[float, float] = (0.0, 0.0)
    omega: Optional[tuple[float, float, float]] = None


@dataclass(frozen=True)
class DisturbanceSpec:
    disturbance: Disturbance
    contacts: Optional[tuple[int, ...]] = None  # None: all contacts

    def applies_to(self, i: int) -> bool:
        return self.contacts is None or i in self.contacts


@dataclass(frozen=True)
class Scenario:
    """Validated scenario.  Body 1 is the fingertip, body 2 the object."""

    name: str
    mode: str
    body1: BodySpec
    body2: BodySpec
    contacts: tuple[ContactSpec, ...]
    sigma: SigmaProfile
    step: float
    horizon: float
    eta: Optional[float] = None
    disturbances: tuple[DisturbanceSpec, ...] = ()
    t0: float = 0.0
    output_dir: Optional[str] = None
    rejection_threshold: float = DEFAULT_THRESHOLD
    dynamics: Optional[DynamicsParams] = None
    driver: str = "body1"
    description: str = ""
    source: Optional[str] = None

    @property
    def t1(self) -> float:
        return self.t0 + self.horizon

    def disturbances_for(self, i: int) -> tuple[Disturbance, ...]:
        return tuple(d.disturbance for d in self.disturbances if d.applies_to(i))

    def reference_time(self) -> float:
        """End of the last disturbance window, or the start time if none."""
        if not self.disturbances:
            return self.t0
        return max(d.disturbance.t_end for d in self.disturbances)


# -- parsing helpers -----------------------------------------------------------


class _Section:
    """Dict wrapper that names the offending key in every error."""

    def __init__(self, data: Any, path: str):
        if not isinstance(data, dict):
            raise ScenarioError("expected a table", path)
        self.data = data
        self.path = path
        self.used: set[str] = set()

    def _name(self, key):
        return f"{self.path}.{key}" if self.path else key

    def has(self, key) -> bool:
        return key in self.data

    def raw(self, key, default=...):
        self.used.add(key)
        if key not in self.data:
            if default is ...:
                raise ScenarioError("missing required field", self._name(key))
            return default
        return self.data[key]

    def number(self, key, default=..., positive=False, nonneg=False) -> float:
        if key not in self.data and default is not ...:
            self.used.add(key)
            return default
        val = self.raw(key)
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            raise ScenarioError(f"expected a number, got {val!r}", self._name(key))
        val = float(val)
        if not math.isfinite(val):
            raise ScenarioError("must be finite", self._name(key))
        if positive and not val > 0:
            raise ScenarioError(f"must be positive, got {val}", self._name(key))
        if nonneg and val < 0:
            raise ScenarioError(f"must be non-negative, got {val}", self._name(key))
        return val

    def vector(self, key, n, default=...) -> Optional[tuple[float, ...]]:
        if key not in self.data and default is not ...:
            self.used.add(key)
            return default
        val = self.raw(key)
        if not isinstance(val, list) or len(val) != n:
            raise ScenarioError(f"expected a list of {n} numbers, got {val!r}", self._name(key))
        out = []
        for x in val:
            if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
                raise ScenarioError(f"expected finite numbers, got {val!r}", self._name(key))
            out.append(float(x))
        return tuple(out)

    def string(self, key, default=..., choices=None) -> str:
        val = self.raw(key, default)
        if not isinstance(val, str):
            raise ScenarioError(f"expected a string, got {val!r}", self._name(key))
        if choices is not None and val not in choices:
            raise ScenarioError(f"must be one of {', '.join(choices)}; got {val!r}", self._name(key))
        return val

    def finish(self):
        extra = sorted(set(self.data) - self.used)
        if extra:
            raise ScenarioError(f"unknown field(s) {', '.join(extra)}", self.path or None)


def _body(sec: _Section) -> BodySpec:
    kind = sec.string("kind", choices=("sphere", "cylinder", "ellipsoid"))
    if kind == "ellipsoid":
        params = {"radii": sec.vector("radii", 3)}
    else:
        params = {"radius": sec.number("radius", positive=True)}
    mass = sec.number("mass", None, positive=True)
    sec.finish()
    spec = BodySpec(kind, params, mass)
    try:
        check_orthogonality(spec.chart(), n=20)
    except GeoContactError as exc:
        raise ScenarioError(str(exc), sec.path) from exc
    return spec


def _parse(data: dict, name: str, source: Optional[str]) -> Scenario:
    top = _Section(data, "")
    mode = top.string("mode", "kinematic", choices=MODES)
    scen_name = top.string("name", name)
    description = top.string("description", "")
    eta = top.number("eta", None)
    if eta is not None and not eta > 0:
        raise ScenarioError(f"must be positive, got {eta}", "eta")

    body1 = _body(_Section(top.raw("body1"), "body1"))
    body2 = _body(_Section(top.raw("body2"), "body2"))

    sig = _Section(top.raw("sigma"), "sigma")
    coeffs = sig.raw("coefficients")
    if not isinstance(coeffs, list) or not coeffs:
        raise ScenarioError("expected a non-empty list of numbers", "sigma.coefficients")
    coeffs = sig.vector("coefficients", len(coeffs))
    sig.finish()
    try:
        sigma = SigmaProfile(coeffs)
    except GeoContactError as exc:
        raise ScenarioError(str(exc), "sigma.coefficients") from exc

    integ = _Section(top.raw("integrator"), "integrator")
    step = integ.number("step", positive=True)
    horizon = integ.number("horizon", positive=True)
    t0 = integ.number("t0", 0.0)
    integ.finish()
    if step > horizon:
        raise ScenarioError(f"step {step} exceeds horizon {horizon}", "integrator.step")

    # sigma must stay away from zero over the whole horizon
    ts = np.linspace(t0, t0 + horizon, 2001)
    vals = np.array([sigma.value_and_rate(float(t))[0] for t in ts])
    if np.any(np.abs(vals) < SIGMA_MIN) or np.any(np.sign(vals) != np.sign(vals[0])):
        bad = float(ts[np.argmax((np.abs(vals) < SIGMA_MIN) | (np.sign(vals) != np.sign(vals[0])))])
        raise ScenarioError(f"sigma(t) reaches zero near t = {bad:.6g} s inside the horizon",
                            "sigma.coefficients")

    out = _Section(top.raw("output", {}), "output")
    output_dir = out.raw("dir", None)
    if output_dir is not None and not isinstance(output_dir, str):
        raise ScenarioError("expected a string", "output.dir")
    threshold = out.number("rejection_threshold", DEFAULT_THRESHOLD, positive=True)
    out.finish()

    raw_contacts = top.raw("contact")
    if not isinstance(raw_contacts, list) or not raw_contacts:
        raise ScenarioError("need at least one [[contact]] entry", "contact")
    driver = "body1"
    if top.has("corollary"):
        cor = _Section(top.raw("corollary"), "corollary")
        driver = cor.string("driver", "body1", choices=("body1", "body2"))
        cor.finish()
    charts = {"body1": body1.chart(), "body2": body2.chart()}
    contacts = []
    for i, raw in enumerate(raw_contacts):
        sec = _Section(raw, f"contact[{i}]")
        c = ContactSpec(
            body1=sec.vector("body1", 2),
            body2=sec.vector("body2", 2),
            psi=sec.number("psi"),
            heading=sec.number("heading", 0.0),
            speed=sec.number("speed", 1.0, positive=True),
            slip=sec.vector("slip", 2, (0.0, 0.0)),
            omega=sec.vector("omega", 3, None),
        )
        sec.finish()
        for body in ("body1", "body2"):
            try:
                geometry_at(charts[body], *getattr(c, body))
            except GeoContactError as exc:
                raise ScenarioError(str(exc), f"contact[{i}].{body}") from exc
        contacts.append(c)

    disturbances = []
    for i, raw in enumerate(top.raw("disturbance", [])):
        sec = _Section(raw, f"disturbance[{i}]")
        kind = sec.string("kind", choices=("acceleration", "rate"))
        values = sec.vector("values", 2)
        t_start = sec.number("t_start")
        t_end = sec.number("t_end")
        targets = sec.raw("contacts", None)
        sec.finish()
        if not t_end > t_start:
            raise ScenarioError(f"need t_end > t_start, got {t_start} .. {t_end}", f"disturbance[{i}].t_end")
        if targets is not None:
            if not isinstance(targets, list) or not all(
                    isinstance(k, int) and not isinstance(k, bool) and 0 <= k < len(contacts) for k in targets):
                raise ScenarioError(f"expected contact indices in 0..{len(contacts) - 1}",
                                    f"disturbance[{i}].contacts")
            targets = tuple(targets)
        disturbances.append(DisturbanceSpec(Disturbance(kind, values, t_start, t_end), targets))

    dyn = None
    if mode == "dynamic":
        if eta is None:
            raise ScenarioError("dynamic mode needs the slip feedback gain", "eta")
        for body, spec in (("body1", body1), ("body2", body2)):
            if spec.kind != "sphere":
                raise ScenarioError("dynamic mode supports spheres only", f"{body}.kind")
        if body2.mass is None:
            raise ScenarioError("object mass is required in dynamic mode", "body2.mass")
        sec = _Section(top.raw("dynamics", {}), "dynamics")
        dyn = DynamicsParams(
            stiffness=sec.number("stiffness", 10_000.0, positive=True),
            damping=sec.number("damping", 1_000.0, nonneg=True),
            mu=sec.number("mu", 0.5, positive=True),
            viscous_gain=sec.number("viscous_gain", 1_000.0, positive=True),
            normal_force=sec.number("normal_force", 1.0, positive=True),
        )
        sec.finish()
    elif top.has("dynamics"):
        raise ScenarioError("only valid in dynamic mode", "dynamics")
    if mode == "rolling" and disturbances:
        raise ScenarioError("rolling mode imposes exact rolling; disturbances are not allowed", "disturbance")
    top.finish()

    return Scenario(
        name=scen_name, mode=mode, body1=body1, body2=body2, contacts=tuple(contacts),
        sigma=sigma, step=step, horizon=horizon, eta=eta, disturbances=tuple(disturbances),
        t0=t0, output_dir=output_dir, rejection_threshold=threshold, dynamics=dyn,
        driver=driver, description=description, source=source,
    )


def parse_scenario(text: str, name: str = "scenario", source: Optional[str] = None) -> Scenario:
    """Parse and validate scenario text."""
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        where = f"{source}: " if source else ""
        raise ScenarioError(f"{where}parse error: {exc}") from exc
    return _parse(data, name, source)


def builtin_names() -> list[str]:
    files = resources.files("geocontact").joinpath("scenarios")
    return sorted(p.name[:-5] for p in files.iterdir() if p.name.endswith(".toml"))


def _builtin_text(name: str) -> str:
    return resources.files("geocontact").joinpath("scenarios", f"{name}.toml").read_text()


def load_scenario(path) -> Scenario:
    """Load a scenario from a file path or a bundled scenario name."""
    p = Path(path)
    if p.is_file():
        return parse_scenario(p.read_text(), name=p.stem, source=str(p))
    if str(path) in builtin_names():
        return parse_scenario(_builtin_text(str(path)), name=str(path), source=f"builtin:{path}")
    raise ScenarioError(f"no scenario file or bundled scenario named {str(path)!r}")


# -- logs and metrics ----------------------------------------------------------


@dataclass
class TrajectoryLog:
    """Fixed-schema time series for one contact (or the object in dynamic mode)."""

    label: str
    columns: tuple[str, ...]
    data: np.ndarray

    def column(self, name: str) -> np.ndarray:
        return self.data[:, self.columns.index(name)]

    @property
    def t(self) -> np.ndarray:
        return self.data[:, 0]

    def slip_speed(self) -> np.ndarray:
        return np.hypot(self.column("v_rel_x"), self.column("v_rel_y"))

    def write_csv(self, path) -> Path:
        path = Path(path)
        # %.17g round-trips doubles; newline fixed for byte-identical output
        np.savetxt(path, self.data, fmt="%.17g", delimiter=",", header=",".join(self.columns),
                   comments="", newline="\n")
        return path


def rejection_time(t, speed, t_ref: float, threshold: float) -> Optional[float]:
    """Delay after ``t_ref`` until ``speed`` drops below ``threshold`` for good.

    Returns 0.0 when the speed is already below at ``t_ref`` and never rises
    again, None when it is still above at the last sample.
    """
    t = np.asarray(t, dtype=float)
    speed = np.asarray(speed, dtype=float)
    after = t >= t_ref - 1e-12
    if not np.any(after):
        return None
    ta, sa = t[after], speed[after]
    above = np.nonzero(sa >= threshold)[0]
    if above.size == 0:
        return 0.0
    last = above[-1]
    if last == len(sa) - 1:
        return None
    return float(max(ta[last + 1] - t_ref, 0.0))


def peak_in_windows(t, speed, windows) -> float:
    """Max of ``speed`` over the union of [start, end] windows (whole run if none)."""
    t = np.asarray(t, dtype=float)
    speed = np.asarray(speed, dtype=float)
    if not windows:
        return float(np.max(speed))
    mask = np.zeros(t.shape, dtype=bool)
    for a, b in windows:
        mask |= (t >= a - 1e-12) & (t <= b + 1e-12)  # sample times carry rounding
    return float(np.max(speed[mask])) if np.any(mask) else 0.0


@dataclass
class SummaryMetrics:
    scenario: str
    mode: str
    rejection_threshold: float
    reference_time: float
    contacts: list[dict] = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "mode": self.mode,
            "rejection_threshold": self.rejection_threshold,
            "reference_time": self.reference_time,
            "contacts": self.contacts,
            **self.extra,
        }


@dataclass
class RunResult:
    scenario: Scenario
    logs: list[TrajectoryLog]
    summary: SummaryMetrics
    object_log: Optional[TrajectoryLog] = None

    def write(self, out_dir) -> list[Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        paths = [log.write_csv(out / f"{self.scenario.name}_{log.label}.csv") for log in self.logs]
        if self.object_log is not None:
            paths.append(self.object_log.write_csv(out / f"{self.scenario.name}_object.csv"))
        summary = out / f"{self.scenario.name}_summary.json"
        summary.write_text(json.dumps(self.summary.to_dict(), indent=2, sort_keys=True) + "\n")
        paths.append(summary)
        return paths


def resolve_output_dir(scenario: Scenario, override: Optional[str] = None) -> Path:
    """--out beats the environment variable, which beats the scenario file."""
    if override:
        return Path(override)
    env = os.environ.get(OUTPUT_ENV)
    if env:
        return Path(env) / scenario.name
    if scenario.output_dir:
        return Path(scenario.output_dir)
    return Path("out") / scenario.name


# -- execution -----------------------------------------------------------------


def _contact_state(scenario: Scenario, c: ContactSpec, chart1: Chart, chart2: Chart) -> ContactState:
    speed = c.speed * scenario.sigma.value_and_rate(scenario.t0)[0]
    return initial_state(chart1, chart2, c.body1, c.body2, c.psi, c.heading, speed, c.slip)


def _slip_metrics(scenario: Scenario, log: TrajectoryLog, windows) -> dict:
    speed = log.slip_speed()
    t_ref = scenario.reference_time()
    return {
        "max_v_rel_during_disturbance": peak_in_windows(log.t, speed, windows),
        "peak_v_rel": float(np.max(speed)),
        "rejection_time": rejection_time(log.t, speed, t_ref, scenario.rejection_threshold),
        "final_v_rel": float(speed[-1]),
    }


def _contraction_events(scenario: Scenario, t) -> dict:
    if scenario.eta is None:
        return {"contraction_warning_samples": 0}
    margins = np.array([contraction_margin(*scenario.sigma.value_and_rate(float(x)), scenario.eta) for x in t])
    bad = margins >= 0
    info = {"contraction_warning_samples": int(np.count_nonzero(bad)),
            "max_contraction_margin": float(np.max(margins))}
    if np.any(bad):
        info["contraction_warning_window"] = [float(t[bad][0]), float(t[bad][-1])]
        warnings.warn(
            f"{scenario.name}: sigma_dot/sigma - eta sigma^2 >= 0 on "
            f"[{t[bad][0]:.4g}, {t[bad][-1]:.4g}] s; slip decay is not guaranteed there",
            ContractionWarning, stacklevel=3)
    return info


def _run_kinematic(scenario: Scenario, step: float) -> RunResult:
    chart1, chart2 = scenario.body1.chart(), scenario.body2.chart()
    logs, per_contact = [], []
    for i, c in enumerate(scenario.contacts):
        dist = scenario.disturbances_for(i)
        system = ContactPairSystem(chart1, chart2, scenario.sigma, scenario.eta, dist)
        traj = integrate(system, _contact_state(scenario, c, chart1, chart2), scenario.t0, scenario.t1, step)
        rows = np.empty((len(traj), len(STATE_COLUMNS)))
        for k, (t, y) in enumerate(zip(traj.t, traj.y)):
            obs = system.observe(float(t), y)
            rows[k] = (t, *y[:5], *obs["rates"], obs["dpsi"], *obs["v_rel"])
        log = TrajectoryLog(f"contact{i}", STATE_COLUMNS, rows)
        logs.append(log)
        windows = [(d.t_start, d.t_end) for d in dist]
        per_contact.append({"index": i, **_slip_metrics(scenario, log, windows)})
    summary = SummaryMetrics(scenario.name, scenario.mode, scenario.rejection_threshold,
                             scenario.reference_time(), per_contact,
                             _contraction_events(scenario, logs[0].t))
    return RunResult(scenario, logs, summary)


def _driver_heading(c: ContactSpec, chart_d: Chart, chart_f: Chart, uv_d, uv_f) -> float:
    """Heading on the driving body produced by an object angular velocity.

    The angular velocity is given in the object frame; its tangential part in
    the driver's surface frame goes through the rolling contact map.
    """
    frame = frame_at(chart_d, *uv_d)
    w = np.asarray(c.omega)
    omega_xy = (float(frame[:, 0] @ w), float(frame[:, 1] @ w))
    probe = ContactState(uv_d[0], uv_d[1], uv_f[0], uv_f[1], c.psi)
    (du, dv), _ = rolling_map(omega_xy, probe, chart_d, chart_f)
    g = geometry_at(chart_d, *uv_d)
    return math.atan2(g.norm_v * dv, g.norm_u * du)


def _run_rolling(scenario: Scenario, step: float) -> RunResult:
    chart1, chart2 = scenario.body1.chart(), scenario.body2.chart()
    swap = scenario.driver == "body2"
    # R_psi is symmetric and involutive, so psi keeps its meaning when the bodies swap
    chart_d, chart_f = (chart2, chart1) if swap else (chart1, chart2)
    spec_f = scenario.body1 if swap else scenario.body2
    spec_d = scenario.body2 if swap else scenario.body1
    logs, per_contact = [], []
    for i, c in enumerate(scenario.contacts):
        uv_d, uv_f = (c.body2, c.body1) if swap else (c.body1, c.body2)
        heading = c.heading if c.omega is None else _driver_heading(c, chart_d, chart_f, uv_d, uv_f)
        speed = c.speed * scenario.sigma.value_and_rate(scenario.t0)[0]
        start = initial_state(chart_d, chart_f, uv_d, uv_f, c.psi, heading, speed)
        traj = simulate_rolling(start, chart_d, chart_f, scenario.sigma, scenario.t0, scenario.t1, step)
        b1, b2 = (traj.body2, traj.body1) if swap else (traj.body1, traj.body2)
        rows = np.empty((len(traj.t), len(STATE_COLUMNS)))
        for k in range(len(traj.t)):
            g1 = geometry_at(chart1, b1[k, 0], b1[k, 1])
            g2 = geometry_at(chart2, b2[k, 0], b2[k, 1])
            vx, vy = tangential_velocity(g1, g2, traj.psi[k], b1[k, 2], b1[k, 3], b2[k, 2], b2[k, 3])
            dpsi = spin_rate(g1, g2, b1[k, 2], b1[k, 3], b2[k, 2], b2[k, 3])
            rows[k] = (traj.t[k], b1[k, 0], b1[k, 1], b2[k, 0], b2[k, 1], traj.psi[k],
                       b1[k, 2], b1[k, 3], b2[k, 2], b2[k, 3], dpsi, vx, vy)
        logs.append(TrajectoryLog(f"contact{i}", STATE_COLUMNS, rows))
        entry = {
            "index": i,
            "driver": scenario.driver,
            "geodesic_residual": corollary_check(traj, chart_f, scenario.sigma),
            "max_v_rel": float(np.max(np.hypot(rows[:, 11], rows[:, 12]))),
        }
        kd = geodesic_curvature(chart_d, traj.t, traj.body1)
        kf = geodesic_curvature(chart_f, traj.t, traj.body2, normal_sign=-1.0)
        entry["max_curvature_mismatch"] = float(np.max(np.abs(kd - kf)))
        for role, spec, chart, curve in (("follower", spec_f, chart_f, traj.body2),
                                         ("driver", spec_d, chart_d, traj.body1)):
            if spec.kind == "sphere":
                # sphere charts are centred at the origin: a great circle lies in a plane through it
                entry[f"{role}_plane_deviation"] = plane_deviation(curve_points(chart, curve), through=(0, 0, 0))
        per_contact.append(entry)
    summary = SummaryMetrics(scenario.name, scenario.mode, scenario.rejection_threshold,
                             scenario.reference_time(), per_contact)
    return RunResult(scenario, logs, summary)


def _run_dynamic(scenario: Scenario, step: float) -> RunResult:
    chart1, chart2 = scenario.body1.chart(), scenario.body2.chart()
    params = scenario.dynamics
    drives, rows = [], []
    for i, c in enumerate(scenario.contacts):
        drives.append(ContactPairSystem(chart1, chart2, scenario.sigma, scenario.eta, scenario.disturbances_for(i)))
        rows.append(_contact_state(scenario, c, chart1, chart2).to_array())
    body = RigidBodyState.solid_sphere(scenario.body2.params["radius"], scenario.body2.mass)
    world = World(scenario.t0, body, drives, np.array(rows), params)

    n = max(1, int(math.ceil(scenario.horizon / step - 1e-9)))
    width = len(STATE_COLUMNS) + len(FORCE_COLUMNS)
    data = np.empty((len(drives), n + 1, width))
    obj = np.empty((n + 1, len(OBJECT_COLUMNS)))
    saturated = np.zeros((len(drives), n + 1), dtype=bool)

    def record(k, w):
        b = w.body
        obj[k] = (w.t, *b.position, *b.orientation, *b.velocity, *b.angular_velocity)
        for i, s in enumerate(contact_samples(w)):
            row = w.planner[i]
            g1 = geometry_at(chart1, row[0], row[1])
            g2 = geometry_at(chart2, row[2], row[3])
            dpsi = spin_rate(g1, g2, *s.planner_rates)
            data[i, k] = (w.t, *row[:5], *s.planner_rates, dpsi, *s.v_rel,
                          s.record.f_n, s.record.f_tx, s.record.f_ty)
            saturated[i, k] = s.record.saturated

    record(0, world)
    for k in range(n):
        dt = min(step, scenario.t1 - world.t) if k == n - 1 else step
        world = step_dynamics(world, dt)
        record(k + 1, world)

    columns = STATE_COLUMNS + FORCE_COLUMNS
    logs, per_contact = [], []
    cone_worst = -math.inf
    for i in range(len(drives)):
        log = TrajectoryLog(f"contact{i}", columns, data[i])
        logs.append(log)
        ft = np.hypot(log.column("f_tx"), log.column("f_ty"))
        cap = params.mu * log.column("f_N")
        cone_worst = max(cone_worst, float(np.max(ft - cap)))
        sat = saturated[i]
        windows = [(d.t_start, d.t_end) for d in scenario.disturbances_for(i)]
        per_contact.append({
            "index": i,
            **_slip_metrics(scenario, log, windows),
            "max_tangential_force": float(np.max(ft)),
            "saturated_samples": int(np.count_nonzero(sat)),
            "max_saturation_error": float(np.max(np.abs(ft[sat] - cap[sat]))) if np.any(sat) else None,
        })
    extra = {"max_cone_excess": cone_worst, "mu": params.mu, "normal_force": params.normal_force}
    summary = SummaryMetrics(scenario.name, scenario.mode, scenario.rejection_threshold,
                             scenario.reference_time(), per_contact, extra)
    return RunResult(scenario, logs, summary, TrajectoryLog("object", OBJECT_COLUMNS, obj))


def run(scenario: Scenario, step: Optional[float] = None) -> RunResult:
    """Execute a validated scenario; ``step`` overrides the integrator step."""
    h = scenario.step if step is None else float(step)
    if not h > 0:
        raise ScenarioError(f"must be positive, got {h}", "integrator.step")
    runner = {"kinematic": _run_kinematic, "rolling": _run_rolling, "dynamic": _run_dynamic}[scenario.mode]
    try:
        return runner(scenario, h)
    except IntegrationError as exc:
        raise IntegrationError(f"scenario {scenario.name!r}: {exc.reason}", exc.time) from exc
