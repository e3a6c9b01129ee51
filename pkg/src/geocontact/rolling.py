"""Rolling-constraint evolution and the geodesic corollary checks.

Under pure rolling the metric-scaled contact velocities satisfy
M2 alpha2_dot = R_psi M1 alpha1_dot, and with no spin about the contact normal
psi_dot is the sum of the two frames' rotation rates.  A consequence is that
the covariant accelerations are related by the same reflection, so a geodesic
on one body maps to a geodesic on the other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np

from .contact import ContactState, map_to_e2, spin_rate
from .errors import InvalidParameterError
from .geodesic import SigmaProfile, Trajectory, _geodesic_accel, integrate, sigma_eval
from .surface import Chart, curvature_form, geometry_at


class RollingEvolution(NamedTuple):
    du2: float
    dv2: float
    dpsi: float


def _rolling_from_geometry(g1, g2, psi, du1, dv1):
    ex, ey = map_to_e2(psi, g1.norm_u * du1, g1.norm_v * dv1)
    du2, dv2 = ex / g2.norm_u, ey / g2.norm_v
    return RollingEvolution(du2, dv2, spin_rate(g1, g2, du1, dv1, du2, dv2))


def rolling_rates(state: ContactState, chart1: Chart, chart2: Chart) -> RollingEvolution:
    """Body-2 rates and psi_dot that keep v_rel = 0 for the given body-1 rates."""
    g1 = geometry_at(chart1, state.u1, state.v1)
    g2 = geometry_at(chart2, state.u2, state.v2)
    return _rolling_from_geometry(g1, g2, state.psi, state.du1, state.dv1)


def rolling_map(omega_xy: Sequence[float], state: ContactState, chart1: Chart, chart2: Chart):
    """Contact rates produced by a tangential relative angular velocity.

    ``omega_xy`` is expressed in body 1's surface frame.  Returns
    ((du1, dv1), (du2, dv2)) from the rolling contact equations
    M1 a1 = (K1 + R K2 R)^-1 (-w_y, w_x) and M2 a2 = R M1 a1.
    """
    r = np.array([[math.cos(state.psi), -math.sin(state.psi)],
                  [-math.sin(state.psi), -math.cos(state.psi)]])
    k1 = curvature_form(chart1, state.u1, state.v1)
    k2 = curvature_form(chart2, state.u2, state.v2)
    w1 = np.linalg.solve(k1 + r @ k2 @ r, np.array([-omega_xy[1], omega_xy[0]]))
    w2 = r @ w1
    g1 = geometry_at(chart1, state.u1, state.v1)
    g2 = geometry_at(chart2, state.u2, state.v2)
    return ((w1[0] / g1.norm_u, w1[1] / g1.norm_v), (w2[0] / g2.norm_u, w2[1] / g2.norm_v))


def initial_state(chart1: Chart, chart2: Chart, body1: Sequence[float], body2: Sequence[float],
                  psi: float, heading: float, speed: float,
                  slip: Sequence[float] = (0.0, 0.0)) -> ContactState:
    """Contact state whose body-1 curve leaves at ``heading`` with metric speed ``speed``.

    ``heading`` is measured from the body-1 u-direction.  Body-2 rates follow
    from the rolling map minus ``slip``, so the initial relative velocity is
    exactly ``slip`` (E2 components, m/s).
    """
    g1 = geometry_at(chart1, *body1)
    g2 = geometry_at(chart2, *body2)
    du1 = speed * math.cos(heading) / g1.norm_u
    dv1 = speed * math.sin(heading) / g1.norm_v
    ex, ey = map_to_e2(psi, g1.norm_u * du1, g1.norm_v * dv1)
    du2 = (ex - slip[0]) / g2.norm_u
    dv2 = (ey - slip[1]) / g2.norm_v
    return ContactState(body1[0], body1[1], body2[0], body2[1], psi, du1, dv1, du2, dv2)


DriverAccel = Callable[[float, float, float, float, float], tuple[float, float]]


@dataclass
class RollingSystem:
    """Body 1 follows a time-parameterized geodesic; body 2 is slaved by rolling.

    State layout: (u1, v1, u2, v2, psi, du1, dv1).  ``driver_accel(t, u, v,
    du, dv)`` replaces the geodesic body-1 accelerations when given, which
    produces rolling along an arbitrary curve.
    """

    chart1: Chart
    chart2: Chart
    sigma: SigmaProfile
    driver_accel: Optional[DriverAccel] = None

    def __call__(self, t: float, y: np.ndarray) -> np.ndarray:
        g1 = geometry_at(self.chart1, y[0], y[1])
        g2 = geometry_at(self.chart2, y[2], y[3])
        ev = _rolling_from_geometry(g1, g2, y[4], y[5], y[6])
        if self.driver_accel is None:
            s, sd = sigma_eval(self.sigma, t)
            a1u, a1v = _geodesic_accel(g1, y[5], y[6], sd / s)
        else:
            a1u, a1v = self.driver_accel(t, y[0], y[1], y[5], y[6])
        return np.array([y[5], y[6], ev.du2, ev.dv2, ev.dpsi, a1u, a1v])


@dataclass
class RollingTrajectory:
    """Sampled rolling motion with body-2 rates recovered at every sample."""

    t: np.ndarray
    body1: np.ndarray  # columns u, v, du, dv
    body2: np.ndarray  # columns u, v, du, dv
    psi: np.ndarray


def simulate_rolling(state: ContactState, chart1: Chart, chart2: Chart, sigma: SigmaProfile,
                     t0: float, t1: float, step: float,
                     driver_accel: Optional[DriverAccel] = None) -> RollingTrajectory:
    """Integrate RollingSystem from ``state`` (its body-2 rates are ignored)."""
    system = RollingSystem(chart1, chart2, sigma, driver_accel)
    y0 = [state.u1, state.v1, state.u2, state.v2, state.psi, state.du1, state.dv1]
    traj = integrate(system, y0, t0, t1, step)
    return _resample(traj, chart1, chart2)


def _resample(traj: Trajectory, chart1: Chart, chart2: Chart) -> RollingTrajectory:
    y = traj.y
    du2 = np.empty(len(traj))
    dv2 = np.empty(len(traj))
    for i, row in enumerate(y):
        g1 = geometry_at(chart1, row[0], row[1])
        g2 = geometry_at(chart2, row[2], row[3])
        du2[i], dv2[i], _ = _rolling_from_geometry(g1, g2, row[4], row[5], row[6])
    body1 = np.column_stack([y[:, 0], y[:, 1], y[:, 5], y[:, 6]])
    body2 = np.column_stack([y[:, 2], y[:, 3], du2, dv2])
    return RollingTrajectory(traj.t, body1, body2, y[:, 4])


class GeodesicResidual(NamedTuple):
    rho_u: np.ndarray
    rho_v: np.ndarray

    def max_norm(self) -> float:
        return float(max(np.max(np.abs(self.rho_u)), np.max(np.abs(self.rho_v))))


def time_derivative(t, x) -> np.ndarray:
    """Fourth-order finite-difference derivative of samples ``x`` on grid ``t``.

    Uniform grids (the integrator output, up to rounding in the last step)
    use five-point central stencils with one-sided five-point stencils at the
    two ends on each side; anything else falls back to second order.
    """
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    n = len(t)
    h = np.diff(t)
    if n < 5 or np.max(np.abs(h - h[0])) > 1e-9 * abs(h[0]):
        return np.gradient(x, t, edge_order=2)
    h = h[0]
    d = np.empty_like(x)
    d[2:-2] = (x[:-4] - 8.0 * x[1:-3] + 8.0 * x[3:-1] - x[4:]) / (12.0 * h)
    d[0] = (-25.0 * x[0] + 48.0 * x[1] - 36.0 * x[2] + 16.0 * x[3] - 3.0 * x[4]) / (12.0 * h)
    d[1] = (-3.0 * x[0] - 10.0 * x[1] + 18.0 * x[2] - 6.0 * x[3] + x[4]) / (12.0 * h)
    d[-1] = (25.0 * x[-1] - 48.0 * x[-2] + 36.0 * x[-3] - 16.0 * x[-4] + 3.0 * x[-5]) / (12.0 * h)
    d[-2] = (3.0 * x[-1] + 10.0 * x[-2] - 18.0 * x[-3] + 6.0 * x[-4] - x[-5]) / (12.0 * h)
    return d


def _second_derivatives(t, du, dv):
    return time_derivative(t, du), time_derivative(t, dv)


def geodesic_residual(chart: Chart, t, curve, sigma: SigmaProfile) -> GeodesicResidual:
    """Left-hand sides of the time-parameterized geodesic equations along a sampled curve.

    ``curve`` has columns (u, v, du, dv).  Second derivatives come from
    finite differences of the stored rates, not from any right-hand side.
    """
    t = np.asarray(t, dtype=float)
    curve = np.asarray(curve, dtype=float)
    if len(t) < 3:
        raise InvalidParameterError("need at least 3 samples to difference a trajectory")
    u, v, du, dv = curve.T
    ddu, ddv = _second_derivatives(t, du, dv)
    rho_u = np.empty_like(t)
    rho_v = np.empty_like(t)
    for i in range(len(t)):
        s, sd = sigma_eval(sigma, float(t[i]))
        g = geometry_at(chart, float(u[i]), float(v[i]))
        cu, cv = _geodesic_accel(g, float(du[i]), float(dv[i]), sd / s)
        # ddu - (k du - Gamma terms) == ddu - k du + Gamma terms
        rho_u[i] = (ddu[i] - cu) / (s * s)
        rho_v[i] = (ddv[i] - cv) / (s * s)
    return GeodesicResidual(rho_u, rho_v)


def corollary_check(trajectory: RollingTrajectory, chart2: Chart, sigma: SigmaProfile,
                    trim: int = 0) -> float:
    """Max-norm geodesic residual of the body-2 contact curve.

    ``trim`` drops that many samples at each end (where one-sided differences
    are used).
    """
    res = geodesic_residual(chart2, trajectory.t, trajectory.body2, sigma)
    if trim:
        res = GeodesicResidual(res.rho_u[trim:-trim], res.rho_v[trim:-trim])
    return res.max_norm()


def curve_points(chart: Chart, curve) -> np.ndarray:
    """Cartesian points f(u, v) of a sampled curve (columns u, v, ...)."""
    curve = np.asarray(curve, dtype=float)
    return np.array([chart.jet(float(u), float(v))[0] for u, v in curve[:, :2]])


def geodesic_curvature(chart: Chart, t, curve, normal_sign: float = 1.0) -> np.ndarray:
    """Signed geodesic curvature of a sampled surface curve.

    The curve acceleration is assembled from the chart's second partials and
    finite-difference second derivatives; its component along n x T gives
    kappa_g.  ``normal_sign=-1`` measures it against the inward normal, which
    is the convention that makes the two contact curves of a rolling pair
    agree (their outward normals are opposite).
    """
    t = np.asarray(t, dtype=float)
    curve = np.asarray(curve, dtype=float)
    if len(t) < 3:
        raise InvalidParameterError("need at least 3 samples to difference a trajectory")
    u, v, du, dv = curve.T
    ddu, ddv = _second_derivatives(t, du, dv)
    kappa = np.empty_like(t)
    for i in range(len(t)):
        _, fu, fv, fuu, fuv, fvv = (np.array(a) for a in chart.jet(float(u[i]), float(v[i])))
        vel = fu * du[i] + fv * dv[i]
        speed = float(np.linalg.norm(vel))
        if speed < 1e-12:
            raise InvalidParameterError(f"zero speed at sample {i}; geodesic curvature undefined")
        acc = fu * ddu[i] + fv * ddv[i] + fuu * du[i] ** 2 + 2 * fuv * du[i] * dv[i] + fvv * dv[i] ** 2
        n = np.cross(fu, fv)
        n *= normal_sign / np.linalg.norm(n)
        kappa[i] = float(acc @ np.cross(n, vel)) / speed**3
    return kappa


def plane_deviation(points, through=None) -> float:
    """Max distance of ``points`` from their best-fit plane.

    With ``through`` given, the plane is constrained to contain that point
    (e.g. the sphere centre, so a small deviation means a great circle).
    """
    p = np.asarray(points, dtype=float)
    origin = p.mean(axis=0) if through is None else np.asarray(through, dtype=float)
    q = p - origin
    normal = np.linalg.svd(q, full_matrices=False)[2][-1]
    return float(np.max(np.abs(q @ normal)))
