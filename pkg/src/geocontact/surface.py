"""Parametric surface charts and the differential geometry the kinematics needs.

A chart maps surface coordinates (u, v) to a point in R^3.  Every chart here
is orthogonal (f_u . f_v = 0), which lets the Christoffel symbols be written
as single inner products divided by one squared norm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DegenerateChartError, DomainError, InvalidParameterError

Vec3 = tuple[float, float, float]
Jet = tuple[Vec3, Vec3, Vec3, Vec3, Vec3, Vec3]

DEGENERATE_TOL = 1e-12
ORTHOGONALITY_RTOL = 1e-8


def _dot(a: Sequence[float], b: Sequence[float]) -> float:
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def _cross(a: Sequence[float], b: Sequence[float]) -> Vec3:
    return (
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )


@dataclass(frozen=True)
class Chart:
    """Orthogonal parametric surface patch.

    ``jet(u, v)`` returns ``(f, f_u, f_v, f_uu, f_uv, f_vv)`` as 3-tuples; the
    per-derivative accessors below are thin wrappers around it.  ``domain`` is
    the open box ``((u_min, u_max), (v_min, v_max))``; bounds may be infinite.
    """

    name: str
    jet: Callable[[float, float], Jet] = field(repr=False)
    domain: tuple[tuple[float, float], tuple[float, float]]
    params: dict = field(default_factory=dict)

    def contains(self, u: float, v: float) -> bool:
        (u0, u1), (v0, v1) = self.domain
        return u0 < u < u1 and v0 < v < v1

    def check_domain(self, u: float, v: float) -> None:
        if not (math.isfinite(u) and math.isfinite(v)) or not self.contains(u, v):
            raise DomainError(f"({u:.6g}, {v:.6g}) outside {self.name} chart domain {self.domain}")

    def eval(self, u: float, v: float) -> np.ndarray:
        return np.array(self.jet(u, v)[0])

    def du(self, u: float, v: float) -> np.ndarray:
        return np.array(self.jet(u, v)[1])

    def dv(self, u: float, v: float) -> np.ndarray:
        return np.array(self.jet(u, v)[2])

    def duu(self, u: float, v: float) -> np.ndarray:
        return np.array(self.jet(u, v)[3])

    def duv(self, u: float, v: float) -> np.ndarray:
        return np.array(self.jet(u, v)[4])

    def dvv(self, u: float, v: float) -> np.ndarray:
        return np.array(self.jet(u, v)[5])


@dataclass(frozen=True)
class Christoffel:
    """Second-kind Christoffel symbols of an orthogonal chart.

    ``u_uv`` is Gamma^1_12 (= Gamma^1_21), ``v_uu`` is Gamma^2_11, and so on:
    the first letter names the upper index, the pair the lower indices.
    """

    u_uu: float
    u_uv: float
    u_vv: float
    v_uu: float
    v_uv: float
    v_vv: float

    def as_array(self) -> np.ndarray:
        return np.array([self.u_uu, self.u_uv, self.u_vv, self.v_uu, self.v_uv, self.v_vv])


@dataclass(frozen=True)
class SurfaceGeometry:
    norm_u: float
    norm_v: float
    normal: np.ndarray
    christoffel: Christoffel


def geometry_at(chart: Chart, u: float, v: float) -> SurfaceGeometry:
    """Metric norms, unit normal and Christoffel symbols at (u, v)."""
    chart.check_domain(u, v)
    _, fu, fv, fuu, fuv, fvv = chart.jet(u, v)
    n = _cross(fu, fv)
    n_norm = math.sqrt(_dot(n, n))
    if n_norm < DEGENERATE_TOL:
        raise DegenerateChartError(f"{chart.name} chart degenerate at ({u:.6g}, {v:.6g})")
    e = _dot(fu, fu)
    g = _dot(fv, fv)
    gamma = Christoffel(
        u_uu=_dot(fu, fuu) / e,
        u_uv=_dot(fu, fuv) / e,
        u_vv=_dot(fu, fvv) / e,
        v_uu=_dot(fv, fuu) / g,
        v_uv=_dot(fv, fuv) / g,
        v_vv=_dot(fv, fvv) / g,
    )
    normal = np.array(n) / n_norm
    return SurfaceGeometry(math.sqrt(e), math.sqrt(g), normal, gamma)


def frame_rotation_rate(g: SurfaceGeometry, du: float, dv: float) -> float:
    """Rate at which x_hat turns toward y_hat along a curve with rates (du, dv).

    This is the torsion form applied to the metric-scaled velocity:
    y_hat . d(x_hat)/dt = (|f_v| / |f_u|) (Gamma^2_11 du + Gamma^2_12 dv).
    """
    c = g.christoffel
    return g.norm_v / g.norm_u * (c.v_uu * du + c.v_uv * dv)


def curvature_form(chart: Chart, u: float, v: float) -> np.ndarray:
    """Second fundamental form expressed in the normalized (x_hat, y_hat) frame."""
    chart.check_domain(u, v)
    _, fu, fv, fuu, fuv, fvv = chart.jet(u, v)
    n = np.array(_cross(fu, fv))
    n_norm = float(np.linalg.norm(n))
    if n_norm < DEGENERATE_TOL:
        raise DegenerateChartError(f"{chart.name} chart degenerate at ({u:.6g}, {v:.6g})")
    n /= n_norm
    su = math.sqrt(_dot(fu, fu))
    sv = math.sqrt(_dot(fv, fv))
    l_, m_, n_ = float(n @ fuu), float(n @ fuv), float(n @ fvv)
    return np.array([[l_ / su**2, m_ / (su * sv)], [m_ / (su * sv), n_ / sv**2]])


def frame_at(chart: Chart, u: float, v: float) -> np.ndarray:
    """Columns x_hat, y_hat, n_hat of the surface-following frame (body coordinates)."""
    _, fu, fv, _, _, _ = chart.jet(u, v)
    x = np.array(fu) / math.sqrt(_dot(fu, fu))
    y = np.array(fv) / math.sqrt(_dot(fv, fv))
    return np.column_stack([x, y, np.cross(x, y)])


# -- built-in charts ---------------------------------------------------------


def sphere_chart(radius: float) -> Chart:
    """f(u, v) = r (sin u cos v, sin u sin v, cos u); poles excluded, v periodic."""
    if not radius > 0:
        raise InvalidParameterError(f"sphere radius must be positive, got {radius}")
    r = float(radius)

    def jet(u, v):
        su, cu, sv, cv = math.sin(u), math.cos(u), math.sin(v), math.cos(v)
        return (
            (r * su * cv, r * su * sv, r * cu),
            (r * cu * cv, r * cu * sv, -r * su),
            (-r * su * sv, r * su * cv, 0.0),
            (-r * su * cv, -r * su * sv, -r * cu),
            (-r * cu * sv, r * cu * cv, 0.0),
            (-r * su * cv, -r * su * sv, 0.0),
        )

    return Chart("sphere", jet, ((0.0, math.pi), (-math.inf, math.inf)), {"radius": r})


def cylinder_chart(radius: float) -> Chart:
    """f(u, v) = (r cos u, r sin u, v)."""
    if not radius > 0:
        raise InvalidParameterError(f"cylinder radius must be positive, got {radius}")
    r = float(radius)
    zero = (0.0, 0.0, 0.0)

    def jet(u, v):
        su, cu = math.sin(u), math.cos(u)
        return (
            (r * cu, r * su, v),
            (-r * su, r * cu, 0.0),
            (0.0, 0.0, 1.0),
            (-r * cu, -r * su, 0.0),
            zero,
            zero,
        )

    return Chart("cylinder", jet, ((-math.inf, math.inf), (-math.inf, math.inf)), {"radius": r})


def ellipsoid_chart(r1: float, r2: float, r3: float) -> Chart:
    """Orthogonal ellipsoid chart with semi-axes r1 > r2 > r3 > 0.

    x = r1 cos u sqrt(P(v)) / D,  y = r2 sin u cos v,  z = r3 sin v sqrt(Q(u)) / D
    with P = r1^2 - r2^2 sin^2 v - r3^2 cos^2 v, Q = r1^2 sin^2 u + r2^2 cos^2 u - r3^2
    and D = sqrt(r1^2 - r3^2).  P >= r1^2 - r2^2 and Q >= r2^2 - r3^2, so both
    radicands stay positive for every (u, v); the chart is only singular at
    (k pi, +-pi/2), where geometry_at raises DegenerateChartError.
    """
    if not (r1 > r2 > r3 > 0):
        raise InvalidParameterError(f"ellipsoid radii must satisfy r1 > r2 > r3 > 0, got {(r1, r2, r3)}")
    a, b, c = float(r1), float(r2), float(r3)
    d = math.sqrt(a * a - c * c)
    kx, kz = a / d, c / d
    bc2 = b * b - c * c
    ab2 = a * a - b * b

    def jet(u, v):
        su, cu, sv, cv = math.sin(u), math.cos(u), math.sin(v), math.cos(v)
        p = a * a - b * b * sv * sv - c * c * cv * cv
        q = a * a * su * su + b * b * cu * cu - c * c
        if p <= 0.0 or q <= 0.0:
            raise DomainError(f"ellipsoid radicand non-positive at ({u:.6g}, {v:.6g})")
        gp = math.sqrt(p)
        p1 = -2.0 * bc2 * sv * cv
        p2 = -2.0 * bc2 * (cv * cv - sv * sv)
        g1 = p1 / (2.0 * gp)
        g2 = p2 / (2.0 * gp) - p1 * p1 / (4.0 * gp**3)
        hq = math.sqrt(q)
        q1 = 2.0 * ab2 * su * cu
        q2 = 2.0 * ab2 * (cu * cu - su * su)
        h1 = q1 / (2.0 * hq)
        h2 = q2 / (2.0 * hq) - q1 * q1 / (4.0 * hq**3)
        return (
            (kx * cu * gp, b * su * cv, kz * sv * hq),
            (-kx * su * gp, b * cu * cv, kz * sv * h1),
            (kx * cu * g1, -b * su * sv, kz * cv * hq),
            (-kx * cu * gp, -b * su * cv, kz * sv * h2),
            (-kx * su * g1, -b * cu * sv, kz * cv * h1),
            (kx * cu * g2, -b * su * cv, -kz * sv * hq),
        )

    return Chart(
        "ellipsoid", jet, ((-math.inf, math.inf), (-math.inf, math.inf)), {"radii": (a, b, c)}
    )


def finite_difference_chart(
    fn: Callable[[float, float], Sequence[float]],
    step: float = 1e-4,
    domain: tuple[tuple[float, float], tuple[float, float]] = ((-math.inf, math.inf), (-math.inf, math.inf)),
    name: str = "finite-difference",
) -> Chart:
    """Chart whose partials come from central differences of ``fn``.

    Second partials use the three-point and four-corner stencils, i.e. nested
    central differences.  Every stencil point must lie inside ``domain``.
    """
    if not step > 0:
        raise InvalidParameterError(f"finite-difference step must be positive, got {step}")
    h = float(step)
    (u0, u1), (v0, v1) = domain

    def f(u, v):
        return np.asarray(fn(u, v), dtype=float)

    def jet(u, v):
        if not (u0 < u - h and u + h < u1 and v0 < v - h and v + h < v1):
            raise DomainError(f"stencil at ({u:.6g}, {v:.6g}) leaves the domain {domain}")
        c = f(u, v)
        up, um, vp, vm = f(u + h, v), f(u - h, v), f(u, v + h), f(u, v - h)
        fuv = (f(u + h, v + h) - f(u + h, v - h) - f(u - h, v + h) + f(u - h, v - h)) / (4 * h * h)
        return tuple(
            tuple(float(x) for x in arr)
            for arr in (
                c,
                (up - um) / (2 * h),
                (vp - vm) / (2 * h),
                (up - 2 * c + um) / (h * h),
                fuv,
                (vp - 2 * c + vm) / (h * h),
            )
        )

    return Chart(name, jet, domain, {"step": h})


def sample_grid(chart: Chart, n: int = 20, margin: float = 0.02) -> tuple[np.ndarray, np.ndarray]:
    """n x n grid strictly inside the domain.

    Infinite bounds belong to angle-like coordinates and are clipped to one
    period, (-pi, pi).
    """
    axes = []
    for lo, hi in chart.domain:
        lo = max(lo, -math.pi) if math.isinf(lo) else lo
        hi = min(hi, math.pi) if math.isinf(hi) else hi
        pad = margin * (hi - lo)
        axes.append(np.linspace(lo + pad, hi - pad, n))
    return np.meshgrid(axes[0], axes[1], indexing="ij")


def check_orthogonality(chart: Chart, n: int = 20, rtol: float = ORTHOGONALITY_RTOL) -> float:
    """Worst |f_u . f_v| / (|f_u| |f_v|) over an n x n grid; raises if above ``rtol``.

    Grid points where the chart is singular are skipped.
    """
    uu, vv = sample_grid(chart, n)
    worst = 0.0
    for u, v in zip(uu.ravel(), vv.ravel()):
        try:
            _, fu, fv, _, _, _ = chart.jet(float(u), float(v))
        except DomainError:
            continue
        nu, nv = math.sqrt(_dot(fu, fu)), math.sqrt(_dot(fv, fv))
        cr = _cross(fu, fv)
        if math.sqrt(_dot(cr, cr)) < DEGENERATE_TOL:
            continue
        worst = max(worst, abs(_dot(fu, fv)) / (nu * nv))
    if worst > rtol:
        raise InvalidParameterError(
            f"{chart.name} chart is not orthogonal: |f_u.f_v| reaches {worst:.3g} x |f_u||f_v|"
        )
    return worst


def build_chart(kind: str, **params) -> Chart:
    """Construct a built-in chart by name (used by scenario loading)."""
    if kind == "sphere":
        return sphere_chart(params["radius"])
    if kind == "cylinder":
        return cylinder_chart(params["radius"])
    if kind == "ellipsoid":
        return ellipsoid_chart(*params["radii"])
    raise InvalidParameterError(f"unknown chart kind {kind!r}")
