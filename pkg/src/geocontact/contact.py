"""Two-body contact configuration and relative contact kinematics.

Body 1 is the manipulating body (fingertip), body 2 the manipulated object.
All relative quantities are tangential components in the object's
surface-following frame E2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .surface import Chart, SurfaceGeometry, frame_rotation_rate, geometry_at


def wrap_angle(a: float) -> float:
    """Map an angle to (-pi, pi]."""
    w = math.remainder(a, 2.0 * math.pi)
    return math.pi if w == -math.pi else w


@dataclass(frozen=True)
class ContactState:
    u1: float
    v1: float
    u2: float
    v2: float
    psi: float
    du1: float = 0.0
    dv1: float = 0.0
    du2: float = 0.0
    dv2: float = 0.0
    dpsi: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "psi", wrap_angle(self.psi))

    @property
    def rates(self) -> tuple[float, float, float, float]:
        return (self.du1, self.dv1, self.du2, self.dv2)

    def with_rates(self, du1, dv1, du2, dv2) -> "ContactState":
        return replace(self, du1=du1, dv1=dv1, du2=du2, dv2=dv2)

    def to_array(self) -> np.ndarray:
        """ODE state layout: (u1, v1, u2, v2, psi, du1, dv1, du2, dv2)."""
        return np.array([self.u1, self.v1, self.u2, self.v2, self.psi,
                         self.du1, self.dv1, self.du2, self.dv2])

    @classmethod
    def from_array(cls, y, dpsi: float = 0.0) -> "ContactState":
        return cls(*(float(x) for x in y[:9]), dpsi=dpsi)

    def check(self, chart1: Chart, chart2: Chart) -> None:
        chart1.check_domain(self.u1, self.v1)
        chart2.check_domain(self.u2, self.v2)


@dataclass(frozen=True)
class RelativeMotion:
    v_rel_x: float
    v_rel_y: float
    a_rel_x: Optional[float] = None
    a_rel_y: Optional[float] = None

    @property
    def velocity(self) -> np.ndarray:
        return np.array([self.v_rel_x, self.v_rel_y])

    @property
    def acceleration(self) -> np.ndarray:
        return np.array([self.a_rel_x, self.a_rel_y])


def rotation_psi(psi: float) -> np.ndarray:
    """Matrix taking E1 components to E2 components (normals are opposite)."""
    c, s = math.cos(psi), math.sin(psi)
    return np.array([[c, -s, 0.0], [-s, -c, 0.0], [0.0, 0.0, -1.0]])


def map_to_e2(psi: float, x: float, y: float) -> tuple[float, float]:
    """Tangential block of rotation_psi applied to (x, y)."""
    c, s = math.cos(psi), math.sin(psi)
    return c * x - s * y, -s * x - c * y


def tangential_velocity(g1: SurfaceGeometry, g2: SurfaceGeometry, psi: float,
                        du1: float, dv1: float, du2: float, dv2: float) -> tuple[float, float]:
    """v_rel from precomputed geometries; see relative_velocity."""
    ex, ey = map_to_e2(psi, g1.norm_u * du1, g1.norm_v * dv1)
    return ex - g2.norm_u * du2, ey - g2.norm_v * dv2


def covariant_rates(g: SurfaceGeometry, du: float, dv: float, ddu: float, ddv: float) -> tuple[float, float]:
    """(u'' + Gamma^1_jk u'^j u'^k, v'' + Gamma^2_jk u'^j u'^k) for one body."""
    c = g.christoffel
    au = ddu + c.u_uu * du * du + 2.0 * c.u_uv * du * dv + c.u_vv * dv * dv
    av = ddv + c.v_uu * du * du + 2.0 * c.v_uv * du * dv + c.v_vv * dv * dv
    return au, av


def spin_rate(g1: SurfaceGeometry, g2: SurfaceGeometry,
              du1: float, dv1: float, du2: float, dv2: float) -> float:
    """psi_dot for contact without spin about the normal: sum of both frame rotation rates."""
    return frame_rotation_rate(g1, du1, dv1) + frame_rotation_rate(g2, du2, dv2)


def relative_velocity(state: ContactState, chart1: Chart, chart2: Chart) -> RelativeMotion:
    """Tangential velocity of the body-1 contact frame relative to body 2, in E2."""
    g1 = geometry_at(chart1, state.u1, state.v1)
    g2 = geometry_at(chart2, state.u2, state.v2)
    vx, vy = tangential_velocity(g1, g2, state.psi, state.du1, state.dv1, state.du2, state.dv2)
    return RelativeMotion(vx, vy)


def relative_acceleration(state: ContactState, accels, chart1: Chart, chart2: Chart) -> RelativeMotion:
    """Tangential relative velocity and acceleration for given second derivatives.

    ``accels`` is (u1'', v1'', u2'', v2'').  The Coriolis term
    2 w_rel x v_e1 pairs a tangential angular velocity (no spin about the
    normal) with a tangential vector, so it only has a normal component and
    drops out of the two rows computed here.
    """
    ddu1, ddv1, ddu2, ddv2 = accels
    g1 = geometry_at(chart1, state.u1, state.v1)
    g2 = geometry_at(chart2, state.u2, state.v2)
    a1u, a1v = covariant_rates(g1, state.du1, state.dv1, ddu1, ddv1)
    a2u, a2v = covariant_rates(g2, state.du2, state.dv2, ddu2, ddv2)
    ax, ay = map_to_e2(state.psi, g1.norm_u * a1u, g1.norm_v * a1v)
    vx, vy = tangential_velocity(g1, g2, state.psi, state.du1, state.dv1, state.du2, state.dv2)
    return RelativeMotion(vx, vy, ax - g2.norm_u * a2u, ay - g2.norm_v * a2v)


def proportionality_residual(state: ContactState, sigma, t: float, chart1: Chart, chart2: Chart,
                             accels=None) -> float:
    """max |a_rel - (sigma_dot / sigma) v_rel| over the two tangential rows.

    When ``accels`` is omitted the second derivatives are generated by the
    time-parameterized geodesic equations of both bodies, in which case the
    residual vanishes up to rounding.
    """
    from .geodesic import geodesic_rhs, sigma_eval

    s, sd = sigma_eval(sigma, t)
    if accels is None:
        ddu1, ddv1 = geodesic_rhs(chart1, state.u1, state.v1, state.du1, state.dv1, s, sd)
        ddu2, ddv2 = geodesic_rhs(chart2, state.u2, state.v2, state.du2, state.dv2, s, sd)
        accels = (ddu1, ddv1, ddu2, ddv2)
    rm = relative_acceleration(state, accels, chart1, chart2)
    k = sd / s
    return max(abs(rm.a_rel_x - k * rm.v_rel_x), abs(rm.a_rel_y - k * rm.v_rel_y))
