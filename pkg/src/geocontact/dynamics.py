"""Penalty-contact rigid-body simulation of kinematically driven fingertips.

The object is a free rigid body under contact forces only (no gravity).  Each
fingertip is placed from its contact planner: the planner's object-curve
coordinates are taken in a world-aligned frame at the object's centre, and the
finger sits a fixed penetration inside the surface so the penalty normal force
equals the requested grasp force.  When the object spins, the contact point
slips; friction (viscous, capped by the Coulomb cone) acts on both bodies and
the measured slip replaces the kinematic relative velocity in the planner's
slip feedback, closing the loop.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Sequence

import numpy as np

from .contact import ContactState, rotation_psi, spin_rate, tangential_velocity
from .errors import IntegrationError, InvalidParameterError
from .geodesic import ContactPairSystem, _modified_pair, _offsets, rk4_step, sigma_eval
from .surface import frame_at, geometry_at

OBJ = 13  # object block: position 3, quaternion 4, velocity 3, angular velocity 3
PLANNER = 9


# -- force laws ----------------------------------------------------------------


def penalty_normal_force(penetration: float, penetration_rate: float, k: float, c: float) -> float:
    """Spring-damper normal force, clamped so contact never pulls."""
    if not k > 0 or c < 0:
        raise InvalidParameterError(f"need k > 0 and c >= 0, got k={k}, c={c}")
    if penetration <= 0.0:
        return 0.0
    return max(0.0, k * penetration + c * penetration_rate)


def friction_force(slip, f_n: float, mu: float, viscous_gain: float) -> np.ndarray:
    """Tangential force opposing ``slip``: viscous below the cone, mu f_N on it."""
    s = np.asarray(slip, dtype=float)
    speed = float(np.hypot(s[0], s[1]))
    if speed == 0.0 or f_n <= 0.0:
        return np.zeros(2)
    magnitude = min(viscous_gain * speed, mu * f_n)
    return -magnitude * s / speed


class ContactForceRecord(NamedTuple):
    f_n: float
    f_tx: float
    f_ty: float
    saturated: bool

    @property
    def tangential(self) -> float:
        return math.hypot(self.f_tx, self.f_ty)


@dataclass(frozen=True)
class DynamicsParams:
    stiffness: float = 10_000.0
    damping: float = 1_000.0
    mu: float = 0.5
    viscous_gain: float = 1_000.0
    normal_force: float = 1.0

    @property
    def penetration(self) -> float:
        return self.normal_force / self.stiffness


# -- rigid body ----------------------------------------------------------------


def quat_to_matrix(q) -> np.ndarray:
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


def _quat_rate(q, omega):
    w, x, y, z = q
    ox, oy, oz = omega
    # 0.5 * (0, omega) (x) q with omega in world coordinates
    return 0.5 * np.array([
        -ox * x - oy * y - oz * z,
        ox * w + oy * z - oz * y,
        oy * w + oz * x - ox * z,
        oz * w + ox * y - oy * x,
    ])


@dataclass
class RigidBodyState:
    position: np.ndarray
    orientation: np.ndarray  # unit quaternion (w, x, y, z)
    velocity: np.ndarray
    angular_velocity: np.ndarray  # world frame
    mass: float
    inertia: np.ndarray  # body frame

    @classmethod
    def solid_sphere(cls, radius: float, mass: float) -> "RigidBodyState":
        i = 0.4 * mass * radius**2
        return cls(np.zeros(3), np.array([1.0, 0.0, 0.0, 0.0]), np.zeros(3), np.zeros(3),
                   float(mass), np.diag([i, i, i]))

    def rotation(self) -> np.ndarray:
        return quat_to_matrix(self.orientation)

    def momentum(self) -> tuple[np.ndarray, np.ndarray]:
        r = self.rotation()
        return self.mass * self.velocity, r @ self.inertia @ r.T @ self.angular_velocity

    def pack(self) -> np.ndarray:
        return np.concatenate([self.position, self.orientation, self.velocity, self.angular_velocity])

    def unpack(self, y) -> "RigidBodyState":
        q = np.array(y[3:7])
        return replace(self, position=np.array(y[0:3]), orientation=q / np.linalg.norm(q),
                       velocity=np.array(y[7:10]), angular_velocity=np.array(y[10:13]))


# -- world ---------------------------------------------------------------------


@dataclass
class World:
    """Object, one planner per fingertip, and the contact parameters.

    ``planner`` holds one contact-pair state row per fingertip in the layout
    of ContactState.to_array(); ``drives[i]`` integrates row i.
    """

    t: float
    body: RigidBodyState
    drives: Sequence[ContactPairSystem]
    planner: np.ndarray
    params: DynamicsParams = field(default_factory=DynamicsParams)

    def pack(self) -> np.ndarray:
        return np.concatenate([self.body.pack(), self.planner.ravel()])


class ContactSample(NamedTuple):
    record: ContactForceRecord
    slip: tuple[float, float]  # finger material velocity relative to object, E2 frame
    v_rel: tuple[float, float]  # measured relative velocity in the planner's convention
    force_world: np.ndarray  # force on the object
    torque_world: np.ndarray  # about the object centre
    planner_rates: tuple[float, float, float, float]


def _contact(drive: ContactPairSystem, t, row, body_y, params: DynamicsParams) -> ContactSample:
    rates = drive.effective_rates(t, row)
    g1 = geometry_at(drive.chart1, row[0], row[1])
    g2 = geometry_at(drive.chart2, row[2], row[3])
    f2, fu2, fv2 = (np.array(a) for a in drive.chart2.jet(row[2], row[3])[:3])
    x2, y2, n2 = fu2 / g2.norm_u, fv2 / g2.norm_v, g2.normal
    vx, vy = tangential_velocity(g1, g2, row[4], *rates)
    omega = body_y[10:13]
    surf = np.cross(omega, f2)
    # finger material velocity relative to the object at the contact point
    slip_w = -(vx * x2 + vy * y2) - surf
    slip = (float(slip_w @ x2), float(slip_w @ y2))
    v_meas = (-slip[0], -slip[1])

    # finger centre sits |f1| - penetration outside the object surface along n2
    pen = params.penetration
    pen_rate = 0.0
    f_n = penalty_normal_force(pen, pen_rate, params.stiffness, params.damping)
    f_finger = friction_force(slip, f_n, params.mu, params.viscous_gain)
    f_obj_t = -f_finger
    saturated = params.viscous_gain * math.hypot(*slip) >= params.mu * f_n and f_n > 0
    force = f_obj_t[0] * x2 + f_obj_t[1] * y2 - f_n * n2
    torque = np.cross(f2, force)
    rec = ContactForceRecord(f_n, float(f_obj_t[0]), float(f_obj_t[1]), bool(saturated))
    return ContactSample(rec, slip, v_meas, force, torque, rates)


def contact_samples(world: World) -> list[ContactSample]:
    y = world.body.pack()
    return [_contact(d, world.t, row, y, world.params) for d, row in zip(world.drives, world.planner)]


def _world_rhs(world: World):
    drives, params, body = world.drives, world.params, world.body
    inertia_b = body.inertia
    inv_mass = 1.0 / body.mass
    nf = len(drives)

    def rhs(t, y):
        dy = np.zeros_like(y)
        force = np.zeros(3)
        torque = np.zeros(3)
        for i, drive in enumerate(drives):
            row = y[OBJ + PLANNER * i: OBJ + PLANNER * (i + 1)]
            c = _contact(drive, t, row, y, params)
            force += c.force_world
            torque += c.torque_world
            s, sd = sigma_eval(drive.sigma, t)
            g1 = geometry_at(drive.chart1, row[0], row[1])
            g2 = geometry_at(drive.chart2, row[2], row[3])
            (a1u, a1v), (a2u, a2v) = _modified_pair(
                g1, g2, row[4], c.planner_rates, s, sd, drive.eta, v_rel=c.v_rel)
            au, av = _offsets(drive.disturbances, "acceleration", t)
            r = c.planner_rates
            dy[OBJ + PLANNER * i: OBJ + PLANNER * (i + 1)] = (
                r[0], r[1], r[2], r[3], spin_rate(g1, g2, *r), a1u + au, a1v + av, a2u, a2v)
        q = y[3:7] / np.linalg.norm(y[3:7])
        omega = y[10:13]
        rot = quat_to_matrix(q)
        i_w = rot @ inertia_b @ rot.T
        dy[0:3] = y[7:10]
        dy[3:7] = _quat_rate(q, omega)
        dy[7:10] = force * inv_mass
        dy[10:13] = np.linalg.solve(i_w, torque - np.cross(omega, i_w @ omega))
        return dy

    return rhs, nf


def step_dynamics(world: World, dt: float) -> World:
    """Advance object and planners by one RK4 step of size ``dt``."""
    if not dt > 0:
        raise InvalidParameterError(f"dt must be positive, got {dt}")
    rhs, nf = _world_rhs(world)
    try:
        y = rk4_step(rhs, world.t, world.pack(), dt)
    except IntegrationError:
        raise
    except (ArithmeticError, ValueError) as exc:
        raise IntegrationError(f"{type(exc).__name__}: {exc}", world.t) from exc
    if not np.all(np.isfinite(y)):
        raise IntegrationError("non-finite dynamics state", world.t + dt)
    return replace(world, t=world.t + dt, body=world.body.unpack(y[:OBJ]),
                   planner=y[OBJ:].reshape(nf, PLANNER).copy())


def fingertip_pose(world: World, i: int) -> tuple[np.ndarray, np.ndarray]:
    """World position and rotation of fingertip ``i`` implied by its planner row."""
    drive, row = world.drives[i], world.planner[i]
    st = ContactState.from_array(row)
    b1 = frame_at(drive.chart1, st.u1, st.v1)
    b2 = frame_at(drive.chart2, st.u2, st.v2)
    q = b2 @ rotation_psi(st.psi) @ b1.T
    f2 = drive.chart2.eval(st.u2, st.v2)
    f1 = drive.chart1.eval(st.u1, st.v1)
    centre = world.body.position + f2 - world.params.penetration * b2[:, 2] - q @ f1
    return centre, q
