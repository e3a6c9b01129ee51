import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from geocontact.errors import IntegrationError, InvalidParameterError
from geocontact.dynamics import (
    ContactForceRecord,
    DynamicsParams,
    RigidBodyState,
    World,
    contact_samples,
    fingertip_pose,
    friction_force,
    penalty_normal_force,
    quat_to_matrix,
    step_dynamics,
)
from geocontact.geodesic import ContactPairSystem, Disturbance, SigmaProfile
from geocontact.rolling import initial_state

from .conftest import HALF_PI

# -- force laws ----------------------------------------------------------------


def test_penalty_force_nominal():
    assert penalty_normal_force(1e-4, 0.0, 1e4, 1e3) == pytest.approx(1.0)


def test_penalty_force_separated():
    assert penalty_normal_force(-1e-3, -5.0, 1e4, 1e3) == 0.0
    assert penalty_normal_force(0.0, 1.0, 1e4, 1e3) == 0.0


def test_penalty_force_never_pulls():
    assert penalty_normal_force(1e-4, -0.01, 1e4, 1e3) == 0.0


@pytest.mark.parametrize("k,c", [(0.0, 1.0), (-1.0, 1.0), (1.0, -1.0), (float("nan"), 0.0)])
def test_penalty_force_rejects_parameters(k, c):
    with pytest.raises(InvalidParameterError):
        penalty_normal_force(1e-4, 0.0, k, c)


def test_friction_saturates_on_cone():
    f = friction_force((0.01, 0.0), 1.0, 0.5, 1e3)
    np.testing.assert_allclose(f, [-0.5, 0.0])


def test_friction_viscous_below_cone():
    np.testing.assert_allclose(friction_force((1e-4, 0.0), 1.0, 0.5, 1e3), [-0.1, 0.0])


def test_friction_zero_cases():
    assert np.all(friction_force((0.0, 0.0), 1.0, 0.5, 1e3) == 0)
    assert np.all(friction_force((1.0, 0.0), 0.0, 0.5, 1e3) == 0)


@given(st.floats(-1, 1), st.floats(-1, 1), st.floats(0, 10), st.floats(0, 2), st.floats(0, 1e4))
def test_friction_inside_cone_and_opposing(sx, sy, fn, mu, gain):
    f = friction_force((sx, sy), fn, mu, gain)
    assert np.hypot(*f) <= mu * fn * (1 + 1e-12) + 1e-300
    assert f @ np.array([sx, sy]) <= 0.0


def test_record_tangential():
    assert ContactForceRecord(1.0, 0.3, 0.4, False).tangential == pytest.approx(0.5)


def test_default_params_penetration():
    p = DynamicsParams()
    assert p.penetration == pytest.approx(1e-4)
    assert penalty_normal_force(p.penetration, 0.0, p.stiffness, p.damping) == pytest.approx(p.normal_force)


# -- rigid body ----------------------------------------------------------------


def test_quaternion_rotation_is_orthonormal():
    q = np.array([0.3, -0.5, 0.7, 0.4])
    r = quat_to_matrix(q / np.linalg.norm(q))
    np.testing.assert_allclose(r @ r.T, np.eye(3), atol=1e-15)
    assert np.linalg.det(r) == pytest.approx(1.0)


def test_quaternion_known_rotation():
    h = math.sqrt(0.5)
    np.testing.assert_allclose(quat_to_matrix([h, 0, 0, h]) @ [1, 0, 0], [0, 1, 0], atol=1e-15)


def _free_world(omega, inertia=(1.0, 2.0, 3.0)):
    body = RigidBodyState(np.zeros(3), np.array([1.0, 0, 0, 0]), np.array([0.1, -0.2, 0.3]),
                          np.array(omega, dtype=float), 2.0, np.diag(inertia))
    return World(0.0, body, [], np.zeros((0, 9)))


def test_free_body_conserves_momentum():
    w = _free_world([0.5, 1.0, -0.7])
    p0, l0 = w.body.momentum()
    for _ in range(1000):
        w = step_dynamics(w, 1e-3)
    p1, l1 = w.body.momentum()
    np.testing.assert_allclose(p1, p0, atol=1e-12)
    np.testing.assert_allclose(l1, l0, atol=1e-9)
    np.testing.assert_allclose(w.body.position, [0.1, -0.2, 0.3], atol=1e-12)
    assert np.linalg.norm(w.body.orientation) == pytest.approx(1.0, abs=1e-15)


def test_free_body_at_rest_stays_put():
    w = _free_world([0.0, 0.0, 0.0])
    w.body.velocity[:] = 0.0
    for _ in range(10):
        w = step_dynamics(w, 1e-2)
    np.testing.assert_array_equal(w.body.position, 0.0)
    np.testing.assert_array_equal(w.body.orientation, [1.0, 0, 0, 0])


def test_step_rejects_non_positive_dt():
    with pytest.raises(InvalidParameterError):
        step_dynamics(_free_world([0, 0, 0]), 0.0)


def test_step_reports_non_finite_state():
    w = _free_world([0, 0, 0])
    w.body.velocity[:] = np.nan
    with pytest.raises(IntegrationError):
        step_dynamics(w, 1e-3)


# -- grasp ---------------------------------------------------------------------


def _grasp(finger, ball, disturbances=()):
    sigma = SigmaProfile((1.0, 0.2, -0.02))
    placements = [(0.3886, 2.6556), (1.57, 2.0944), (1.57, 2.44 - math.pi)]
    drives, rows = [], []
    for i, b2 in enumerate(placements):
        drives.append(ContactPairSystem(finger, ball, sigma, 100.0, disturbances if i == 0 else ()))
        rows.append(initial_state(finger, ball, (HALF_PI, 0.0), b2, math.pi, HALF_PI, 1.0).to_array())
    return World(0.0, RigidBodyState.solid_sphere(0.1, 0.261), drives, np.array(rows))


def test_initial_grasp_forces(finger, ball):
    samples = contact_samples(_grasp(finger, ball))
    for s in samples:
        assert s.record.f_n == pytest.approx(1.0)
        assert s.record.tangential < 1e-12  # rolling start: no slip, no friction
        assert not s.record.saturated


def test_fingertip_pose_touches_object(finger, ball):
    w = _grasp(finger, ball)
    for i in range(3):
        centre, q = fingertip_pose(w, i)
        np.testing.assert_allclose(q @ q.T, np.eye(3), atol=1e-12)
        # finger surface overlaps the object by the penetration depth
        assert np.linalg.norm(centre) == pytest.approx(0.1 + 0.04 - 1e-4, abs=1e-12)


def test_grasp_momentum_balance(finger, ball):
    # object momentum change equals the contact impulse, integrated independently
    w = _grasp(finger, ball, (Disturbance("rate", (0.6, 1.0), 0.0, 1.0),))
    dt = 1e-4
    impulse = np.zeros(3)
    f_prev = sum(s.force_world for s in contact_samples(w))
    for _ in range(200):
        w = step_dynamics(w, dt)
        f_now = sum(s.force_world for s in contact_samples(w))
        impulse += 0.5 * dt * (f_prev + f_now)
        f_prev = f_now
    # trapezoid quadrature is second order; at this dt its error is ~4e-5 relative
    assert np.linalg.norm(w.body.momentum()[0] - impulse) < 1e-4 * np.linalg.norm(impulse)


def test_disturbed_contact_saturates_on_cone(builtin_run):
    result, _ = builtin_run("dynamic_case1")
    log = result.logs[0]
    ft = np.hypot(log.column("f_tx"), log.column("f_ty"))
    fn = log.column("f_N")
    assert np.all(ft <= 0.5 * fn + 1e-12)
    assert np.max(ft) == pytest.approx(0.5, abs=1e-9)


def test_slip_small_before_disturbance(builtin_run):
    result, _ = builtin_run("dynamic_case1")
    log = result.logs[0]
    before = log.t < 2.0
    assert np.max(log.slip_speed()[before]) < 1e-3


def test_slip_decays_after_disturbance(builtin_run):
    result, _ = builtin_run("dynamic_case1")
    log = result.logs[0]
    speed = log.slip_speed()[log.t >= 2.5]
    below = np.argmax(speed < 1e-3)
    assert below > 0
    # monotone decay (5 % ripple) down to the threshold, then it stays under it
    head = speed[: below + 1]
    assert np.all(head[1:] <= head[:-1] * 1.05)
    assert np.max(speed[below:]) < 1e-3


def test_object_log_quaternion_unit(builtin_run):
    result, _ = builtin_run("dynamic_case1")
    q = np.column_stack([result.object_log.column(c) for c in ("qw", "qx", "qy", "qz")])
    np.testing.assert_allclose(np.linalg.norm(q, axis=1), 1.0, atol=1e-12)
