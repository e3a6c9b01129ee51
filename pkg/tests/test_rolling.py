import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from geocontact.contact import ContactState, relative_velocity
from geocontact.errors import InvalidParameterError
from geocontact.geodesic import SigmaProfile
from geocontact.rolling import (
    corollary_check,
    curve_points,
    geodesic_curvature,
    geodesic_residual,
    initial_state,
    plane_deviation,
    rolling_map,
    rolling_rates,
    simulate_rolling,
    time_derivative,
)
from geocontact.surface import cylinder_chart, ellipsoid_chart, sphere_chart

from .conftest import ELLIPSOID_RADII, HALF_PI

polar = st.floats(0.2, math.pi - 0.2)
angle = st.floats(-math.pi, math.pi)
rate = st.floats(-3.0, 3.0)


def test_zero_rates_give_zero(finger, ball):
    assert tuple(rolling_rates(ContactState(1.0, 0.2, 2.0, 0.1, 0.4), finger, ball)) == (0.0, 0.0, 0.0)


def test_equal_spheres_mirror_rates():
    c = sphere_chart(1.0)
    ev = rolling_rates(ContactState(HALF_PI, 0.0, HALF_PI, 0.0, 0.0, 0.3, 0.7), c, c)
    # psi = 0 maps (x, y) to (x, -y)
    assert ev.du2 == pytest.approx(0.3) and ev.dv2 == pytest.approx(-0.7)


@given(polar, angle, polar, angle, angle, rate, rate)
def test_rolling_rates_cancel_slip(u1, v1, u2, v2, psi, du1, dv1):
    finger, egg = sphere_chart(0.04), ellipsoid_chart(*ELLIPSOID_RADII)
    s = ContactState(u1, v1, u2, v2, psi, du1, dv1)
    ev = rolling_rates(s, finger, egg)
    rm = relative_velocity(s.with_rates(du1, dv1, ev.du2, ev.dv2), finger, egg)
    assert abs(rm.v_rel_x) < 1e-12 and abs(rm.v_rel_y) < 1e-12


def test_rolling_closure_over_time(finger, ball):
    s = initial_state(finger, ball, (HALF_PI, 0.0), (math.pi / 6, math.pi / 6), math.pi, HALF_PI, 1.0)
    traj = simulate_rolling(s, finger, ball, SigmaProfile((1.0, 0.2, -0.02)), 0.0, 0.2, 1e-4)
    worst = 0.0
    for i in range(len(traj.t)):
        state = ContactState(*traj.body1[i, :2], *traj.body2[i, :2], traj.psi[i],
                             *traj.body1[i, 2:], *traj.body2[i, 2:])
        worst = max(worst, float(np.linalg.norm(relative_velocity(state, finger, ball).velocity)))
    assert worst < 1e-10


def test_contact_paths_have_equal_arc_length(finger, ball):
    s = initial_state(finger, ball, (HALF_PI, 0.0), (1.0, 0.5), math.pi, 0.8, 1.0)
    traj = simulate_rolling(s, finger, ball, SigmaProfile.constant(1.0), 0.0, 0.3, 1e-4)

    def length(r, c):
        speed = r * np.hypot(c[:, 2], np.sin(c[:, 0]) * c[:, 3])
        return float(np.sum(0.5 * (speed[1:] + speed[:-1]) * np.diff(traj.t)))

    l1, l2 = length(0.04, traj.body1), length(0.1, traj.body2)
    assert l1 == pytest.approx(0.3, rel=1e-9)
    assert l2 == pytest.approx(l1, rel=1e-8)


def test_corollary_on_sphere_pair(finger, ball):
    prof = SigmaProfile((1.0, 0.2, -0.02))
    s = initial_state(finger, ball, (HALF_PI, 0.0), (2 * math.pi / 3, math.pi / 6), math.pi, HALF_PI, 1.0)
    traj = simulate_rolling(s, finger, ball, prof, 0.0, 0.2, 1e-4)
    assert corollary_check(traj, ball, prof) < 1e-6


def test_flat_pair_residual_vanishes():
    # two cylinders: every geodesic chart rate is linear, so the residual is round-off
    c = cylinder_chart(0.1)
    prof = SigmaProfile.constant(1.0)
    s = initial_state(c, c, (0.0, 0.0), (0.0, 0.0), 0.0, math.pi / 4, 1.0)
    traj = simulate_rolling(s, c, c, prof, 0.0, 0.5, 1e-3)
    assert corollary_check(traj, c, prof) < 1e-9


def test_residual_needs_three_samples(ball):
    with pytest.raises(InvalidParameterError):
        geodesic_residual(ball, [0.0, 1.0], np.ones((2, 4)), SigmaProfile.constant(1.0))


def test_residual_detects_non_geodesic(ball):
    # latitude circle u = pi/3, v = t: not a geodesic
    t = np.linspace(0, 1, 201)
    curve = np.column_stack([np.full_like(t, math.pi / 3), t, np.zeros_like(t), np.ones_like(t)])
    res = geodesic_residual(ball, t, curve, SigmaProfile.constant(1.0))
    # Gamma^1_vv = -sin cos, so rho_u = -sin(pi/3) cos(pi/3)
    assert np.max(np.abs(res.rho_u + math.sin(math.pi / 3) * math.cos(math.pi / 3))) < 1e-10


def test_latitude_circle_curvature(ball):
    t = np.linspace(0, 1, 201)
    curve = np.column_stack([np.full_like(t, math.pi / 3), t, np.zeros_like(t), np.ones_like(t)])
    k = geodesic_curvature(ball, t, curve)
    # on a sphere of radius r a latitude circle has |kappa_g| = cot(u) / r
    assert np.max(np.abs(np.abs(k) - 10.0 / math.tan(math.pi / 3))) < 1e-4


def test_great_circle_curvature_zero(ball):
    t = np.linspace(0, 1, 201)
    curve = np.column_stack([np.full_like(t, HALF_PI), t, np.zeros_like(t), np.ones_like(t)])
    assert np.max(np.abs(geodesic_curvature(ball, t, curve))) < 1e-12


def test_curvature_zero_speed(ball):
    t = np.linspace(0, 1, 5)
    curve = np.column_stack([np.full_like(t, 1.0), t, np.zeros_like(t), np.zeros_like(t)])
    with pytest.raises(InvalidParameterError):
        geodesic_curvature(ball, t, curve)


def test_swapped_roles_keep_rolling(finger, ball):
    # object drives the finger: swapping the charts is legal since R_psi is an involution
    s = initial_state(ball, finger, (1.0, 0.3), (HALF_PI, 0.0), math.pi, 0.5, 1.0)
    traj = simulate_rolling(s, ball, finger, SigmaProfile.constant(1.0), 0.0, 0.1, 1e-4)
    assert plane_deviation(curve_points(ball, traj.body1), through=(0, 0, 0)) < 1e-10
    # the follower finger curve is a geodesic too on a sphere pair
    assert plane_deviation(curve_points(finger, traj.body2), through=(0, 0, 0)) < 1e-10


def test_rolling_map_consistent_with_rolling_rates(finger, egg):
    s = ContactState(1.2, 0.4, 2.0, 0.7, 0.9)
    (du1, dv1), (du2, dv2) = rolling_map((0.3, -0.5), s, finger, egg)
    ev = rolling_rates(s.with_rates(du1, dv1, 0, 0), finger, egg)
    assert (ev.du2, ev.dv2) == pytest.approx((du2, dv2), abs=1e-12)


def test_rolling_map_sphere_pair_closed_form(finger, ball):
    # rolling a sphere of radius r1 on r2 with angular rate w: contact moves at w / (1/r1 + 1/r2)
    s = ContactState(HALF_PI, 0.0, HALF_PI, 0.0, math.pi)
    (du1, dv1), _ = rolling_map((1.0, 0.0), s, finger, ball)
    speed = math.hypot(0.04 * du1, 0.04 * dv1)
    assert speed == pytest.approx(1.0 / (1 / 0.04 + 1 / 0.1), rel=1e-12)


@pytest.mark.parametrize("h", [1e-2, 5e-3])
def test_time_derivative_fourth_order(h):
    t = np.arange(0.0, 1.0 + h / 2, h)
    err = np.max(np.abs(time_derivative(t, np.sin(3 * t)) - 3 * np.cos(3 * t)))
    assert err < 50 * h**4 * 81


def test_time_derivative_order_ratio():
    errs = []
    for h in (1e-2, 5e-3):
        t = np.arange(0.0, 1.0 + h / 2, h)
        errs.append(np.max(np.abs(time_derivative(t, np.exp(t)) - np.exp(t))))
    assert errs[0] / errs[1] == pytest.approx(16, rel=0.2)


def test_time_derivative_nonuniform_fallback():
    t = np.array([0.0, 0.1, 0.3, 0.6, 1.0, 1.5])
    np.testing.assert_allclose(time_derivative(t, 2 * t + 1), 2.0, atol=1e-12)


def test_plane_deviation_examples():
    circle = np.column_stack([np.cos(np.linspace(0, 3, 50)), np.sin(np.linspace(0, 3, 50)), np.zeros(50)])
    assert plane_deviation(circle) < 1e-15
    assert plane_deviation(circle + [0, 0, 1], through=(0, 0, 0)) > 0.1
