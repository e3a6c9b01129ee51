"""Path-speed profiles, geodesic right-hand sides and a fixed-step RK4 integrator.

The time-parameterized geodesic equation for one body reads

    u'' = (sigma_dot / sigma) u' - Gamma^1_jk u'^j u'^k
    v'' = (sigma_dot / sigma) v' - Gamma^2_jk u'^j u'^k

where sigma = ds/dt.  The contraction-modified version adds slip feedback
eta sigma^2 M2^-1 v_rel to the object (body 2) rates so that the relative
velocity obeys a_rel = (sigma_dot / sigma - eta sigma^2) v_rel.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np

from .contact import ContactState, covariant_rates, spin_rate, tangential_velocity
from .errors import (
    GeoContactError,
    IntegrationError,
    InvalidParameterError,
    SingularProfileError,
)
from .surface import Chart, SurfaceGeometry, geometry_at

SIGMA_MIN = 1e-9
MAX_SIGMA_DEGREE = 5


class ContractionWarning(UserWarning):
    """sigma_dot / sigma - eta sigma^2 is not negative; decay is not guaranteed."""


@dataclass(frozen=True)
class SigmaProfile:
    """Polynomial sigma(t) = sum c_k t^k with ascending coefficients."""

    coefficients: tuple[float, ...]

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.coefficients)
        if not coeffs:
            raise InvalidParameterError("sigma profile needs at least one coefficient")
        if len(coeffs) - 1 > MAX_SIGMA_DEGREE:
            raise InvalidParameterError(f"sigma degree must be <= {MAX_SIGMA_DEGREE}")
        object.__setattr__(self, "coefficients", coeffs)

    @classmethod
    def constant(cls, value: float) -> "SigmaProfile":
        return cls((value,))

    def value_and_rate(self, t: float) -> tuple[float, float]:
        s, ds = 0.0, 0.0
        for c in reversed(self.coefficients):
            ds = ds * t + s
            s = s * t + c
        return s, ds


class GeodesicRates(NamedTuple):
    ddu: float
    ddv: float


def sigma_eval(profile: SigmaProfile, t: float) -> tuple[float, float]:
    """(sigma(t), sigma_dot(t)); raises SingularProfileError when |sigma| < 1e-9."""
    s, ds = profile.value_and_rate(t)
    if not abs(s) >= SIGMA_MIN:
        raise SingularProfileError(f"sigma({t:.6g}) = {s:.3g} is too close to zero")
    return s, ds


def contraction_margin(sigma: float, sigma_dot: float, eta: float) -> float:
    """sigma_dot / sigma - eta sigma^2; negative inside the contraction region."""
    return sigma_dot / sigma - eta * sigma * sigma


def _geodesic_accel(g: SurfaceGeometry, du: float, dv: float, k: float) -> tuple[float, float]:
    # covariant_rates with zero second derivatives gives exactly the Christoffel terms
    cu, cv = covariant_rates(g, du, dv, 0.0, 0.0)
    return k * du - cu, k * dv - cv


def geodesic_rhs(chart: Chart, u: float, v: float, du: float, dv: float,
                 sigma: float, sigma_dot: float) -> GeodesicRates:
    """Second derivatives of a time-parameterized geodesic through (u, v) with rates (du, dv)."""
    if not abs(sigma) >= SIGMA_MIN:
        raise SingularProfileError(f"sigma = {sigma:.3g} is too close to zero")
    g = geometry_at(chart, u, v)
    return GeodesicRates(*_geodesic_accel(g, du, dv, sigma_dot / sigma))


def modified_geodesic_rhs(state: ContactState, chart1: Chart, chart2: Chart,
                          sigma: float, sigma_dot: float, eta: float,
                          v_rel: Optional[Sequence[float]] = None) -> tuple[GeodesicRates, GeodesicRates]:
    """Body-1 and body-2 second derivatives of the contraction-modified system.

    Body 1 follows the plain geodesic equation; body 2 gets the slip feedback
    eta sigma^2 (|f2_u|^-1 v_rel_x, |f2_v|^-1 v_rel_y).  ``v_rel`` overrides
    the kinematic relative velocity (e.g. with a measured slip).
    """
    if not eta > 0:
        raise InvalidParameterError(f"eta must be positive, got {eta}")
    if not abs(sigma) >= SIGMA_MIN:
        raise SingularProfileError(f"sigma = {sigma:.3g} is too close to zero")
    if contraction_margin(sigma, sigma_dot, eta) >= 0:
        warnings.warn(
            f"outside contraction region: sigma_dot/sigma - eta sigma^2 = "
            f"{contraction_margin(sigma, sigma_dot, eta):.3g}",
            ContractionWarning,
            stacklevel=2,
        )
    g1 = geometry_at(chart1, state.u1, state.v1)
    g2 = geometry_at(chart2, state.u2, state.v2)
    body1, body2 = _modified_pair(g1, g2, state.psi, state.rates, sigma, sigma_dot, eta, v_rel)
    return GeodesicRates(*body1), GeodesicRates(*body2)


def _modified_pair(g1, g2, psi, rates, sigma, sigma_dot, eta, v_rel=None):
    du1, dv1, du2, dv2 = rates
    k = sigma_dot / sigma
    a1 = _geodesic_accel(g1, du1, dv1, k)
    a2u, a2v = _geodesic_accel(g2, du2, dv2, k)
    if eta is not None:
        if v_rel is None:
            v_rel = tangential_velocity(g1, g2, psi, du1, dv1, du2, dv2)
        gain = eta * sigma * sigma
        a2u += gain * v_rel[0] / g2.norm_u
        a2v += gain * v_rel[1] / g2.norm_v
    return a1, (a2u, a2v)


# -- disturbances and the coupled contact-pair system -------------------------


@dataclass(frozen=True)
class Disturbance:
    """Additive perturbation active for t_start <= t < t_end.

    ``kind == "acceleration"`` adds ``values`` to body-1 second derivatives;
    ``kind == "rate"`` adds ``values`` to the body-2 contact-point rates.
    """

    kind: str
    values: tuple[float, float]
    t_start: float
    t_end: float

    def __post_init__(self):
        if self.kind not in ("acceleration", "rate"):
            raise InvalidParameterError(f"unknown disturbance kind {self.kind!r}")
        if not self.t_end > self.t_start:
            raise InvalidParameterError("disturbance window needs t_end > t_start")
        object.__setattr__(self, "values", (float(self.values[0]), float(self.values[1])))

    def active(self, t: float) -> bool:
        return self.t_start <= t < self.t_end


def _offsets(disturbances, kind, t):
    ou = ov = 0.0
    for d in disturbances:
        if d.kind == kind and d.active(t):
            ou += d.values[0]
            ov += d.values[1]
    return ou, ov


@dataclass
class ContactPairSystem:
    """First-order ODE for one contact pair with state (u1, v1, u2, v2, psi, rates).

    ``eta=None`` integrates plain geodesics on both bodies; otherwise body 2
    follows the contraction-modified equations.  Rate disturbances perturb
    the actual body-2 contact-point rates, which is what both the feedback and
    the position update see.
    """

    chart1: Chart
    chart2: Chart
    sigma: SigmaProfile
    eta: Optional[float] = None
    disturbances: Sequence[Disturbance] = field(default_factory=tuple)

    def effective_rates(self, t: float, y) -> tuple[float, float, float, float]:
        ou, ov = _offsets(self.disturbances, "rate", t)
        return y[5], y[6], y[7] + ou, y[8] + ov

    def __call__(self, t: float, y: np.ndarray) -> np.ndarray:
        u1, v1, u2, v2, psi = y[0], y[1], y[2], y[3], y[4]
        rates = self.effective_rates(t, y)
        s, sd = sigma_eval(self.sigma, t)
        g1 = geometry_at(self.chart1, u1, v1)
        g2 = geometry_at(self.chart2, u2, v2)
        (a1u, a1v), (a2u, a2v) = _modified_pair(g1, g2, psi, rates, s, sd, self.eta)
        du, dv = _offsets(self.disturbances, "acceleration", t)
        dpsi = spin_rate(g1, g2, *rates)
        return np.array([rates[0], rates[1], rates[2], rates[3], dpsi,
                         a1u + du, a1v + dv, a2u, a2v])

    def observe(self, t: float, y) -> dict:
        """Spin rate and relative velocity at a sample (uses effective rates)."""
        rates = self.effective_rates(t, y)
        g1 = geometry_at(self.chart1, y[0], y[1])
        g2 = geometry_at(self.chart2, y[2], y[3])
        vx, vy = tangential_velocity(g1, g2, y[4], *rates)
        return {
            "rates": rates,
            "dpsi": spin_rate(g1, g2, *rates),
            "v_rel": (vx, vy),
        }


# -- integrator ----------------------------------------------------------------


@dataclass
class Trajectory:
    t: np.ndarray
    y: np.ndarray

    def __len__(self):
        return len(self.t)

    @property
    def final(self) -> np.ndarray:
        return self.y[-1]


def rk4_step(rhs: Callable[[float, np.ndarray], np.ndarray], t: float, y: np.ndarray, h: float) -> np.ndarray:
    k1 = rhs(t, y)
    k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1)
    k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2)
    k4 = rhs(t + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate(rhs: Callable[[float, np.ndarray], np.ndarray], initial, t0: float, t1: float,
              step: float, check: Optional[Callable[[float, np.ndarray], None]] = None) -> Trajectory:
    """Classical fixed-step RK4 from t0 to t1, one sample per step.

    ``initial`` may be a ContactState or any array-like.  ``check(t, y)`` runs
    at every sample point (including the first) and may raise to abort.  Any
    exception from ``rhs`` or ``check`` and any non-finite state is re-raised
    as IntegrationError carrying the failing time.
    """
    if not step > 0:
        raise InvalidParameterError(f"step must be positive, got {step}")
    if not t1 > t0:
        raise InvalidParameterError(f"need t1 > t0, got {t0} .. {t1}")
    y = initial.to_array() if isinstance(initial, ContactState) else np.asarray(initial, dtype=float).copy()
    n = max(1, int(math.ceil((t1 - t0) / step - 1e-9)))
    times = t0 + step * np.arange(n + 1)
    times[-1] = t1
    out = np.empty((n + 1, y.size))
    out[0] = y
    t = t0
    for i in range(n):
        try:
            if check is not None:
                check(t, y)
            y = rk4_step(rhs, t, y, times[i + 1] - t)
        except IntegrationError:
            raise
        except (GeoContactError, ArithmeticError, ValueError) as exc:
            raise IntegrationError(f"{type(exc).__name__}: {exc}", t) from exc
        t = float(times[i + 1])
        if not np.all(np.isfinite(y)):
            raise IntegrationError("non-finite state", t)
        out[i + 1] = y
    if check is not None:
        try:
            check(t, y)
        except GeoContactError as exc:
            raise IntegrationError(f"{type(exc).__name__}: {exc}", t) from exc
    return Trajectory(times, out)
