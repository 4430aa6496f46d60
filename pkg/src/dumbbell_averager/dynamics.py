"""Attitude dynamics of a rigid dumbbell satellite in a circular orbit.

State ordering is (theta, theta_dot, phi, phi_dot) everywhere, with theta the
nutation angle and phi the precession angle; the same four slots double as the
first-order variables (X, Y, Z, W) of the linearized system

    X' = Y,   Y' = -3 X + eps*F1,
    Z' = W,   W' = -4 Z + eps*F2.

The unperturbed linear system has two invariant planes filled with periodic
orbits: the (X, Y) plane with angular frequency sqrt(3) (period T1) and the
(Z, W) plane with frequency 2 (period T2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from .errors import DegenerateMonodromyError, SingularityError

SQRT3 = math.sqrt(3.0)
T1 = 2.0 * math.pi / SQRT3
T2 = math.pi

#: |cos phi| below this is treated as the tan(phi) pole.
COS_PHI_FLOOR = 1e-12

#: active monodromy-gap determinants below this are degenerate.
GAP_DET_FLOOR = 1e-10

StateLike = Sequence[float]
Rhs = Callable[[float, StateLike], Tuple[float, float, float, float]]


class Mode(Enum):
    """Which invariant plane of the unperturbed system carries the orbit."""

    NUTATION_T1 = "T1"
    PRECESSION_T2 = "T2"

    @property
    def base_period(self) -> float:
        return T1 if self is Mode.NUTATION_T1 else T2


@dataclass(frozen=True)
class SatelliteState:
    """Attitude state (theta, theta_dot, phi, phi_dot), all finite."""

    theta: float
    theta_dot: float
    phi: float
    phi_dot: float

    def __post_init__(self) -> None:
        for name in ("theta", "theta_dot", "phi", "phi_dot"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"non-finite state component {name!r}")

    def __iter__(self):
        return iter((self.theta, self.theta_dot, self.phi, self.phi_dot))

    def as_array(self) -> np.ndarray:
        return np.array(tuple(self), dtype=float)

    @classmethod
    def from_sequence(cls, s: StateLike) -> "SatelliteState":
        a, b, c, d = s
        return cls(float(a), float(b), float(c), float(d))


@dataclass(frozen=True)
class ResonanceSpec:
    """p:q resonance against one of the two base periods.

    The forcing has period p*T_mode/q with gcd(p, q) = 1; all averaging and
    shooting windows span p full base periods regardless of q.
    """

    mode: Mode
    p: int = 1
    q: int = 1

    def __post_init__(self) -> None:
        if self.p < 1 or self.q < 1:
            raise ValueError("p and q must be positive integers")
        if math.gcd(self.p, self.q) != 1:
            raise ValueError(f"p={self.p} and q={self.q} must be relatively prime")

    @property
    def base_period(self) -> float:
        return self.mode.base_period

    @property
    def window(self) -> float:
        """Integration window p*T_mode."""
        return self.p * self.base_period


@dataclass(frozen=True)
class FundamentalMatrix:
    """Fundamental solution of the unperturbed linear system at time t.

    Block diagonal with two unimodular 2x2 rotation-like blocks; entries(0)
    is the identity and the inverse satisfies M(t)^-1 = M(-t).
    """

    t: float
    entries: np.ndarray

    def inverse(self) -> np.ndarray:
        return fundamental_matrix(-self.t).entries


def _as_torque_callable(torque) -> Callable[..., float]:
    """Accept either a compiled torque expression or a plain callable."""
    compile_ = getattr(torque, "compile", None)
    if compile_ is not None:
        return compile_()
    if callable(torque):
        return torque
    raise TypeError(f"torque must be an expression or callable, got {type(torque)!r}")


@dataclass(frozen=True)
class PerturbSetup:
    """Perturbation data: the two torques, eps, and optional eps^2 remainders.

    ``f1star``/``f2star`` may be torque expressions (anything exposing
    ``compile() -> callable``) or plain functions of
    (t, theta, theta_dot, phi, phi_dot).  The remainder hooks default to
    identically zero and receive (t, theta, theta_dot, phi, phi_dot, eps).
    """

    f1star: object
    f2star: object
    epsilon: float
    remainders: Optional[Tuple[Callable[..., float], Callable[..., float]]] = None
    _compiled: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not math.isfinite(self.epsilon):
            raise ValueError("epsilon must be finite")
        object.__setattr__(
            self,
            "_compiled",
            (_as_torque_callable(self.f1star), _as_torque_callable(self.f2star)),
        )

    def torque_values(self, t: float, th: float, thd: float, ph: float, phd: float):
        c1, c2 = self._compiled
        return c1(t, th, thd, ph, phd), c2(t, th, thd, ph, phd)


def full_rhs(s: StateLike, t: float, setup: PerturbSetup) -> Tuple[float, float, float, float]:
    """Time derivative of the full nonlinear attitude equations.

    Raises SingularityError when |cos phi| < 1e-12 (tan pole); verification
    orbits stay near phi = 0 so the guard rejects rather than saturates.
    """
    th, thd, ph, phd = s
    cph = math.cos(ph)
    if abs(cph) < COS_PHI_FLOOR:
        raise SingularityError(f"cos(phi) = {cph:.3e} at phi = {ph!r}")
    eps = setup.epsilon
    tf1, tf2 = setup.torque_values(t, th, thd, ph, phd)
    d_thd = 2.0 * phd * (1.0 + thd) * math.tan(ph) - 3.0 * math.sin(th) * math.cos(th) + eps * tf1
    d_phd = -((1.0 + thd) ** 2 + 3.0 * math.cos(th) ** 2) * math.sin(ph) * cph + eps * tf2
    if setup.remainders is not None:
        r1, r2 = setup.remainders
        e2 = eps * eps
        d_thd += e2 * r1(t, th, thd, ph, phd, eps)
        d_phd += e2 * r2(t, th, thd, ph, phd, eps)
    return (thd, d_thd, phd, d_phd)


def first_order_rhs(s: StateLike, t: float, eps: float, lin) -> Tuple[float, float, float, float]:
    """Time derivative of the linearized system with torque coefficients.

    ``lin`` supplies the four coefficient callables f1..f4 of
    (t, x_velocity, y_velocity); the perturbations enter as
    F1 = f1*X + f2*Z and F2 = f3*X + f4*Z.
    """
    X, Y, Z, W = s
    F1 = lin.f1(t, Y, W) * X + lin.f2(t, Y, W) * Z
    F2 = lin.f3(t, Y, W) * X + lin.f4(t, Y, W) * Z
    return (Y, -3.0 * X + eps * F1, W, -4.0 * Z + eps * F2)


def make_full_rhs(setup: PerturbSetup) -> Rhs:
    """Bind a PerturbSetup into an rhs(t, state) callable for integrators."""

    def rhs(t: float, s: StateLike) -> Tuple[float, float, float, float]:
        return full_rhs(s, t, setup)

    return rhs


def make_first_order_rhs(eps: float, lin) -> Rhs:
    """Bind eps and linearized coefficients into an rhs(t, state) callable."""

    def rhs(t: float, s: StateLike) -> Tuple[float, float, float, float]:
        return first_order_rhs(s, t, eps, lin)

    return rhs


def unperturbed_rhs(t: float, s: StateLike) -> Tuple[float, float, float, float]:
    """The decoupled linear oscillators X'' = -3X, Z'' = -4Z."""
    X, Y, Z, W = s
    return (Y, -3.0 * X, W, -4.0 * Z)


def closed_form_solution(alpha: Sequence[float], mode: Mode, t) -> Tuple:
    """Exact unperturbed periodic solution through plane point ``alpha``.

    For the T1 plane alpha = (X0, Y0) and the orbit stays in (X, Y);
    for the T2 plane alpha = (Z0, W0) and the orbit stays in (Z, W).
    Accepts scalar or array ``t``.
    """
    a1, a2 = alpha
    if mode is Mode.NUTATION_T1:
        c = np.cos(SQRT3 * t)
        s = np.sin(SQRT3 * t)
        x = a1 * c + (a2 / SQRT3) * s
        y = a2 * c - SQRT3 * a1 * s
        zero = np.zeros_like(x)
        return (x, y, zero, zero)
    c = np.cos(2.0 * t)
    s = np.sin(2.0 * t)
    z = a1 * c + (a2 / 2.0) * s
    w = a2 * c - 2.0 * a1 * s
    zero = np.zeros_like(z)
    return (zero, zero, z, w)


def plane_embed(alpha: Sequence[float], mode: Mode) -> Tuple[float, float, float, float]:
    """Zero-pad a plane point into the 4-dimensional state."""
    a1, a2 = float(alpha[0]), float(alpha[1])
    if mode is Mode.NUTATION_T1:
        return (a1, a2, 0.0, 0.0)
    return (0.0, 0.0, a1, a2)


def plane_project(s: StateLike, mode: Mode) -> Tuple[float, float]:
    """Extract the active plane coordinates from a 4-dimensional state."""
    if mode is Mode.NUTATION_T1:
        return (float(s[0]), float(s[1]))
    return (float(s[2]), float(s[3]))


def fundamental_matrix(t: float) -> FundamentalMatrix:
    """Fundamental matrix of the unperturbed linear system with M(0) = I."""
    c1 = math.cos(SQRT3 * t)
    s1 = math.sin(SQRT3 * t)
    c2 = math.cos(2.0 * t)
    s2 = math.sin(2.0 * t)
    m = np.array(
        [
            [c1, s1 / SQRT3, 0.0, 0.0],
            [-SQRT3 * s1, c1, 0.0, 0.0],
            [0.0, 0.0, c2, s2 / 2.0],
            [0.0, 0.0, -2.0 * s2, c2],
        ]
    )
    return FundamentalMatrix(t=t, entries=m)


def monodromy_gap(spec: ResonanceSpec) -> Tuple[np.ndarray, float]:
    """Gap matrix M^-1(0) - M^-1(pT) and the determinant of its active block.

    In the T1 mode the (X, Y) block of the gap vanishes identically and the
    active (Z, W) block must be nonsingular (and vice versa for T2); a
    vanishing active determinant means the bifurcation-function machinery
    does not apply for this resonance.
    """
    T = spec.window
    gap = np.eye(4) - fundamental_matrix(-T).entries
    if spec.mode is Mode.NUTATION_T1:
        active = gap[2:, 2:]
    else:
        active = gap[:2, :2]
    det = float(active[0, 0] * active[1, 1] - active[0, 1] * active[1, 0])
    if abs(det) < GAP_DET_FLOOR:
        raise DegenerateMonodromyError(
            f"active monodromy block determinant {det:.3e} below {GAP_DET_FLOOR:g} "
            f"for {spec.mode.value} with p={spec.p}"
        )
    return gap, det
