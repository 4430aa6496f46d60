"""Direct verification of predicted periodic orbits.

``integrate`` advances a 4-state system with an adaptive Dormand-Prince 5(4)
embedded pair.  ``shoot_periodic`` runs Newton on the period-T displacement
map P(z) = x(T; z) - z, with the Jacobian assembled from finite-difference
trajectory columns and the linear solves done through a truncated
pseudo-inverse: near a resonant plane I - Phi(T) is singular at eps = 0,
so a plain solve would blow up for small eps.  ``epsilon_continuation``
repeats the shot along a descending eps ladder, reseeding each solve with
the previous corrected initial condition, and measures the rate at which
the corrected orbit approaches the averaged prediction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .dynamics import ResonanceSpec, SatelliteState, plane_embed
from .errors import DumbbellError, NoConvergenceError, StepSizeUnderflowError

Rhs = Callable[[float, Tuple[float, float, float, float]], Tuple[float, float, float, float]]

DEFAULT_INTEGRATOR_TOL = 1e-11
DEFAULT_SHOOTING_TOL = 1e-10
#: forward-difference step for displacement-map Jacobian columns
SHOOTING_FD_STEP = 1e-7
#: singular values below this fraction of the largest are truncated
PINV_RCOND = 1e-8

# Dormand-Prince 5(4) tableau: 5th-order propagation, embedded 4th-order
# error estimate, first-same-as-last.
_C2, _C3, _C4, _C5 = 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0
_A21 = 1.0 / 5.0
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
_A61, _A62, _A63, _A64, _A65 = (
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
)
_B1, _B3, _B4, _B5, _B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
# difference between 5th- and 4th-order weights
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71.0 / 57600.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
)

# conservative safety keeps the realized local error a few times below the
# requested tolerance, which the long-horizon conservation checks rely on
_SAFETY = 0.7
_MIN_SHRINK = 0.2
_MAX_GROW = 5.0


#: attempted steps per integrate() call before giving up; legitimate runs at
#: tol 1e-11 over tens of time units need a few thousand
MAX_STEPS = 100_000


def integrate(
    rhs: Rhs,
    s0: Sequence[float],
    t0: float,
    t1: float,
    tol: float = DEFAULT_INTEGRATOR_TOL,
    max_steps: int = MAX_STEPS,
) -> np.ndarray:
    """Advance the state from t0 to t1 and return the final state.

    The tolerance is applied as both absolute and relative per component;
    step acceptance is deterministic.  Raises StepSizeUnderflowError if the
    controller drives the step below the representable floor (which is how
    trajectories that fall into the tan(phi) pole surface) and
    NoConvergenceError if the step budget runs out first.
    """
    if t1 <= t0:
        raise ValueError("t1 must exceed t0")
    if tol <= 0.0:
        raise ValueError("tol must be positive")

    y0, y1, y2, y3 = (float(v) for v in s0)
    t = t0
    k10, k11, k12, k13 = rhs(t, (y0, y1, y2, y3))

    # first-step heuristic from the initial derivative magnitude
    d0 = max(abs(y0), abs(y1), abs(y2), abs(y3), 1e-6)
    d1 = max(abs(k10), abs(k11), abs(k12), abs(k13), 1e-6)
    h = min(0.01 * d0 / d1, (t1 - t0) * 0.1)
    h_floor = 1e-14 * max(abs(t0), abs(t1), 1.0)
    attempts = 0

    while t < t1:
        if h < h_floor:
            raise StepSizeUnderflowError(f"step size {h:.3e} underflowed at t = {t!r}")
        attempts += 1
        if attempts > max_steps:
            raise NoConvergenceError(
                f"integration exceeded {max_steps} step attempts at t = {t!r}"
            )
        if t + h > t1:
            h = t1 - t

        ya = (y0 + h * _A21 * k10, y1 + h * _A21 * k11, y2 + h * _A21 * k12, y3 + h * _A21 * k13)
        k20, k21, k22, k23 = rhs(t + _C2 * h, ya)

        ya = (
            y0 + h * (_A31 * k10 + _A32 * k20),
            y1 + h * (_A31 * k11 + _A32 * k21),
            y2 + h * (_A31 * k12 + _A32 * k22),
            y3 + h * (_A31 * k13 + _A32 * k23),
        )
        k30, k31, k32, k33 = rhs(t + _C3 * h, ya)

        ya = (
            y0 + h * (_A41 * k10 + _A42 * k20 + _A43 * k30),
            y1 + h * (_A41 * k11 + _A42 * k21 + _A43 * k31),
            y2 + h * (_A41 * k12 + _A42 * k22 + _A43 * k32),
            y3 + h * (_A41 * k13 + _A42 * k23 + _A43 * k33),
        )
        k40, k41, k42, k43 = rhs(t + _C4 * h, ya)

        ya = (
            y0 + h * (_A51 * k10 + _A52 * k20 + _A53 * k30 + _A54 * k40),
            y1 + h * (_A51 * k11 + _A52 * k21 + _A53 * k31 + _A54 * k41),
            y2 + h * (_A51 * k12 + _A52 * k22 + _A53 * k32 + _A54 * k42),
            y3 + h * (_A51 * k13 + _A52 * k23 + _A53 * k33 + _A54 * k43),
        )
        k50, k51, k52, k53 = rhs(t + _C5 * h, ya)

        ya = (
            y0 + h * (_A61 * k10 + _A62 * k20 + _A63 * k30 + _A64 * k40 + _A65 * k50),
            y1 + h * (_A61 * k11 + _A62 * k21 + _A63 * k31 + _A64 * k41 + _A65 * k51),
            y2 + h * (_A61 * k12 + _A62 * k22 + _A63 * k32 + _A64 * k42 + _A65 * k52),
            y3 + h * (_A61 * k13 + _A62 * k23 + _A63 * k33 + _A64 * k43 + _A65 * k53),
        )
        k60, k61, k62, k63 = rhs(t + h, ya)

        z0 = y0 + h * (_B1 * k10 + _B3 * k30 + _B4 * k40 + _B5 * k50 + _B6 * k60)
        z1 = y1 + h * (_B1 * k11 + _B3 * k31 + _B4 * k41 + _B5 * k51 + _B6 * k61)
        z2 = y2 + h * (_B1 * k12 + _B3 * k32 + _B4 * k42 + _B5 * k52 + _B6 * k62)
        z3 = y3 + h * (_B1 * k13 + _B3 * k33 + _B4 * k43 + _B5 * k53 + _B6 * k63)
        k70, k71, k72, k73 = rhs(t + h, (z0, z1, z2, z3))

        e0 = h * (_E1 * k10 + _E3 * k30 + _E4 * k40 + _E5 * k50 + _E6 * k60 + _E7 * k70)
        e1 = h * (_E1 * k11 + _E3 * k31 + _E4 * k41 + _E5 * k51 + _E6 * k61 + _E7 * k71)
        e2 = h * (_E1 * k12 + _E3 * k32 + _E4 * k42 + _E5 * k52 + _E6 * k62 + _E7 * k72)
        e3 = h * (_E1 * k13 + _E3 * k33 + _E4 * k43 + _E5 * k53 + _E6 * k63 + _E7 * k73)

        s0_ = tol + tol * max(abs(y0), abs(z0))
        s1_ = tol + tol * max(abs(y1), abs(z1))
        s2_ = tol + tol * max(abs(y2), abs(z2))
        s3_ = tol + tol * max(abs(y3), abs(z3))
        err = math.sqrt(
            ((e0 / s0_) ** 2 + (e1 / s1_) ** 2 + (e2 / s2_) ** 2 + (e3 / s3_) ** 2) / 4.0
        )

        if err <= 1.0:
            t += h
            y0, y1, y2, y3 = z0, z1, z2, z3
            k10, k11, k12, k13 = k70, k71, k72, k73
            factor = _MAX_GROW if err == 0.0 else min(_MAX_GROW, _SAFETY * err ** -0.2)
            h *= factor
        else:
            h *= max(_MIN_SHRINK, _SAFETY * err ** -0.2)

    return np.array([y0, y1, y2, y3])


def sample_trajectory(
    rhs: Rhs,
    s0: Sequence[float],
    times: Sequence[float],
    tol: float = DEFAULT_INTEGRATOR_TOL,
) -> np.ndarray:
    """States at the given increasing times (t = 0 start), shape (len, 4)."""
    out = []
    state = np.asarray(s0, dtype=float)
    t_prev = 0.0
    for t in times:
        if t > t_prev:
            state = integrate(rhs, state, t_prev, t, tol=tol)
            t_prev = t
        out.append(state.copy())
    return np.array(out)


@dataclass(frozen=True)
class OrbitCertificate:
    """A shooting-verified periodic initial condition."""

    epsilon: float
    predicted_ic: SatelliteState
    corrected_ic: SatelliteState
    displacement_norm: float
    period: float
    newton_iters: int

    @property
    def correction_norm(self) -> float:
        """Distance between the corrected and predicted initial conditions."""
        d = self.corrected_ic.as_array() - self.predicted_ic.as_array()
        return float(np.linalg.norm(d))


def displacement_jacobian(
    rhs: Rhs,
    z: np.ndarray,
    period: float,
    tol: float,
    base: Optional[np.ndarray] = None,
    fd_step: float = SHOOTING_FD_STEP,
) -> np.ndarray:
    """Forward-difference Jacobian of P(z) = x(period; z) - z."""
    if base is None:
        base = integrate(rhs, z, 0.0, period, tol=tol) - z
    jac = np.empty((4, 4))
    for j in range(4):
        pert = z.copy()
        pert[j] += fd_step
        col = integrate(rhs, pert, 0.0, period, tol=tol) - pert
        jac[:, j] = (col - base) / fd_step
    return jac


def shoot_periodic(
    rhs: Rhs,
    guess: Sequence[float],
    period: float,
    tol: float = DEFAULT_SHOOTING_TOL,
    max_iter: int = 25,
    integrator_tol: float = DEFAULT_INTEGRATOR_TOL,
    epsilon: float = float("nan"),
) -> OrbitCertificate:
    """Newton-correct ``guess`` until the period map returns to it.

    ``epsilon`` is recorded in the certificate for bookkeeping only; the
    dynamics are whatever ``rhs`` encodes.  Raises NoConvergenceError when
    the displacement norm fails to reach ``tol`` within ``max_iter`` Newton
    iterations.
    """
    z = np.asarray(guess, dtype=float).copy()
    predicted = SatelliteState.from_sequence(guess)
    for iters in range(max_iter + 1):
        displacement = integrate(rhs, z, 0.0, period, tol=integrator_tol) - z
        norm = float(np.linalg.norm(displacement))
        if norm < tol:
            return OrbitCertificate(
                epsilon=epsilon,
                predicted_ic=predicted,
                corrected_ic=SatelliteState.from_sequence(z),
                displacement_norm=norm,
                period=period,
                newton_iters=iters,
            )
        if iters == max_iter:
            break
        jac = displacement_jacobian(rhs, z, period, integrator_tol, base=displacement)
        z = z + np.linalg.pinv(jac, rcond=PINV_RCOND) @ (-displacement)
    raise NoConvergenceError(
        f"shooting stalled at displacement {norm:.3e} after {max_iter} iterations"
    )


@dataclass(frozen=True)
class ContinuationReport:
    """Outcome of shooting along a descending epsilon ladder.

    ``distances`` holds ||corrected_ic - predicted_ic|| per converged rung,
    ``pair_orders`` the rung-to-rung slopes log(d_i/d_{i+1})/log(e_i/e_{i+1}),
    and ``empirical_order`` the least-squares slope of log d against log eps.
    Status is PASS only if every rung converged and the slope sits in the
    first-order band [0.5, 1.5].
    """

    prediction: SatelliteState
    spec: ResonanceSpec
    eps_list: Tuple[float, ...]
    certificates: Tuple[OrbitCertificate, ...]
    distances: Tuple[float, ...]
    pair_orders: Tuple[float, ...]
    empirical_order: float
    status: str
    failure: Optional[str] = None

    @property
    def passed(self) -> bool:
        return self.status == "PASS"


ORDER_BAND = (0.5, 1.5)


def epsilon_continuation(
    rhs_for_eps: Callable[[float], Rhs],
    averaged_zero: Sequence[float],
    spec: ResonanceSpec,
    eps_list: Sequence[float],
    shooting_tol: float = DEFAULT_SHOOTING_TOL,
    integrator_tol: float = DEFAULT_INTEGRATOR_TOL,
    max_iter: int = 25,
) -> ContinuationReport:
    """Chase the predicted orbit down a descending epsilon ladder.

    Each rung shoots with the previous corrected initial condition as the
    seed (the first rung starts from the zero-padded averaged zero).  The
    rung where shooting first fails is recorded as FAILED-AT(eps) and the
    ladder stops there.
    """
    eps_tuple = tuple(float(e) for e in eps_list)
    if not eps_tuple:
        raise ValueError("eps_list must be nonempty")
    if any(e < 0.0 for e in eps_tuple):
        raise ValueError("eps_list entries must be nonnegative")
    if any(a <= b for a, b in zip(eps_tuple, eps_tuple[1:])):
        raise ValueError("eps_list must be strictly descending")

    predicted = np.asarray(plane_embed(averaged_zero, spec.mode), dtype=float)
    period = spec.window
    certificates: List[OrbitCertificate] = []
    distances: List[float] = []
    failure = None
    status = "PASS"

    guess = predicted.copy()
    for eps in eps_tuple:
        try:
            cert = shoot_periodic(
                rhs_for_eps(eps),
                guess,
                period,
                tol=shooting_tol,
                max_iter=max_iter,
                integrator_tol=integrator_tol,
                epsilon=eps,
            )
        except DumbbellError as exc:
            status = f"FAILED-AT({eps:g})"
            failure = f"{type(exc).__name__}: {exc}"
            break
        corrected = cert.corrected_ic.as_array()
        certificates.append(cert)
        distances.append(float(np.linalg.norm(corrected - predicted)))
        guess = corrected

    pair_orders: List[float] = []
    for (ea, da), (eb, db) in zip(
        zip(eps_tuple, distances), zip(eps_tuple[1:], distances[1:])
    ):
        if da > 0.0 and db > 0.0 and ea > 0.0 and eb > 0.0:
            pair_orders.append(math.log(da / db) / math.log(ea / eb))
        else:
            pair_orders.append(float("nan"))

    valid = [
        (math.log(e), math.log(d))
        for e, d in zip(eps_tuple, distances)
        if e > 0.0 and d > 0.0
    ]
    if len(valid) >= 2:
        xs = np.array([v[0] for v in valid])
        ys = np.array([v[1] for v in valid])
        empirical_order = float(np.polyfit(xs, ys, 1)[0])
    else:
        empirical_order = float("nan")

    if status == "PASS":
        if math.isfinite(empirical_order) and not (
            ORDER_BAND[0] <= empirical_order <= ORDER_BAND[1]
        ):
            status = "ORDER-OUT-OF-BAND"

    return ContinuationReport(
        prediction=SatelliteState.from_sequence(predicted),
        spec=spec,
        eps_list=eps_tuple,
        certificates=tuple(certificates),
        distances=tuple(distances),
        pair_orders=tuple(pair_orders),
        empirical_order=empirical_order,
        status=status,
        failure=failure,
    )
