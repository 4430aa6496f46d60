"""Simple-zero search for 2D averaged fields.

Damped Newton iteration from a polar grid of seeds over an annulus that
excludes the origin (the trivial equilibrium).  A zero is certified simple
when the finite-difference Jacobian determinant clears a threshold relative
to the field's typical magnitude on the annulus; each periodic orbit of the
underlying system shows up as either one zero or a (a, b)/(a, -b) pair, which
``group_orbit_classes`` collapses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List, Sequence, Tuple

import numpy as np

from .errors import NoConvergenceError, SingularJacobianError

Field2D = Callable[[np.ndarray], np.ndarray]

#: relative finite-difference step for the field Jacobian
JAC_STEP = 1e-5
#: |det J| below this during iteration aborts the Newton solve
ITER_DET_FLOOR = 1e-14
#: |det J| must exceed this times the field scale for a Simple verdict
SIMPLE_DET_TOL = 1e-8
#: zeros closer than this are the same zero
DEDUP_DISTANCE = 1e-6

DEFAULT_NEWTON_TOL = 1e-12
STEP_TOL = 1e-12
MAX_HALVINGS = 20


@dataclass(frozen=True)
class ZeroSearchDomain:
    """Annulus r1 < ||alpha|| < r2 with a polar grid of Newton seeds."""

    r1: float = 0.05
    r2: float = 5.0
    n_r: int = 16
    n_angle: int = 32

    def __post_init__(self) -> None:
        if not (0.0 < self.r1 < self.r2):
            raise ValueError(f"need 0 < r1 < r2, got r1={self.r1}, r2={self.r2}")
        if self.n_r < 1 or self.n_angle < 1:
            raise ValueError("seed counts must be positive")

    def seeds(self) -> np.ndarray:
        radii = np.linspace(self.r1, self.r2, self.n_r)
        angles = np.linspace(0.0, 2.0 * math.pi, self.n_angle, endpoint=False)
        r, a = np.meshgrid(radii, angles, indexing="ij")
        return np.column_stack([(r * np.cos(a)).ravel(), (r * np.sin(a)).ravel()])

    def contains(self, point: Sequence[float]) -> bool:
        r = math.hypot(float(point[0]), float(point[1]))
        return self.r1 <= r <= self.r2


@dataclass(frozen=True)
class CertifiedZero:
    """A Newton-converged zero with its Jacobian-based simplicity verdict."""

    location: np.ndarray
    residual_norm: float
    jacobian: np.ndarray
    jacobian_det: float
    classification: str  # "Simple" or "Degenerate"
    iterates: Tuple[np.ndarray, ...] = ()

    @property
    def is_simple(self) -> bool:
        return self.classification == "Simple"


def _eval(field: Field2D, point: np.ndarray) -> np.ndarray:
    out = np.asarray(field(np.asarray(point, dtype=float)), dtype=float).reshape(2)
    return out


def jacobian2d(field: Field2D, point: Sequence[float]) -> np.ndarray:
    """Central-difference Jacobian with per-coordinate relative steps."""
    p = np.asarray(point, dtype=float)
    jac = np.empty((2, 2))
    for j in range(2):
        h = JAC_STEP * max(1.0, abs(p[j]))
        hi = p.copy()
        lo = p.copy()
        hi[j] += h
        lo[j] -= h
        jac[:, j] = (_eval(field, hi) - _eval(field, lo)) / (2.0 * h)
    return jac


def newton2d(
    field: Field2D,
    seed: Sequence[float],
    tol: float = DEFAULT_NEWTON_TOL,
    max_iter: int = 50,
    field_scale: float = 1.0,
) -> CertifiedZero:
    """Damped Newton solve for a zero of the field starting at ``seed``.

    Full Newton steps with a halving line search on ||field||; success
    requires both ||field|| < tol and a Newton step below 1e-12.  Raises
    SingularJacobianError when |det J| < 1e-14 mid-iteration and
    NoConvergenceError when the iteration budget runs out.
    """
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    x = np.asarray(seed, dtype=float).copy()
    iterates = [x.copy()]
    fx = _eval(field, x)
    norm_fx = float(np.linalg.norm(fx))

    for _ in range(max_iter):
        jac = jacobian2d(field, x)
        det = float(jac[0, 0] * jac[1, 1] - jac[0, 1] * jac[1, 0])
        if abs(det) < ITER_DET_FLOOR:
            raise SingularJacobianError(
                f"|det J| = {abs(det):.3e} below {ITER_DET_FLOOR:g} at {x.tolist()}"
            )
        step = np.array(
            [
                (-fx[0] * jac[1, 1] + fx[1] * jac[0, 1]) / det,
                (-fx[1] * jac[0, 0] + fx[0] * jac[1, 0]) / det,
            ]
        )
        if norm_fx < tol and float(np.linalg.norm(step)) < STEP_TOL:
            classification = (
                "Simple" if abs(det) > SIMPLE_DET_TOL * field_scale else "Degenerate"
            )
            return CertifiedZero(
                location=x,
                residual_norm=norm_fx,
                jacobian=jac,
                jacobian_det=det,
                classification=classification,
                iterates=tuple(iterates),
            )
        lam = 1.0
        for _halving in range(MAX_HALVINGS):
            trial = x + lam * step
            f_trial = _eval(field, trial)
            n_trial = float(np.linalg.norm(f_trial))
            if n_trial < norm_fx:
                break
            lam *= 0.5
        else:
            raise NoConvergenceError(
                f"line search failed to reduce ||field|| = {norm_fx:.3e} at {x.tolist()}"
            )
        x, fx, norm_fx = trial, f_trial, n_trial
        iterates.append(x.copy())

    raise NoConvergenceError(f"no zero within {max_iter} iterations from seed {list(seed)}")


def field_scale_on(field: Field2D, seeds: np.ndarray) -> float:
    """Median of ||field|| over the seed points; 1.0 for an all-zero field."""
    try:
        vals = np.asarray(field(seeds), dtype=float)
        if vals.shape != seeds.shape:
            raise ValueError
    except Exception:
        vals = np.array([_eval(field, s) for s in seeds])
    med = float(np.median(np.linalg.norm(vals, axis=1)))
    return med if med > 0.0 else 1.0


def multistart_zeros(
    field: Field2D,
    domain: ZeroSearchDomain,
    tol: float = DEFAULT_NEWTON_TOL,
    max_iter: int = 50,
) -> List[CertifiedZero]:
    """Newton from every polar seed; dedup, clip to the annulus, sort.

    Zeros within Euclidean distance 1e-6 of an earlier one are duplicates;
    survivors are sorted by polar angle then radius.  Seeds that fail to
    converge are skipped, so an empty list is a legitimate outcome.
    """
    seeds = domain.seeds()
    scale = field_scale_on(field, seeds)
    found: List[CertifiedZero] = []
    for seed in seeds:
        try:
            zero = newton2d(field, seed, tol=tol, max_iter=max_iter, field_scale=scale)
        except NoConvergenceError:
            continue
        if not domain.contains(zero.location):
            continue
        if any(
            float(np.linalg.norm(zero.location - kept.location)) < DEDUP_DISTANCE
            for kept in found
        ):
            continue
        found.append(zero)

    def sort_key(z: CertifiedZero) -> Tuple[float, float]:
        x, y = z.location
        return (math.atan2(y, x) % (2.0 * math.pi), math.hypot(x, y))

    found.sort(key=sort_key)
    return found


def group_orbit_classes(
    zeros: Sequence[CertifiedZero], tol: float = DEDUP_DISTANCE
) -> List[List[CertifiedZero]]:
    """Group zeros that differ only by the sign of the second coordinate.

    Such pairs are two initial conditions on the same periodic orbit, so
    each group represents one orbit class.
    """
    groups: List[List[CertifiedZero]] = []
    used = [False] * len(zeros)
    for i, z in enumerate(zeros):
        if used[i]:
            continue
        group = [z]
        used[i] = True
        mirror = np.array([z.location[0], -z.location[1]])
        if abs(z.location[1]) > tol:
            for j in range(i + 1, len(zeros)):
                if used[j]:
                    continue
                if float(np.linalg.norm(zeros[j].location - mirror)) < tol:
                    group.append(zeros[j])
                    used[j] = True
                    break
        groups.append(group)
    return groups
