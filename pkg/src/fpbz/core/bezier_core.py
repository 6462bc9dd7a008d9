#!/usr/bin/env python3
"""
Bezier Core Module

Cubic Bezier curves: evaluation in Bernstein form, the general degree-N
evaluation, fitting one cubic to an ordered ridge path, and fit error.

Control points are indexed P0..P3: P0/P3 are the on-curve endpoints, P1/P2
the off-curve controls.
"""

from dataclasses import dataclass
from typing import Sequence, Tuple, Union
import logging
import math

import numpy as np

from .ridge_extract import RidgePath

logger = logging.getLogger(__name__)

SINGULAR_DET = 1e-9
ERROR_SAMPLES = 256
DEFAULT_REFINE_ITERS = 200
INITIAL_DAMPING = 1e-3
MIN_DAMPING = 1e-12
MAX_DAMPING = 1e12
# refinement stops once the squared residual per point is below this
VANISHING_COST = 1e-20
GRADIENT_TOL = 1e-10
STEP_TOL = 1e-12
STALL_TOL = 1e-12


@dataclass(frozen=True)
class Point2:
    x: float
    y: float

    def __post_init__(self):
        object.__setattr__(self, 'x', float(self.x))
        object.__setattr__(self, 'y', float(self.y))
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"Point coordinates must be finite, got ({self.x}, {self.y})")


@dataclass(frozen=True)
class CubicBezier:
    p0: Point2
    p1: Point2
    p2: Point2
    p3: Point2

    @classmethod
    def from_array(cls, controls: np.ndarray) -> 'CubicBezier':
        controls = np.asarray(controls, dtype=np.float64).reshape(4, 2)
        return cls(*(Point2(x, y) for x, y in controls))

    def as_array(self) -> np.ndarray:
        """(4, 2) array of control points."""
        return np.array([[p.x, p.y] for p in self.controls], dtype=np.float64)

    @property
    def controls(self) -> Tuple[Point2, Point2, Point2, Point2]:
        return self.p0, self.p1, self.p2, self.p3

    def polygon_length(self) -> float:
        legs = np.diff(self.as_array(), axis=0)
        return float(np.sum(np.hypot(legs[:, 0], legs[:, 1])))

    def longest_leg(self) -> float:
        legs = np.diff(self.as_array(), axis=0)
        return float(np.max(np.hypot(legs[:, 0], legs[:, 1])))


@dataclass(frozen=True)
class FitError:
    rms: float
    max: float


def bernstein_basis(u: np.ndarray) -> np.ndarray:
    """(n, 4) cubic Bernstein weights for parameters u."""
    u = np.asarray(u, dtype=np.float64)
    v = 1.0 - u
    return np.stack([v * v * v, 3.0 * u * v * v, 3.0 * u * u * v, u * u * u], axis=-1)


def _check_parameter(u):
    u_arr = np.asarray(u, dtype=np.float64)
    if np.any(~np.isfinite(u_arr)) or np.any(u_arr < 0.0) or np.any(u_arr > 1.0):
        raise ValueError(f"Curve parameter must lie in [0, 1], got {u}")


def evaluate_many(c: CubicBezier, u: np.ndarray) -> np.ndarray:
    """B(u) for an array of parameters; returns (n, 2)."""
    _check_parameter(u)
    return bernstein_basis(np.atleast_1d(u)) @ c.as_array()


def evaluate(c: CubicBezier, u: float) -> Point2:
    """
    B(u) = P0(1-u)^3 + 3 P1 u(1-u)^2 + 3 P2 u^2(1-u) + P3 u^3.

    Exact at the endpoints: B(0) == P0 and B(1) == P3.

    Raises:
        ValueError: If u is outside [0, 1]
    """
    x, y = evaluate_many(c, np.array([u]))[0]
    return Point2(x, y)


def power_coefficients(c: CubicBezier) -> np.ndarray:
    """
    Power-basis coefficients (a3, a2, a1, a0), each an (x, y) pair, of
    B(u) = a3 u^3 + a2 u^2 + a1 u + a0.
    """
    p0, p1, p2, p3 = c.as_array()
    return np.array([
        p3 + 3.0 * (p1 - p2) - p0,
        3.0 * (p0 - 2.0 * p1 + p2),
        3.0 * (p1 - p0),
        p0,
    ])


def derivative(c: CubicBezier, u: np.ndarray) -> np.ndarray:
    """B'(u) for an array of parameters; returns (n, 2)."""
    u = np.atleast_1d(np.asarray(u, dtype=np.float64))[:, None]
    p0, p1, p2, p3 = c.as_array()
    v = 1.0 - u
    return 3.0 * (v * v * (p1 - p0) + 2.0 * u * v * (p2 - p1) + u * u * (p3 - p2))


def evaluate_general(controls: Sequence[Point2], u: float) -> Point2:
    """
    Degree-N Bezier point: sum_k P_k * C(N, k) * u^k * (1-u)^(N-k).

    Raises:
        ValueError: If fewer than 2 control points are given or u is outside [0, 1]
    """
    if len(controls) < 2:
        raise ValueError(f"A Bezier curve needs at least 2 control points, got {len(controls)}")
    _check_parameter(u)
    degree = len(controls) - 1
    x = y = 0.0
    for k, p in enumerate(controls):
        weight = math.comb(degree, k) * u ** k * (1.0 - u) ** (degree - k)
        x += p.x * weight
        y += p.y * weight
    return Point2(x, y)


def chord_length_parameters(points: np.ndarray) -> np.ndarray:
    """Cumulative point-to-point distance normalized to [0, 1]."""
    steps = np.hypot(*np.diff(points, axis=0).T)
    cumulative = np.concatenate([[0.0], np.cumsum(steps)])
    if cumulative[-1] == 0.0:
        return np.linspace(0.0, 1.0, len(points))
    u = cumulative / cumulative[-1]
    u[-1] = 1.0
    return u


def _thirds(p0: np.ndarray, p3: np.ndarray) -> np.ndarray:
    return np.array([p0, p0 + (p3 - p0) / 3.0, p0 + 2.0 * (p3 - p0) / 3.0, p3])


def _solve_interior(points: np.ndarray, u: np.ndarray):
    """Least-squares P1, P2 with P0, P3 pinned to the path ends; None if near-singular."""
    basis = bernstein_basis(u)
    p0, p3 = points[0], points[-1]
    rhs = points - np.outer(basis[:, 0], p0) - np.outer(basis[:, 3], p3)
    a = basis[:, 1:3]
    normal = a.T @ a
    n = len(points)
    if abs(np.linalg.det(normal)) / (n * n) < SINGULAR_DET:
        return None
    interior = np.linalg.solve(normal, a.T @ rhs)
    return np.array([p0, interior[0], interior[1], p3])


def _cost(controls: np.ndarray, u: np.ndarray, points: np.ndarray) -> float:
    residual = bernstein_basis(u) @ controls - points
    return float(np.sum(residual * residual))


def _closest_parameters(controls: np.ndarray, points: np.ndarray):
    """
    Parameter of the nearest curve point for every path point: nearest of
    ERROR_SAMPLES uniform samples, then clamped Newton steps on the parameter.

    Returns:
        (u, squared distance) arrays, one entry per point
    """
    samples_u = np.linspace(0.0, 1.0, ERROR_SAMPLES)
    samples = bernstein_basis(samples_u) @ controls
    diff = points[:, None, :] - samples[None, :, :]
    dist2 = np.sum(diff * diff, axis=2)
    nearest = np.argmin(dist2, axis=1)
    best = dist2[np.arange(len(points)), nearest]

    step = 1.0 / (ERROR_SAMPLES - 1)
    lo = np.clip(samples_u[nearest] - step, 0.0, 1.0)
    hi = np.clip(samples_u[nearest] + step, 0.0, 1.0)
    u = samples_u[nearest].copy()
    a3, a2, a1, a0 = power_coefficients(CubicBezier.from_array(controls))
    for _ in range(8):
        uu = u[:, None]
        pos = ((a3 * uu + a2) * uu + a1) * uu + a0
        d1 = (3.0 * a3 * uu + 2.0 * a2) * uu + a1
        d2 = 6.0 * a3 * uu + 2.0 * a2
        offset = pos - points
        numerator = np.sum(offset * d1, axis=1)
        denominator = np.sum(d1 * d1, axis=1) + np.sum(offset * d2, axis=1)
        safe = np.abs(denominator) > 1e-12
        u = np.where(safe, u - numerator / np.where(safe, denominator, 1.0), u)
        u = np.clip(u, lo, hi)

    refined = bernstein_basis(u) @ controls - points
    refined2 = np.sum(refined * refined, axis=1)
    better = refined2 < best
    return np.where(better, u, samples_u[nearest]), np.where(better, refined2, best)


def _reparameterize(controls: np.ndarray, u: np.ndarray, points: np.ndarray):
    """
    One parameter-correction sweep: move every interior u_i to the nearest
    point of the current curve, then re-solve P1, P2 for those parameters.

    Returns:
        (controls, u), or None if the re-solve is near-singular
    """
    closest, _ = _closest_parameters(controls, points)
    new_u = u.copy()
    new_u[1:-1] = closest[1:-1]
    new_controls = _solve_interior(points, new_u)
    if new_controls is None:
        return None
    return new_controls, new_u



def _refine(controls: np.ndarray, u: np.ndarray, points: np.ndarray, max_iters: int):
    """
    Damped Gauss-Newton over (P1, P2, u_1..u_{n-2}).

    The normal equations have a diagonal block for the parameters, so each
    step reduces to a 4x4 Schur complement solve. Damping follows the gain
    ratio of each step. When no damping lowers the residual, one
    parameter-correction sweep is tried before giving up.

    Stops when the residual falls below VANISHING_COST per point, when every
    Jacobian column is orthogonal to the residual within GRADIENT_TOL, or when
    a lightly damped step no longer moves the controls or lowers the residual
    by more than STALL_TOL relative. Heavily damped steps never end the loop.
    """
    controls = controls.copy()
    u = u.copy()
    free = np.zeros(len(u), dtype=bool)
    free[1:-1] = True
    cost = _cost(controls, u, points)
    floor = VANISHING_COST * len(points)
    scale = max(float(np.ptp(points, axis=0).max()), 1.0)
    damping = INITIAL_DAMPING
    growth = 2.0

    for _ in range(max_iters):
        if cost <= floor:
            break
        basis = bernstein_basis(u)
        residual = basis @ controls - points
        p0, p1, p2, p3 = controls
        v = (1.0 - u)[:, None]
        uu = u[:, None]
        speed = 3.0 * (v * v * (p1 - p0) + 2.0 * uu * v * (p2 - p1) + uu * uu * (p3 - p2))

        b1, b2 = basis[:, 1], basis[:, 2]
        diag = np.where(free, np.sum(speed * speed, axis=1), 1.0)
        grad_u = np.where(free, np.sum(speed * residual, axis=1), 0.0)
        # unknowns ordered p1x, p2x, p1y, p2y
        coupling = np.stack([speed[:, 0] * b1, speed[:, 0] * b2,
                             speed[:, 1] * b1, speed[:, 1] * b2], axis=1)
        coupling[~free] = 0.0
        m = np.array([[b1 @ b1, b1 @ b2], [b1 @ b2, b2 @ b2]])
        block = np.zeros((4, 4))
        block[:2, :2] = m
        block[2:, 2:] = m
        grad_c = np.array([b1 @ residual[:, 0], b2 @ residual[:, 0],
                           b1 @ residual[:, 1], b2 @ residual[:, 1]])

        column_norms = np.sqrt(np.concatenate([np.diag(block), diag[free]]))
        gradient = np.abs(np.concatenate([grad_c, grad_u[free]]))
        if np.all(gradient <= GRADIENT_TOL * math.sqrt(cost) * column_norms):
            break

        accepted = None
        while damping < MAX_DAMPING:
            d = diag * (1.0 + damping) + 1e-12
            f = block + damping * np.diag(np.diag(block)) + 1e-12 * np.eye(4)
            schur = f - coupling.T @ (coupling / d[:, None])
            rhs = -grad_c + coupling.T @ (grad_u / d)
            try:
                step_c = np.linalg.solve(schur, rhs)
            except np.linalg.LinAlgError:
                damping *= growth
                growth *= 2.0
                continue
            step_u = np.where(free, (-grad_u - coupling @ step_c) / d, 0.0)

            trial_u = np.where(free, np.clip(u + step_u, 0.0, 1.0), u)
            trial_c = controls.copy()
            trial_c[1] += step_c[[0, 2]]
            trial_c[2] += step_c[[1, 3]]
            trial_cost = _cost(trial_c, trial_u, points)

            linear = (residual + speed * step_u[:, None]
                      + b1[:, None] * step_c[[0, 2]] + b2[:, None] * step_c[[1, 3]])
            predicted = cost - float(np.sum(linear * linear))
            if trial_cost < cost and predicted > 0.0:
                gain = (cost - trial_cost) / predicted
                accepted = (trial_c, trial_u, trial_cost, float(np.abs(step_c).max()), damping)
                damping = max(damping * max(1.0 / 3.0, 1.0 - (2.0 * gain - 1.0) ** 3),
                              MIN_DAMPING)
                growth = 2.0
                break
            damping *= growth
            growth *= 2.0

        if accepted is None:
            damping, growth = INITIAL_DAMPING, 2.0
            swept = _reparameterize(controls, u, points)
            if swept is None:
                break
            swept_cost = _cost(swept[0], swept[1], points)
            if swept_cost >= cost:
                break
            controls, u = swept
            cost = swept_cost
            continue

        previous_cost = cost
        controls, u, cost, step_size, used_damping = accepted
        if used_damping <= INITIAL_DAMPING and (step_size <= STEP_TOL * scale
                                                or previous_cost - cost <= STALL_TOL * previous_cost):
            break

    return controls, u


@dataclass(frozen=True)
class RidgeFit:
    """A fitted curve plus whether the chord-thirds fallback produced it."""
    curve: CubicBezier
    fallback: bool


def fit_ridge_detail(path: Union[RidgePath, np.ndarray],
                     refine_iters: int = DEFAULT_REFINE_ITERS) -> RidgeFit:
    """
    Fit one cubic to an ordered ridge path.

    P0 and P3 are the first and last path points. P1 and P2 minimize
    sum ||B(u_i) - Q_i||^2 with chord-length parameters u_i; then up to
    `refine_iters` damped Gauss-Newton steps adjust P1, P2 and the interior
    u_i jointly, never increasing the residual. Paths shorter than 4 points,
    or with a near-singular normal matrix, get P1, P2 at the thirds of the
    chord P0P3.

    Args:
        path: Ordered ridge pixels, or an (n, 2) array of points
        refine_iters: Maximum refinement iterations, 0 for the plain chord-length fit

    Returns:
        RidgeFit with the curve and the fallback flag

    Raises:
        ValueError: If the path has fewer than 2 points
    """
    points = path.as_array() if isinstance(path, RidgePath) else np.asarray(path, dtype=np.float64)
    if len(points) < 2:
        raise ValueError(f"Cannot fit a curve to {len(points)} point(s)")

    p0, p3 = points[0], points[-1]
    if len(points) < 4:
        return RidgeFit(CubicBezier.from_array(_thirds(p0, p3)), fallback=True)

    u = chord_length_parameters(points)
    controls = _solve_interior(points, u)
    if controls is None:
        logger.warning(f"Near-singular fit on {len(points)} points, using chord thirds")
        return RidgeFit(CubicBezier.from_array(_thirds(p0, p3)), fallback=True)

    if refine_iters > 0:
        controls, _ = _refine(controls, u, points, refine_iters)
    # endpoints are never moved
    controls[0], controls[3] = p0, p3
    return RidgeFit(CubicBezier.from_array(controls), fallback=False)


def fit_ridge(path: Union[RidgePath, np.ndarray],
              refine_iters: int = DEFAULT_REFINE_ITERS) -> CubicBezier:
    """Fitted curve only; see `fit_ridge_detail`."""
    return fit_ridge_detail(path, refine_iters).curve


def fit_error(c: CubicBezier, path: Union[RidgePath, np.ndarray]) -> FitError:
    """
    Distance from each path point to the curve: nearest of 256 uniform samples,
    then a few clamped Newton steps on the parameter.

    Returns:
        FitError with rms and max distance in pixels
    """
    points = path.as_array() if isinstance(path, RidgePath) else np.asarray(path, dtype=np.float64)
    _, best = _closest_parameters(c.as_array(), points)
    distances = np.sqrt(best)
    return FitError(rms=float(np.sqrt(np.mean(best))), max=float(distances.max()))
