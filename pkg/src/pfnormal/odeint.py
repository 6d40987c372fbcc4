"""Adaptive Dormand-Prince integration along real and complex paths.

Each straight segment a -> b of a path is parameterized by arc length
u in [0, |b - a|], t = a + u (b - a)/|b - a|, and the pulled-back system
dy/du = e * F(t, y) is integrated with the real stepper.  The same module
hosts finite-difference derivatives with Richardson extrapolation.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .specfun import DEFAULT_TOL, ToleranceSpec


class IntegrationError(ArithmeticError):
    pass


class StepUnderflowError(IntegrationError):
    def __init__(self, t: complex, h: float):
        super().__init__(f"step size underflow (h={h:.3g}) near t={t}")
        self.t = t


class MaxStepsError(IntegrationError):
    pass


class NoiseFloorError(ArithmeticError):
    def __init__(self, value: complex, err: float, tol: float):
        super().__init__(f"derivative error estimate {err:.3g} stalled above tolerance {tol:.3g}")
        self.value = value
        self.err = err


# Dormand-Prince 5(4) tableau and Hairer's dense-output weights
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)
_D = (-12715105075 / 11282082432, 0.0, 87487479700 / 32700410799, -10690763975 / 1880347072,
      701980252875 / 199316789632, -1453857185 / 822651844, 69997945 / 29380423)


@dataclass(frozen=True)
class PathSpec:
    """Piecewise-linear path through complex waypoints."""

    waypoints: tuple
    clearance: float = 0.05
    singular: tuple = (0.0, 1.0)

    def __post_init__(self):
        pts = tuple(complex(w) for w in self.waypoints)
        object.__setattr__(self, "waypoints", pts)
        object.__setattr__(self, "singular", tuple(complex(s) for s in self.singular))
        if len(pts) < 2:
            raise ValueError("a path needs at least two waypoints")
        if self.clearance <= 0:
            raise ValueError("clearance must be positive")
        for a, b in zip(pts, pts[1:]):
            if a == b:
                raise ValueError(f"repeated waypoint {a}")
            for s in self.singular:
                if _segment_distance(a, b, s) < self.clearance:
                    raise ValueError(f"segment {a} -> {b} passes within {self.clearance} of {s}")

    @classmethod
    def interval(cls, a: float, b: float, clearance: float = 0.05, singular=(0.0, 1.0)) -> "PathSpec":
        return cls((a, b), clearance, tuple(singular))

    @property
    def length(self) -> float:
        return sum(abs(b - a) for a, b in zip(self.waypoints, self.waypoints[1:]))


def _segment_distance(a: complex, b: complex, p: complex) -> float:
    d = b - a
    u = ((p - a) * d.conjugate()).real / abs(d) ** 2
    u = min(1.0, max(0.0, u))
    return abs(a + u * d - p)


@dataclass
class _Step:
    s0: float
    h: float
    t0: complex
    direction: complex
    rcont: np.ndarray  # shape (5, dim)


@dataclass
class Trajectory:
    """Accepted samples along a path plus per-step dense output."""

    s: np.ndarray
    t: np.ndarray
    y: np.ndarray
    err: np.ndarray
    steps: list = field(default_factory=list, repr=False)
    field_fn: Callable | None = field(default=None, repr=False)
    tol: ToleranceSpec = DEFAULT_TOL

    def __len__(self):
        return len(self.s)

    @property
    def t_end(self) -> complex:
        return complex(self.t[-1])

    @property
    def y_end(self) -> np.ndarray:
        return self.y[-1]

    def at_param(self, s: float) -> np.ndarray:
        """State at arc-length parameter s via dense output."""
        i = int(np.searchsorted(self.s, s))
        if i < len(self.s) and self.s[i] == s:
            return self.y[i].copy()
        if not self.steps:
            raise ValueError("trajectory has no dense output")
        if s < self.s[0] or s > self.s[-1]:
            raise ValueError(f"parameter {s} outside [{self.s[0]}, {self.s[-1]}]")
        st = self.steps[max(0, min(i - 1, len(self.steps) - 1))]
        th = (s - st.s0) / st.h
        th1 = 1.0 - th
        r = st.rcont
        return r[0] + th * (r[1] + th1 * (r[2] + th * (r[3] + th1 * r[4])))

    def param_of(self, t: complex) -> float:
        """Arc-length parameter of a point on the path."""
        t = complex(t)
        best, best_d = None, math.inf
        for st in self.steps or []:
            u = ((t - st.t0) / st.direction)
            if -1e-12 * (1 + st.h) <= u.real <= st.h * (1 + 1e-12):
                d = abs(u.imag)
                if d < best_d:
                    best, best_d = st.s0 + min(max(u.real, 0.0), st.h), d
        if best is None or best_d > 1e-9 * (1 + abs(t)):
            i = int(np.argmin(np.abs(self.t - t)))
            if abs(self.t[i] - t) <= 1e-12 * (1 + abs(t)):
                return float(self.s[i])
            raise ValueError(f"{t} is not on the trajectory path")
        return best

    def state(self, t: complex) -> np.ndarray:
        return self.at_param(self.param_of(t))

    def rate(self, t: complex) -> np.ndarray:
        """dy/dt from the field at the interpolated state."""
        if self.field_fn is None:
            raise ValueError("trajectory does not carry its field")
        return np.asarray(self.field_fn(complex(t), self.state(t)), dtype=complex)

    def to_json(self) -> str:
        rows = []
        for ti, yi, ei in zip(self.t, self.y, self.err):
            rows.append({"t": [float(ti.real), float(ti.imag)],
                         "y": [[float(v.real), float(v.imag)] for v in yi],
                         "err": float(ei)})
        return json.dumps(rows, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Trajectory":
        rows = json.loads(text)
        t = np.array([complex(*r["t"]) for r in rows])
        y = np.array([[complex(*v) for v in r["y"]] for r in rows])
        s = np.concatenate([[0.0], np.cumsum(np.abs(np.diff(t)))]) if len(t) else np.array([])
        return cls(s, t, y, np.array([r["err"] for r in rows]))


def _dopri_step(fn, s, y, h, k1):
    k = [k1]
    for i in range(1, 7):
        yi = y + h * sum(a * kj for a, kj in zip(_A[i], k))
        k.append(fn(s + _C[i] * h, yi))
    y_new = y + h * sum(a * kj for a, kj in zip(_A[6], k))
    e = h * sum(c * kj for c, kj in zip(_E, k))
    return y_new, e, k


def _dense(y, y_new, h, k) -> np.ndarray:
    ydiff = y_new - y
    bspl = h * k[0] - ydiff
    r5 = h * sum(d * kj for d, kj in zip(_D, k))
    return np.array([y, ydiff, bspl, ydiff - h * k[6] - bspl, r5])


def integrate(field: Callable, t0: complex, y0: Sequence, path: PathSpec,
              tol: ToleranceSpec = DEFAULT_TOL, h0: float | None = None,
              max_steps: int = 200000) -> Trajectory:
    """Integrate y' = field(t, y) from t0 along the path waypoints.

    ``t0`` must equal the first waypoint.  Every accepted step satisfies
    max|local error| <= abs_tol + rel_tol * max|y|.
    """
    if abs(complex(t0) - path.waypoints[0]) > 1e-14 * (1 + abs(t0)):
        raise ValueError("t0 must be the first waypoint of the path")
    y = np.array(y0, dtype=complex).reshape(-1)
    s_total = 0.0
    S, T, Y, ERR = [0.0], [complex(t0)], [y.copy()], [0.0]
    steps: list[_Step] = []
    n_steps = 0
    h_prev = h0
    for a, b in zip(path.waypoints, path.waypoints[1:]):
        L = abs(b - a)
        e = (b - a) / L

        def fn(u, yy, a=a, e=e):
            return e * np.asarray(field(a + u * e, yy), dtype=complex)

        u = 0.0
        k1 = fn(u, y)
        h = h_prev if h_prev is not None else _initial_step(fn, y, k1, L, tol)
        h = min(h, L)
        while u < L:
            n_steps += 1
            if n_steps > max_steps:
                raise MaxStepsError(f"more than {max_steps} steps")
            last = u + h >= L * (1 - 1e-13)
            if last:
                h = L - u
            if h <= 1e-14 * (1.0 + s_total + u):
                raise StepUnderflowError(a + u * e, h)
            y_new, err_vec, k = _dopri_step(fn, u, y, h, k1)
            scale = tol.abs_tol + tol.rel_tol * np.maximum(np.abs(y), np.abs(y_new))
            err_abs = float(np.max(np.abs(err_vec))) if err_vec.size else 0.0
            ratio = float(np.max(np.abs(err_vec) / scale)) if err_vec.size else 0.0
            if not np.all(np.isfinite(y_new)):
                ratio = math.inf
            if ratio <= 1.0:
                steps.append(_Step(s_total + u, h, a + u * e, e, _dense(y, y_new, h, k)))
                u = L if last else u + h
                y = y_new
                k1 = k[6]
                S.append(s_total + u)
                T.append(b if last else a + u * e)
                Y.append(y.copy())
                ERR.append(err_abs)
                fac = 10.0 if ratio == 0 else min(10.0, max(0.2, 0.9 * ratio ** -0.2))
                h_prev = h * fac
                h = h_prev
            else:
                fac = 0.2 if not math.isfinite(ratio) else max(0.2, 0.9 * ratio ** -0.2)
                h = h * fac
        s_total += L
    return Trajectory(np.array(S), np.array(T), np.array(Y), np.array(ERR), steps, field, tol)


def _initial_step(fn, y, k1, L, tol) -> float:
    sc = tol.abs_tol + tol.rel_tol * np.abs(y)
    d0 = float(np.sqrt(np.mean(np.abs(y / sc) ** 2)))
    d1 = float(np.sqrt(np.mean(np.abs(k1 / sc) ** 2)))
    h = 0.01 * d0 / d1 if d0 > 1e-5 and d1 > 1e-5 else 1e-6
    h = min(h, L)
    k2 = fn(h, y + h * k1)
    d2 = float(np.sqrt(np.mean(np.abs((k2 - k1) / sc) ** 2))) / h
    m = max(d1, d2)
    h1 = (0.01 / m) ** 0.2 if m > 1e-15 else max(1e-6, h * 1e-3)
    return min(100 * h, h1, L)


# numerical differentiation


def _stencil(fn, t, h, n, d):
    if n == 1:
        return (fn(t + d * h) - fn(t - d * h)) / (2 * h * d)
    if n == 2:
        return (fn(t + d * h) - 2 * fn(t) + fn(t - d * h)) / (h * d) ** 2
    if n == 3:
        return (fn(t + 2 * d * h) - 2 * fn(t + d * h) + 2 * fn(t - d * h) - fn(t - 2 * d * h)) / (2 * (h * d) ** 3)
    raise ValueError(f"derivative order must be 1..3, got {n}")


def nth_derivative(fn: Callable, t: complex, n: int, scale: float, tol: float | None = None,
                   levels: int = 7, direction: complex = 1.0) -> tuple[complex, float]:
    """n-th derivative by central differences and Richardson extrapolation.

    Step sizes scale, scale/2, ...; the tableau removes h^2, h^4, ... terms,
    so the diagonal after two levels is already sixth order.  The error
    estimate is the difference of consecutive diagonal entries; refinement
    stops once it stops decreasing.  With ``tol`` set, an estimate that
    stalls above tol raises NoiseFloorError.
    """
    if n not in (1, 2, 3):
        raise ValueError(f"derivative order must be 1..3, got {n}")
    if scale <= 0:
        raise ValueError("scale must be positive")
    rows: list[list] = []
    best_val, best_err = None, math.inf
    rising = 0
    for j in range(levels):
        h = scale / 2 ** j
        row = [_stencil(fn, t, h, n, direction)]
        for k in range(1, j + 1):
            row.append(row[k - 1] + (row[k - 1] - rows[j - 1][k - 1]) / (4 ** k - 1))
        rows.append(row)
        if j == 0:
            continue
        err = abs(row[j] - rows[j - 1][j - 1])
        if err < best_err:
            best_val, best_err = row[j], err
            rising = 0
        else:
            rising += 1
            if rising >= 2:
                break
        if err == 0:
            break
    if tol is not None and best_err > tol:
        raise NoiseFloorError(best_val, best_err, tol)
    return best_val, best_err


def cauchy_derivatives(fn: Callable, t: complex, nmax: int, radius: float,
                       points: int = 32) -> tuple[list, list]:
    """Derivatives 0..nmax of an analytic fn from its Taylor coefficients.

    fn is sampled on the circle |z - t| = radius and the coefficients come
    from one FFT.  The error estimate per order combines the tail of the
    coefficient sequence (aliasing) with the roundoff amplification
    n! eps max|f| / radius^n.  A circle that is not inside the disk of
    analyticity shows up as a slowly decaying tail.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    if points < 4 * (nmax + 1):
        raise ValueError("too few points for this order")
    z = t + radius * np.exp(2j * np.pi * np.arange(points) / points)
    vals = np.array([complex(fn(complex(v))) for v in z])
    c = np.fft.fft(vals) / points  # c[k] = a_k radius^k
    fmax = float(np.max(np.abs(vals)))
    floor = 4 * np.finfo(float).eps * fmax
    # decay rate of the coefficients between N/4 and N/2 predicts the aliased term c[n + N]
    q, h = points // 4, points // 2
    mid = max(float(np.max(np.abs(c[q - 1:q + 2]))), floor)
    top = max(float(np.max(np.abs(c[h - 1:h + 2]))), floor)
    rho = min(1.0, (top / mid) ** (1.0 / (h - q)))
    derivs, errs = [], []
    for n in range(nmax + 1):
        fact = math.factorial(n)
        derivs.append(complex(fact * c[n] / radius ** n))
        alias = top * rho ** (h + n)
        errs.append(fact * (alias + floor) / radius ** n)
    return derivs, errs
