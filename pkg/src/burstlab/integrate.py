"""Adaptive ODE integration with dense output and event detection.

A single Dormand-Prince 5(4) engine serves every simulation in the package.
States are plain tuples of floats: for systems of dimension 2 to 7 this is
considerably faster in CPython than array-based steppers, and the landscape
sweeps need that throughput. Dense output uses the standard fourth-order
interpolant of the pair; event times are localized on it by Brent's method,
decoupled from step-size control.

A classical fixed-step RK4 integrator is provided as an independent accuracy
oracle and is never used by the production code paths.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.optimize import brentq

# Dormand-Prince 5(4) tableau (FSAL: stage 7 evaluates at the new point)
_C2, _C3, _C4, _C5 = 0.2, 0.3, 0.8, 8.0 / 9.0
_A21 = 0.2
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = (19372.0 / 6561.0, -25360.0 / 2187.0,
                          64448.0 / 6561.0, -212.0 / 729.0)
_A61, _A62, _A63, _A64, _A65 = (9017.0 / 3168.0, -355.0 / 33.0,
                                46732.0 / 5247.0, 49.0 / 176.0,
                                -5103.0 / 18656.0)
_B1, _B3, _B4, _B5, _B6 = (35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0,
                           -2187.0 / 6784.0, 11.0 / 84.0)
_E1, _E3, _E4, _E5, _E6, _E7 = (71.0 / 57600.0, -71.0 / 16695.0, 71.0 / 1920.0,
                                -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0)

# Interpolant coefficients: y(t0 + x h) = y0 + h sum_j x^(j+1) (K^T P)[:, j]
_P = np.array([
    [1.0, -8048581381.0 / 2820520608.0, 8663915743.0 / 2820520608.0,
     -12715105075.0 / 11282082432.0],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 131558114200.0 / 32700410799.0, -68118460800.0 / 10900136933.0,
     87487479700.0 / 32700410799.0],
    [0.0, -1754552775.0 / 470086768.0, 14199869525.0 / 1410260304.0,
     -10690763975.0 / 1880347072.0],
    [0.0, 127303824393.0 / 49829197408.0, -318862633887.0 / 49829197408.0,
     701980252875.0 / 199316789632.0],
    [0.0, -282668133.0 / 205662961.0, 2019193451.0 / 616988883.0,
     -1453857185.0 / 822651844.0],
    [0.0, 40617522.0 / 29380423.0, -110615467.0 / 29380423.0,
     69997945.0 / 29380423.0],
])

_MAX_FACTOR = 10.0
_MIN_FACTOR = 0.2
_SAFETY = 0.9


class StepSizeError(RuntimeError):
    """Step size underflow (stiffness or blow-up); carries the last good time."""

    def __init__(self, message: str, t_last: float):
        super().__init__(message)
        self.t_last = t_last


@dataclass(frozen=True)
class EventRecord:
    """One localized sign change of an event test function."""

    index: int              # position of the test function in the event list
    t: float
    y: tuple
    direction: int          # +1 upward crossing, -1 downward
    label: str = ""


class Trajectory:
    """Solution samples at the accepted steps plus a dense interpolant."""

    def __init__(self, ts: np.ndarray, ys: np.ndarray, dense: np.ndarray,
                 rel_tol: float, abs_tol: float):
        self.ts = ts            # (n,)
        self.ys = ys            # (n, dim)
        self._dense = dense     # (n-1, 4, dim)
        self.rel_tol = rel_tol
        self.abs_tol = abs_tol

    @property
    def t0(self) -> float:
        return float(self.ts[0])

    @property
    def t1(self) -> float:
        return float(self.ts[-1])

    @property
    def dim(self) -> int:
        return self.ys.shape[1]

    def sample(self, t):
        """Evaluate the dense interpolant at scalar or array times."""
        t_arr = np.asarray(t, dtype=float)
        scalar = t_arr.ndim == 0
        tq = np.atleast_1d(t_arr)
        if tq.size and (tq.min() < self.ts[0] - 1e-9 or tq.max() > self.ts[-1] + 1e-9):
            raise ValueError("sample time outside the integrated span")
        idx = np.clip(np.searchsorted(self.ts, tq, side="right") - 1,
                      0, len(self.ts) - 2)
        h = self.ts[idx + 1] - self.ts[idx]
        x = (tq - self.ts[idx]) / h
        d = self._dense[idx]                      # (m, 4, dim)
        xs = x[:, None]
        acc = d[:, 3, :]
        acc = d[:, 2, :] + xs * acc
        acc = d[:, 1, :] + xs * acc
        acc = d[:, 0, :] + xs * acc
        out = self.ys[idx] + (h * x)[:, None] * acc
        return out[0] if scalar else out

    def write_csv(self, fh, columns: Optional[Sequence[str]] = None) -> None:
        names = columns or [f"y{i}" for i in range(self.dim)]
        fh.write("t," + ",".join(names) + "\n")
        for i in range(len(self.ts)):
            row = ",".join(f"{val:.17g}" for val in self.ys[i])
            fh.write(f"{self.ts[i]:.17g},{row}\n")

    def to_csv(self, path, columns: Optional[Sequence[str]] = None) -> None:
        with open(path, "w") as fh:
            self.write_csv(fh, columns)


def _initial_step(rhs, t0, y0, f0, direction, rel_tol, abs_tol, max_step):
    scale = [abs_tol + rel_tol * abs(yi) for yi in y0]
    d0 = math.sqrt(sum((yi / si) ** 2 for yi, si in zip(y0, scale)) / len(y0))
    d1 = math.sqrt(sum((fi / si) ** 2 for fi, si in zip(f0, scale)) / len(y0))
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    y1 = tuple(yi + h0 * direction * fi for yi, fi in zip(y0, f0))
    f1 = rhs(t0 + h0 * direction, y1)
    d2 = math.sqrt(sum(((a - b) / si) ** 2
                       for a, b, si in zip(f1, f0, scale)) / len(y0)) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100.0 * h0, h1, max_step)


def _step_dim2(rhs, t, y, f, h, rel_tol, abs_tol):
    # unrolled Dormand-Prince stage sweep for two-variable systems; this is
    # the hot path of the landscape sweeps
    a0, a1 = y
    k10, k11 = f
    k20, k21 = rhs(t + _C2 * h, (a0 + h * _A21 * k10, a1 + h * _A21 * k11))
    k30, k31 = rhs(t + _C3 * h, (a0 + h * (_A31 * k10 + _A32 * k20),
                                 a1 + h * (_A31 * k11 + _A32 * k21)))
    k40, k41 = rhs(t + _C4 * h, (a0 + h * (_A41 * k10 + _A42 * k20 + _A43 * k30),
                                 a1 + h * (_A41 * k11 + _A42 * k21 + _A43 * k31)))
    k50, k51 = rhs(t + _C5 * h,
                   (a0 + h * (_A51 * k10 + _A52 * k20 + _A53 * k30 + _A54 * k40),
                    a1 + h * (_A51 * k11 + _A52 * k21 + _A53 * k31 + _A54 * k41)))
    k60, k61 = rhs(t + h,
                   (a0 + h * (_A61 * k10 + _A62 * k20 + _A63 * k30
                              + _A64 * k40 + _A65 * k50),
                    a1 + h * (_A61 * k11 + _A62 * k21 + _A63 * k31
                              + _A64 * k41 + _A65 * k51)))
    b0 = a0 + h * (_B1 * k10 + _B3 * k30 + _B4 * k40 + _B5 * k50 + _B6 * k60)
    b1 = a1 + h * (_B1 * k11 + _B3 * k31 + _B4 * k41 + _B5 * k51 + _B6 * k61)
    y_new = (b0, b1)
    k70, k71 = rhs(t + h, y_new)
    e0 = h * (_E1 * k10 + _E3 * k30 + _E4 * k40 + _E5 * k50 + _E6 * k60 + _E7 * k70)
    e1 = h * (_E1 * k11 + _E3 * k31 + _E4 * k41 + _E5 * k51 + _E6 * k61 + _E7 * k71)
    sc0 = abs_tol + rel_tol * max(abs(a0), abs(b0))
    sc1 = abs_tol + rel_tol * max(abs(a1), abs(b1))
    r0 = e0 / sc0
    r1 = e1 / sc1
    err = math.sqrt(0.5 * (r0 * r0 + r1 * r1))
    k_step = ((k10, k11), (k20, k21), (k30, k31), (k40, k41),
              (k50, k51), (k60, k61), (k70, k71))
    return y_new, k_step, err


def _dense_eval(y0, h, k_step, x):
    """Scalar dense-output evaluation within one step (lists of tuples)."""
    out = []
    for i in range(len(y0)):
        acc = 0.0
        for j in (3, 2, 1, 0):
            coef = 0.0
            for s in range(7):
                coef += _P[s, j] * k_step[s][i]
            acc = coef + x * acc
        out.append(y0[i] + h * x * acc)
    return tuple(out)


def _solve(rhs, y0, t_span, rel_tol, abs_tol, max_step, event_fns, labels,
           max_steps=400_000):
    t0, t1 = float(t_span[0]), float(t_span[1])
    if not (t1 > t0):
        raise ValueError("t_span must satisfy t1 > t0")
    if not (0.0 < rel_tol <= 1e-2) or not (0.0 < abs_tol <= 1e-2):
        raise ValueError("tolerances must lie in (0, 1e-2]")
    y = tuple(float(v) for v in y0)
    dim = len(y)
    inv_dim = 1.0 / dim
    f = tuple(rhs(t0, y))
    if len(f) != dim:
        raise ValueError("rhs dimension does not match the initial state")
    h = _initial_step(rhs, t0, y, f, 1.0, rel_tol, abs_tol, max_step)
    span = t1 - t0
    h_min = 1e-14 * max(abs(t0), abs(t1), span)
    step2 = _step_dim2 if dim == 2 else None

    ts = [t0]
    ys = [y]
    ks = []
    events: list[EventRecord] = []
    if event_fns:
        g_prev = [fn(t0, y) for fn in event_fns]
    t = t0

    while t < t1:
        h = min(h, max_step, t1 - t)
        if h < h_min:
            raise StepSizeError(
                f"step size underflow at t = {t:.6g} ms", t)
        accepted = False
        while not accepted:
            if step2 is not None:
                y_new, k_step, err = step2(rhs, t, y, f, h, rel_tol, abs_tol)
                t_new = t + h
            else:
                k1 = f
                k2 = rhs(t + _C2 * h, tuple(yi + h * _A21 * a for yi, a in zip(y, k1)))
                k3 = rhs(t + _C3 * h, tuple(
                    yi + h * (_A31 * a + _A32 * b) for yi, a, b in zip(y, k1, k2)))
                k4 = rhs(t + _C4 * h, tuple(
                    yi + h * (_A41 * a + _A42 * b + _A43 * c)
                    for yi, a, b, c in zip(y, k1, k2, k3)))
                k5 = rhs(t + _C5 * h, tuple(
                    yi + h * (_A51 * a + _A52 * b + _A53 * c + _A54 * d)
                    for yi, a, b, c, d in zip(y, k1, k2, k3, k4)))
                k6 = rhs(t + h, tuple(
                    yi + h * (_A61 * a + _A62 * b + _A63 * c + _A64 * d + _A65 * e)
                    for yi, a, b, c, d, e in zip(y, k1, k2, k3, k4, k5)))
                y_new = tuple(
                    yi + h * (_B1 * a + _B3 * c + _B4 * d + _B5 * e + _B6 * g)
                    for yi, a, c, d, e, g in zip(y, k1, k3, k4, k5, k6))
                t_new = t + h
                k7 = rhs(t_new, y_new)
                err = 0.0
                for i in range(dim):
                    e_i = h * (_E1 * k1[i] + _E3 * k3[i] + _E4 * k4[i]
                               + _E5 * k5[i] + _E6 * k6[i] + _E7 * k7[i])
                    sc = abs_tol + rel_tol * max(abs(y[i]), abs(y_new[i]))
                    err += (e_i / sc) ** 2
                err = math.sqrt(err * inv_dim)
                k_step = (k1, k2, k3, k4, k5, k6, k7)
            if err <= 1.0:
                accepted = True
                factor = _MAX_FACTOR if err == 0.0 else min(
                    _MAX_FACTOR, _SAFETY * err ** -0.2)
            else:
                factor = max(_MIN_FACTOR, _SAFETY * err ** -0.2)
                h *= factor
                if h < h_min:
                    raise StepSizeError(
                        f"step size underflow at t = {t:.6g} ms", t)
                continue
        if event_fns:
            for ie, fn in enumerate(event_fns):
                g_new = fn(t_new, y_new)
                g_old = g_prev[ie]
                if (g_old < 0.0 <= g_new) or (g_old > 0.0 >= g_new):
                    x_root = brentq(
                        lambda x: fn(t + x * h, _dense_eval(y, h, k_step, x)),
                        0.0, 1.0, xtol=1e-12, rtol=8.9e-16)
                    te = t + x_root * h
                    ye = _dense_eval(y, h, k_step, x_root)
                    events.append(EventRecord(
                        index=ie, t=te, y=ye,
                        direction=1 if g_new > g_old else -1,
                        label=labels[ie] if labels else ""))
                g_prev[ie] = g_new

        ts.append(t_new)
        ys.append(y_new)
        ks.append(k_step)
        t, y, f = t_new, y_new, k_step[6]
        h *= factor
        if len(ts) > max_steps:
            raise StepSizeError(
                f"step budget ({max_steps}) exceeded at t = {t:.6g} ms; "
                "the problem is far stiffer than this engine expects", t)

    ts_arr = np.array(ts)
    ys_arr = np.array(ys)
    k_arr = np.array(ks)                      # (n-1, 7, dim)
    dense = np.einsum("sj,nsi->nji", _P, k_arr)
    traj = Trajectory(ts_arr, ys_arr, dense, rel_tol, abs_tol)
    events.sort(key=lambda e: e.t)
    return traj, events


def integrate(rhs: Callable, y0, t_span, rel_tol: float = 1e-8,
              abs_tol: float = 1e-8, max_step: float = 1.0,
              max_steps: int = 400_000) -> Trajectory:
    """Integrate y' = rhs(t, y) over t_span with dense output.

    Parameters
    ----------
    rhs : callable(t, y) -> tuple of derivatives
    y0 : initial state (sequence of floats)
    t_span : (t0, t1) with t1 > t0, in ms
    rel_tol, abs_tol : local error tolerances, each in (0, 1e-2]
    max_step : largest step in ms; the 1 ms default prevents skipping spikes
    max_steps : accepted-step budget guarding memory on runaway problems

    Raises
    ------
    StepSizeError
        on step-size underflow or an exhausted step budget; the exception
        carries the last good time.
    """
    traj, _ = _solve(rhs, y0, t_span, rel_tol, abs_tol, max_step, None, None,
                     max_steps)
    return traj


def detect_events(rhs: Callable, y0, t_span, event_fns: Sequence[Callable],
                  rel_tol: float = 1e-8, abs_tol: float = 1e-8,
                  max_step: float = 1.0, labels: Optional[Sequence[str]] = None,
                  max_steps: int = 400_000):
    """Integrate and localize every sign change of the scalar test functions.

    Each event function is evaluated at the accepted step endpoints; a sign
    change is refined on the dense interpolant with Brent's method, so event
    accuracy does not depend on step-size control decisions.

    Returns (Trajectory, list of EventRecord sorted by time).
    """
    return _solve(rhs, y0, t_span, rel_tol, abs_tol, max_step,
                  list(event_fns), list(labels) if labels else None,
                  max_steps)


def rk4(rhs: Callable, y0, t_span, h: float):
    """Fixed-step classical Runge-Kutta solution; accuracy oracle only.

    Returns (ts, ys) as numpy arrays including both endpoints; the final
    step is shortened to land exactly on t1.
    """
    t0, t1 = float(t_span[0]), float(t_span[1])
    y = tuple(float(v) for v in y0)
    ts = [t0]
    ys = [y]
    t = t0
    while t < t1 - 1e-12:
        step = min(h, t1 - t)
        k1 = rhs(t, y)
        k2 = rhs(t + 0.5 * step, tuple(yi + 0.5 * step * a for yi, a in zip(y, k1)))
        k3 = rhs(t + 0.5 * step, tuple(yi + 0.5 * step * a for yi, a in zip(y, k2)))
        k4 = rhs(t + step, tuple(yi + step * a for yi, a in zip(y, k3)))
        y = tuple(yi + step / 6.0 * (a + 2.0 * b + 2.0 * c + d)
                  for yi, a, b, c, d in zip(y, k1, k2, k3, k4))
        t += step
        ts.append(t)
        ys.append(y)
    return np.array(ts), np.array(ys)
