"""Fixed-step RK4 integration of the mean-field equations."""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

from .model import (
    COMPARTMENTS,
    NEGATIVE_TOL,
    SUM_TOL,
    ModelParams,
    StateVector,
    _rhs,
    check_params,
    check_state,
    discernibility,
)

STEADY = "steady_state"
HORIZON = "horizon"

#: Density-sum drift that aborts an integration.
DRIFT_TOL = 1e-6


class NumericalInstabilityError(ArithmeticError):
    def __init__(self, t: float, message: str):
        super().__init__(f"t={t:.6g}: {message}")
        self.t = t


class NotConvergedError(RuntimeError):
    pass


@dataclass(frozen=True)
class IntegrationOptions:
    step: float = 0.01
    t_max: float = 500.0
    sample_every: int = 10
    active_tol: float = 1e-10

    def __post_init__(self):
        if not (self.step > 0 and self.t_max > 0 and self.active_tol > 0):
            raise ValueError("step, t_max and active_tol must be positive")
        if self.step >= self.t_max:
            raise ValueError("step must be smaller than t_max")
        if int(self.sample_every) != self.sample_every or self.sample_every < 1:
            raise ValueError("sample_every must be an integer >= 1")


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # shape (n_samples, 6)
    terminated_by: str
    final: StateVector
    t_final: float
    # s1 maximum over every computed step, not only recorded samples
    peak_s1: float = 0.0
    peak_s1_time: float = 0.0
    options: IntegrationOptions = field(default_factory=IntegrationOptions)

    @property
    def converged(self) -> bool:
        return self.terminated_by == STEADY

    def column(self, name: str) -> np.ndarray:
        return self.states[:, COMPARTMENTS.index(name)]

    def __len__(self):
        return len(self.times)


def integrate(
    params: ModelParams,
    init,
    opts: IntegrationOptions | None = None,
) -> Trajectory:
    """Integrate from ``init`` until the active compartments die out.

    The run stops at the first step where ``s1 + s2 + h < opts.active_tol``
    (``terminated_by == "steady_state"``) or when ``t`` reaches ``opts.t_max``
    (``"horizon"``). Densities are never renormalised; a drift of the sum
    beyond 1e-6 or a density below -1e-12 raises
    :class:`NumericalInstabilityError`.
    """
    opts = opts or IntegrationOptions()
    check_params(params)
    y = tuple(check_state(init))
    f = discernibility(params)
    h = opts.step
    h2 = h / 2.0
    h6 = h / 6.0
    n_steps = int(math.ceil(opts.t_max / h - 1e-9))
    every = int(opts.sample_every)
    tol = opts.active_tol

    times = [0.0]
    samples = [y]
    peak, peak_t = y[1], 0.0
    terminated = HORIZON
    step_idx = 0
    t = 0.0

    if y[1] + y[2] + y[3] < tol:
        terminated = STEADY
    else:
        while step_idx < n_steps:
            i, s1, s2, hh, r1, r2 = y
            k1 = _rhs(i, s1, s2, hh, r1, r2, params, f)
            k2 = _rhs(*(a + h2 * b for a, b in zip(y, k1)), params, f)
            k3 = _rhs(*(a + h2 * b for a, b in zip(y, k2)), params, f)
            k4 = _rhs(*(a + h * b for a, b in zip(y, k3)), params, f)
            y = tuple(
                a + h6 * (b1 + 2.0 * (b2 + b3) + b4)
                for a, b1, b2, b3, b4 in zip(y, k1, k2, k3, k4)
            )
            step_idx += 1
            t = step_idx * h

            if min(y) < -NEGATIVE_TOL:
                j = int(np.argmin(y))
                raise NumericalInstabilityError(
                    t, f"density {COMPARTMENTS[j]} = {y[j]!r} went negative; step too large"
                )
            drift = abs(math.fsum(y) - 1.0)
            if drift > DRIFT_TOL:
                raise NumericalInstabilityError(t, f"density sum drifted by {drift:.3g}")
            if y[1] > peak:
                peak, peak_t = y[1], t

            done = y[1] + y[2] + y[3] < tol
            if done or step_idx % every == 0 or step_idx == n_steps:
                times.append(t)
                samples.append(y)
            if done:
                terminated = STEADY
                break

    final = StateVector(*(0.0 if v < 0.0 else v for v in y))
    return Trajectory(
        times=np.array(times),
        states=np.array(samples, dtype=float),
        terminated_by=terminated,
        final=final,
        t_final=t,
        peak_s1=peak,
        peak_s1_time=peak_t,
        options=opts,
    )


def final_state(traj: Trajectory) -> StateVector:
    """Steady state reached by ``traj``; raises if it stopped at the horizon."""
    if traj.terminated_by != STEADY:
        raise NotConvergedError(
            f"trajectory stopped at horizon t={traj.t_final:g} with active density "
            f"{traj.final.active:.3g} (tolerance {traj.options.active_tol:g})"
        )
    return traj.final


@dataclass
class BatchResult:
    """Outcome of :func:`integrate_batch`, one entry per parameter cell."""

    final: np.ndarray  # (n_cells, 6)
    converged: np.ndarray  # bool
    t_final: np.ndarray
    peak_s1: np.ndarray
    peak_s1_time: np.ndarray


def integrate_batch(
    params_list: list[ModelParams],
    init,
    opts: IntegrationOptions | None = None,
) -> BatchResult:
    """Integrate many parameter sets at once with the same RK4 scheme.

    Cells freeze individually once their active density drops below
    ``opts.active_tol``; only the final state and s1 peak are kept.
    """
    opts = opts or IntegrationOptions()
    if not params_list:
        raise ValueError("params_list is empty")
    for p in params_list:
        check_params(p)
    names = (
        "lambda1", "lambda2", "eta", "theta1", "theta2", "beta1", "beta2",
        "gamma1", "gamma2", "omega", "alpha", "k_avg",
    )
    vec = _ParamArrays({n: np.array([getattr(p, n) for p in params_list]) for n in names})
    f = np.array([discernibility(p) for p in params_list])

    n_cells = len(params_list)
    y0 = np.asarray(check_state(init), dtype=float)
    y = np.tile(y0[:, None], (1, n_cells))
    h = opts.step
    n_steps = int(math.ceil(opts.t_max / h - 1e-9))
    tol = opts.active_tol

    alive = y[1] + y[2] + y[3] >= tol
    t_final = np.zeros(n_cells)
    peak = y[1].copy()
    peak_t = np.zeros(n_cells)

    idx = np.flatnonzero(alive)
    step_idx = 0
    while idx.size and step_idx < n_steps:
        sub = vec.take(idx)
        fs = f[idx]
        ys = y[:, idx]
        k1 = np.array(_rhs(*ys, sub, fs))
        k2 = np.array(_rhs(*(ys + 0.5 * h * k1), sub, fs))
        k3 = np.array(_rhs(*(ys + 0.5 * h * k2), sub, fs))
        k4 = np.array(_rhs(*(ys + h * k3), sub, fs))
        ys = ys + (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
        step_idx += 1
        t = step_idx * h

        if ys.min() < -NEGATIVE_TOL:
            raise NumericalInstabilityError(t, "a density went negative; step too large")
        if np.abs(ys.sum(axis=0) - 1.0).max() > DRIFT_TOL:
            raise NumericalInstabilityError(t, "density sum drifted")
        y[:, idx] = ys
        t_final[idx] = t
        up = ys[1] > peak[idx]
        peak[idx[up]] = ys[1, up]
        peak_t[idx[up]] = t

        done = ys[1] + ys[2] + ys[3] < tol
        if done.any():
            alive[idx[done]] = False
            idx = idx[~done]

    return BatchResult(
        final=np.clip(y.T, 0.0, None),
        converged=~alive,
        t_final=t_final,
        peak_s1=peak,
        peak_s1_time=peak_t,
    )


class _ParamArrays:
    """Attribute bag of per-cell parameter arrays, duck-typed as ModelParams."""

    def __init__(self, arrays: dict[str, np.ndarray]):
        self.__dict__.update(arrays)
        self._names = tuple(arrays)

    def take(self, idx) -> "_ParamArrays":
        return _ParamArrays({n: getattr(self, n)[idx] for n in self._names})


# --- CSV -----------------------------------------------------------------

TRAJECTORY_HEADER = "t," + ",".join(COMPARTMENTS)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def trajectory_to_csv(traj: Trajectory, comments: list[str] | None = None) -> str:
    """Render a trajectory as CSV text with header ``t,I,S1,S2,H,R1,R2``."""
    buf = io.StringIO()
    for line in comments or ():
        buf.write(f"# {line}\n")
    buf.write(TRAJECTORY_HEADER + "\n")
    for t, row in zip(traj.times, traj.states):
        buf.write(",".join([_fmt(t), *(_fmt(v) for v in row)]) + "\n")
    return buf.getvalue()


def read_trajectory_csv(text: str) -> tuple[np.ndarray, np.ndarray]:
    """Parse CSV produced by :func:`trajectory_to_csv` into ``(times, states)``."""
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    if not lines or lines[0] != TRAJECTORY_HEADER:
        raise ValueError("missing trajectory header")
    data = np.array([[float(x) for x in ln.split(",")] for ln in lines[1:]], dtype=float)
    data = data.reshape(-1, 7)
    return data[:, 0], data[:, 1:]
