"""Parameters, state and mean-field right-hand side of the 2SIH2R model.

Compartments, in order: ignorant (I), rumor spreader (S1), truth spreader
(S2), hesitant (H), rumor stifler (R1), truth stifler (R2).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from typing import NamedTuple

COMPARTMENTS = ("I", "S1", "S2", "H", "R1", "R2")

#: Slack allowed below zero before a density counts as negative.
NEGATIVE_TOL = 1e-12
#: Allowed deviation of the density sum from one.
SUM_TOL = 1e-9


class ParameterError(ValueError):
    """Raised for invalid model parameters."""


class StateError(ValueError):
    """Raised for a state vector that is not a valid density distribution."""


@dataclass(frozen=True)
class DiscernibilitySpec:
    """Maps the discernible rate ``m`` to ``f(m)``.

    ``mode="linear"`` gives ``f(m) = coefficient * m``; ``mode="constant"``
    gives ``f(m) = value`` regardless of ``m``.
    """

    mode: str = "linear"
    coefficient: float = 0.7
    value: float = 0.0

    def __call__(self, m: float) -> float:
        if self.mode == "linear":
            return self.coefficient * m
        if self.mode == "constant":
            return self.value
        raise ParameterError(f"unknown discernibility mode {self.mode!r}")


@dataclass(frozen=True)
class ModelParams:
    lambda1: float
    lambda2: float
    eta: float
    theta1: float
    theta2: float
    beta1: float
    beta2: float
    gamma1: float
    gamma2: float
    omega: float
    alpha: float
    m: float
    f_spec: DiscernibilitySpec = field(default_factory=DiscernibilitySpec)
    k_avg: float = 8.0
    n: int = 100_000

    def with_(self, **changes) -> "ModelParams":
        """Copy with some fields replaced."""
        return replace(self, **changes)

    @property
    def f(self) -> float:
        return discernibility(self)


# name -> (low, high); None means unbounded on that side
_UNIT = (0.0, 1.0)
RATE_BOUNDS: dict[str, tuple[float | None, float | None]] = {
    "lambda1": _UNIT,
    "lambda2": _UNIT,
    "eta": _UNIT,
    "theta1": (0.0, None),
    "theta2": (0.0, None),
    "beta1": _UNIT,
    "beta2": _UNIT,
    "gamma1": _UNIT,
    "gamma2": _UNIT,
    "omega": _UNIT,
    "alpha": _UNIT,
    "m": _UNIT,
}


def _format_bound(lo, hi) -> str:
    if hi is None:
        return f"[{lo:g}, inf)"
    return f"[{lo:g},{hi:g}]"


def validate(params: ModelParams) -> list[str]:
    """Return every violated parameter constraint; an empty list means valid."""
    problems: list[str] = []
    for name, (lo, hi) in RATE_BOUNDS.items():
        v = getattr(params, name)
        if not math.isfinite(v) or v < lo or (hi is not None and v > hi):
            problems.append(f"{name} ∉ {_format_bound(lo, hi)} (got {v!r})")

    spec = params.f_spec
    if spec.mode not in ("linear", "constant"):
        problems.append(f"f_mode must be 'linear' or 'constant' (got {spec.mode!r})")
    else:
        if spec.mode == "linear" and not spec.coefficient >= 0:
            problems.append(f"f_coeff must be >= 0 in linear mode (got {spec.coefficient!r})")
        f = spec(params.m)
        if not (0.0 <= f <= 1.0):
            problems.append(f"f(m) ∉ [0,1] (got {f!r})")
        else:
            total = (1.0 - f) * params.lambda1 + f * params.eta
            if total > 1.0 + 1e-15:
                problems.append(
                    f"(1-f(m))*lambda1 + f(m)*eta must be <= 1 (got {total!r})"
                )

    if params.theta1 + params.theta2 > 1.0:
        problems.append(
            f"theta1 + theta2 must be <= 1 (got {params.theta1 + params.theta2!r})"
        )
    if not (params.k_avg > 0 and math.isfinite(params.k_avg)):
        problems.append(f"k_avg must be > 0 (got {params.k_avg!r})")
    if int(params.n) != params.n or params.n < 3:
        problems.append(f"n must be an integer >= 3 (got {params.n!r})")
    return problems


def check_params(params: ModelParams) -> ModelParams:
    problems = validate(params)
    if problems:
        raise ParameterError("; ".join(problems))
    return params


def discernibility(params: ModelParams) -> float:
    """f(m) for the configured discernibility mapping."""
    f = params.f_spec(params.m)
    if not (0.0 <= f <= 1.0):
        raise ParameterError(f"f(m) = {f!r} lies outside [0, 1]")
    return f


class StateVector(NamedTuple):
    i: float
    s1: float
    s2: float
    h: float
    r1: float
    r2: float

    @classmethod
    def two_seed(cls, n: int) -> "StateVector":
        """One rumor spreader and one truth spreader among ``n`` people."""
        return cls((n - 2) / n, 1 / n, 1 / n, 0.0, 0.0, 0.0)

    @classmethod
    def rumor_seed(cls, n: int) -> "StateVector":
        """A single rumor spreader among ``n`` people."""
        return cls((n - 1) / n, 1 / n, 0.0, 0.0, 0.0, 0.0)

    @property
    def active(self) -> float:
        return self.s1 + self.s2 + self.h

    @property
    def r(self) -> float:
        return self.r1 + self.r2


class DerivVector(NamedTuple):
    di: float
    ds1: float
    ds2: float
    dh: float
    dr1: float
    dr2: float


def check_state(state, sum_tol: float = SUM_TOL) -> StateVector:
    """Validate densities, zeroing values in the ``[-1e-12, 0)`` band.

    Raises :class:`StateError` for anything further below zero, above one,
    or a sum more than ``sum_tol`` away from one.
    """
    vals = []
    for name, v in zip(COMPARTMENTS, state):
        if not math.isfinite(v) or v < -NEGATIVE_TOL or v > 1.0 + NEGATIVE_TOL:
            raise StateError(f"density {name} = {v!r} outside [0, 1]")
        vals.append(0.0 if v < 0.0 else float(v))
    total = math.fsum(state)
    if abs(total - 1.0) > sum_tol:
        raise StateError(f"densities sum to {total!r}, not 1")
    return StateVector(*vals)


def rhs(state, params: ModelParams) -> DerivVector:
    """Time derivative of the six densities under the mean-field equations.

    The omega flow drains stifler1 into stifler2 (``omega * r1``), which keeps
    the total density exactly conserved.
    """
    i, s1, s2, h, r1, r2 = check_state(state)
    return _rhs(i, s1, s2, h, r1, r2, params, discernibility(params))


def _rhs(i, s1, s2, h, r1, r2, p: ModelParams, f):
    # Unchecked kernel; works elementwise on floats or numpy arrays.
    k = p.k_avg
    believe = (1.0 - f) * p.lambda1
    hesitate = f * p.eta
    s1i = k * s1 * i
    s2i = k * s2 * i
    confront = p.alpha * k * s1 * s2
    lose1 = p.beta1 * k * s1 * (s1 + r1 + h)
    lose2 = p.beta2 * k * s2 * (s2 + r2)
    forget1 = p.gamma1 * s1
    forget2 = p.gamma2 * s2
    to_s1 = p.theta1 * h
    to_s2 = p.theta2 * h
    drift = p.omega * r1

    di = -(s1i + s2i)
    ds1 = believe * s1i + to_s1 - confront - lose1 - forget1
    ds2 = p.lambda2 * s2i + to_s2 - lose2 - forget2
    dh = hesitate * s1i - (to_s1 + to_s2)
    dr1 = (1.0 - believe - hesitate) * s1i + lose1 + forget1 - drift
    dr2 = (1.0 - p.lambda2) * s2i + confront + lose2 + forget2 + drift
    return DerivVector(di, ds1, ds2, dh, dr1, dr2)


def param_dict(params: ModelParams) -> dict[str, object]:
    """Flat key/value view, as used in config files and provenance headers."""
    out: dict[str, object] = {}
    for fld in fields(params):
        if fld.name == "f_spec":
            out["f_mode"] = params.f_spec.mode
            out["f_coeff"] = params.f_spec.coefficient
            out["f_value"] = params.f_spec.value
        else:
            out[fld.name] = getattr(params, fld.name)
    return out


# Parameter set used throughout the numerical section; other sets derive from it.
FIG2_PARAMS = ModelParams(
    lambda1=0.7,
    lambda2=0.7,
    eta=0.8,
    theta1=0.5,
    theta2=0.3,
    beta1=0.3,
    beta2=0.3,
    gamma1=0.1,
    gamma2=0.1,
    omega=0.0,
    alpha=0.5,
    m=0.3,
    f_spec=DiscernibilitySpec("linear", coefficient=0.7),
    k_avg=8.0,
    n=100_000,
)

FIG11_PARAMS = FIG2_PARAMS.with_(
    eta=0.1,
    gamma1=0.8,
    gamma2=0.8,
    f_spec=DiscernibilitySpec("constant", value=0.5),
)
