"""Closed-form steady-state quantities: final-size law, thresholds, initial rates."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from .model import (
    DerivVector,
    ModelParams,
    ParameterError,
    StateVector,
    check_params,
    discernibility,
)

ALWAYS_SPREADS = "always-spreads"


class DegenerateParametersError(ParameterError):
    pass


def c_constant(params: ModelParams) -> float:
    """Probability that a rumor contact turns the ignorant straight into a stifler."""
    check_params(params)
    f = discernibility(params)
    return 1.0 - (1.0 - f) * params.lambda1 - f * params.eta


def epsilon(params: ModelParams) -> float:
    """Exponent in the rumor-only final-size law ``R = 1 - exp(-epsilon * R)``."""
    c = c_constant(params)
    removal = params.beta1 + params.gamma1 / params.k_avg
    if removal == 0.0:
        raise DegenerateParametersError(
            "beta1 + gamma1/k_avg = 0: spreaders never stop, final size undefined"
        )
    return (params.beta1 - c + 1.0) / removal


def solve_final_size(eps: float, tol: float = 1e-12) -> float:
    """Positive root of ``R = 1 - exp(-eps * R)``, or 0 when ``eps <= 1``.

    Bisection on ``g(R) = R - 1 + exp(-eps R)``: ``g`` is negative just above
    zero whenever ``eps > 1`` and positive at ``R = 1``, so the bracket is
    always valid. A couple of Newton steps then push ``|g|`` below ``tol``.
    """
    if eps <= 1.0:
        return 0.0

    def g(r):
        return r - 1.0 + math.exp(-eps * r)

    hi = 1.0
    # g < 0 on (0, root); shrink the probe until it lands there
    delta = min(1e-3, (eps - 1.0) / eps)
    while g(delta) >= 0.0 and delta > 1e-300:
        delta *= 0.5
    lo = delta
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if g(mid) < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-15:
            break
    r = 0.5 * (lo + hi)
    for _ in range(5):
        gr = g(r)
        if abs(gr) < tol:
            break
        dg = 1.0 - eps * math.exp(-eps * r)
        if dg == 0.0:
            break
        r_new = r - gr / dg
        if not (lo <= r_new <= hi):
            break
        r = r_new
    return r


def final_size_rumor_only(params: ModelParams) -> float:
    """Closed-form final stifler density when only the rumor is seeded.

    Exact for the mean-field dynamics only when ``theta2 == 0`` (otherwise
    hesitants leak into the truth compartments) and ``omega == 0``; with
    ``theta2 > 0`` treat the value as an approximation.
    """
    return solve_final_size(epsilon(params))


def threshold_lambda1(params: ModelParams) -> float | str:
    """Critical rumor spreading rate, or ``"always-spreads"``.

    The second form is returned when forgetting alone cannot stop the rumor
    because the hesitant channel already exceeds it (``gamma1 <= k f eta``).
    """
    check_params(params)
    f = discernibility(params)
    if f == 1.0:
        raise DegenerateParametersError("rumor threshold undefined for f(m) = 1")
    num = params.gamma1 - params.k_avg * f * params.eta
    if num <= 0.0:
        return ALWAYS_SPREADS
    return num / (params.k_avg * (1.0 - f))


def threshold_lambda2(params: ModelParams) -> float:
    if not params.k_avg > 0:
        raise ParameterError("k_avg must be positive")
    return params.gamma2 / params.k_avg


def initial_rates(params: ModelParams, n: int | None = None) -> DerivVector:
    """Instantaneous rates at t=0 with one rumor and one truth spreader among ``n``.

    Written out term by term rather than via the right-hand side, so it can
    be checked against it.
    """
    check_params(params)
    n = params.n if n is None else n
    if n < 3:
        raise ParameterError("n must be >= 3")
    f = discernibility(params)
    k = params.k_avg
    a = (n - 2) / n**2  # contacts of one seed with the ignorant pool
    b = 1.0 / n**2  # contacts between the two seeds (or a seed with itself)
    g = 1.0 / n
    di = -2.0 * k * a
    ds1 = (1 - f) * params.lambda1 * k * a - (params.alpha + params.beta1) * k * b - params.gamma1 * g
    ds2 = params.lambda2 * k * a - params.beta2 * k * b - params.gamma2 * g
    dh = f * params.eta * k * a
    dr1 = (1 - (1 - f) * params.lambda1 - f * params.eta) * k * a + params.beta1 * k * b + params.gamma1 * g
    dr2 = (1 - params.lambda2) * k * a + params.alpha * k * b + params.beta2 * k * b + params.gamma2 * g
    return DerivVector(di, ds1, ds2, dh, dr1, dr2)


@dataclass(frozen=True)
class SpreadingVerdict:
    spreads: bool
    lhs: float
    rhs: float

    @property
    def margin(self) -> float:
        return self.lhs - self.rhs


def spreading_condition(params: ModelParams, n: int | None = None) -> SpreadingVerdict:
    """Whether the rumor/truth pair spreads widely from a two-seed start.

    With ``n`` the finite-population inequality is used; without it, its
    ``n -> infinity`` limit ``(1-f) l1 + l2 + f eta > (g1 + g2) / k``.
    """
    check_params(params)
    f = discernibility(params)
    lhs = (1.0 - f) * params.lambda1 + params.lambda2 + f * params.eta
    g = params.gamma1 + params.gamma2
    if n is None:
        rhs = g / params.k_avg
    else:
        if n < 3:
            raise ParameterError("n must be >= 3")
        rhs = (params.alpha + params.beta1 + params.beta2) / (n - 2) + n * g / (
            (n - 2) * params.k_avg
        )
    return SpreadingVerdict(lhs > rhs, lhs, rhs)


@dataclass(frozen=True)
class ThresholdReport:
    lambda1_c: float | str
    lambda2_c: float
    epsilon: float
    c_const: float
    final_size: float
    general_lhs: float
    general_rhs: float
    spreads: bool

    def as_text(self) -> str:
        return "".join(f"{k} = {_fmt(v)}\n" for k, v in asdict(self).items())

    def csv_header(self) -> str:
        return ",".join(asdict(self))

    def csv_row(self) -> str:
        return ",".join(_fmt(v) for v in asdict(self).values())


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return repr(v)
    return str(v)


def threshold_report(params: ModelParams, n: int | None = None) -> ThresholdReport:
    """Collect every closed-form quantity for ``params``."""
    try:
        l1c = threshold_lambda1(params)
    except DegenerateParametersError:
        l1c = float("nan")
    try:
        eps = epsilon(params)
        size = solve_final_size(eps)
    except DegenerateParametersError:
        eps = size = float("nan")
    verdict = spreading_condition(params, n)
    return ThresholdReport(
        lambda1_c=l1c,
        lambda2_c=threshold_lambda2(params),
        epsilon=eps,
        c_const=c_constant(params),
        final_size=size,
        general_lhs=verdict.lhs,
        general_rhs=verdict.rhs,
        spreads=verdict.spreads,
    )


def parse_report(text: str) -> dict[str, str]:
    """Read back the ``key = value`` block written by :meth:`ThresholdReport.as_text`."""
    out = {}
    for line in text.splitlines():
        if "=" in line and not line.lstrip().startswith("#"):
            k, v = line.split("=", 1)
            out[k.strip()] = v.strip()
    return out


def rumor_only_init(n: int) -> StateVector:
    return StateVector.rumor_seed(n)
