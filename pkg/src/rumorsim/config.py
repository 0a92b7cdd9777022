"""Flat ``key = value`` run configuration."""
from __future__ import annotations

import os
from dataclasses import dataclass, field, fields

from .integrate import IntegrationOptions
from .model import DiscernibilitySpec, ModelParams, validate
from .network import AbmOptions

RATE_KEYS = (
    "lambda1", "lambda2", "eta", "theta1", "theta2", "beta1", "beta2",
    "gamma1", "gamma2", "omega", "alpha",
)
MODEL_KEYS = RATE_KEYS + ("m", "f_mode", "f_coeff", "f_value", "k_avg", "n")
INTEGRATION_KEYS = ("step", "t_max", "sample_every", "active_tol")
ABM_KEYS = ("dt", "abm_t_max", "seed", "runs", "record_every")
ALL_KEYS = MODEL_KEYS + INTEGRATION_KEYS + ABM_KEYS + ("out_dir",)

INT_KEYS = {"n", "sample_every", "seed", "runs", "record_every"}
OUT_DIR_ENV = "RUMORSIM_OUT_DIR"


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


@dataclass(frozen=True)
class RunConfig:
    params: ModelParams
    integration: IntegrationOptions = field(default_factory=IntegrationOptions)
    abm: AbmOptions = field(default_factory=AbmOptions)
    runs: int = 1
    out_dir: str = "."

    def resolved(self) -> dict[str, object]:
        """Every key with its effective value, in canonical order."""
        p = self.params
        vals: dict[str, object] = {k: getattr(p, k) for k in RATE_KEYS + ("m",)}
        vals["f_mode"] = p.f_spec.mode
        vals["f_coeff"] = p.f_spec.coefficient
        vals["f_value"] = p.f_spec.value
        vals["k_avg"] = p.k_avg
        vals["n"] = p.n
        for f in fields(self.integration):
            vals[f.name] = getattr(self.integration, f.name)
        vals["dt"] = self.abm.dt
        vals["abm_t_max"] = self.abm.t_max
        vals["seed"] = self.abm.seed
        vals["runs"] = self.runs
        vals["record_every"] = self.abm.record_every
        vals["out_dir"] = self.out_dir
        return vals

    def to_text(self) -> str:
        return "".join(f"{k} = {v}\n" for k, v in self.resolved().items())


def _convert(key: str, raw: str, line: int):
    if key in ("f_mode", "out_dir"):
        return raw
    try:
        if key in INT_KEYS:
            as_float = float(raw)
            if as_float != int(as_float):
                raise ValueError
            return int(as_float)
        return float(raw)
    except ValueError:
        kind = "an integer" if key in INT_KEYS else "a number"
        raise ConfigError(f"{key} must be {kind} (got {raw!r})", line) from None


def parse_config(text: str) -> RunConfig:
    """Parse and validate a configuration.

    Model keys must all be present; integration, ABM and output keys fall
    back to their defaults. Unknown or repeated keys are rejected.
    """
    values: dict[str, object] = {}
    where: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in ALL_KEYS:
            raise ConfigError(f"unknown key {key!r}", lineno)
        if key in values:
            raise ConfigError(f"{key} given twice (first on line {where[key]})", lineno)
        if not val:
            raise ConfigError(f"{key} has no value", lineno)
        values[key] = _convert(key, val, lineno)
        where[key] = lineno

    for key in RATE_KEYS + ("m", "f_mode", "k_avg", "n"):
        if key not in values:
            raise ConfigError(f"missing required model key {key!r}")
    mode = values["f_mode"]
    if mode == "linear":
        if "f_coeff" not in values:
            raise ConfigError("f_coeff required in linear mode", where["f_mode"])
    elif mode == "constant":
        if "f_value" not in values:
            raise ConfigError("f_value required in constant mode", where["f_mode"])
    else:
        raise ConfigError(f"f_mode must be 'linear' or 'constant' (got {mode!r})", where["f_mode"])

    spec = DiscernibilitySpec(mode, values.get("f_coeff", 0.0), values.get("f_value", 0.0))
    params = ModelParams(
        **{k: values[k] for k in RATE_KEYS + ("m", "k_avg", "n")}, f_spec=spec
    )
    problems = validate(params)
    if problems:
        first = problems[0]
        key = next((k for k in sorted(where, key=len, reverse=True) if first.startswith(k)), None)
        if key is None and "f(m)" in first:
            key = "m"
        if key is None and "lambda1" in first:
            key = "lambda1"
        raise ConfigError("; ".join(problems), where.get(key))

    try:
        integration = IntegrationOptions(
            **{k: values[k] for k in INTEGRATION_KEYS if k in values}
        )
    except ValueError as exc:
        raise ConfigError(str(exc), _first_line(where, INTEGRATION_KEYS)) from None
    defaults = AbmOptions()
    try:
        abm = AbmOptions(
            dt=values.get("dt", defaults.dt),
            t_max=values.get("abm_t_max", defaults.t_max),
            seed=values.get("seed", defaults.seed),
            record_every=values.get("record_every", defaults.record_every),
        )
    except ValueError as exc:
        raise ConfigError(str(exc), _first_line(where, ABM_KEYS)) from None
    runs = values.get("runs", 1)
    if runs < 1:
        raise ConfigError("runs must be >= 1", where.get("runs"))
    out_dir = values.get("out_dir") or os.environ.get(OUT_DIR_ENV) or "."
    return RunConfig(params, integration, abm, runs, str(out_dir))


def _first_line(where: dict[str, int], keys) -> int | None:
    lines = [where[k] for k in keys if k in where]
    return min(lines) if lines else None


def config_text(params: ModelParams, **extra) -> str:
    """Config file text for ``params`` plus any non-model keys."""
    p = params
    vals = {k: getattr(p, k) for k in RATE_KEYS + ("m",)}
    vals["f_mode"] = p.f_spec.mode
    if p.f_spec.mode == "linear":
        vals["f_coeff"] = p.f_spec.coefficient
    else:
        vals["f_value"] = p.f_spec.value
    vals["k_avg"] = p.k_avg
    vals["n"] = p.n
    vals.update(extra)
    return "".join(f"{k} = {v}\n" for k, v in vals.items())
