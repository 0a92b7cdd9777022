"""Parameter sweeps, the (lambda1, lambda2) heatmap and per-figure CSV output."""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import spreading_condition
from .integrate import (
    IntegrationOptions,
    integrate,
    integrate_batch,
    trajectory_to_csv,
)
from .model import (
    COMPARTMENTS,
    FIG2_PARAMS,
    FIG11_PARAMS,
    ModelParams,
    ParameterError,
    StateVector,
    check_params,
    param_dict,
)

SWEEPABLE = ("m", "alpha", "k_avg", "omega", "lambda1", "lambda2")
SUMMARIES = ("final_r1", "final_r2", "final_r", "peak_s1", "peak_s1_time")

DEFAULT_VALUES = {
    "m": (0.1, 0.3, 0.5, 0.7, 0.9),
    "alpha": (0.1, 0.3, 0.5, 0.7, 0.9),
    "k_avg": (4.0, 6.0, 8.0, 10.0, 12.0),
    "omega": (0.0, 0.05, 0.1),
}

HEATMAP_OPTIONS = IntegrationOptions(t_max=2000.0, sample_every=1000)


@dataclass(frozen=True)
class SweepSpec:
    base: ModelParams
    swept: str
    values: tuple[float, ...]
    summary: tuple[str, ...] = SUMMARIES
    opts: IntegrationOptions = field(default_factory=IntegrationOptions)

    def __post_init__(self):
        if self.swept not in SWEEPABLE:
            raise ParameterError(f"cannot sweep {self.swept!r}; choose from {SWEEPABLE}")
        if not self.values:
            raise ParameterError("sweep needs at least one value")
        unknown = set(self.summary) - set(SUMMARIES)
        if unknown:
            raise ParameterError(f"unknown summaries {sorted(unknown)}")
        for v in self.values:
            check_params(self.cell(v))

    def cell(self, value: float) -> ModelParams:
        return self.base.with_(**{self.swept: float(value)})


@dataclass
class SweepRow:
    value: float
    stats: dict[str, float]
    converged: bool


@dataclass
class SweepResult:
    swept: str
    summary: tuple[str, ...]
    rows: list[SweepRow]
    base: ModelParams
    opts: IntegrationOptions

    def column(self, name: str) -> np.ndarray:
        return np.array([r.stats[name] for r in self.rows])

    @property
    def values(self) -> np.ndarray:
        return np.array([r.value for r in self.rows])

    def to_csv(self) -> str:
        buf = io.StringIO()
        for line in provenance(self.base, self.opts, swept=self.swept):
            buf.write(f"# {line}\n")
        buf.write(",".join([self.swept, *self.summary, "converged"]) + "\n")
        for r in self.rows:
            cells = [repr(float(r.value)), *(repr(float(r.stats[s])) for s in self.summary)]
            cells.append("1" if r.converged else "0")
            buf.write(",".join(cells) + "\n")
        return buf.getvalue()


def read_sweep_csv(text: str) -> tuple[str, tuple[str, ...], list[SweepRow]]:
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    head = lines[0].split(",")
    swept, summary = head[0], tuple(head[1:-1])
    rows = []
    for ln in lines[1:]:
        cells = ln.split(",")
        stats = {s: float(c) for s, c in zip(summary, cells[1:-1])}
        rows.append(SweepRow(float(cells[0]), stats, cells[-1] == "1"))
    return swept, summary, rows


def _stats(final: StateVector, peak: float, peak_t: float) -> dict[str, float]:
    return {
        "final_r1": final.r1,
        "final_r2": final.r2,
        "final_r": final.r1 + final.r2,
        "peak_s1": peak,
        "peak_s1_time": peak_t,
    }


def run_sweep(spec: SweepSpec) -> SweepResult:
    """Integrate the two-seed start for every swept value and summarise it.

    Cells that hit the horizon are kept with ``converged=False``.
    """
    rows = []
    for v in spec.values:
        params = spec.cell(v)
        traj = integrate(params, StateVector.two_seed(params.n), spec.opts)
        stats = _stats(traj.final, traj.peak_s1, traj.peak_s1_time)
        rows.append(SweepRow(float(v), {s: stats[s] for s in spec.summary}, traj.converged))
    return SweepResult(spec.swept, tuple(spec.summary), rows, spec.base, spec.opts)


@dataclass
class HeatmapResult:
    lambda1: np.ndarray
    lambda2: np.ndarray
    r: np.ndarray  # (len(lambda1), len(lambda2))
    analytic_spreads: np.ndarray  # bool, same shape
    converged: np.ndarray
    base: ModelParams
    opts: IntegrationOptions

    def to_csv(self, with_analytic: bool = True) -> str:
        buf = io.StringIO()
        for line in provenance(self.base, self.opts, swept="lambda1,lambda2"):
            buf.write(f"# {line}\n")
        cols = ["lambda1", "lambda2", "R"] + (["analytic_spreads"] if with_analytic else [])
        buf.write(",".join(cols) + "\n")
        for a, l1 in enumerate(self.lambda1):
            for b, l2 in enumerate(self.lambda2):
                cells = [repr(float(l1)), repr(float(l2)), repr(float(self.r[a, b]))]
                if with_analytic:
                    cells.append("1" if self.analytic_spreads[a, b] else "0")
                buf.write(",".join(cells) + "\n")
        return buf.getvalue()


def read_heatmap_csv(text: str) -> dict[str, np.ndarray]:
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    head = lines[0].split(",")
    data = np.array([[float(x) for x in ln.split(",")] for ln in lines[1:]])
    return {h: data[:, j] for j, h in enumerate(head)}


def heatmap(lambda1_grid, lambda2_grid, base: ModelParams = FIG11_PARAMS,
            opts: IntegrationOptions = HEATMAP_OPTIONS) -> HeatmapResult:
    """Final stifler density ``r1 + r2`` over a (lambda1, lambda2) grid.

    Each cell starts from the two-seed state. The limit-form spreading
    condition is evaluated for every cell alongside.
    """
    l1 = np.asarray(lambda1_grid, dtype=float)
    l2 = np.asarray(lambda2_grid, dtype=float)
    if l1.size == 0 or l2.size == 0:
        raise ParameterError("empty grid")
    cells = [base.with_(lambda1=float(a), lambda2=float(b)) for a in l1 for b in l2]
    res = integrate_batch(cells, StateVector.two_seed(base.n), opts)
    shape = (l1.size, l2.size)
    r = (res.final[:, 4] + res.final[:, 5]).reshape(shape)
    analytic = np.array([spreading_condition(p).spreads for p in cells]).reshape(shape)
    return HeatmapResult(l1, l2, r, analytic, res.converged.reshape(shape), base, opts)


def unit_grid(n: int) -> np.ndarray:
    """``n`` evenly spaced points on [0, 1], rounded so 0.05-steps print cleanly."""
    return np.round(np.linspace(0.0, 1.0, n), 12)


def boundary_mismatches(hm: HeatmapResult, level: float = 0.05) -> np.ndarray:
    """Cells whose empirical class (``r >= level``) disagrees with the analytic one
    even though no cell within one grid step lies on the analytic side it shows.

    Empty output means the empirical contour stays within one grid cell of the
    analytic boundary everywhere.
    """
    emp = hm.r >= level
    ana = hm.analytic_spreads
    n1, n2 = ana.shape
    bad = []
    for a in range(n1):
        for b in range(n2):
            if emp[a, b] == ana[a, b]:
                continue
            block = ana[max(a - 1, 0): a + 2, max(b - 1, 0): b + 2]
            if not (block == emp[a, b]).any():
                bad.append((a, b))
    return np.array(bad, dtype=int).reshape(-1, 2)


# --- figures ---------------------------------------------------------------

def provenance(params: ModelParams, opts, **extra) -> list[str]:
    lines = [f"rumorsim {__version__}"]
    lines += [f"{k} = {v}" for k, v in param_dict(params).items()]
    if opts is not None:
        lines += [f"{f.name} = {getattr(opts, f.name)}" for f in fields(opts)]
    lines += [f"{k} = {v}" for k, v in extra.items()]
    return lines


def _curves(base: ModelParams, swept: str, values, column: str,
            opts: IntegrationOptions) -> str:
    """Time series of one compartment for each swept value, on a shared grid."""
    trajs = [integrate(base.with_(**{swept: float(v)}), StateVector.two_seed(base.n), opts)
             for v in values]
    col = COMPARTMENTS.index(column)
    longest = max(trajs, key=len)
    buf = io.StringIO()
    for line in provenance(base, opts, swept=swept):
        buf.write(f"# {line}\n")
    buf.write(",".join(["t", *(f"{column}_{swept}={v:g}" for v in values)]) + "\n")
    for j, t in enumerate(longest.times):
        cells = [repr(float(t))]
        for tr in trajs:
            # absorbed trajectories hold their final value
            v = tr.states[j, col] if j < len(tr) else tr.final[col]
            cells.append(repr(float(v)))
        buf.write(",".join(cells) + "\n")
    return buf.getvalue()


FIGURES = range(2, 13)


def reproduce_figure(fig: int, base: ModelParams | None = None,
                     opts: IntegrationOptions | None = None,
                     out_dir: str | Path | None = None,
                     heatmap_points: int = 21) -> dict[str, str]:
    """Plot-ready CSV text for one figure, keyed by file name.

    ``base`` defaults to the parameter set stated for that figure. When
    ``out_dir`` is given the files are also written there.
    """
    if fig not in FIGURES:
        raise ValueError(f"figure must be in 2..12 (got {fig})")
    opts = opts or IntegrationOptions()
    if base is None:
        base = FIG11_PARAMS if fig in (11, 12) else FIG2_PARAMS
    files: dict[str, str] = {}
    name = f"figure{fig}.csv"

    if fig == 2:
        traj = integrate(base, StateVector.two_seed(base.n), opts)
        files[name] = trajectory_to_csv(traj, provenance(base, opts, terminated_by=traj.terminated_by))
    elif fig in (3, 4):
        files[name] = _curves(base, "m", DEFAULT_VALUES["m"], "S1" if fig == 3 else "R1", opts)
    elif fig in (6, 7):
        files[name] = _curves(base, "alpha", DEFAULT_VALUES["alpha"], "S1" if fig == 6 else "R2", opts)
    elif fig == 9:
        files[name] = _curves(base, "k_avg", DEFAULT_VALUES["k_avg"], "S1", opts)
    elif fig in (5, 8, 10):
        swept = {5: "m", 8: "alpha", 10: "omega"}[fig]
        spec = SweepSpec(base, swept, DEFAULT_VALUES[swept], ("final_r1", "final_r2", "final_r"), opts)
        files[name] = run_sweep(spec).to_csv()
    else:
        grid = unit_grid(heatmap_points)
        hm_opts = IntegrationOptions(opts.step, max(opts.t_max, HEATMAP_OPTIONS.t_max),
                                     HEATMAP_OPTIONS.sample_every, opts.active_tol)
        hm = heatmap(grid, grid, base, hm_opts)
        files[name] = hm.to_csv(with_analytic=(fig == 12))

    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for fname, text in files.items():
            (out / fname).write_text(text)
    return files


def reproduce_figure_abm(fig: int, base: ModelParams | None = None, n: int = 10_000,
                         n_runs: int = 50, abm_opts=None,
                         out_dir: str | Path | None = None) -> dict[str, str]:
    """Rerun a figure's parameter cases through the agent-based ensemble.

    Emits one ensemble CSV per parameter case, named
    ``figure<id>_abm[_<param>=<value>].csv``. The heatmap figures are not
    supported (441 ensembles).
    """
    from .network import AbmOptions, ensemble, ensemble_to_csv

    if fig not in FIGURES or fig in (11, 12):
        raise ValueError("ABM reruns are available for figures 2..10")
    base = (base or FIG2_PARAMS).with_(n=n)
    abm_opts = abm_opts or AbmOptions()
    k = int(round(base.k_avg))
    cases: list[tuple[str, ModelParams]]
    if fig == 2:
        cases = [("", base)]
    else:
        swept = {3: "m", 4: "m", 5: "m", 6: "alpha", 7: "alpha", 8: "alpha",
                 9: "k_avg", 10: "omega"}[fig]
        cases = [(f"_{swept}={v:g}", base.with_(**{swept: float(v)}))
                 for v in DEFAULT_VALUES[swept]]
    files = {}
    for suffix, p in cases:
        kk = int(round(p.k_avg)) if p.k_avg != base.k_avg else k
        ens = ensemble(p, n, kk, abm_opts, n_runs)
        files[f"figure{fig}_abm{suffix}.csv"] = ensemble_to_csv(ens, provenance(p, abm_opts, n_runs=n_runs))
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for fname, text in files.items():
            (out / fname).write_text(text)
    return files


def is_finite_row(row: SweepRow) -> bool:
    return all(math.isfinite(v) for v in row.stats.values())

