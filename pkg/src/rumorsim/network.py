"""Agent-based 2SIH2R simulation on random k-regular graphs.

Random numbers come from numpy's PCG64 bit generator. A run seeded with
``seed`` draws its graph from ``SeedSequence([seed, 0])`` and its dynamics
from ``SeedSequence([seed, 1])``, so results are reproducible across
platforms for a given numpy PCG64 implementation.
"""
from __future__ import annotations

import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .model import COMPARTMENTS, ModelParams, check_params, discernibility


class NodeState(IntEnum):
    IGNORANT = 0
    SPREADER1 = 1
    SPREADER2 = 2
    HESITANT1 = 3
    STIFLER1 = 4
    STIFLER2 = 5


I, S1, S2, H, R1, R2 = (int(s) for s in NodeState)


class GraphConstructionError(RuntimeError):
    pass


class ConfigurationError(ValueError):
    pass


def make_rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), stream])))


# --- graphs ----------------------------------------------------------------

@dataclass(frozen=True)
class Network:
    """Simple k-regular graph; ``adj[v]`` holds the k neighbours of node v."""

    n: int
    k: int
    adj: np.ndarray

    def neighbors(self, v: int) -> np.ndarray:
        return self.adj[v]

    def edges(self) -> np.ndarray:
        src = np.repeat(np.arange(self.n), self.k)
        dst = self.adj.ravel()
        keep = src < dst
        return np.column_stack([src[keep], dst[keep]])


def _edge_key(u: int, v: int, n: int) -> int:
    return u * n + v if u < v else v * n + u


def _pair_stubs(n: int, k: int, rng: np.random.Generator, max_swaps: int) -> np.ndarray | None:
    stubs = np.repeat(np.arange(n, dtype=np.int64), k)
    rng.shuffle(stubs)
    edges = stubs.reshape(-1, 2)
    lo = np.minimum(edges[:, 0], edges[:, 1])
    hi = np.maximum(edges[:, 0], edges[:, 1])
    keys = lo * n + hi

    counts: dict[int, int] = {}
    uniq, cnt = np.unique(keys, return_counts=True)
    counts = dict(zip(uniq.tolist(), cnt.tolist()))

    _, first = np.unique(keys, return_index=True)
    is_dup = np.ones(len(keys), dtype=bool)
    is_dup[first] = False
    bad = np.flatnonzero((lo == hi) | is_dup).tolist()
    if not bad:
        return edges

    edges = edges.tolist()
    m = len(edges)
    swaps = 0
    while bad:
        if swaps >= max_swaps:
            return None
        swaps += 1
        e = bad[-1]
        j = int(rng.integers(m))
        if j == e:
            continue
        a, b = edges[e]
        c, d = edges[j]
        if rng.random() < 0.5:
            c, d = d, c
        # candidate rewiring (a,c), (b,d)
        if a == c or b == d:
            continue
        k1, k2 = _edge_key(a, c, n), _edge_key(b, d, n)
        if k1 == k2 or counts.get(k1, 0) or counts.get(k2, 0):
            continue
        old_j = _edge_key(c, d, n)
        if counts[old_j] > 1 or c == d:
            # the partner is itself defective; leave it for its own turn
            continue
        for old in (_edge_key(a, b, n), old_j):
            counts[old] -= 1
            if not counts[old]:
                del counts[old]
        counts[k1] = 1
        counts[k2] = 1
        edges[e] = [a, c]
        edges[j] = [b, d]
        bad.pop()
    return np.asarray(edges, dtype=np.int64)


def generate_regular(n: int, k: int, seed: int, max_restarts: int = 20) -> Network:
    """Random simple k-regular graph on ``n`` nodes.

    Stubs are paired uniformly at random; the handful of self-loops and
    multi-edges this produces are removed by random double-edge swaps. If the
    repair budget runs out the pairing is redrawn from scratch, up to
    ``max_restarts`` times.
    """
    if n < 1 or k < 0:
        raise GraphConstructionError(f"need n >= 1 and k >= 0 (got n={n}, k={k})")
    if k >= n and k > 0:
        raise GraphConstructionError(f"k={k} must be smaller than n={n}")
    if (n * k) % 2:
        raise GraphConstructionError(f"n*k = {n * k} is odd; no k-regular graph exists")
    if k == 0:
        return Network(n, 0, np.empty((n, 0), dtype=np.int64))
    if 2 * k > n - 1:
        # dense: swaps rarely find room, so build the sparse complement instead
        sparse = generate_regular(n, n - 1 - k, seed, max_restarts)
        full = np.ones((n, n), dtype=bool)
        np.fill_diagonal(full, False)
        full[np.repeat(np.arange(n), sparse.k), sparse.adj.ravel()] = False
        return Network(n, k, np.nonzero(full)[1].reshape(n, k))

    rng = make_rng(seed, 0)
    max_swaps = 100 * k * k + 1000
    for _ in range(max_restarts):
        edges = _pair_stubs(n, k, rng, max_swaps)
        if edges is not None:
            break
    else:
        raise GraphConstructionError(
            f"could not build a simple {k}-regular graph on {n} nodes in {max_restarts} restarts"
        )

    src = np.concatenate([edges[:, 0], edges[:, 1]])
    dst = np.concatenate([edges[:, 1], edges[:, 0]])
    order = np.lexsort((dst, src))
    adj = dst[order].reshape(n, k)
    return Network(n, k, adj)


def check_network(net: Network) -> None:
    """Raise ``GraphConstructionError`` unless ``net`` is a simple k-regular graph."""
    adj = net.adj
    if adj.shape != (net.n, net.k):
        raise GraphConstructionError("adjacency has the wrong shape")
    if net.k == 0:
        return
    nodes = np.arange(net.n)[:, None]
    if (adj == nodes).any():
        raise GraphConstructionError("self-loop")
    srt = np.sort(adj, axis=1)
    if (srt[:, 1:] == srt[:, :-1]).any():
        raise GraphConstructionError("multi-edge")
    fwd = np.sort(nodes * net.n + adj, axis=None)
    back = np.sort(adj * net.n + nodes, axis=None)
    if not np.array_equal(fwd, back):
        raise GraphConstructionError("adjacency is not symmetric")


# --- dynamics --------------------------------------------------------------

@dataclass(frozen=True)
class AbmOptions:
    dt: float = 0.05
    t_max: float = 500.0
    seed: int = 0
    record_every: int = 4

    def __post_init__(self):
        if not (self.dt > 0 and self.t_max > 0):
            raise ConfigurationError("dt and t_max must be positive")
        if int(self.record_every) != self.record_every or self.record_every < 1:
            raise ConfigurationError("record_every must be an integer >= 1")


@dataclass(frozen=True)
class _Probs:
    believe: float
    hesitate: float
    dismiss: float
    truth: float
    ignore_truth: float
    lose1: float
    confront: float
    forget1: float
    lose2: float
    forget2: float
    to_s1: float
    to_s2: float
    drift: float


def event_probabilities(params: ModelParams, dt: float) -> _Probs:
    """Per-step probabilities of every rule, raising if any exceeds one."""
    check_params(params)
    f = discernibility(params)
    believe = (1 - f) * params.lambda1
    hesitate = f * params.eta
    rates = dict(
        believe=believe,
        hesitate=hesitate,
        dismiss=1 - believe - hesitate,
        truth=params.lambda2,
        ignore_truth=1 - params.lambda2,
        lose1=params.beta1,
        confront=params.alpha,
        forget1=params.gamma1,
        lose2=params.beta2,
        forget2=params.gamma2,
        to_s1=params.theta1,
        to_s2=params.theta2,
        drift=params.omega,
    )
    # one ignorant-spreader contact resolves to exactly one outcome, total rate 1
    worst = max(1.0, *rates.values())
    if worst * dt > 1.0:
        raise ConfigurationError(
            f"dt={dt} too large: largest per-step event probability is {worst * dt:.3g} > 1"
        )
    return _Probs(**{k: v * dt for k, v in rates.items()})


def step(network: Network, states: np.ndarray, params: ModelParams, dt: float,
         rng: np.random.Generator, probs: _Probs | None = None) -> np.ndarray:
    """One synchronous update of every node from the frozen ``states``.

    Each rule contributes independent proposals; a node with several
    accepted proposals takes one of them uniformly at random.
    """
    p = probs or event_probabilities(params, dt)
    adj = network.adj
    targets: list[np.ndarray] = []
    new: list[np.ndarray] = []

    def propose(nodes, to):
        if nodes.size:
            targets.append(nodes)
            new.append(np.broadcast_to(np.asarray(to, dtype=np.int8), nodes.shape))

    spread1 = np.flatnonzero(states == S1)
    if spread1.size:
        nb = adj[spread1]
        ns = states[nb]
        # ignorant neighbours: believe / hesitate / dismiss
        ign = nb[ns == I]
        u = rng.random(ign.size)
        c1 = p.believe
        c2 = c1 + p.hesitate
        c3 = c2 + p.dismiss
        out = np.select([u < c1, u < c2, u < c3], [S1, H, R1], -1)
        hit = out >= 0
        propose(ign[hit], out[hit])
        # spreader1 loses interest on meeting rumor-aware neighbours
        actor = np.broadcast_to(spread1[:, None], nb.shape)
        aware = (ns == S1) | (ns == R1) | (ns == H)
        a = actor[aware]
        propose(a[rng.random(a.size) < p.lose1], R1)
        a = actor[ns == S2]
        propose(a[rng.random(a.size) < p.confront], R2)
        propose(spread1[rng.random(spread1.size) < p.forget1], R1)

    spread2 = np.flatnonzero(states == S2)
    if spread2.size:
        nb = adj[spread2]
        ns = states[nb]
        ign = nb[ns == I]
        u = rng.random(ign.size)
        out = np.select([u < p.truth, u < p.truth + p.ignore_truth], [S2, R2], -1)
        hit = out >= 0
        propose(ign[hit], out[hit])
        actor = np.broadcast_to(spread2[:, None], nb.shape)
        a = actor[(ns == S2) | (ns == R2)]
        propose(a[rng.random(a.size) < p.lose2], R2)
        propose(spread2[rng.random(spread2.size) < p.forget2], R2)

    hes = np.flatnonzero(states == H)
    if hes.size:
        propose(hes[rng.random(hes.size) < p.to_s1], S1)
        propose(hes[rng.random(hes.size) < p.to_s2], S2)

    if p.drift > 0:
        st1 = np.flatnonzero(states == R1)
        propose(st1[rng.random(st1.size) < p.drift], R2)

    result = states.copy()
    if not targets:
        return result
    tgt = np.concatenate(targets)
    val = np.concatenate(new)
    if tgt.size > 1:
        order = np.lexsort((rng.random(tgt.size), tgt))
        tgt = tgt[order]
        val = val[order]
        first = np.ones(tgt.size, dtype=bool)
        first[1:] = tgt[1:] != tgt[:-1]
        tgt = tgt[first]
        val = val[first]
    result[tgt] = val
    return result


@dataclass
class AbmResult:
    times: np.ndarray
    counts: np.ndarray  # (n_samples, 6) int
    extinction_time: float | None
    seed: int
    n: int
    # S1 maximum over every step, with the time it was reached
    peak_s1: int = 0
    peak_s1_time: float = 0.0

    @property
    def extinct(self) -> bool:
        return self.extinction_time is not None

    @property
    def final(self) -> np.ndarray:
        return self.counts[-1]


def _active(counts) -> int:
    return int(counts[S1] + counts[S2] + counts[H])


def initial_states(n: int, rng: np.random.Generator) -> np.ndarray:
    """All ignorant except one rumor spreader and one truth spreader."""
    states = np.full(n, I, dtype=np.int8)
    a, b = rng.choice(n, size=2, replace=False)
    states[a] = S1
    states[b] = S2
    return states


def run(network: Network, params: ModelParams, opts: AbmOptions | None = None,
        states: np.ndarray | None = None) -> AbmResult:
    """Simulate until no spreader or hesitant is left, or until ``opts.t_max``."""
    opts = opts or AbmOptions()
    probs = event_probabilities(params, opts.dt)
    rng = make_rng(opts.seed, 1)
    if states is None:
        if network.n < 2:
            raise ConfigurationError("need at least two nodes to seed both spreaders")
        states = initial_states(network.n, rng)
    else:
        states = np.asarray(states, dtype=np.int8).copy()

    n_steps = int(math.ceil(opts.t_max / opts.dt - 1e-9))
    counts = np.bincount(states, minlength=6)
    times = [0.0]
    rows = [counts]
    peak, peak_t = int(counts[S1]), 0.0
    extinction = 0.0 if _active(counts) == 0 else None
    k = 0
    while extinction is None and k < n_steps:
        states = step(network, states, params, opts.dt, rng, probs)
        k += 1
        t = k * opts.dt
        counts = np.bincount(states, minlength=6)
        if counts[S1] > peak:
            peak, peak_t = int(counts[S1]), t
        if _active(counts) == 0:
            extinction = t
        if extinction is not None or k % opts.record_every == 0 or k == n_steps:
            times.append(t)
            rows.append(counts)
    return AbmResult(
        times=np.array(times),
        counts=np.array(rows, dtype=np.int64),
        extinction_time=extinction,
        seed=opts.seed,
        n=network.n,
        peak_s1=peak,
        peak_s1_time=peak_t,
    )


# --- ensembles -------------------------------------------------------------

@dataclass
class EnsembleResult:
    times: np.ndarray
    mean: np.ndarray  # (n_times, 6) counts
    std: np.ndarray
    n_runs: int
    n: int
    seeds: np.ndarray
    peaks: np.ndarray  # per-run S1 peak counts
    peak_times: np.ndarray
    finals: np.ndarray  # (n_runs, 6)
    extinction_times: np.ndarray  # nan where not extinct

    @property
    def mean_peak_density(self) -> float:
        return float(self.peaks.mean()) / self.n

    @property
    def mean_final_density(self) -> np.ndarray:
        return self.finals.mean(axis=0) / self.n


def _ensemble_member(args):
    params, n, k, opts = args
    net = generate_regular(n, k, opts.seed)
    return run(net, params, opts)


def ensemble(params: ModelParams, n: int, k: int, opts: AbmOptions | None = None,
             n_runs: int = 50, workers: int = 1) -> EnsembleResult:
    """Independent runs on fresh graphs, seeds ``opts.seed + i``.

    Runs are aligned on the common recording grid; a run that went extinct
    early keeps contributing its final counts. ``workers > 1`` distributes
    runs over processes; results are merged by run index so the output does
    not depend on completion order.
    """
    opts = opts or AbmOptions()
    if n_runs < 1:
        raise ConfigurationError("n_runs must be >= 1")
    event_probabilities(params, opts.dt)
    jobs = [
        (params, n, k, AbmOptions(opts.dt, opts.t_max, opts.seed + i, opts.record_every))
        for i in range(n_runs)
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_ensemble_member, jobs))
    else:
        results = [_ensemble_member(j) for j in jobs]
    return aggregate(results, opts.dt * opts.record_every)


def aggregate(results: list[AbmResult], sample_dt: float) -> EnsembleResult:
    """Align runs on the grid ``j * sample_dt`` and take mean and std per point."""
    n_points = max(_grid_len(r, sample_dt) for r in results)
    grid = np.zeros((len(results), n_points, 6))
    for idx, r in enumerate(results):
        on_grid = _on_grid(r, sample_dt)
        grid[idx, : len(on_grid)] = on_grid
        grid[idx, len(on_grid):] = r.final
    return EnsembleResult(
        times=np.arange(n_points) * sample_dt,
        mean=grid.mean(axis=0),
        std=grid.std(axis=0),
        n_runs=len(results),
        n=results[0].n,
        seeds=np.array([r.seed for r in results]),
        peaks=np.array([r.peak_s1 for r in results], dtype=float),
        peak_times=np.array([r.peak_s1_time for r in results]),
        finals=np.array([r.final for r in results], dtype=float),
        extinction_times=np.array(
            [np.nan if r.extinction_time is None else r.extinction_time for r in results]
        ),
    )


def _grid_len(r: AbmResult, sample_dt: float) -> int:
    # first grid point at or after the run's last sample
    return int(math.ceil(r.times[-1] / sample_dt - 1e-9)) + 1


def _on_grid(r: AbmResult, sample_dt: float) -> np.ndarray:
    # the final sample may fall between grid points; keep exact grid points only
    j = np.rint(r.times / sample_dt)
    on = np.abs(r.times - j * sample_dt) < 1e-9 * max(1.0, sample_dt)
    return r.counts[on]


# --- CSV -------------------------------------------------------------------

ABM_HEADER = "t," + ",".join(COMPARTMENTS) + ",seed"
ENSEMBLE_HEADER = (
    "t,"
    + ",".join(f"{c}_mean" for c in COMPARTMENTS)
    + ","
    + ",".join(f"{c}_std" for c in COMPARTMENTS)
    + ",n_runs"
)


def abm_to_csv(result: AbmResult, comments: list[str] | None = None) -> str:
    buf = io.StringIO()
    for line in comments or ():
        buf.write(f"# {line}\n")
    buf.write(ABM_HEADER + "\n")
    for t, row in zip(result.times, result.counts):
        buf.write(f"{float(t)!r}," + ",".join(str(int(c)) for c in row) + f",{result.seed}\n")
    return buf.getvalue()


def ensemble_to_csv(ens: EnsembleResult, comments: list[str] | None = None) -> str:
    buf = io.StringIO()
    for line in comments or ():
        buf.write(f"# {line}\n")
    buf.write(ENSEMBLE_HEADER + "\n")
    for t, m, s in zip(ens.times, ens.mean, ens.std):
        vals = [float(t), *m.tolist(), *s.tolist()]
        buf.write(",".join(repr(float(v)) for v in vals) + f",{ens.n_runs}\n")
    return buf.getvalue()
