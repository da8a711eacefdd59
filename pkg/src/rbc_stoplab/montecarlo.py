"""Monte-Carlo experiment harness and reference-table comparisons.

The harness simulates many independent classification trials, evaluates
every requested stopping rule on shared (common-random-number) evidence
streams, and aggregates cumulative stop-probability and conditional
accuracy matrices:

* ``p_stop[m, s-1]``  -- fraction of trials stopped by sequence ``s``
  under method ``m``; a stop on the bare prior counts toward the first
  column.
* ``p_true_given_stop[m, s-1]`` -- fraction of those stopped trials whose
  locked-in decision was correct.

Three bundled benchmark scenarios (``T2``, ``T3``, ``T4``) carry
reference matrices; ``reproduce_table`` reruns them and reports per-cell
agreement.  The harness honors the ``RBC_STOPLAB_THREADS`` environment
variable as a worker-count hint; per-trial random substreams make the
results identical for any worker count.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .criteria import FAMILIES, StoppingRule, calibrate
from .engine import Broadcast, EvidenceModel, QueryScheme, trial_stream
from .simplex import SimplexPoint

__all__ = [
    "RandomRemainder",
    "ExperimentConfig",
    "ExperimentResult",
    "TableCell",
    "TableComparison",
    "TABLE_IDS",
    "DEFAULT_TABLE_SEED",
    "run_experiment",
    "reproduce_table",
    "table_config",
    "speed_accuracy_sweep",
    "SweepPoint",
    "trajectory_ensemble",
    "EnsembleResult",
    "letters_projection",
    "write_matrix_csv",
    "read_matrix_csv",
    "result_to_csv_dir",
    "result_from_csv_dir",
    "comparison_to_csv",
]

_LOG2 = np.log(2.0)
DEFAULT_TABLE_SEED = 20210814


@dataclass(frozen=True)
class RandomRemainder:
    """Prior spec: fixed true-class mass, the rest random per trial.

    The non-true classes receive independent uniform(0, 1) raw weights,
    normalized to ``1 - true_mass``, redrawn for every trial from that
    trial's substream (before any evidence draws).
    """

    true_mass: float

    def __post_init__(self) -> None:
        if not 0.0 < self.true_mass < 1.0:
            raise ValueError("true_mass must lie in (0, 1)")


@dataclass(frozen=True)
class ExperimentConfig:
    n: int
    prior: SimplexPoint | RandomRemainder
    tau: float
    methods: tuple[str, ...]
    model: EvidenceModel
    true_index: int = 0
    scheme: QueryScheme = Broadcast()
    n_trials: int = 5000
    max_sequences: int = 100
    master_seed: int = 0
    common_random_numbers: bool = True
    check_prior: bool = True

    def __post_init__(self) -> None:
        if self.n < 2:
            raise ValueError("n must be at least 2")
        if isinstance(self.prior, SimplexPoint) and self.prior.n != self.n:
            raise ValueError("prior dimension does not match n")
        if not 0 <= self.true_index < self.n:
            raise ValueError("true_index out of range")
        unknown = set(self.methods) - set(FAMILIES)
        if unknown:
            raise ValueError(f"unknown methods: {sorted(unknown)}")
        if not self.methods:
            raise ValueError("at least one method required")
        if self.n_trials < 1:
            raise ValueError("n_trials must be at least 1")
        if self.max_sequences < 1:
            raise ValueError("max_sequences must be at least 1")


@dataclass
class ExperimentResult:
    """Aggregated matrices plus per-trial stop records.

    ``first_stop`` rows hold, per method, the stop sequence of each trial
    (0 = stopped on the prior, -1 = censored); ``stop_correct`` marks
    whether the locked decision was right.  Both are omitted from CSV
    serialization.
    """

    methods: tuple[str, ...]
    sequences: np.ndarray
    p_stop: np.ndarray
    p_true_given_stop: np.ndarray
    mean_sequences_to_stop: np.ndarray
    overall_accuracy: np.ndarray
    stopped_fraction: np.ndarray
    n_trials: int
    first_stop: np.ndarray | None = field(default=None, repr=False)
    stop_correct: np.ndarray | None = field(default=None, repr=False)
    trajectories: np.ndarray | None = field(default=None, repr=False)

    def method_row(self, method: str) -> int:
        return self.methods.index(method)


def _worker_count() -> int:
    raw = os.environ.get("RBC_STOPLAB_THREADS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _resolve_prior_log(cfg: ExperimentConfig, rng: np.random.Generator) -> np.ndarray:
    if isinstance(cfg.prior, SimplexPoint):
        return np.array(cfg.prior.log_probs)
    raw = rng.random(cfg.n - 1)
    rest = (1.0 - cfg.prior.true_mass) * raw / raw.sum()
    p = np.empty(cfg.n)
    p[cfg.true_index] = cfg.prior.true_mass
    p[np.arange(cfg.n) != cfg.true_index] = rest
    return np.log(p)


def _simulate_chunk(cfg: ExperimentConfig, trial_indices: np.ndarray,
                    stream: int) -> np.ndarray:
    """Log-domain state tensor (trials, max_sequences + 1, n) for a chunk."""
    t_count = trial_indices.size
    s_count, n = cfg.max_sequences, cfg.n
    prior_logs = np.empty((t_count, n))
    draws = np.empty((t_count, s_count, n))
    for row, trial in enumerate(trial_indices):
        rng = trial_stream(cfg.master_seed, int(trial), stream)
        prior_logs[row] = _resolve_prior_log(cfg, rng)
        draws[row] = rng.standard_normal((s_count, n))

    mus = np.full(n, cfg.model.mu_neg)
    mus[cfg.true_index] = cfg.model.mu_pos
    cs = np.full(n, cfg.model.c_neg)
    cs[cfg.true_index] = cfg.model.c_pos

    states = np.empty((t_count, s_count + 1, n))
    logp = prior_logs - _logsumexp_rows(prior_logs)[:, None]
    states[:, 0] = logp
    broadcast = isinstance(cfg.scheme, Broadcast)
    for s in range(s_count):
        log_e = mus + cs * draws[:, s]
        if not broadcast:
            probs = np.exp(logp)
            order = np.argsort(-probs, axis=1, kind="stable")
            mask = np.zeros((t_count, n), dtype=bool)
            rows = np.arange(t_count)[:, None]
            mask[rows, order[:, : cfg.scheme.n_queries]] = True
            log_e = np.where(mask, log_e, 0.0)
        logp = logp + log_e
        logp = logp - _logsumexp_rows(logp)[:, None]
        states[:, s + 1] = logp
    return states


def _logsumexp_rows(logw: np.ndarray) -> np.ndarray:
    m = np.max(logw, axis=-1)
    with np.errstate(invalid="ignore"):
        out = m + np.log(np.sum(np.exp(logw - m[..., None]), axis=-1))
    return out


def _shannon_bits(P: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(P > 0, P * np.log(np.where(P > 0, P, 1.0)), 0.0)
    return -terms.sum(-1) / _LOG2


def _renyi_bits(P: np.ndarray, alpha: float) -> np.ndarray:
    return np.log(np.power(P, alpha).sum(-1)) / ((1.0 - alpha) * _LOG2)


def _kl_bits(P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(
            P > 0,
            P * (np.log(np.where(P > 0, P, 1.0)) - np.log(np.where(Q > 0, Q, 1.0))),
            0.0,
        )
    return terms.sum(-1) / _LOG2


def _region_matrix(rule: StoppingRule, P: np.ndarray, check_prior: bool) -> np.ndarray:
    """Strict stop-region membership per (trial, state); mirrors should_stop."""
    if rule.family in ("M1", "M1bar"):
        reg = P.max(-1) > rule.threshold
    elif rule.family == "MP":
        srt = np.sort(P, axis=-1)
        reg = (srt[..., -1] - srt[..., -2]) > 1.0 - rule.threshold
    elif rule.family == "M3":
        reg = _shannon_bits(P) < rule.threshold
    elif rule.family in ("M2", "M4"):
        reg = _renyi_bits(P, rule.alpha) < rule.threshold
    elif rule.family == "M5":
        reg = np.zeros(P.shape[:2], dtype=bool)
        reg[:, 1:] = _kl_bits(P[:, 1:], P[:, :-1]) < rule.threshold
        if not check_prior:
            # first evaluation happens after update 1 and only records state
            reg[:, 1] = False
        return reg
    else:  # pragma: no cover - guarded by StoppingRule
        raise ValueError(rule.family)
    if not check_prior:
        reg = reg.copy()
        reg[:, 0] = False
    return reg


def _first_stop_and_decision(reg: np.ndarray, P: np.ndarray,
                             true_index: int) -> tuple[np.ndarray, np.ndarray]:
    any_stop = reg.any(axis=1)
    first = np.where(any_stop, reg.argmax(axis=1), -1)
    rows = np.arange(P.shape[0])
    at = np.maximum(first, 0)
    decision = P[rows, at].argmax(axis=-1)
    correct = (decision == true_index) & any_stop
    return first, correct


def run_experiment(cfg: ExperimentConfig,
                   keep_trajectories: bool = False) -> ExperimentResult:
    """Run all trials for all methods and aggregate the matrices.

    With common random numbers (the default) every method sees the same
    per-trial evidence stream; otherwise each method gets its own
    independent substream family.  Aggregation is by trial index, so the
    result does not depend on how trials are chunked across workers.
    ``keep_trajectories`` stores the shared-stream state tensor
    (trials, sequences + 1, n) on the result.
    """
    rules = [calibrate(m, cfg.tau, cfg.n) for m in cfg.methods]
    workers = _worker_count()
    chunks = np.array_split(np.arange(cfg.n_trials), min(workers, cfg.n_trials))
    chunks = [c for c in chunks if c.size]

    n_methods = len(rules)
    first = np.empty((n_methods, cfg.n_trials), dtype=np.int64)
    correct = np.empty((n_methods, cfg.n_trials), dtype=bool)
    kept = (np.empty((cfg.n_trials, cfg.max_sequences + 1, cfg.n))
            if keep_trajectories else None)

    def handle_chunk(chunk: np.ndarray) -> None:
        if cfg.common_random_numbers:
            states = np.exp(_simulate_chunk(cfg, chunk, stream=0))
            per_method = [states] * n_methods
        else:
            per_method = [
                np.exp(_simulate_chunk(cfg, chunk, stream=1 + m))
                for m in range(n_methods)
            ]
        if kept is not None:
            kept[chunk] = (per_method[0] if cfg.common_random_numbers
                           else np.exp(_simulate_chunk(cfg, chunk, stream=0)))
        for m, rule in enumerate(rules):
            reg = _region_matrix(rule, per_method[m], cfg.check_prior)
            f, ok = _first_stop_and_decision(reg, per_method[m], cfg.true_index)
            first[m, chunk] = f
            correct[m, chunk] = ok

    if len(chunks) == 1:
        handle_chunk(chunks[0])
    else:
        with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
            list(pool.map(handle_chunk, chunks))

    s_count = cfg.max_sequences
    sequences = np.arange(1, s_count + 1)
    p_stop = np.empty((n_methods, s_count))
    p_true = np.empty((n_methods, s_count))
    stopped = first >= 0
    for m in range(n_methods):
        for s in sequences:
            sel = stopped[m] & (first[m] <= s)
            k = int(sel.sum())
            p_stop[m, s - 1] = k / cfg.n_trials
            p_true[m, s - 1] = (correct[m][sel].sum() / k) if k else 0.0

    mean_stop = np.array([
        first[m][stopped[m]].mean() if stopped[m].any() else math.nan
        for m in range(n_methods)
    ])
    overall = np.array([
        (correct[m][stopped[m]].sum() / stopped[m].sum()) if stopped[m].any() else 0.0
        for m in range(n_methods)
    ])
    return ExperimentResult(
        methods=tuple(cfg.methods),
        sequences=sequences,
        p_stop=p_stop,
        p_true_given_stop=p_true,
        mean_sequences_to_stop=mean_stop,
        overall_accuracy=overall,
        stopped_fraction=stopped.mean(axis=1),
        n_trials=cfg.n_trials,
        first_stop=first,
        stop_correct=correct,
        trajectories=kept,
    )


# ---------------------------------------------------------------------------
# Bundled benchmark tables
# ---------------------------------------------------------------------------

TABLE_IDS = ("T2", "T3", "T4")

_METHOD_ORDER = ("MP", "M1", "M2", "M3", "M4", "M5", "M1bar")

_T3_PRIOR = [0.13, 0.52, 0.30] + [0.05 / 7] * 7

_REFERENCE_TABLES: dict[str, dict] = {
    "T2": {
        "tau": 0.8,
        "prior": [0.42, 0.55, 0.03],
        "model": EvidenceModel(0.6, 0.5, 0.0, 0.5),
        "columns": list(range(1, 8)),
        "p_stop": {
            "MP":    [0.00, 0.06, 0.22, 0.43, 0.59, 0.67, 0.77],
            "M1":    [0.00, 0.06, 0.22, 0.43, 0.59, 0.67, 0.77],
            "M2":    [0.00, 0.08, 0.27, 0.47, 0.62, 0.70, 0.79],
            "M3":    [0.00, 0.34, 0.56, 0.70, 0.80, 0.85, 0.90],
            "M4":    [1.00, 1.00, 1.00, 1.00, 1.00, 1.00, 1.00],
            "M5":    [0.00, 0.00, 0.37, 0.41, 0.46, 0.55, 0.66],
            "M1bar": [0.00, 0.16, 0.37, 0.56, 0.71, 0.77, 0.84],
        },
        "p_true_given_stop": {
            "MP":    [0.00, 0.67, 0.86, 0.96, 0.97, 0.98, 0.99],
            "M1":    [0.00, 0.67, 0.86, 0.96, 0.97, 0.98, 0.99],
            "M2":    [0.00, 0.67, 0.85, 0.95, 0.95, 0.97, 0.98],
            "M3":    [0.00, 0.20, 0.48, 0.63, 0.74, 0.80, 0.87],
            "M4":    [0.00, 0.55, 0.72, 0.82, 0.87, 0.90, 0.94],
            "M5":    [0.00, 0.00, 0.58, 0.76, 0.87, 0.91, 0.95],
            "M1bar": [0.00, 0.64, 0.84, 0.93, 0.95, 0.97, 0.98],
        },
    },
    "T3": {
        "tau": 0.75,
        "prior": _T3_PRIOR,
        "model": EvidenceModel(0.8, 0.5, -0.3, 0.5),
        "columns": list(range(1, 10)),
        "p_stop": {
            "MP":    [0.00, 0.08, 0.26, 0.42, 0.61, 0.70, 0.78, 0.82, 0.88],
            "M1":    [0.00, 0.03, 0.18, 0.35, 0.54, 0.66, 0.76, 0.81, 0.86],
            "M2":    [0.00, 0.05, 0.23, 0.41, 0.61, 0.72, 0.81, 0.85, 0.88],
            "M3":    [1.00, 1.00, 1.00, 1.00, 1.00, 1.00, 1.00, 1.00, 1.00],
            "M4":    [1.00, 1.00, 1.00, 1.00, 1.00, 1.00, 1.00, 1.00, 1.00],
            "M5":    [0.00, 0.00, 0.35, 0.40, 0.47, 0.55, 0.62, 0.69, 0.76],
            "M1bar": [0.00, 0.48, 0.67, 0.79, 0.88, 0.92, 0.94, 0.95, 0.97],
        },
        "p_true_given_stop": {
            "MP":    [0.00, 0.36, 0.78, 0.89, 0.94, 0.96, 0.97, 0.98, 0.98],
            "M1":    [0.00, 0.29, 0.83, 0.90, 0.94, 0.97, 0.97, 0.98, 0.98],
            "M2":    [0.00, 0.32, 0.80, 0.89, 0.94, 0.96, 0.97, 0.98, 0.98],
            "M3":    [0.00, 0.43, 0.63, 0.74, 0.84, 0.87, 0.91, 0.93, 0.94],
            "M4":    [0.00, 0.43, 0.63, 0.74, 0.84, 0.87, 0.91, 0.93, 0.94],
            "M5":    [0.00, 0.00, 0.46, 0.65, 0.82, 0.88, 0.92, 0.95, 0.96],
            "M1bar": [0.00, 0.38, 0.70, 0.80, 0.87, 0.90, 0.93, 0.95, 0.96],
        },
    },
    "T4": {
        "tau": 0.85,
        "prior": RandomRemainder(0.1),
        "n": 10,
        "model": EvidenceModel(0.8, 0.5, -0.3, 0.5),
        "columns": list(range(10, 18)),
        "p_stop": {
            "MP":    [0.09, 0.18, 0.31, 0.45, 0.60, 0.70, 0.77, 0.86],
            "M1":    [0.05, 0.11, 0.21, 0.33, 0.48, 0.60, 0.70, 0.81],
            "M2":    [0.05, 0.11, 0.21, 0.33, 0.48, 0.61, 0.70, 0.81],
            "M3":    [0.05, 0.12, 0.22, 0.34, 0.49, 0.61, 0.71, 0.81],
            "M4":    [0.05, 0.13, 0.23, 0.35, 0.49, 0.62, 0.72, 0.82],
            "M5":    [0.00, 0.00, 0.00, 0.00, 0.00, 0.01, 0.03, 0.08],
            "M1bar": [0.10, 0.20, 0.33, 0.47, 0.61, 0.72, 0.79, 0.88],
        },
        "p_true_given_stop": {
            "MP":    [0.95, 0.98, 0.98, 0.99, 0.99, 0.99, 1.00, 1.00],
            "M1":    [1.00, 0.99, 0.99, 1.00, 1.00, 1.00, 1.00, 1.00],
            "M2":    [1.00, 0.99, 0.99, 1.00, 1.00, 1.00, 1.00, 1.00],
            "M3":    [1.00, 0.99, 0.99, 1.00, 1.00, 1.00, 1.00, 1.00],
            "M4":    [0.98, 0.99, 0.99, 1.00, 1.00, 1.00, 1.00, 1.00],
            "M5":    [0.00, 0.00, 0.00, 0.00, 0.00, 1.00, 1.00, 1.00],
            "M1bar": [0.94, 0.98, 0.98, 0.99, 0.99, 0.99, 0.99, 1.00],
        },
    },
}


def table_config(table_id: str, n_trials: int = 5000,
                 master_seed: int = DEFAULT_TABLE_SEED) -> ExperimentConfig:
    """The bundled configuration behind one of the benchmark tables."""
    if table_id not in TABLE_IDS:
        raise ValueError(f"unknown table {table_id!r}; expected one of {TABLE_IDS}")
    ref = _REFERENCE_TABLES[table_id]
    if isinstance(ref["prior"], RandomRemainder):
        prior = ref["prior"]
        n = ref["n"]
    else:
        prior = SimplexPoint.from_probs(ref["prior"])
        n = prior.n
    return ExperimentConfig(
        n=n,
        prior=prior,
        tau=ref["tau"],
        methods=_METHOD_ORDER,
        model=ref["model"],
        n_trials=n_trials,
        max_sequences=max(ref["columns"]),
        master_seed=master_seed,
    )


@dataclass(frozen=True)
class TableCell:
    table: str
    method: str
    sequence: int
    metric: str
    paper: float
    repro: float

    @property
    def abs_delta(self) -> float:
        return abs(self.paper - self.repro)


@dataclass
class TableComparison:
    table: str
    tolerance: float
    cells: list[TableCell]
    result: ExperimentResult

    @property
    def all_pass(self) -> bool:
        return all(c.abs_delta <= self.tolerance for c in self.cells)

    def failures(self) -> list[TableCell]:
        return [c for c in self.cells if c.abs_delta > self.tolerance]


def reproduce_table(table_id: str, n_trials: int = 5000,
                    master_seed: int = DEFAULT_TABLE_SEED,
                    tolerance: float = 0.03) -> TableComparison:
    """Rerun a benchmark table and compare every cell to its reference value."""
    cfg = table_config(table_id, n_trials=n_trials, master_seed=master_seed)
    result = run_experiment(cfg)
    ref = _REFERENCE_TABLES[table_id]
    cells: list[TableCell] = []
    for method in _METHOD_ORDER:
        row = result.method_row(method)
        for metric, matrix in (("p_stop", result.p_stop),
                               ("p_true_given_stop", result.p_true_given_stop)):
            for j, col in enumerate(ref["columns"]):
                cells.append(TableCell(
                    table=table_id,
                    method=method,
                    sequence=col,
                    metric=metric,
                    paper=float(ref[metric][method][j]),
                    repro=float(matrix[row, col - 1]),
                ))
    return TableComparison(table_id, tolerance, cells, result)


# ---------------------------------------------------------------------------
# Sweeps, ensembles, and the typing projection
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepPoint:
    method: str
    tau: float
    mean_sequences: float
    mean_accuracy: float


def speed_accuracy_sweep(cfg: ExperimentConfig, tau_list,
                         include_m5: bool = False) -> list[SweepPoint]:
    """Speed-accuracy operating points over a grid of confidence anchors.

    One evidence simulation is shared by every ``tau`` and method.
    Censored trials count ``max_sequences`` toward the mean stop time.
    The consecutive-KL rule is excluded by default (it does not depend on
    ``tau`` and dominates the time axis).
    """
    taus = [float(t) for t in tau_list]
    for t in taus:
        if not (1.0 / cfg.n < t < 1.0):
            raise ValueError(f"tau {t} outside (1/{cfg.n}, 1)")
    methods = tuple(m for m in cfg.methods if include_m5 or m != "M5")

    workers = _worker_count()
    chunks = np.array_split(np.arange(cfg.n_trials), min(workers, cfg.n_trials))
    chunks = [c for c in chunks if c.size]
    state_chunks = [np.exp(_simulate_chunk(cfg, c, stream=0)) for c in chunks]

    points: list[SweepPoint] = []
    for method in methods:
        for tau in taus:
            rule = calibrate(method, tau, cfg.n)
            firsts, corrects = [], []
            for states in state_chunks:
                reg = _region_matrix(rule, states, cfg.check_prior)
                f, ok = _first_stop_and_decision(reg, states, cfg.true_index)
                firsts.append(f)
                corrects.append(ok)
            first = np.concatenate(firsts)
            correct = np.concatenate(corrects)
            stopped = first >= 0
            seq = np.where(stopped, first, cfg.max_sequences).mean()
            acc = (correct[stopped].sum() / stopped.sum()) if stopped.any() else 0.0
            points.append(SweepPoint(method, tau, float(seq), float(acc)))
    return points


@dataclass
class EnsembleResult:
    prior: SimplexPoint
    paths: np.ndarray  # (n_paths, max_sequences + 1, n) probabilities
    mean: np.ndarray   # (max_sequences + 1, n)


def trajectory_ensemble(priors, cfg: ExperimentConfig,
                        n_paths: int = 100) -> list[EnsembleResult]:
    """Simulate trajectory bundles from each prior plus their mean path."""
    out = []
    for k, prior in enumerate(priors):
        sub = replace(cfg, prior=prior, n=prior.n, n_trials=n_paths,
                      master_seed=cfg.master_seed + k)
        states = np.exp(_simulate_chunk(sub, np.arange(n_paths), stream=0))
        out.append(EnsembleResult(prior=prior, paths=states, mean=states.mean(axis=0)))
    return out


def letters_projection(acc: float, e_seq: float, total_letters: int = 100,
                       literal: bool = False) -> float:
    """Expected sequences to finish a copy-typing task of given length.

    Each round attempts every remaining letter at ``e_seq`` sequences per
    attempt; a fraction ``acc`` of the attempts sticks (rounded up), the
    rest repeat next round.  The default counts a round's attempts before
    removing its successes; ``literal`` instead adds the post-decrement
    remainder each round, which yields a much smaller total.
    """
    if not 0.0 < acc <= 1.0:
        raise ValueError("acc must lie in (0, 1]")
    if e_seq <= 0:
        raise ValueError("e_seq must be positive")
    if total_letters < 1:
        raise ValueError("total_letters must be at least 1")
    remaining = int(total_letters)
    total = 0.0
    while remaining > 0:
        done = math.ceil(remaining * acc)
        if literal:
            remaining -= done
            total += remaining * e_seq
        else:
            total += remaining * e_seq
            remaining -= done
    return total


# ---------------------------------------------------------------------------
# CSV serialization (17 significant digits keeps round-trips lossless)
# ---------------------------------------------------------------------------


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_matrix_csv(path, methods, sequences, matrix) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("method," + ",".join(f"s{int(s)}" for s in sequences) + "\n")
        for m, row in zip(methods, matrix):
            fh.write(m + "," + ",".join(_fmt(v) for v in row) + "\n")


def read_matrix_csv(path) -> tuple[tuple[str, ...], np.ndarray, np.ndarray]:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split(",")
        sequences = np.array([int(h[1:]) for h in header[1:]])
        methods, rows = [], []
        for line in fh:
            parts = line.rstrip("\n").split(",")
            methods.append(parts[0])
            rows.append([float(v) for v in parts[1:]])
    return tuple(methods), sequences, np.array(rows)


def result_to_csv_dir(result: ExperimentResult, out_dir) -> None:
    os.makedirs(out_dir, exist_ok=True)
    write_matrix_csv(os.path.join(out_dir, "p_stop.csv"),
                     result.methods, result.sequences, result.p_stop)
    write_matrix_csv(os.path.join(out_dir, "p_true_given_stop.csv"),
                     result.methods, result.sequences, result.p_true_given_stop)
    with open(os.path.join(out_dir, "summary.csv"), "w", encoding="utf-8") as fh:
        fh.write("method,mean_sequences_to_stop,overall_accuracy,"
                 "stopped_fraction,n_trials\n")
        for i, m in enumerate(result.methods):
            fh.write(",".join([
                m,
                _fmt(result.mean_sequences_to_stop[i]),
                _fmt(result.overall_accuracy[i]),
                _fmt(result.stopped_fraction[i]),
                str(result.n_trials),
            ]) + "\n")


def result_from_csv_dir(out_dir) -> ExperimentResult:
    methods, sequences, p_stop = read_matrix_csv(os.path.join(out_dir, "p_stop.csv"))
    methods2, _, p_true = read_matrix_csv(
        os.path.join(out_dir, "p_true_given_stop.csv"))
    if methods != methods2:
        raise ValueError("matrix files list different methods")
    mean_stop, overall, stopped, n_trials = [], [], [], 0
    with open(os.path.join(out_dir, "summary.csv"), "r", encoding="utf-8") as fh:
        fh.readline()
        for line in fh:
            parts = line.rstrip("\n").split(",")
            mean_stop.append(float(parts[1]))
            overall.append(float(parts[2]))
            stopped.append(float(parts[3]))
            n_trials = int(parts[4])
    return ExperimentResult(
        methods=methods,
        sequences=sequences,
        p_stop=p_stop,
        p_true_given_stop=p_true,
        mean_sequences_to_stop=np.array(mean_stop),
        overall_accuracy=np.array(overall),
        stopped_fraction=np.array(stopped),
        n_trials=n_trials,
    )


def comparison_to_csv(comp: TableComparison, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("table,method,sequence,metric,paper,repro,abs_delta,pass\n")
        for c in comp.cells:
            fh.write(",".join([
                c.table, c.method, str(c.sequence), c.metric,
                _fmt(c.paper), _fmt(c.repro), _fmt(c.abs_delta),
                str(c.abs_delta <= comp.tolerance).lower(),
            ]) + "\n")
