"""Reservoir computing with a cellular automaton as the reservoir.

Input bits overwrite seeded random position sets of the CA state in each of
R independent instances; each injection starts a depth-I trajectory segment
(the injected state plus I-1 further updates), and the concatenation of all
R*I recorded states forms the feature row for that time step.  A
ridge-regularized linear readout trained on those features produces the
outputs.  Everything is a pure function of (inputs, config, seed).

Each input channel may be written to several cells (`copies`) and is by
default accompanied by its complement; overlapping diffusion cones of
repeated copies are what give a nonlinear rule usable mixing, so tasks like
windowed parity profit from more copies while memory tasks profit from
leaving more cells untouched.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .core import RuleTable, as_bits, step_reference


class SingularFeaturesError(np.linalg.LinAlgError):
    """Raised when ridge = 0 and the feature Gram matrix is not invertible."""


@dataclass(frozen=True)
class ReservoirConfig:
    """CA reservoir layout: rule, lattice width, trajectory depth, instance count."""

    rule: RuleTable
    width: int
    iterations: int = 4
    redundancy: int = 4
    seed: int = 0
    copies: int = 1
    complement: bool = True

    def __post_init__(self):
        if self.iterations < 1 or self.redundancy < 1:
            raise ValueError("iterations and redundancy must be >= 1")
        if self.copies < 1:
            raise ValueError("copies must be >= 1")
        if self.width < self.rule.spec.size:
            raise ValueError("width shorter than the rule neighborhood")

    @property
    def feature_dim(self) -> int:
        return self.redundancy * self.iterations * self.width

    def cells_per_input(self, n_inputs: int) -> int:
        return n_inputs * self.copies * (2 if self.complement else 1)


def input_maps(cfg: ReservoirConfig, n_inputs: int) -> np.ndarray:
    """Injection positions, one seeded random permutation prefix per instance."""
    eff = cfg.cells_per_input(n_inputs)
    if eff > cfg.width:
        raise ValueError("input (with copies/complements) wider than the lattice")
    rng = np.random.default_rng(cfg.seed)
    return np.stack([rng.permutation(cfg.width)[:eff] for _ in range(cfg.redundancy)])


def _injected_values(u_t: np.ndarray, cfg: ReservoirConfig) -> np.ndarray:
    vals = np.repeat(u_t, cfg.copies, axis=-1)
    if cfg.complement:
        vals = np.concatenate([vals, 1 - vals], axis=-1)
    return vals


def expand_reservoir(inputs, cfg: ReservoirConfig) -> np.ndarray:
    """Feature matrix of a sequence (T, n_in) or batch of sequences (S, T, n_in).

    Per time step and instance: overwrite the mapped cells with the input
    bits, then record a trajectory segment of depth `iterations` (the
    injected state followed by iterations-1 updates).  Feature rows
    concatenate instances x depth x cells (dim = R*I*width) and are ordered
    by time; the segment's last state carries over to the next injection.
    """
    u = as_bits(inputs)
    if u.ndim == 1:
        u = u[:, None]
    single = u.ndim == 2
    if single:
        u = u[None, :, :]
    if u.ndim != 3:
        raise ValueError("inputs must have shape (T,), (T, n_in) or (S, T, n_in)")
    n_seq, n_steps, n_in = u.shape
    maps = input_maps(cfg, n_in)
    width = cfg.width
    feats = np.empty((n_seq, n_steps, cfg.feature_dim), dtype=np.uint8)
    for r in range(cfg.redundancy):
        state = np.zeros((n_seq, width), dtype=np.uint8)
        cols = maps[r]
        for t in range(n_steps):
            state[:, cols] = _injected_values(u[:, t, :], cfg)
            for i in range(cfg.iterations):
                if i > 0:
                    state = step_reference(state, cfg.rule)
                lo = (r * cfg.iterations + i) * width
                feats[:, t, lo : lo + width] = state
    return feats[0] if single else feats


def raw_window_features(inputs, window: int) -> np.ndarray:
    """Baseline features: the last `window` input vectors, zero-padded at the start."""
    u = as_bits(inputs)
    if u.ndim == 2:
        u = u[None, :, :]
        return raw_window_features_batch(u, window)[0]
    return raw_window_features_batch(u, window)


def raw_window_features_batch(u: np.ndarray, window: int) -> np.ndarray:
    n_seq, n_steps, n_in = u.shape
    feats = np.zeros((n_seq, n_steps, window * n_in), dtype=np.uint8)
    for d in range(window):
        block = feats[:, :, d * n_in : (d + 1) * n_in]
        block[:, d:, :] = u[:, : n_steps - d, :]
    return feats


@dataclass
class ReadoutModel:
    """Linear readout: weights solve (G'G + ridge*I) W = G'Y."""

    weights: np.ndarray  # (features, targets)
    ridge: float
    residual: float  # relative normal-equation residual at the solution

    def predict(self, features) -> np.ndarray:
        return np.asarray(features, dtype=float) @ self.weights

    def predict_bits(self, features) -> np.ndarray:
        # threshold at 0.5, ties toward 0
        return (self.predict(features) > 0.5).astype(np.uint8)


def train_readout(features, targets, ridge: float = 0.0) -> ReadoutModel:
    """Solve the ridge normal equations by Cholesky factorization.

    Raises SingularFeaturesError when ridge = 0 and the Gram matrix is
    rank-deficient; raises ArithmeticError if the solution fails to satisfy
    the normal equations to the contracted accuracy.
    """
    g = np.asarray(features, dtype=float)
    y = np.asarray(targets, dtype=float)
    if y.ndim == 1:
        y = y[:, None]
    if g.ndim != 2 or g.shape[0] != y.shape[0]:
        raise ValueError("features and targets must have matching row counts")
    if ridge < 0:
        raise ValueError("ridge must be >= 0")
    gram = g.T @ g + ridge * np.eye(g.shape[1])
    rhs = g.T @ y
    try:
        factor = cho_factor(gram)
    except np.linalg.LinAlgError as exc:
        raise SingularFeaturesError(
            "feature Gram matrix is singular; increase ridge"
        ) from exc
    weights = cho_solve(factor, rhs)
    grad = gram @ weights - rhs
    scale = 1.0 + np.linalg.norm(y)
    if np.linalg.norm(grad) > 1e-6 * scale:
        raise ArithmeticError("normal-equation solve did not converge")
    residual = float(np.linalg.norm(grad) / (1.0 + np.linalg.norm(rhs)))
    return ReadoutModel(weights=weights, ridge=float(ridge), residual=residual)


# --------------------------- sequence tasks ---------------------------

TASK_KINDS = ("five-bit-memory", "temporal-parity", "temporal-density")


@dataclass(frozen=True)
class TaskSpec:
    """Desk-scale sequence task: kind plus horizon/size knobs.

    delay: window reach for parity/density (output at t looks at t-delay..t).
    distractor_period: gap between presentation and recall for 5-bit memory.
    """

    kind: str
    delay: int = 3
    distractor_period: int = 20
    sequence_length: int = 100
    trials: int = 32

    def __post_init__(self):
        if self.kind not in TASK_KINDS:
            raise ValueError(f"unknown task kind {self.kind!r}")
        if self.delay < 0 or self.distractor_period < 1:
            raise ValueError("bad task horizon")


def make_task_data(task: TaskSpec, seed: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Deterministic dataset: (inputs (S,T,n_in), targets (S,T,K), scored (S,T))."""
    rng = np.random.default_rng(seed)
    if task.kind == "five-bit-memory":
        return _five_bit_memory_data(task)
    n_seq, n_steps = task.trials, task.sequence_length
    u = (rng.random((n_seq, n_steps, 1)) < 0.5).astype(np.uint8)
    window = task.delay + 1
    csum = np.cumsum(u[:, :, 0], axis=1)
    wsum = csum.copy()
    wsum[:, window:] = csum[:, window:] - csum[:, :-window]
    if task.kind == "temporal-parity":
        y = (wsum % 2).astype(np.uint8)
    else:  # temporal-density: strict majority of the window, ties toward 0
        y = (2 * wsum > window).astype(np.uint8)
    scored = np.zeros((n_seq, n_steps), dtype=bool)
    scored[:, task.delay :] = True
    return u, y[:, :, None], scored


def _five_bit_memory_data(task: TaskSpec) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """All 32 five-bit patterns; 4 input channels (data, inverse, distractor, cue).

    Presentation occupies steps 0..4; the distractor runs until the cue fires
    one step before recall; recall replays the pattern on the first two output
    channels while the third ("wait") channel drops to 0.
    """
    gap = task.distractor_period
    n_steps = 10 + gap
    cue_at = 5 + gap - 1
    patterns = ((np.arange(32)[:, None] >> np.arange(5)) & 1).astype(np.uint8)
    u = np.zeros((32, n_steps, 4), dtype=np.uint8)
    y = np.zeros((32, n_steps, 3), dtype=np.uint8)
    u[:, :5, 0] = patterns
    u[:, :5, 1] = 1 - patterns
    u[:, 5:, 2] = 1
    u[:, cue_at, 2] = 0
    u[:, cue_at, 3] = 1
    y[:, :, 2] = 1
    recall = slice(5 + gap, 10 + gap)
    y[:, recall, 0] = patterns
    y[:, recall, 1] = 1 - patterns
    y[:, recall, 2] = 0
    scored = np.ones((32, n_steps), dtype=bool)
    return u, y, scored


def run_task(
    task: TaskSpec,
    cfg: ReservoirConfig,
    seed: int,
    ridge: float = 1.0,
    feature_kind: str = "reservoir",
    csv_path=None,
) -> dict:
    """Train and score one pipeline; metrics are bit-exact under fixed seeds.

    feature_kind "reservoir" expands inputs through the CA; "raw" feeds the
    readout the raw input window (the no-reservoir baseline).  Trials are
    split half/half into train and test by a seeded shuffle.  With csv_path
    set, the per-step learning table (trial, step, targets, predictions) of
    the test trials is written out.
    """
    t0 = time.perf_counter()
    inputs, targets, scored = make_task_data(task, seed)
    if feature_kind == "reservoir":
        feats = expand_reservoir(inputs, cfg)
    elif feature_kind == "raw":
        feats = raw_window_features_batch(inputs, task.delay + 1)
    else:
        raise ValueError(f"unknown feature kind {feature_kind!r}")
    n_seq = inputs.shape[0]
    order = np.random.default_rng(seed).permutation(n_seq)
    train_idx, test_idx = order[: n_seq // 2], order[n_seq // 2 :]
    model = train_readout(
        feats[train_idx][scored[train_idx]], targets[train_idx][scored[train_idx]], ridge
    )
    pred = model.predict_bits(feats[test_idx][scored[test_idx]])
    truth = targets[test_idx][scored[test_idx]]
    correct = pred == truth
    per_output = correct.mean(axis=0)
    confusion = []
    for k in range(truth.shape[1]):
        t, p = truth[:, k].astype(bool), pred[:, k].astype(bool)
        confusion.append(
            {
                "tp": int(np.sum(t & p)),
                "fp": int(np.sum(~t & p)),
                "fn": int(np.sum(t & ~p)),
                "tn": int(np.sum(~t & ~p)),
            }
        )
    # sequence-level: every scored prediction in the trial correct
    seq_ok = []
    table_rows = []
    for idx in test_idx:
        mask = scored[idx]
        seq_pred = model.predict_bits(feats[idx][mask])
        seq_ok.append(bool((seq_pred == targets[idx][mask]).all()))
        if csv_path is not None:
            for step, pred_row, want_row in zip(
                np.flatnonzero(mask), seq_pred, targets[idx][mask]
            ):
                table_rows.append(
                    [int(idx), int(step), *map(int, want_row), *map(int, pred_row)]
                )
    if csv_path is not None:
        n_out = targets.shape[-1]
        header = (
            ["trial", "step"]
            + [f"target_{k}" for k in range(n_out)]
            + [f"prediction_{k}" for k in range(n_out)]
        )
        with open(csv_path, "w") as fh:
            fh.write(",".join(header) + "\n")
            for row in table_rows:
                fh.write(",".join(str(v) for v in row) + "\n")
    return {
        "task": task.kind,
        "feature_kind": feature_kind,
        "rule": cfg.rule.code,
        "seed": int(seed),
        "ridge": float(ridge),
        "feature_dim": int(feats.shape[-1]),
        "train_trials": [int(i) for i in train_idx],
        "test_trials": [int(i) for i in test_idx],
        "accuracy": float(correct.mean()),
        "per_output_accuracy": [float(a) for a in per_output],
        "confusion": confusion,
        "sequence_accuracy": float(np.mean(seq_ok)),
        "readout_residual": model.residual,
        "wall_time_s": time.perf_counter() - t0,
    }
