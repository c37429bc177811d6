"""Federation orchestrators: centralized, BSP, BSP-max, FedAvg, FedProx.

All runners share one RNG discipline: every client-level training call
in round t gets an integer seed derived from (run seed, t, client), and
all order/sampling draws come from separate derived streams. Results
are therefore reproducible bit for bit and independent of how many
worker threads execute the per-client training.

Communication accounting counts whole-model transfers and converts them
to bytes with the serialized weight size:

    FedAvg/FedProx  2 * |S| per round (dispatch + collect)
    BSP             K + 1 per round (host to first client, K - 1 hops,
                    last client back to the host for evaluation)
    BSP-max         one hop after every batch, plus the host bookend
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dataset import MultilabelDataset
from .metrics import binarize, classification_accuracy, f1_score, simple_accuracy
from .models import (
    LearnerSpec,
    ModelWeights,
    ProximalConfig,
    forward,
    init_weights,
    serialize_weights,
)
from .partition import PartitionPlan
from .train import OptimizerState, local_train

ALGORITHMS = ("centralized", "bsp", "bsp_max", "fedavg", "fedprox")

# namespaces for derived seed streams
_CLIENT_STREAM = 0
_ORDER_STREAM = 1
_SAMPLE_STREAM = 2


@dataclass(frozen=True)
class FederationConfig:
    algorithm: str
    rounds: int
    n_clients: int = 1
    c_fraction: float = 1.0
    local_epochs: int = 1
    batch_size: int = 32
    mu: float = 0.01
    learning_rate: float = 0.001
    momentum: float = 0.9
    seed: int = 0

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if self.rounds < 1 or self.n_clients < 1:
            raise ValueError("rounds and n_clients must be >= 1")
        if not 0.0 < self.c_fraction <= 1.0:
            raise ValueError("c_fraction must be in (0, 1]")
        if self.local_epochs < 1 or self.batch_size < 1:
            raise ValueError("local_epochs and batch_size must be >= 1")
        if self.mu < 0 or self.seed < 0:
            raise ValueError("mu and seed must be >= 0")


@dataclass
class CommLedger:
    transfers: int = 0
    bytes: int = 0
    per_round: list[int] = field(default_factory=list)

    def add_round(self, transfers: int, nbytes: int) -> None:
        self.transfers += transfers
        self.bytes += nbytes
        self.per_round.append(nbytes)


@dataclass(frozen=True)
class RoundRecord:
    round: int
    f1: float
    accuracy: float
    classification_accuracy: float
    cumulative_bytes: int
    wall_seconds: float


def derive_seed(seed: int, stream: int, *key: int) -> int:
    """Integer seed for an independent child stream of the run seed."""
    ss = np.random.SeedSequence(seed, spawn_key=(stream, *key))
    return int(ss.generate_state(1)[0])


def client_seed(seed: int, round_t: int, client: int) -> int:
    """Seed for client `client`'s local training in round `round_t`."""
    return derive_seed(seed, _CLIENT_STREAM, round_t, client)


def sample_clients(k: int, c_fraction: float, round_t: int, seed: int) -> np.ndarray:
    """Choose max(1, round(C*K)) distinct clients, ascending, per (seed, t)."""
    if not 0.0 < c_fraction <= 1.0:
        raise ValueError("c_fraction must be in (0, 1]")
    size = max(1, int(np.floor(c_fraction * k + 0.5)))
    if size >= k:
        return np.arange(k)
    rng = np.random.default_rng(
        np.random.SeedSequence(seed, spawn_key=(_SAMPLE_STREAM, round_t))
    )
    return np.sort(rng.choice(k, size=size, replace=False))


def fedavg_aggregate(updates: list[tuple[int, ModelWeights]]) -> ModelWeights:
    """Shard-size weighted average of client weights.

    Weights are n_k / sum(n_k) over the participating set; summation
    follows the given (ascending client) order for determinism.
    """
    if not updates:
        raise ValueError("no updates to aggregate")
    if len(updates) == 1:
        n0, w0 = updates[0]
        if n0 <= 0:
            raise ValueError("shard sizes must be positive")
        return w0
    length = updates[0][1].n_params
    total = 0
    for n_k, w_k in updates:
        if n_k <= 0:
            raise ValueError("shard sizes must be positive")
        if w_k.n_params != length:
            raise ValueError("weight vectors differ in length")
        total += n_k
    acc = np.zeros(length)
    for n_k, w_k in updates:
        acc += (n_k / total) * w_k.values
    return ModelWeights(acc, updates[0][1].layout)


def evaluate(
    spec: LearnerSpec,
    w: ModelWeights,
    eval_set: MultilabelDataset,
    threshold: float = 0.5,
    chunk: int = 512,
) -> tuple[float, float, float]:
    """(f1, jaccard accuracy, exact-match accuracy) on a held-out set."""
    preds = []
    for start in range(0, len(eval_set), chunk):
        probs = forward(spec, w, eval_set.images[start : start + chunk])
        preds.append(binarize(probs, threshold))
    z = np.concatenate(preds)
    y = eval_set.labels
    return f1_score(z, y), simple_accuracy(z, y), classification_accuracy(z, y)


def _shards(train: MultilabelDataset, plan: PartitionPlan):
    return [(train.images[idx], train.labels[idx]) for idx in plan.assignment]


def run_fedavg(
    cfg: FederationConfig,
    train: MultilabelDataset,
    plan: PartitionPlan,
    spec: LearnerSpec,
    eval_set: MultilabelDataset,
    workers: int = 1,
):
    """FedAvg / FedProx rounds: sample, dispatch, locally train, average.

    Per-round communication is 2 * |S| model transfers (down and up).
    """
    if cfg.algorithm not in ("fedavg", "fedprox"):
        raise ValueError(f"run_fedavg cannot run {cfg.algorithm!r}")
    if plan.n_clients != cfg.n_clients:
        raise ValueError("plan does not match cfg.n_clients")
    w = init_weights(spec, cfg.seed)
    mbytes = len(serialize_weights(w))
    shards = _shards(train, plan)
    opt = OptimizerState(cfg.learning_rate, cfg.momentum)
    history: list[RoundRecord] = []
    ledger = CommLedger()

    def train_one(k: int, anchor: ModelWeights):
        images, labels = shards[k]
        if len(images) == 0:
            raise ValueError(f"client {k} was sampled but holds no data")
        prox = ProximalConfig(cfg.mu, anchor) if cfg.algorithm == "fedprox" else None
        w_k, _ = local_train(
            spec, anchor, images, labels, cfg.local_epochs, cfg.batch_size,
            opt, prox, client_seed(cfg.seed, t, k),
        )
        return len(images), w_k

    for t in range(cfg.rounds):
        tic = time.perf_counter()
        selected = sample_clients(cfg.n_clients, cfg.c_fraction, t, cfg.seed)
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                updates = list(pool.map(lambda k: train_one(k, w), selected))
        else:
            updates = [train_one(k, w) for k in selected]
        w = fedavg_aggregate(updates)
        ledger.add_round(2 * len(selected), 2 * len(selected) * mbytes)
        f1, acc, cls = evaluate(spec, w, eval_set)
        history.append(
            RoundRecord(t, f1, acc, cls, ledger.bytes, time.perf_counter() - tic)
        )
    return w, history, ledger


def _run_chain(cfg, train, plan, spec, eval_set, per_batch_transfers: bool):
    if plan.n_clients != cfg.n_clients:
        raise ValueError("plan does not match cfg.n_clients")
    w = init_weights(spec, cfg.seed)
    mbytes = len(serialize_weights(w))
    shards = _shards(train, plan)
    opt = OptimizerState(cfg.learning_rate, cfg.momentum)
    history: list[RoundRecord] = []
    ledger = CommLedger()
    for t in range(cfg.rounds):
        tic = time.perf_counter()
        order_rng = np.random.default_rng(
            np.random.SeedSequence(cfg.seed, spawn_key=(_ORDER_STREAM, t))
        )
        order = order_rng.permutation(cfg.n_clients)
        total_batches = 0
        for k in order:
            images, labels = shards[k]
            if len(images) == 0:
                raise ValueError(f"client {k} holds no data")
            # the sequential variants always run a single local epoch
            w, batches = local_train(
                spec, w, images, labels, 1, cfg.batch_size,
                opt, None, client_seed(cfg.seed, t, int(k)),
            )
            total_batches += batches
        transfers = total_batches + 1 if per_batch_transfers else cfg.n_clients + 1
        ledger.add_round(transfers, transfers * mbytes)
        f1, acc, cls = evaluate(spec, w, eval_set)
        history.append(
            RoundRecord(t, f1, acc, cls, ledger.bytes, time.perf_counter() - tic)
        )
    return w, history, ledger


def run_bsp(cfg, train, plan, spec, eval_set):
    """Sequential model passing: each round visits every client once."""
    if cfg.algorithm != "bsp":
        raise ValueError(f"run_bsp cannot run {cfg.algorithm!r}")
    return _run_chain(cfg, train, plan, spec, eval_set, per_batch_transfers=False)


def run_bsp_max(cfg, train, plan, spec, eval_set):
    """BSP with a model hand-off after every training batch.

    The weight trajectory is identical to run_bsp under the same seed;
    only the communication ledger differs.
    """
    if cfg.algorithm != "bsp_max":
        raise ValueError(f"run_bsp_max cannot run {cfg.algorithm!r}")
    return _run_chain(cfg, train, plan, spec, eval_set, per_batch_transfers=True)


def run_centralized(cfg, train: MultilabelDataset, spec, eval_set):
    """Plain SGD over the whole training set, one epoch per round."""
    if cfg.algorithm != "centralized":
        raise ValueError(f"run_centralized cannot run {cfg.algorithm!r}")
    if len(train) == 0:
        raise ValueError("training set is empty")
    w = init_weights(spec, cfg.seed)
    opt = OptimizerState(cfg.learning_rate, cfg.momentum)
    history: list[RoundRecord] = []
    ledger = CommLedger()
    for t in range(cfg.rounds):
        tic = time.perf_counter()
        w, _ = local_train(
            spec, w, train.images, train.labels, 1, cfg.batch_size,
            opt, None, client_seed(cfg.seed, t, 0),
        )
        ledger.add_round(0, 0)
        f1, acc, cls = evaluate(spec, w, eval_set)
        history.append(
            RoundRecord(t, f1, acc, cls, ledger.bytes, time.perf_counter() - tic)
        )
    return w, history, ledger
