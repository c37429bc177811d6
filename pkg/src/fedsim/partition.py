"""Deterministic label-skew partitioning of a dataset across K clients.

The skew model: the min(K, pool) least frequent labels of the chosen
pool (common or less-common, per the config) become monopoly labels,
one per client in ascending frequency order. A fixed share s% of each
monopoly label's candidate samples is pinned to its client; everything
else is dealt evenly.

Determinism layout: all random draws depend only on (dataset, K, seed),
never on s. Pinned sets are prefixes of per-label permutations, so
raising s only ever grows them, and the even deal moves only samples
that carry no monopoly label. Together this makes a monopoly client's
count of its own label nondecreasing in s whenever no sample carries
two monopoly labels.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import LabelStats, MultilabelDataset, split_common_labels

COMMON_LABEL_THRESHOLD = 0.10


@dataclass(frozen=True)
class SkewConfig:
    n_clients: int
    skew_pct: float
    small_skew: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.n_clients < 1:
            raise ValueError("n_clients must be >= 1")
        if not 0.0 <= self.skew_pct <= 100.0:
            raise ValueError(f"skew_pct must be in [0, 100], got {self.skew_pct}")


@dataclass(frozen=True)
class PartitionPlan:
    """Disjoint client->sample-index assignment plus the monopoly map."""

    assignment: tuple[np.ndarray, ...]
    monopoly: dict[int, int]
    config: SkewConfig

    @property
    def n_clients(self) -> int:
        return len(self.assignment)

    def client_sizes(self) -> np.ndarray:
        return np.array([len(a) for a in self.assignment])


def _validate(assignment, n, k):
    union = np.concatenate(assignment) if assignment else np.array([], dtype=np.int64)
    if len(union) != n or len(np.unique(union)) != n:
        raise AssertionError("partition is not disjoint and exhaustive")
    if n >= k and any(len(a) == 0 for a in assignment):
        raise AssertionError("empty client despite n >= K")


def make_partition(
    ds: MultilabelDataset, stats: LabelStats, cfg: SkewConfig
) -> PartitionPlan:
    """Assign every sample index to exactly one of K clients."""
    n = len(ds)
    k = cfg.n_clients
    if k > n:
        raise ValueError(f"cannot split {n} samples over {k} clients")

    rng = np.random.default_rng(cfg.seed)
    perm = rng.permutation(n)
    # base deal: sample perm[j] belongs to slot j % K
    client_of = np.empty(n, dtype=np.int64)
    client_of[perm] = np.arange(n) % k
    # priority[i]: position of sample i in the permutation, used wherever
    # a deterministic tie-break over samples is needed
    priority = np.empty(n, dtype=np.int64)
    priority[perm] = np.arange(n)

    monopoly: dict[int, int] = {}
    pinned_mask = np.zeros(n, dtype=bool)
    has_monopoly_label = np.zeros(n, dtype=bool)

    if cfg.skew_pct > 0.0:
        common, less_common = split_common_labels(stats, n, COMMON_LABEL_THRESHOLD)
        pool = less_common if cfg.small_skew else common
        if pool.size == 0:
            raise ValueError(
                "skew_pct > 0 but the chosen label pool is empty "
                f"(small_skew={cfg.small_skew})"
            )
        order = sorted(pool.tolist(), key=lambda l: (stats.counts[l], l))
        chosen = order[: min(k, len(order))]
        monopoly = {j: l for j, l in enumerate(chosen)}

        cand_bits = ds.labels[:, chosen].astype(bool)
        has_monopoly_label = cand_bits.any(axis=1)
        first_match = cand_bits.argmax(axis=1)
        for j in range(len(chosen)):
            members = np.flatnonzero(has_monopoly_label & (first_match == j))
            member_perm = rng.permutation(members)
            n_pin = int(np.floor(cfg.skew_pct / 100.0 * len(members)))
            pinned = member_perm[:n_pin]
            client_of[pinned] = j
            pinned_mask[pinned] = True

    _rebalance(client_of, pinned_mask, has_monopoly_label, priority, k)

    assignment = tuple(
        np.flatnonzero(client_of == j).astype(np.int64) for j in range(k)
    )
    _validate(assignment, n, k)
    return PartitionPlan(assignment=assignment, monopoly=monopoly, config=cfg)


def _rebalance(client_of, pinned_mask, has_monopoly_label, priority, k):
    """Even out client sizes by relocating label-neutral samples.

    Only samples with no monopoly label move, so per-client monopoly
    label counts are untouched. If a client would still end up empty
    (possible only when pinning swallows nearly everything), one
    sample is relocated regardless.
    """
    n = len(client_of)
    base, extra = divmod(n, k)
    targets = np.array([base + (1 if j < extra else 0) for j in range(k)])

    sizes = np.bincount(client_of, minlength=k)
    movable = ~pinned_mask & ~has_monopoly_label
    # lowest-priority movable samples leave first; stable across s
    for j in range(k):
        surplus = sizes[j] - targets[j]
        if surplus <= 0:
            continue
        pool = np.flatnonzero(movable & (client_of == j))
        pool = pool[np.argsort(priority[pool])][::-1][:surplus]
        for idx in pool:
            under = np.flatnonzero(sizes < targets)
            if under.size == 0:
                break
            dest = under[0]
            client_of[idx] = dest
            sizes[j] -= 1
            sizes[dest] += 1
            if sizes[j] <= targets[j]:
                break

    # emergency repair: no client may stay empty while n >= K
    while (sizes == 0).any() and n >= k:
        dest = int(np.flatnonzero(sizes == 0)[0])
        donor = int(np.argmax(sizes))
        donor_members = np.flatnonzero(client_of == donor)
        unpinned = donor_members[~pinned_mask[donor_members]]
        pick_from = unpinned if unpinned.size else donor_members
        idx = pick_from[np.argmax(priority[pick_from])]
        client_of[idx] = dest
        sizes[donor] -= 1
        sizes[dest] += 1


def skew_report(plan: PartitionPlan, ds: MultilabelDataset) -> np.ndarray:
    """Per-client per-label sample counts, shape (K, L).

    Summing over clients reproduces the dataset-level label counts.
    """
    n = len(ds)
    counts = np.zeros((plan.n_clients, ds.n_labels), dtype=np.int64)
    for j, indices in enumerate(plan.assignment):
        if indices.size and (indices.min() < 0 or indices.max() >= n):
            raise IndexError(f"client {j} references samples outside the dataset")
        counts[j] = ds.labels[indices].sum(axis=0)
    return counts
