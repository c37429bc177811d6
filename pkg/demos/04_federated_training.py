#!/usr/bin/env python3
"""Train the same model under four orchestration strategies.

Centralized is the upper-bound baseline; BSP passes one model from
client to client; FedAvg averages sampled clients each round; FedProx
adds a proximal pull toward the global model. The communication ledger
counts every whole-model transfer in bytes.
"""

from fedsim import (
    FederationConfig,
    LearnerSpec,
    SkewConfig,
    augment_double,
    label_stats,
    make_partition,
    run_bsp,
    run_centralized,
    run_fedavg,
    train_val_split,
    ucm_like,
)

ds = ucm_like(n=400, shape=(16, 16, 3), seed=0)
aug = augment_double(ds, seed=0)
train, val = train_val_split(aug, 0.2, seed=0)
plan = make_partition(train, label_stats(train), SkewConfig(4, 40, True, seed=0))
spec = LearnerSpec("mlp", (16, 16, 3), 16)
rounds = 20

runs = {}
base = dict(rounds=rounds, n_clients=4, c_fraction=0.75, local_epochs=2, batch_size=8, seed=0)
runs["centralized"] = run_centralized(
    FederationConfig("centralized", rounds=rounds, batch_size=8, seed=0), train, spec, val
)
runs["bsp"] = run_bsp(FederationConfig("bsp", **base), train, plan, spec, val)
runs["fedavg"] = run_fedavg(FederationConfig("fedavg", **base), train, plan, spec, val)
runs["fedprox"] = run_fedavg(
    FederationConfig("fedprox", mu=0.01, **base), train, plan, spec, val
)

print(f"{'round':>5} " + "".join(f"{name:>13}" for name in runs))
for t in range(0, rounds, 4):
    row = "".join(f"{runs[name][1][t].f1:13.3f}" for name in runs)
    print(f"{t:>5} {row}")
final = "".join(f"{runs[name][1][-1].f1:13.3f}" for name in runs)
print(f"{'final':>5} {final}")

print("\ncommunication totals:")
for name, (_, _, ledger) in runs.items():
    print(f"  {name:12s} {ledger.transfers:5d} transfers, {ledger.bytes / 1024:10.1f} KiB")
