"""fedsim: deterministic federated-learning simulation on multilabel images.

The package simulates a host and K clients holding label-skewed shards
of a multilabel image dataset, trains small from-scratch learners with
SGD + momentum, and accounts every model transfer in bytes. Four
orchestration strategies are provided (BSP, BSP-max, FedAvg, FedProx)
next to a centralized baseline, with example-based multilabel metrics
recorded per round.
"""

from .augment import Corruption, CorruptionKind, augment_double, corrupt, maybe_hflip
from .dataset import (
    LabelStats,
    MultilabelDataset,
    Sample,
    label_stats,
    split_common_labels,
    train_val_split,
)
from .experiment import (
    ExperimentRow,
    RunFailure,
    RunOutput,
    load_rows,
    read_run_csv,
    run_experiment,
    run_sweep,
    write_run_csv,
    write_summary_csv,
)
from .federation import (
    CommLedger,
    FederationConfig,
    RoundRecord,
    evaluate,
    fedavg_aggregate,
    run_bsp,
    run_bsp_max,
    run_centralized,
    run_fedavg,
    sample_clients,
)
from .metrics import (
    PredictionSet,
    binarize,
    classification_accuracy,
    f1_score,
    simple_accuracy,
)
from .models import (
    LearnerSpec,
    ModelWeights,
    ProximalConfig,
    deserialize_weights,
    forward,
    init_weights,
    loss_and_grad,
    model_nbytes,
    serialize_weights,
)
from .partition import PartitionPlan, SkewConfig, make_partition, skew_report
from .ppm import load_dataset, read_ppm, save_dataset, write_ppm
from .synthetic import generate_synthetic, ucm_like
from .train import OptimizerState, local_train

__version__ = "0.1.0"
