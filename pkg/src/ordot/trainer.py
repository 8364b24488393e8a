"""Desk-scale training harness.

A one-hidden-layer MLP with manual backprop stands in for a full vision
backbone: the losses under study act on the softmax layer, which the MLP
exercises completely.  Data is synthetic: features with an ordinal label
obtained by quantile-thresholding a latent score, then corrupted by
inlier noise (label slips to an adjacent class) and outlier noise (label
resamples uniformly).  Training fits the noisy labels; validation scores
against the clean ones, which is what makes the noise-robustness of a
loss visible.

Everything is deterministic given the seeds: fixed initialization, fixed
shuffle order, single-threaded evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError, ShapeError, TrainingDiverged
from .losses import LossSpec, _softmax_rows, batch_loss_and_grad
from .metrics import EvalReport, evaluate_probs

_ACTIVATIONS = ("relu", "tanh")


@dataclass(frozen=True)
class SyntheticOrdinalConfig:
    """Synthetic ordinal dataset: sizes, noise rates and seed."""

    n_samples: int
    input_dim: int
    n_classes: int
    noise_inlier: float = 0.0
    noise_outlier: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.n_samples < 1:
            raise ConfigError(f"n_samples must be >= 1, got {self.n_samples}")
        if self.input_dim < 1:
            raise ConfigError(f"input_dim must be >= 1, got {self.input_dim}")
        if self.n_classes < 2:
            raise ConfigError(f"n_classes must be >= 2, got {self.n_classes}")
        for name in ("noise_inlier", "noise_outlier"):
            rate = getattr(self, name)
            if not 0.0 <= rate <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1], got {rate}")
        if self.noise_inlier + self.noise_outlier > 1.0:
            raise ConfigError("noise_inlier + noise_outlier must not exceed 1")


@dataclass(frozen=True, eq=False)
class OrdinalDataset:
    """Features plus clean and noise-corrupted labels."""

    features: np.ndarray
    clean_labels: np.ndarray
    noisy_labels: np.ndarray
    latent: np.ndarray
    n_classes: int


def generate_synthetic(cfg: SyntheticOrdinalConfig) -> OrdinalDataset:
    """Draw a seeded synthetic ordinal dataset.

    Clean labels are equal-frequency quantile bins of a latent linear
    score of the features (monotone by construction).  Inlier noise moves
    a label one class up or down (clipped at the ends); outlier noise
    replaces it with a uniformly random class.
    """
    rng = np.random.default_rng(cfg.seed)
    X = rng.standard_normal((cfg.n_samples, cfg.input_dim))
    w = rng.standard_normal(cfg.input_dim)
    w /= np.linalg.norm(w)
    latent = X @ w
    qs = np.quantile(latent, [k / cfg.n_classes for k in range(1, cfg.n_classes)])
    clean = np.searchsorted(qs, latent, side="right").astype(np.int64)

    # draw all noise variates unconditionally so the stream is fixed
    u = rng.random(cfg.n_samples)
    shifts = rng.integers(0, 2, cfg.n_samples) * 2 - 1
    resample = rng.integers(0, cfg.n_classes, cfg.n_samples)
    noisy = clean.copy()
    inlier = u < cfg.noise_inlier
    outlier = (u >= cfg.noise_inlier) & (u < cfg.noise_inlier + cfg.noise_outlier)
    noisy[inlier] = np.clip(clean[inlier] + shifts[inlier], 0, cfg.n_classes - 1)
    noisy[outlier] = resample[outlier]
    return OrdinalDataset(
        features=X,
        clean_labels=clean,
        noisy_labels=noisy,
        latent=latent,
        n_classes=cfg.n_classes,
    )


class MlpModel:
    """One-hidden-layer perceptron with manual forward/backward passes."""

    def __init__(self, input_dim: int, hidden_dim: int, n_classes: int,
                 activation: str = "relu", seed: int = 0):
        if activation not in _ACTIVATIONS:
            raise ConfigError(f"activation must be one of {_ACTIVATIONS}, got {activation!r}")
        if min(input_dim, hidden_dim) < 1 or n_classes < 2:
            raise ConfigError("model dimensions must be positive, n_classes >= 2")
        rng = np.random.default_rng(seed)
        gain = 2.0 if activation == "relu" else 1.0
        self.input_dim = input_dim
        self.hidden_dim = hidden_dim
        self.n_classes = n_classes
        self.activation = activation
        self.W1 = rng.normal(0.0, np.sqrt(gain / input_dim), (input_dim, hidden_dim))
        self.b1 = np.zeros(hidden_dim)
        self.W2 = rng.normal(0.0, np.sqrt(1.0 / hidden_dim), (hidden_dim, n_classes))
        self.b2 = np.zeros(n_classes)

    def params(self) -> dict[str, np.ndarray]:
        return {"W1": self.W1, "b1": self.b1, "W2": self.W2, "b2": self.b2}

    def forward(self, X: np.ndarray):
        pre = X @ self.W1 + self.b1
        if self.activation == "relu":
            hidden = np.maximum(pre, 0.0)
        else:
            hidden = np.tanh(pre)
        logits = hidden @ self.W2 + self.b2
        return logits, (X, pre, hidden)

    def backward(self, cache, dlogits: np.ndarray) -> dict[str, np.ndarray]:
        X, pre, hidden = cache
        dW2 = hidden.T @ dlogits
        db2 = dlogits.sum(axis=0)
        dhidden = dlogits @ self.W2.T
        if self.activation == "relu":
            dpre = dhidden * (pre > 0.0)
        else:
            dpre = dhidden * (1.0 - np.tanh(pre) ** 2)
        dW1 = X.T @ dpre
        db1 = dpre.sum(axis=0)
        return {"W1": dW1, "b1": db1, "W2": dW2, "b2": db2}

    def predict_logits(self, X: np.ndarray) -> np.ndarray:
        return self.forward(X)[0]

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return _softmax_rows(self.predict_logits(X))


@dataclass(frozen=True)
class TrainConfig:
    """One training run: loss choice plus optimization hyperparameters."""

    loss: LossSpec
    epochs: int = 100
    batch_size: int = 128
    learning_rate: float = 1e-3
    weight_decay: float = 1e-4
    plateau_patience: int = 10
    plateau_factor: float = 0.5
    hidden_dim: int = 64
    activation: str = "relu"
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 0:
            raise ConfigError(f"epochs must be >= 0, got {self.epochs}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.learning_rate <= 0:
            raise ConfigError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.weight_decay < 0:
            raise ConfigError(f"weight_decay must be >= 0, got {self.weight_decay}")
        if self.plateau_patience < 1:
            raise ConfigError(f"plateau_patience must be >= 1, got {self.plateau_patience}")
        if not 0.0 < self.plateau_factor <= 1.0:
            raise ConfigError(f"plateau_factor must lie in (0, 1], got {self.plateau_factor}")
        if self.activation not in _ACTIVATIONS:
            raise ConfigError(f"activation must be one of {_ACTIVATIONS}")


@dataclass(frozen=True, eq=False)
class TrainValData:
    """Training pairs and the held-out validation pairs."""

    train_x: np.ndarray
    train_y: np.ndarray
    val_x: np.ndarray
    val_y: np.ndarray


@dataclass(frozen=True, eq=False)
class EpochRecord:
    epoch: int
    train_loss: float
    learning_rate: float
    report: EvalReport


@dataclass(frozen=True, eq=False)
class TrainResult:
    model: MlpModel
    history: tuple[EpochRecord, ...]


class _Adam:
    """Adam with coupled L2 weight decay."""

    def __init__(self, params: dict[str, np.ndarray], weight_decay: float,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.weight_decay = weight_decay
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray], lr: float):
        self.t += 1
        b1c = 1.0 - self.beta1**self.t
        b2c = 1.0 - self.beta2**self.t
        for k, p in params.items():
            g = grads[k] + self.weight_decay * p
            self.m[k] = self.beta1 * self.m[k] + (1.0 - self.beta1) * g
            self.v[k] = self.beta2 * self.v[k] + (1.0 - self.beta2) * g**2
            p -= lr * (self.m[k] / b1c) / (np.sqrt(self.v[k] / b2c) + self.eps)


def train(model: MlpModel, data: TrainValData, cfg: TrainConfig) -> TrainResult:
    """Minibatch training with a QWK-plateau learning-rate schedule.

    The learning rate halves (``plateau_factor``) whenever validation QWK
    has not improved for ``plateau_patience`` epochs.  Raises
    TrainingDiverged on a non-finite loss.
    """
    if data.train_x.shape[0] != data.train_y.shape[0]:
        raise ShapeError("training features and labels disagree in length")
    if data.train_x.shape[1] != model.input_dim:
        raise ShapeError(
            f"features have {data.train_x.shape[1]} dims, model expects {model.input_dim}"
        )
    rng = np.random.default_rng([cfg.seed, 1])
    opt = _Adam(model.params(), cfg.weight_decay)
    lr = cfg.learning_rate
    best_qwk = -np.inf
    stale = 0
    n_train = data.train_x.shape[0]
    history: list[EpochRecord] = []
    for epoch in range(cfg.epochs):
        perm = rng.permutation(n_train)
        batch_losses = []
        for start in range(0, n_train, cfg.batch_size):
            sel = perm[start:start + cfg.batch_size]
            logits, cache = model.forward(data.train_x[sel])
            value, dlogits = batch_loss_and_grad(logits, data.train_y[sel], cfg.loss)
            if not np.isfinite(value):
                raise TrainingDiverged(epoch)
            grads = model.backward(cache, dlogits)
            opt.step(model.params(), grads, lr)
            batch_losses.append(value)
        report = evaluate_probs(model.predict_proba(data.val_x), data.val_y)
        history.append(EpochRecord(epoch, float(np.mean(batch_losses)), lr, report))
        if report.qwk > best_qwk:
            best_qwk = report.qwk
            stale = 0
        else:
            stale += 1
            if stale >= cfg.plateau_patience:
                lr *= cfg.plateau_factor
                stale = 0
    return TrainResult(model=model, history=tuple(history))


@dataclass(frozen=True)
class ExperimentConfig:
    """A comparison experiment: one dataset recipe, several loss rows."""

    data: SyntheticOrdinalConfig
    n_val: int
    runs: tuple[tuple[str, TrainConfig], ...]
    seeds: tuple[int, ...]
    output_dir: str = "out"

    def __post_init__(self):
        if not 1 <= self.n_val < self.data.n_samples:
            raise ConfigError(
                f"n_val must lie in [1, {self.data.n_samples}), got {self.n_val}"
            )
        if not self.runs:
            raise ConfigError("need at least one run")
        if not self.seeds:
            raise ConfigError("need at least one seed")


@dataclass(frozen=True, eq=False)
class RunOutcome:
    name: str
    seed: int
    history: tuple[EpochRecord, ...]
    final: EvalReport


@dataclass(frozen=True, eq=False)
class ComparisonRow:
    name: str
    mean_accuracy: float
    mean_mae: float
    mean_qwk: float
    mean_tnr: float
    outcomes: tuple[RunOutcome, ...]


@dataclass(frozen=True, eq=False)
class ComparisonResult:
    rows: tuple[ComparisonRow, ...]


def run_comparison(experiment: ExperimentConfig) -> ComparisonResult:
    """Train every configured loss over every seed and average the metrics.

    All rows share the dataset and the model initialization of each seed,
    so the loss choice is the only varying factor.  Models fit the noisy
    labels; reports score against the clean validation labels.
    """
    per_run: dict[str, list[RunOutcome]] = {name: [] for name, _ in experiment.runs}
    n_train = experiment.data.n_samples - experiment.n_val
    for seed in experiment.seeds:
        ds = generate_synthetic(replace(experiment.data, seed=seed))
        data = TrainValData(
            train_x=ds.features[:n_train],
            train_y=ds.noisy_labels[:n_train],
            val_x=ds.features[n_train:],
            val_y=ds.clean_labels[n_train:],
        )
        for name, tcfg in experiment.runs:
            tcfg = replace(tcfg, seed=seed)
            model = MlpModel(
                input_dim=experiment.data.input_dim,
                hidden_dim=tcfg.hidden_dim,
                n_classes=experiment.data.n_classes,
                activation=tcfg.activation,
                seed=seed,
            )
            result = train(model, data, tcfg)
            if result.history:
                final = result.history[-1].report
            else:
                final = evaluate_probs(model.predict_proba(data.val_x), data.val_y)
            per_run[name].append(RunOutcome(name, seed, result.history, final))
    rows = []
    for name, _ in experiment.runs:
        outs = per_run[name]
        rows.append(
            ComparisonRow(
                name=name,
                mean_accuracy=float(np.mean([o.final.accuracy for o in outs])),
                mean_mae=float(np.mean([o.final.mae for o in outs])),
                mean_qwk=float(np.mean([o.final.qwk for o in outs])),
                mean_tnr=float(np.mean([o.final.mean_tnr for o in outs])),
                outcomes=tuple(outs),
            )
        )
    return ComparisonResult(rows=tuple(rows))


def comparison_to_csv(result: ComparisonResult) -> str:
    """Comparison table as CSV with full-precision means."""
    lines = ["name,accuracy,mae,qwk,mean_tnr"]
    for row in result.rows:
        lines.append(
            f"{row.name},{row.mean_accuracy!r},{row.mean_mae!r},"
            f"{row.mean_qwk!r},{row.mean_tnr!r}"
        )
    return "\n".join(lines) + "\n"


def comparison_to_text(result: ComparisonResult) -> str:
    """Comparison table as aligned plain text (4 decimals)."""
    name_w = max(len("name"), *(len(r.name) for r in result.rows))
    header = f"{'name':<{name_w}}  {'acc':>8}  {'mae':>8}  {'qwk':>8}  {'mean_tnr':>8}"
    lines = [header, "-" * len(header)]
    for r in result.rows:
        lines.append(
            f"{r.name:<{name_w}}  {r.mean_accuracy:>8.4f}  {r.mean_mae:>8.4f}  "
            f"{r.mean_qwk:>8.4f}  {r.mean_tnr:>8.4f}"
        )
    return "\n".join(lines) + "\n"
