"""Per-frame stochastic gradient ascent with early stopping and grid search.

The training unit is one (window, label) pair; each visit takes one
ascent step on the frame log-likelihood. Runs are deterministic given
the seed: frame order, init, and update order are all pinned.
"""

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import DivergenceError
from .net import NetworkConfig, StageConfig, backward_pass, forward_pass, init_params, param_count, softmax


def logadd(values, axis=None):
    """log(sum(exp(values))), computed via max subtraction so it never overflows."""
    z = np.asarray(values, dtype=np.float64)
    if z.size == 0:
        raise ValueError("logadd of an empty vector")
    m = np.max(z, axis=axis, keepdims=axis is not None)
    out = m + np.log(np.sum(np.exp(z - m), axis=axis, keepdims=axis is not None))
    if axis is None:
        return float(out)
    return np.squeeze(out, axis=axis)


def frame_log_likelihood(scores, target):
    """Log-probability of `target` under the per-frame score softmax.

    Always <= 0; the gradient with respect to the scores is
    one_hot(target) - softmax(scores).
    """
    f = np.asarray(scores)
    if not 0 <= target < f.shape[0]:
        raise ValueError(f"target {target} out of range for {f.shape[0]} classes")
    return float(f[target]) - logadd(f)


def loglik_score_gradient(scores, target):
    """d frame_log_likelihood / d scores, in the scores' dtype."""
    g = -softmax(scores)
    g[target] += 1.0
    return g


def sgd_step(params, grads, lr):
    """One in-place ascent step: every tensor moves by +lr * gradient."""
    for name, tensor in params.named_tensors():
        g = grads[name]
        if not np.isfinite(g).all():
            raise DivergenceError(f"non-finite gradient for {name}")
        tensor += lr * g
    params.version += 1
    return params


@dataclass
class TrainConfig:
    learning_rate: float = 1e-4
    max_epochs: int = 30
    patience: int = 5
    seed: int = 0
    shuffle: bool = True

    def __post_init__(self):
        # lr 0 is legal: frozen-parameter runs are a documented baseline
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be >= 0")
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be >= 1")
        if self.patience < 1:
            raise ValueError("patience must be >= 1")


class FrameDataset:
    """Flat array of training frames: windows (N, T, d) and labels (N,)."""

    def __init__(self, windows, labels):
        windows = np.asarray(windows)
        labels = np.asarray(labels, dtype=np.int64)
        if windows.shape[0] != labels.shape[0]:
            raise ValueError("windows and labels disagree on frame count")
        if windows.shape[0] == 0:
            raise ValueError("dataset is empty")
        self.windows = windows
        self.labels = labels

    def __len__(self):
        return self.windows.shape[0]

    @classmethod
    def concatenate(cls, parts):
        parts = list(parts)
        return cls(
            np.concatenate([p.windows for p in parts]),
            np.concatenate([p.labels for p in parts]),
        )


def frame_accuracy_of(params, dataset):
    """Percent of dataset frames whose argmax score matches the label."""
    correct = 0
    for i in range(len(dataset)):
        scores, _ = forward_pass(dataset.windows[i], params)
        if int(np.argmax(scores)) == dataset.labels[i]:
            correct += 1
    return 100.0 * correct / len(dataset)


def train_network(train_set, cv_set, net_config, train_config, params=None):
    """Gradient-ascent training with patience-based early stopping.

    Visits training frames in a seeded-shuffled order, one sgd_step per
    frame, evaluates cross-validation frame accuracy after each epoch,
    and returns the parameters of the best epoch plus the history as a
    list of (epoch, mean train log-likelihood, cv accuracy) rows. The
    whole run is a deterministic function of (data, config, seed).
    """
    if len(train_set) == 0 or len(cv_set) == 0:
        raise ValueError("train and cv sets must be non-empty")
    k = net_config.num_classes
    if train_set.labels.max() >= k or cv_set.labels.max() >= k:
        raise ValueError("label index out of range for num_classes")
    if params is None:
        params = init_params(net_config, train_config.seed)
    rng = np.random.Generator(np.random.PCG64(train_config.seed))

    best = params.copy()
    best_acc = -1.0
    stale_epochs = 0
    history = []
    n = len(train_set)
    for epoch in range(1, train_config.max_epochs + 1):
        order = rng.permutation(n) if train_config.shuffle else np.arange(n)
        ll_sum = 0.0
        for step, i in enumerate(order):
            scores, cache = forward_pass(train_set.windows[i], params)
            ll = frame_log_likelihood(scores, int(train_set.labels[i]))
            if not np.isfinite(ll):
                raise DivergenceError(f"non-finite loss at epoch {epoch}, frame {step}")
            ll_sum += ll
            grads, _ = backward_pass(
                cache, params, loglik_score_gradient(scores, int(train_set.labels[i])),
                compute_input_grad=False,
            )
            try:
                sgd_step(params, grads, train_config.learning_rate)
            except DivergenceError as e:
                raise DivergenceError(f"epoch {epoch}, frame {step}: {e}") from e

        cv_acc = frame_accuracy_of(params, cv_set)
        history.append((epoch, ll_sum / n, cv_acc))
        if cv_acc > best_acc:
            best_acc = cv_acc
            best = params.copy()
            stale_epochs = 0
        else:
            stale_epochs += 1
            if stale_epochs >= train_config.patience:
                break
    return best, history


@dataclass
class GridSpec:
    """Candidate lists for the hyperparameter sweep.

    Defaults span the standard search ranges: window 100-700 ms, kernel
    width 1-9, 10-90 filters, 100-1500 hidden units. Stage one convolves
    non-overlapping (shift = kernel width) on raw input; later stages
    use shift 1.
    """

    window_ms: tuple = (100.0, 300.0, 500.0, 700.0)
    kernel_width: tuple = (1, 5, 9)
    num_filters: tuple = (10, 50, 90)
    hidden_units: tuple = (100, 800, 1500)
    pool_width: tuple = (3,)
    num_stages: int = 3

    def __post_init__(self):
        for name in ("window_ms", "kernel_width", "num_filters", "hidden_units", "pool_width"):
            if not getattr(self, name):
                raise ValueError(f"{name} candidates must be non-empty")

    def configs(self, sample_rate, input_dim, num_classes, first_shift=None):
        """Materialize the Cartesian product as NetworkConfig values."""
        out = []
        for window_ms, kw, filters, hidden, pool in itertools.product(
            self.window_ms, self.kernel_width, self.num_filters,
            self.hidden_units, self.pool_width,
        ):
            frames = int(round(window_ms * sample_rate / 1000.0)) if input_dim == 1 else int(window_ms)
            stages = []
            for s in range(self.num_stages):
                shift = (first_shift or kw) if s == 0 else 1
                stages.append(StageConfig(kw, shift, filters, pool))
            try:
                cfg = NetworkConfig(frames, input_dim, tuple(stages), hidden, num_classes)
            except ValueError:
                continue  # infeasible shape combination
            out.append(cfg)
        return out


def derive_seed(master_seed, ordinal):
    """Stable per-configuration seed so sweep results ignore scheduling."""
    ss = np.random.SeedSequence([int(master_seed), int(ordinal)])
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass
class GridResult:
    ordinal: int
    config: NetworkConfig
    seed: int
    cv_accuracy: float = float("nan")
    params: object = None
    error: str = ""

    @property
    def failed(self):
        return bool(self.error)


def grid_search(dataset_for_config, configs, train_config, max_configs=None):
    """Train every candidate config and rank by cv frame accuracy.

    `dataset_for_config(config)` must return (train_set, cv_set) framed
    for that config's window size. Ties break toward fewer parameters,
    then lower config ordinal. Per-config failures become failure
    records instead of aborting the sweep. `max_configs` subsamples the
    grid by seeded random choice.
    """
    if not configs:
        raise ValueError("empty grid")
    candidates = list(enumerate(configs))
    if max_configs is not None and max_configs < len(candidates):
        rng = np.random.Generator(np.random.PCG64(train_config.seed))
        keep = sorted(rng.choice(len(candidates), size=max_configs, replace=False))
        candidates = [candidates[i] for i in keep]

    results = []
    for ordinal, cfg in candidates:
        seed = derive_seed(train_config.seed, ordinal)
        run_cfg = TrainConfig(
            learning_rate=train_config.learning_rate,
            max_epochs=train_config.max_epochs,
            patience=train_config.patience,
            seed=seed,
            shuffle=train_config.shuffle,
        )
        res = GridResult(ordinal=ordinal, config=cfg, seed=seed)
        try:
            train_set, cv_set = dataset_for_config(cfg)
            res.params, history = train_network(train_set, cv_set, cfg, run_cfg)
            res.cv_accuracy = max(h[2] for h in history)
        except Exception as e:  # recorded, sweep continues
            res.error = f"{type(e).__name__}: {e}"
        results.append(res)

    def rank_key(r):
        acc = -1.0 if r.failed else r.cv_accuracy
        return (-acc, param_count(r.config), r.ordinal)

    results.sort(key=rank_key)
    return results


def history_csv_lines(history):
    """Training history rows as CSV text lines."""
    lines = ["epoch,train_log_likelihood,cv_frame_accuracy"]
    for epoch, ll, acc in history:
        lines.append(f"{epoch},{ll:.6f},{acc:.6f}")
    return lines
