"""Linear-chain CRF over network emission scores.

Emissions are raw pre-softmax scores; the softmax lives over whole label
paths. A path's score is the sum of its per-frame emissions plus a
transition score A[i, j] for each move from label j to label i; the t=1
frame contributes no transition term (no start-state vector). All
dynamic programs run in log space, float64.

Viterbi and path_score accumulate in the same order, so the decoded
path's reported score equals the exhaustive-enumeration maximum exactly,
not merely within rounding.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DivergenceError
from .training import logadd


def _check(emissions, transitions):
    e = np.asarray(emissions, dtype=np.float64)
    a = np.asarray(transitions, dtype=np.float64)
    if e.ndim != 2 or e.shape[0] < 1:
        raise ValueError("emissions must be a T x K matrix with T >= 1")
    k = e.shape[1]
    if a.shape != (k, k):
        raise ValueError(f"transition matrix must be {k} x {k}, got {a.shape}")
    return e, a


def path_score(emissions, transitions, path):
    """Score of one label path: emissions plus transition terms from t=2 on."""
    e, a = _check(emissions, transitions)
    y = np.asarray(path, dtype=np.int64)
    if y.shape != (e.shape[0],):
        raise ValueError(f"path length {y.shape} != sequence length {e.shape[0]}")
    if y.min() < 0 or y.max() >= e.shape[1]:
        raise ValueError("path label out of range")
    s = e[0, y[0]]
    for t in range(1, len(y)):
        s = s + a[y[t], y[t - 1]]
        s = s + e[t, y[t]]
    return float(s)


def log_partition(emissions, transitions):
    """logadd of path_score over all K^T paths, by the forward recursion."""
    e, a = _check(emissions, transitions)
    alpha = e[0].copy()
    for t in range(1, e.shape[0]):
        alpha = e[t] + logadd(alpha[None, :] + a, axis=1)
    return logadd(alpha)


def crf_log_likelihood(emissions, transitions, path):
    """Log conditional probability of `path` under the path softmax; <= 0."""
    return path_score(emissions, transitions, path) - log_partition(emissions, transitions)


def viterbi(emissions, transitions):
    """Highest-scoring label path and its score.

    Ties break toward the smaller label index at the latest differing
    position (first-occurrence argmax in the backtrace).
    """
    e, a = _check(emissions, transitions)
    t_len, k = e.shape
    back = np.zeros((t_len, k), dtype=np.int64)
    alpha = e[0].copy()
    for t in range(1, t_len):
        cand = alpha[None, :] + a  # cand[i, j]: arrive at i from j
        back[t] = np.argmax(cand, axis=1)
        alpha = cand[np.arange(k), back[t]] + e[t]
    path = np.zeros(t_len, dtype=np.int64)
    path[-1] = int(np.argmax(alpha))
    for t in range(t_len - 1, 0, -1):
        path[t - 1] = back[t, path[t]]
    return path, float(alpha[path[-1]])


def forward_backward(emissions, transitions):
    """Exact posteriors under the path softmax.

    Returns (node, pairwise): node is T x K with rows summing to 1;
    pairwise is (T-1) x K x K where pairwise[t-1][i, j] is the posterior
    probability of label j at t-1 followed by label i at t.
    """
    e, a = _check(emissions, transitions)
    t_len, k = e.shape
    log_alpha = np.zeros((t_len, k))
    log_alpha[0] = e[0]
    for t in range(1, t_len):
        log_alpha[t] = e[t] + logadd(log_alpha[t - 1][None, :] + a, axis=1)
    log_beta = np.zeros((t_len, k))
    for t in range(t_len - 2, -1, -1):
        log_beta[t] = logadd(log_beta[t + 1][:, None] + a + e[t + 1][:, None], axis=0)
    log_z = logadd(log_alpha[-1])

    node = np.exp(log_alpha + log_beta - log_z)
    pairwise = np.empty((t_len - 1, k, k))
    for t in range(1, t_len):
        pairwise[t - 1] = np.exp(
            log_alpha[t - 1][None, :] + a + (e[t] + log_beta[t])[:, None] - log_z
        )
    return node, pairwise


def transition_counts(path, num_classes):
    """counts[i, j] = number of j -> i moves in the path."""
    y = np.asarray(path, dtype=np.int64)
    counts = np.zeros((num_classes, num_classes))
    np.add.at(counts, (y[1:], y[:-1]), 1.0)
    return counts


def transition_gradient(emissions, transitions, path):
    """d crf_log_likelihood / d A: observed minus expected transition counts."""
    e, a = _check(emissions, transitions)
    _node, pairwise = forward_backward(e, a)
    return transition_counts(path, e.shape[1]) - pairwise.sum(axis=0)


@dataclass
class TransitionTrainResult:
    transitions: np.ndarray
    history: list  # (epoch, mean log-likelihood)


def train_transitions(dataset, num_classes, lr=0.1, epochs=10, seed=0, shuffle=True):
    """Gradient ascent on the path log-likelihood, network frozen.

    `dataset` is a sequence of (emissions, path) pairs with emissions
    precomputed. A starts at zeros, so an untrained CRF decodes exactly
    like frame-independent argmax. Deterministic given the seed.
    """
    if len(dataset) == 0:
        raise ValueError("empty transition-training dataset")
    a = np.zeros((num_classes, num_classes))
    rng = np.random.Generator(np.random.PCG64(seed))
    history = []
    for epoch in range(1, epochs + 1):
        order = rng.permutation(len(dataset)) if shuffle else np.arange(len(dataset))
        ll_sum = 0.0
        for u in order:
            emissions, path = dataset[u]
            grad = transition_gradient(emissions, a, path)
            if not np.isfinite(grad).all():
                raise DivergenceError(f"non-finite transition gradient at utterance {u}")
            a += lr * grad
            ll_sum += crf_log_likelihood(emissions, a, path)
        history.append((epoch, ll_sum / len(dataset)))
    return TransitionTrainResult(a, history)
