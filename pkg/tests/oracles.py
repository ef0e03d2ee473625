"""Independent reference implementations used to pin expected test values.

Everything here is deliberately brute force (enumeration, finite
differences, naive DFT) and shares no code with the library paths it
checks.
"""

import itertools
from functools import lru_cache

import numpy as np


# --- network shapes ---------------------------------------------------------


def conv_frames_bruteforce(t, kernel_width, shift):
    """Count valid window placements by enumerating start positions."""
    return len([s for s in range(0, t, shift) if s + kernel_width <= t])


def pool_frames_bruteforce(t, pool_width):
    return len([s for s in range(0, t, pool_width) if s + pool_width <= t])


def simulate_stage_frames(input_frames, stages):
    """Per-stage (conv frames, pool frames) via position enumeration."""
    t = input_frames
    out = []
    for kernel_width, shift, pool_width in stages:
        t_conv = conv_frames_bruteforce(t, kernel_width, shift)
        t_pool = pool_frames_bruteforce(t_conv, pool_width)
        out.append((t_conv, t_pool))
        t = t_pool
    return out


# --- finite differences -----------------------------------------------------


def numeric_gradient_inplace(tensor, loss_fn, eps):
    """Central finite differences, perturbing `tensor` entries in place."""
    grad = np.zeros_like(tensor)
    flat = tensor.reshape(-1)
    gflat = grad.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + eps
        plus = loss_fn()
        flat[i] = orig - eps
        minus = loss_fn()
        flat[i] = orig
        gflat[i] = (plus - minus) / (2.0 * eps)
    return grad


def max_rel_error(analytic, numeric, floor):
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)
    return float(np.max(np.abs(analytic - numeric) / denom))


# --- CRF enumeration --------------------------------------------------------


def crf_path_score_seq(emissions, transitions, path):
    """Sequential left-to-right accumulation, matching decoder arithmetic."""
    s = emissions[0][path[0]]
    for t in range(1, len(path)):
        s = s + transitions[path[t], path[t - 1]]
        s = s + emissions[t][path[t]]
    return s


def crf_all_path_scores(emissions, transitions):
    t_len, k = np.asarray(emissions).shape
    paths = list(itertools.product(range(k), repeat=t_len))
    scores = np.array(
        [crf_path_score_seq(emissions, transitions, p) for p in paths]
    )
    return paths, scores


def crf_enum_partition(emissions, transitions):
    _paths, scores = crf_all_path_scores(emissions, transitions)
    m = scores.max()
    return m + np.log(np.sum(np.exp(scores - m)))


def crf_enum_viterbi(emissions, transitions):
    """Argmax path; ties prefer the smaller label at the latest differing spot."""
    paths, scores = crf_all_path_scores(emissions, transitions)
    best = None
    best_score = -np.inf
    for p, s in zip(paths, scores):
        if s > best_score or (s == best_score and tuple(reversed(p)) < tuple(reversed(best))):
            best, best_score = p, s
    return np.array(best), best_score


def crf_enum_marginals(emissions, transitions):
    e = np.asarray(emissions)
    t_len, k = e.shape
    paths, scores = crf_all_path_scores(e, transitions)
    m = scores.max()
    weights = np.exp(scores - m)
    weights /= weights.sum()
    node = np.zeros((t_len, k))
    pairwise = np.zeros((t_len - 1, k, k))
    for p, w in zip(paths, weights):
        for t in range(t_len):
            node[t, p[t]] += w
        for t in range(1, t_len):
            pairwise[t - 1, p[t], p[t - 1]] += w
    return node, pairwise


# --- minimum-duration decoding ----------------------------------------------


def min_duration_sequences(t_len, k, d):
    """All frame-label sequences whose maximal runs are all >= d frames."""
    results = []

    def extend(prefix_len, prev, runs):
        if prefix_len == t_len:
            results.append(
                [label for label, r in runs for _ in range(r)]
            )
            return
        for label in range(k):
            if label == prev:
                continue
            for run in range(d, t_len - prefix_len + 1):
                extend(prefix_len + run, label, runs + [(label, run)])

    extend(0, None, [])
    return results


def hmm_enum_best_score(log_emissions, k, d):
    e = np.asarray(log_emissions)
    best = -np.inf
    for seq in min_duration_sequences(e.shape[0], k, d):
        s = e[0, seq[0]]
        for t in range(1, len(seq)):
            s = s + e[t, seq[t]]
        best = max(best, s)
    return best


# --- edit distance ----------------------------------------------------------


def levenshtein_two_rows(ref, hyp):
    """Independent DP formulation (rolling rows)."""
    prev = list(range(len(hyp) + 1))
    for i, r in enumerate(ref, 1):
        cur = [i] + [0] * len(hyp)
        for j, h in enumerate(hyp, 1):
            cur[j] = min(prev[j - 1] + (r != h), prev[j] + 1, cur[j - 1] + 1)
        prev = cur
    return prev[-1]


def levenshtein_recursive(ref, hyp):
    ref = tuple(ref)
    hyp = tuple(hyp)

    @lru_cache(maxsize=None)
    def go(i, j):
        if i == 0:
            return j
        if j == 0:
            return i
        return min(
            go(i - 1, j - 1) + (ref[i - 1] != hyp[j - 1]),
            go(i - 1, j) + 1,
            go(i, j - 1) + 1,
        )

    return go(len(ref), len(hyp))


# --- spectra ------------------------------------------------------------------


def naive_dft_magnitude(x, n_fft):
    """O(n^2) DFT magnitude for bins 0..n_fft//2 of a zero-padded signal."""
    padded = np.zeros(n_fft)
    padded[: len(x)] = x
    mags = []
    for k in range(n_fft // 2 + 1):
        acc = 0.0 + 0.0j
        for n in range(n_fft):
            acc += padded[n] * np.exp(-2j * np.pi * k * n / n_fft)
        mags.append(abs(acc))
    return np.array(mags)


# --- linear separability ------------------------------------------------------


def perceptron_separates(points, labels, max_epochs=200):
    """Pocket-free perceptron; True when it finds a separating hyperplane."""
    x = np.asarray(points, dtype=np.float64)
    y = np.where(np.asarray(labels) > 0, 1.0, -1.0)
    w = np.zeros(x.shape[1])
    b = 0.0
    for _ in range(max_epochs):
        mistakes = 0
        for i in range(len(x)):
            if y[i] * (x[i] @ w + b) <= 0:
                w += y[i] * x[i]
                b += y[i]
                mistakes += 1
        if mistakes == 0:
            return True
    return False
