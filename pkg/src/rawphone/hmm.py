"""Generative baseline decoder: Viterbi over a minimum-duration topology.

Each of the K phonemes gets a left-to-right chain of D states (default 3)
whose states all emit that phoneme's per-frame log posterior. Transitions
allowed: state s to s+1 inside a phoneme, a self-loop on the last state
only, and last state of any phoneme to first state of any phoneme. All
transitions score 0 (phonemes equally probable), so every decoded
phoneme occupies at least D frames with no upper bound.
"""

from dataclasses import dataclass

import numpy as np

from .errors import NoLegalPathError


@dataclass(frozen=True)
class DurationGraph:
    num_classes: int
    min_duration: int

    def __post_init__(self):
        if self.num_classes < 1:
            raise ValueError("num_classes must be >= 1")
        if self.min_duration < 1:
            raise ValueError("min_duration must be >= 1")

    @property
    def num_states(self):
        return self.num_classes * self.min_duration


def build_duration_graph(num_classes, min_duration=3):
    return DurationGraph(num_classes, min_duration)


@dataclass
class HmmDecodeResult:
    phonemes: list  # collapsed class indices
    frame_labels: np.ndarray  # class index per frame
    score: float  # total log score of the best legal path


def decode_scores(log_emissions, graph):
    """Viterbi over the duration graph on per-frame log scores.

    Ties break toward the smaller state index (phoneme-major ordering).
    Raises NoLegalPathError when the sequence is shorter than the
    minimum duration.
    """
    e = np.asarray(log_emissions, dtype=np.float64)
    if e.ndim != 2:
        raise ValueError("log_emissions must be a T x K matrix")
    t_len, k = e.shape
    if k != graph.num_classes:
        raise ValueError(f"emissions have {k} classes, graph has {graph.num_classes}")
    d = graph.min_duration
    if t_len < d:
        raise NoLegalPathError(
            f"sequence of {t_len} frames admits no path with minimum duration {d}"
        )

    neg_inf = -np.inf
    state_idx = np.arange(k) * d
    alpha = np.full((k, d), neg_inf)
    alpha[:, 0] = e[0]
    back = np.zeros((t_len, k, d), dtype=np.int64)
    for t in range(1, t_len):
        new_alpha = np.full((k, d), neg_inf)
        new_back = np.zeros((k, d), dtype=np.int64)
        # enter a phoneme: from the best completed phoneme (smallest on ties)
        last = alpha[:, d - 1]
        j = int(np.argmax(last))
        new_alpha[:, 0] = last[j]
        new_back[:, 0] = j * d + (d - 1)
        if d >= 2:
            for s in range(1, d - 1):
                new_alpha[:, s] = alpha[:, s - 1]
                new_back[:, s] = state_idx + (s - 1)
            stay = alpha[:, d - 1]
            come = alpha[:, d - 2]
            use_come = come >= stay
            new_alpha[:, d - 1] = np.where(use_come, come, stay)
            new_back[:, d - 1] = np.where(
                use_come, state_idx + (d - 2), state_idx + (d - 1)
            )
        new_alpha += e[t][:, None]
        alpha = new_alpha
        back[t] = new_back

    final = alpha[:, d - 1]
    best_k = int(np.argmax(final))
    score = final[best_k]
    if not np.isfinite(score):
        raise NoLegalPathError("no finite-score legal path")

    states = np.zeros(t_len, dtype=np.int64)
    states[-1] = best_k * d + (d - 1)
    for t in range(t_len - 1, 0, -1):
        states[t - 1] = back[t, states[t] // d, states[t] % d]
    frame_labels = states // d
    phonemes = [int(frame_labels[0])]
    for lbl in frame_labels[1:]:
        if lbl != phonemes[-1]:
            phonemes.append(int(lbl))
    return HmmDecodeResult(phonemes, frame_labels, float(score))


def hmm_decode(posteriors, graph, row_sum_tol=1e-6):
    """Decode a T x K posterior matrix (rows on the probability simplex)."""
    p = np.asarray(posteriors, dtype=np.float64)
    if p.ndim != 2:
        raise ValueError("posteriors must be a T x K matrix")
    if p.min() < 0:
        raise ValueError("posteriors must be non-negative")
    sums = p.sum(axis=1)
    if np.abs(sums - 1.0).max() > row_sum_tol:
        worst = int(np.abs(sums - 1.0).argmax())
        raise ValueError(f"posterior row {worst} sums to {sums[worst]:.8f}, not 1")
    with np.errstate(divide="ignore"):
        log_e = np.log(p)
    return decode_scores(log_e, graph)
