"""Waveform framing: fixed-size analysis windows on a regular grid.

A waveform of length L with hop h yields exactly floor(L / h) frames.
Frame t is centered at sample t*h + h//2; the waveform is zero-padded
symmetrically so edge frames keep full context. Each raw window is
normalized to zero mean and unit population variance after padding.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DataError


@dataclass(frozen=True)
class Waveform:
    """Mono audio samples, nominally in [-1, 1]."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        if len(self.samples) < 1:
            raise ValueError("waveform must contain at least one sample")

    def __len__(self):
        return len(self.samples)


@dataclass(frozen=True)
class FrameGrid:
    """Regular frame grid over a signal of num_frames * hop samples or more."""

    hop_samples: int
    window_samples: int
    num_frames: int

    def __post_init__(self):
        if self.hop_samples < 1:
            raise ValueError(f"hop_samples must be >= 1, got {self.hop_samples}")
        if self.window_samples < 1:
            raise ValueError(f"window_samples must be >= 1, got {self.window_samples}")
        if self.num_frames < 0:
            raise ValueError(f"num_frames must be >= 0, got {self.num_frames}")

    @classmethod
    def for_length(cls, length, hop_samples, window_samples):
        """Grid covering a signal of `length` samples: floor(length/hop) frames."""
        if length < 1:
            raise ValueError("signal length must be >= 1")
        return cls(hop_samples, window_samples, length // hop_samples)

    def center(self, t):
        """Center sample of frame t."""
        return t * self.hop_samples + self.hop_samples // 2


@dataclass(frozen=True)
class SegmentAnnotation:
    """Sorted, non-overlapping labeled spans [start, end) in sample units."""

    segments: tuple = field(default_factory=tuple)

    def __post_init__(self):
        prev_end = 0
        for start, end, _label in self.segments:
            if start < 0 or end <= start:
                raise ValueError(f"bad segment bounds ({start}, {end})")
            if start < prev_end:
                raise ValueError("segments must be sorted and non-overlapping")
            prev_end = end

    def labels(self):
        return [label for _s, _e, label in self.segments]


def normalize_window(window):
    """Shift and scale a window to zero mean, unit population variance.

    A constant window maps to all zeros instead of raising, so padded
    silence does not abort a run. Computation is float64 regardless of
    the input dtype.
    """
    x = np.asarray(window, dtype=np.float64)
    if x.ndim != 1 or x.size < 1:
        raise ValueError("window must be a non-empty 1-D sequence")
    centered = x - x.mean()
    std = np.sqrt(np.mean(centered * centered))
    if std == 0.0:
        return np.zeros_like(x)
    return centered / std


def extract_windows(waveform, grid):
    """Cut one normalized window per grid frame from a waveform.

    Returns a (num_frames, window_samples) float64 matrix. Frame t is the
    window of `grid.window_samples` samples centered at `grid.center(t)`,
    on a waveform zero-padded by window_samples // 2 on both ends.
    """
    x = np.asarray(waveform.samples, dtype=np.float64)
    w = grid.window_samples
    pad = w // 2
    padded = np.concatenate([np.zeros(pad), x, np.zeros(pad)])
    if w > len(padded):
        raise ValueError(
            f"window of {w} samples exceeds padded waveform length {len(padded)}"
        )
    out = np.empty((grid.num_frames, w), dtype=np.float64)
    for t in range(grid.num_frames):
        start = grid.center(t) - w // 2 + pad
        out[t] = normalize_window(padded[start : start + w])
    return out


def extract_feature_windows(features, context_frames):
    """Cut a centered context block per frame from a precomputed feature matrix.

    Returns (T, context_frames, d). Edges are zero-padded; no normalization
    is applied (feature matrices arrive already conditioned).
    """
    feats = np.asarray(features, dtype=np.float64)
    if feats.ndim != 2 or feats.shape[0] < 1:
        raise ValueError("features must be a non-empty T x d matrix")
    if context_frames < 1:
        raise ValueError("context_frames must be >= 1")
    T, d = feats.shape
    half = context_frames // 2
    padded = np.concatenate(
        [np.zeros((half, d)), feats, np.zeros((context_frames - half, d))]
    )
    out = np.empty((T, context_frames, d), dtype=np.float64)
    for t in range(T):
        out[t] = padded[t : t + context_frames]
    return out


def frame_labels(annotation, grid, label_to_index, garbage_index=None):
    """Label each grid frame by the segment containing its center sample.

    Centers outside every segment get `garbage_index`; if none is
    configured, that frame is a data error.
    """
    starts = np.array([s for s, _e, _l in annotation.segments], dtype=np.int64)
    ends = np.array([e for _s, e, _l in annotation.segments], dtype=np.int64)
    idx = np.array(
        [label_to_index[l] for _s, _e, l in annotation.segments], dtype=np.int64
    )
    out = np.empty(grid.num_frames, dtype=np.int64)
    for t in range(grid.num_frames):
        c = grid.center(t)
        # rightmost segment with start <= c, then check c < end
        pos = int(np.searchsorted(starts, c, side="right")) - 1
        if pos >= 0 and c < ends[pos]:
            out[t] = idx[pos]
        elif garbage_index is not None:
            out[t] = garbage_index
        else:
            raise DataError(
                f"frame {t} (center sample {c}) is not covered by any segment "
                "and no garbage label is configured"
            )
    return out
