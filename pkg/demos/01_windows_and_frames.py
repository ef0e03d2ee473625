#!/usr/bin/env python3
"""Framing basics: analysis windows on a 10 ms grid and center-rule labels.

A waveform of length L with hop h yields exactly floor(L / h) frames.
Each frame's window is cut around its center sample (zero-padded at the
edges) and normalized to zero mean, unit variance.
"""

import numpy as np

from rawphone.framing import (
    FrameGrid,
    SegmentAnnotation,
    Waveform,
    extract_windows,
    frame_labels,
    normalize_window,
)

rng = np.random.default_rng(0)

print("== normalization ==")
window = np.array([1.0, 2.0, 3.0])
print("raw:       ", window)
print("normalized:", normalize_window(window))
print("constant in -> zeros out:", normalize_window([5.0, 5.0, 5.0]))
print("scale/shift invariant:", np.allclose(
    normalize_window(3.0 * window + 10.0), normalize_window(window)))

print()
print("== frame grid ==")
sr = 16000
samples = rng.normal(0, 0.1, size=sr)  # one second of noise
wave = Waveform(samples, sr)
grid = FrameGrid.for_length(len(wave), hop_samples=160, window_samples=4320)
print(f"1 s at {sr} Hz, hop 160 (10 ms), window 4320 (270 ms)")
print(f"-> {grid.num_frames} frames; frame 0 centered at sample {grid.center(0)}")

windows = extract_windows(wave, grid)
print(f"window matrix: {windows.shape}, every row mean ~0:",
      float(np.abs(windows.mean(axis=1)).max()) < 1e-9)

print()
print("== center-rule labels ==")
annotation = SegmentAnnotation(((0, 320, "aa"), (320, 640, "ih")))
labels = frame_labels(annotation, FrameGrid.for_length(640, 160, 1), {"aa": 0, "ih": 1})
print("segments: [0,320)='aa', [320,640)='ih', hop=160")
print("frame centers 80, 240, 400, 560 ->", labels, "(0='aa', 1='ih')")
