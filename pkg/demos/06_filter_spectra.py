#!/usr/bin/env python3
"""What the first layer learns: filters tune to the class frequencies.

Trains briefly on clean tones, then inspects the magnitude spectrum of
every first-layer filter (zero-padded DFT). Each synthetic class sits at
300 + 400k Hz; after training, filter peaks cluster around exactly those
frequencies.
"""

import numpy as np

from rawphone.corpus import SynthSpec, build_frame_dataset, collect_alphabet, synth_corpus
from rawphone.net import NetworkConfig, StageConfig
from rawphone.training import TrainConfig, train_network

HOP = 160
N_FFT = 512

spec = SynthSpec(seed=0)
train_utts, cv_utts, _ = synth_corpus(spec, 80, 16, 0)
alphabet = collect_alphabet(train_utts)
print("class frequencies:", spec.class_frequencies(), "Hz")

config = NetworkConfig(
    input_frames=1600, input_dim=1,
    stages=(StageConfig(160, 10, 30, 3), StageConfig(5, 1, 30, 3), StageConfig(9, 1, 30, 3)),
    hidden_units=100, num_classes=len(alphabet),
)
train_set = build_frame_dataset(train_utts, config.input_frames, HOP, alphabet)
cv_set = build_frame_dataset(cv_utts, config.input_frames, HOP, alphabet)
best, history = train_network(
    train_set, cv_set, config,
    TrainConfig(learning_rate=3e-4, max_epochs=3, patience=3, seed=0),
)
print(f"cv frame accuracy after {len(history)} epochs: {history[-1][2]:.1f}%")

weights = best.conv[0].weight.astype(np.float64)  # (filters, 160 taps)
spectra = np.abs(np.fft.rfft(weights, n=N_FFT, axis=1))
bin_hz = spec.sample_rate / N_FFT
peaks = spectra.argmax(axis=1) * bin_hz

print()
print(f"first-layer filter peaks ({len(peaks)} filters, {bin_hz:.2f} Hz bins):")
order = np.argsort(peaks)
line = ", ".join(f"{peaks[i]:.0f}" for i in order)
print(f"  sorted peak frequencies: {line}")

print()
print("coverage of each class frequency (peak within +-2 bins):")
for k, f in enumerate(spec.class_frequencies()):
    hits = np.where(np.abs(peaks - f) <= 2 * bin_hz)[0]
    print(f"  class {k} at {f:6.0f} Hz: {len(hits):2d} filters {hits.tolist()}")
