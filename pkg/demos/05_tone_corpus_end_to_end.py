#!/usr/bin/env python3
"""End to end on synthetic tones: generate, train, decode, score.

Builds a small tone-phoneme corpus with a biased bigram (class k is
followed by class (k+1) mod K ten times more often than by others),
trains the conv net on raw 50 ms windows, then compares the three
decoders. Runs in about a minute on one core.
"""

import time

import numpy as np

from rawphone.corpus import (
    SynthSpec,
    build_frame_dataset,
    collect_alphabet,
    cycle_bias,
    reference_sequence,
    synth_corpus,
    utterance_frame_labels,
    utterance_windows,
)
from rawphone.crf import train_transitions, viterbi
from rawphone.hmm import build_duration_graph, hmm_decode
from rawphone.net import NetworkConfig, StageConfig, forward_pass, param_count, softmax
from rawphone.scoring import collapse_path, levenshtein
from rawphone.training import TrainConfig, train_network

HOP = 160  # 10 ms at 16 kHz

spec = SynthSpec(noise_sigma=0.5, bigram_bias=cycle_bias(5, 10.0),
                 segments_range=(6, 10), duration_ms=(60.0, 140.0), seed=0)
train_utts, cv_utts, test_utts = synth_corpus(spec, 120, 25, 30)
alphabet = collect_alphabet(train_utts)
label_to_index = {l: i for i, l in enumerate(alphabet)}
print(f"corpus: {len(train_utts)} train / {len(cv_utts)} cv / {len(test_utts)} test, "
      f"classes {alphabet}, tone noise sigma {spec.noise_sigma}")

config = NetworkConfig(
    input_frames=800, input_dim=1,
    stages=(StageConfig(80, 10, 16, 3), StageConfig(5, 1, 16, 3), StageConfig(3, 1, 16, 2)),
    hidden_units=64, num_classes=len(alphabet),
)
print(f"network: 50 ms window, stages -> {config.frame_counts()}, "
      f"{param_count(config):,} parameters")

train_set = build_frame_dataset(train_utts, config.input_frames, HOP, alphabet)
cv_set = build_frame_dataset(cv_utts, config.input_frames, HOP, alphabet)
t0 = time.time()
best, history = train_network(
    train_set, cv_set, config,
    TrainConfig(learning_rate=3e-4, max_epochs=5, patience=5, seed=0),
)
print(f"trained {len(history)} epochs in {time.time() - t0:.0f}s; "
      f"cv frame accuracy per epoch: {[round(h[2], 1) for h in history]}")


def emissions_of(utt):
    windows = utterance_windows(utt, config.input_frames, HOP)
    return np.array([forward_pass(w, best)[0] for w in windows], dtype=np.float64)


# CRF transitions trained on the frozen network's training emissions
crf_data = [
    (emissions_of(u), utterance_frame_labels(u, config.input_frames, HOP, label_to_index))
    for u in train_utts
]
transitions = train_transitions(crf_data, len(alphabet), lr=0.05, epochs=10, seed=0).transitions
print("learned transition matrix (rounded):")
print(np.round(transitions, 2))

graph = build_duration_graph(len(alphabet), min_duration=3)
totals = {"argmax": [0, 0], "hmm": [0, 0], "crf": [0, 0]}
for utt in test_utts:
    e = emissions_of(utt)
    ref = [label_to_index[l] for l in reference_sequence(utt)]
    hyps = {"argmax": collapse_path(list(e.argmax(axis=1)))}
    posteriors = np.array([softmax(row) for row in e])
    hyps["hmm"] = hmm_decode(posteriors, graph).phonemes
    hyps["crf"] = collapse_path(list(viterbi(e, transitions)[0]))
    for name, hyp in hyps.items():
        dist, _ = levenshtein(ref, hyp)
        totals[name][0] += len(ref)
        totals[name][1] += dist

print()
print("test phoneme accuracy (corpus-pooled):")
for name in ("argmax", "hmm", "crf"):
    n, e = totals[name]
    print(f"  {name:<6} {100.0 * (n - e) / n:6.2f}%")
