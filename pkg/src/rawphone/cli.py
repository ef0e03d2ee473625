"""Operator surface: subcommands wiring the library into full experiments.

Subcommands: synth, train, grid, decode, eval, filters, ablate-pool,
check-grad. Common flags: --seed, --config <json>, --out <dir>. Flags
beat config-file values; the fully resolved configuration is echoed to
<out>/resolved.json. Exit codes: 0 success, 1 usage error, 2 data error,
3 numeric/divergence error. Identical invocations produce byte-identical
outputs.
"""

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .corpus import (
    SynthSpec,
    build_frame_dataset,
    collect_alphabet,
    cycle_bias,
    load_manifest,
    load_utterance,
    reference_sequence,
    synth_corpus,
    utterance_frame_labels,
    utterance_windows,
    write_corpus,
)
from .crf import train_transitions, viterbi
from .errors import DataError, DivergenceError, NoLegalPathError
from .hmm import build_duration_graph, hmm_decode
from .model_io import load_model, save_model
from .net import (
    NetworkConfig,
    StageConfig,
    backward_pass,
    forward_pass,
    init_params,
    param_count,
    softmax,
)
from .scoring import collapse_path, levenshtein, map_labels, read_mapping
from .training import (
    GridSpec,
    TrainConfig,
    grid_search,
    history_csv_lines,
    loglik_score_gradient,
    train_network,
)

DEFAULT_STAGES = "160:10:3,5:1:3,9:1:3"


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _parse_stages(text, filters):
    stages = []
    for part in text.split(","):
        fields = part.split(":")
        if len(fields) != 3:
            raise ValueError(f"stage {part!r} must be kernel:shift:pool")
        kw, dw, pool = (int(x) for x in fields)
        stages.append(StageConfig(kw, dw, filters, pool))
    return tuple(stages)


def _int_list(text):
    return tuple(int(x) for x in text.split(","))


def _float_list(text):
    return tuple(float(x) for x in text.split(","))


def _resolve(args, defaults):
    """Merge defaults, --config file values, and explicit flags (flags win)."""
    merged = dict(defaults)
    if getattr(args, "config", None):
        with open(args.config, encoding="utf-8") as f:
            try:
                file_values = json.load(f)
            except json.JSONDecodeError as e:
                raise DataError(f"{args.config}: bad JSON: {e}") from e
        unknown = set(file_values) - set(defaults)
        if unknown:
            raise ValueError(f"{args.config}: unknown config keys {sorted(unknown)}")
        merged.update(file_values)
    for key in defaults:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    return merged


def _echo_resolved(out_dir, subcommand, resolved):
    out_dir.mkdir(parents=True, exist_ok=True)
    payload = {"subcommand": subcommand, **resolved}
    (out_dir / "resolved.json").write_text(
        json.dumps(payload, sort_keys=True, indent=2, default=str) + "\n"
    )


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _load_split(manifest, feature_dim=None, raw_sample_rate=None):
    refs = load_manifest(manifest)
    return [load_utterance(r, feature_dim, raw_sample_rate) for r in refs]


def _corpus_sample_rate(utterances):
    rates = {u.waveform.sample_rate for u in utterances if u.waveform is not None}
    if len(rates) > 1:
        raise DataError(f"mixed sample rates in corpus: {sorted(rates)}")
    return rates.pop() if rates else None


def compute_emissions(utt, params, hop_samples):
    """Per-frame network scores for one utterance, as a float64 T x K matrix."""
    windows = utterance_windows(utt, params.config.input_frames, hop_samples)
    scores = np.empty((windows.shape[0], params.config.num_classes), dtype=np.float64)
    for t in range(windows.shape[0]):
        scores[t] = forward_pass(windows[t], params)[0]
    return scores


# ---------------------------------------------------------------------------
# synth


SYNTH_DEFAULTS = {
    "train": 10, "cv": 2, "test": 2,
    "classes": 5, "base_freq": 300.0, "freq_step": 400.0,
    "harmonic_gain": 0.5, "tone_amplitude": 0.6, "noise_sigma": 0.05,
    "min_duration_ms": 60.0, "max_duration_ms": 200.0,
    "min_segments": 4, "max_segments": 8,
    "sample_rate": 16000, "seed": 0, "cycle_bias": 0.0,
}


def cmd_synth(args):
    cfg = _resolve(args, SYNTH_DEFAULTS)
    out = Path(args.out)
    bias = None
    if cfg["cycle_bias"] > 0:
        bias = cycle_bias(cfg["classes"], cfg["cycle_bias"])
    spec = SynthSpec(
        num_classes=cfg["classes"],
        base_freq_hz=cfg["base_freq"],
        freq_step_hz=cfg["freq_step"],
        harmonic_gain=cfg["harmonic_gain"],
        tone_amplitude=cfg["tone_amplitude"],
        noise_sigma=cfg["noise_sigma"],
        duration_ms=(cfg["min_duration_ms"], cfg["max_duration_ms"]),
        segments_range=(cfg["min_segments"], cfg["max_segments"]),
        bigram_bias=bias,
        sample_rate=cfg["sample_rate"],
        seed=cfg["seed"],
    )
    train, cv, test = synth_corpus(spec, cfg["train"], cfg["cv"], cfg["test"])
    out.mkdir(parents=True, exist_ok=True)
    manifests = write_corpus(out, {"train": train, "cv": cv, "test": test})
    _echo_resolved(out, "synth", cfg)
    for name, path in manifests.items():
        print(f"{name}: {path}")
    return 0


# ---------------------------------------------------------------------------
# train


TRAIN_DEFAULTS = {
    "window_ms": 100.0, "window_frames": 0, "stages": DEFAULT_STAGES,
    "filters": 30, "hidden": 100, "hop_ms": 10.0,
    "feature_dim": 0, "garbage": "", "raw_sample_rate": 0,
    "lr": 1e-4, "epochs": 15, "patience": 5, "seed": 0, "shuffle": True,
    "crf_lr": 0.05, "crf_epochs": 5,
}


def _network_setup(cfg, train_utts, alphabet):
    """Window/hop geometry plus the NetworkConfig for a resolved train config."""
    feature_dim = cfg["feature_dim"] or None
    sample_rate = _corpus_sample_rate(train_utts)
    if feature_dim is None:
        if sample_rate is None:
            raise DataError("raw training needs waveform utterances")
        input_frames = cfg["window_frames"] or int(
            round(cfg["window_ms"] * sample_rate / 1000.0)
        )
        hop = max(1, int(round(cfg["hop_ms"] * sample_rate / 1000.0)))
        input_dim = 1
    else:
        if not cfg["window_frames"]:
            raise ValueError("feature input needs --window-frames")
        input_frames = cfg["window_frames"]
        hop = 1
        input_dim = feature_dim
    net_config = NetworkConfig(
        input_frames=input_frames,
        input_dim=input_dim,
        stages=_parse_stages(cfg["stages"], cfg["filters"]),
        hidden_units=cfg["hidden"],
        num_classes=len(alphabet),
    )
    return net_config, hop, sample_rate


def _train_once(cfg, train_utts, cv_utts, net_config, hop, alphabet, garbage, seed):
    train_set = build_frame_dataset(train_utts, net_config.input_frames, hop, alphabet, garbage)
    cv_set = build_frame_dataset(cv_utts, net_config.input_frames, hop, alphabet, garbage)
    tc = TrainConfig(
        learning_rate=cfg["lr"], max_epochs=cfg["epochs"],
        patience=cfg["patience"], seed=seed, shuffle=cfg["shuffle"],
    )
    return train_network(train_set, cv_set, net_config, tc)


def cmd_train(args):
    cfg = _resolve(args, TRAIN_DEFAULTS)
    out = Path(args.out)
    feature_dim = cfg["feature_dim"] or None
    raw_rate = cfg["raw_sample_rate"] or None
    train_utts = _load_split(args.train_manifest, feature_dim, raw_rate)
    cv_utts = _load_split(args.cv_manifest, feature_dim, raw_rate)
    garbage = cfg["garbage"] or None
    alphabet = collect_alphabet(train_utts + cv_utts)
    if garbage is not None and garbage not in alphabet:
        alphabet = sorted(alphabet + [garbage])
    net_config, hop, sample_rate = _network_setup(cfg, train_utts, alphabet)

    best, history = _train_once(
        cfg, train_utts, cv_utts, net_config, hop, alphabet, garbage, cfg["seed"]
    )

    transitions = np.zeros((len(alphabet), len(alphabet)))
    if cfg["crf_epochs"] > 0:
        label_to_index = {l: i for i, l in enumerate(alphabet)}
        garbage_index = label_to_index[garbage] if garbage else None
        crf_data = []
        for utt in train_utts:
            emissions = compute_emissions(utt, best, hop)
            labels = utterance_frame_labels(
                utt, net_config.input_frames, hop, label_to_index, garbage_index
            )
            crf_data.append((emissions, labels))
        transitions = train_transitions(
            crf_data, len(alphabet),
            lr=cfg["crf_lr"], epochs=cfg["crf_epochs"], seed=cfg["seed"],
        ).transitions

    out.mkdir(parents=True, exist_ok=True)
    metadata = {
        "input_kind": "feature" if feature_dim else "raw",
        "sample_rate": sample_rate,
        "hop_samples": hop,
        "garbage": garbage,
    }
    save_model(out / "model.rcn", best, alphabet, metadata, transitions)
    (out / "history.csv").write_text("\n".join(history_csv_lines(history)) + "\n")
    _echo_resolved(out, "train", cfg)
    print(f"model: {out / 'model.rcn'}")
    print(f"best cv frame accuracy: {max(h[2] for h in history):.3f}")
    return 0


# ---------------------------------------------------------------------------
# grid


GRID_DEFAULTS = {
    "window_ms_list": "100,300,500,700", "kernel_list": "1,5,9",
    "filters_list": "10,50,90", "hidden_list": "100,800,1500",
    "pool_list": "3", "stages_count": 3, "max_configs": 0,
    "hop_ms": 10.0, "feature_dim": 0, "garbage": "",
    "lr": 1e-4, "epochs": 5, "patience": 5, "seed": 0, "shuffle": True,
}


def cmd_grid(args):
    cfg = _resolve(args, GRID_DEFAULTS)
    out = Path(args.out)
    feature_dim = cfg["feature_dim"] or None
    train_utts = _load_split(args.train_manifest, feature_dim)
    cv_utts = _load_split(args.cv_manifest, feature_dim)
    garbage = cfg["garbage"] or None
    alphabet = collect_alphabet(train_utts + cv_utts)
    sample_rate = _corpus_sample_rate(train_utts)
    if feature_dim is None and sample_rate is None:
        raise DataError("raw grid search needs waveform utterances")

    spec = GridSpec(
        window_ms=_float_list(cfg["window_ms_list"]),
        kernel_width=_int_list(cfg["kernel_list"]),
        num_filters=_int_list(cfg["filters_list"]),
        hidden_units=_int_list(cfg["hidden_list"]),
        pool_width=_int_list(cfg["pool_list"]),
        num_stages=cfg["stages_count"],
    )
    configs = spec.configs(
        sample_rate or 1000, feature_dim or 1, len(alphabet)
    )
    if not configs:
        raise ValueError("grid is empty after dropping infeasible configurations")
    hop = 1 if feature_dim else max(1, int(round(cfg["hop_ms"] * sample_rate / 1000.0)))

    dataset_cache = {}

    def dataset_for(config):
        key = config.input_frames
        if key not in dataset_cache:
            dataset_cache[key] = (
                build_frame_dataset(train_utts, key, hop, alphabet, garbage),
                build_frame_dataset(cv_utts, key, hop, alphabet, garbage),
            )
        return dataset_cache[key]

    tc = TrainConfig(
        learning_rate=cfg["lr"], max_epochs=cfg["epochs"],
        patience=cfg["patience"], seed=cfg["seed"], shuffle=cfg["shuffle"],
    )
    results = grid_search(dataset_for, configs, tc, max_configs=cfg["max_configs"] or None)

    rows = []
    for r in results:
        c = r.config
        rows.append([
            r.ordinal, c.input_frames,
            "/".join(str(s.kernel_width) for s in c.stages),
            "/".join(str(s.shift) for s in c.stages),
            "/".join(str(s.pool_width) for s in c.stages),
            c.stages[0].out_dim if c.stages else 0, c.hidden_units,
            param_count(c), r.seed,
            "" if r.failed else f"{r.cv_accuracy:.6f}",
            r.error,
        ])
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(
        out / "grid.csv",
        ["ordinal", "window_frames", "kernels", "shifts", "pools",
         "filters", "hidden", "param_count", "seed", "cv_accuracy", "error"],
        rows,
    )
    _echo_resolved(out, "grid", cfg)
    print(f"grid results: {out / 'grid.csv'} ({len(rows)} rows)")
    return 0


# ---------------------------------------------------------------------------
# decode


DECODE_DEFAULTS = {
    "decoder": "crf", "min_duration": 3, "seed": 0, "raw_sample_rate": 0,
}


def _decode_utterance(utt, params, transitions, decoder, hop, min_duration, alphabet):
    emissions = compute_emissions(utt, params, hop)
    if decoder == "argmax":
        path = emissions.argmax(axis=1)
        return collapse_path([alphabet[i] for i in path])
    if decoder == "crf":
        path, _score = viterbi(emissions, transitions)
        return collapse_path([alphabet[i] for i in path])
    if decoder == "hmm":
        posteriors = np.empty_like(emissions)
        for t in range(emissions.shape[0]):
            posteriors[t] = softmax(emissions[t])
        graph = build_duration_graph(len(alphabet), min_duration)
        result = hmm_decode(posteriors, graph)
        return [alphabet[i] for i in result.phonemes]
    raise ValueError(f"unknown decoder {decoder!r}")


def cmd_decode(args):
    cfg = _resolve(args, DECODE_DEFAULTS)
    out = Path(args.out)
    params, alphabet, metadata, transitions = load_model(args.model)
    if transitions is None:
        transitions = np.zeros((len(alphabet), len(alphabet)))
    hop = metadata.get("hop_samples") or 1
    if metadata.get("input_kind") == "feature" or params.config.input_dim > 1:
        feature_dim = params.config.input_dim
    else:
        feature_dim = None
    refs = load_manifest(args.manifest)

    hyp_dir = out / "hyp"
    hyp_dir.mkdir(parents=True, exist_ok=True)
    log_rows = []
    for ref in refs:
        try:
            utt = load_utterance(ref, feature_dim, cfg["raw_sample_rate"] or None)
            phonemes = _decode_utterance(
                utt, params, transitions, cfg["decoder"], hop,
                cfg["min_duration"], alphabet,
            )
            (hyp_dir / f"{ref.id}.txt").write_text(" ".join(phonemes) + "\n")
            log_rows.append([ref.id, "ok", ""])
        except (DataError, NoLegalPathError, ValueError) as e:
            log_rows.append([ref.id, "error", str(e).replace(",", ";")])
    _write_csv(out / "decode_log.csv", ["id", "status", "message"], log_rows)
    _echo_resolved(out, "decode", cfg)
    failed = sum(1 for r in log_rows if r[1] != "ok")
    print(f"decoded {len(log_rows) - failed}/{len(log_rows)} utterances -> {hyp_dir}")
    return 0


# ---------------------------------------------------------------------------
# eval


EVAL_DEFAULTS = {"mapping": "", "strip_garbage": False, "garbage": "", "seed": 0}


def cmd_eval(args):
    cfg = _resolve(args, EVAL_DEFAULTS)
    out = Path(args.out)
    refs = load_manifest(args.ref_manifest)
    table = read_mapping(cfg["mapping"]) if cfg["mapping"] else None
    strip = cfg["garbage"] if (cfg["strip_garbage"] and cfg["garbage"]) else None

    from .corpus import read_labels

    rows = []
    total_n = total_e = 0
    for ref in refs:
        annotation = read_labels(ref.labels_path)
        ref_seq = collapse_path([l for _s, _e, l in annotation.segments], strip=strip)
        hyp_file = Path(args.hyp_dir) / f"{ref.id}.txt"
        hyp_seq = hyp_file.read_text().split() if hyp_file.exists() else []
        if table is not None:
            ref_seq = collapse_path(map_labels(ref_seq, table), strip=strip)
            hyp_seq = map_labels(hyp_seq, table)
        if hyp_seq and strip is not None:
            hyp_seq = collapse_path(hyp_seq, strip=strip)
        n = len(ref_seq)
        if n == 0:
            raise DataError(f"utterance {ref.id}: empty reference after stripping")
        dist, (subs, dels, ins) = levenshtein(ref_seq, hyp_seq)
        acc = 100.0 * (n - dist) / n
        rows.append([ref.id, n, dist, f"{acc:.6f}", subs, dels, ins])
        total_n += n
        total_e += dist
    overall = 100.0 * (total_n - total_e) / total_n if total_n else 0.0
    rows.append(["OVERALL", total_n, total_e, f"{overall:.6f}", "", "", ""])
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(
        out / "report.csv",
        ["id", "n_ref", "edit_distance", "accuracy", "substitutions", "deletions", "insertions"],
        rows,
    )
    _echo_resolved(out, "eval", cfg)
    print(f"phoneme accuracy (corpus-pooled): {overall:.3f}")
    print("S/D/I columns reflect one minimal alignment (match > sub > del > ins)")
    return 0


# ---------------------------------------------------------------------------
# filters


FILTERS_DEFAULTS = {"n_fft": 512, "sample_rate": 0, "seed": 0}


def cmd_filters(args):
    cfg = _resolve(args, FILTERS_DEFAULTS)
    out = Path(args.out)
    params, _alphabet, metadata, _a = load_model(args.model)
    if params.config.input_dim != 1:
        raise DataError(
            "filter spectra need a raw-input model (first layer d_in == 1), "
            f"got d_in == {params.config.input_dim}"
        )
    if not params.config.stages:
        raise DataError("model has no convolutional layers")
    sample_rate = cfg["sample_rate"] or metadata.get("sample_rate")
    if not sample_rate:
        raise DataError("sample rate unknown; pass --sample-rate")
    n_fft = cfg["n_fft"]
    weight = params.conv[0].weight.astype(np.float64)
    spectra = np.abs(np.fft.rfft(weight, n=n_fft, axis=1))
    rows = []
    for i in range(weight.shape[0]):
        for b in range(n_fft // 2 + 1):
            rows.append([i, f"{b * sample_rate / n_fft:.6f}", f"{spectra[i, b]:.8e}"])
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "filters.csv", ["filter_index", "bin_frequency_hz", "magnitude"], rows)
    _echo_resolved(out, "filters", cfg)
    print(f"filter spectra: {out / 'filters.csv'} ({weight.shape[0]} filters)")
    return 0


# ---------------------------------------------------------------------------
# ablate-pool


ABLATE_DEFAULTS = {
    k: v for k, v in TRAIN_DEFAULTS.items() if not k.startswith("crf_")
}
ABLATE_DEFAULTS.update({"min_duration": 3})


def _with_retained_pools(base, retained):
    """Last stages beyond `retained` lose pooling; the input window is kept."""
    stages = list(base.stages)
    for i in range(retained, len(stages)):
        s = stages[i]
        stages[i] = StageConfig(s.kernel_width, s.shift, s.out_dim, 1)
    return NetworkConfig(
        base.input_frames, base.input_dim, tuple(stages),
        base.hidden_units, base.num_classes,
    )


def cmd_ablate_pool(args):
    cfg = _resolve(args, ABLATE_DEFAULTS)
    out = Path(args.out)
    feature_dim = cfg["feature_dim"] or None
    train_utts = _load_split(args.train_manifest, feature_dim)
    cv_utts = _load_split(args.cv_manifest, feature_dim)
    test_utts = _load_split(args.test_manifest, feature_dim)
    garbage = cfg["garbage"] or None
    alphabet = collect_alphabet(train_utts + cv_utts + test_utts)
    base_config, hop, _sr = _network_setup(cfg, train_utts, alphabet)
    if len(base_config.stages) != 3:
        raise ValueError("pooling ablation needs a 3-stage base configuration")

    label_to_index = {l: i for i, l in enumerate(alphabet)}
    graph = build_duration_graph(len(alphabet), cfg["min_duration"])
    rows = []
    for retained in (0, 1, 2, 3):
        try:
            config = _with_retained_pools(base_config, retained)
            best, _history = _train_once(
                cfg, train_utts, cv_utts, config, hop, alphabet, garbage, cfg["seed"]
            )
            total_n = total_e = 0
            for utt in test_utts:
                emissions = compute_emissions(utt, best, hop)
                posteriors = np.empty_like(emissions)
                for t in range(emissions.shape[0]):
                    posteriors[t] = softmax(emissions[t])
                hyp = hmm_decode(posteriors, graph).phonemes
                ref = [label_to_index[l] for l in reference_sequence(utt)]
                dist, _ = levenshtein(ref, hyp)
                total_n += len(ref)
                total_e += dist
            acc = 100.0 * (total_n - total_e) / total_n
            rows.append([retained, param_count(config), f"{acc:.6f}", ""])
        except (ValueError, DataError, NoLegalPathError, DivergenceError) as e:
            rows.append([retained, "", "", str(e).replace(",", ";")])
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(
        out / "ablation.csv",
        ["pool_layers", "param_count", "test_phoneme_accuracy", "error"],
        rows,
    )
    _echo_resolved(out, "ablate-pool", cfg)
    for row in rows:
        print(f"pool_layers={row[0]} params={row[1]} accuracy={row[2]} {row[3]}")
    return 0


# ---------------------------------------------------------------------------
# check-grad


CHECKGRAD_DEFAULTS = {
    "configs": 5, "eps": 1e-4, "tolerance": 1e-4, "seed": 0, "corrupt": "",
}


def cmd_check_grad(args):
    cfg = _resolve(args, CHECKGRAD_DEFAULTS)
    from .training import frame_log_likelihood

    rng = np.random.Generator(np.random.PCG64(cfg["seed"]))
    all_pass = True
    report = []
    for index in range(cfg["configs"]):
        config = _random_check_config(rng)
        params = init_params(config, int(rng.integers(2**31)), dtype=np.float64)
        window = rng.normal(size=(config.input_frames, config.input_dim))
        target = int(rng.integers(config.num_classes))
        scores, cache = forward_pass(window, params)
        analytic, _ = backward_pass(cache, params, loglik_score_gradient(scores, target))
        if cfg["corrupt"]:
            if cfg["corrupt"] not in analytic:
                raise ValueError(f"no tensor named {cfg['corrupt']!r} to corrupt")
            analytic[cfg["corrupt"]] = analytic[cfg["corrupt"]] + 1.0

        for name, tensor in params.named_tensors():
            numeric = _numeric_gradient(
                tensor, lambda: frame_log_likelihood(forward_pass(window, params)[0], target),
                cfg["eps"],
            )
            a = analytic[name]
            denom = np.maximum(np.maximum(np.abs(a), np.abs(numeric)), 1e-6)
            err = float(np.max(np.abs(a - numeric) / denom))
            ok = err < cfg["tolerance"]
            report.append([index, name, f"{err:.3e}", "pass" if ok else "FAIL"])
            if not ok:
                all_pass = False
    for row in report:
        print(f"config {row[0]:2d} {row[1]:<16} rel_err {row[2]} {row[3]}")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        _write_csv(out / "gradcheck.csv", ["config", "tensor", "max_rel_error", "status"], report)
        _echo_resolved(out, "check-grad", cfg)
    print("gradient check:", "PASS" if all_pass else "FAIL")
    return 0 if all_pass else 3


def _random_check_config(rng):
    while True:
        window = int(rng.integers(8, 65))
        stages = []
        t = window
        ok = True
        for _ in range(int(rng.integers(1, 4))):
            kw = int(rng.integers(1, min(t, 6) + 1))
            dw = int(rng.integers(1, 4))
            t_conv = (t - kw) // dw + 1
            if t_conv < 1:
                ok = False
                break
            pool = int(rng.integers(1, min(t_conv, 3) + 1))
            t = t_conv // pool
            if t < 1:
                ok = False
                break
            stages.append(StageConfig(kw, dw, int(rng.integers(2, 9)), pool))
        if ok:
            return NetworkConfig(window, 1, tuple(stages),
                                 int(rng.integers(3, 13)), int(rng.integers(2, 7)))


def _numeric_gradient(tensor, loss_fn, eps):
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


# ---------------------------------------------------------------------------
# argument wiring


def build_parser():
    parser = _Parser(prog="rawphone", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, out_required=True):
        p.add_argument("--seed", type=int)
        p.add_argument("--config", help="JSON file with option defaults")
        p.add_argument("--out", required=out_required, help="output directory")

    p = sub.add_parser("synth", help="generate a synthetic tone corpus")
    add_common(p)
    p.add_argument("--train", type=int)
    p.add_argument("--cv", type=int)
    p.add_argument("--test", type=int)
    p.add_argument("--classes", type=int)
    p.add_argument("--base-freq", dest="base_freq", type=float)
    p.add_argument("--freq-step", dest="freq_step", type=float)
    p.add_argument("--harmonic-gain", dest="harmonic_gain", type=float)
    p.add_argument("--tone-amplitude", dest="tone_amplitude", type=float)
    p.add_argument("--noise-sigma", dest="noise_sigma", type=float)
    p.add_argument("--min-duration-ms", dest="min_duration_ms", type=float)
    p.add_argument("--max-duration-ms", dest="max_duration_ms", type=float)
    p.add_argument("--min-segments", dest="min_segments", type=int)
    p.add_argument("--max-segments", dest="max_segments", type=int)
    p.add_argument("--sample-rate", dest="sample_rate", type=int)
    p.add_argument("--cycle-bias", dest="cycle_bias", type=float,
                   help="favor class (k+1) mod K by this factor, forbid self")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="train the network (and CRF transitions)")
    add_common(p)
    p.add_argument("--train-manifest", required=True)
    p.add_argument("--cv-manifest", required=True)
    _add_net_flags(p)
    _add_train_flags(p)
    p.add_argument("--crf-lr", dest="crf_lr", type=float)
    p.add_argument("--crf-epochs", dest="crf_epochs", type=int)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("grid", help="hyperparameter grid search")
    add_common(p)
    p.add_argument("--train-manifest", required=True)
    p.add_argument("--cv-manifest", required=True)
    p.add_argument("--window-ms-list", dest="window_ms_list")
    p.add_argument("--kernel-list", dest="kernel_list")
    p.add_argument("--filters-list", dest="filters_list")
    p.add_argument("--hidden-list", dest="hidden_list")
    p.add_argument("--pool-list", dest="pool_list")
    p.add_argument("--stages-count", dest="stages_count", type=int)
    p.add_argument("--max-configs", dest="max_configs", type=int)
    p.add_argument("--hop-ms", dest="hop_ms", type=float)
    p.add_argument("--feature-dim", dest="feature_dim", type=int)
    p.add_argument("--garbage")
    p.add_argument("--lr", type=float)
    p.add_argument("--epochs", type=int)
    p.add_argument("--patience", type=int)
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("decode", help="decode a manifest with a trained model")
    add_common(p)
    p.add_argument("--manifest", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--decoder", choices=["argmax", "crf", "hmm"])
    p.add_argument("--min-duration", dest="min_duration", type=int)
    p.add_argument("--raw-sample-rate", dest="raw_sample_rate", type=int)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("eval", help="score hypotheses against reference labels")
    add_common(p)
    p.add_argument("--ref-manifest", required=True)
    p.add_argument("--hyp-dir", required=True)
    p.add_argument("--mapping", help="label mapping file: `source target` lines")
    p.add_argument("--strip-garbage", dest="strip_garbage", action="store_true", default=None)
    p.add_argument("--garbage")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("filters", help="export first-layer filter spectra")
    add_common(p)
    p.add_argument("--model", required=True)
    p.add_argument("--n-fft", dest="n_fft", type=int)
    p.add_argument("--sample-rate", dest="sample_rate", type=int)
    p.set_defaults(func=cmd_filters)

    p = sub.add_parser("ablate-pool", help="retrain with 0-3 pooling layers")
    add_common(p)
    p.add_argument("--train-manifest", required=True)
    p.add_argument("--cv-manifest", required=True)
    p.add_argument("--test-manifest", required=True)
    _add_net_flags(p)
    _add_train_flags(p)
    p.add_argument("--min-duration", dest="min_duration", type=int)
    p.set_defaults(func=cmd_ablate_pool)

    p = sub.add_parser("check-grad", help="finite-difference gradient check")
    p.add_argument("--seed", type=int)
    p.add_argument("--config", help="JSON file with option defaults")
    p.add_argument("--out", help="optional output directory for gradcheck.csv")
    p.add_argument("--configs", type=int, help="number of random configurations")
    p.add_argument("--eps", type=float)
    p.add_argument("--tolerance", type=float)
    p.add_argument("--corrupt", help="test hook: perturb this analytic tensor")
    p.set_defaults(func=cmd_check_grad)

    return parser


def _add_net_flags(p):
    p.add_argument("--window-ms", dest="window_ms", type=float)
    p.add_argument("--window-frames", dest="window_frames", type=int)
    p.add_argument("--stages", help="per-stage kernel:shift:pool, comma separated")
    p.add_argument("--filters", type=int)
    p.add_argument("--hidden", type=int)
    p.add_argument("--hop-ms", dest="hop_ms", type=float)
    p.add_argument("--feature-dim", dest="feature_dim", type=int)
    p.add_argument("--garbage")
    p.add_argument("--raw-sample-rate", dest="raw_sample_rate", type=int)


def _add_train_flags(p):
    p.add_argument("--lr", type=float)
    p.add_argument("--epochs", type=int)
    p.add_argument("--patience", type=int)
    p.add_argument("--no-shuffle", dest="shuffle", action="store_false", default=None)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DataError as e:
        print(f"data error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"i/o error: {e}", file=sys.stderr)
        return 2
    except (DivergenceError, FloatingPointError) as e:
        print(f"numeric error: {e}", file=sys.stderr)
        return 3
    except NoLegalPathError as e:
        print(f"data error: {e}", file=sys.stderr)
        return 2
    except ValueError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
