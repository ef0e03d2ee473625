"""Model file container.

Layout: magic bytes ``RCN1``, a little-endian uint32 byte length, a UTF-8
JSON header (architecture, label alphabet, metadata, ordered tensor
descriptors), then each tensor's raw float32 little-endian values
concatenated in declared order. Writing the same model twice produces
byte-identical files; a save/load/save round trip is bitwise exact.
"""

import json
import struct

import numpy as np

from .errors import DataError
from .net import ConvLayerParams, NetworkConfig, NetworkParams

MAGIC = b"RCN1"


def save_model(path, params, alphabet, metadata=None, transitions=None):
    """Write params (and optionally the CRF transition matrix) to `path`."""
    tensors = list(params.named_tensors())
    if transitions is not None:
        k = params.config.num_classes
        a = np.asarray(transitions)
        if a.shape != (k, k):
            raise ValueError(f"transition matrix must be {k} x {k}, got {a.shape}")
        tensors.append(("crf.A", a))
    header = {
        "config": params.config.to_dict(),
        "alphabet": list(alphabet),
        "metadata": dict(metadata or {}),
        "tensors": [{"name": n, "shape": list(t.shape)} for n, t in tensors],
    }
    blob = json.dumps(header, separators=(",", ":"), ensure_ascii=True).encode("utf-8")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<I", len(blob)))
        f.write(blob)
        for _name, t in tensors:
            f.write(np.ascontiguousarray(t, dtype="<f4").tobytes())


def load_model(path):
    """Read a model file.

    Returns (params, alphabet, metadata, transitions) with transitions
    None when the file carries no ``crf.A`` tensor.
    """
    with open(path, "rb") as f:
        data = f.read()
    if data[:4] != MAGIC:
        raise DataError(f"{path}: not a model file (bad magic {data[:4]!r})")
    (hlen,) = struct.unpack("<I", data[4:8])
    try:
        header = json.loads(data[8 : 8 + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise DataError(f"{path}: corrupt model header: {e}") from e

    config = NetworkConfig.from_dict(header["config"])
    offset = 8 + hlen
    arrays = {}
    for desc in header["tensors"]:
        n = int(np.prod(desc["shape"], dtype=np.int64)) if desc["shape"] else 1
        end = offset + 4 * n
        if end > len(data):
            raise DataError(f"{path}: truncated tensor {desc['name']}")
        arrays[desc["name"]] = np.frombuffer(data[offset:end], dtype="<f4").reshape(
            desc["shape"]
        ).copy()
        offset = end
    if offset != len(data):
        raise DataError(f"{path}: {len(data) - offset} trailing bytes after tensors")

    conv = []
    for i, stage in enumerate(config.stages):
        try:
            w = arrays[f"stage{i}.weight"]
            b = arrays[f"stage{i}.bias"]
        except KeyError as e:
            raise DataError(f"{path}: missing tensor {e}") from e
        conv.append(ConvLayerParams(w, b, stage.kernel_width, stage.shift))
    try:
        params = NetworkParams(
            config,
            conv,
            arrays["hidden.weight"],
            arrays["hidden.bias"],
            arrays["output.weight"],
            arrays["output.bias"],
        )
    except KeyError as e:
        raise DataError(f"{path}: missing tensor {e}") from e
    transitions = arrays.get("crf.A")
    return params, list(header["alphabet"]), dict(header["metadata"]), transitions
