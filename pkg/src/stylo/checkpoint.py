"""Versioned binary checkpoint container.

Layout: 8-byte magic, uint32 format version, uint64 header length, UTF-8
JSON header (config, vocabulary, provenance, tensor manifest), raw
little-endian float64 tensor payloads in manifest order (parameters, then
Adam moments when present), and a trailing CRC32 of everything before it.

Floats travel as raw bytes, so save -> load -> save is byte-identical and a
loaded model generates exactly what the in-memory one would.
"""
import io
import json
import os
import struct
import zlib
from dataclasses import dataclass

import numpy as np

from .config import TrainConfig
from .corpus import Vocabulary
from .errors import IntegrityError
from .nn.params import ModelParams
from .optim import OptimState

MAGIC = b"STYLOCKP"
FORMAT_VERSION = 1


@dataclass
class Checkpoint:
    config: TrainConfig
    vocab: Vocabulary
    params: ModelParams
    optim_state: OptimState
    step: int
    pad_char: str
    provenance: dict
    format_version: int = FORMAT_VERSION


def _header_dict(ckpt: Checkpoint, manifest) -> dict:
    return {
        "arch": ckpt.params.arch,
        "hidden": ckpt.params.hidden,
        "vocab_size": ckpt.params.vocab_size,
        "vocab_chars": "".join(ckpt.vocab.chars),
        "pad_char": ckpt.pad_char,
        "step": ckpt.step,
        "config": ckpt.config.to_dict(),
        "provenance": ckpt.provenance,
        "optim_t": ckpt.optim_state.t,
        "optim_algorithm": ckpt.optim_state.algorithm,
        "tensors": [{"name": name, "shape": list(shape)} for name, shape in manifest],
    }


def save_checkpoint(ckpt: Checkpoint, path):
    """Serialize to `path` atomically (write temp file, then rename)."""
    ckpt.params.check_finite()
    payload_arrays = list(ckpt.params.tensors())
    for prefix, moments in (("m", ckpt.optim_state.m), ("v", ckpt.optim_state.v)):
        for name, _ in ckpt.params.tensors():
            if name in moments:
                payload_arrays.append((f"{prefix}:{name}", moments[name]))
    manifest = [(name, arr.shape) for name, arr in payload_arrays]

    buf = io.BytesIO()
    buf.write(MAGIC)
    buf.write(struct.pack("<I", FORMAT_VERSION))
    header = json.dumps(_header_dict(ckpt, manifest), sort_keys=True,
                        separators=(",", ":"), ensure_ascii=False).encode("utf-8")
    buf.write(struct.pack("<Q", len(header)))
    buf.write(header)
    for _, arr in payload_arrays:
        buf.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())
    data = buf.getvalue()
    crc = zlib.crc32(data) & 0xFFFFFFFF

    tmp = str(path) + ".tmp"
    with open(tmp, "wb") as fh:
        fh.write(data)
        fh.write(struct.pack("<I", crc))
    os.replace(tmp, path)


def load_checkpoint(path) -> Checkpoint:
    """Read and verify a checkpoint; refuses unknown versions and bad CRCs."""
    from .errors import DataError

    try:
        with open(path, "rb") as fh:
            blob = fh.read()
    except OSError as exc:
        raise DataError(f"cannot read checkpoint file {path}: {exc}") from exc
    if len(blob) < len(MAGIC) + 4 + 8 + 4:
        raise IntegrityError(f"checkpoint {path} is truncated")
    if blob[: len(MAGIC)] != MAGIC:
        raise IntegrityError(f"checkpoint {path} has wrong magic bytes")
    stored_crc = struct.unpack("<I", blob[-4:])[0]
    actual_crc = zlib.crc32(blob[:-4]) & 0xFFFFFFFF
    if stored_crc != actual_crc:
        raise IntegrityError(
            f"checkpoint {path} failed CRC check "
            f"(stored {stored_crc:08x}, computed {actual_crc:08x})"
        )
    off = len(MAGIC)
    version = struct.unpack_from("<I", blob, off)[0]
    off += 4
    if version != FORMAT_VERSION:
        raise IntegrityError(
            f"checkpoint {path} has format version {version}; this build reads {FORMAT_VERSION}"
        )
    header_len = struct.unpack_from("<Q", blob, off)[0]
    off += 8
    try:
        header = json.loads(blob[off : off + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise IntegrityError(f"checkpoint {path} has a corrupt header: {exc}") from exc
    off += header_len

    tensors = {}
    for entry in header["tensors"]:
        shape = tuple(entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        nbytes = count * 8
        arr = np.frombuffer(blob, dtype="<f8", count=count, offset=off).reshape(shape)
        tensors[entry["name"]] = arr.astype(np.float64)  # writable copy
        off += nbytes
    if off != len(blob) - 4:
        raise IntegrityError(f"checkpoint {path} payload length mismatch")

    config = TrainConfig.from_dict(header["config"])
    params = ModelParams(
        header["arch"], header["hidden"], header["vocab_size"],
        {n: tensors[n] for n in ModelParams.tensor_names(header["arch"])},
    )
    params.check_finite()
    state = OptimState(params, header["optim_algorithm"])
    state.t = header["optim_t"]
    if state.algorithm == "adam":
        for name, _ in params.tensors():
            state.m[name] = tensors[f"m:{name}"]
            state.v[name] = tensors[f"v:{name}"]
    return Checkpoint(
        config=config,
        vocab=Vocabulary(header["vocab_chars"]),
        params=params,
        optim_state=state,
        step=header["step"],
        pad_char=header["pad_char"],
        provenance=header["provenance"],
        format_version=version,
    )
