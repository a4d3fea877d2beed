"""Binary model files: magic, version, spec JSON, raw float64 LE vector,
sha256 trailer. Round-trips are bit-exact."""

from __future__ import annotations

import hashlib
import json
import struct
from pathlib import Path

import numpy as np

from .spec import NetworkSpec, ParamStore

MAGIC = b"HPTNET\x00\x01"
FORMAT_VERSION = 1


class ModelFileError(RuntimeError):
    pass


def save_model(path: str | Path, params: ParamStore) -> None:
    spec_blob = json.dumps(params.spec.to_dict(), sort_keys=True).encode()
    vec = np.ascontiguousarray(params.vector, dtype="<f8")
    body = (
        MAGIC
        + struct.pack("<I", FORMAT_VERSION)
        + struct.pack("<I", len(spec_blob))
        + spec_blob
        + struct.pack("<Q", vec.size)
        + vec.tobytes()
    )
    digest = hashlib.sha256(body).digest()
    Path(path).write_bytes(body + digest)


def load_model(path: str | Path) -> ParamStore:
    raw = Path(path).read_bytes()
    if len(raw) < len(MAGIC) + 16 + 32:
        raise ModelFileError(f"{path}: truncated model file")
    body, digest = raw[:-32], raw[-32:]
    if hashlib.sha256(body).digest() != digest:
        raise ModelFileError(f"{path}: checksum mismatch")
    if body[: len(MAGIC)] != MAGIC:
        raise ModelFileError(f"{path}: bad magic")
    off = len(MAGIC)
    (version,) = struct.unpack_from("<I", body, off)
    off += 4
    if version != FORMAT_VERSION:
        raise ModelFileError(f"{path}: unsupported format version {version}")
    (spec_len,) = struct.unpack_from("<I", body, off)
    off += 4
    spec = NetworkSpec.from_dict(json.loads(body[off : off + spec_len].decode()))
    off += spec_len
    (n,) = struct.unpack_from("<Q", body, off)
    off += 8
    vec = np.frombuffer(body, dtype="<f8", count=n, offset=off).astype(np.float64)
    return ParamStore(spec, vec)


def params_digest(params: ParamStore) -> str:
    h = hashlib.sha256()
    h.update(json.dumps(params.spec.to_dict(), sort_keys=True).encode())
    h.update(np.ascontiguousarray(params.vector, dtype="<f8").tobytes())
    return h.hexdigest()
