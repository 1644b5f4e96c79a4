"""Binary checkpoint format: weights, temporal factors, optimizer buffers.

Layout (little-endian): magic, version, config digest (sha256 hex), weight
dtype code, layer count and dims, raw weight bytes, factors, then optional
optimizer buffers. Round trips are bitwise exact.
"""

from __future__ import annotations

import struct

import numpy as np

from .graph import NetworkParams
from .optim import ADAMW, SGD_MOMENTUM, OptimizerState
from .two import TemporalFactors

MAGIC = b"SGCKPT01"
VERSION = 1

_DTYPES = {0: np.dtype("<f4"), 1: np.dtype("<f8")}
_DTYPE_CODES = {np.dtype(np.float32): 0, np.dtype(np.float64): 1}
_OPT_CODES = {None: 0, SGD_MOMENTUM: 1, ADAMW: 2}


class CheckpointError(ValueError):
    """Malformed or truncated checkpoint file."""


def _write_array(fh, a: np.ndarray) -> None:
    fh.write(np.ascontiguousarray(a, dtype=a.dtype.newbyteorder("<")).tobytes())


def save_checkpoint(params: NetworkParams, factors: TemporalFactors,
                    optimizer_state: OptimizerState | None, path,
                    config_digest: str = "0" * 64) -> None:
    dims = [(w.shape[0], w.shape[1]) for w in params.weights]
    dtype_code = _DTYPE_CODES[params.weights[0].dtype]
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", VERSION))
        fh.write(config_digest.encode("ascii"))
        fh.write(struct.pack("<BI", dtype_code, len(dims)))
        for rows, cols in dims:
            fh.write(struct.pack("<II", rows, cols))
        for w in params.weights:
            _write_array(fh, w)
        fh.write(struct.pack("<Id?", len(factors.f), factors.beta,
                             factors.frozen))
        _write_array(fh, factors.f.astype("<f8"))
        if optimizer_state is None or not optimizer_state.bufs:
            fh.write(struct.pack("<B", 0))
            return
        fh.write(struct.pack("<B", _OPT_CODES[optimizer_state.kind]))
        fh.write(struct.pack("<Q", optimizer_state.step))
        fh.write(struct.pack("<5d", optimizer_state.momentum,
                             optimizer_state.beta1, optimizer_state.beta2,
                             optimizer_state.eps, optimizer_state.weight_decay))
        for buf in optimizer_state.bufs:
            _write_array(fh, buf)
        for buf in optimizer_state.bufs2:
            _write_array(fh, buf)


def _read_exact(fh, count: int, what: str) -> bytes:
    buf = fh.read(count)
    if len(buf) != count:
        raise CheckpointError(f"truncated checkpoint while reading {what}")
    return buf


def _read_array(fh, shape, dtype, what) -> np.ndarray:
    n = int(np.prod(shape)) * dtype.itemsize
    return np.frombuffer(_read_exact(fh, n, what), dtype=dtype).reshape(shape).copy()


def load_checkpoint(path) -> tuple[NetworkParams, TemporalFactors,
                                   OptimizerState | None, str]:
    """Returns (params, factors, optimizer_state, config_digest)."""
    with open(path, "rb") as fh:
        if _read_exact(fh, 8, "magic") != MAGIC:
            raise CheckpointError("bad checkpoint magic")
        (version,) = struct.unpack("<I", _read_exact(fh, 4, "version"))
        if version != VERSION:
            raise CheckpointError(f"unsupported checkpoint version {version}")
        digest = _read_exact(fh, 64, "config digest").decode("ascii")
        dtype_code, n_layers = struct.unpack("<BI", _read_exact(fh, 5, "header"))
        if dtype_code not in _DTYPES:
            raise CheckpointError(f"unknown dtype code {dtype_code}")
        dtype = _DTYPES[dtype_code]
        dims = [struct.unpack("<II", _read_exact(fh, 8, "layer dims"))
                for _ in range(n_layers)]
        weights = [_read_array(fh, d, dtype, f"weights[{i}]")
                   for i, d in enumerate(dims)]
        t, beta, frozen = struct.unpack("<Id?", _read_exact(fh, 13, "factors"))
        f = _read_array(fh, (t,), np.dtype("<f8"), "factor values")
        factors = TemporalFactors(f=f, beta=beta, frozen=frozen)
        (opt_code,) = struct.unpack("<B", _read_exact(fh, 1, "optimizer tag"))
        opt = None
        if opt_code:
            kind = {1: SGD_MOMENTUM, 2: ADAMW}.get(opt_code)
            if kind is None:
                raise CheckpointError(f"unknown optimizer code {opt_code}")
            (step,) = struct.unpack("<Q", _read_exact(fh, 8, "optimizer step"))
            mom, b1, b2, eps, wd = struct.unpack(
                "<5d", _read_exact(fh, 40, "optimizer hyperparameters"))
            bufs = [_read_array(fh, d, dtype, "optimizer buffer") for d in dims]
            bufs2 = []
            if kind == ADAMW:
                bufs2 = [_read_array(fh, d, dtype, "optimizer buffer")
                         for d in dims]
            opt = OptimizerState(kind=kind, momentum=mom, beta1=b1, beta2=b2,
                                 eps=eps, weight_decay=wd, step=step,
                                 bufs=bufs, bufs2=bufs2)
        return NetworkParams(weights), factors, opt, digest
