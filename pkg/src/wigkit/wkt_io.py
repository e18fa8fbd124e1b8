"""WKT container format and PGM heatmap emission.

One binary format carries every tensor the toolkit produces: magic
"WGK1", u32 little-endian rank, u32 dims[rank], a count-prefixed block
of f64 metadata, then the complex entries as interleaved re/im f64
little-endian in row-major order.  Writes are deterministic and
round-trips are bit-exact (the metadata floats and payload are stored
verbatim).

The first metadata float is a type tag so signals, phase-space fields,
operator matrices, and rank-4 kernels all live in the same container:

    1 Signal          [tag, h]
    2 PhaseField      [tag, h, x_step, freq_step, cell]
    3 OperatorKernel  [tag, h]
    4 WignerKernel    [tag, h, cell_w, mode(0 apply / 1 direct), interp]

Raw save/load take any complex array and metadata list, so the tags are
a convention of the object-level helpers rather than the container.
"""

from __future__ import annotations

import struct

import numpy as np

from .errors import FormatVersion
from .signal_core import Grid, PhaseField, Signal
from .wigner_kernel import APPLY, DIRECT, OperatorKernel, WignerKernel

MAGIC = b"WGK1"

TAG_SIGNAL = 1.0
TAG_FIELD = 2.0
TAG_OPERATOR = 3.0
TAG_WIGNER_KERNEL = 4.0


# ---------------------------------------------------------------------------
# raw container
# ---------------------------------------------------------------------------

def save_wkt(path: str, values: np.ndarray, meta: list[float]) -> None:
    arr = np.ascontiguousarray(values, dtype=np.complex128)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", arr.ndim))
        fh.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
        fh.write(struct.pack("<I", len(meta)))
        if meta:
            fh.write(struct.pack(f"<{len(meta)}d", *[float(v) for v in meta]))
        inter = np.empty(arr.shape + (2,), dtype="<f8")
        inter[..., 0] = arr.real
        inter[..., 1] = arr.imag
        fh.write(inter.tobytes())


def load_wkt(path: str) -> tuple[np.ndarray, list[float]]:
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 8 or raw[:4] != MAGIC:
        raise FormatVersion(f"{path}: not a WGK1 container")
    off = 4
    (rank,) = struct.unpack_from("<I", raw, off)
    off += 4
    if rank > 8 or len(raw) < off + 4 * rank:
        raise FormatVersion(f"{path}: corrupt WGK1 header")
    dims = struct.unpack_from(f"<{rank}I", raw, off)
    off += 4 * rank
    (nmeta,) = struct.unpack_from("<I", raw, off)
    off += 4
    if len(raw) < off + 8 * nmeta:
        raise FormatVersion(f"{path}: truncated metadata block")
    meta = list(struct.unpack_from(f"<{nmeta}d", raw, off))
    off += 8 * nmeta
    count = int(np.prod(dims, dtype=np.int64)) if rank else 1
    if len(raw) != off + 16 * count:
        raise FormatVersion(f"{path}: payload size mismatch")
    inter = np.frombuffer(raw, dtype="<f8", count=2 * count, offset=off)
    inter = inter.reshape(tuple(dims) + (2,))
    return (inter[..., 0] + 1j * inter[..., 1]).astype(np.complex128), meta


# ---------------------------------------------------------------------------
# object-level helpers
# ---------------------------------------------------------------------------

def save_object(path: str, obj) -> None:
    if isinstance(obj, Signal):
        save_wkt(path, obj.values, [TAG_SIGNAL, obj.grid.h])
    elif isinstance(obj, PhaseField):
        save_wkt(
            path,
            obj.values,
            [TAG_FIELD, obj.grid.h, obj.x_step, obj.freq_step, obj.cell],
        )
    elif isinstance(obj, OperatorKernel):
        save_wkt(path, obj.matrix, [TAG_OPERATOR, obj.grid.h])
    elif isinstance(obj, WignerKernel):
        save_wkt(
            path,
            obj.tensor,
            [
                TAG_WIGNER_KERNEL,
                obj.grid.h,
                obj.cell_w,
                0.0 if obj.mode == APPLY else 1.0,
                1.0 if obj.interpolated else 0.0,
            ],
        )
    else:
        raise FormatVersion(f"cannot serialize {type(obj).__name__}")


def load_object(path: str):
    values, meta = load_wkt(path)
    if not meta:
        raise FormatVersion(f"{path}: missing type tag")
    tag = meta[0]
    if tag == TAG_SIGNAL:
        n = values.shape[0]
        d = values.ndim
        return Signal(Grid(d, n, meta[1]), values)
    if tag == TAG_FIELD:
        n = values.shape[0]
        d = values.ndim // 2
        return PhaseField(
            Grid(d, n, meta[1]), values,
            freq_step=meta[3], x_step=meta[2], cell=meta[4],
        )
    if tag == TAG_OPERATOR:
        return OperatorKernel(Grid(1, values.shape[0], meta[1]), values)
    if tag == TAG_WIGNER_KERNEL:
        mode = APPLY if meta[3] == 0.0 else DIRECT
        return WignerKernel(
            Grid(1, values.shape[0], meta[1]), values, mode, meta[2],
            interpolated=bool(meta[4]),
        )
    raise FormatVersion(f"{path}: unknown type tag {tag}")


# ---------------------------------------------------------------------------
# CSV inputs
# ---------------------------------------------------------------------------

def load_signal_csv(path: str) -> Signal:
    """One sample per line: a real value or "re,im"."""
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = [p for p in line.replace(";", ",").split(",") if p.strip()]
            if len(parts) == 1:
                rows.append(complex(float(parts[0]), 0.0))
            else:
                rows.append(complex(float(parts[0]), float(parts[1])))
    vals = np.asarray(rows, dtype=np.complex128)
    return Signal(Grid(1, vals.shape[0]), vals)


def load_matrix_csv(path: str) -> np.ndarray:
    return np.atleast_2d(np.loadtxt(path, delimiter=",", dtype=float))


# ---------------------------------------------------------------------------
# PGM heatmaps
# ---------------------------------------------------------------------------

def save_pgm(path: str, values: np.ndarray, log: bool = True) -> None:
    """P5 16-bit heatmap of |values|; log mode maps 8 decades onto [0, 1]."""
    mag = np.abs(np.asarray(values))
    if mag.ndim != 2:
        raise FormatVersion("heatmaps take rank-2 arrays")
    peak = float(np.max(mag))
    if peak <= 0.0:
        img = np.zeros_like(mag)
    elif log:
        with np.errstate(divide="ignore"):
            img = np.clip(np.log10(mag / peak) + 8.0, 0.0, 8.0) / 8.0
    else:
        img = mag / peak
    pix = np.round(img * 65535.0).astype(">u2")
    rows, cols = pix.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{cols} {rows}\n65535\n".encode())
        fh.write(pix.tobytes())
