"""PGM previews, raw CSV images and Matrix Market export."""
from __future__ import annotations

import os

import numpy as np


def write_pgm(path, image, vmin=None, vmax=None):
    """Write an 8-bit ASCII (P2) preview, linearly scaled to ``[0, 255]``.

    Boolean images map to 0/255.
    """
    img = np.asarray(image)
    if img.dtype == bool:
        levels = img.astype(np.int64) * 255
    else:
        img = img.astype(float)
        lo = np.nanmin(img) if vmin is None else vmin
        hi = np.nanmax(img) if vmax is None else vmax
        span = hi - lo if hi > lo else 1.0
        levels = np.clip(np.rint((img - lo) / span * 255), 0, 255).astype(np.int64)
    rows, cols = levels.shape
    with open(path, "w") as fh:
        fh.write(f"P2\n{cols} {rows}\n255\n")
        for line in levels:
            fh.write(" ".join(map(str, line)) + "\n")


def read_pgm(path) -> np.ndarray:
    """Read a P2 (ASCII) or P5 (binary 8-bit) image as an int array."""
    with open(path, "rb") as fh:
        raw = fh.read()
    magic = raw[:2]
    if magic not in (b"P2", b"P5"):
        raise ValueError(f"{path}: not a P2/P5 PGM file")
    tokens = []
    pos = 2
    # header: width, height, maxval, with '#' comments allowed
    while len(tokens) < 3:
        while raw[pos:pos + 1].isspace():
            pos += 1
        if raw[pos:pos + 1] == b"#":
            pos = raw.index(b"\n", pos) + 1
            continue
        start = pos
        while not raw[pos:pos + 1].isspace():
            pos += 1
        tokens.append(int(raw[start:pos]))
    cols, rows, _ = tokens
    if magic == b"P5":
        data = np.frombuffer(raw[pos + 1:pos + 1 + rows * cols], dtype=np.uint8)
    else:
        body = b"\n".join(l.split(b"#")[0] for l in raw[pos:].splitlines())
        data = np.array(body.split(), dtype=np.int64)
    if data.size != rows * cols:
        raise ValueError(f"{path}: expected {rows * cols} pixels, found {data.size}")
    return data.reshape(rows, cols).astype(np.int64)


def read_mask_pgm(path) -> np.ndarray:
    return read_pgm(path) > 0


def write_csv_image(path, image):
    """Raw reals, one image row per line; ``repr`` round-trips exactly."""
    img = np.atleast_2d(np.asarray(image, dtype=float))
    with open(path, "w") as fh:
        for row in img:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def read_csv_image(path) -> np.ndarray:
    with open(path) as fh:
        rows = [[float(v) for v in line.split(",")] for line in fh if line.strip()]
    return np.array(rows, dtype=float)


def write_csv_table(path, header, rows):
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_vector_csv(path, vec):
    with open(path, "w") as fh:
        for v in np.asarray(vec, dtype=float):
            fh.write(repr(float(v)) + "\n")


def read_vector_csv(path) -> np.ndarray:
    with open(path) as fh:
        return np.array([float(line) for line in fh if line.strip()])


def write_matrix_market(path, matrix):
    import scipy.io

    scipy.io.mmwrite(os.fspath(path), matrix, comment="lsfm measurement operator")
