"""Dataset ingestion and generation: CSV, PGM images, synthetic Gaussian
matrices, standardization, and vertical feature partitioning."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import as_matrix


def load_csv(path, has_header: bool = False, standardize: bool = False) -> np.ndarray:
    """Parse a comma-separated numeric file into an n x m matrix.

    Plain decimal literals only; no quoting support (a double quote anywhere
    is an error). Row/column positions in error messages are 1-based and
    count the header line if present.
    """
    with open(path, "r", encoding="utf-8") as fh:
        raw_lines = fh.read().split("\n")
    rows: list[list[float]] = []
    width: int | None = None
    for lineno, line in enumerate(raw_lines, start=1):
        if line == "" and lineno == len(raw_lines):
            continue  # trailing newline
        if '"' in line:
            raise ValueError(f"quoted field at line {lineno}: quoting is not supported")
        if has_header and lineno == 1:
            continue
        cells = line.split(",")
        if width is None:
            width = len(cells)
        elif len(cells) != width:
            raise ValueError(f"ragged row at line {lineno}: expected {width} cells, got {len(cells)}")
        parsed = []
        for col, cell in enumerate(cells, start=1):
            try:
                value = float(cell)
            except ValueError:
                raise ValueError(f"non-numeric cell at row {lineno}, col {col}: {cell!r}") from None
            if not np.isfinite(value):
                raise ValueError(f"non-numeric cell at row {lineno}, col {col}: {cell!r}")
            parsed.append(value)
        rows.append(parsed)
    if not rows:
        raise ValueError("empty file")
    X = np.array(rows, dtype=float)
    return standardize_columns(X) if standardize else X


def standardize_columns(X) -> np.ndarray:
    """Shift each column to mean 0 and scale to unit population variance.
    Constant columns stay at 0 after centering."""
    X = as_matrix(X, name="X")
    mean = X.mean(axis=0)
    std = X.std(axis=0)  # population (1/n) variance
    out = X - mean
    nonzero = std > 0.0
    out[:, nonzero] = out[:, nonzero] / std[nonzero]
    return out


def write_csv(path, X) -> None:
    """Write a matrix as plain CSV using shortest round-trip float literals."""
    X = as_matrix(X, name="X")
    with open(path, "w", encoding="utf-8") as fh:
        for row in X:
            fh.write(",".join(repr(float(v)) for v in row))
            fh.write("\n")


def synth_single_gaussian(n: int, m: int, seed: int) -> np.ndarray:
    """Standard-normal pdf values at uniform draws from (-3, 3), one column
    per feature. All entries lie in (0, 1/sqrt(2*pi)]."""
    if n < 1 or m < 1:
        raise ValueError("n and m must be >= 1")
    rng = np.random.default_rng(seed)
    X = np.empty((n, m))
    norm = 1.0 / np.sqrt(2.0 * np.pi)
    for j in range(m):
        x = rng.uniform(-3.0, 3.0, size=n)
        X[:, j] = norm * np.exp(-0.5 * x * x)
    return X


def synth_mixture_gaussian(n: int, m: int, seed: int) -> np.ndarray:
    """Per-feature Gaussian pdf values with integer mu, sigma drawn from
    {0, ..., m}; sigma is resampled until >= 1 so the density is defined."""
    if n < 1 or m < 1:
        raise ValueError("n and m must be >= 1")
    rng = np.random.default_rng(seed)
    X = np.empty((n, m))
    for j in range(m):
        mu = float(rng.integers(0, m + 1))
        sigma = float(rng.integers(0, m + 1))
        while sigma < 1.0:
            sigma = float(rng.integers(0, m + 1))
        x = rng.uniform(mu - 3.0 * sigma, mu + 3.0 * sigma, size=n)
        z = (x - mu) / sigma
        X[:, j] = np.exp(-0.5 * z * z) / (np.sqrt(2.0 * np.pi) * sigma)
    return X


def _next_token(data: bytes, pos: int) -> tuple[bytes, int]:
    # Skip whitespace and '#' comments, then read one whitespace-delimited token.
    n = len(data)
    while pos < n:
        b = data[pos]
        if b in b" \t\r\n":
            pos += 1
        elif b == ord("#"):
            while pos < n and data[pos] not in b"\r\n":
                pos += 1
        else:
            break
    if pos >= n:
        raise ValueError(f"truncated header at byte {pos}")
    start = pos
    while pos < n and data[pos] not in b" \t\r\n":
        pos += 1
    return data[start:pos], pos


def load_pgm(path) -> np.ndarray:
    """Read a P2 (ASCII) or P5 (binary) PGM file as a rows x cols matrix
    scaled to [0, 1] by the file's maxval."""
    with open(path, "rb") as fh:
        data = fh.read()
    magic, pos = _next_token(data, 0)
    if magic not in (b"P2", b"P5"):
        raise ValueError(f"bad magic at byte 0: {magic!r}")
    dims = []
    for _ in range(3):
        token, pos = _next_token(data, pos)
        try:
            dims.append(int(token))
        except ValueError:
            raise ValueError(f"bad header value at byte {pos - len(token)}: {token!r}") from None
    width, height, maxval = dims
    if width < 1 or height < 1:
        raise ValueError(f"bad dimensions at byte {pos}: {width}x{height}")
    if not 1 <= maxval <= 65535:
        raise ValueError(f"bad maxval at byte {pos}: {maxval}")
    count = width * height
    if magic == b"P2":
        values = np.empty(count, dtype=float)
        for i in range(count):
            token, pos = _next_token(data, pos)
            try:
                v = int(token)
            except ValueError:
                raise ValueError(f"bad sample at byte {pos - len(token)}: {token!r}") from None
            if v > maxval:
                raise ValueError(f"sample exceeds maxval at byte {pos - len(token)}")
            values[i] = v
    else:
        pos += 1  # single whitespace byte after maxval
        bytes_per = 1 if maxval < 256 else 2
        need = count * bytes_per
        if len(data) - pos < need:
            raise ValueError(f"truncated payload at byte {len(data)}: need {need} bytes from {pos}")
        raster = data[pos : pos + need]
        dtype = np.uint8 if bytes_per == 1 else np.dtype(">u2")
        values = np.frombuffer(raster, dtype=dtype).astype(float)
        if np.any(values > maxval):
            raise ValueError(f"sample exceeds maxval in raster starting at byte {pos}")
    return (values / float(maxval)).reshape(height, width)


def write_pgm(path, X, maxval: int = 255, binary: bool = True) -> None:
    """Write a [0, 1]-valued matrix as a PGM image (P5 by default)."""
    X = as_matrix(X, name="X")
    if not 1 <= maxval <= 65535:
        raise ValueError("maxval out of range")
    q = np.clip(np.rint(np.clip(X, 0.0, 1.0) * maxval), 0, maxval).astype(np.int64)
    height, width = q.shape
    header = f"{'P5' if binary else 'P2'}\n{width} {height}\n{maxval}\n"
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        if binary:
            dtype = np.uint8 if maxval < 256 else np.dtype(">u2")
            fh.write(q.astype(dtype).tobytes())
        else:
            body = "\n".join(" ".join(str(v) for v in row) for row in q)
            fh.write(body.encode("ascii"))
            fh.write(b"\n")


@dataclass(frozen=True)
class PartitionPlan:
    """Contiguous column ranges assigning features to clients, in order.
    ``permutation`` records the column shuffle applied beforehand, if any."""

    p: int
    ranges: tuple[tuple[int, int], ...]
    permutation: tuple[int, ...] | None = None


def partition_features(X, p: int, shuffle_seed: int | None = None) -> tuple[PartitionPlan, list[np.ndarray]]:
    """Split columns across ``p`` clients: the first (m mod p) clients get
    ceil(m/p) columns, the rest floor(m/p). With ``shuffle_seed`` the columns
    are permuted (seeded) before splitting."""
    X = as_matrix(X, name="X")
    m = X.shape[1]
    if p < 1:
        raise ValueError("p must be >= 1")
    if p > m:
        raise ValueError("more clients than features")
    perm: tuple[int, ...] | None = None
    if shuffle_seed is not None:
        order = np.random.default_rng(shuffle_seed).permutation(m)
        X = X[:, order]
        perm = tuple(int(i) for i in order)
    base, extra = divmod(m, p)
    ranges = []
    start = 0
    for i in range(p):
        size = base + (1 if i < extra else 0)
        ranges.append((start, start + size))
        start += size
    blocks = [X[:, s:e].copy() for s, e in ranges]
    return PartitionPlan(p=p, ranges=tuple(ranges), permutation=perm), blocks
