"""Disk formats: signal/annotation CSVs, feature matrices, raw images, models.

Formats are deliberately plain so every artifact can be inspected with a
text editor or `xxd`:

* signal CSV      -- no header, one row per sample, 1-2 numeric columns (mV)
* annotation CSV  -- header ``sample_index,label``
* feature CSV     -- header ``f0..f75,label``, 9 significant digits
* image ``.f32``  -- raw little-endian float32, channel-major, 3*32*32 values
* image ``.pgm``  -- binary 8-bit P5, one file per channel
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .encode import BeatImage
from .errors import DataError, ParseError, ValidationError

FLOAT_FMT = "%.9g"  # 9 significant digits everywhere we write decimals


@dataclass(frozen=True)
class LabelSet:
    """Ordered set of admitted class symbols; position = class id."""

    symbols: tuple = ("N", "S", "V")

    def __post_init__(self):
        if not self.symbols or len(set(self.symbols)) != len(self.symbols):
            raise ValidationError("label symbols must be unique and non-empty")

    def __len__(self):
        return len(self.symbols)

    def __contains__(self, symbol):
        return symbol in self.symbols

    def id_of(self, symbol: str) -> int:
        try:
            return self.symbols.index(symbol)
        except ValueError:
            raise ValidationError(f"unknown label symbol {symbol!r}") from None

    def symbol_of(self, class_id: int) -> str:
        return self.symbols[class_id]


@dataclass
class EcgRecord:
    """Raw multi-lead signal with R-peak positions and one label per peak."""

    leads: list          # list of 1-D float arrays, all the same length
    fs: float            # sampling rate, Hz
    rpeaks: np.ndarray   # strictly increasing sample indices
    labels: list         # one symbol per R-peak

    def __post_init__(self):
        self.leads = [np.asarray(lead, dtype=float) for lead in self.leads]
        self.rpeaks = np.asarray(self.rpeaks, dtype=int)
        if not 1 <= len(self.leads) <= 2:
            raise ValidationError(f"expected 1-2 leads, got {len(self.leads)}")
        if self.fs <= 0:
            raise ValidationError(f"sampling rate must be positive, got {self.fs}")
        n = self.leads[0].shape[0]
        if any(lead.shape[0] != n for lead in self.leads):
            raise ValidationError("all leads must have the same length")
        if len(self.labels) != len(self.rpeaks):
            raise ValidationError(
                f"{len(self.labels)} labels for {len(self.rpeaks)} R-peaks"
            )
        if len(self.rpeaks) and (self.rpeaks[0] < 0 or self.rpeaks[-1] >= n):
            raise ValidationError("R-peak index outside the signal")
        if np.any(np.diff(self.rpeaks) <= 0):
            raise ValidationError("R-peak indices must be strictly increasing")

    @property
    def n_samples(self) -> int:
        return self.leads[0].shape[0]


# ---------------------------------------------------------------------------
# signal + annotation CSVs
# ---------------------------------------------------------------------------

def read_signal_csv(path) -> np.ndarray:
    """Read a headerless numeric CSV into an (n_samples, n_leads) array."""
    rows = []
    width = None
    with open(path, newline="") as fh:
        for line_no, row in enumerate(csv.reader(fh), start=1):
            if not row:
                continue
            try:
                values = [float(v) for v in row]
            except ValueError:
                raise ParseError(path, line_no, f"non-numeric sample row {row!r}")
            if width is None:
                width = len(values)
                if not 1 <= width <= 2:
                    raise ParseError(path, line_no, f"expected 1-2 columns, got {width}")
            elif len(values) != width:
                raise ParseError(path, line_no, f"expected {width} columns, got {len(values)}")
            rows.append(values)
    if not rows:
        raise DataError(f"{path}: empty signal file")
    return np.asarray(rows)


def read_annotations_csv(path) -> list:
    """Read ``sample_index,label`` rows; returns [(index, symbol), ...] unsorted."""
    out = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:2]] != ["sample_index", "label"]:
            raise ParseError(path, 1, "expected header 'sample_index,label'")
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) < 2:
                raise ParseError(path, line_no, f"expected 2 columns, got {len(row)}")
            try:
                idx = int(row[0])
            except ValueError:
                raise ParseError(path, line_no, f"non-integer sample index {row[0]!r}")
            out.append((idx, row[1].strip()))
    return out


def write_signal_csv(path, samples: np.ndarray) -> None:
    samples = np.asarray(samples, dtype=float)
    if samples.ndim == 1:
        samples = samples[:, None]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for row in samples:
            writer.writerow([FLOAT_FMT % v for v in row])


def write_annotations_csv(path, rpeaks, labels) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["sample_index", "label"])
        for idx, sym in zip(rpeaks, labels):
            writer.writerow([int(idx), sym])


def load_record(signal_path, annotation_path, fs: float, lead_select: int | None = 0,
                label_set: LabelSet = LabelSet(), strict: bool = False):
    """Load a record from a signal CSV plus an annotation CSV.

    Annotations are sorted by sample index. Beats whose label is not in
    ``label_set`` are dropped and counted (or rejected outright with
    ``strict``). Returns ``(EcgRecord, skipped_label_count)``.
    """
    samples = read_signal_csv(signal_path)
    annotations = sorted(read_annotations_csv(annotation_path), key=lambda a: a[0])

    rpeaks, labels, skipped = [], [], 0
    for idx, sym in annotations:
        if sym not in label_set:
            if strict:
                raise ValidationError(
                    f"{annotation_path}: label {sym!r} not in {label_set.symbols}"
                )
            skipped += 1
            continue
        rpeaks.append(idx)
        labels.append(sym)

    if lead_select is None:
        leads = [samples[:, i] for i in range(samples.shape[1])]
    else:
        if not 0 <= lead_select < samples.shape[1]:
            raise ValidationError(
                f"lead {lead_select} not available ({samples.shape[1]} leads)"
            )
        leads = [samples[:, lead_select]]

    record = EcgRecord(leads=leads, fs=fs, rpeaks=np.asarray(rpeaks, dtype=int),
                       labels=labels)
    return record, skipped


# ---------------------------------------------------------------------------
# feature matrices
# ---------------------------------------------------------------------------

def save_feature_matrix(rows, labels, path) -> None:
    """Write rows + integer labels as CSV with header ``f0..f<d-1>,label``."""
    rows = np.asarray(rows, dtype=float)
    labels = np.asarray(labels, dtype=int)
    if rows.ndim != 2:
        raise ValidationError(f"expected a 2-D feature matrix, got ndim={rows.ndim}")
    if rows.shape[0] != labels.shape[0]:
        raise ValidationError(
            f"{rows.shape[0]} rows but {labels.shape[0]} labels"
        )
    header = [f"f{i}" for i in range(rows.shape[1])] + ["label"]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row, label in zip(rows, labels):
            writer.writerow([FLOAT_FMT % v for v in row] + [int(label)])


def load_feature_matrix(path):
    """Inverse of save_feature_matrix; returns (rows, labels)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[-1] != "label" or not header[0].startswith("f"):
            raise ParseError(path, 1, "expected header 'f0..fN,label'")
        dim = len(header) - 1
        rows, labels = [], []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != dim + 1:
                raise ParseError(path, line_no, f"expected {dim + 1} columns, got {len(row)}")
            try:
                rows.append([float(v) for v in row[:dim]])
                labels.append(int(row[dim]))
            except ValueError:
                raise ParseError(path, line_no, "non-numeric value")
    return np.asarray(rows, dtype=float).reshape(len(rows), dim), np.asarray(labels, dtype=int)


# ---------------------------------------------------------------------------
# images
# ---------------------------------------------------------------------------

_CHANNEL_NAMES = ("gasf", "mtf", "rp")


def export_image(img: BeatImage, stem) -> None:
    """Write one beat image as ``<stem>.f32`` plus three 8-bit PGMs.

    The .f32 file is the raw float32 channel stack (channel-major, C order,
    little endian). Each PGM maps its own channel's min/max linearly onto
    0..255; a constant channel maps to 255 by convention.
    """
    stack = img.as_array().astype("<f4")
    if stack.ndim != 3 or stack.shape[0] != 3 or stack.shape[1] != stack.shape[2]:
        raise ValidationError(f"expected 3 square channels, got shape {stack.shape}")
    stem = str(stem)
    with open(stem + ".f32", "wb") as fh:
        fh.write(stack.tobytes())
    for name, channel in zip(_CHANNEL_NAMES, stack):
        write_pgm(f"{stem}_{name}.pgm", channel)


def load_image_f32(path, size: int = 32) -> np.ndarray:
    """Read a ``.f32`` file back into a float32 (3, size, size) array."""
    with open(path, "rb") as fh:
        raw = fh.read()
    expected = 3 * size * size * 4
    if len(raw) != expected:
        raise DataError(f"{path}: expected {expected} bytes, got {len(raw)}")
    return np.frombuffer(raw, dtype="<f4").reshape(3, size, size).copy()


def write_pgm(path, channel: np.ndarray) -> None:
    channel = np.asarray(channel, dtype=float)
    lo, hi = channel.min(), channel.max()
    if hi > lo:
        pixels = np.rint((channel - lo) / (hi - lo) * 255.0).astype(np.uint8)
    else:
        pixels = np.full(channel.shape, 255, dtype=np.uint8)  # degenerate range
    h, w = channel.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(pixels.tobytes())


def read_pgm(path) -> np.ndarray:
    """Read a binary P5 PGM written by write_pgm."""
    with open(path, "rb") as fh:
        magic = fh.readline().strip()
        if magic != b"P5":
            raise DataError(f"{path}: not a binary PGM")
        w, h = (int(v) for v in fh.readline().split())
        maxval = int(fh.readline())
        if maxval != 255:
            raise DataError(f"{path}: expected maxval 255, got {maxval}")
        data = fh.read(w * h)
    if len(data) != w * h:
        raise DataError(f"{path}: truncated pixel data")
    return np.frombuffer(data, dtype=np.uint8).reshape(h, w).copy()
