"""Dataset ingestion, splitting, normalization, and feature masking.

A :class:`Dataset` is a dense float matrix (rows = instances, columns =
features) with integer class labels in ``[0, n_classes)``.  Datasets are
immutable after construction and shareable across threads.

Feature subsets are expressed as boolean masks of length ``n_features``
(bit ``i`` set = keep feature ``i``).  Masks travel through the codebase as
plain numpy bool arrays; helpers below pack them to hex for output files.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

#: Boolean feature-selection genotype of fixed length ``n_features``.
BitMask = np.ndarray


class DataError(ValueError):
    """Raised when a dataset file or specification is invalid."""


@dataclass(frozen=True)
class Dataset:
    """Immutable feature matrix plus per-row class indices.

    ``n_classes`` is the size of the label space, which may exceed the
    number of classes actually present in a row subset (e.g. a small test
    split); labels are always validated against it.
    """

    features: np.ndarray
    labels: np.ndarray
    n_classes: int
    name: str = ""

    def __post_init__(self) -> None:
        features = np.ascontiguousarray(self.features, dtype=np.float64)
        labels = np.ascontiguousarray(self.labels, dtype=np.int64)
        if features.ndim != 2:
            raise DataError("features must be a 2-D matrix")
        if labels.ndim != 1 or labels.shape[0] != features.shape[0]:
            raise DataError("labels must align with feature rows")
        if labels.size and (labels.min() < 0 or labels.max() >= self.n_classes):
            raise DataError("labels must lie in [0, n_classes)")
        features.flags.writeable = False
        labels.flags.writeable = False
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)

    @property
    def n_instances(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]


@dataclass(frozen=True)
class SplitDataset:
    """Row-disjoint train/test partition of a source dataset."""

    train: Dataset
    test: Dataset
    seed: int
    test_fraction: float


def load_csv(path: str | Path) -> Dataset:
    """Load a dataset from a comma-separated file.

    Format: UTF-8, one instance per row, numeric feature columns, final
    column the class label (integer or string; mapped to dense indices in
    first-appearance order).  A single header row is auto-detected when any
    feature cell of the first row is non-numeric.  Quoted fields are not
    supported and rejected with a diagnostic.

    Raises:
        DataError: naming the offending row/column for ragged rows,
            unparseable or non-finite values, quoting, a single class, or
            zero feature columns.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"dataset file not found: {path}")
    lines = path.read_text(encoding="utf-8").splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise DataError(f"{path}: file is empty")

    rows = [line.split(",") for line in lines]
    n_cols = len(rows[0])
    if n_cols < 2:
        raise DataError(f"{path}: zero feature columns (need features plus a label)")

    for r, row in enumerate(rows, start=1):
        if len(row) != n_cols:
            raise DataError(
                f"{path}: ragged row {r} has {len(row)} fields, expected {n_cols}"
            )
        for c, cell in enumerate(row, start=1):
            if '"' in cell:
                raise DataError(
                    f"{path}: quoted field at row {r}, column {c}; quoting is not supported"
                )

    def parse_feature(cell: str, r: int, c: int) -> float:
        try:
            value = float(cell)
        except ValueError:
            raise DataError(
                f"{path}: non-numeric value {cell!r} at row {r}, column {c}"
            ) from None
        if not math.isfinite(value):
            raise DataError(f"{path}: non-finite value at row {r}, column {c}")
        return value

    start = 0
    first_features = rows[0][:-1]
    header_like = False
    for cell in first_features:
        try:
            float(cell)
        except ValueError:
            header_like = True
            break
    if header_like:
        start = 1
        if len(rows) == 1:
            raise DataError(f"{path}: header row but no data rows")

    data_rows = rows[start:]
    features = np.empty((len(data_rows), n_cols - 1), dtype=np.float64)
    raw_labels: list[str] = []
    for i, row in enumerate(data_rows):
        r = start + i + 1
        for j, cell in enumerate(row[:-1]):
            features[i, j] = parse_feature(cell, r, j + 1)
        raw_labels.append(row[-1].strip())

    label_index: dict[str, int] = {}
    labels = np.empty(len(raw_labels), dtype=np.int64)
    for i, raw in enumerate(raw_labels):
        if raw not in label_index:
            label_index[raw] = len(label_index)
        labels[i] = label_index[raw]
    if len(label_index) < 2:
        raise DataError(f"{path}: only one class present; need at least two")
    if features.shape[0] < 2:
        raise DataError(f"{path}: need at least two instances")

    return Dataset(
        features=features, labels=labels, n_classes=len(label_index), name=path.stem
    )


def stratified_split(ds: Dataset, test_fraction: float, seed: int) -> SplitDataset:
    """Partition rows into train and test, stratified per class.

    For each class, ``round(count * test_fraction)`` instances go to the
    test side via a seeded shuffle (half-up rounding), capped so that at
    least one instance of every class stays in train.  Deterministic for a
    fixed seed.

    Raises:
        DataError: if the fraction is outside (0, 1) or any class has
            fewer than two instances.
    """
    if not 0.0 < test_fraction < 1.0:
        raise DataError(f"test fraction must be in (0, 1), got {test_fraction}")
    rng = np.random.default_rng(seed)
    test_idx: list[np.ndarray] = []
    train_idx: list[np.ndarray] = []
    for c in range(ds.n_classes):
        members = np.flatnonzero(ds.labels == c)
        if members.size < 2:
            raise DataError(
                f"class {c} has {members.size} instance(s); need at least two to split"
            )
        n_test = int(math.floor(members.size * test_fraction + 0.5))
        n_test = min(n_test, members.size - 1)
        order = rng.permutation(members)
        test_idx.append(order[:n_test])
        train_idx.append(order[n_test:])

    train_rows = np.sort(np.concatenate(train_idx))
    test_rows = np.sort(np.concatenate(test_idx))
    train = Dataset(
        features=ds.features[train_rows],
        labels=ds.labels[train_rows],
        n_classes=ds.n_classes,
        name=ds.name,
    )
    test = Dataset(
        features=ds.features[test_rows],
        labels=ds.labels[test_rows],
        n_classes=ds.n_classes,
        name=ds.name,
    )
    return SplitDataset(train=train, test=test, seed=seed, test_fraction=test_fraction)


@dataclass(frozen=True)
class Normalizer:
    """Per-feature min/max statistics fitted on training data only."""

    col_min: np.ndarray
    col_max: np.ndarray


def fit_normalizer(train: Dataset) -> Normalizer:
    if train.n_instances == 0:
        raise DataError("cannot fit a normalizer on an empty dataset")
    return Normalizer(
        col_min=train.features.min(axis=0), col_max=train.features.max(axis=0)
    )


def apply_normalizer(norm: Normalizer, ds: Dataset) -> Dataset:
    """Min-max transform to [0, 1], clamping values outside the fitted range.

    Constant training features map to 0.0 everywhere.
    """
    span = norm.col_max - norm.col_min
    safe_span = np.where(span > 0, span, 1.0)
    scaled = (ds.features - norm.col_min) / safe_span
    scaled = np.where(span > 0, scaled, 0.0)
    np.clip(scaled, 0.0, 1.0, out=scaled)
    return Dataset(
        features=scaled, labels=ds.labels, n_classes=ds.n_classes, name=ds.name
    )


def masked_view(ds: Dataset, mask: BitMask) -> Dataset:
    """Dataset restricted to the columns selected by ``mask``.

    Semantically identical to physically deleting the unselected columns;
    the all-zero mask yields a dataset with zero columns, which callers
    must handle (the evaluator never sends one to the classifier).
    """
    bits = np.asarray(mask, dtype=bool)
    if bits.ndim != 1 or bits.size != ds.n_features:
        raise DataError(
            f"mask length {bits.size} does not match {ds.n_features} features"
        )
    return Dataset(
        features=ds.features[:, bits],
        labels=ds.labels,
        n_classes=ds.n_classes,
        name=ds.name,
    )


def random_mask(rng: np.random.Generator, n_features: int) -> BitMask:
    """Sample a genotype with each bit independently set with probability 1/2."""
    return rng.random(n_features) < 0.5


def mask_key(mask: BitMask) -> bytes:
    """Hashable identity of a mask; unique among masks of equal length."""
    return np.packbits(np.asarray(mask, dtype=bool)).tobytes()


def mask_to_hex(mask: BitMask) -> str:
    """Pack a mask big-endian into hex: bit 0 is the most significant bit
    of the first digit group, zero-padded to ceil(length / 4) digits."""
    bits = np.asarray(mask, dtype=bool)
    n_digits = -(-bits.size // 4)
    return np.packbits(bits).tobytes().hex()[:n_digits]


def mask_from_hex(text: str, n_features: int) -> BitMask:
    """Inverse of :func:`mask_to_hex` for a known mask length."""
    n_digits = -(-n_features // 4)
    if len(text) != n_digits:
        raise DataError(
            f"genotype hex {text!r} has {len(text)} digits, expected {n_digits}"
        )
    padded = text.ljust(2 * ((n_digits + 1) // 2), "0")
    raw = np.frombuffer(bytes.fromhex(padded), dtype=np.uint8)
    return np.unpackbits(raw)[:n_features].astype(bool)
