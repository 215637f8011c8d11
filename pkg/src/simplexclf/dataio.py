"""Loading, summarising and generating labelled compositional datasets.

Ingestion closes every row (normalises it to unit sum) while remembering
the raw values, because "zero part" is defined on the ingested value
before closure and exports must round-trip at full precision.  Two
synthetic generators produce datasets whose group structure favours
either the log-ratio end or the untransformed end of the transformation
family, which is useful for sanity-checking model selection.
"""

import hashlib
import math
from dataclasses import dataclass
from pathlib import Path
import csv
import os

import numpy as np

from .core import Composition, closure, helmert_submatrix
from .errors import (
    AllZeroError,
    InvalidSpecError,
    LengthMismatchError,
    MissingColumnError,
    NegativeComponentError,
    ParseError,
    TooShortError,
)

__all__ = [
    "DatasetSchema",
    "LabeledCompositionDataset",
    "SyntheticSpec",
    "load_dataset",
    "load_glass",
    "find_glass",
    "zero_summary",
    "group_summary",
    "generate_synthetic",
    "GLASS_COMPONENTS",
    "GLASS_TYPE_NAMES",
]

# Forensic glass: oxide measurements with the refractive index dropped,
# and the numeric type codes spelt out (code 4 is unused in the source).
GLASS_COMPONENTS = ("Na", "Mg", "Al", "Si", "K", "Ca", "Ba", "Fe")
GLASS_TYPE_NAMES = {
    1: "window float",
    2: "window non-float",
    3: "vehicle window",
    5: "containers",
    6: "tableware",
    7: "headlamps",
}
_GLASS_RAW_COLUMNS = ("Id", "RI") + GLASS_COMPONENTS + ("Type",)


@dataclass(frozen=True)
class DatasetSchema:
    """How to read a delimited text file into a dataset.

    ``component_cols`` defaults to every column that is neither the label
    nor listed in ``drop_cols``.
    """

    label_col: str
    component_cols: tuple = None
    drop_cols: tuple = ()
    delimiter: str = ","


class LabeledCompositionDataset:
    """Compositions with one group label per row.

    Rows are closed at construction; the pre-closure values are kept so
    that zero parts stay identifiable as exact ingested zeros and exports
    reproduce the source.  At least two groups are required, each
    nonempty.
    """

    def __init__(self, raw, labels, component_names, label_name="label",
                 provenance=None):
        raw = np.array(raw, dtype=float)
        if raw.ndim != 2:
            raise TooShortError("raw must be a matrix, one row per case")
        n, D = raw.shape
        if D < 2:
            raise TooShortError(f"need at least two parts, got {D}")
        names = tuple(str(c) for c in component_names)
        if len(names) != D:
            raise LengthMismatchError(
                f"{len(names)} component names for {D} columns"
            )
        labels = np.asarray(labels)
        if labels.ndim != 1 or labels.shape[0] != n:
            raise LengthMismatchError(
                f"expected {n} labels, got shape {labels.shape}"
            )
        self.rows = closure(raw)
        raw.setflags(write=False)
        self.rows.setflags(write=False)
        self.raw = raw
        self.labels = labels.astype(str)
        self.component_names = names
        self.label_name = str(label_name)
        self.group_names = tuple(str(g) for g in np.unique(self.labels))
        if len(self.group_names) < 2:
            raise InvalidSpecError(
                f"need at least two groups, got {len(self.group_names)}"
            )
        self.provenance = dict(provenance or {})

    @property
    def n(self):
        return self.raw.shape[0]

    @property
    def D(self):
        return self.raw.shape[1]

    @property
    def g(self):
        return len(self.group_names)

    @property
    def zero_mask(self):
        return self.raw == 0

    @property
    def zero_counts(self):
        return self.zero_mask.sum(axis=1)

    @property
    def has_zeros(self):
        return bool(self.zero_mask.any())

    @property
    def group_sizes(self):
        return {
            name: int((self.labels == name).sum())
            for name in self.group_names
        }

    def group_indices(self, name):
        return np.flatnonzero(self.labels == name)

    def row(self, i):
        return Composition(self.rows[i])

    def content_digest(self):
        """SHA-256 over component names, labels and full-precision raw
        values; stable across load/save round trips."""
        h = hashlib.sha256()
        h.update("\x1f".join(self.component_names).encode())
        h.update(b"\x1e")
        h.update("\x1f".join(self.labels.tolist()).encode())
        h.update(b"\x1e")
        for row in self.raw:
            h.update(",".join(repr(float(v)) for v in row).encode())
            h.update(b"\n")
        return h.hexdigest()

    def to_csv(self, path, delimiter=","):
        """Write the pre-closure values and labels; loading the result
        back yields an identical dataset."""
        path = Path(path)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, delimiter=delimiter)
            writer.writerow(list(self.component_names) + [self.label_name])
            for row, label in zip(self.raw, self.labels):
                writer.writerow([repr(float(v)) for v in row] + [label])


def _file_digest(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def load_dataset(path, schema):
    """Read a delimited text file into a labelled dataset.

    The first line must name the columns.  Component cells must parse as
    non-negative reals; failures are reported with their line number and
    column name.

    Parameters
    ----------
    path : path-like
    schema : DatasetSchema

    Returns
    -------
    LabeledCompositionDataset
    """
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh, delimiter=schema.delimiter)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path} is empty", line=1) from None
        header = [c.strip() for c in header]
        if len(set(header)) != len(header):
            dupes = sorted({c for c in header if header.count(c) > 1})
            raise ParseError(f"duplicate column names {dupes}", line=1)
        if schema.label_col not in header:
            raise MissingColumnError(
                f"label column {schema.label_col!r} not in {header}"
            )
        if schema.component_cols is not None:
            comp_cols = [str(c) for c in schema.component_cols]
            missing = [c for c in comp_cols if c not in header]
            if missing:
                raise MissingColumnError(
                    f"component column(s) {missing} not in {header}"
                )
        else:
            dropped = set(schema.drop_cols) | {schema.label_col}
            comp_cols = [c for c in header if c not in dropped]
        if len(comp_cols) < 2:
            raise TooShortError(
                f"need at least two component columns, got {comp_cols}"
            )
        col_idx = [header.index(c) for c in comp_cols]
        label_idx = header.index(schema.label_col)
        values, labels = [], []
        for line_no, cells in enumerate(reader, start=2):
            if not cells or all(not c.strip() for c in cells):
                continue
            if len(cells) != len(header):
                raise ParseError(
                    f"expected {len(header)} cells, got {len(cells)}",
                    line=line_no,
                )
            row = np.empty(len(col_idx))
            for j, (name, idx) in enumerate(zip(comp_cols, col_idx)):
                cell = cells[idx].strip()
                try:
                    row[j] = float(cell)
                except ValueError:
                    raise ParseError(
                        f"cannot parse {cell!r} as a number",
                        line=line_no, column=name,
                    ) from None
            if (row < 0).any():
                bad = [comp_cols[j] for j in np.nonzero(row < 0)[0]]
                raise NegativeComponentError(
                    f"negative part(s) in column(s) {bad} at line {line_no}"
                )
            if row.sum() <= 0:
                raise AllZeroError(
                    f"all parts are zero at line {line_no}"
                )
            label = cells[label_idx].strip()
            if not label:
                raise ParseError("empty label", line=line_no,
                                 column=schema.label_col)
            values.append(row)
            labels.append(label)
    if not values:
        raise ParseError(f"{path} has no data rows", line=2)
    return LabeledCompositionDataset(
        np.vstack(values), labels, comp_cols,
        label_name=schema.label_col,
        provenance={
            "source": str(path),
            "digest": _file_digest(path),
        },
    )


def find_glass():
    """Locate the forensic glass file: the ``SIMPLEX_CLF_GLASS``
    environment variable first, then ``data/glass.csv`` and
    ``data/glass.data`` under the working directory."""
    env = os.environ.get("SIMPLEX_CLF_GLASS")
    candidates = [Path(env)] if env else []
    candidates += [Path("data") / "glass.csv", Path("data") / "glass.data"]
    for cand in candidates:
        if cand.is_file():
            return cand
    return None


def load_glass(path=None):
    """Load the forensic glass dataset (8 oxide percentages, 6 types).

    Accepts either the raw UCI ``glass.data`` layout (no header; id,
    refractive index, eight oxides, integer type code) or any headered
    delimited file containing the oxide and ``Type`` columns.  The
    refractive index is not compositional and is dropped; type codes are
    replaced by descriptive names.

    Parameters
    ----------
    path : path-like, optional
        Defaults to :func:`find_glass` resolution.

    Returns
    -------
    LabeledCompositionDataset

    Raises
    ------
    FileNotFoundError
        If no path is given and none of the standard locations exist.
    """
    if path is None:
        path = find_glass()
        if path is None:
            raise FileNotFoundError(
                "forensic glass data not found; run scripts/fetch_glass.py "
                "or set SIMPLEX_CLF_GLASS to the file path"
            )
    path = Path(path)
    with open(path, newline="") as fh:
        first = fh.readline()
    headered = any(ch.isalpha() for ch in first)
    if headered:
        delim = "\t" if "\t" in first else ","
        ds = load_dataset(path, DatasetSchema(
            label_col="Type", component_cols=GLASS_COMPONENTS,
            delimiter=delim,
        ))
    else:
        tmp_schema = DatasetSchema(
            label_col="Type", component_cols=GLASS_COMPONENTS,
        )
        rows, labels = [], []
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            for line_no, cells in enumerate(reader, start=1):
                if not cells or all(not c.strip() for c in cells):
                    continue
                if len(cells) != len(_GLASS_RAW_COLUMNS):
                    raise ParseError(
                        f"expected {len(_GLASS_RAW_COLUMNS)} cells, "
                        f"got {len(cells)}", line=line_no,
                    )
                try:
                    vals = [float(c) for c in cells[2:10]]
                except ValueError as exc:
                    raise ParseError(str(exc), line=line_no) from None
                rows.append(vals)
                labels.append(cells[10].strip())
        if not rows:
            raise ParseError(f"{path} has no data rows", line=1)
        ds = LabeledCompositionDataset(
            np.asarray(rows), labels, GLASS_COMPONENTS, label_name="Type",
            provenance={"source": str(path), "digest": _file_digest(path)},
        )
    # Map integer type codes (possibly parsed as "1" or "1.0") to names.
    mapped = []
    for lab in ds.labels:
        try:
            code = int(float(lab))
        except ValueError:
            mapped.append(lab)
            continue
        if code not in GLASS_TYPE_NAMES:
            raise ParseError(f"unknown glass type code {code}")
        mapped.append(GLASS_TYPE_NAMES[code])
    return LabeledCompositionDataset(
        ds.raw, mapped, ds.component_names, label_name=ds.label_name,
        provenance=ds.provenance,
    )


def zero_summary(dataset):
    """Zero-part census: per component and per row.

    Returns a dict with ``per_component`` (count and fraction of rows in
    which each part is exactly zero before closure) and
    ``per_row_zero_count`` (for each observed number of zero parts, the
    count and fraction of rows having it).
    """
    n = dataset.n
    mask = dataset.zero_mask
    per_component = [
        {
            "component": name,
            "zeros": int(mask[:, j].sum()),
            "fraction": float(mask[:, j].sum() / n),
        }
        for j, name in enumerate(dataset.component_names)
    ]
    counts = dataset.zero_counts
    per_row = [
        {
            "zeros": int(c),
            "rows": int((counts == c).sum()),
            "fraction": float((counts == c).sum() / n),
        }
        for c in np.unique(counts)
    ]
    return {"n": n, "per_component": per_component,
            "per_row_zero_count": per_row}


def group_summary(dataset):
    """Per-group census: size and number of rows with any zero part."""
    any_zero = dataset.zero_mask.any(axis=1)
    out = []
    for name in dataset.group_names:
        idx = dataset.group_indices(name)
        out.append({
            "group": name,
            "size": int(idx.size),
            "rows_with_zeros": int(any_zero[idx].sum()),
        })
    return out


@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for a synthetic two-regime dataset.

    ``regime`` selects where the group structure is Gaussian:
    ``"lra"`` places exact Gaussians in log-ratio coordinates, which
    favours the ``alpha = 0`` end of the transformation family, while
    ``"eda"`` places truncated Gaussians directly in the simplex with
    the first group's signal part close to the zero boundary, which
    favours ``alpha = 1``.  ``separation`` is the distance between
    neighbouring group means in units of the isotropic noise scale.
    """

    regime: str
    D: int
    groups: int
    group_size: int
    separation: float
    seed: int

    def __post_init__(self):
        if self.regime not in ("lra", "eda"):
            raise InvalidSpecError(
                f"regime must be 'lra' or 'eda', got {self.regime!r}"
            )
        if self.D < 3:
            raise InvalidSpecError(
                f"regime {self.regime!r} needs D >= 3, got {self.D}"
            )
        if self.groups < 2:
            raise InvalidSpecError(
                f"need at least two groups, got {self.groups}"
            )
        if self.group_size < 2:
            raise InvalidSpecError(
                f"need at least two observations per group, "
                f"got {self.group_size}"
            )
        if not self.separation > 0:
            raise InvalidSpecError("separation must be positive")
        if self.regime == "lra":
            if self.groups > self.D - 1:
                raise InvalidSpecError(
                    f"regime 'lra' supports at most {self.D - 1} groups "
                    f"at D={self.D}, got {self.groups}"
                )
        elif _eda_signal_means(self)[-1] > 0.85:
            raise InvalidSpecError(
                f"{self.groups} groups at separation {self.separation} "
                f"do not fit inside the simplex"
            )


# "eda" sampling geometry.  Group clouds are Gaussian on the sum-one
# hyperplane: isotropic ambient noise plus extra variance along the axis
# separating the group means, so within-group spread stays partly aligned
# with the between-group direction, as in overlapping real mixtures.  The
# first group's signal part sits _EDA_WALL_SIGMA marginal standard
# deviations above zero; power transforms with alpha below one bend that
# near-boundary region, so fitted Gaussian boundaries drift and accuracy
# decays steadily as alpha moves away from one.
_EDA_AMBIENT_SD = 0.016
_EDA_AXIS_EXTRA = 1.82
_EDA_WALL_SIGMA = 1.2


def _eda_signal_axis(D):
    axis = np.full(D, -1.0 / D)
    axis[0] += 1.0
    return axis / np.linalg.norm(axis)


def _eda_signal_means(spec):
    """Signal-part means of the "eda" group ladder, smallest first."""
    axis0 = float(_eda_signal_axis(spec.D)[0])
    x1_sd = _EDA_AMBIENT_SD * math.sqrt(
        (1.0 - 1.0 / spec.D) * (1.0 + _EDA_AXIS_EXTRA ** 2)
    )
    first = _EDA_WALL_SIGMA * x1_sd
    gap = spec.separation * _EDA_AMBIENT_SD
    return first + gap * axis0 * np.arange(spec.groups)


def _synthetic_labels(spec):
    return np.repeat(
        [f"g{i + 1:02d}" for i in range(spec.groups)], spec.group_size
    )


def generate_synthetic(spec):
    """Draw a synthetic dataset; bit-identical for equal specs.

    Returns
    -------
    LabeledCompositionDataset
        ``groups * group_size`` strictly positive compositions with
        ``D`` parts, labelled ``g01``, ``g02``, ...
    """
    rng = np.random.default_rng(
        np.random.SeedSequence(int(spec.seed), spawn_key=(3,))
    )
    d = spec.D - 1
    H = helmert_submatrix(spec.D)
    if spec.regime == "lra":
        # Group means on scaled coordinate axes of the transformed space:
        # pairwise distance exactly `separation`, unit noise.
        scale = spec.separation / np.sqrt(2.0)
        blocks = []
        for i in range(spec.groups):
            mean = np.zeros(d)
            mean[i] = scale
            z = mean + rng.standard_normal((spec.group_size, d))
            blocks.append(np.exp(z @ H))
        raw = np.vstack(blocks)
    else:
        # Group means ladder along the signal axis, first group hugging
        # the zero boundary.  Noise lives on the sum-zero hyperplane:
        # isotropic plus an extra share along the axis, redrawn until
        # every part is positive.
        axis = _eda_signal_axis(spec.D)
        targets = _eda_signal_means(spec)
        means = 1.0 / spec.D + np.outer(
            (targets - 1.0 / spec.D) / axis[0], axis
        )
        blocks = []
        for i in range(spec.groups):
            rows = np.empty((0, spec.D))
            while rows.shape[0] < spec.group_size:
                need = spec.group_size - rows.shape[0]
                m = max(need * 2, 8)
                pull = rng.standard_normal((m, d)) @ H
                pull += _EDA_AXIS_EXTRA * rng.standard_normal((m, 1)) * axis
                draw = means[i] + _EDA_AMBIENT_SD * pull
                keep = draw[(draw > 0).all(axis=1)]
                rows = np.vstack([rows, keep[:need]])
            blocks.append(rows)
        raw = np.vstack(blocks)
    names = [f"c{j + 1:02d}" for j in range(spec.D)]
    return LabeledCompositionDataset(
        raw, _synthetic_labels(spec), names,
        provenance={
            "source": f"synthetic:{spec.regime}",
            "D": spec.D, "groups": spec.groups,
            "group_size": spec.group_size,
            "separation": spec.separation, "seed": spec.seed,
        },
    )
