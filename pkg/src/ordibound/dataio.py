"""File formats and serialized reports.

Unit CSV: UTF-8, header row, columns ``z`` and ``y`` plus any number of
numeric covariate columns, no missing values.

Count file::

    # free-form provenance comments
    treated: 23,15,48,67,121,177
    control: 42,40,62,103,184,11
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .attainment import ValidationReport
from .bootstrap import IntervalReport
from .bounds import BoundsReport
from .errors import (
    DataError,
    LengthMismatch,
    MalformedRow,
    MissingColumn,
    NegativeCount,
    NonIntegerCategory,
)
from .estimators import Dataset

FIXTURES = {"senn": "senn_counts.txt", "karolinska": "karolinska_counts.txt"}


def fixture_path(name: str) -> Path:
    return Path(str(resources.files("ordibound") / "data" / FIXTURES[name]))


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


# ---------------------------------------------------------------------------
# Unit-level CSV


def _int_field(raw: str, line: int, column: str, exc=MalformedRow) -> int:
    s = raw.strip()
    try:
        return int(s)
    except ValueError:
        raise exc(f"column {column!r}: {raw!r} is not an integer", line) from None


def parse_unit_csv(path, categories: int | None = None) -> Dataset:
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise MissingColumn(f"{path}: empty file, header row required") from None
        for col in ("z", "y"):
            if col not in header:
                raise MissingColumn(f"{path}: required column {col!r} missing from header")
        iz, iy = header.index("z"), header.index("y")
        cov_idx = [i for i, h in enumerate(header) if h not in ("z", "y")]
        cov_names = [header[i] for i in cov_idx]
        zs, ys, xs = [], [], []
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise MalformedRow(f"expected {len(header)} fields, got {len(row)}", line)
            for name, value in zip(header, row):
                if not value.strip():
                    raise MalformedRow(f"missing value in column {name!r}", line)
            z = _int_field(row[iz], line, "z")
            if z not in (0, 1):
                raise MalformedRow(f"treatment must be 0 or 1, got {z}", line)
            y = _int_field(row[iy], line, "y", NonIntegerCategory)
            if y < 0:
                raise MalformedRow(f"category must be >= 0, got {y}", line)
            x = []
            for i in cov_idx:
                try:
                    v = float(row[i])
                except ValueError:
                    raise MalformedRow(f"column {header[i]!r}: {row[i]!r} is not numeric", line) from None
                if not np.isfinite(v):
                    raise MalformedRow(f"column {header[i]!r}: non-finite value", line)
                x.append(v)
            zs.append(z)
            ys.append(y)
            xs.append(x)
    if not ys:
        raise DataError(f"{path}: no data rows")
    J = max(ys) + 1
    if categories is not None:
        if categories < J:
            raise DataError(f"--categories {categories} but an outcome equals {J - 1}")
        J = categories
    J = max(J, 2)
    X = np.array(xs, dtype=float) if cov_names else None
    return Dataset(zs, ys, J, X, tuple(cov_names) if cov_names else None)


def write_unit_csv(path, data: Dataset) -> None:
    names = list(data.covariate_names or ())
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["z", "y", *names])
        for i in range(data.N):
            xs = [repr(float(v)) for v in data.X[i]] if data.X is not None else []
            w.writerow([int(data.z[i]), int(data.y[i]), *xs])


# ---------------------------------------------------------------------------
# Count tables


@dataclass(frozen=True)
class CountTable:
    treated_counts: tuple[int, ...]
    control_counts: tuple[int, ...]

    def __post_init__(self):
        t, c = tuple(self.treated_counts), tuple(self.control_counts)
        if len(t) != len(c):
            raise LengthMismatch(f"treated has {len(t)} categories, control has {len(c)}")
        if len(t) < 2:
            raise DataError("need at least 2 categories")
        if any(v < 0 for v in t + c):
            raise NegativeCount("counts must be nonnegative")
        if sum(t) == 0 or sum(c) == 0:
            raise DataError("each arm needs a positive total count")
        object.__setattr__(self, "treated_counts", t)
        object.__setattr__(self, "control_counts", c)

    @property
    def J(self) -> int:
        return len(self.treated_counts)

    def marginals(self) -> tuple[np.ndarray, np.ndarray]:
        t = np.asarray(self.treated_counts, dtype=float)
        c = np.asarray(self.control_counts, dtype=float)
        return t / t.sum(), c / c.sum()

    def to_dataset(self) -> Dataset:
        return Dataset.from_counts(self.treated_counts, self.control_counts)

    def canonical(self) -> str:
        return (f"treated: {','.join(map(str, self.treated_counts))}\n"
                f"control: {','.join(map(str, self.control_counts))}\n")


def parse_count_list(text: str, what: str = "counts") -> tuple[int, ...]:
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        try:
            v = int(tok)
        except ValueError:
            raise MalformedRow(f"{what}: {tok!r} is not an integer") from None
        if v < 0:
            raise NegativeCount(f"{what}: negative count {v}")
        out.append(v)
    return tuple(out)


def parse_count_table(path=None, treated: str | None = None, control: str | None = None) -> CountTable:
    """Read a count file, or build a table from the two inline lists."""
    if path is None:
        if treated is None or control is None:
            raise DataError("both treated and control counts are required")
        return CountTable(parse_count_list(treated, "treated"), parse_count_list(control, "control"))
    found: dict[str, tuple[int, ...]] = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, rest = line.partition(":")
        key = key.strip().lower()
        if not sep or key not in ("treated", "control"):
            raise MalformedRow(f"expected 'treated: ...' or 'control: ...', got {raw!r}", lineno)
        if key in found:
            raise MalformedRow(f"duplicate {key!r} line", lineno)
        found[key] = parse_count_list(rest, key)
    for key in ("treated", "control"):
        if key not in found:
            raise MissingColumn(f"{path}: no {key!r} line")
    return CountTable(found["treated"], found["control"])


# ---------------------------------------------------------------------------
# Reports


@dataclass(frozen=True)
class AnalysisReport:
    bounds: BoundsReport
    interval: IntervalReport | None = None
    attaining_matrix: np.ndarray | None = None
    validation: ValidationReport | dict | None = None
    oracle_check: dict | None = None
    provenance: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {"bounds": self.bounds.to_dict()}
        if self.interval is not None:
            d["interval"] = self.interval.to_dict()
        if self.attaining_matrix is not None:
            d["attaining_matrix"] = np.asarray(self.attaining_matrix, dtype=float).tolist()
        if self.validation is not None:
            v = self.validation
            d["validation"] = v.to_dict() if hasattr(v, "to_dict") else dict(v)
        if self.oracle_check is not None:
            d["oracle_check"] = dict(self.oracle_check)
        d["provenance"] = dict(self.provenance)
        return d

    def to_json(self, indent: int | None = None) -> str:
        return dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_dict(cls, d: dict) -> "AnalysisReport":
        return cls(
            bounds=BoundsReport.from_dict(d["bounds"]),
            interval=IntervalReport.from_dict(d["interval"]) if "interval" in d else None,
            attaining_matrix=np.array(d["attaining_matrix"]) if "attaining_matrix" in d else None,
            validation=d.get("validation"),
            oracle_check=d.get("oracle_check"),
            provenance=d.get("provenance", {}),
        )

    @classmethod
    def from_json(cls, text: str) -> "AnalysisReport":
        return cls.from_dict(json.loads(text))


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else repr(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps(obj, indent: int | None = None) -> str:
    # json writes floats with repr(), the shortest string that round-trips
    # to the same double.
    return json.dumps(_plain(obj), indent=indent, allow_nan=False)


def provenance(digest: str, config: dict) -> dict:
    return {"input_sha256": digest, "config": config, "tool": "ordibound", "version": __version__}
