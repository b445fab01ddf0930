"""Pyranometer record ingestion, cleaning, featurization and splitting.

Records are 5-minute observations of solar irradiance (W/m²) and ambient
temperature (K). Timestamps are ISO 8601 local time (America/Guayaquil,
which has no DST) and are stored naive, without an offset.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import datetime

import numpy as np

CSV_HEADER = "timestamp,irradiance_wm2,temperature_k"

#: Coastal-Ecuador season labels derived from the month (not a model feature).
WET_MONTHS = frozenset({12, 1, 2, 3, 4, 5})


class CsvParseError(ValueError):
    """Raised for a malformed CSV row; carries the 1-based line number."""

    def __init__(self, line_number: int, reason: str):
        super().__init__(f"line {line_number}: {reason}")
        self.line_number = line_number
        self.reason = reason


@dataclass(frozen=True)
class Record:
    """One pyranometer observation.

    Invariants (enforced by ``parse_records``, not the constructor, so that
    ``clean`` can drop bad values from programmatically built lists):
    temperature > 0 K, irradiance finite (negative values occur in the
    instrument's night-time readings and are kept).
    """

    timestamp: datetime
    irradiance: float
    temperature: float


@dataclass(frozen=True)
class FeatureSpec:
    """Selects which derived columns become model features.

    Feature order is fixed: [temperature, hour, month], filtered by flags.
    ``polynomial_degree`` is carried for the linear models; extraction
    itself never expands (degree 1 = no expansion).
    """

    use_temperature: bool = True
    use_hour: bool = True
    use_month: bool = False
    polynomial_degree: int = 1

    def validate(self) -> None:
        if not (self.use_temperature or self.use_hour or self.use_month):
            raise ValueError("FeatureSpec must enable at least one feature")
        if self.polynomial_degree < 1:
            raise ValueError("polynomial_degree must be >= 1")

    def feature_names(self) -> list[str]:
        names = []
        if self.use_temperature:
            names.append("temperature")
        if self.use_hour:
            names.append("hour")
        if self.use_month:
            names.append("month")
        return names

    def to_dict(self) -> dict:
        return {
            "use_temperature": self.use_temperature,
            "use_hour": self.use_hour,
            "use_month": self.use_month,
            "polynomial_degree": self.polynomial_degree,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FeatureSpec":
        return cls(
            use_temperature=bool(d["use_temperature"]),
            use_hour=bool(d["use_hour"]),
            use_month=bool(d["use_month"]),
            polynomial_degree=int(d.get("polynomial_degree", 1)),
        )


@dataclass
class Dataset:
    """Feature matrix plus irradiance target vector."""

    features: np.ndarray  # (n, d) float64
    target: np.ndarray  # (n,) float64
    feature_names: list[str]

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        self.target = np.asarray(self.target, dtype=np.float64)
        if self.features.ndim != 2:
            raise ValueError("features must be a 2-D matrix")
        if self.features.shape[0] != self.target.shape[0]:
            raise ValueError("features and target row counts differ")
        if self.features.shape[1] != len(self.feature_names):
            raise ValueError("feature_names length does not match feature columns")
        if self.features.shape[1] < 1:
            raise ValueError("dataset needs at least one feature column")
        if not np.all(np.isfinite(self.features)) or not np.all(np.isfinite(self.target)):
            raise ValueError("dataset contains non-finite entries")

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]


@dataclass(frozen=True)
class ColumnSummary:
    count: int
    mean: float
    std: float
    min: float
    q25: float
    median: float
    q75: float
    max: float


@dataclass
class SummaryTable:
    """Per-column descriptive statistics, column order Month, Hour,
    Irradiance, Temperature, plus derived wet/dry season counts."""

    columns: dict[str, ColumnSummary] = field(default_factory=dict)
    season_counts: dict[str, int] = field(default_factory=dict)


def _parse_float(text: str, line_number: int, column: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise CsvParseError(line_number, f"{column} is not a number: {text!r}") from None
    if not math.isfinite(value):
        raise CsvParseError(line_number, f"{column} is not finite: {text!r}")
    return value


def parse_records(csv_text: str) -> list[Record]:
    """Parse pyranometer CSV into records, preserving row order.

    Expects the exact header ``timestamp,irradiance_wm2,temperature_k``.
    Malformed rows raise :class:`CsvParseError` with the offending 1-based
    line number.
    """
    lines = csv_text.splitlines()
    if not lines:
        raise CsvParseError(1, "missing header")
    if lines[0].rstrip("\r") != CSV_HEADER:
        raise CsvParseError(1, f"expected header {CSV_HEADER!r}, got {lines[0]!r}")

    records: list[Record] = []
    for i, raw in enumerate(lines[1:], start=2):
        line = raw.rstrip("\r")
        if line == "":
            continue
        parts = line.split(",")
        if len(parts) != 3:
            raise CsvParseError(i, f"expected 3 fields, got {len(parts)}")
        ts_text, irr_text, temp_text = parts
        try:
            timestamp = datetime.fromisoformat(ts_text)
        except ValueError:
            raise CsvParseError(i, f"unparseable timestamp: {ts_text!r}") from None
        irradiance = _parse_float(irr_text, i, "irradiance_wm2")
        temperature = _parse_float(temp_text, i, "temperature_k")
        if temperature <= 0.0:
            raise CsvParseError(i, f"temperature_k must be > 0, got {temperature}")
        records.append(Record(timestamp, irradiance, temperature))
    return records


def records_to_csv(records: list[Record]) -> str:
    """Serialize records to the canonical CSV schema (LF line endings,
    shortest-roundtrip decimal floats, so parse(serialize(r)) == r)."""
    lines = [CSV_HEADER]
    for r in records:
        lines.append(f"{r.timestamp.isoformat()},{r.irradiance!r},{r.temperature!r}")
    return "\n".join(lines) + "\n"


def clean(records: list[Record], clamp_negative: bool = False) -> list[Record]:
    """Drop records with non-finite fields; optionally clamp negative
    irradiance to zero. The instrument's night readings dip slightly
    negative, so clamping is off by default."""
    out: list[Record] = []
    for r in records:
        if not (math.isfinite(r.irradiance) and math.isfinite(r.temperature)):
            continue
        if clamp_negative and r.irradiance < 0.0:
            r = Record(r.timestamp, 0.0, r.temperature)
        out.append(r)
    return out


def extract_features(records: list[Record], spec: FeatureSpec) -> Dataset:
    """Assemble the feature matrix in fixed [temperature, hour, month]
    order (filtered by the spec's flags) with irradiance as target."""
    if not records:
        raise ValueError("cannot extract features from an empty record list")
    spec.validate()
    names = spec.feature_names()

    rows = np.empty((len(records), len(names)), dtype=np.float64)
    for i, r in enumerate(records):
        j = 0
        if spec.use_temperature:
            rows[i, j] = r.temperature
            j += 1
        if spec.use_hour:
            rows[i, j] = float(r.timestamp.hour)
            j += 1
        if spec.use_month:
            rows[i, j] = float(r.timestamp.month)
    target = np.array([r.irradiance for r in records], dtype=np.float64)
    return Dataset(rows, target, names)


def split(ds: Dataset, train_fraction: float = 0.8, seed: int = 42) -> tuple[Dataset, Dataset]:
    """Deterministic random split.

    Permutes row indices with numpy's PCG64 generator seeded by ``seed``;
    the first ceil(train_fraction * n) permuted rows form the train set,
    the rest the test set.
    """
    if not (0.0 < train_fraction < 1.0):
        raise ValueError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    n = ds.n
    if n < 2:
        raise ValueError("need at least 2 rows to split")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    n_train = math.ceil(train_fraction * n)
    train_idx, test_idx = perm[:n_train], perm[n_train:]
    train = Dataset(ds.features[train_idx], ds.target[train_idx], list(ds.feature_names))
    test = Dataset(ds.features[test_idx], ds.target[test_idx], list(ds.feature_names))
    return train, test


def season_of(month: int) -> str:
    """Coastal-Ecuador season label: wet Dec-May, dry Jun-Nov."""
    return "wet" if month in WET_MONTHS else "dry"


def _column_summary(values: np.ndarray) -> ColumnSummary:
    n = values.size
    # Sample std (n-1 denominator); single observation has std 0 by convention.
    std = float(np.std(values, ddof=1)) if n > 1 else 0.0
    q25, median, q75 = (float(q) for q in np.quantile(values, [0.25, 0.5, 0.75]))
    return ColumnSummary(
        count=n,
        mean=float(np.mean(values)),
        std=std,
        min=float(np.min(values)),
        q25=q25,
        median=median,
        q75=q75,
        max=float(np.max(values)),
    )


def summarize(records: list[Record]) -> SummaryTable:
    """Descriptive statistics over month, hour, irradiance and temperature
    (quantiles by linear interpolation between order statistics)."""
    if not records:
        raise ValueError("cannot summarize an empty record list")
    months = np.array([r.timestamp.month for r in records], dtype=np.float64)
    hours = np.array([r.timestamp.hour for r in records], dtype=np.float64)
    irr = np.array([r.irradiance for r in records], dtype=np.float64)
    temp = np.array([r.temperature for r in records], dtype=np.float64)

    table = SummaryTable()
    table.columns["month"] = _column_summary(months)
    table.columns["hour"] = _column_summary(hours)
    table.columns["irradiance"] = _column_summary(irr)
    table.columns["temperature"] = _column_summary(temp)

    counts = {"wet": 0, "dry": 0}
    for r in records:
        counts[season_of(r.timestamp.month)] += 1
    table.season_counts = counts
    return table
