"""Train the configured model suite, evaluate on a shared split, and emit
comparison reports and per-day plot data."""

from __future__ import annotations

import hashlib
import io
from dataclasses import dataclass, field
from datetime import date, datetime

import numpy as np

from .dataset import Dataset, FeatureSpec, Record, extract_features, split
from .metrics import MetricsReport, score
from .models import ModelSpec, TrainedModel, fit_model, predict_model

#: Results reported for the original UTEQ campus dataset. That dataset is
#: not distributable, so these are reference constants for qualitative
#: comparison only, never test assertions. The source reports the GBR R²
#: both as 0.72 (results table) and 0.76 (narrative); both are kept.
REFERENCE_RESULTS = {
    "Linear Regression": {"mse": 21773.10, "rmse": 147.56, "mae": 105.10, "r2": 0.60},
    "Polynomial Regression": {"mse": 16268.56, "rmse": 127.55, "mae": 82.69, "r2": 0.70},
    "K-Nearest Neighbors": {"mse": 14625.13, "rmse": 120.93, "mae": 59.33, "r2": 0.73},
    "Decision Tree Regressor": {"mse": 17540.69, "rmse": 132.44, "mae": 78.75, "r2": 0.68},
    "SVR Kernel Lineal": {"mse": 23889.29, "rmse": 154.56, "mae": 101.22, "r2": 0.56},
    "SVR Kernel RBF": {"mse": 29976.37, "rmse": 173.14, "mae": 104.11, "r2": 0.44},
    "Random Forest Regressor": {"mse": 14106.10, "rmse": 118.77, "mae": 58.56, "r2": 0.74},
    "Gradient Boosting Regressor": {"mse": 13112.21, "rmse": 114.51, "mae": 56.87, "r2": 0.72},
}
REFERENCE_GBR_R2_ALTERNATE = 0.76

SVR_KINDS = ("svr_linear", "svr_poly")
DEFAULT_SVR_SUBSAMPLE = 2000


@dataclass
class ReportRow:
    display_name: str
    kind: str
    metrics: MetricsReport | None
    failed: bool = False
    error: str | None = None
    note: str | None = None


@dataclass
class ComparisonReport:
    rows: list[ReportRow]
    split_description: str
    seed: int
    dataset_fingerprint: str
    footnotes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "split_description": self.split_description,
            "seed": self.seed,
            "dataset_fingerprint": self.dataset_fingerprint,
            "footnotes": list(self.footnotes),
            "rows": [
                {
                    "display_name": r.display_name,
                    "kind": r.kind,
                    "failed": r.failed,
                    "error": r.error,
                    "note": r.note,
                    "metrics": None
                    if r.metrics is None
                    else {
                        "mse": r.metrics.mse,
                        "rmse": r.metrics.rmse,
                        "mae": r.metrics.mae,
                        "r2": r.metrics.r2,
                        "n": r.metrics.n,
                    },
                }
                for r in self.rows
            ],
        }


@dataclass
class PlotPoint:
    timestamp: datetime
    actual: float
    predicted: float
    temperature: float


@dataclass
class PlotSeries:
    points: list[PlotPoint]
    display_name: str


def dataset_fingerprint(ds: Dataset) -> str:
    """Content hash binding a report to the exact data it scored."""
    h = hashlib.sha256()
    h.update(",".join(ds.feature_names).encode())
    h.update(np.ascontiguousarray(ds.features, dtype=np.float64).tobytes())
    h.update(np.ascontiguousarray(ds.target, dtype=np.float64).tobytes())
    return h.hexdigest()


def stratified_subsample(ds: Dataset, limit: int, seed: int) -> Dataset:
    """Deterministic target-stratified subsample: systematic sampling over
    the target-sorted order with a seeded fractional offset."""
    if ds.n <= limit:
        return ds
    order = np.argsort(ds.target, kind="stable")
    rng = np.random.default_rng(seed)
    positions = (np.arange(limit) + rng.random()) * (ds.n / limit)
    idx = order[np.floor(positions).astype(np.int64)]
    return Dataset(ds.features[idx], ds.target[idx], list(ds.feature_names))


def run_comparison(
    ds: Dataset,
    suite: list[ModelSpec],
    split_fraction: float = 0.8,
    seed: int = 42,
    feature_spec: FeatureSpec | None = None,
    svr_subsample: int = DEFAULT_SVR_SUBSAMPLE,
) -> tuple[ComparisonReport, dict[str, TrainedModel]]:
    """Train every model of the suite on one shared random split and score
    it on the shared test rows.

    A model whose fit raises is reported as a failed row (with the reason)
    without aborting the remaining rows. SVR rows train on a deterministic
    stratified subsample of the training split when it exceeds
    ``svr_subsample`` rows; the policy is stamped into the footnotes.
    Returns the report plus the trained models keyed by display name.
    """
    if not suite:
        raise ValueError("model suite is empty")
    if feature_spec is None:
        feature_spec = FeatureSpec()
    train, test = split(ds, split_fraction, seed)
    if test.n < 1:
        raise ValueError("split produced an empty test set")

    footnotes: list[str] = []
    rows: list[ReportRow] = []
    trained: dict[str, TrainedModel] = {}
    svr_note: str | None = None

    for spec in suite:
        fit_ds = train
        note = None
        if spec.kind in SVR_KINDS and train.n > svr_subsample:
            fit_ds = stratified_subsample(train, svr_subsample, seed + 1)
            note = f"trained on a stratified subsample of {fit_ds.n} of {train.n} training rows"
            if svr_note is None:
                svr_note = (
                    f"SVR rows were trained on a target-stratified subsample of "
                    f"{fit_ds.n} rows (seed {seed + 1}); pairwise dual optimization "
                    f"at the full training size is impractical at desk scale."
                )
        try:
            model = fit_model(fit_ds, spec, feature_spec)
            predictions = predict_model(model, test.features)
            report = score(test.target, predictions)
            if model.notes:
                note = "; ".join(([note] if note else []) + model.notes)
            model.metrics = {
                "scope": "test",
                "mse": report.mse,
                "rmse": report.rmse,
                "mae": report.mae,
                "r2": report.r2,
                "n": report.n,
            }
            trained[spec.display_name] = model
            rows.append(ReportRow(spec.display_name, spec.kind, report, note=note))
        except Exception as exc:  # noqa: BLE001 - a failed fit must not sink the report
            rows.append(
                ReportRow(spec.display_name, spec.kind, None, failed=True, error=str(exc), note=note)
            )

    if svr_note:
        footnotes.append(svr_note)
    if any(spec.kind == "svr_poly" for spec in suite):
        footnotes.append(
            'The "SVR Kernel RBF" row runs a polynomial kernel, matching the '
            "configuration published under that label for the original study; "
            "a true radial basis kernel is available via use_true_rbf."
        )
    footnotes.append(
        "Reference results for the original (non-distributable) UTEQ dataset "
        "are documented in heliocast.harness.REFERENCE_RESULTS; its GBR R² is "
        f"reported both as 0.72 and {REFERENCE_GBR_R2_ALTERNATE}."
    )

    report = ComparisonReport(
        rows=rows,
        split_description=(
            f"shared random split: train_fraction={split_fraction}, seed={seed}, "
            f"train={train.n}, test={test.n}"
        ),
        seed=seed,
        dataset_fingerprint=dataset_fingerprint(ds),
        footnotes=footnotes,
    )
    return report, trained


def _format_metric(value: float | None) -> str:
    if value is None:
        return ""
    return f"{value:.6f}"


def report_to_csv(report: ComparisonReport) -> str:
    """CSV rows `model,mse,rmse,mae,r2` (blank cells for failed rows)."""
    buf = io.StringIO()
    buf.write("model,mse,rmse,mae,r2\n")
    for row in report.rows:
        m = row.metrics
        cells = [
            row.display_name,
            _format_metric(m.mse if m else None),
            _format_metric(m.rmse if m else None),
            _format_metric(m.mae if m else None),
            _format_metric(m.r2 if m else None),
        ]
        buf.write(",".join(cells) + "\n")
    return buf.getvalue()


def report_to_text(report: ComparisonReport) -> str:
    """Fixed-width table mirroring the benchmark column order."""
    name_width = max([len("Model")] + [len(r.display_name) for r in report.rows])
    lines = []
    lines.append(f"{'Model':<{name_width}}  {'MSE':>12}  {'RMSE':>10}  {'MAE':>10}  {'R2':>8}")
    for row in report.rows:
        if row.failed or row.metrics is None:
            lines.append(f"{row.display_name:<{name_width}}  FAILED: {row.error}")
            continue
        m = row.metrics
        r2_text = f"{m.r2:8.4f}" if m.r2 is not None else f"{'n/a':>8}"
        lines.append(
            f"{row.display_name:<{name_width}}  {m.mse:12.2f}  {m.rmse:10.2f}  "
            f"{m.mae:10.2f}  {r2_text}"
        )
    lines.append("")
    lines.append(report.split_description)
    lines.append(f"dataset fingerprint: {report.dataset_fingerprint}")
    for i, note in enumerate(report.footnotes, start=1):
        lines.append(f"[{i}] {note}")
    for row in report.rows:
        if row.note:
            lines.append(f"note ({row.display_name}): {row.note}")
    return "\n".join(lines) + "\n"


def export_plot_data(
    model: TrainedModel,
    records: list[Record],
    day: date,
    feature_spec: FeatureSpec | None = None,
) -> PlotSeries:
    """Actual vs predicted irradiance (with temperature) for every record
    on one calendar day, time-ordered."""
    spec = feature_spec if feature_spec is not None else model.feature_spec
    day_records = sorted(
        (r for r in records if r.timestamp.date() == day), key=lambda r: r.timestamp
    )
    if not day_records:
        raise ValueError(f"no records on {day.isoformat()}")
    for a, b in zip(day_records, day_records[1:]):
        if a.timestamp == b.timestamp:
            raise ValueError(f"duplicate timestamp {a.timestamp.isoformat()} on {day.isoformat()}")
    ds = extract_features(day_records, spec)
    predictions = predict_model(model, ds.features)
    points = [
        PlotPoint(
            timestamp=r.timestamp,
            actual=r.irradiance,
            predicted=float(p),
            temperature=r.temperature,
        )
        for r, p in zip(day_records, predictions)
    ]
    return PlotSeries(points=points, display_name=model.display_name)


def plot_series_to_csv(series: PlotSeries) -> str:
    buf = io.StringIO()
    buf.write("timestamp,actual_wm2,predicted_wm2,temperature_k\n")
    for p in series.points:
        buf.write(
            f"{p.timestamp.isoformat()},{p.actual!r},{p.predicted!r},{p.temperature!r}\n"
        )
    return buf.getvalue()
