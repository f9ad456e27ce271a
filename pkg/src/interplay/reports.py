"""CSV and JSON artifacts.

Every CSV has a header and a fixed column order, and every file leads with a
``workload`` column so multiple workloads share one file.  Rows follow the
canonical configuration order within a workload.  Floats are written with
``repr`` so values round-trip exactly.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Mapping, Optional, Sequence, Union

from .harness import PolicyReport, SweepResult, ValidationReport, _canonical
from .predictor import PREDICTION_COLUMNS, DataError, Prediction, PredictorMode
from .simulator import STATS_COLUMNS, SimStats

PathLike = Union[str, Path]
JOIN_COLUMNS = ("cpi_actual", "error_pct")


def _fmt(x) -> str:
    return "" if x is None else repr(float(x))


def _open_w(path: PathLike) -> IO[str]:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    return open(path, "w", encoding="utf-8", newline="")


def _writer(fh: IO[str]):
    return csv.writer(fh, lineterminator="\n")


def _reader(path: PathLike, required: Sequence[str]) -> Iterable[dict]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in required if c not in (reader.fieldnames or ())]
        if missing:
            raise DataError(f"{path}: missing column(s) {', '.join(missing)}")
        yield from reader


# --- stats.csv -----------------------------------------------------------------


def write_stats_csv(path: PathLike, results: Sequence[SweepResult]) -> None:
    with _open_w(path) as fh:
        w = _writer(fh)
        w.writerow(("workload",) + STATS_COLUMNS)
        for r in results:
            for lab in _canonical(r.stats):
                w.writerow([r.workload] + r.stats[lab].to_row(lab))


def read_stats_csv(path: PathLike) -> dict[str, SweepResult]:
    out: dict[str, SweepResult] = {}
    for row in _reader(path, ("workload",) + STATS_COLUMNS):
        result = out.setdefault(row["workload"], SweepResult(row["workload"], {}))
        try:
            result.stats[row["config"]] = SimStats.from_row(row)
        except ValueError as exc:
            raise DataError(f"{path}: bad stats row for {row['config']}: {exc}") from None
    return out


# --- predictions.csv -----------------------------------------------------------


@dataclass(frozen=True)
class PredictionRecord:
    """A prediction row read back from CSV."""

    workload: str
    config: str
    mode: PredictorMode
    cpi_l: float
    cpi_em: float
    cpi_p: float
    em_l2: float
    tm_l2: float
    m_l2_captured: int
    mr_l2_d: float
    mr_l2_i: float
    penalty_l2: float

    @property
    def clamped(self) -> bool:
        return self.tm_l2 < self.m_l2_captured

    def to_row(self) -> list:
        return [
            self.config,
            self.mode.value,
            _fmt(self.cpi_l),
            _fmt(self.cpi_em),
            _fmt(self.cpi_p),
            _fmt(self.em_l2),
            _fmt(self.tm_l2),
            self.m_l2_captured,
            _fmt(self.mr_l2_d),
            _fmt(self.mr_l2_i),
            _fmt(self.penalty_l2),
        ]


def write_predictions_csv(
    path: PathLike,
    predictions: Mapping[str, Sequence[Union[Prediction, PredictionRecord]]],
    report: Optional[ValidationReport] = None,
) -> None:
    joined = {}
    if report is not None:
        joined = {(r.workload, r.config): r for r in report.rows}
    with _open_w(path) as fh:
        w = _writer(fh)
        header = ("workload",) + PREDICTION_COLUMNS
        w.writerow(header + (JOIN_COLUMNS if report is not None else ()))
        for workload, preds in predictions.items():
            for p in preds:
                row = [workload] + p.to_row()
                if report is not None:
                    v = joined[(workload, p.config)]
                    row += [_fmt(v.cpi_actual), _fmt(v.error_pct)]
                w.writerow(row)


def read_predictions_csv(path: PathLike) -> dict[str, list[PredictionRecord]]:
    out: dict[str, list[PredictionRecord]] = {}
    for row in _reader(path, ("workload",) + PREDICTION_COLUMNS):
        try:
            rec = PredictionRecord(
                workload=row["workload"],
                config=row["config"],
                mode=PredictorMode(row["mode"]),
                cpi_l=float(row["cpi_l"]),
                cpi_em=float(row["cpi_em"]),
                cpi_p=float(row["cpi_p"]),
                em_l2=float(row["em_l2"]),
                tm_l2=float(row["tm_l2"]),
                m_l2_captured=int(row["m_l2_captured"]),
                mr_l2_d=float(row["mr_l2_d"]),
                mr_l2_i=float(row["mr_l2_i"]),
                penalty_l2=float(row["penalty_l2"]),
            )
        except ValueError as exc:
            raise DataError(f"{path}: bad prediction row for {row.get('config')}: {exc}") from None
        out.setdefault(rec.workload, []).append(rec)
    return out


# --- plot data and summary -----------------------------------------------------


def write_pd_plotdata(path: PathLike, oracle: PolicyReport, model: Optional[PolicyReport] = None) -> None:
    """Worst-case degradation per configuration, in the oracle's sorted order."""
    predicted = {r.config: r for r in model.rows} if model else {}
    with _open_w(path) as fh:
        w = _writer(fh)
        header = ["config", "max_pd", "flagged"]
        if model:
            header += ["max_pd_model", "flagged_model"]
        w.writerow(header)
        for r in oracle.rows:
            row = [r.config, _fmt(r.max_pd_pct), int(r.flagged)]
            if model:
                m = predicted.get(r.config)
                row += [_fmt(m.max_pd_pct), int(m.flagged)] if m else ["", ""]
            w.writerow(row)


def write_scatter_plotdata(path: PathLike, report: ValidationReport) -> None:
    with _open_w(path) as fh:
        w = _writer(fh)
        w.writerow(["workload", "config", "cpi_pred", "cpi_actual", "error_pct", "cpi_linear", "linear_error_pct"])
        for r in report.rows:
            w.writerow(
                [r.workload, r.config, _fmt(r.cpi_pred), _fmt(r.cpi_actual), _fmt(r.error_pct),
                 _fmt(r.cpi_linear), _fmt(r.linear_error_pct)]
            )


def write_l2_plotdata(path: PathLike, report: ValidationReport) -> None:
    with _open_w(path) as fh:
        w = _writer(fh)
        w.writerow(["workload", "config", "tm_pred", "m_l2_actual", "miss_error_pct"])
        for r in report.rows:
            w.writerow([r.workload, r.config, _fmt(r.tm_pred), r.m_l2_actual, _fmt(r.miss_error_pct)])


def write_json(path: PathLike, payload: dict) -> None:
    with _open_w(path) as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_json(path: PathLike) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)
