"""Experiment sweeps over SNR and relay position, with CSV and plot output.

Every sweep point gets its own training run (the procedure fits one model
per channel condition) and one fixed-seed evaluation, producing a row of
the results table.  Tables round-trip through CSV with run metadata in
'#'-prefixed header lines.
"""

from __future__ import annotations

import csv
import logging
import os
from dataclasses import dataclass, fields, replace
from typing import Iterable, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .config import ExperimentConfig
from .data import load_dataset
from .training import Trainer

log = logging.getLogger("relayjscc")

SCHEMES = ("multitask", "baseline")


@dataclass
class SweepRow:
    scheme: str
    fading: str
    snr_db: float
    d_sr: float
    psnr_db: float
    accuracy: float
    seed: int
    eval_size: int


_COLUMNS = [f.name for f in fields(SweepRow)]
_FLOAT_COLUMNS = {"snr_db", "d_sr", "psnr_db", "accuracy"}
_INT_COLUMNS = {"seed", "eval_size"}


class ResultsTable:
    """An ordered collection of sweep rows with CSV persistence."""

    def __init__(self, rows: Iterable[SweepRow] = ()):
        self.rows: list[SweepRow] = list(rows)

    def append(self, row: SweepRow) -> None:
        self.rows.append(row)

    def __len__(self) -> int:
        return len(self.rows)

    def filter(self, **conditions) -> "ResultsTable":
        kept = [r for r in self.rows
                if all(getattr(r, k) == v for k, v in conditions.items())]
        return ResultsTable(kept)

    def values(self, column: str) -> list:
        return [getattr(r, column) for r in self.rows]

    def save_csv(self, path: str, metadata: dict[str, str] | None = None) -> None:
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        with open(path, "w", newline="") as fh:
            for key, value in (metadata or {}).items():
                fh.write(f"# {key}={value}\n")
            writer = csv.writer(fh)
            writer.writerow(_COLUMNS)
            for row in self.rows:
                writer.writerow([getattr(row, c) for c in _COLUMNS])

    @classmethod
    def load_csv(cls, path: str) -> tuple["ResultsTable", dict[str, str]]:
        metadata: dict[str, str] = {}
        with open(path, newline="") as fh:
            data_lines = []
            for line in fh:
                if line.startswith("#"):
                    key, _, value = line[1:].strip().partition("=")
                    metadata[key.strip()] = value.strip()
                else:
                    data_lines.append(line)
        reader = csv.DictReader(data_lines)
        if reader.fieldnames != _COLUMNS:
            raise ValueError(
                f"{path} has columns {reader.fieldnames}, expected {_COLUMNS}")
        rows = []
        for record in reader:
            kwargs = {}
            for column in _COLUMNS:
                raw = record[column]
                if column in _FLOAT_COLUMNS:
                    kwargs[column] = float(raw)
                elif column in _INT_COLUMNS:
                    kwargs[column] = int(raw)
                else:
                    kwargs[column] = raw
            rows.append(SweepRow(**kwargs))
        return cls(rows), metadata


def run_sweep(cfg: ExperimentConfig,
              axis: str = "snr",
              points: Sequence[float] | None = None,
              schemes: Sequence[str] = SCHEMES,
              out_dir: str | None = None,
              train_on_demand: bool = True) -> ResultsTable:
    """Evaluate both schemes at every point along one sweep axis.

    ``axis`` is "snr" (sweeps snr_db at fixed d_sr) or "distance" (sweeps
    d_sr at fixed snr_db; d_rd follows as 1 - d_sr).  A point with an
    existing stage-3 checkpoint under out_dir is evaluated as-is;
    otherwise it is trained first, unless train_on_demand is off, which
    turns a missing checkpoint into an error.
    """
    if axis not in ("snr", "distance"):
        raise ValueError(f"axis must be 'snr' or 'distance', got {axis!r}")
    for scheme in schemes:
        if scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {scheme!r}")
    if points is None:
        points = [cfg.snr_db] if axis == "snr" else [cfg.d_sr]
    data = load_dataset(cfg)
    table = ResultsTable()
    for scheme in schemes:
        for value in points:
            if axis == "snr":
                point = replace(cfg, snr_db=float(value))
            else:
                point = replace(cfg, d_sr=float(value))
            point_dir = None
            if out_dir is not None:
                point_dir = os.path.join(out_dir, f"{scheme}_{axis}{value:g}")
            log.info("sweep point: scheme=%s fading=%s snr=%gdB d_sr=%g",
                     scheme, point.fading, point.snr_db, point.d_sr)
            trainer = Trainer(point, scheme, out_dir=point_dir, data=data)
            final = trainer.checkpoint_path(3) if point_dir is not None else None
            if final is not None and os.path.exists(final):
                trainer.resume(final)
            elif train_on_demand:
                trainer.train_all()
            else:
                raise FileNotFoundError(
                    f"no trained checkpoint for scheme={scheme} {axis}={value:g} "
                    f"(expected {final}); enable training on demand or train first")
            metrics = trainer.evaluate()
            table.append(SweepRow(
                scheme=scheme, fading=point.fading, snr_db=point.snr_db,
                d_sr=point.d_sr, psnr_db=float(metrics["psnr_db"]),
                accuracy=float(metrics["accuracy"]), seed=cfg.seed,
                eval_size=len(data[1].labels)))
    if out_dir is not None:
        table.save_csv(os.path.join(out_dir, "results.csv"),
                       metadata={"dataset": cfg.dataset_name,
                                 "fading": cfg.fading,
                                 "axis": axis,
                                 "seed": str(cfg.seed)})
    return table


_METRIC_LABELS = {"psnr_db": "PSNR (dB)", "accuracy": "Top-1 accuracy"}


def _plot_curves(table: ResultsTable, x_column: str, metric: str,
                 series_columns: Sequence[str], x_label: str,
                 title: str, path: str) -> None:
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    series_keys = sorted({tuple(getattr(r, c) for c in series_columns)
                          for r in table.rows})
    for key in series_keys:
        subset = table.filter(**dict(zip(series_columns, key)))
        pairs = sorted(zip(subset.values(x_column), subset.values(metric)))
        xs = [p[0] for p in pairs]
        ys = [p[1] for p in pairs]
        label = ", ".join(f"{c}={v}" for c, v in zip(series_columns, key))
        ax.plot(xs, ys, marker="o", label=label)
    ax.set_xlabel(x_label)
    ax.set_ylabel(_METRIC_LABELS[metric])
    ax.set_title(title)
    ax.grid(True, alpha=0.4)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def emit_plots(table: ResultsTable, out_dir: str) -> list[str]:
    """Write PSNR and accuracy figures against SNR and relay position."""
    os.makedirs(out_dir, exist_ok=True)
    written: list[str] = []
    for fading in sorted({r.fading for r in table.rows}):
        part = table.filter(fading=fading)
        snrs = sorted({r.snr_db for r in part.rows})
        dists = sorted({r.d_sr for r in part.rows})
        if len(snrs) > 1:
            for metric in ("psnr_db", "accuracy"):
                path = os.path.join(out_dir, f"{metric}_vs_snr_{fading}.png")
                _plot_curves(part, "snr_db", metric, ("scheme", "d_sr"),
                             "SNR (dB)", f"{_METRIC_LABELS[metric]} over {fading}",
                             path)
                written.append(path)
        if len(dists) > 1:
            for metric in ("psnr_db", "accuracy"):
                path = os.path.join(out_dir, f"{metric}_vs_dsr_{fading}.png")
                _plot_curves(part, "d_sr", metric, ("scheme", "snr_db"),
                             "source-relay distance",
                             f"{_METRIC_LABELS[metric]} over {fading}", path)
                written.append(path)
    return written
