"""CSV dataset files.

Grammar: a header row whose first column is ``smiles`` followed by one
column per task; an empty cell means "no label".  A task column named
``<target>:ic50_molar`` holds molar activity values that are converted to
their negative log10 on ingest (and the task ranks higher-is-better); a
column named ``<target>:higher_is_better`` holds already-converted values
that rank higher-is-better (this is how such tasks are written back).
Plain columns rank lower-is-better (docking-score convention).  Duplicate
SMILES rows are averaged per task after conversion.  Every data row either
contributes a compound or is reported with its row number; set
``MOLSCREEN_WORKERS`` to featurize rows on a process pool.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass
from multiprocessing import Pool
from pathlib import Path

import numpy as np

from .data import TaskDataset
from .featurize import DEFAULT_SCHEMA, FeatureSchema, SchemaError, featurize_smiles
from .metrics import MetricError, pchembl
from .smiles import SmilesError

ACTIVITY_SUFFIX = ":ic50_molar"
DIRECTION_SUFFIX = ":higher_is_better"
WORKERS_ENV = "MOLSCREEN_WORKERS"


class IngestError(ValueError):
    """The file as a whole cannot be ingested (rows may still fail softly)."""


@dataclass
class IngestReport:
    n_rows: int
    n_accepted: int
    rejected: list[tuple[int, str]]

    @property
    def n_rejected(self) -> int:
        return len(self.rejected)


def _worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _featurize_one(args):
    smiles, schema = args
    try:
        return True, featurize_smiles(smiles, schema)
    except (SmilesError, SchemaError) as exc:
        return False, f"SMILES rejected: {exc}"


def _featurize_many(smiles_list, schema):
    jobs = [(s, schema) for s in smiles_list]
    workers = _worker_count()
    if workers > 1 and len(jobs) > 1:
        with Pool(workers) as pool:
            return pool.map(_featurize_one, jobs)
    return [_featurize_one(j) for j in jobs]


def _read_rows(path) -> list[list[str]]:
    path = Path(path)
    if not path.exists():
        raise IngestError(f"no such file: {path}")
    with open(path, newline="") as handle:
        rows = list(csv.reader(handle))
    if not rows:
        raise IngestError(f"{path}: empty file (header required)")
    return rows


def _parse_task_header(columns) -> tuple[list[str], list[str], list[bool]]:
    names, directions, is_activity = [], [], []
    for col in columns:
        col = col.strip()
        if col.endswith(ACTIVITY_SUFFIX):
            names.append(col[: -len(ACTIVITY_SUFFIX)])
            directions.append("higher_is_better")
            is_activity.append(True)
        elif col.endswith(DIRECTION_SUFFIX):
            names.append(col[: -len(DIRECTION_SUFFIX)])
            directions.append("higher_is_better")
            is_activity.append(False)
        else:
            names.append(col)
            directions.append("lower_is_better")
            is_activity.append(False)
    return names, directions, is_activity


def ingest_csv(
    path, schema: FeatureSchema = DEFAULT_SCHEMA
) -> tuple[TaskDataset, IngestReport]:
    rows = _read_rows(path)
    header = [c.strip() for c in rows[0]]
    if not header or header[0] != "smiles":
        raise IngestError(f"{path}: first header column must be 'smiles'")
    if len(header) < 2:
        raise IngestError(f"{path}: need at least one task column")
    task_names, directions, is_activity = _parse_task_header(header[1:])
    n_tasks = len(task_names)

    rejected: list[tuple[int, str]] = []
    candidates: list[tuple[int, str, np.ndarray]] = []
    for row_number, row in enumerate(rows[1:], start=2):
        if len(row) != n_tasks + 1:
            rejected.append(
                (row_number, f"expected {n_tasks + 1} columns, got {len(row)}")
            )
            continue
        smiles = row[0].strip()
        labels = np.full(n_tasks, np.nan)
        bad = None
        for t, cell in enumerate(row[1:]):
            cell = cell.strip()
            if not cell:
                continue
            try:
                value = float(cell)
            except ValueError:
                bad = f"column {task_names[t]!r}: {cell!r} is not a number"
                break
            if is_activity[t]:
                try:
                    value = pchembl(value)
                except MetricError as exc:
                    bad = f"column {task_names[t]!r}: {exc}"
                    break
            labels[t] = value
        if bad is not None:
            rejected.append((row_number, bad))
            continue
        if not np.isfinite(labels).any():
            rejected.append((row_number, "row has no labels"))
            continue
        candidates.append((row_number, smiles, labels))

    results = _featurize_many([smi for _, smi, _ in candidates], schema)
    order: list[str] = []
    graphs: dict[str, object] = {}
    sums: dict[str, np.ndarray] = {}
    counts: dict[str, np.ndarray] = {}
    n_accepted = 0
    for (row_number, smiles, labels), (ok, payload) in zip(candidates, results):
        if not ok:
            rejected.append((row_number, payload))
            continue
        n_accepted += 1
        if smiles not in graphs:
            order.append(smiles)
            graphs[smiles] = payload
            sums[smiles] = np.zeros(n_tasks)
            counts[smiles] = np.zeros(n_tasks)
        present = np.isfinite(labels)
        sums[smiles][present] += labels[present]
        counts[smiles][present] += 1
    rejected.sort(key=lambda pair: pair[0])
    n_rows = len(rows) - 1
    report = IngestReport(n_rows=n_rows, n_accepted=n_accepted, rejected=rejected)
    if not order:
        raise IngestError(f"{path}: no valid rows")
    label_matrix = np.full((len(order), n_tasks), np.nan)
    for i, smiles in enumerate(order):
        present = counts[smiles] > 0
        label_matrix[i, present] = sums[smiles][present] / counts[smiles][present]
    ds = TaskDataset(
        smiles=order,
        graphs=[graphs[s] for s in order],
        labels=label_matrix,
        task_names=task_names,
        hit_directions=directions,
        schema=schema,
    )
    return ds, report


def read_smiles_csv(path) -> tuple[list[str], IngestReport]:
    """Read just the ``smiles`` column (a screening library), validating each
    molecule; other columns are ignored."""
    rows = _read_rows(path)
    header = [c.strip() for c in rows[0]]
    if "smiles" not in header:
        raise IngestError(f"{path}: no 'smiles' column in header")
    col = header.index("smiles")
    rejected: list[tuple[int, str]] = []
    pairs: list[tuple[int, str]] = []
    for row_number, row in enumerate(rows[1:], start=2):
        if len(row) <= col:
            rejected.append((row_number, "missing smiles cell"))
            continue
        pairs.append((row_number, row[col].strip()))
    results = _featurize_many([s for _, s in pairs], DEFAULT_SCHEMA)
    accepted = []
    for (row_number, smiles), (ok, payload) in zip(pairs, results):
        if ok:
            accepted.append(smiles)
        else:
            rejected.append((row_number, payload))
    rejected.sort(key=lambda pair: pair[0])
    report = IngestReport(
        n_rows=len(rows) - 1, n_accepted=len(accepted), rejected=rejected
    )
    return accepted, report


def write_dataset_csv(path, ds: TaskDataset) -> None:
    columns = [
        name + DIRECTION_SUFFIX if direction == "higher_is_better" else name
        for name, direction in zip(ds.task_names, ds.hit_directions)
    ]
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["smiles"] + columns)
        for i, smiles in enumerate(ds.smiles):
            cells = [
                repr(float(v)) if np.isfinite(v) else "" for v in ds.labels[i]
            ]
            writer.writerow([smiles] + cells)
