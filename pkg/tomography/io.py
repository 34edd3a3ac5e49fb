"""
Reading and writing tomography data.

Counts go to CSV (one row per setting and outcome) or JSON. Matrices are
stored as {"dim": d, "entries": [[re, im], ...]} in row-major order.
"""

import csv
import io
import logging
from collections import OrderedDict
from typing import Sequence

import numpy as np
import orjson

from core.errors import ConfigError
from core.states import DensityMatrix
from pcm.device import PcmTag
from pcm.povm import PcmPovm
from storage.reports import atomic_write_bytes, atomic_write_text, dumps, rows_to_csv

from .settings import TomographyRecord, TomographySetting


logger = logging.getLogger(__name__)

RECORD_COLUMNS = ("setting", "outcome", "bits", "count")


def matrix_to_dict(m: np.ndarray) -> dict:
    m = np.asarray(m, dtype=complex)
    flat = m.reshape(-1)
    return {"dim": int(m.shape[0]), "entries": np.stack([flat.real, flat.imag], axis=1)}


def matrix_from_dict(data: dict) -> np.ndarray:
    try:
        d = int(data["dim"])
        pairs = np.asarray(data["entries"], dtype=float)
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"Malformed matrix record: {e}") from e
    if pairs.shape != (d * d, 2):
        raise ConfigError(f"Matrix record has {pairs.shape[0]} entries for dimension {d}")
    return (pairs[:, 0] + 1j * pairs[:, 1]).reshape(d, d)


def state_to_dict(rho: DensityMatrix) -> dict:
    return {"num_qubits": rho.num_qubits, **matrix_to_dict(rho.entries)}


def state_from_dict(data: dict) -> DensityMatrix:
    return DensityMatrix.from_unnormalized(int(data["num_qubits"]), matrix_from_dict(data))


def povm_to_dict(povm: PcmPovm) -> dict:
    return {tag.value: matrix_to_dict(m) for tag, m in povm.elements.items()}


def povm_from_dict(data: dict) -> PcmPovm:
    try:
        return PcmPovm({PcmTag(k): matrix_from_dict(v) for k, v in data.items()})
    except ValueError as e:
        raise ConfigError(f"Unknown POVM tag in {sorted(data)}") from e


def _bits(outcome: int, n: int) -> str:
    # qubit 0 first
    return "".join(str((outcome >> q) & 1) for q in range(n))


def records_to_rows(records: Sequence[TomographyRecord]) -> list:
    rows = []
    for rec in records:
        n = rec.setting.num_qubits
        for o, c in enumerate(rec.counts):
            rows.append((rec.setting.label, o, _bits(o, n), int(c)))
    return rows


def records_to_csv(records: Sequence[TomographyRecord]) -> str:
    return rows_to_csv(RECORD_COLUMNS, records_to_rows(records))


def records_from_csv(text: str) -> list:
    grouped: "OrderedDict[str, dict]" = OrderedDict()
    reader = csv.DictReader(io.StringIO(text))
    missing = set(RECORD_COLUMNS) - set(reader.fieldnames or ())
    if missing:
        raise ConfigError(f"Counts file is missing columns {sorted(missing)}")
    for row in reader:
        grouped.setdefault(row["setting"], {})[int(row["outcome"])] = int(row["count"])
    records = []
    for label, by_outcome in grouped.items():
        setting = TomographySetting.of(label)
        counts = np.zeros(2 ** setting.num_qubits, dtype=np.int64)
        for o, c in by_outcome.items():
            counts[o] = c
        records.append(TomographyRecord(setting, counts))
    return records


def records_to_dict(records: Sequence[TomographyRecord]) -> list:
    return [{"setting": r.setting.label, "counts": r.counts} for r in records]


def records_from_dict(data: Sequence[dict]) -> list:
    return [TomographyRecord(TomographySetting.of(d["setting"]), np.asarray(d["counts"])) for d in data]


def save_records(path: str, records: Sequence[TomographyRecord]) -> None:
    if path.endswith(".csv"):
        atomic_write_text(path, records_to_csv(records))
    else:
        atomic_write_bytes(path, dumps(records_to_dict(records)))
    logger.info(f"Saved {len(records)} tomography records to {path}")


def load_records(path: str) -> list:
    with open(path, "rb") as fh:
        raw = fh.read()
    if path.endswith(".csv"):
        return records_from_csv(raw.decode("utf-8"))
    try:
        return records_from_dict(orjson.loads(raw))
    except orjson.JSONDecodeError as e:
        raise ConfigError(f"{path}: {e}") from e
