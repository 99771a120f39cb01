"""Append-only store of logged bandit decisions with immutable read snapshots.

One record is one assignment decision: the context shown, the arm chosen,
the exact probability with which it was chosen, and the attributed reward.
Off-policy estimates are only as good as this log, so ingestion rejects
loudly instead of dropping silently, and a reject ratio above 10% aborts.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from .config import ExperimentConfig
from .context import ContextSchema, ContextVector, encode_context
from .exceptions import EncodingError, IngestError

MAX_REJECT_RATIO = 0.10

_REQUIRED_KEYS = {"record_id", "ts", "context", "arm_id", "propensity", "reward"}
_OPTIONAL_KEYS = {"user_id"}


@dataclass(slots=True, eq=True)
class LogRecord:
    record_id: str
    ts: datetime
    context: ContextVector
    arm_id: str
    propensity: float
    reward: float
    user_id: str | None = None


@dataclass(frozen=True)
class IngestReport:
    accepted: int
    rejected: int
    rejections: tuple[tuple[int, str], ...]  # (1-based line number, reason)


class LogView:
    """Immutable snapshot of a store; exposes dense arrays for estimators."""

    def __init__(
        self,
        records: tuple[LogRecord, ...],
        schema: ContextSchema,
        arm_ids: tuple[str, ...],
    ):
        self._records = records
        self.schema = schema
        self.arm_ids = arm_ids
        n = len(records)
        d = schema.encoded_width
        index = {a: i for i, a in enumerate(arm_ids)}
        self.X = np.empty((n, d), dtype=np.float64)
        self.arm_index = np.empty(n, dtype=np.int64)
        self.propensity = np.empty(n, dtype=np.float64)
        self.reward = np.empty(n, dtype=np.float64)
        for i, r in enumerate(records):
            self.X[i] = r.context.encoded
            self.arm_index[i] = index[r.arm_id]
            self.propensity[i] = r.propensity
            self.reward[i] = r.reward
        for arr in (self.X, self.arm_index, self.propensity, self.reward):
            arr.setflags(write=False)

    @property
    def n(self) -> int:
        return len(self._records)

    @property
    def records(self) -> tuple[LogRecord, ...]:
        return self._records

    def __len__(self) -> int:
        return len(self._records)

    def __iter__(self) -> Iterator[LogRecord]:
        return iter(self._records)


class LogStore:
    """Single-writer append-only record store."""

    def __init__(self, config: ExperimentConfig):
        self.schema = config.schema
        self.arm_ids = config.arm_ids
        self._records: list[LogRecord] = []
        self._seen_ids: set[str] = set()
        self.ingest_report: IngestReport | None = None

    def __len__(self) -> int:
        return len(self._records)

    def append(self, record: LogRecord) -> None:
        self._validate(record)
        self._records.append(record)
        self._seen_ids.add(record.record_id)

    def _validate(self, record: LogRecord) -> None:
        if record.record_id in self._seen_ids:
            raise IngestError(f"duplicate record_id '{record.record_id}'")
        if record.arm_id not in self.arm_ids:
            raise IngestError(f"unknown arm_id '{record.arm_id}'")
        if not (0.0 < record.propensity <= 1.0):
            raise IngestError(
                f"propensity must be in (0, 1], got {record.propensity}"
            )
        if not math.isfinite(record.reward):
            raise IngestError("non-finite reward")

    def snapshot(self) -> LogView:
        return LogView(tuple(self._records), self.schema, self.arm_ids)


def _parse_line(line: str, store: LogStore, schema: ContextSchema) -> LogRecord:
    try:
        doc = json.loads(line)
    except json.JSONDecodeError:
        raise IngestError("malformed json") from None
    if not isinstance(doc, dict):
        raise IngestError("line is not a json object")

    missing = _REQUIRED_KEYS - set(doc)
    if missing:
        raise IngestError(f"missing key '{sorted(missing)[0]}'")
    unexpected = set(doc) - _REQUIRED_KEYS - _OPTIONAL_KEYS
    if unexpected:
        raise IngestError(f"unexpected key '{sorted(unexpected)[0]}'")

    try:
        ts = datetime.fromisoformat(str(doc["ts"]).replace("Z", "+00:00"))
    except ValueError:
        raise IngestError(f"invalid timestamp '{doc['ts']}'") from None
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)

    try:
        propensity = float(doc["propensity"])
        reward = float(doc["reward"])
    except (TypeError, ValueError):
        raise IngestError("propensity and reward must be numbers") from None
    if propensity <= 0.0:
        raise IngestError("nonpositive propensity")
    if propensity > 1.0:
        raise IngestError(f"propensity above 1 ({propensity})")
    if not math.isfinite(reward):
        raise IngestError("non-finite reward")

    arm_id = str(doc["arm_id"])
    if arm_id not in store.arm_ids:
        raise IngestError(f"unknown arm_id '{arm_id}'")

    if not isinstance(doc["context"], dict):
        raise IngestError("context must be an object")
    try:
        context = encode_context(doc["context"], schema)
    except EncodingError as e:
        raise IngestError(str(e)) from None

    user_id = doc.get("user_id")
    return LogRecord(
        record_id=str(doc["record_id"]),
        ts=ts,
        context=context,
        arm_id=arm_id,
        propensity=propensity,
        reward=reward,
        user_id=None if user_id is None else str(user_id),
    )


def ingest_logs(path: str | Path, config: ExperimentConfig) -> LogStore:
    """Read a line-delimited log file; returns a store carrying an IngestReport.

    Each line is validated independently. A bad line is rejected with its
    line number and reason; more than 10% rejections aborts the ingest.
    """
    path = Path(path)
    if not path.exists():
        raise IngestError(f"log file not found: {path}")

    store = LogStore(config)
    accepted: list[LogRecord] = []
    rejections: list[tuple[int, str]] = []
    total = 0
    for line_no, line in enumerate(path.read_text().splitlines(), start=1):
        if not line.strip():
            continue
        total += 1
        try:
            record = _parse_line(line, store, config.schema)
            store._validate(record)
            store._seen_ids.add(record.record_id)
            accepted.append(record)
        except IngestError as e:
            rejections.append((line_no, str(e)))

    if total > 0 and len(rejections) / total > MAX_REJECT_RATIO:
        raise IngestError(
            f"{len(rejections)}/{total} lines rejected "
            f"(> {MAX_REJECT_RATIO:.0%}); first: "
            f"line {rejections[0][0]}: {rejections[0][1]}"
        )

    accepted.sort(key=lambda r: r.ts)  # stable, preserves file order on ties
    store._records = accepted
    store.ingest_report = IngestReport(
        accepted=len(accepted),
        rejected=len(rejections),
        rejections=tuple(rejections),
    )
    return store


def record_to_dict(record: LogRecord) -> dict:
    doc = {
        "record_id": record.record_id,
        "ts": record.ts.isoformat(),
        "context": record.context.raw,
        "arm_id": record.arm_id,
        "propensity": record.propensity,
        "reward": record.reward,
    }
    if record.user_id is not None:
        doc["user_id"] = record.user_id
    return doc


def write_log_file(records: Iterable[LogRecord], path: str | Path) -> int:
    """Serialize records as JSON lines; round-trips through ingest_logs."""
    count = 0
    with open(path, "w") as fh:
        for record in records:
            fh.write(json.dumps(record_to_dict(record)) + "\n")
            count += 1
    return count
