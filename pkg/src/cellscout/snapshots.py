"""Versioned JSON persistence for resumable labeling sessions.

Float arrays that must restore bit-equal (probabilities, disagreement) are
stored as shortest-round-trip decimal strings; ``float(repr(x))`` recovers
the exact IEEE-754 value on every platform we care about.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Any

from .errors import DecodeError, IoError, VersionMismatch

SNAPSHOT_FORMAT_VERSION = 1


def floats_to_strings(values) -> list[str]:
    return [repr(float(v)) for v in values]


def strings_to_floats(values) -> list[float]:
    return [float(v) for v in values]


def config_digest(config_dict: dict) -> str:
    canonical = json.dumps(config_dict, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


@dataclass
class SessionSnapshot:
    """Complete durable state of a labeling session.

    ``columns`` holds per-column model summaries (committee JSON, probability
    strings, disagreement strings, CV history, change fraction, degenerate
    flag, training count). ``selector`` holds round-robin cursor, warm-up
    bookkeeping and the selection counter. The snapshot does not embed the
    table itself, only its digest; the caller re-supplies the data on resume.
    """

    format_version: int
    config: dict
    config_hash: str
    table_hash: str
    iteration: int
    labels_used: int
    phase: str
    labels: list[dict]
    columns: list[dict]
    selector: dict
    init_state: dict
    pending: dict | None
    convergence: list[dict] = field(default_factory=list)

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "format_version": self.format_version,
            "config": self.config,
            "config_hash": self.config_hash,
            "table_hash": self.table_hash,
            "iteration": self.iteration,
            "labels_used": self.labels_used,
            "phase": self.phase,
            "labels": self.labels,
            "columns": self.columns,
            "selector": self.selector,
            "init_state": self.init_state,
            "pending": self.pending,
            "convergence": self.convergence,
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "SessionSnapshot":
        try:
            version = obj["format_version"]
        except (TypeError, KeyError) as exc:
            raise DecodeError("snapshot lacks a format_version field") from exc
        if version != SNAPSHOT_FORMAT_VERSION:
            raise VersionMismatch(version, SNAPSHOT_FORMAT_VERSION)
        try:
            return cls(
                format_version=version,
                config=obj["config"],
                config_hash=obj["config_hash"],
                table_hash=obj["table_hash"],
                iteration=obj["iteration"],
                labels_used=obj["labels_used"],
                phase=obj["phase"],
                labels=obj["labels"],
                columns=obj["columns"],
                selector=obj["selector"],
                init_state=obj["init_state"],
                pending=obj["pending"],
                convergence=obj.get("convergence", []),
            )
        except KeyError as exc:
            raise DecodeError(f"snapshot missing field {exc}") from exc


def save_session(snapshot: SessionSnapshot, path: str) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(snapshot.to_json_dict(), fh, sort_keys=True, separators=(",", ":"))
            fh.write("\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def load_session(path: str) -> SessionSnapshot:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = fh.read()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    try:
        obj = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise DecodeError(f"snapshot is not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise DecodeError("snapshot root must be a JSON object")
    return SessionSnapshot.from_json_dict(obj)
