"""Shared driver helpers for the experiment scripts."""

from __future__ import annotations

from cellscout import Session, oracle_label


def drive(session, dirty, gt, stop_when=None):
    """Submit oracle labels batch by batch until the session finishes or
    ``stop_when(session)`` turns true; returns the session."""
    while session.phase != "done" and session.pending is not None:
        labels = [oracle_label(dirty, gt, cell) for cell in session.pending.cells]
        session.submit(labels)
        if stop_when is not None and stop_when(session):
            break
    return session


def labels_to_global_f1(session, target):
    """First labels_used at which global F1 reached the target, else None."""
    for point in session.convergence:
        if point.f1 >= target:
            return point.labels_used
    return None


def labels_to_column_f1(session, column, target):
    """First labels_used at which one column's F1 reached the target."""
    for record in session.log_records:
        entry = record["per_column"].get(str(column), {})
        f1 = entry.get("f1")
        if f1 is not None and f1 >= target:
            return record["labels_used"]
    return None
