"""Flight-log records: CSV input/output and the per-sample corrections."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from ..errors import EmptyInputError, FormatError

COLUMNS = ("time_s", "px_m", "py_m", "pz_m", "speed_mps", "anemo_mps")


@dataclass(frozen=True)
class MeasurementRecord:
    """One synchronized log sample.

    ``drone_position`` is the drone position in a frame with the flow probe at
    the origin and z up.
    """

    time: float
    drone_position: tuple[float, float, float]
    drone_speed: float
    anemometer_speed: float


@dataclass
class ParsedLog:
    records: list[MeasurementRecord]
    rejected: list[tuple[int, str]] = field(default_factory=list)  # (line number, reason)
    source: str = ""


def _open_text(source):
    if isinstance(source, (str, Path)):
        return open(source, newline="")
    if isinstance(source, (bytes, bytearray)):
        return io.StringIO(source.decode())
    if isinstance(source, io.TextIOBase):
        return source
    # binary stream
    return io.TextIOWrapper(source, newline="")


def load_log(source) -> ParsedLog:
    """Parse a flight-log CSV.

    ``source`` may be a path, raw bytes, or a text/binary stream. Rows that
    cannot be parsed or violate record invariants are skipped and listed in
    ``ParsedLog.rejected``.

    Raises
    ------
    FormatError
        Header missing or lacking a mandatory column.
    EmptyInputError
        No data rows at all.
    """
    name = str(source) if isinstance(source, (str, Path)) else "<stream>"
    fh = _open_text(source)
    try:
        reader = csv.reader(row for row in fh if not row.startswith("#"))
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise EmptyInputError(f"{name}: empty file") from None
        missing = [c for c in COLUMNS if c not in header]
        if missing:
            raise FormatError(f"{name}: missing column(s) {', '.join(missing)}")
        idx = [header.index(c) for c in COLUMNS]

        records, rejected = [], []
        last_t = -math.inf
        n_rows = 0
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            n_rows += 1
            try:
                t, px, py, pz, v, u = (float(row[i]) for i in idx)
            except (IndexError, ValueError):
                rejected.append((line_no, "unparseable row"))
                continue
            if not all(math.isfinite(a) for a in (t, px, py, pz, v, u)):
                rejected.append((line_no, "non-finite value"))
            elif u < 0:
                rejected.append((line_no, "negative anemometer speed"))
            elif v < 0:
                rejected.append((line_no, "negative drone speed"))
            elif t < last_t:
                rejected.append((line_no, "time goes backwards"))
            else:
                last_t = t
                records.append(MeasurementRecord(t, (px, py, pz), v, u))
    finally:
        if isinstance(source, (str, Path)):
            fh.close()
    if n_rows == 0:
        raise EmptyInputError(f"{name}: header only, no data rows")
    return ParsedLog(records, rejected, name)


def write_log(records, dest) -> None:
    """Write records in the log CSV schema (path or text stream)."""
    own = isinstance(dest, (str, Path))
    fh = open(dest, "w", newline="") if own else dest
    try:
        w = csv.writer(fh)
        w.writerow(COLUMNS)
        for rec in records:
            px, py, pz = rec.drone_position
            w.writerow([f"{float(v):.17g}" for v in (rec.time, px, py, pz, rec.drone_speed, rec.anemometer_speed)])
    finally:
        if own:
            fh.close()


def filter_hover(records, v_max: float = 0.1) -> list[MeasurementRecord]:
    """Keep samples taken while the drone moved at most ``v_max`` (3D speed, inclusive)."""
    return [rec for rec in records if rec.drone_speed <= v_max]


def subtract_ambient(records, ambient: float) -> list[MeasurementRecord]:
    """Remove a constant background flow, clamping at zero."""
    if ambient < 0:
        raise ValueError(f"ambient flow must be non-negative, got {ambient}")
    return [replace(rec, anemometer_speed=max(0.0, rec.anemometer_speed - ambient)) for rec in records]


def estimate_ambient(records, pre_takeoff_window: float, min_samples: int = 10) -> float:
    """Median anemometer reading during the first ``pre_takeoff_window`` seconds of the log."""
    if not records:
        raise EmptyInputError("no records")
    t0 = records[0].time
    window = [rec.anemometer_speed for rec in records if rec.time - t0 < pre_takeoff_window]
    if len(window) < min_samples:
        raise EmptyInputError(
            f"only {len(window)} samples in the {pre_takeoff_window:g} s pre-takeoff window "
            f"(need {min_samples}); supply the ambient flow manually instead"
        )
    return float(np.median(window))


def drop_before(records, t: float) -> list[MeasurementRecord]:
    return [rec for rec in records if rec.time >= t]


def as_arrays(records):
    """Positions (n, 3) and anemometer speeds (n,) as numpy arrays."""
    if not records:
        return np.empty((0, 3)), np.empty(0)
    pos = np.array([rec.drone_position for rec in records], dtype=float)
    u = np.array([rec.anemometer_speed for rec in records], dtype=float)
    return pos, u
