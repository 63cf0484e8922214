"""Sampled time traces and their on-disk formats.

A trace CSV starts with the exact header line ``# rabibeat-trace v1``
followed by the column line ``time_us,signal`` and one row per sample.
Optional metadata travels in a JSON sidecar named ``<stem>.meta.json``
with the top-level keys ``units``, ``drive``, ``decay`` and ``provenance``.
Serialization is deterministic: equal traces produce byte-identical files,
and parse -> re-serialize is the identity on files this module wrote.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = ["SampledTrace", "TRACE_HEADER", "format_float", "meta_path_for"]

TRACE_HEADER = "# rabibeat-trace v1"
TRACE_COLUMNS = "time_us,signal"


def format_float(x: float) -> str:
    """13-significant-digit format; parses back to a float that reprints
    identically, which keeps file round-trips byte-stable."""
    return f"{x:.12e}"


def meta_path_for(csv_path) -> Path:
    return Path(csv_path).with_suffix(".meta.json")


@dataclass
class SampledTrace:
    """A sampled signal: times in microseconds, dimensionless values.

    Times must be strictly increasing and finite.  ``meta`` is free-form
    JSON-serializable metadata.
    """

    times: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.times.ndim != 1 or self.values.ndim != 1:
            raise ValueError("times and values must be one-dimensional")
        if self.times.size != self.values.size:
            raise ValueError(
                f"length mismatch: {self.times.size} times, "
                f"{self.values.size} values"
            )
        if self.times.size < 2:
            raise ValueError("a trace needs at least two samples")
        if not np.all(np.isfinite(self.times)) or not np.all(
            np.isfinite(self.values)
        ):
            raise ValueError("times and values must be finite")
        if not np.all(np.diff(self.times) > 0):
            raise ValueError("times must be strictly increasing")

    @property
    def n(self) -> int:
        return int(self.times.size)

    @property
    def duration(self) -> float:
        return float(self.times[-1] - self.times[0])

    @property
    def dt(self) -> float:
        """Mean sample spacing in microseconds."""
        return self.duration / (self.n - 1)

    def is_uniform(self, rtol: float = 1e-6) -> bool:
        steps = np.diff(self.times)
        return bool(np.all(np.abs(steps - steps[0]) <= rtol * abs(steps[0])))

    def to_csv(self, path) -> Path:
        path = Path(path)
        lines = [TRACE_HEADER, TRACE_COLUMNS]
        for t, v in zip(self.times, self.values):
            lines.append(f"{format_float(t)},{format_float(v)}")
        path.write_text("\n".join(lines) + "\n", encoding="ascii")
        return path

    @classmethod
    def from_csv(cls, path) -> "SampledTrace":
        path = Path(path)
        raw = path.read_text(encoding="ascii").splitlines()
        if not raw or raw[0].strip() != TRACE_HEADER:
            raise ValueError(
                f"{path}:1: missing trace header {TRACE_HEADER!r}"
            )
        times, values = [], []
        for lineno, line in enumerate(raw[1:], start=2):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            if text == TRACE_COLUMNS:
                continue
            parts = text.split(",")
            if len(parts) != 2:
                raise ValueError(
                    f"{path}:{lineno}: expected two comma-separated fields, "
                    f"got {line!r}"
                )
            try:
                times.append(float(parts[0]))
                values.append(float(parts[1]))
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
        if len(times) < 2:
            raise ValueError(f"{path}: fewer than two data rows")
        meta = {}
        side = meta_path_for(path)
        if side.exists():
            meta = json.loads(side.read_text(encoding="utf-8"))
        return cls(np.array(times), np.array(values), meta)

    def save(self, path) -> Path:
        """Write the CSV and, when metadata is present, the JSON sidecar."""
        path = self.to_csv(path)
        if self.meta:
            meta_path_for(path).write_text(
                json.dumps(self.meta, indent=2, sort_keys=True) + "\n",
                encoding="utf-8",
            )
        return path
