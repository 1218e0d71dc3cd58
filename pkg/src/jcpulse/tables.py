"""Bundled reference pulse tables.

Two published parameter sets for the ground-to-|4,-> transfer ship with
the package so replay tests and the `replay` subcommand need no manual
transcription: table "I" holds single-harmonic (M=1) pulses, table "II"
three-harmonic (M=3) pulses, both at omega_r/2pi = 6000 MHz,
g/2pi = 180 MHz, delta = 0.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

from .pulses import Pulse, Tone
from .system import DriveOperator

__all__ = ["ReferenceRow", "ReferenceTable", "load_reference_table"]


@dataclass(frozen=True)
class ReferenceRow:
    """One published pulse: duration, parameters, and quoted error."""

    duration: float
    reported_infidelity: float
    pulse: Pulse


@dataclass(frozen=True)
class ReferenceTable:
    name: str
    target: int
    harmonics: int
    omega_r: float
    delta: float
    g: float
    rows: tuple[ReferenceRow, ...]

    def row(self, duration: float) -> ReferenceRow:
        for r in self.rows:
            if abs(r.duration - duration) < 1e-9:
                return r
        have = [r.duration for r in self.rows]
        raise KeyError(f"no row with duration {duration} ns; have {have}")


def load_reference_table(name: str) -> ReferenceTable:
    """Load bundled table "I" (M=1) or "II" (M=3)."""
    if name not in ("I", "II"):
        raise ValueError(f"unknown reference table {name!r}; expected 'I' or 'II'")
    path = resources.files("jcpulse.data").joinpath(f"table{name}.json")
    doc = json.loads(path.read_text(encoding="utf-8"))
    channel = DriveOperator(doc["channel"])
    rows = []
    for rec in doc["rows"]:
        tones = tuple(
            Tone(t["carrier"], tuple(t["a"]), tuple(t["b"])) for t in rec["tones"]
        )
        pulse = Pulse(channel, rec["duration"], tones)
        rows.append(ReferenceRow(rec["duration"], rec["reported_infidelity"], pulse))
    return ReferenceTable(
        name=doc["name"],
        target=doc["target"],
        harmonics=doc["harmonics"],
        omega_r=doc["system"]["omega_r"],
        delta=doc["system"]["delta"],
        g=doc["system"]["g"],
        rows=tuple(rows),
    )
