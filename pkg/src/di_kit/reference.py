"""Comparison of computed curves against the shipped reference coordinates.

Deviations are informational: the reference curves were produced with a
different relaxation, so no tolerance is enforced here.
"""
import csv
import io
import math
import os
from dataclasses import dataclass
from pathlib import Path

from .errors import FixtureMissingError

FIXTURE_ENV = "DI_KIT_FIXTURE_DIR"
FIXTURE_NAME = "fig2_reference.csv"
QBER_MATCH = 1e-6


@dataclass(frozen=True)
class ReferenceRow:
    qber: float
    one_switch: float
    two_switch: float


@dataclass(frozen=True)
class Deviation:
    qber: float
    ours_one: float
    ours_two: float
    ref_one: float
    ref_two: float

    @property
    def dev_one(self):
        return self.ours_one - self.ref_one

    @property
    def dev_two(self):
        return self.ours_two - self.ref_two


def fixture_path():
    base = os.environ.get(FIXTURE_ENV)
    root = Path(base) if base else Path(__file__).resolve().parent / "data"
    return root / FIXTURE_NAME


def _num(cell):
    cell = cell.strip()
    return float(cell) if cell else math.nan


def load_reference(path=None):
    path = Path(path) if path else fixture_path()
    if not path.is_file():
        raise FixtureMissingError(f"reference fixture not found: {path}")
    rows = []
    with path.open(newline="") as fh:
        body = (line for line in fh if not line.startswith("#"))
        for rec in csv.DictReader(body):
            rows.append(ReferenceRow(_num(rec["qber"]), _num(rec["one_switch"]), _num(rec["two_switch"])))
    return rows


def reference_report(points, reference=None):
    """Signed deviations ``ours - reference`` at every QBER present in both.

    ``points`` is a list of :class:`~di_kit.pipeline.CurvePoint` (or any
    objects with ``qber``, ``rate_one_switch`` and ``rate_two_switch``).
    """
    ref = load_reference() if reference is None else reference
    out = []
    for p in points:
        match = next((r for r in ref if abs(r.qber - p.qber) <= QBER_MATCH), None)
        if match is None:
            continue
        ours_two = p.rate_two_switch if p.rate_two_switch is not None else math.nan
        out.append(Deviation(p.qber, p.rate_one_switch, ours_two, match.one_switch, match.two_switch))
    return out


def format_report(deviations):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["qber", "ours_one", "ref_one", "dev_one", "ours_two", "ref_two", "dev_two"])
    for d in deviations:
        w.writerow([format(x, ".6g") for x in (d.qber, d.ours_one, d.ref_one, d.dev_one, d.ours_two, d.ref_two, d.dev_two)])
    return buf.getvalue()
