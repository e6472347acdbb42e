"""Structured verification records and their JSON/CSV serialization."""

import csv
import io
import json
from dataclasses import dataclass, field
from math import inf, isinf, isnan

CSV_COLUMNS = ["suite", "name", "n", "k", "l", "q", "radius", "resolution",
               "lhs", "rhs", "constant_used", "constant_source", "ratio",
               "tolerance", "passed"]


@dataclass
class InequalityReport:
    """One verification record: sides, constant, ratio, verdict, witness."""

    name: str
    lhs: float
    rhs: float
    constant_used: float
    constant_source: str  # paper-sharp | paper-explicit | empirical
    ratio: float
    tolerance: float
    passed: bool
    equality_case: bool = False
    params: dict = field(default_factory=dict)
    witness: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "lhs": _jsonable(self.lhs),
            "rhs": _jsonable(self.rhs),
            "constant_used": _jsonable(self.constant_used),
            "constant_source": self.constant_source,
            "ratio": _jsonable(self.ratio),
            "tolerance": self.tolerance,
            "passed": self.passed,
            "equality_case": self.equality_case,
            "params": {k: _jsonable(v) for k, v in sorted(self.params.items())},
            "witness": {k: _jsonable(v) for k, v in sorted(self.witness.items())},
        }


def _jsonable(v):
    if isinstance(v, float):
        if isnan(v):
            return "nan"
        if isinf(v):
            return "inf" if v > 0 else "-inf"
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    try:
        import numpy as np
        if isinstance(v, np.ndarray):
            return [_jsonable(float(x)) for x in v.tolist()]
        if isinstance(v, np.floating):
            return _jsonable(float(v))
        if isinstance(v, (np.integer, np.bool_)):
            return v.item()
    except ImportError:  # pragma: no cover
        pass
    return v


def make_report(name, lhs, rhs, constant_used, constant_source, tolerance,
                equality_case=False, params=None, witness=None) -> InequalityReport:
    """Assemble a record; pass means ratio <= 1 + tol (or |ratio-1| <= tol
    for equality cases).  A 0/0 comparison is a degenerate pass."""
    if rhs == 0.0:
        ratio = 0.0 if lhs == 0.0 else inf
        passed = lhs == 0.0
    else:
        ratio = lhs / rhs
        passed = (abs(ratio - 1.0) <= tolerance if equality_case
                  else ratio <= 1.0 + tolerance)
    return InequalityReport(name=name, lhs=float(lhs), rhs=float(rhs),
                            constant_used=float(constant_used),
                            constant_source=constant_source, ratio=float(ratio),
                            tolerance=float(tolerance), passed=bool(passed),
                            equality_case=equality_case,
                            params=dict(params or {}), witness=dict(witness or {}))


def make_check(name, deviation, allowance, tolerance=0.0, params=None,
               witness=None) -> InequalityReport:
    """A diagnostic record: observed deviation against its allowance."""
    rep = make_report(name, deviation, allowance, constant_used=allowance,
                      constant_source="empirical", tolerance=tolerance,
                      params=params, witness=witness)
    rep.params.setdefault("kind", "diagnostic")
    return rep


@dataclass
class SandwichReport:
    """Two-sided potential comparison along a radius cloud."""

    name: str
    radii: list
    ratios: list  # (-u)/W per sample
    c_lower: float
    c_upper: float
    decay_u: float
    decay_w: float
    passed: bool
    params: dict = field(default_factory=dict)
    witness: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "radii": _jsonable(self.radii),
            "ratios": _jsonable(self.ratios),
            "c_lower": _jsonable(self.c_lower),
            "c_upper": _jsonable(self.c_upper),
            "decay_u": _jsonable(self.decay_u),
            "decay_w": _jsonable(self.decay_w),
            "passed": self.passed,
            "params": {k: _jsonable(v) for k, v in sorted(self.params.items())},
            "witness": {k: _jsonable(v) for k, v in sorted(self.witness.items())},
        }

    def to_inequality_report(self) -> InequalityReport:
        """Flatten to the common record shape (lhs=c_lower, rhs=c_upper)."""
        return InequalityReport(
            name=self.name, lhs=self.c_lower, rhs=self.c_upper,
            constant_used=self.c_upper, constant_source="empirical",
            ratio=self.c_lower / self.c_upper if self.c_upper else 0.0,
            tolerance=0.0, passed=self.passed, params=dict(self.params),
            witness=dict(self.witness))


def suite_payload(suite, seed, reports, resolutions=None, version="0.1.0",
                  timestamp=None) -> dict:
    records = [r.to_dict() for r in reports]
    return {
        "suite": suite,
        "seed": seed,
        "resolutions": resolutions or {},
        "toolkit_version": version,
        "timestamp": timestamp,
        "all_passed": all(r["passed"] for r in records),
        "reports": records,
    }


def payload_to_json(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=False)


def payload_to_csv(payload: dict) -> str:
    """Flatten reports to fixed-column CSV rows (ratio recomputable)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rec in payload.get("reports", []):
        params = rec.get("params", {})
        row = [payload.get("suite", ""), rec.get("name", "")]
        for key in ("n", "k", "l", "q", "radius", "resolution"):
            row.append(params.get(key, ""))
        row.extend([rec.get("lhs"), rec.get("rhs"), rec.get("constant_used"),
                    rec.get("constant_source"), rec.get("ratio"),
                    rec.get("tolerance"), rec.get("passed")])
        writer.writerow(row)
    return buf.getvalue()
