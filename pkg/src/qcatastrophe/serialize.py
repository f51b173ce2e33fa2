"""CSV and JSON renderings of sweeps and fits.

Floats carry 12 significant digits and infinity is the literal ``inf``, so
parsing a file and writing it again reproduces it byte for byte.
"""

from __future__ import annotations

import csv
import io
import json
import math
from typing import Any

from .potentials import Model
from .sweep import FitForm, Method, PeakScan, PowerLawFit, SweepPoint, SweepResult

CSV_COLUMNS = ("model", "mu", "param_name", "param", "entropy_bits", "method")


def fmt_number(x: float) -> str:
    """12 significant digits; integral values keep no decimal point."""
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.12g}"


def fmt_float(x: float) -> str:
    """Like fmt_number but always reads back as a float (``1.0``, not ``1``)."""
    s = fmt_number(x)
    if s.lstrip("-").isdigit():
        s += ".0"
    return s


def _round(x: float) -> float | str:
    if math.isinf(x):
        return fmt_number(x)
    return float(fmt_number(x))


def _unround(x: Any) -> float:
    return float(x)


def sweep_to_csv(sr: SweepResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for pt in sr.points:
        writer.writerow([
            sr.model.value,
            fmt_number(sr.mu),
            sr.param_name,
            fmt_float(pt.param),
            fmt_float(pt.entropy_bits),
            pt.method.value,
        ])
    return buf.getvalue()


def sweep_from_csv(text: str) -> SweepResult:
    rows = list(csv.DictReader(io.StringIO(text)))
    if not rows:
        raise ValueError("empty sweep CSV")
    head = rows[0]
    points = tuple(
        SweepPoint(float(r["param"]), float(r["entropy_bits"]), Method(r["method"])) for r in rows
    )
    return SweepResult(Model(head["model"]), float(head["mu"]), head["param_name"], points)


def sweep_to_dict(sr: SweepResult) -> dict:
    return {
        "model": sr.model.value,
        "mu": _round(sr.mu),
        "param_name": sr.param_name,
        "points": [
            {"param": _round(pt.param), "entropy_bits": _round(pt.entropy_bits), "method": pt.method.value}
            for pt in sr.points
        ],
    }


def sweep_from_dict(d: dict) -> SweepResult:
    points = tuple(
        SweepPoint(_unround(p["param"]), _unround(p["entropy_bits"]), Method(p["method"]))
        for p in d["points"]
    )
    return SweepResult(Model(d["model"]), _unround(d["mu"]), d["param_name"], points)


def fit_to_dict(fit: PowerLawFit) -> dict:
    return {
        "form": fit.form.value,
        "c0": _round(fit.c0),
        "c1": _round(fit.c1),
        "residual_rms": _round(fit.residual_rms),
        "mu_values": [_round(m) for m in fit.mu_values],
    }


def fit_from_dict(d: dict) -> PowerLawFit:
    return PowerLawFit(
        FitForm(d["form"]),
        _unround(d["c0"]),
        _unround(d["c1"]),
        _unround(d["residual_rms"]),
        tuple(_unround(m) for m in d["mu_values"]),
    )


def scan_to_dict(scan: PeakScan) -> dict:
    return {
        "model": scan.model.value,
        "param_name": scan.param_name,
        "peaks": [
            {"mu": _round(mu), "param_star": _round(x), "entropy_star": _round(s)}
            for mu, x, s in scan.peaks
        ],
        "fit": fit_to_dict(scan.fit) if scan.fit is not None else None,
    }


def scan_from_dict(d: dict) -> PeakScan:
    peaks = tuple(
        (_unround(p["mu"]), _unround(p["param_star"]), _unround(p["entropy_star"])) for p in d["peaks"]
    )
    fit = fit_from_dict(d["fit"]) if d.get("fit") is not None else None
    return PeakScan(Model(d["model"]), d["param_name"], peaks, fit)


def to_json(obj: dict | list) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def serialize(result, fmt: str = "json") -> bytes:
    """Render a SweepResult, PowerLawFit or PeakScan as CSV (sweeps only) or JSON."""
    if fmt == "csv":
        if not isinstance(result, SweepResult):
            raise ValueError("CSV output is only defined for sweeps")
        return sweep_to_csv(result).encode()
    if fmt != "json":
        raise ValueError(f"unknown format {fmt!r}")
    if isinstance(result, SweepResult):
        return to_json(sweep_to_dict(result)).encode()
    if isinstance(result, PowerLawFit):
        return to_json(fit_to_dict(result)).encode()
    if isinstance(result, PeakScan):
        return to_json(scan_to_dict(result)).encode()
    raise TypeError(f"cannot serialize {type(result).__name__}")


def parse(data: bytes, kind: str, fmt: str = "json"):
    """Inverse of :func:`serialize`; ``kind`` is 'sweep', 'fit' or 'scan'."""
    text = data.decode()
    if fmt == "csv":
        if kind != "sweep":
            raise ValueError("CSV holds sweeps only")
        return sweep_from_csv(text)
    d = json.loads(text)
    return {"sweep": sweep_from_dict, "fit": fit_from_dict, "scan": scan_from_dict}[kind](d)
