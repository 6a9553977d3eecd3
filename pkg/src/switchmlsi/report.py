"""Report objects, status bookkeeping and deterministic JSON/CSV output.

The JSON body depends only on inputs and seeds.  Wall-clock data goes into a
``<name>.meta.json`` sidecar so that two runs can be compared byte for byte.
"""

from __future__ import annotations

import csv
import json
import math
import os
import platform
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__

PASS, FAIL, REPORTED = "PASS", "FAIL", "REPORTED"
OUT_ENV = "SWITCHMLSI_OUT"


@dataclass
class Claim:
    id: str
    title: str
    status: str
    measured: dict = field(default_factory=dict)
    tolerance: Any = None
    note: str = ""

    def as_dict(self) -> dict:
        return {"id": self.id, "title": self.title, "status": self.status, "measured": self.measured,
                "tolerance": self.tolerance, "note": self.note}

    def line(self) -> str:
        return f"{self.status} [{self.id}] {self.title}"


def status(ok: bool) -> str:
    return PASS if ok else FAIL


def overall(claims: Sequence[Claim]) -> str:
    return FAIL if any(c.status == FAIL for c in claims) else PASS


def _clean(x):
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        x = float(x)
        if math.isnan(x) or math.isinf(x):
            return str(x)
        return x
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, Claim):
        return _clean(x.as_dict())
    return x


def dumps(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n"


def out_dir(explicit: str | None = None) -> Path:
    p = Path(explicit or os.environ.get(OUT_ENV) or "reports")
    p.mkdir(parents=True, exist_ok=True)
    return p


def envelope(command: str, params: dict, claims: Sequence[Claim] = (), results: dict | None = None,
             tolerances: dict | None = None) -> dict:
    return {"tool": "switchmlsi", "version": __version__, "command": command, "parameters": params,
            "tolerances": tolerances or {}, "claims": [c.as_dict() for c in claims],
            "status": overall(claims), "results": results or {}}


def write_report(directory: Path, name: str, body: dict, started: float | None = None) -> Path:
    """``<name>.json`` plus ``<name>.meta.json`` holding timestamps and host details."""
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / f"{name}.json"
    path.write_text(dumps(body))
    now = time.time()
    meta = {"report": path.name, "written_at": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime(now)),
            "elapsed_s": None if started is None else now - started,
            "python": platform.python_version(), "platform": platform.platform()}
    (directory / f"{name}.meta.json").write_text(dumps(meta))
    return path


def write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence]) -> Path:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])
    return path
