"""Access to the frozen calibration file shipped with the package.

The file is produced by ``switchmlsi derive``; every constant carries the seed
and search budget that produced it.
"""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources

FILENAME = "derived_constants.json"

# constants that follow from the proofs themselves, kept next to the measured ones
PROOF_CONSTANTS = {
    "dirichlet_contraction_proof": 1.5,  # 1 + 1/(2γ) with γ ≥ 1
    "entropy_preservation_proof": 0.15342640972002735,  # (1 − log 2)/2
    "telescope_C_proof": 64.0,
    "flat_entropy_C": 12.0,
}


@lru_cache(maxsize=1)
def load() -> dict:
    try:
        text = resources.files("switchmlsi").joinpath("data", FILENAME).read_text()
    except FileNotFoundError:
        return {"constants": {}}
    return json.loads(text)


def constant(name: str) -> float:
    if name in PROOF_CONSTANTS:
        return PROOF_CONSTANTS[name]
    consts = load().get("constants", {})
    if name not in consts:
        raise KeyError(f"calibration constant {name!r} missing; run `switchmlsi derive`")
    entry = consts[name]
    return entry["value"] if isinstance(entry, dict) else entry


def band(name: str) -> tuple[float, float]:
    entry = load()["constants"][name]
    return tuple(entry["value"])
