"""Regenerate the frozen calibration file from the reference oracles.

Everything here is deterministic given ``DERIVE_SEED``; the output carries
no timestamps so a rerun can be compared byte for byte.
"""

from __future__ import annotations

import json
import math
from fractions import Fraction
from pathlib import Path


from . import __version__
from . import oracles
from .chain import FiniteChain
from .ensembles import positive_functions
from .regularize import check_dirichlet_contraction, check_entropy_preservation, flat_entropy_ratio, upsilon
from .switch import build_Qu, witness_closed_form

DERIVE_SEED = 20240611
MARGIN = 1.1
TELESCOPE_R = (2.0, math.e, 10.0)
TELESCOPE_T = tuple(range(1, 13))
FLAT_DELTAS = (0.5, 0.1, 1e-2, 1e-4)


def _telescope(seed: int, trials: int) -> dict:
    table = []
    for T in TELESCOPE_T:
        for r in TELESCOPE_R:
            res = oracles.telescope_worst_case_search(T, r, trials, seed + 31 * T)
            table.append({"T": T, "r": r, "max_factor": res["max_factor"], "normalized": res["normalized"]})
    worst = max(t["normalized"] for t in table)
    return {"value": MARGIN * worst, "raw_max_normalized": worst, "margin": MARGIN, "seed": seed,
            "trials_per_cell": trials, "source": "oracles.telescope_worst_case_search", "table": table}


def _regularization(chain: FiniteChain, count: int, seed: int) -> tuple[dict, dict]:
    U = upsilon(chain)
    dmax, emin = 0.0, math.inf
    dfam = efam = None
    for fam, f in positive_functions(chain, count, seed, r=U):
        _, _, rd = check_dirichlet_contraction(chain, f, U)
        _, _, re = check_entropy_preservation(chain, f, U)
        if rd is not None and rd > dmax:
            dmax, dfam = rd, fam
        if re is not None and re < emin:
            emin, efam = re, fam
    common = {"seed": seed, "count": count, "chain": "Qu(4,2)", "r": U, "margin": MARGIN}
    return ({"value": MARGIN * dmax, "measured": dmax, "argmax_family": dfam, **common},
            {"value": emin / MARGIN, "measured": emin, "argmin_family": efam, **common})


def _flat_entropy(chain: FiniteChain, count: int, seed: int) -> dict:
    pi = chain.pi
    worst = 0.0
    per = {}
    for delta in FLAT_DELTAS:
        w = 0.0
        for _, g in positive_functions(chain, count, seed + int(1 / delta)):
            f = delta + (1 - delta) * g / float(pi @ g)
            r = flat_entropy_ratio(pi, f, delta)
            if r is not None:
                w = max(w, r)
        per[str(delta)] = w
        worst = max(worst, w)
    return {"value": worst, "per_delta": per, "seed": seed, "count": count, "proof_bound": 12.0}


def _witness_band() -> dict:
    per = {str(n): witness_closed_form(n, 2).ratio_per_nd for n in (4, 5, 6, 7)}
    lo, hi = min(per.values()), max(per.values())
    return {"value": [lo / MARGIN, hi * MARGIN], "per_n": per, "margin": MARGIN, "mode": "closed_form"}


def derive(seed: int = DERIVE_SEED, telescope_trials: int = 1500, ensemble: int = 10_000) -> dict:
    Qu4 = build_Qu(4, 2)
    tel = _telescope(seed, telescope_trials)
    dc, ep = _regularization(Qu4, ensemble, seed + 1)
    consts = {
        "telescope_C": tel,
        "comparison_C": {"value": 2 * tel["value"], "source": "twice telescope_C"},
        "dirichlet_contraction_max": dc,
        "entropy_preservation_min": ep,
        "flat_entropy_ratio_max": _flat_entropy(Qu4, 2000, seed + 2),
        "mlsi_witness_band": _witness_band(),
    }
    counts_simple = {str(n): oracles.count_line_sum_matrices(n, 2, 1) for n in (4, 5, 6)}
    counts_multi = {str(n): oracles.count_line_sum_matrices(n, 2, 2) for n in (4, 5, 6)}
    qu_edges = {str(n): len(oracles.switch_graph_edges(n, 2)) for n in (4, 5)}
    conf = oracles.configuration_measure(4, 2)
    simple4 = sum((p for g, p in conf.items() if max(max(r) for r in g) <= 1), Fraction(0))
    t_mix = oracles.dense_mixing_time(Qu4, 0.25)
    derived = {
        "simple_counts_d2": counts_simple,
        "multi_counts_d2": counts_multi,
        "qu_directed_edges_d2": qu_edges,
        "simple_mass_n4_d2": f"{simple4.numerator}/{simple4.denominator}",
        "configuration_support_n4_d2": len(conf),
        "tv_mixing_time_n4_d2_eps_quarter": t_mix,
    }
    return {"version": __version__, "seed": seed, "constants": consts, "derived": derived}


def dumps(obj: dict) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def write(path: str | Path, obj: dict | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(obj if obj is not None else derive()))
    return path


def default_path() -> Path:
    return Path(__file__).parent / "data" / "derived_constants.json"
