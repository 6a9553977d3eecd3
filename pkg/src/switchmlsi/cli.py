"""Command-line entry point.

Exit status: 0 when every claim passes or is reported, 1 on any FAIL or
library error, 2 when a state space exceeds the enumeration cap.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time
from pathlib import Path

EXIT_OK, EXIT_FAIL, EXIT_TOO_LARGE = 0, 1, 2
COMMANDS = ("enumerate", "chain", "mlsi", "regularize", "flow", "aux", "mix", "simulate", "derive", "verify-all")


def _common(p: argparse.ArgumentParser, nd: bool = True, seed: bool = False, out: bool = True) -> None:
    if nd:
        p.add_argument("--n", type=int, required=True)
        p.add_argument("--d", type=int, required=True)
    if seed:
        p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", default=None, help="report directory (default: $SWITCHMLSI_OUT or ./reports)")
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    p.add_argument("--cap", type=int, default=None, help="largest state space to enumerate")
    p.add_argument("--no-figures", action="store_true")
    if out:
        p.add_argument("--out", default=None, help="report path (JSON); companions go alongside")


def parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="switchmlsi", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enumerate", help="list graphs, one per line")
    _common(p, out=False)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--simple", action="store_true", default=True)
    g.add_argument("--multi", action="store_true")
    p.add_argument("--out", default=None, help="write graphs here instead of stdout")

    p = sub.add_parser("chain", help="build and validate a chain")
    _common(p)
    p.add_argument("--kind", choices=("Qu", "Qc", "aux"), default="Qu")
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--export", action="store_true", help="also write the chain as JSON")

    p = sub.add_parser("mlsi", help="MLSI estimate and the lower-bound witness")
    _common(p, seed=True)
    p.add_argument("--kind", choices=("Qu", "Qc", "aux"), default="Qu")
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--budget", type=int, default=200)
    p.add_argument("--mode", choices=("exact", "closed-form"), default="exact")

    p = sub.add_parser("regularize", help="regularization lemmas over a seeded ensemble")
    _common(p, seed=True)
    p.add_argument("--count", type=int, default=1000)
    p.add_argument("--r", type=float, default=None, help="defaults to the chain's Upsilon")

    p = sub.add_parser("flow", help="auxiliary flow: conservation, congestion and comparison bound")
    _common(p, seed=True)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--r", type=float, default=None)
    p.add_argument("--export", action="store_true")

    p = sub.add_parser("aux", help="auxiliary-chain checks")
    _common(p)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--check", choices=("flow", "congestion", "psi", "beta"), action="append")
    p.add_argument("--t", type=float, default=0.0)

    p = sub.add_parser("mix", help="mixing time, exact or simulated")
    _common(p, seed=True)
    p.add_argument("--eps", type=float, default=0.25)
    p.add_argument("--mode", choices=("exact", "simulate"), default="exact")
    p.add_argument("--runs", type=int, default=4000)
    p.add_argument("--ns", type=int, nargs="*", default=None, help="sizes for the n log n fit (simulate mode)")
    p.add_argument("--tmax", type=float, default=40.0)
    p.add_argument("--dt", type=float, default=0.5)

    p = sub.add_parser("simulate", help="switch-chain trajectories and the distinguishing statistic")
    _common(p, seed=True)
    p.add_argument("--runs", type=int, default=10_000)
    p.add_argument("--T-grid", type=int, nargs="+", default=[0, 10, 25, 50, 100])
    p.add_argument("--eps", type=float, default=0.25)
    p.add_argument("--reference", type=int, default=20_000)

    p = sub.add_parser("derive", help="regenerate the calibration file from the oracles")
    _common(p, nd=False, out=False)
    p.add_argument("--out", default=None, help="calibration file (default: the packaged copy)")

    p = sub.add_parser("verify-all", help="invariant suite at one size")
    _common(p, seed=True)
    p.add_argument("--m", type=int, default=None)
    return ap


# ---------------------------------------------------------------------------
# handlers; heavy imports happen after thread limits are set

def _params(a) -> dict:
    return {k: v for k, v in sorted(vars(a).items()) if k not in ("out_dir", "out", "threads", "no_figures")}


def _dest(a) -> Path:
    from .report import out_dir
    if getattr(a, "out", None) and a.command != "derive":
        p = Path(a.out).parent
        p.mkdir(parents=True, exist_ok=True)
        return p
    return out_dir(a.out_dir)


def _m(a) -> int:
    from .graphs import default_m
    return a.m if a.m is not None else default_m(a.n)


def _finish(a, name: str, body: dict, started: float) -> int:
    from .report import FAIL, write_report
    if getattr(a, "out", None) and a.command != "derive":
        name = Path(a.out).name.removesuffix(".json")
    path = write_report(_dest(a), name, body, started)
    print(f"{body['status']}  {path}")
    for c in body["claims"]:
        print(f"  {c['status']} [{c['id']}] {c['title']}")
    return EXIT_FAIL if body["status"] == FAIL else EXIT_OK


def cmd_enumerate(a, started):
    from .graphs import enumerate_multi, enumerate_simple, write_graphs
    sp = enumerate_multi(a.n, a.d, **_cap(a)) if a.multi else enumerate_simple(a.n, a.d, **_cap(a))
    if a.out:
        with open(a.out, "w") as fh:
            write_graphs(fh, sp)
        print(f"{len(sp)} graphs written to {a.out}", file=sys.stderr)
    else:
        write_graphs(sys.stdout, sp)
    return EXIT_OK


def _cap(a) -> dict:
    return {"cap": a.cap} if a.cap else {}


def _build(kind: str, n: int, d: int, m: int | None):
    from . import auxchain as ax
    from .switch import build_Qc, build_Qu
    if kind == "Qu":
        return build_Qu(n, d)
    if kind == "Qc":
        return build_Qc(n, d)
    return ax.build_aux_chain(n, d, m)


def _check_cap(a, multi: bool = False):
    from .graphs import DEFAULT_CAP, count_space
    from .errors import SpaceTooLarge
    cap = a.cap or DEFAULT_CAP
    size = count_space(a.n, a.d, not multi)
    if size > cap:
        raise SpaceTooLarge(f"{size} states exceed the cap {cap}")


def cmd_chain(a, started):
    import json
    from scipy.sparse import csgraph
    from .chain import chain_to_json, regularity_constants
    from .report import REPORTED, Claim, envelope
    m = _m(a)
    _check_cap(a, multi=a.kind == "Qc")
    ch = _build(a.kind, a.n, a.d, m)
    ncomp = int(csgraph.connected_components(ch.adjacency(), directed=False)[0])
    rc = regularity_constants(ch)
    claims = [Claim("chain.valid", f"{a.kind} built with exact validation", "PASS",
                    {"states": ch.size, "edges": ch.n_edges}, "exact"),
              Claim("chain.components", "connected components of the state graph", REPORTED,
                    {"components": ncomp}, "reported")]
    res = {"states": ch.size, "edges": ch.n_edges, "regularity": rc.as_dict(), "m": m}
    name = f"chain_{a.kind}_n{a.n}_d{a.d}" + (f"_m{m}" if a.kind == "aux" else "")
    if a.export:
        (_dest(a) / f"{name}.chain.json").write_text(json.dumps(chain_to_json(ch), sort_keys=True))
    return _finish(a, name, envelope("chain", _params(a), claims, res), started)


def cmd_mlsi(a, started):
    from .chain import estimate_mlsi
    from .report import REPORTED, Claim, envelope, status
    from .switch import mlsi_lower_witness, witness_closed_form
    m = _m(a)
    _check_cap(a, multi=a.kind == "Qc")
    ch = _build(a.kind, a.n, a.d, m)
    est = estimate_mlsi(ch, a.budget, a.seed)
    claims = [Claim("mlsi.estimate", "MLSI lower estimate over the candidate ensemble", REPORTED,
                    {"value": est.value, "family": est.family, "evaluated": est.evaluated}, "reported")]
    res = {"estimate": est.value, "family": est.family}
    if a.kind == "Qu":
        w = mlsi_lower_witness(a.n, a.d, a.mode)
        cf = witness_closed_form(a.n, a.d)
        ok = abs(w.entropy - cf.entropy) <= 1e-12 and abs(w.dirichlet - cf.dirichlet) <= 1e-12
        claims.append(Claim("mlsi.witness", "witness values agree with the closed forms", status(ok),
                            {"witness": w.as_dict(), "closed_form": cf.as_dict()}, 1e-12))
        claims.append(Claim("mlsi.compare", "ensemble estimate next to the witness ratio", REPORTED,
                            {"estimate": est.value, "witness": w.ratio}, "reported",
                            "the witness is not part of the candidate ensemble, so no ordering is asserted"))
    return _finish(a, f"mlsi_{a.kind}_n{a.n}_d{a.d}_s{a.seed}", envelope("mlsi", _params(a), claims, res), started)


def cmd_regularize(a, started):
    import numpy as np
    from . import calibration
    from .ensembles import positive_functions
    from .regularize import check_dirichlet_contraction, check_entropy_preservation, upsilon
    from .report import Claim, envelope, status, write_csv
    from .switch import build_Qu
    _check_cap(a)
    Q = build_Qu(a.n, a.d)
    r = a.r if a.r is not None else upsilon(Q)
    dmax = calibration.constant("dirichlet_contraction_max")
    emin = calibration.constant("entropy_preservation_min")
    rows = []
    for k, (fam, f) in enumerate(positive_functions(Q, a.count, a.seed, r=r)):
        _, _, rd = check_dirichlet_contraction(Q, f, r)
        _, _, re = check_entropy_preservation(Q, f, r)
        rows.append((k, fam, rd if rd is not None else "", re if re is not None else ""))
    rd = np.array([x[2] for x in rows if x[2] != ""], dtype=float)
    re = np.array([x[3] for x in rows if x[3] != ""], dtype=float)
    claims = [Claim("reg.dirichlet", "Dirichlet contraction ratio within calibration", status(bool((rd <= dmax).all())),
                    {"max": float(rd.max()) if len(rd) else None, "calibrated": dmax}, "calibrated"),
              Claim("reg.entropy", "entropy preservation ratio within calibration", status(bool((re >= emin).all())),
                    {"min": float(re.min()) if len(re) else None, "calibrated": emin}, "calibrated")]
    name = f"regularize_n{a.n}_d{a.d}_s{a.seed}"
    d = _dest(a)
    write_csv(d / f"{name}.csv", ("index", "family", "dirichlet_ratio", "entropy_ratio"), rows)
    if not a.no_figures and len(re):
        from . import plotting
        plotting.histogram(d / f"{name}_entropy.png", re, "entropy preservation ratio")
    return _finish(a, name, envelope("regularize", _params(a), claims, {"r": r, "functions": a.count}), started)


def cmd_flow(a, started):
    import json
    from . import auxchain as ax
    from . import calibration
    from .chain import estimate_mlsi
    from .flows import classical_congestion, comparison_bound, congestion_A, flow_to_json, validate_flow
    from .regularize import upsilon
    from .report import REPORTED, Claim, envelope, status
    _check_cap(a, multi=True)
    m = _m(a)
    st = ax.aux_structure(a.n, a.d, m)
    aux = ax.build_aux_chain(a.n, a.d, m)
    flow = ax.build_flow(a.n, a.d, m)
    r = a.r if a.r is not None else upsilon(st.Qu)
    fr = validate_flow(flow, st.Qu, aux)
    A = congestion_A(flow, st.Qu, r)
    cl = classical_congestion(flow, st.Qu)
    claims = [Claim("flow.conservation", "flow conservation", status(fr.ok), fr.as_dict(), "exact"),
              Claim("flow.congestion", "congestion values", REPORTED,
                    {"A": A.value, "A_edge": A.edge, "classical": cl.value, "r": r}, "reported")]
    res = {"A": A.value, "classical": cl.value, "r": r, "paths": flow.n_paths,
           "max_length": int(flow.lengths.max())}
    if aux.size <= 5000:
        est = estimate_mlsi(aux, 200, a.seed)
        bound = comparison_bound(1.0, A.value, est.value)
        claims.append(Claim("flow.bound", "regularized comparison bound is finite",
                            status(math.isfinite(bound) and bound > 0),
                            {"bound": bound, "alpha_tilde_estimate": est.value,
                             "C": calibration.constant("comparison_C")}, "finite"))
    name = f"flow_n{a.n}_d{a.d}_m{m}"
    if a.export:
        (_dest(a) / f"{name}.flow.json").write_text(json.dumps(flow_to_json(flow), sort_keys=True))
    return _finish(a, name, envelope("flow", _params(a), claims, res), started)


def cmd_aux(a, started):
    from . import auxchain as ax
    from .flows import validate_flow
    from .report import REPORTED, Claim, envelope, status
    _check_cap(a, multi=True)
    m = _m(a)
    st = ax.aux_structure(a.n, a.d, m)
    checks = a.check or ["flow", "congestion", "psi", "beta"]
    claims, res = [], {"m": m, "degenerate": bool((st.cat >= 1).sum() == 0)}
    if res["degenerate"]:
        claims.append(Claim("aux.degenerate", "no multigraph categories beyond simple graphs", REPORTED, {}, "reported"))
    if "beta" in checks:
        b = ax.beta_normalization(st)
        claims.append(Claim("aux.beta", "beta normalization and symmetry",
                            status(b["normalization_violations"] == 0 and b["symmetry_violations"] == 0), b, "exact"))
    if "psi" in checks:
        r = ax.psi_property_suite(st)
        bad = sum(r[k] for k in ("invalid", "not_injective", "size_mismatch", "not_adjacent", "involution_failures",
                                 "uniqueness_failures"))
        claims.append(Claim("aux.psi", "matching properties on every perfect pair", status(bad == 0), r, "0"))
        claims.append(Claim("aux.sn", "s-neighbourhood counts", REPORTED, ax.sn_counting(st), "reported"))
    if "flow" in checks:
        aux = ax.build_aux_chain(a.n, a.d, m)
        fr = validate_flow(ax.build_flow(a.n, a.d, m), st.Qu, aux)
        claims.append(Claim("aux.flow", "flow conservation", status(fr.ok), fr.as_dict(), "exact"))
        claims.append(Claim("aux.rows", "off-diagonal row mass at most 1",
                            status(ax.row_mass_exact_max(aux) <= 1), {"max": ax.row_mass_exact_max(aux)}, "exact"))
    if "congestion" in checks:
        cong = ax.congestion_lemma_check(a.n, a.d, m, a.t)
        claims.append(Claim("aux.congestion", "perfect-pair tuple mass per edge at most 4",
                            status(cong["perfect_tuple_ratio"] <= 4.0), cong, 4.0))
        res["congestion"] = cong
    name = f"aux_n{a.n}_d{a.d}_m{m}"
    return _finish(a, name, envelope("aux", _params(a), claims, res), started)


def cmd_mix(a, started):
    import numpy as np
    from .report import REPORTED, Claim, envelope, status, write_csv
    d = _dest(a)
    if a.mode == "exact":
        from . import oracles
        from .switch import build_Qu, exact_mixing_time
        _check_cap(a)
        Q = build_Qu(a.n, a.d)
        grid = np.arange(0.0, a.tmax + a.dt / 2, a.dt)
        res = exact_mixing_time(a.n, a.d, a.eps, grid)
        claims = [Claim("mix.exact", "exact TV mixing time", REPORTED,
                        {"t": res.t_refined, "t_grid": res.t_grid}, "reported")]
        if Q.size <= 5000:
            orc = oracles.dense_mixing_time(Q, a.eps)
            claims.append(Claim("mix.oracle", "matches the dense oracle", status(abs(orc - res.t_refined) <= 1e-8),
                                {"oracle": orc, "diff": abs(orc - res.t_refined)}, 1e-8))
        name = f"mix_exact_n{a.n}_d{a.d}"
        write_csv(d / f"{name}.csv", ("t", "tv"), list(zip(res.grid, res.curve)))
        if not a.no_figures:
            from . import plotting
            plotting.tv_curve(d / f"{name}.png", res.grid, res.curve, a.eps, res.t_refined, f"n={a.n}, d={a.d}")
        return _finish(a, name, envelope("mix", _params(a), claims, res.as_dict()), started)
    from .switch import empirical_mixing_time, fit_nlogn
    ns = a.ns or [a.n]
    ts, curves = [], {}
    for n in ns:
        r = empirical_mixing_time(n, a.d, a.runs, a.seed + n, a.eps)
        ts.append(r["t_mix"])
        curves[str(n)] = r["curve"]
    res = {"ns": ns, "t_mix": ts}
    claims = [Claim("mix.simulated", "simulated mixing times", REPORTED, res, "reported")]
    if len(ns) >= 2 and all(t is not None for t in ts):
        fit = fit_nlogn(ns, ts)
        res["fit"] = fit
        claims.append(Claim("mix.fit", "n log n fit", REPORTED, fit, "reported"))
        if not a.no_figures:
            from . import plotting
            plotting.mixing_fit(d / f"mix_sim_d{a.d}_s{a.seed}.png", ns, ts, fit["a"])
    name = f"mix_sim_d{a.d}_s{a.seed}"
    rows = [(n, t, v) for n in ns for t, v in enumerate(curves[str(n)])]
    write_csv(d / f"{name}.csv", ("n", "step", "tv"), rows)
    return _finish(a, name, envelope("mix", _params(a), claims, res), started)


def cmd_simulate(a, started):
    from .report import Claim, REPORTED, envelope, status, write_csv
    from .switch import distinguishing_statistic_report
    rep = distinguishing_statistic_report(a.n, a.d, a.T_grid, a.runs, a.seed, a.reference, a.eps)
    ok = all(x["ok"] for x in rep["xi_check"])
    claims = [Claim("sim.xi", "E xi_{i,T} >= (1-2/nd)^T within the 99% interval", status(ok),
                    {"checks": rep["xi_check"]}, 0.99),
              Claim("sim.lower", "largest separated T (mixing lower bound)", REPORTED,
                    {"T": rep["mixing_lower_bound"]}, "reported")]
    name = f"simulate_n{a.n}_d{a.d}_s{a.seed}"
    d = _dest(a)
    write_csv(d / f"{name}.csv", ("T", "mean", "var", "tv_lower", "tv_hist"),
              [(r["T"], r["mean"], r["var"], r["tv_lower"], r["tv_hist"]) for r in rep["rows"]])
    if not a.no_figures:
        from . import plotting
        plotting.statistic_trace(d / f"{name}.png", [r["T"] for r in rep["rows"]], [r["mean"] for r in rep["rows"]],
                                 rep["reference"]["mean"], [r["tv_lower"] for r in rep["rows"]], a.eps)
    return _finish(a, name, envelope("simulate", _params(a), claims, rep), started)


def cmd_derive(a, started):
    from . import derive
    from .report import REPORTED, Claim, envelope
    obj = derive.derive()
    target = Path(a.out) if a.out else derive.default_path()
    old = target.read_text() if target.exists() else None
    derive.write(target, obj)
    drift = old is not None and old != derive.dumps(obj)
    claims = [Claim("derive.written", f"calibration written to {target.name}", REPORTED,
                    {"drift_from_previous": drift}, "reported")]
    return _finish(a, "derive", envelope("derive", _params(a), claims, {"constants": obj["constants"]}), started)


def cmd_verify_all(a, started):
    from . import verify
    from .report import envelope
    m = _m(a)
    _check_cap(a, multi=True)
    claims, res = verify.verify_all(a.n, a.d, m, a.seed, a.threads)
    params = _params(a)
    params["m"] = m
    body = envelope("verify-all", params, claims, res, verify.TOLERANCES)
    return _finish(a, f"verify_n{a.n}_d{a.d}_m{m}_s{a.seed}", body, started)


HANDLERS = {"enumerate": cmd_enumerate, "chain": cmd_chain, "mlsi": cmd_mlsi, "regularize": cmd_regularize,
            "flow": cmd_flow, "aux": cmd_aux, "mix": cmd_mix, "simulate": cmd_simulate, "derive": cmd_derive,
            "verify-all": cmd_verify_all}


def _limit_threads(k: int) -> None:
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(var, str(k))


def run(command: str, flags: list[str]) -> int:
    return main([command, *flags])


def main(argv: list[str] | None = None) -> int:
    a = parser().parse_args(argv)
    _limit_threads(a.threads)
    from .errors import MLSIError, SpaceTooLarge
    started = time.time()
    try:
        return HANDLERS[a.command](a, started)
    except SpaceTooLarge as e:
        print(f"space too large: {e}", file=sys.stderr)
        return EXIT_TOO_LARGE
    except MLSIError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
