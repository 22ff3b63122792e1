"""Scenario runners behind ``lme-sim run``.

Each scenario returns ``(tables, summary)``: ``tables`` maps a quantity name to
``(header, rows)`` and becomes ``<scenario>_<quantity>.csv``; ``summary`` goes
into ``manifest.json``.  The first CSV column is always ``t``, the time-like
independent variable (evolution time, or the averaging window for the
positivity sweep, or the evaluation time of the error tables).
"""
import csv
import json
import logging
import os
import platform
import time
from dataclasses import replace
from importlib import metadata

import numpy as np
import scipy

from . import bench, budget, fixed_point, master, positivity, unraveling
from .bath import correlation
from .config import (SCENARIOS, build_channels, build_hamiltonian, initial_vector,
                     serialize)
from .filtered import filtered

log = logging.getLogger(__name__)


def _fmt(x):
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _system(cfg):
    h = build_hamiltonian(cfg)
    chans = build_channels(cfg)
    psi0 = initial_vector(cfg)
    return h, chans, psi0, np.outer(psi0, psi0.conj())


def _rho_tables(times, rhos):
    return {
        "rho11": (["t", "rho11"], zip(times, rhos[:, 0, 0].real)),
        "rho12": (["t", "re_rho12", "im_rho12"], zip(times, rhos[:, 0, 1].real,
                                                       rhos[:, 0, 1].imag)),
    }


def _filtered_norm(h, chans):
    """sqrt(sum Tr A^f A^f+) over channels."""
    return float(np.sqrt(sum(np.trace(a @ a.conj().T).real
                             for a in (filtered(ch, h=h) for ch in chans))))


def single_qubit_relax(cfg, threads):
    h, chans, _, rho0 = _system(cfg)
    ecfg = cfg.evolution_config()
    run = master.evolve(ecfg, h, chans, rho0)
    beta = chans[0].bath.beta
    gibbs = fixed_point.gibbs_state(h, beta)
    p11 = run.rhos[:, 0, 0].real
    summary = {
        "final_vs_gibbs": float(np.max(np.abs(run.rhos[-1] - gibbs))),
        # complete filter pi S + i D, and the filter the run actually used
        "filtered_norm": _filtered_norm(h, [replace(ch, mode="half_line") for ch in chans]),
        "filtered_norm_evolved": _filtered_norm(h, chans),
    }
    try:
        summary["relaxation_time"] = master.relaxation_time(run.times, p11, gibbs[0, 0].real)
    except ValueError as exc:
        summary["relaxation_time"] = None
        summary["relaxation_time_note"] = str(exc)
    return _rho_tables(run.times, run.rhos), summary


def _compare(cfg, other_variant):
    h, chans, _, rho0 = _system(cfg)
    base = cfg.evolution_config(variant="local_me")
    other = cfg.evolution_config(variant=other_variant)
    a = master.evolve(base, h, chans, rho0)
    b = master.evolve(other, h, chans, rho0)
    k = min(len(a.times), len(b.times))
    d11 = np.abs(a.rhos[:k, 0, 0] - b.rhos[:k, 0, 0])
    tables = {
        "rho11": (["t", "local_me", other_variant, "abs_diff"],
                  zip(a.times[:k], a.rhos[:k, 0, 0].real, b.rhos[:k, 0, 0].real, d11)),
        "rho12": (["t", "re_local_me", "im_local_me", f"re_{other_variant}",
                   f"im_{other_variant}"],
                  zip(a.times[:k], a.rhos[:k, 0, 1].real, a.rhos[:k, 0, 1].imag,
                      b.rhos[:k, 0, 1].real, b.rhos[:k, 0, 1].imag)),
    }
    beta = chans[0].bath.beta
    late = a.times[:k] >= beta
    summary = {"max_abs_diff_rho11": float(d11.max()),
               "max_abs_diff_rho11_after_beta": float(d11[late].max()) if late.any() else None}
    return tables, summary


def davies_compare(cfg, threads):
    tables, summary = _compare(cfg, "davies")
    h, chans, _, _ = _system(cfg)
    g = fixed_point.gibbs_state(h, chans[0].bath.beta)
    summary["davies_rhs_at_gibbs"] = fixed_point.stationarity_residual(
        g, lambda r: master.rhs_davies(r, h, chans))
    return tables, summary


def integral_compare(cfg, threads):
    return _compare(cfg, "integral")


def positivity_sweep(cfg, threads):
    h, chans, _, _ = _system(cfg)
    ecfg = cfg.evolution_config()
    lo, hi = cfg.options["tprime_range"]
    tables, summary = {}, {}
    for k, ch in enumerate(chans):
        res = positivity.sweep_Tprime(h, ch, ecfg.dt, steps=cfg.options["steps"],
                                      t_range=(lo, hi), workers=threads,
                                      avg_points=ecfg.avg_points)
        n_ev = len(res.reports[0].eigenvalues)
        header = ["t"] + [f"lambda_{i + 1}" for i in range(n_ev)] + ["rank_of_most_negative"]
        rows = [[r.Tprime, *r.eigenvalues, r.rank_of_most_negative] for r in res.reports]
        name = "eigenvalues" if len(chans) == 1 else f"eigenvalues_ch{k}"
        tables[name] = (header, rows)
        summary[f"threshold_ch{k}"] = res.threshold
        summary[f"resolution_ch{k}"] = res.resolution
    return tables, summary


def unravel_check(cfg, threads):
    h, chans, psi0, rho0 = _system(cfg)
    if len(chans) != 1:
        raise ValueError("unravel_check supports exactly one channel")
    ecfg = cfg.evolution_config()
    opts = cfg.options
    jumps = unraveling.jump_operators(h, chans[0], ecfg.dt, ecfg.T_prime,
                                      opts["negativity_tol"], ecfg.avg_points)
    every = opts["record_every"]
    record = np.arange(0.0, ecfg.T + 1e-9, every)
    ens = unraveling.sample_trajectories(jumps, psi0, ecfg.n_steps, opts["n_traj"], cfg.seed,
                                         opts["sampler"], record, threads)
    ref = master.evolve(cfg.evolution_config(variant="local_me", sample_every=1), h, chans, rho0)
    p = np.zeros_like(rho0)
    p[0, 0] = 1.0
    rows = []
    worst = 0.0
    for t in record:
        mean, err = unraveling.estimate_observable(ens, p, t)
        exact = ref.rhos[int(round(t / ecfg.dt)), 0, 0].real
        z = abs(mean - exact) / err if err > 0 else 0.0
        worst = max(worst, z)
        rows.append([t, mean, err, exact])
    summary = {"n_jumps": len(jumps.ops), "dropped_negative_mass": jumps.dropped_negative_mass,
               "completeness_defect": jumps.completeness_defect(),
               "max_standard_errors": worst}
    return {"rho11": (["t", "trajectory_mean", "stderr", "density_matrix"], rows)}, summary


def powder_of_sympathy(cfg, threads):
    ecfg = cfg.evolution_config()
    opts = cfg.options
    T = ecfg.T
    default = bench.powder_scenario(None, T, ecfg.dt, coupling=opts["coupling"],
                                    sample_every=max(1, int(round(1.0 / ecfg.dt))))
    forced = bench.powder_scenario(opts["forced_t_b"], T, ecfg.dt, coupling=opts["coupling"],
                                   sample_every=max(1, int(round(1.0 / ecfg.dt))))
    tables = {"populations": (["t", "spin1_excited", "spin2_excited"],
                              zip(default.times, default.spin1, default.spin2))}

    def rep(r):
        return {"t_b": r.t_b, "spin1_survival": r.spin1_survival, "spin2_T1": r.spin2_T1,
                "spin2_T1_golden_rule": r.spin2_T1_golden,
                "spin1_secular_rate": r.spin1_secular_rate, "filtered_norm": r.filtered_norm,
                "diverged": r.diverged, "divergence": r.divergence,
                "spurious_rate": r.spurious_rate}

    return tables, {"default_bandwidth": rep(default), "forced_bandwidth": rep(forced)}


def faithful_bench(cfg, threads):
    h, chans, _, rho0 = _system(cfg)
    if len(chans) != 1:
        raise ValueError("faithful_bench supports exactly one channel")
    ch = chans[0]
    ecfg = cfg.evolution_config()
    b = bench.build_bath(ch.bath, cfg.options["n_spins"])
    sample_dt = ecfg.dt * ecfg.sample_every
    exact = bench.exact_evolve(h, ch.A, b, 1.0, rho0, ecfg.T, sample_dt)
    me = master.evolve(cfg.evolution_config(variant="local_me"), h, chans, rho0)
    k = min(len(exact.times), len(me.times))
    d = np.abs(exact.rhos[:k, 0, 0] - me.rhos[:k, 0, 0])
    t = np.linspace(0.0, 10.0, 1001)
    c_t, c_b = correlation(ch.bath, t), b.correlation(t)
    early = exact.times[:k] <= 2.0
    tables = {
        "rho11": (["t", "exact", "local_me", "abs_diff"],
                  zip(exact.times[:k], exact.rhos[:k, 0, 0].real, me.rhos[:k, 0, 0].real, d)),
        "correlation": (["t", "re_target", "im_target", "re_bath", "im_bath"],
                        zip(t, c_t.real, c_t.imag, c_b.real, c_b.imag)),
    }
    summary = {"fit_residual": b.residual,
               "abs_C0": float(abs(correlation(ch.bath, 0.0))),
               "frequencies": b.frequencies.tolist(), "couplings": b.couplings.tolist(),
               "max_diff_t_le_2": float(d[early].max()),
               "max_diff": float(d.max())}
    return tables, summary


def error_tables(cfg, threads):
    ecfg = cfg.evolution_config()
    o = cfg.options
    beta = cfg.channels[0].bath.get("beta", 1.0) if cfg.channels else 1.0
    eb = budget.error_budget(o["budget_n_qubits"], o["budget_A_norm"], beta, ecfg.T_prime,
                             o["budget_t"])
    rows = [[eb.t, tab, eq, born, other] for tab, eq, born, other in eb.rows()]
    eps = [[eb.t, name, getattr(eb, name)] for name in
           ("af_norm_bound", "eps_ave", "eps_mkv", "eps_born", "eps_rwa_opt")]
    return ({"tables": (["t", "table", "equation", "born", "other"], rows),
             "epsilons": (["t", "quantity", "value"], eps)},
            {"short_time": eb.short_time})


def fixed_point_report_scenario(cfg, threads):
    h, chans, _, rho0 = _system(cfg)
    ch = chans[0]
    ecfg = cfg.evolution_config()
    rep = fixed_point.fixed_point_report(h, ch, ch.bath.beta, ecfg.T_prime, ecfg.avg_points)
    run = master.evolve(cfg.evolution_config(variant="local_me"), h, [ch], rho0)
    to_g = np.max(np.abs(run.rhos - rep.gibbs), axis=(1, 2))
    to_c = np.max(np.abs(run.rhos - rep.corrected), axis=(1, 2))
    tables = {"distance": (["t", "to_gibbs", "to_corrected"], zip(run.times, to_g, to_c))}
    return tables, dict(rep.residuals)


RUNNERS = {
    "single_qubit_relax": single_qubit_relax,
    "davies_compare": davies_compare,
    "integral_compare": integral_compare,
    "positivity_sweep": positivity_sweep,
    "unravel_check": unravel_check,
    "powder_of_sympathy": powder_of_sympathy,
    "faithful_bench": faithful_bench,
    "error_tables": error_tables,
    "fixed_point_report": fixed_point_report_scenario,
}
assert set(RUNNERS) == set(SCENARIOS)


def _versions():
    try:
        pkg = metadata.version("localme")
    except metadata.PackageNotFoundError:
        pkg = "unknown"
    return {"localme": pkg, "python": platform.python_version(), "numpy": np.__version__,
            "scipy": scipy.__version__}


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if np.isfinite(x) else str(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def run(cfg, out_dir=None, seed=None, threads=None):
    """Run one scenario, write its CSVs and ``manifest.json``; return an exit status."""
    if seed is not None:
        cfg.seed = int(seed)
    if threads is not None:
        cfg.options["threads"] = int(threads)
    out_dir = out_dir or cfg.output_dir
    os.makedirs(out_dir, exist_ok=True)
    manifest = {"scenario": cfg.scenario, "seed": cfg.seed, "config": json.loads(serialize(cfg)),
                "versions": _versions(), "files": [], "status": "ok"}
    start = time.perf_counter()
    status = 0
    try:
        tables, summary = RUNNERS[cfg.scenario](cfg, cfg.options["threads"])
        for quantity, (header, rows) in tables.items():
            name = f"{cfg.scenario}_{quantity}.csv"
            write_csv(os.path.join(out_dir, name), header, rows)
            manifest["files"].append(name)
        manifest["summary"] = _jsonable(summary)
    except (master.EvolutionError, unraveling.NegativeMassError, bench.InsufficientBathError,
            fixed_point.DegenerateSpectrumError, fixed_point.ReducibleDynamicsError,
            ValueError, FloatingPointError) as exc:
        status = 1
        manifest["status"] = "error"
        manifest["error"] = {"type": type(exc).__name__, "message": str(exc),
                             "diagnostics": _jsonable(getattr(exc, "diagnostics", {}))}
        log.error("%s failed: %s", cfg.scenario, exc)
    manifest["wall_time_s"] = time.perf_counter() - start
    with open(os.path.join(out_dir, "manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return status
