"""``thirdq`` command line: one subcommand per experiment.

    thirdq <subcommand> [--config FILE] [--out DIR] [--set section.key=value ...]

Exit codes: 0 ok, 2 configuration error, 3 numerical failure, 4 I/O error.
"""
from __future__ import annotations

import argparse
import logging
import os
import resource
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .basis import ConfigurationError, QuadGrid, build_phi_table
from .config import EXPERIMENTS, RunConfig, load_config, parse_floats, theta_grid
from .engine import (NumericalError, cat_initial, coherence_scan, conserved_quantities, density,
                     evolve, joint_density, maximize_delta, quadrature_mean)
from .generalized import (CutoffError, KinematicsError, MassiveCouplingConfig, elastic_rate_pipeline,
                          gamma_closed_form, gamma_numerical_oracle, matrix_element_final,
                          matrix_element_initial, rate_ratio, rate_ratio_pipeline,
                          subharmonic_frequency, subharmonic_rate, subharmonic_rate_pipeline)
from .hyperfock import JointHyperBasis, make_state, tensor, truncation_deficit
from .io import emit_csv, write_manifest
from .oracle import (oracle_coherence, oracle_density, oracle_evolve, oracle_joint_density, wigner)

log = logging.getLogger("thirdq")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4
VERIFY_TOL = 1e-6


def _threads() -> int:
    raw = os.environ.get("THIRDQ_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError as exc:
            raise ConfigurationError(f"THIRDQ_THREADS={raw!r} is not an integer") from exc
    return os.cpu_count() or 1


def _parallel_map(fn, items):
    """Evaluate independent points concurrently; results keep input order."""
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        return list(pool.map(fn, items))


def _state(state, n_max):
    return make_state(state.kind, n_max, alpha=state.alpha, theta=state.theta, level=state.level)


def _initial(cfg: RunConfig):
    n_max = cfg.engine.n_max
    sj, sk = _state(cfg.state_j, n_max), _state(cfg.state_k, n_max)
    diag = {"tail_deficit_j": truncation_deficit(sj), "tail_deficit_k": truncation_deficit(sk)}
    return tensor(sj, sk), diag


def _tag(t: float) -> str:
    return f"{t:g}"


def run_evolve(cfg, out, manifest):
    psi0, diag = _initial(cfg)
    manifest["diagnostics"].update(diag)
    times = cfg.sample_times
    if not times:
        return []
    hb = build_phi_table(cfg.engine.n_max, cfg.grid)
    traj = evolve(cfg.engine, times, monitor_state=psi0)
    manifest["diagnostics"]["conservation_drift"] = traj.drift()
    files = []
    for mode in ("j", "k"):
        rows = []
        for snap in traj.snapshots:
            p = density(snap, mode, hb, psi0)
            rows.extend((snap.t, x, v) for x, v in zip(hb.x, p))
        files.append(emit_csv(out / f"density_{mode}.csv", rows, "density"))
    obs = []
    for snap in traj.snapshots:
        q = conserved_quantities(snap, psi0)
        obs.append((snap.t, quadrature_mean(snap, "j", psi0), quadrature_mean(snap, "k", psi0),
                    q["photons_j"], q["photons_k"], q["oscillatons_j"], q["oscillatons_k"]))
    files.append(emit_csv(out / "observables.csv", obs, "observables"))
    return files


def _joint_basis(cfg):
    g = cfg.grid
    return build_phi_table(cfg.engine.n_max, QuadGrid(g.x_min, g.x_max, cfg.joint.n_points))


def run_joint(cfg, out, manifest):
    psi0, diag = _initial(cfg)
    manifest["diagnostics"].update(diag)
    times = cfg.sample_times
    if not times:
        return []
    hb = _joint_basis(cfg)
    traj = evolve(cfg.engine, times, monitor_state=psi0)
    manifest["diagnostics"]["conservation_drift"] = traj.drift()
    rows = []
    for snap in traj.snapshots:
        p = joint_density(snap, hb, hb, psi0)
        for i, xj in enumerate(hb.x):
            rows.extend((snap.t, xj, xk, v) for xk, v in zip(hb.x, p[i]))
    return [emit_csv(out / "joint_density.csv", rows, "joint_density")]


def run_coherence(cfg, out, manifest):
    if cfg.state_j.kind != "cat":
        raise ConfigurationError("coherence experiment needs [state_j] kind = cat")
    if cfg.state_k.kind != "vacuum":
        raise ConfigurationError("coherence experiment needs [state_k] kind = vacuum")
    alpha = cfg.state_j.alpha_re
    n_max = cfg.engine.n_max
    manifest["diagnostics"]["tail_deficit_j"] = truncation_deficit(
        make_state("cat", n_max, alpha=alpha, theta=0.0))
    times = cfg.sample_times
    if not times:
        return []
    thetas = theta_grid(cfg.coherence.n_theta)
    traj = evolve(cfg.engine, times)
    deltas = np.linspace(cfg.coherence.delta_min, cfg.coherence.delta_max, cfg.coherence.delta_points)
    files, summary = [], []
    for snap in traj.snapshots:
        if cfg.coherence.delta == "auto":
            delta, _ = maximize_delta(snap, thetas, alpha, deltas, cfg.coherence.x)
        else:
            delta = float(cfg.coherence.delta)
        vals = coherence_scan(snap, delta, thetas, alpha, cfg.coherence.x)
        ref = cat_initial(alpha, 0.0, n_max)
        summary.append({"t": snap.t, "delta": delta, "contrast": float(np.ptp(vals)),
                        "photons_j": conserved_quantities(snap, ref)["photons_j"]})
        files.append(emit_csv(out / f"coherence_t{_tag(snap.t)}.csv",
                              [(th, delta, v) for th, v in zip(thetas, vals)], "coherence"))
    manifest["diagnostics"]["coherence_summary"] = summary
    return files


def _verify_states(n_max):
    coh = tensor(make_state("coherent", n_max, alpha=2.0), make_state("vacuum", n_max))
    cat = cat_initial(2.0, 0.0, n_max)
    return {"coherent(2)xvacuum": coh, "cat(2,0)xvacuum": cat}


def run_verify(cfg, out, manifest):
    times = cfg.sample_times
    if not times:
        return []
    e = cfg.engine
    hb = build_phi_table(e.n_max, cfg.grid)
    hbj = _joint_basis(cfg)
    basis = JointHyperBasis(e.n_max)
    traj = evolve(e, times)
    thetas = theta_grid(cfg.coherence.n_theta)
    delta = 2.0 if cfg.coherence.delta == "auto" else float(cfg.coherence.delta)
    x = cfg.coherence.x
    rows, worst = [], 0.0

    def add(name, state, t, dev):
        nonlocal worst
        worst = max(worst, dev)
        rows.append((name, state, t, dev, VERIFY_TOL, bool(dev <= VERIFY_TOL)))

    for snap in traj.snapshots:
        for label, psi0 in _verify_states(e.n_max).items():
            fock = oracle_evolve(basis.fock_block(psi0), e.epsilon, e.omega_j, e.omega_k, snap.t)
            for mode in ("j", "k"):
                dev = np.max(np.abs(density(snap, mode, hb, psi0) - oracle_density(fock, mode, hb.grid)))
                add(f"density_{mode}", label, snap.t, dev)
            dev = np.max(np.abs(joint_density(snap, hbj, hbj, psi0) - oracle_joint_density(fock, hbj.grid)))
            add("joint_density", label, snap.t, dev)
        heis = coherence_scan(snap, delta, thetas, 2.0, x)
        orac = []
        for th in thetas:
            psi0 = cat_initial(2.0, th, e.n_max)
            fock = oracle_evolve(basis.fock_block(psi0), e.epsilon, e.omega_j, e.omega_k, snap.t)
            orac.append(oracle_coherence(fock, x, delta, hb.grid))
        add("coherence_scan", "cat(2,theta)xvacuum", snap.t, float(np.max(np.abs(heis - np.array(orac)))))
    manifest["diagnostics"]["verify_max_abs_dev"] = worst
    files = [emit_csv(out / "report.csv", rows, "verify")]
    if worst > VERIFY_TOL:
        raise _VerifyFailed(worst, files)
    return files


class _VerifyFailed(NumericalError):
    def __init__(self, worst, files):
        super().__init__(f"Heisenberg/Schrodinger deviation {worst:.3e} exceeds {VERIFY_TOL:g}")
        self.files = files


def run_wigner(cfg, out, manifest):
    n_max = cfg.engine.n_max
    amps = _state(cfg.state_j, n_max)
    manifest["diagnostics"]["tail_deficit_j"] = truncation_deficit(amps)
    if abs(amps[0]) > 0:
        raise ConfigurationError("wigner needs a single-oscillaton state (not kind = zero)")
    g = QuadGrid(cfg.wigner.x_min, cfg.wigner.x_max, cfg.wigner.n_points)
    w = wigner(amps[1:], g, g)
    manifest["diagnostics"]["wigner_min"] = float(w.min())
    manifest["diagnostics"]["wigner_integral_on_grid"] = float(g.weights() @ w @ g.weights())
    rows = []
    for i, x in enumerate(g.x):
        rows.extend((x, p, v) for p, v in zip(g.x, w[i]))
    return [emit_csv(out / "wigner.csv", rows, "wigner")]


def run_scattering(cfg, out, manifest):
    sc = cfg.scattering
    point = [
        ("omega_prime", subharmonic_frequency(sc)),
        ("matrix_element_initial_abs", abs(matrix_element_initial(sc))),
        ("matrix_element_final_abs", abs(matrix_element_final(sc))),
        ("Gamma_closed_form", subharmonic_rate(sc)),
        ("Gamma_pipeline", subharmonic_rate_pipeline(sc)),
        ("Gamma_elastic_pipeline", elastic_rate_pipeline(sc)),
        ("R_closed_form", rate_ratio(sc.gamma)),
        ("R_pipeline", rate_ratio_pipeline(sc)),
    ]
    files = [emit_csv(out / "scattering_point.csv", point, "scattering_point")]
    massless = replace(sc, mass_m=0.0)
    gammas = parse_floats(cfg.sweep.gammas)
    ratios = _parallel_map(lambda g: (g, rate_ratio(g), rate_ratio_pipeline(replace(massless, gamma=g))), gammas)
    files.append(emit_csv(out / "ratio_sweep.csv", ratios, "ratio_sweep"))
    dets = parse_floats(cfg.sweep.detunings)
    rates = _parallel_map(lambda d: (d, subharmonic_rate(replace(sc, detuning=d)),
                                     subharmonic_rate_pipeline(replace(sc, detuning=d))), dets)
    files.append(emit_csv(out / "rate_vs_detuning.csv", rates, "rate_vs_detuning"))
    masses = parse_floats(cfg.sweep.masses)
    wps = _parallel_map(lambda m: (m, subharmonic_frequency(replace(sc, mass_m=m))), masses)
    files.append(emit_csv(out / "omega_prime_vs_mass.csv", wps, "omega_prime_vs_mass"))
    manifest["units"] = {"hbar": sc.hbar, "c": sc.c, "charge_squared": "alpha_fs*hbar*c",
                         "mass_m": "rest energy m c^2"}
    return files


def run_gamma_oracle(cfg, out, manifest):
    go = cfg.gamma_oracle
    points = [(eps, om) for eps in parse_floats(go.epsilons) for om in parse_floats(go.Omegas)]

    def one(point):
        eps, om = point
        mc = MassiveCouplingConfig(eps, go.omega, om, go.cutoff_c, go.cutoff_b)
        closed, orc = gamma_closed_form(mc), gamma_numerical_oracle(mc)
        return (eps, go.omega, om, closed, orc, orc / closed if closed else float("nan"))

    rows = sorted(_parallel_map(one, points), key=lambda r: (r[0], r[2]))
    return [emit_csv(out / "gamma_oracle.csv", rows, "gamma_oracle")]


RUNNERS = {
    "evolve": run_evolve,
    "joint": run_joint,
    "coherence": run_coherence,
    "verify": run_verify,
    "wigner": run_wigner,
    "scattering": run_scattering,
    "gamma-oracle": run_gamma_oracle,
}


def run(cfg: RunConfig, out_dir=None) -> int:
    out = Path(out_dir if out_dir is not None else cfg.run.output_dir)
    start = time.perf_counter()
    n_max = cfg.engine.n_max
    basis = JointHyperBasis(n_max)
    manifest = {
        "artifact": "thirdq",
        "version": __version__,
        "config": cfg.as_dict(),
        "basis": {"mode_dim": basis.dim, "joint_dim": basis.joint_dim,
                  "matrix_capacity": basis.joint_dim ** 2},
        "diagnostics": {},
        "units": {"hbar": 1.0, "quadrature": "x = (a + a^dagger)/sqrt(2)"},
    }
    files = []
    status = EXIT_OK
    try:
        out.mkdir(parents=True, exist_ok=True)
        files = RUNNERS[cfg.experiment](cfg, out, manifest)
    except _VerifyFailed as exc:
        files = exc.files
        manifest["error"] = str(exc)
        status = EXIT_NUMERIC
        log.error("%s", exc)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, CutoffError, KinematicsError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    manifest["wall_time_s"] = time.perf_counter() - start
    manifest["peak_memory_mb"] = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 1024.0
    try:
        write_manifest(out, manifest, files)
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return status


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="thirdq", description=__doc__.splitlines()[0])
    p.add_argument("subcommand", choices=EXPERIMENTS)
    p.add_argument("--config", help="INI file with [engine], [state_j], [grid], ... sections")
    p.add_argument("--out", help="output directory (overrides [run] output_dir)")
    p.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                   help="override one config value; repeatable")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    text, source = "", "<defaults>"
    if args.config:
        source = args.config
        try:
            text = Path(args.config).read_text(encoding="utf-8")
        except OSError as exc:
            print(f"I/O error: {exc}", file=sys.stderr)
            return EXIT_IO
    try:
        cfg = load_config(args.subcommand, text, args.set, source)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run(cfg, args.out)


if __name__ == "__main__":
    sys.exit(main())
