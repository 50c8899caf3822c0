"""Command-line interface: simulate / montecarlo / linearize / verify.

All commands read an optional INI config (defaults reproduce the nominal
benchmark scenario) and write deterministic CSV files: same config and
seed give byte-identical output on one platform.

Exit codes: 0 ok, 2 config error, 3 numeric failure during integration,
4 certificate failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

import numpy as np

from .analysis import trajectory_diagnostics
from .certificate import (
    certificate_constants,
    estimate_attitude_quadratic_bounds,
    estimate_sublevel_radius,
    local_stability_certificate,
)
from .config import RunConfig, load_config
from .exceptions import CertificateFailed, ConfigError, NonFiniteState
from .linearize import OperatingPoint, frequency_response_sigma, linearize_error_dynamics
from .montecarlo import SIGNALS, WINDOWS, monte_carlo_rmse
from .observers import run_observer
from .rigidbody import simulate_truth
from .sensing import NoiseConfig

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_CERTIFICATE = 4


def _fmt(x) -> str:
    return f"{float(x):.17g}"


def _write_csv(path: str, header: list[str], rows) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(cell if isinstance(cell, str) else _fmt(cell)
                              for cell in row) + "\n")


def _parse_grid(spec: str, log: bool) -> np.ndarray:
    """'a:b:n' for n points from a to b (log-spaced when log=True), or a
    comma-separated list of values."""
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise ConfigError(f"grid spec {spec!r} is not 'start:stop:count'")
        a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
        if n < 1:
            raise ConfigError("grid needs at least one point")
        if log:
            if a <= 0 or b <= 0:
                raise ConfigError("log grid endpoints must be positive")
            return np.logspace(np.log10(a), np.log10(b), n)
        return np.linspace(a, b, n)
    return np.array([float(p) for p in spec.split(",") if p.strip()])


def _select_observers(arg: str) -> tuple[int, ...]:
    if arg == "all":
        return (1, 2, 4)
    v = int(arg)
    if v not in (1, 2, 3, 4):
        raise ConfigError(f"unknown observer {arg!r}")
    return (v,)


def cmd_simulate(cfg: RunConfig, out_dir: str, observers=(1, 2, 4)) -> int:
    scen = cfg.scenario
    truth = simulate_truth(scen.truth_init(), scen.j, cfg.torque, cfg.integrator)
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(1,)))
    for v in observers:
        run = run_observer(v, cfg.observer_init(), truth, scen.b, scen.j,
                           cfg.gains, cfg.torque, cfg.noise, rng=rng)
        diag = trajectory_diagnostics(run, truth, scen.b, scen.j, cfg.gains)
        tgrid = truth.observer_grid()
        header = (
            ["t"]
            + [f"q_{c}" for c in "wxyz"] + [f"omega_{c}" for c in "xyz"]
            + [f"b_{c}" for c in "xyz"]
            + [f"qhat_{c}" for c in "wxyz"] + [f"omegahat_{c}" for c in "xyz"]
            + [f"bhat_{c}" for c in "xyz"] + [f"lhat_{c}" for c in "xyz"]
            + ["psi", "psi_eq_identity", "psi_eq_1", "psi_eq_2", "psi_eq_3",
               "v1", "r_tilde_norm", "delta_l_norm"]
        )
        b_rows = np.broadcast_to(np.asarray(scen.b, float), (len(run.t), 3))
        table = np.column_stack([
            run.t, tgrid[:, :4], tgrid[:, 4:], b_rows,
            run.q_hat, diag.omega_hat, diag.b_hat, run.l_hat,
            diag.psi, diag.psi_eq, diag.v1, diag.r_tilde_norm, diag.delta_l_norm,
        ])
        path = os.path.join(out_dir, f"observer{v}.csv")
        _write_csv(path, header, table)
        print(f"wrote {path} ({table.shape[0]} rows)")
    return EXIT_OK


def cmd_montecarlo(cfg: RunConfig, out_dir: str, runs: int, seed: int,
                   noise_enabled: bool = True) -> int:
    noise = NoiseConfig(sigma=cfg.noise.sigma, enabled=noise_enabled,
                        h_meas=cfg.noise.h_meas)
    report = monte_carlo_rmse(runs, seed, cfg.gains, noise=noise,
                              cfg=cfg.integrator, profile=cfg.torque)

    rows = [
        (str(v), w, s, report.value(v, w, s), float(runs), float(seed))
        for v in report.variants for w in WINDOWS for s in SIGNALS
    ]
    table_path = os.path.join(out_dir, "rmse_table.csv")
    _write_csv(table_path, ["observer", "window", "signal", "rmse", "n_runs", "seed"], rows)

    detail_rows = []
    for row in report.per_run:
        idx = int(row[0])
        col = 1
        for v in report.variants:
            for w in WINDOWS:
                for s in SIGNALS:
                    detail_rows.append((str(idx), str(v), w, s, row[col]))
                    col += 1
    detail_path = os.path.join(out_dir, "rmse_runs.csv")
    _write_csv(detail_path, ["run", "observer", "window", "signal",
                             "integral_sq_l2"], detail_rows)
    print(f"wrote {table_path} and {detail_path}")

    if report.failures:
        for idx, msg in report.failures:
            print(f"run {idx} failed: {msg}", file=sys.stderr)
        if len(report.failures) > 0.01 * runs:
            print(f"{len(report.failures)} of {runs} runs failed", file=sys.stderr)
            return EXIT_NUMERIC
    return EXIT_OK


def cmd_linearize(cfg: RunConfig, out_dir: str, alpha_grid, freq_grid) -> int:
    scen = cfg.scenario
    from .so3 import quat_to_rot

    op = OperatingPoint(r=quat_to_rot(scen.q0), gains=cfg.gains, j=scen.j,
                        b=scen.b)
    spec_rows = []
    for alpha in alpha_grid:
        model = linearize_error_dynamics(
            replace(op, gains=replace(cfg.gains, alpha=float(alpha))))
        ev = np.linalg.eigvals(model.a)
        ev = ev[np.lexsort((ev.imag, ev.real))]
        if ev.real.max() >= 0.0:
            print(f"warning: A is not Hurwitz at alpha={alpha:g} "
                  f"(max re = {ev.real.max():.3e})", file=sys.stderr)
        for i, lam in enumerate(ev):
            spec_rows.append((alpha, float(i), lam.real, lam.imag))
    spec_path = os.path.join(out_dir, "spectrum.csv")
    _write_csv(spec_path, ["alpha", "index", "re", "im"], spec_rows)

    model = linearize_error_dynamics(op)
    sig = frequency_response_sigma(model, "d0", freq_grid)
    sig_rows = [
        (w, row[-1], row[len(row) // 2], row[0])
        for w, row in zip(freq_grid, sig)
    ]
    sigma_path = os.path.join(out_dir, "sigma.csv")
    _write_csv(sigma_path, ["omega_rad_s", "sigma_min", "sigma_mid", "sigma_max"],
               sig_rows)
    print(f"wrote {spec_path} and {sigma_path}")
    return EXIT_OK


def cmd_verify(cfg: RunConfig, out_dir: str) -> int:
    scen = cfg.scenario
    noise = NoiseConfig(sigma=0.0, enabled=False, h_meas=cfg.noise.h_meas)
    truth = simulate_truth(scen.truth_init(), scen.j, cfg.torque, cfg.integrator)
    run = run_observer(1, cfg.observer_init(), truth, scen.b, scen.j,
                       cfg.gains, cfg.torque, noise)
    consts = certificate_constants(truth, run, cfg.gains, scen.b, scen.j, cfg.torque)

    c1, c2 = estimate_attitude_quadratic_bounds(cfg.gains)
    eps1 = estimate_sublevel_radius(cfg.gains, scen.j)
    try:
        ules = local_stability_certificate(cfg.gains, scen.j, c1, c2,
                                           omega_bound=consts.k3, check=True)
        pd_ok = True
    except CertificateFailed as exc:
        print(f"certificate failure: {exc}", file=sys.stderr)
        ules = local_stability_certificate(cfg.gains, scen.j, c1, c2,
                                           omega_bound=consts.k3, check=False)
        pd_ok = False

    const_rows = [
        ("k1_quadratic_candidate", consts.k1_quadratic),
        ("k1_triangle", consts.k1_triangle),
        ("k2", consts.k2), ("k3", consts.k3), ("k4", consts.k4),
        ("k5", consts.k5), ("k6", consts.k6), ("k7", consts.k7),
        ("k8", consts.k8), ("k9", consts.k9),
        ("k_ddot_bound", consts.k_ddot), ("k_bar", consts.k_bar),
        ("gamma", consts.gamma), ("v1_initial", consts.v1_initial),
        ("c1_estimate", ules.c1), ("c2_estimate", ules.c2),
        ("eps1_estimate", eps1), ("eps2", ules.eps2), ("eps3", ules.eps3),
        ("eps_used", ules.eps),
        ("w11_norm_bound", ules.w11_norm_bound),
        ("w12_norm_bound", ules.w12_norm_bound),
        ("min_eig_m1", ules.min_eig_m1), ("min_eig_m2", ules.min_eig_m2),
        ("min_eig_w", ules.min_eig_w),
    ]
    _write_csv(os.path.join(out_dir, "certificate_constants.csv"),
               ["name", "value"], const_rows)

    ineq_rows = [
        (name, "pass" if chk.ok else "FAIL", chk.max_violation,
         float(chk.n_violations), "estimate" if chk.estimate_based else "certified")
        for name, chk in consts.holds.items()
    ]
    _write_csv(os.path.join(out_dir, "certificate_checks.csv"),
               ["inequality", "status", "max_violation", "n_violations", "kind"],
               ineq_rows)

    lines = ["stability certificate report", "============================", ""]
    lines += [f"{name:28s} = {_fmt(val)}" for name, val in const_rows]
    lines.append("")
    for name, chk in consts.holds.items():
        kind = "estimate " if chk.estimate_based else "certified"
        status = "pass" if chk.ok else "FAIL"
        lines.append(f"[{kind}] {name:32s} {status}  "
                     f"(max violation {chk.max_violation:.3e}, n={chk.n_violations})")
    lines.append("")
    lines.append(f"gamma positive: {'pass' if consts.gamma > 0 else 'FAIL'}")
    lines.append(f"M1, M2, W positive definite at eps={_fmt(ules.eps)}: "
                 f"{'pass' if pd_ok else 'FAIL'}")
    report = "\n".join(lines) + "\n"
    path = os.path.join(out_dir, "certificate_report.txt")
    os.makedirs(out_dir, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(report)
    print(report)

    certified_ok = consts.all_certified_hold() and consts.gamma > 0 and pd_ok
    return EXIT_OK if certified_ok else EXIT_CERTIFICATE


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="attobs",
        description="Attitude/rate/bias observer simulation and validation")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", default=None, help="INI config file")
        sp.add_argument("--out", default="out", help="output directory")
        sp.add_argument("--no-noise", action="store_true",
                        help="force measurement noise off")

    sp = sub.add_parser("simulate", help="one scenario, per-observer trajectory CSVs")
    common(sp)
    sp.add_argument("--observer", default="all", help="1, 2, 3, 4 or 'all' (=1,2,4)")

    sp = sub.add_parser("montecarlo", help="sampled-scenario RMSE benchmark")
    common(sp)
    sp.add_argument("--runs", type=int, default=100)
    sp.add_argument("--seed", type=int, default=None,
                    help="root seed (default: scenario seed from config)")

    sp = sub.add_parser("linearize", help="spectrum vs fusion weight and noise gains")
    common(sp)
    sp.add_argument("--alpha-grid", default="0.1:0.9:9",
                    help="'a:b:n' linear grid or comma list")
    sp.add_argument("--freq-grid", default="0.01:1000:181",
                    help="'a:b:n' log grid or comma list, rad/s")

    sp = sub.add_parser("verify", help="evaluate the stability certificate")
    common(sp)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.no_noise:
            cfg = replace(cfg, noise=NoiseConfig(sigma=cfg.noise.sigma, enabled=False,
                                                 h_meas=cfg.noise.h_meas))
        if args.command == "simulate":
            return cmd_simulate(cfg, args.out, _select_observers(args.observer))
        if args.command == "montecarlo":
            seed = cfg.seed if args.seed is None else args.seed
            return cmd_montecarlo(cfg, args.out, args.runs, seed,
                                  noise_enabled=not args.no_noise)
        if args.command == "linearize":
            return cmd_linearize(cfg, args.out,
                                 _parse_grid(args.alpha_grid, log=False),
                                 _parse_grid(args.freq_grid, log=True))
        if args.command == "verify":
            return cmd_verify(cfg, args.out)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NonFiniteState as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except CertificateFailed as exc:
        print(f"certificate failure: {exc}", file=sys.stderr)
        return EXIT_CERTIFICATE


if __name__ == "__main__":
    sys.exit(main())
