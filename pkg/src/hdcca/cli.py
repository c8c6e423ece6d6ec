"""Command-line surface: analyze, simulate, master-check, pca.

Exit codes: 0 success, 2 input error, 3 dimension-regime violation,
4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from pathlib import Path

import numpy as np

from . import io as hio
from . import master, wachter
from .errors import (
    DimensionError,
    HdccaError,
    MissingValue,
    ParseError,
    ShapeMismatch,
    SpecError,
)
from .inference import analyze
from .linalg import angle_between, pca_spectrum, sample_cca
from .presets import PRESETS, build_spec
from .simulate import SimSpec, gen_data, mc_angles, seeded_rng

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_REGIME = 3
EXIT_NUMERICAL = 4

_INPUT_ERRORS = (ParseError, MissingValue, ShapeMismatch, SpecError, FileNotFoundError)


def _print_spike_table(report, file=None):
    file = file if file is not None else sys.stdout
    if not report.spikes:
        edge = report.regime.lambda_plus if report.regime else float("nan")
        print(f"no correlations above the bulk edge ({edge:.4f})", file=file)
        return
    same_sides = report.regime is not None and report.regime.K == report.regime.M
    header = ["signal", "lambda", "rho_sq", "|rho|"]
    header += ["angle"] if same_sides else ["theta_x", "theta_y"]
    header += ["sin2"] if same_sides else ["sin2_x", "sin2_y"]
    header += ["gate"]
    print("  ".join(f"{h:>8}" for h in header), file=file)
    for s in report.spikes:
        row = [f"{s.index:>8}", f"{s.lam:8.2f}", f"{s.rho_sq_hat:8.2f}",
               f"{s.rho_abs:8.2f}"]
        if same_sides:
            row += [f"{s.theta_x_deg:8.2f}", f"{s.sin2_x:8.2f}"]
        else:
            row += [f"{s.theta_x_deg:8.2f}", f"{s.theta_y_deg:8.2f}",
                    f"{s.sin2_x:8.2f}", f"{s.sin2_y:8.2f}"]
        row += ["      ok" if s.gate_passed else "  gapped"]
        print("  ".join(row), file=file)


def cmd_analyze(args) -> int:
    u = hio.load_csv(args.u_csv, orientation=args.orientation, demean=args.demean)
    v = hio.load_csv(args.v_csv, orientation=args.orientation, demean=args.demean)
    hio.check_joint_samples(u, v)
    report = analyze(
        u.values,
        v.values,
        demean=False,  # already applied at load time
        gate_multiplier=args.gate_multiplier,
        bins=args.bins,
        empirical=True,
    )
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if args.format in ("csv", "both"):
        hio.write_correlations_csv(out / "correlations.csv", report.correlations)
        hio.write_histogram_csv(out / "histogram.csv", report.histogram)
        spikes = list(report.spikes)
        if args.empirical_rows:
            spikes += list(report.empirical_spikes)
        hio.write_spikes_csv(out / "spikes.csv", spikes)
        if report.overlay is not None:
            hio.write_overlay_csv(out / "overlay.csv", report.overlay)
    if args.format in ("json", "both"):
        hio.write_report_json(out / "report.json", report)
    if args.pca:
        hio.write_pca_csv(out / "pca_u.csv", pca_spectrum(u.values))
        hio.write_pca_csv(out / "pca_v.csv", pca_spectrum(v.values))
    _print_spike_table(report)
    for note in report.notes:
        print(f"note: {note}")
    if report.regime is None:
        return EXIT_REGIME
    return EXIT_OK


def _write_curve(path, rows):
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["rho_sq", "theta_theory", "theta_mean", "band_lo", "band_hi"]
        )
        for row in rows:
            writer.writerow([hio.fmt(v) for v in row])


def _write_angles_csv(path, rows):
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["signal", "rho_sq", "theta_x_theory", "theta_x_sim",
             "theta_y_theory", "theta_y_sim"]
        )
        for row in rows:
            writer.writerow([row[0]] + [hio.fmt(v) for v in row[1:]])


def _run_single(spec, out):
    U, V, truth = gen_data(spec)
    report = analyze(U, V)
    hio.write_correlations_csv(out / "correlations.csv", report.correlations)
    hio.write_histogram_csv(out / "histogram.csv", report.histogram)
    hio.write_spikes_csv(out / "spikes.csv", report.spikes)
    if report.overlay is not None:
        hio.write_overlay_csv(out / "overlay.csv", report.overlay)
    if spec.n_signals:
        regime = wachter.regime_from_dims(spec.K, spec.M, spec.S)
        res = sample_cca(U, V)
        rows = []
        for q, r in enumerate(spec.signal_strengths):
            rho_sq = r * r
            if rho_sq > regime.rho_c_sq:
                pred = wachter.spike_prediction(rho_sq, regime)
                tx, ty = (
                    wachter.theta_degrees(pred.s_x),
                    wachter.theta_degrees(pred.s_y),
                )
            else:
                tx = ty = 90.0
            sim_x = angle_between(truth.x[q], res.left_variables[q]).degrees
            sim_y = angle_between(truth.y[q], res.right_variables[q]).degrees
            rows.append((q + 1, rho_sq, tx, sim_x, ty, sim_y))
        _write_angles_csv(out / "angles.csv", rows)
    _print_spike_table(report)
    return EXIT_OK


def _run_mc(spec, replications, out):
    summary = mc_angles(spec, replications)
    rows_x, rows_y = [], []
    for q, pred in enumerate(summary.theory):
        rows_x.append(
            (
                pred.rho_sq,
                wachter.theta_degrees(pred.s_x),
                summary.mean_theta_x[q],
                summary.band_x[0, q],
                summary.band_x[1, q],
            )
        )
        rows_y.append(
            (
                pred.rho_sq,
                wachter.theta_degrees(pred.s_y),
                summary.mean_theta_y[q],
                summary.band_y[0, q],
                summary.band_y[1, q],
            )
        )
    _write_curve(out / "theta_x_curve.csv", rows_x)
    _write_curve(out / "theta_y_curve.csv", rows_y)
    hio.write_correlations_csv(out / "mean_lambdas.csv", summary.lambdas.mean(axis=0))
    for q, pred in enumerate(summary.theory):
        print(
            f"signal {q + 1}: rho_sq={pred.rho_sq:.4f}  "
            f"theta_x theory {wachter.theta_degrees(pred.s_x):6.2f} "
            f"mean {summary.mean_theta_x[q]:6.2f}  "
            f"theta_y theory {wachter.theta_degrees(pred.s_y):6.2f} "
            f"mean {summary.mean_theta_y[q]:6.2f}"
        )
    return EXIT_OK


def _run_mc_curve(spec_kwargs, rho_grid, replications, seed, out):
    regime = wachter.regime_from_dims(
        spec_kwargs["K"], spec_kwargs["M"], spec_kwargs["S"]
    )
    rows_x, rows_y = [], []
    for idx, rho_sq in enumerate(rho_grid):
        spec = SimSpec(
            **{**spec_kwargs, "signal_strengths": (math.sqrt(rho_sq),),
               "seed": seed + idx}
        )
        summary = mc_angles(spec, replications)
        if rho_sq > regime.rho_c_sq:
            pred = wachter.spike_prediction(rho_sq, regime)
            tx, ty = wachter.theta_degrees(pred.s_x), wachter.theta_degrees(pred.s_y)
        else:
            tx = ty = 90.0
        rows_x.append(
            (rho_sq, tx, summary.mean_theta_x[0], *summary.band_x[:, 0])
        )
        rows_y.append(
            (rho_sq, ty, summary.mean_theta_y[0], *summary.band_y[:, 0])
        )
    _write_curve(out / "theta_x_curve.csv", rows_x)
    _write_curve(out / "theta_y_curve.csv", rows_y)
    print(f"wrote angle curves over {len(rho_grid)} strengths")
    return EXIT_OK


def _run_theory_curve(spec_kwargs, out):
    regime = wachter.regime_from_dims(
        spec_kwargs["K"], spec_kwargs["M"], spec_kwargs["S"]
    )
    with (out / "theory_curve.csv").open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["rho_sq", "z_rho", "theta_x_deg", "theta_y_deg"])
        for rho_sq in np.linspace(regime.rho_c_sq + 1e-3, 1.0, 200):
            pred = wachter.spike_prediction(rho_sq, regime)
            writer.writerow(
                [
                    hio.fmt(rho_sq),
                    hio.fmt(pred.z_rho),
                    hio.fmt(wachter.theta_degrees(pred.s_x)),
                    hio.fmt(wachter.theta_degrees(pred.s_y)),
                ]
            )
    print("wrote theory_curve.csv")
    return EXIT_OK


def cmd_simulate(args) -> int:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if args.preset:
        preset = PRESETS.get(args.preset)
        if preset is None:
            raise SpecError(
                f"unknown preset {args.preset!r}; available: {sorted(PRESETS)}"
            )
        replications = args.replications or preset.replications
        seed = args.seed if args.seed is not None else 0
        if preset.kind == "theory-curve":
            return _run_theory_curve(preset.spec_kwargs, out)
        if preset.kind == "single-run":
            return _run_single(build_spec(preset, seed=seed), out)
        if preset.kind == "mc":
            return _run_mc(build_spec(preset, seed=seed), replications, out)
        if preset.kind == "mc-curve":
            return _run_mc_curve(
                preset.spec_kwargs, preset.rho_grid, replications, seed, out
            )
        raise SpecError(f"unknown preset kind {preset.kind!r}")
    if not args.spec:
        raise SpecError("simulate needs --preset or --spec")
    spec, extras = hio.parse_sim_config(args.spec)
    if args.seed is not None:
        spec = SimSpec(
            **{
                **{f: getattr(spec, f) for f in (
                    "K", "M", "S", "signal_strengths", "noise_law", "noise_df",
                    "signal_mode", "signal_cov_scale", "mix",
                )},
                "seed": args.seed,
            }
        )
    replications = args.replications or extras.get("replications", 1)
    if "rho_grid" in extras:
        kwargs = dict(
            K=spec.K, M=spec.M, S=spec.S,
            noise_law=spec.noise_law, noise_df=spec.noise_df,
        )
        return _run_mc_curve(
            kwargs, extras["rho_grid"], replications, spec.seed, out
        )
    if replications <= 1:
        return _run_single(spec, out)
    return _run_mc(spec, replications, out)


def cmd_master_check(args) -> int:
    K, M, S = args.dims
    wachter.regime_from_dims(K, M, S)  # raises DimensionError -> exit 3
    rng = seeded_rng(args.seed)
    U_sub = rng.standard_normal((K - 1, S))
    V_sub = rng.standard_normal((M - 1, S))
    u_star = rng.standard_normal(S)
    u_star /= np.linalg.norm(u_star)
    v_star = rng.standard_normal(S)
    v_star /= np.linalg.norm(v_star)
    U = np.vstack([u_star, U_sub])
    V = np.vstack([v_star, V_sub])

    inputs = master.MasterInputs.from_matrices(u_star, v_star, U_sub, V_sub)
    roots = master.master_roots(inputs)
    res = sample_cca(U, V)
    lam = res.correlations_sq
    root_err = float(np.max(np.abs(np.sort(roots) - np.sort(lam))))

    y = np.sort(sample_cca(U_sub, V).correlations_sq)[::-1]
    c2 = inputs.poles()
    tol = 1e-9
    interlaced = all(
        roots[i] >= y[i] - tol and y[i] >= roots[i + 1] - tol for i in range(len(y))
    ) and all(
        y[i] >= c2[i] - tol and (i + 1 >= len(y) or c2[i] >= y[i + 1] - tol)
        for i in range(len(c2))
    )

    vec_err = 0.0
    for i, z in enumerate(lam):
        st = master.master_vector_stats(z, inputs)
        cx = abs(u_star @ res.left_variables[i])
        cy = abs(v_star @ res.right_variables[i])
        vec_err = max(vec_err, abs(st.cos_theta_x - cx), abs(st.cos_theta_y - cy))

    print(f"dims K={K} M={M} S={S} seed={args.seed}")
    print(f"root count: {roots.shape[0]} (expected {K})")
    print(f"max |secular root - eigensolver correlation| = {root_err:.3e}")
    print(f"interlacing: {'ok' if interlaced else 'VIOLATED'}")
    print(f"max |vector-statistic cosine - measured cosine| = {vec_err:.3e}")
    ok = roots.shape[0] == K and root_err < 1e-9 and interlaced and vec_err < 1e-8
    return EXIT_OK if ok else EXIT_NUMERICAL


def cmd_pca(args) -> int:
    data = hio.load_csv(args.csv, orientation=args.orientation, demean=args.demean)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    eig = pca_spectrum(data.values)
    hio.write_pca_csv(out / "pca_spectrum.csv", eig)
    print(f"wrote pca_spectrum.csv ({eig.shape[0]} eigenvalues)")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hdcca",
        description="high-dimensional CCA: spike detection and precision estimates",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    pa = sub.add_parser("analyze", help="CCA analysis of two CSV panels")
    pa.add_argument("u_csv")
    pa.add_argument("v_csv")
    pa.add_argument(
        "--orientation",
        choices=["rows-are-variables", "rows-are-samples"],
        default="rows-are-variables",
    )
    pa.add_argument(
        "--demean",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="remove per-variable means across samples (default on)",
    )
    pa.add_argument("--gate-multiplier", type=float, default=5.0)
    pa.add_argument("--bins", type=int, default=None)
    pa.add_argument("--out-dir", default=".")
    pa.add_argument("--format", choices=["csv", "json", "both"], default="both")
    pa.add_argument("--pca", action="store_true", help="also write PCA spectra")
    pa.add_argument(
        "--empirical-rows",
        action="store_true",
        help="append empirical-route rows to the spike table",
    )
    pa.set_defaults(func=cmd_analyze)

    ps = sub.add_parser("simulate", help="synthetic draws and Monte Carlo curves")
    ps.add_argument("--preset", default=None, help=f"one of {sorted(PRESETS)}")
    ps.add_argument("--spec", default=None, help="flat key=value spec file")
    ps.add_argument("--replications", type=int, default=None)
    ps.add_argument("--seed", type=int, default=None)
    ps.add_argument("--out-dir", default=".")
    ps.set_defaults(func=cmd_simulate)

    pm = sub.add_parser(
        "master-check", help="verify the exact secular equations on a random instance"
    )
    pm.add_argument("--seed", type=int, default=0)
    pm.add_argument(
        "--dims", type=int, nargs=3, default=[6, 9, 40], metavar=("K", "M", "S")
    )
    pm.set_defaults(func=cmd_master_check)

    pp = sub.add_parser("pca", help="PCA spectrum of one CSV panel")
    pp.add_argument("csv")
    pp.add_argument(
        "--orientation",
        choices=["rows-are-variables", "rows-are-samples"],
        default="rows-are-variables",
    )
    pp.add_argument("--demean", action=argparse.BooleanOptionalAction, default=True)
    pp.add_argument("--out-dir", default=".")
    pp.set_defaults(func=cmd_pca)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _INPUT_ERRORS as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except DimensionError as exc:
        print(f"dimension regime violation: {exc}", file=sys.stderr)
        return EXIT_REGIME
    except (HdccaError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
