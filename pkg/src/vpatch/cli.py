"""Command-line front end.

Subcommands: simulate, spectrum, critical-gammas, rectify-check, resonance,
verify. Outputs are deterministic (17-significant-digit CSV, sorted JSON
with a schema_version field); wall-clock data goes only into a ``.meta.json``
sidecar next to each output file. Exit codes: 0 success, 1 precondition
failure, 2 numerical abort (blow-up or non-convergence).
"""

from __future__ import annotations

import argparse
import datetime
import json
import os
import sys

import numpy as np

from . import __version__
from .dynamics import integrate
from .errors import ConvergenceError, DomainError
from .geometry import Grid, RadialDeformation, ellipse_params
from .resonance import ResonanceConfig, measure_estimate, transversality_margins
from .spectral import critical_gamma, mode_data

EXIT_OK = 0
EXIT_PRECONDITION = 1
EXIT_NUMERICAL = 2


def _write_sidecar(path: str, argv: list[str]) -> None:
    meta = {
        "created_utc": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "tool_version": __version__,
        "argv": argv,
    }
    with open(path + ".meta.json", "w") as fh:
        json.dump(meta, fh, indent=1, sort_keys=True)
        fh.write("\n")


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _parse_xi0(text: str, grid: Grid) -> RadialDeformation:
    """'zero' or 'cos:N:AMP' / 'sin:N:AMP' (sums allowed, '+'-separated)."""
    if text == "zero":
        return RadialDeformation.zero(grid)
    cos_amps: dict[int, float] = {}
    sin_amps: dict[int, float] = {}
    for part in text.split("+"):
        try:
            kind, n_str, amp_str = part.split(":")
            n, amp = int(n_str), float(amp_str)
        except ValueError:
            raise DomainError(
                f"initial state '{text}' not understood; use 'zero' or "
                "'cos:N:AMP' / 'sin:N:AMP' joined by '+'"
            ) from None
        if kind == "cos":
            cos_amps[n] = cos_amps.get(n, 0.0) + amp
        elif kind == "sin":
            sin_amps[n] = sin_amps.get(n, 0.0) + amp
        else:
            raise DomainError(f"unknown mode kind '{kind}' in initial state")
    return RadialDeformation.from_modes(grid, cos_amps, sin_amps)


def _cmd_simulate(args, argv) -> int:
    params = ellipse_params(args.gamma)
    grid = Grid(args.n_points)
    xi0 = _parse_xi0(args.xi0, grid)
    if args.omega == "equilibrium":
        omega = params.rotation_rate
    else:
        try:
            omega = float(args.omega)
        except ValueError:
            raise DomainError(
                f"angular velocity '{args.omega}' is neither 'equilibrium' nor a number"
            ) from None
    record = integrate(xi0, omega, params, args.dt, args.t_end, args.record_stride)
    if args.output:
        record.to_csv(args.output)
        _write_sidecar(args.output, argv)
    if args.state_dump:
        record.to_state_dump(args.state_dump)
        _write_sidecar(args.state_dump, argv)
    if args.plot_data:
        # plain (x, y) columns instead of image files: time vs sup norm
        with open(args.plot_data, "w") as fh:
            fh.write("# t max_abs_xi\n")
            for t, row in zip(record.times, record.states):
                fh.write(f"{_fmt(t)} {_fmt(abs(row).max())}\n")
        _write_sidecar(args.plot_data, argv)
    final = record.diagnostics[-1]
    print(f"steps={len(record.times) - 1} t_final={_fmt(record.times[-1])}")
    print(f"max_abs_xi={_fmt(record.max_abs())}")
    print(f"circulation={_fmt(final.circulation)} angular_momentum={_fmt(final.angular_momentum)}")
    if record.aborted:
        print(f"aborted: {record.abort_reason}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def _cmd_spectrum(args, argv) -> int:
    params = ellipse_params(args.gamma)
    lines = ["n,mu_plus,mu_minus,omega_n,m_n,class"]
    for n in range(1, args.n_max + 1):
        d = mode_data(n, params)
        lines.append(
            f"{n},{_fmt(d.mu_plus)},{_fmt(d.mu_minus)},{_fmt(d.omega_n)},"
            f"{_fmt(d.m_n)},{d.stability}"
        )
    text = "\n".join(lines) + "\n"
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
        _write_sidecar(args.output, argv)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_critical_gammas(args, argv) -> int:
    ns = [args.n] if args.n else list(range(3, args.n_max + 1))
    lines = ["n,critical_gamma"] if len(ns) > 1 else []
    for n in ns:
        value = critical_gamma(n)
        if len(ns) == 1:
            print(f"{value:.10f}")
        else:
            lines.append(f"{n},{value:.10f}")
    if len(ns) > 1:
        text = "\n".join(lines) + "\n"
        if args.output:
            with open(args.output, "w") as fh:
                fh.write(text)
            _write_sidecar(args.output, argv)
        else:
            sys.stdout.write(text)
    return EXIT_OK


def _cmd_rectify_check(args, argv) -> int:
    from . import fourier
    from .dynamics import rectified_momentum
    from .rectification import (
        impact_time,
        impact_time_gradient,
        momentum_field,
        momentum_flow,
        rectify,
        rectify_inverse,
    )

    params = ellipse_params(args.gamma)
    grid = Grid(args.n_points)
    rng = np.random.default_rng(args.seed)
    theta = grid.nodes

    def random_state(amplitude: float) -> RadialDeformation:
        vals = np.zeros(grid.n_points)
        for n in range(1, args.mode_cutoff + 1):
            decay = 1.0 / (1 + n)
            vals += decay * (rng.normal() * np.cos(n * theta) + rng.normal() * np.sin(n * theta))
        vals *= amplitude / np.abs(vals).max()
        return RadialDeformation(grid, fourier.remove_mean(vals))

    round_trip_err = 0.0
    momentum_err = 0.0
    impact_err = 0.0
    shift_err = 0.0
    pairing_err = 0.0
    for _ in range(args.trials):
        xi = random_state(args.amplitude)
        state = rectify(xi, params)
        back = rectify_inverse(state.j_coord, state.t_coord, state.u_perp, params)
        round_trip_err = max(round_trip_err, float(np.abs(back.values - xi.values).max()))
        momentum_err = max(
            momentum_err, abs(rectified_momentum(back, params) - state.j_coord)
        )
        impact_err = max(impact_err, abs(impact_time(back, params) - state.t_coord))
        tau = 0.01
        shift_err = max(
            shift_err,
            abs(impact_time(momentum_flow(tau, xi, params), params) - (state.t_coord - tau)),
        )
        grad = impact_time_gradient(xi, params)
        pairing = fourier.grid_inner(grad, momentum_field(xi, params))
        pairing_err = max(pairing_err, abs(pairing + 1.0))

    report = {
        "schema_version": 1,
        "kind": "rectification-check",
        "gamma": args.gamma,
        "n_points": args.n_points,
        "amplitude": args.amplitude,
        "trials": args.trials,
        "seed": args.seed,
        "round_trip_max_err": round_trip_err,
        "momentum_coordinate_max_err": momentum_err,
        "impact_time_max_err": impact_err,
        "flow_shift_max_err": shift_err,
        "canonical_pairing_max_err": pairing_err,
        "pass": bool(
            round_trip_err < args.tol
            and momentum_err < args.tol
            and impact_err < args.tol
            and shift_err < args.tol
            and pairing_err < 1e-8
        ),
    }

    if args.scan_amplitude:
        amp, largest = args.amplitude, 0.0
        while amp <= 1.0:
            try:
                xi = random_state(amp)
                state = rectify(xi, params)
                back = rectify_inverse(state.j_coord, state.t_coord, state.u_perp, params)
            except (ConvergenceError, DomainError):
                break
            if np.abs(back.values - xi.values).max() > args.scan_tol:
                break
            largest = amp
            amp *= 2.0
        report["largest_round_trip_amplitude"] = largest

    text = json.dumps(report, indent=1, sort_keys=True) + "\n"
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
        _write_sidecar(args.output, argv)
    else:
        sys.stdout.write(text)
    return EXIT_OK if report["pass"] else EXIT_NUMERICAL


def _cmd_resonance(args, argv) -> int:
    cfg = ResonanceConfig(
        sites=tuple(int(s) for s in args.sites.split(",")),
        n_bar=args.n_bar,
        upsilons=tuple(float(u) for u in args.upsilon.split(",")),
        tau=args.tau,
        l_max=args.l_max,
        n_max=args.n_max,
        gamma_min=args.gamma_min,
        gamma_max=args.gamma_max,
        delta_gamma=args.d_gamma,
        shift=args.shift,
        index_restrictions=args.index_restrictions,
    )
    report = measure_estimate(cfg, workers=args.workers)
    if args.csv:
        report.to_csv(args.csv)
        _write_sidecar(args.csv, argv)
    if args.json:
        report.to_json(args.json)
        _write_sidecar(args.json, argv)
    for u, measure in report.trend():
        print(f"upsilon={_fmt(u)} excluded_measure={_fmt(measure)}")
    if args.transversality:
        rho = min(
            transversality_margins(float(g), cfg) for g in report.gammas[:: args.transversality_stride]
        )
        print(f"transversality_min={_fmt(rho)}")
    return EXIT_OK


def _cmd_verify(args, argv) -> int:
    from .verification import run_checks

    results = run_checks(names=args.only, fast=args.fast)
    failed = 0
    for res in results:
        status = "PASS" if res.passed else "FAIL"
        print(f"{status} {res.name}: {res.detail} [{res.elapsed:.2f} s]")
        failed += 0 if res.passed else 1
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_PRECONDITION


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="vpatch",
        description="Contour dynamics of near-elliptical vortex patches.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="integrate the contour dynamics")
    sim.add_argument("--gamma", type=float, required=True)
    sim.add_argument("--n-points", type=int, default=256)
    sim.add_argument("--dt", type=float, default=1e-3)
    sim.add_argument("--t-end", type=float, required=True)
    sim.add_argument("--omega", default="equilibrium",
                     help="'equilibrium' or a numeric angular velocity")
    sim.add_argument("--xi0", default="zero",
                     help="'zero' or 'cos:N:AMP'/'sin:N:AMP' joined by '+'")
    sim.add_argument("--record-stride", type=int, default=10)
    sim.add_argument("--output", help="diagnostics CSV path")
    sim.add_argument("--state-dump", help="state dump path (JSON + .bin)")
    sim.add_argument("--plot-data", help="write plain (t, max|xi|) columns here")
    sim.set_defaults(func=_cmd_simulate)

    spect = sub.add_parser("spectrum", help="linear mode table at the ellipse")
    spect.add_argument("--gamma", type=float, required=True)
    spect.add_argument("--n-max", type=int, default=32)
    spect.add_argument("--output")
    spect.set_defaults(func=_cmd_spectrum)

    crit = sub.add_parser("critical-gammas", help="stability-transition aspect ratios")
    crit.add_argument("--n", type=int, help="single mode index (>= 3)")
    crit.add_argument("--n-max", type=int, default=8)
    crit.add_argument("--output")
    crit.set_defaults(func=_cmd_critical_gammas)

    rect = sub.add_parser("rectify-check", help="round-trip and bracket suites")
    rect.add_argument("--gamma", type=float, default=2.0)
    rect.add_argument("--n-points", type=int, default=256)
    rect.add_argument("--amplitude", type=float, default=1e-3)
    rect.add_argument("--trials", type=int, default=20)
    rect.add_argument("--mode-cutoff", type=int, default=10)
    rect.add_argument("--seed", type=int, default=12345)
    rect.add_argument("--tol", type=float, default=1e-9)
    rect.add_argument("--scan-amplitude", action="store_true",
                      help="double the amplitude until the round trip fails")
    rect.add_argument("--scan-tol", type=float, default=1e-6,
                      help="round-trip error defining scan failure")
    rect.add_argument("--output", help="JSON report path")
    rect.set_defaults(func=_cmd_rectify_check)

    reso = sub.add_parser("resonance", help="non-resonance measure report")
    reso.add_argument("--sites", default="4,5", help="comma-separated tangential modes")
    reso.add_argument("--n-bar", type=int, default=2)
    reso.add_argument("--upsilon", default="1e-2,1e-3,1e-4",
                      help="comma-separated decreasing Diophantine constants")
    reso.add_argument("--tau", type=float, default=3.0)
    reso.add_argument("--l-max", type=int, default=20)
    reso.add_argument("--n-max", type=int, default=64)
    reso.add_argument("--gamma-min", type=float, default=1.5)
    reso.add_argument("--gamma-max", type=float, default=2.5)
    reso.add_argument("--d-gamma", type=float, default=1e-4)
    reso.add_argument("--shift", type=float, default=0.0)
    reso.add_argument("--index-restrictions", action="store_true")
    reso.add_argument("--workers", type=int,
                      default=int(os.environ.get("VPATCH_WORKERS", "1")))
    reso.add_argument("--transversality", action="store_true")
    reso.add_argument("--transversality-stride", type=int, default=10)
    reso.add_argument("--csv")
    reso.add_argument("--json", dest="json")
    reso.set_defaults(func=_cmd_resonance)

    ver = sub.add_parser("verify", help="run the acceptance-property suite")
    ver.add_argument("--only", nargs="*", default=None,
                     help="subset of check names to run")
    ver.add_argument("--fast", action="store_true",
                     help="skip the slowest checks (long trajectory, measure scan)")
    ver.set_defaults(func=_cmd_verify)

    return p


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, ["vpatch", *argv])
    except DomainError as exc:
        print(f"precondition violated: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except ConvergenceError as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
