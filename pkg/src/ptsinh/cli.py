"""Command-line driver: single solves, sweeps, contour/potential tables,
Riccati-Pade runs, and named reproduction presets.

Output is CSV: `#`-prefixed key=value comment lines echoing the effective
configuration, a header row, then data rows with shortest-round-trip float
formatting and LF line endings.  A flat key=value config file can preload
any command's flags; explicit flags override the file.  Exit codes:
0 success, 2 invalid configuration, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import math
import sys

import mpmath as mp
import numpy as np

from .contour import ContourDomainError, FamilySelector, optimal_shift
from .discretization import GridSpec, build_hamiltonian, default_x_max
from .potential import PotentialDomainError, PotentialParams, eval_potential_line
from .rpm import (
    RpmConvergenceError,
    RpmDomainError,
    convergence_table,
    transform_iq,
    transform_u,
)
from .spectral import (
    EigenvectorError,
    NoSignChangeError,
    StepCollapseError,
    continuation_sweep,
    find_real_eigenvalues,
)

__all__ = ["main"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

_CONFIG_ERRORS = (PotentialDomainError, ContourDomainError, RpmDomainError, ValueError)
_NUMERICAL_ERRORS = (
    RpmConvergenceError,
    NoSignChangeError,
    StepCollapseError,
    EigenvectorError,
    ArithmeticError,
)


# ---------------------------------------------------------------------------
# configuration and CSV plumbing


def _load_config(path: str) -> list[str]:
    """Flat key=value file -> argv fragment (`--key value` pairs).

    Keys mirror the long flag names one-to-one (with - or _); blank lines
    and `#` comments are ignored.  The fragment is inserted before the
    explicit flags so that the command line overrides the file.
    """
    argv: list[str] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {raw!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            argv.extend([f"--{key.replace('_', '-')}", value])
    return argv


def _fmt(value) -> str:
    """One CSV cell: shortest-round-trip floats, plain text otherwise."""
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, mp.mpf):
        return mp.nstr(value, 20)
    return str(value)


def _write_csv(path: str, echo: dict, header: list[str], rows: list[list]) -> None:
    stream = sys.stdout if path == "-" else open(path, "w", encoding="utf-8", newline="\n")
    try:
        for key in sorted(echo):
            stream.write(f"# {key}={_fmt(echo[key])}\n")
        stream.write(",".join(header) + "\n")
        for row in rows:
            stream.write(",".join(_fmt(cell) for cell in row) + "\n")
    finally:
        if stream is not sys.stdout:
            stream.close()


_PLOT_TEMPLATE = """\
#!/usr/bin/env python3
\"\"\"Plot {csv} (generated alongside the data; edit freely).\"\"\"
import csv

import matplotlib.pyplot as plt

rows = []
with open({csv!r}) as fh:
    reader = csv.reader(line for line in fh if not line.startswith("#"))
    header = next(reader)
    for row in reader:
        rows.append(dict(zip(header, row)))

{body}
plt.tight_layout()
plt.show()
"""

_PLOT_BODIES = {
    "sweep": """\
key = lambda r: (r.get("beta", ""), r.get("family", ""), r["level_index"])
tracks = {}
for r in rows:
    if r["event"] or not r["E"]:
        continue
    tracks.setdefault(key(r), []).append((float(r["alpha"]), float(r["E"])))
for label, pts in sorted(tracks.items()):
    pts.sort()
    plt.plot([a for a, _ in pts], [e for _, e in pts], label=str(label))
plt.xlabel("alpha")
plt.ylabel("E")
plt.legend(fontsize=6)""",
    "contour": """\
alphas = [float(r["alpha"]) for r in rows]
for col in ("y_opt", "y_plus", "y_minus"):
    style = "-" if col == "y_opt" else "--"
    plt.plot(alphas, [float(r[col]) for r in rows], style, label=col)
plt.xlabel("alpha")
plt.ylabel("y")
plt.legend()""",
    "veff": """\
groups = {}
for r in rows:
    groups.setdefault(r.get("alpha", ""), []).append(r)
fig, (ax_re, ax_im) = plt.subplots(1, 2, sharex=True)
for label, grp in sorted(groups.items()):
    xs = [float(r["x"]) for r in grp]
    ax_re.plot(xs, [float(r["re_v_eff"]) for r in grp], label=str(label))
    ax_im.plot(xs, [float(r["im_v_eff"]) for r in grp], label=str(label))
ax_re.set_xlabel("x"); ax_re.set_ylabel("Re V_eff"); ax_re.legend()
ax_im.set_xlabel("x"); ax_im.set_ylabel("Im V_eff")""",
    "points": """\
plt.plot([float(r["alpha"]) for r in rows], [float(r["E"]) for r in rows], ".")
plt.xlabel("alpha")
plt.ylabel("E")""",
}


def _emit_plot_script(script_path: str, csv_path: str, style: str) -> None:
    if csv_path == "-":
        raise ValueError("--plot-script requires --output to name a CSV file")
    with open(script_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(_PLOT_TEMPLATE.format(csv=csv_path, body=_PLOT_BODIES[style]))


def _echo(args: argparse.Namespace, keys: list[str]) -> dict:
    return {k: getattr(args, k) for k in keys if getattr(args, k) is not None}


# ---------------------------------------------------------------------------
# commands


def _resolve_shift(args) -> tuple[PotentialParams, float]:
    params = PotentialParams(args.alpha, args.beta)
    if args.y is not None:
        return params, args.y
    return params, optimal_shift(params, FamilySelector(args.family)).y


def cmd_solve(args) -> int:
    params, y = _resolve_shift(args)
    x_max = args.x_max if args.x_max is not None else default_x_max(params)
    grid = GridSpec(x_max, args.n, y)
    op = build_hamiltonian(params, grid)
    roots = find_real_eigenvalues(op, args.e_min, args.e_max, args.scan_step)
    # dyadic-n comparison: the h^2 error at n is ~(E_n - E_{n/2}) / 3
    op_half = build_hamiltonian(params, GridSpec(x_max, args.n // 2, y))
    roots_half = find_real_eigenvalues(op_half, args.e_min, args.e_max, args.scan_step)
    rows = []
    for k, e in enumerate(roots, start=1):
        est = None
        if roots_half:
            partner = min(roots_half, key=lambda r: abs(r - e))
            if abs(partner - e) < 0.1 * max(1.0, abs(e)):
                est = abs(e - partner) / 3.0
        rows.append([k, e, y, args.n, x_max, est])
    if not rows:
        print("warning: no real eigenvalues on this contour", file=sys.stderr)
    _write_csv(
        args.output,
        _echo(args, ["alpha", "beta", "family", "n", "e_min", "e_max", "scan_step"])
        | {"y": y, "x_max": x_max},
        ["level_index", "E", "y_used", "n", "x_max", "est_error"],
        rows,
    )
    return EXIT_OK


def _sweep_rows(tracks, extra: list) -> list[list]:
    rows = []
    for t in tracks:
        fam = t.family.alpha_R
        for a, e in t.points:
            rows.append(extra + [fam, t.level_index, a, e, None])
        for ev in t.events:
            label = ev.kind if ev.partner is None else f"{ev.kind}:partner={ev.partner}"
            rows.append(extra + [fam, t.level_index, ev.alpha, None, label])
    return rows


def cmd_sweep(args) -> int:
    family = FamilySelector(args.family)
    tracks = continuation_sweep(
        family,
        args.beta,
        args.family,
        args.alpha_to,
        args.alpha_step,
        args.levels,
        x_max=args.x_max if args.x_max is not None else 9.0,
        n=args.n,
        e_min=args.e_min,
        e_max=args.e_max,
        scan_step=args.scan_step,
    )
    _write_csv(
        args.output,
        _echo(args, ["beta", "family", "alpha_to", "alpha_step", "levels", "n",
                     "x_max", "e_min", "e_max", "scan_step"]),
        ["family", "level_index", "alpha", "E", "event"],
        _sweep_rows(tracks, []),
    )
    if args.plot_script:
        _emit_plot_script(args.plot_script, args.output, "sweep")
    return EXIT_OK


def cmd_contour(args) -> int:
    family = FamilySelector(args.family)
    n_steps = int(round((args.alpha_to - args.alpha_from) / args.alpha_step))
    rows = []
    for k in range(n_steps + 1):
        a = args.alpha_from + k * args.alpha_step
        if a <= 0 and args.beta <= 0:
            continue
        spec = optimal_shift(PotentialParams(a, args.beta), family)
        rows.append([a, spec.y, spec.y_plus, spec.y_minus])
    _write_csv(
        args.output,
        _echo(args, ["beta", "family", "alpha_from", "alpha_to", "alpha_step"]),
        ["alpha", "y_opt", "y_plus", "y_minus"],
        rows,
    )
    if args.plot_script:
        _emit_plot_script(args.plot_script, args.output, "contour")
    return EXIT_OK


def cmd_veff(args) -> int:
    params, y = _resolve_shift(args)
    xs = np.linspace(-args.x_max, args.x_max, args.samples)
    values = eval_potential_line(params, xs, y)
    rows = [[float(x), float(v.real), float(v.imag)] for x, v in zip(xs, values)]
    _write_csv(
        args.output,
        _echo(args, ["alpha", "beta", "family", "x_max", "samples"]) | {"y": y},
        ["x", "re_v_eff", "im_v_eff"],
        rows,
    )
    if args.plot_script:
        _emit_plot_script(args.plot_script, args.output, "veff")
    return EXIT_OK


def _rpm_rows(args, extra: list) -> list[list]:
    params = PotentialParams(args.alpha, args.beta)
    transform = transform_u if args.transform == "u" else transform_iq
    problem = transform(
        params,
        precision=args.precision,
        hankel_dim=args.d_max,
        shift_d=args.shift_d,
    )
    table = convergence_table(problem, args.d_min, args.d_max, args.seed_e, args.seed_f0)
    rows = []
    for d, res in table:
        if res is None:
            rows.append(extra + [d, None, None, None])
        else:
            rows.append(extra + [d, res.energy, res.f0, res.converged_digits])
    return rows


def cmd_rpm(args) -> int:
    if args.transform == "iq" and round(args.alpha) % 2 == 1 and args.seed_f0 is None:
        raise ValueError("odd alpha under the iq transform needs --seed-f0")
    rows = _rpm_rows(args, [])
    _write_csv(
        args.output,
        _echo(args, ["alpha", "beta", "transform", "precision", "d_min", "d_max",
                     "shift_d", "seed_e", "seed_f0"]),
        ["D", "E", "f0", "converged_digits"],
        rows,
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# reproduction presets


def _preset_fig1(args) -> int:
    """Ground-state energy from real-axis integration, over a range of alpha."""
    rows = []
    for k in range(71):
        a = round(1.0 + 0.1 * k, 10)
        op = build_hamiltonian(PotentialParams(a, 0.0), GridSpec(9.0, 1200, 0.0))
        roots = find_real_eigenvalues(op, 0.0, 12.0, 0.05)
        if roots:
            rows.append([a, roots[0]])
    _write_csv(args.output, {"preset": "fig1", "y": 0.0}, ["alpha", "E"], rows)
    if args.plot_script:
        _emit_plot_script(args.plot_script, args.output, "points")
    return EXIT_OK


def _preset_fig2(args) -> int:
    family = FamilySelector(2.0)
    rows = []
    for k in range(121):
        a = round(0.1 * (k + 1), 10)
        spec = optimal_shift(PotentialParams(a, 0.0), family)
        rows.append([a, spec.y, spec.y_plus, spec.y_minus])
    _write_csv(args.output, {"preset": "fig2", "beta": 0.0, "family": 2.0},
               ["alpha", "y_opt", "y_plus", "y_minus"], rows)
    if args.plot_script:
        _emit_plot_script(args.plot_script, args.output, "contour")
    return EXIT_OK


def _preset_fig3(args) -> int:
    rows = []
    for alpha_r, lo, hi in [(2.0, 1.0, 8.0), (6.0, 1.0, 8.0)]:
        family = FamilySelector(alpha_r)
        for target in (lo, hi):
            tracks = continuation_sweep(family, 0.0, alpha_r, target, 0.05, 4)
            rows.extend(_sweep_rows(tracks, []))
    _write_csv(args.output, {"preset": "fig3", "beta": 0.0},
               ["family", "level_index", "alpha", "E", "event"], rows)
    if args.plot_script:
        _emit_plot_script(args.plot_script, args.output, "sweep")
    return EXIT_OK


def _preset_fig4(args) -> int:
    tracks = continuation_sweep(FamilySelector(2.0), 0.0, 2.0, 0.95, 0.01, 6)
    _write_csv(args.output, {"preset": "fig4", "beta": 0.0},
               ["family", "level_index", "alpha", "E", "event"],
               _sweep_rows(tracks, []))
    if args.plot_script:
        _emit_plot_script(args.plot_script, args.output, "sweep")
    return EXIT_OK


def _preset_fig5(args) -> int:
    family = FamilySelector(2.0)
    rows = []
    xs = np.linspace(-3.0, 3.0, 601)
    for a in (2.0, 3.0, 4.0):
        params = PotentialParams(a, 0.0)
        y = optimal_shift(params, family).y
        for x, v in zip(xs, eval_potential_line(params, xs, y)):
            rows.append([a, float(x), float(v.real), float(v.imag)])
    _write_csv(args.output, {"preset": "fig5", "beta": 0.0, "family": 2.0},
               ["alpha", "x", "re_v_eff", "im_v_eff"], rows)
    if args.plot_script:
        _emit_plot_script(args.plot_script, args.output, "veff")
    return EXIT_OK


def _preset_fig6(args) -> int:
    rows = []
    for beta in (0.5, 0.25, 0.0, -0.25):
        tracks = continuation_sweep(FamilySelector(2.0), beta, 2.0, 0.97, 0.015, 6)
        rows.extend(_sweep_rows(tracks, [beta]))
    _write_csv(args.output, {"preset": "fig6"},
               ["beta", "family", "level_index", "alpha", "E", "event"], rows)
    if args.plot_script:
        _emit_plot_script(args.plot_script, args.output, "sweep")
    return EXIT_OK


def _run_rpm_block(alpha, transform, d_min, d_max, shift_d, seed_e, seed_f0):
    ns = argparse.Namespace(
        alpha=alpha, beta=0.0, transform=transform, precision=80,
        d_min=d_min, d_max=d_max, shift_d=shift_d, seed_e=seed_e, seed_f0=seed_f0,
    )
    return _rpm_rows(ns, [alpha])


def _preset_table2(args) -> int:
    rows = _run_rpm_block(2.0, "iq", 2, 8, 1, 1.2, None)
    _write_csv(args.output, {"preset": "table2", "transform": "iq", "shift_d": 1},
               ["alpha", "D", "E", "f0", "converged_digits"], rows)
    return EXIT_OK


def _preset_table3(args) -> int:
    rows = _run_rpm_block(1.0, "iq", 2, 6, 0, 1.76, 1.0)
    rows += _run_rpm_block(3.0, "iq", 2, 6, 0, 1.35, -0.48)
    _write_csv(args.output, {"preset": "table3", "transform": "iq", "shift_d": 0},
               ["alpha", "D", "E", "f0", "converged_digits"], rows)
    return EXIT_OK


def _preset_table4(args) -> int:
    rows = _run_rpm_block(1.0, "u", 2, 8, 1, 1.76, None)
    rows += _run_rpm_block(3.0, "u", 2, 8, 1, 2.6, None)
    _write_csv(args.output, {"preset": "table4", "transform": "u", "shift_d": 1},
               ["alpha", "D", "E", "f0", "converged_digits"], rows)
    return EXIT_OK


_PRESETS = {
    "fig1": _preset_fig1,
    "fig2": _preset_fig2,
    "fig3": _preset_fig3,
    "fig4": _preset_fig4,
    "fig5": _preset_fig5,
    "fig6": _preset_fig6,
    "table2": _preset_table2,
    "table3": _preset_table3,
    "table4": _preset_table4,
}


def cmd_table(args) -> int:
    if args.output == "-" and args.default_output:
        args.output = f"{args.preset}.csv"
    return _PRESETS[args.preset](args)


# ---------------------------------------------------------------------------
# argument parsing


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key=value file preloading this command's flags")
    p.add_argument("--output", "-o", default="-", help="CSV path ('-' = stdout)")


def _add_potential(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, default=0.0)
    p.add_argument("--family", type=float, default=2.0,
                   help="family reference alpha_R (2, 6, 10, ...)")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ptsinh",
        description="Real eigenvalues of -(i sinh x)^a cosh^b x on shifted contours",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="real eigenvalues at fixed (alpha, beta)")
    _add_potential(p)
    p.add_argument("--y", type=float, help="contour shift override (default: optimal)")
    p.add_argument("--x-max", type=float)
    p.add_argument("--n", type=int, default=2000)
    p.add_argument("--e-min", type=float, default=0.0)
    p.add_argument("--e-max", type=float, default=20.0)
    p.add_argument("--scan-step", type=float, default=0.05)
    _add_common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sweep", help="continuation in alpha with event tracking")
    p.add_argument("--beta", type=float, default=0.0)
    p.add_argument("--family", type=float, default=2.0)
    p.add_argument("--alpha-to", type=float, required=True)
    p.add_argument("--alpha-step", type=float, default=0.02)
    p.add_argument("--levels", type=int, default=4)
    p.add_argument("--x-max", type=float)
    p.add_argument("--n", type=int, default=1200)
    p.add_argument("--e-min", type=float, default=0.0)
    p.add_argument("--e-max", type=float)
    p.add_argument("--scan-step", type=float, default=0.05)
    p.add_argument("--plot-script", help="also write a matplotlib script reading the CSV")
    _add_common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("contour", help="optimal shift and admissible window vs alpha")
    p.add_argument("--beta", type=float, default=0.0)
    p.add_argument("--family", type=float, default=2.0)
    p.add_argument("--alpha-from", type=float, default=0.1)
    p.add_argument("--alpha-to", type=float, default=12.0)
    p.add_argument("--alpha-step", type=float, default=0.1)
    p.add_argument("--plot-script")
    _add_common(p)
    p.set_defaults(func=cmd_contour)

    p = sub.add_parser("veff", help="effective potential V(x + iy) along the contour")
    _add_potential(p)
    p.add_argument("--y", type=float)
    p.add_argument("--x-max", type=float, default=3.0)
    p.add_argument("--samples", type=int, default=601)
    p.add_argument("--plot-script")
    _add_common(p)
    p.set_defaults(func=cmd_veff)

    p = sub.add_parser("rpm", help="Riccati-Pade convergence table")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, default=0.0)
    p.add_argument("--transform", choices=["iq", "u"], default="iq")
    p.add_argument("--precision", type=int, default=80)
    p.add_argument("--d-min", type=int, default=2)
    p.add_argument("--d-max", type=int, default=8)
    p.add_argument("--shift-d", type=int, default=0)
    p.add_argument("--seed-e", type=float, required=True)
    p.add_argument("--seed-f0", type=float)
    _add_common(p)
    p.set_defaults(func=cmd_rpm)

    p = sub.add_parser("table", help="named reproduction presets")
    p.add_argument("preset", choices=sorted(_PRESETS))
    p.add_argument("--plot-script")
    p.add_argument("--default-output", action="store_true",
                   help="write to <preset>.csv instead of stdout")
    _add_common(p)
    p.set_defaults(func=cmd_table)

    return parser


def _inject_config(argv: list[str]) -> list[str]:
    """Insert config-file flags right after the subcommand so CLI flags win."""
    if "--config" not in argv:
        return argv
    idx = argv.index("--config")
    if idx + 1 >= len(argv):
        raise ValueError("--config needs a file path")
    fragment = _load_config(argv[idx + 1])
    return argv[:1] + fragment + argv[1:]


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        if argv and not argv[0].startswith("-"):
            argv = _inject_config(argv)
        args = _build_parser().parse_args(argv)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except _CONFIG_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except _CONFIG_ERRORS as exc:
        if isinstance(exc, _NUMERICAL_ERRORS):
            print(f"numerical failure: {exc}", file=sys.stderr)
            return EXIT_NUMERICAL
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except _NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
