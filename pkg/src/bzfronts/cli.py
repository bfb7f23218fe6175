"""Command-line interface.

Subcommands: kappa, classify, profile, simulate, sweep, verify,
scalar-bench.  Option precedence is flags > config file (key=value lines)
> presets; numeric output uses 6 significant digits unless --digits says
otherwise.  Exit codes: 0 success, 1 usage or domain errors, 2 numerical
failures.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from .errors import BzfrontsError, DomainError, NumericalError
from .gridfn import Grid
from . import kernels, pde_sim, profile_solver, spectral, speed as speed_mod, verify as verify_mod

__all__ = ["main", "emit_csv", "emit_svg"]


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _fmt(value, digits: int) -> str:
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return format(value, f".{digits}g")
    return str(value)


def emit_csv(rows, header, path, digits: int = 6) -> None:
    """Write rows as UTF-8 CSV with LF endings and '.' decimal separator."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v, digits) for v in row) + "\n")


def emit_svg(series, path, xlabel: str = "", ylabel: str = "", title: str = "") -> None:
    """Standalone SVG line chart: series is a list of (label, xs, ys)."""
    series = [(lab, list(xs), list(ys)) for lab, xs, ys in series]
    points = [(x, y) for _, xs, ys in series for x, y in zip(xs, ys)
              if not (math.isnan(x) or math.isnan(y))]
    if not points:
        raise DomainError("refusing to plot an empty data set")
    xs_all = [p[0] for p in points]
    ys_all = [p[1] for p in points]
    x0, x1 = min(xs_all), max(xs_all)
    y0, y1 = min(ys_all), max(ys_all)
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0
    W, H, L, Bm, R, T = 640.0, 420.0, 70.0, 50.0, 20.0, 30.0
    pw, ph = W - L - R, H - T - Bm

    def px(x):
        return L + (x - x0) / (x1 - x0) * pw

    def py(y):
        return T + (1.0 - (y - y0) / (y1 - y0)) * ph

    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W:.0f}" height="{H:.0f}" '
           f'viewBox="0 0 {W:.0f} {H:.0f}">',
           f'<rect width="{W:.0f}" height="{H:.0f}" fill="white"/>',
           f'<text x="{W/2:.1f}" y="18" text-anchor="middle" font-size="14">{title}</text>']
    # axes
    out.append(f'<line x1="{L:.1f}" y1="{T:.1f}" x2="{L:.1f}" y2="{H-Bm:.1f}" stroke="black"/>')
    out.append(f'<line x1="{L:.1f}" y1="{H-Bm:.1f}" x2="{W-R:.1f}" y2="{H-Bm:.1f}" stroke="black"/>')
    for k in range(5):
        xv = x0 + k * (x1 - x0) / 4
        yv = y0 + k * (y1 - y0) / 4
        out.append(f'<text x="{px(xv):.1f}" y="{H-Bm+18:.1f}" text-anchor="middle" '
                   f'font-size="11">{xv:.4g}</text>')
        out.append(f'<text x="{L-8:.1f}" y="{py(yv)+4:.1f}" text-anchor="end" '
                   f'font-size="11">{yv:.4g}</text>')
        out.append(f'<line x1="{L-4:.1f}" y1="{py(yv):.1f}" x2="{L:.1f}" y2="{py(yv):.1f}" stroke="black"/>')
        out.append(f'<line x1="{px(xv):.1f}" y1="{H-Bm:.1f}" x2="{px(xv):.1f}" y2="{H-Bm+4:.1f}" stroke="black"/>')
    out.append(f'<text x="{W/2:.1f}" y="{H-12:.1f}" text-anchor="middle" font-size="12">{xlabel}</text>')
    out.append(f'<text x="16" y="{H/2:.1f}" text-anchor="middle" font-size="12" '
               f'transform="rotate(-90 16 {H/2:.1f})">{ylabel}</text>')
    for i, (label, xs, ys) in enumerate(series):
        pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(xs, ys)
                       if not (math.isnan(x) or math.isnan(y)))
        color = colors[i % len(colors)]
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        if label:
            out.append(f'<text x="{W-R-4:.1f}" y="{T+16+14*i:.1f}" text-anchor="end" '
                       f'font-size="11" fill="{color}">{label}</text>')
    out.append("</svg>")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(out) + "\n")


# ---------------------------------------------------------------------------
# option plumbing

def _load_config(path: str | None) -> dict[str, str]:
    if path is None:
        return {}
    values: dict[str, str] = {}
    try:
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise DomainError(f"{path}: bad config line {line!r}")
                key, _, val = line.partition("=")
                values[key.strip().replace("-", "_")] = val.strip()
    except OSError as exc:
        raise DomainError(f"cannot read config file: {exc}") from exc
    return values


class _Options:
    """flags > config file > preset/hard defaults."""

    def __init__(self, ns: argparse.Namespace, config: dict[str, str]):
        self.ns = ns
        self.config = config

    def get(self, name: str, default=None, cast=float):
        flag = getattr(self.ns, name, None)
        if flag is not None:
            return flag
        if name in self.config:
            raw = self.config[name]
            return raw if cast is str else cast(raw)
        return default

    def require(self, name: str, cast=float):
        val = self.get(name, None, cast)
        if val is None:
            raise DomainError(f"missing required option --{name.replace('_', '-')}")
        return val


def _parse_grid(text: str) -> Grid:
    try:
        tmin, tmax, dt = (float(p) for p in text.split(","))
    except ValueError:
        raise DomainError(f"bad grid spec {text!r}; expected tmin,tmax,dt") from None
    return Grid.from_bounds(tmin, tmax, dt)


def _float_list(text: str) -> list[float]:
    try:
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise DomainError(f"bad numeric list {text!r}") from None


def _sim_config(opt: _Options, default_preset: str | None = None) -> pde_sim.SimConfig:
    preset = opt.get("preset", default_preset, str)
    base = dict(pde_sim.PRESETS[preset]) if preset else dict(pde_sim.PRESETS["desk"])
    if preset is not None and preset not in pde_sim.PRESETS:
        raise DomainError(f"unknown preset {preset!r}")
    return pde_sim.SimConfig(
        r=opt.require("r"),
        b=opt.require("b"),
        tau=opt.get("tau", 1.0),
        x_min=opt.get("x_min", base["x_min"]),
        x_max=opt.get("x_max", base["x_max"]),
        dx=opt.get("dx", base["dx"]),
        dt=opt.get("dt", base["dt"]),
        t_end=opt.get("t_end", base["t_end"]),
        snapshot_stride=int(opt.get("stride", 100, int)),
    )


# ---------------------------------------------------------------------------
# subcommand handlers

def _cmd_kappa(opt: _Options, digits: int) -> int:
    kernel = kernels.parse_kernel_spec(opt.require("kernel", str))
    r = opt.require("r")
    c = opt.require("c")
    j = int(opt.get("j", 1, int))
    if opt.get("quadrature", False, bool):
        val = kernels.kappa_moment_quadrature(kernel, r, c, j)
    else:
        val = kernels.kappa_moment(kernel, r, c, j)
    print(_fmt(val, digits))
    return 0


def _cmd_classify(opt: _Options, digits: int) -> int:
    spec_text = opt.require("kernel", str)
    kernel = kernels.parse_kernel_spec(spec_text)
    params = spectral.Params(opt.require("r"), opt.require("b"))
    cls = spectral.classify(params, kernel)
    row = [params.r, params.b, spec_text, cls.kappa, cls.criterion_value,
           cls.verdict.value]
    out = opt.get("out", None, str)
    header = ["r", "b", "kernel", "kappa", "criterion", "verdict"]
    if out:
        emit_csv([row], header, out, digits)
    print(",".join(_fmt(v, digits) for v in row))
    return 0


def _cmd_profile(opt: _Options, digits: int) -> int:
    kernel = kernels.parse_kernel_spec(opt.require("kernel", str))
    params = spectral.Params(opt.require("r"), opt.require("b"))
    c = opt.require("c")
    grid_text = opt.get("grid", None, str)
    grid = _parse_grid(grid_text) if grid_text else None
    prof = profile_solver.monotone_iterate(
        params, c, kernel, grid,
        tol=opt.get("tol", 1e-10),
        max_iter=int(opt.get("max_iter", 500, int)))
    out = opt.get("out", "profile.csv", str)
    t = prof.grid.nodes
    emit_csv(zip(t, prof.phi.values, prof.psi.values), ["t", "phi", "psi"],
             out, max(digits, 12))
    sidecar = os.path.splitext(out)[0] + ".json"
    meta = {
        "r": params.r, "b": params.b, "c": c,
        "kernel": opt.get("kernel", None, str),
        "iterations": prof.iterations,
        "newton_steps": prof.newton_steps,
        "residual": prof.residual,
        "flux_identity_error": prof.flux_error,
        "converged": prof.converged,
    }
    with open(sidecar, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"profile written to {out} (residual {_fmt(prof.residual, digits)}, "
          f"{prof.iterations} sweeps + {prof.newton_steps} polish steps)")
    return 0


def _cmd_simulate(opt: _Options, digits: int) -> int:
    config = _sim_config(opt)
    prefix = opt.get("out_prefix", "sim", str)
    snapshots, track = pde_sim.run(config)
    file_stride = int(opt.get("file_stride", 1, int))
    rows = []
    for snap in snapshots[::file_stride]:
        for i in range(len(snap.x)):
            rows.append((snap.t, snap.x[i], snap.u[i], snap.v[i], snap.w[i]))
    emit_csv(rows, ["t", "x", "u", "v", "w"], f"{prefix}_snapshots.csv", digits)
    est = speed_mod.estimate_speed(track)
    t, x = track.times, track.positions
    inst = np.full(len(t), math.nan)
    inst[1:-1] = (x[2:] - x[:-2]) / (t[2:] - t[:-2])
    emit_csv(zip(t, x, inst), ["t", "x_front", "speed_inst"],
             f"{prefix}_front.csv", digits)
    print(f"c_est = {_fmt(est.c_est, digits)} (settled digits: {est.settled_digits})")
    return 0


def _cmd_sweep(opt: _Options, digits: int) -> int:
    config = _sim_config(opt, default_preset="desk")
    b_values = _float_list(opt.require("b_list", str))
    tau_values = _float_list(opt.get("tau_list", "1", str))
    jobs = int(opt.get("jobs", os.environ.get("BZFRONTS_JOBS", "1"), int))
    rows = speed_mod.sweep(config, b_values, tau_values, parallel=jobs)
    header = ["r", "b", "tau", "c_est", "settled_digits", "verdict"]
    table = [(r.r, r.b, r.tau, r.c_est, r.settled_digits, r.verdict) for r in rows]
    out = opt.get("out", "sweep.csv", str)
    emit_csv(table, header, out, digits)
    svg = opt.get("svg", None, str)
    if svg:
        series = []
        for tau in tau_values:
            pts = [(r.b, r.c_est) for r in rows if r.tau == tau and not math.isnan(r.c_est)]
            series.append((f"tau={tau:g}", [p[0] for p in pts], [p[1] for p in pts]))
        emit_svg(series, svg, xlabel="b", ylabel="c_est",
                 title=f"front speed vs b (r={config.r:g})")
    print(f"{len(rows)} sweep rows written to {out}")
    return 0


def _cmd_verify(opt: _Options, digits: int) -> int:
    from .gridfn import GridFunction
    path = opt.require("profile", str)
    kernel = kernels.parse_kernel_spec(opt.require("kernel", str))
    params = spectral.Params(opt.require("r"), opt.require("b"))
    c = opt.require("c")
    data = np.genfromtxt(path, delimiter=",", names=True)
    t, phi, psi = data["t"], data["phi"], data["psi"]
    dt = float(t[1] - t[0])
    grid = Grid(float(t[0]), dt, len(t))
    phi_f = GridFunction(grid, phi, 0.0, float(phi[-1]))
    psi_f = GridFunction(grid, psi, 0.0, float(psi[-1]))
    conv = kernels.convolve_grid(kernel, psi_f, c)
    residual = profile_solver.fd_residual(phi, psi, params, c, grid, conv)
    flux = profile_solver.flux_identity_error(phi, psi, params, c, grid)
    prof = profile_solver.WaveProfile(phi_f, psi_f, c, params, kernel, 0,
                                      residual, flux, True)
    report = verify_mod.run_all(prof)
    print(report.render())
    return 0 if report.overall else 2


def _cmd_scalar_bench(opt: _Options, digits: int) -> int:
    r = opt.require("r")
    l = opt.require("l")
    config = pde_sim.SimConfig(
        r=r, b=1.0, tau=1.0,
        x_min=opt.get("x_min", -420.0),
        x_max=opt.get("x_max", 50.0),
        dx=opt.get("dx", 0.05),
        dt=opt.get("dt", 0.01),
        t_end=opt.get("t_end", 150.0),
        snapshot_stride=int(opt.get("stride", 100, int)),
    )
    track = pde_sim.scalar_run(r, l, config)
    est = speed_mod.estimate_speed(track)
    ref = spectral.pushed_scalar_speed(r, l)
    print(f"c_est = {_fmt(est.c_est, digits)}  c_star = {_fmt(ref, digits)}  "
          f"delta = {_fmt(est.c_est - ref, digits)}")
    return 0


# ---------------------------------------------------------------------------

def _build_parser() -> _Parser:
    p = _Parser(prog="bzfronts",
                description="Traveling wavefronts of the nonlocal "
                            "Belousov-Zhabotinsky system: kernel moments, "
                            "pulled/pushed classification, profile computation, "
                            "direct simulation, and speed measurement.")
    p.add_argument("--config", help="key=value option file (flags take precedence)")
    p.add_argument("--digits", type=int, default=6, help="significant digits for output")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, help_text, opts):
        sp = sub.add_parser(name, help=help_text)
        for args, kw in opts:
            sp.add_argument(*args, **kw)
        return sp

    fl = dict(type=float)
    add("kappa", "exponential kernel moment kappa_j(r, c)", [
        (("--kernel",), dict(help="kernel spec: point | delay:h=V | weak:tau=V | strong:tau=V | shift:a=V:INNER | table:PATH")),
        (("--r",), fl), (("--c",), fl),
        (("--j",), dict(type=int, help="moment index (default 1)")),
        (("--quadrature",), dict(action="store_true", default=None,
                                 help="force the 2D quadrature route")),
    ])
    add("classify", "pulled/pushed criterion at the reference speed", [
        (("--r",), fl), (("--b",), fl), (("--kernel",), {}),
        (("--out",), dict(help="also write the row to this CSV")),
    ])
    add("profile", "front profile by monotone iteration", [
        (("--r",), fl), (("--b",), fl), (("--c",), fl), (("--kernel",), {}),
        (("--grid",), dict(help="tmin,tmax,dt (default -100,100,0.01)")),
        (("--tol",), fl), (("--max-iter",), dict(type=int, dest="max_iter")),
        (("--out",), dict(help="output CSV (default profile.csv; JSON sidecar beside it)")),
    ])
    add("simulate", "time-step the three-field weak-kernel system", [
        (("--r",), fl), (("--b",), fl), (("--tau",), fl),
        (("--preset",), dict(choices=sorted(pde_sim.PRESETS))),
        (("--t-end",), dict(type=float, dest="t_end")),
        (("--x-min",), dict(type=float, dest="x_min")),
        (("--x-max",), dict(type=float, dest="x_max")),
        (("--dx",), fl), (("--dt",), fl),
        (("--stride",), dict(type=int)),
        (("--file-stride",), dict(type=int, dest="file_stride",
                                  help="thin snapshots in the output file")),
        (("--out-prefix",), dict(dest="out_prefix")),
    ])
    add("sweep", "speed sweep over b and tau", [
        (("--r",), fl),
        (("--b",), dict(dest="b_list", help="comma-separated b values")),
        (("--tau",), dict(dest="tau_list", help="comma-separated tau values (default 1)")),
        (("--preset",), dict(choices=sorted(pde_sim.PRESETS))),
        (("--t-end",), dict(type=float, dest="t_end")),
        (("--x-min",), dict(type=float, dest="x_min")),
        (("--x-max",), dict(type=float, dest="x_max")),
        (("--dx",), fl), (("--dt",), fl), (("--stride",), dict(type=int)),
        (("--jobs",), dict(type=int, help="parallel sweep cells (env BZFRONTS_JOBS)")),
        (("--out",), {}), (("--svg",), dict(help="also draw a speed-vs-b chart")),
    ])
    add("verify", "run the lemma checks on a stored profile", [
        (("--profile",), {}), (("--r",), fl), (("--b",), fl), (("--c",), fl),
        (("--kernel",), {}),
    ])
    add("scalar-bench", "scalar pushed/pulled speed benchmark", [
        (("--r",), fl), (("--l",), fl),
        (("--x-min",), dict(type=float, dest="x_min")),
        (("--x-max",), dict(type=float, dest="x_max")),
        (("--dx",), fl), (("--dt",), fl),
        (("--t-end",), dict(type=float, dest="t_end")),
        (("--stride",), dict(type=int)),
    ])
    return p


_HANDLERS = {
    "kappa": _cmd_kappa,
    "classify": _cmd_classify,
    "profile": _cmd_profile,
    "simulate": _cmd_simulate,
    "sweep": _cmd_sweep,
    "verify": _cmd_verify,
    "scalar-bench": _cmd_scalar_bench,
}


def main(argv=None) -> int:
    # sweep requires the sim config's own b; sweep's --b maps to b_list and
    # the base config takes the first value as placeholder
    parser = _build_parser()
    ns = parser.parse_args(argv)
    try:
        config = _load_config(ns.config)
        opt = _Options(ns, config)
        if ns.command == "sweep" and opt.get("b", None) is None:
            blist = opt.get("b_list", None, str)
            if blist:
                ns.b = _float_list(blist)[0]
        digits = int(opt.get("digits", 6, int))
        return _HANDLERS[ns.command](opt, digits)
    except DomainError as exc:
        print(f"bzfronts: error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"bzfronts: numerical failure: {exc}", file=sys.stderr)
        return 2
    except BzfrontsError as exc:  # pragma: no cover
        print(f"bzfronts: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
