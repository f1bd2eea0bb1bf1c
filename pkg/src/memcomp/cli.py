"""Command-line front end.

Exit codes: 0 success, 2 invalid configuration or arguments,
3 numerical failure, 4 expectation failures in `reproduce`.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

from . import hopf as hp
from .dynamics import SimConfig, simulate
from .eigen import ResourceProfile, principal_eigen, richardson
from .errors import ConfigError, MemcompError
from .experiments import (
    analyze,
    builtin_suite,
    find_positive_steady,
    run_suite,
    sweep_regions,
    write_csv,
    write_eigen_csv,
    write_regions_csv,
    write_snapshots_csv,
    write_timeseries_csv,
)
from .grid import Grid
from .model import PRESETS, ModelParams

_CONFIG_FIELDS: dict[str, type] = {
    "preset": str,
    "d1": float,
    "d2": float,
    "lambda1": float,
    "lambda2": float,
    "a11": float,
    "a12": float,
    "a21": float,
    "a22": float,
    "omega": float,
    "r1": str,
    "r2": str,
    "n": int,
    "n_analysis": int,
    "dt": float,
    "t_end": float,
    "eps": float,
    "perturbation": str,
    "series_interval": float,
    "snapshot_interval": float,
    "transient_fraction": float,
    "tol_conv": float,
    "tol_osc": float,
    "tol_extinct": float,
    "output_dir": str,
}


@dataclass(frozen=True)
class RunConfig:
    """Flat run configuration; defaults match the reference setup."""

    preset: str = "Q1"
    d1: float = 1.0
    d2: float = -1.0
    lambda1: float = 2.0
    lambda2: float = 2.0
    a11: float = 0.5
    a12: float = 0.5
    a21: float = 1.0
    a22: float = 1.5
    omega: float = math.pi / 4
    r1: str = "cos1"
    r2: str = "sin1"
    n: int = 128
    n_analysis: int = 1000
    dt: float = 2e-3
    t_end: float = 400.0
    eps: float = 0.01
    perturbation: str = "sin2x"
    series_interval: float = 0.25
    snapshot_interval: float = 5.0
    transient_fraction: float = 0.5
    tol_conv: float = 1e-2
    tol_osc: float = 1e-2
    tol_extinct: float = 1e-8
    output_dir: str = "memcomp-out"

    @classmethod
    def from_json(cls, path: str | Path) -> "RunConfig":
        try:
            raw = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(raw)

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config document must be a JSON object")
        unknown = set(raw) - set(_CONFIG_FIELDS)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        coerced = {}
        for key, value in raw.items():
            want = _CONFIG_FIELDS[key]
            if want is float and isinstance(value, (int, float)) and not isinstance(value, bool):
                coerced[key] = float(value)
            elif want is int and isinstance(value, int) and not isinstance(value, bool):
                coerced[key] = value
            elif want is str and isinstance(value, str):
                coerced[key] = value
            else:
                raise ConfigError(
                    f"config key {key!r} must be {want.__name__}, got {value!r}"
                )
        cfg = cls(**coerced)
        cfg.validate()
        return cfg

    def validate(self):
        if self.preset not in PRESETS and self.preset != "custom":
            raise ConfigError(f"unknown preset {self.preset!r}")
        if self.n < 2 or self.n_analysis < 2:
            raise ConfigError("grid sizes must be at least 2")
        for key in ("a11", "a12", "a21", "a22", "lambda1", "lambda2"):
            if getattr(self, key) <= 0:
                raise ConfigError(f"{key} must be positive")
        if not 0 < self.omega < math.pi / 2:
            raise ConfigError("omega must lie in (0, pi/2)")
        if not 0 < self.transient_fraction < 1:
            raise ConfigError("transient_fraction must lie in (0, 1)")

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    def model_params(self, grid: Grid) -> ModelParams:
        if self.preset in PRESETS:
            params = PRESETS[self.preset](grid, self.d1, self.d2)
            return params
        return ModelParams(
            d1=self.d1,
            d2=self.d2,
            lambda1=self.lambda1,
            lambda2=self.lambda2,
            a11=self.a11,
            a12=self.a12,
            a21=self.a21,
            a22=self.a22,
            omega=self.omega,
            r1=ResourceProfile.builtin(self.r1, grid),
            r2=ResourceProfile.builtin(self.r2, grid),
        )

    def sim_config(self) -> SimConfig:
        return SimConfig(
            n=self.n,
            dt=self.dt,
            t_end=self.t_end,
            eps=self.eps,
            perturbation=self.perturbation,
            series_interval=self.series_interval,
            snapshot_interval=self.snapshot_interval,
            transient_fraction=self.transient_fraction,
            tol_conv=self.tol_conv,
            tol_osc=self.tol_osc,
            tol_extinct=self.tol_extinct,
        )


def _apply_overrides(cfg: RunConfig, args: argparse.Namespace) -> RunConfig:
    updates = {}
    for f in fields(RunConfig):
        value = getattr(args, f.name, None)
        if value is not None:
            updates[f.name] = value
    if updates:
        cfg = replace(cfg, **updates)
    cfg.validate()
    return cfg


def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument("--config", help="JSON configuration file")
    parser.add_argument("--dump-config", action="store_true", help="print the effective config and exit")
    parser.add_argument("--preset", choices=["Q1", "Q2", "custom"])
    parser.add_argument("--d1", type=float)
    parser.add_argument("--d2", type=float)
    parser.add_argument("--n", type=int, dest="n")
    parser.add_argument("--n-analysis", type=int, dest="n_analysis")
    parser.add_argument("--output-dir", dest="output_dir")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="memcomp",
        description=(
            "Stability and Hopf-bifurcation analysis of a two-species "
            "competition model with memory-based diffusion on an interval"
        ),
    )
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("eigen", help="principal eigenvalue and eigenfunction")
    _add_common(p)
    p.add_argument("--profile", default="cos1", choices=["cos1", "sin1", "one"])
    p.add_argument("--out", help="eigenfunction CSV path")
    p.add_argument("--emit-resource", help="also write the resource profile CSV here")

    p = sub.add_parser("coeffs", help="interaction integrals and expansion slopes")
    _add_common(p)

    p = sub.add_parser("regions", help="classify a point in the (d1, d2) plane")
    _add_common(p)

    p = sub.add_parser("steady", help="construct and refine the coexistence state")
    _add_common(p)
    p.add_argument("--out", help="CSV path for the state fields")

    p = sub.add_parser("tau", help="crossing data and critical delays")
    _add_common(p)
    p.add_argument("--n-max", type=int, default=4)

    p = sub.add_parser("simulate", help="integrate the delayed system once")
    _add_common(p)
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--t-end", type=float, dest="t_end")
    p.add_argument("--eps", type=float, dest="eps")

    p = sub.add_parser("reproduce", help="run the built-in experiment suite")
    _add_common(p)
    p.add_argument("--workers", type=int, default=3)

    p = sub.add_parser("sweep", help="region map over a (d1, d2) rectangle")
    _add_common(p)
    p.add_argument("--d1-min", type=float, default=-2.0)
    p.add_argument("--d1-max", type=float, default=2.0)
    p.add_argument("--d2-min", type=float, default=-2.0)
    p.add_argument("--d2-max", type=float, default=2.0)
    p.add_argument("--resolution", type=int, default=41)

    return parser


def _load_config(args) -> RunConfig:
    cfg = RunConfig.from_json(args.config) if getattr(args, "config", None) else RunConfig()
    return _apply_overrides(cfg, args)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    try:
        cfg = _load_config(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if getattr(args, "dump_config", False):
        print(cfg.to_json())
        return 0
    try:
        return _dispatch(args, cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except MemcompError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


def _dispatch(args, cfg: RunConfig) -> int:
    outdir = Path(cfg.output_dir)
    if args.command == "eigen":
        # for this command --n is a natural alias for the solve resolution
        n_eigen = args.n if getattr(args, "n", None) else cfg.n_analysis
        grid_f = Grid(0.0, math.pi, n_eigen)
        grid_c = Grid(0.0, math.pi, n_eigen // 2)
        prof_f = ResourceProfile.builtin(args.profile, grid_f)
        pair = principal_eigen(prof_f, grid_f)
        lam_c = principal_eigen(
            ResourceProfile.builtin(args.profile, grid_c), grid_c
        ).lambda_star
        lam_ex = richardson(lam_c, grid_c.h, pair.lambda_star, grid_f.h)
        print(f"profile {args.profile}: lambda* = {pair.lambda_star:.6f}")
        print(f"extrapolated           = {lam_ex:.6f}")
        print(f"residual               = {pair.residual:.2e}")
        if args.out:
            write_eigen_csv(Path(args.out), grid_f, pair.phi.values)
        if args.emit_resource:
            write_csv(
                Path(args.emit_resource),
                ["x", "r"],
                zip(grid_f.x, prof_f.samples.values),
            )
        return 0

    if args.command == "coeffs":
        grid = Grid(0.0, math.pi, cfg.n_analysis)
        params = cfg.model_params(grid).with_point(cfg.d1, cfg.d2)
        bundle = analyze(params, n=cfg.n_analysis)
        k = bundle.kappas
        print(f"lambda1* = {bundle.eig1.lambda_star:.6f}  lambda2* = {bundle.eig2.lambda_star:.6f}")
        for i, val in enumerate(
            (k.kappa1, k.kappa2, k.kappa3, k.kappa4, k.kappa5, k.kappa6, k.kappa7, k.kappa8),
            start=1,
        ):
            print(f"kappa{i} = {val:+.6f}")
        K = bundle.Ks
        print(f"K1 = {K.K1:.6f}  K2 = {K.K2:.6f}  K3 = {K.K3:.6f}  K4 = {K.K4:.6f}")
        print(
            f"lambda1'(0) = {bundle.lambda1_prime0:.6f}  "
            f"lambda2'(0) = {bundle.lambda2_prime0:.6f}"
        )
        s2 = "n/a" if bundle.s2 is None else f"{bundle.s2:.6f}"
        print(f"s(lambda1) = {bundle.s1:.6f}  s(lambda2) = {s2}")
        return 0

    if args.command == "regions":
        params_grid = Grid(0.0, math.pi, cfg.n_analysis)
        params = cfg.model_params(params_grid)
        bundle = analyze(params, n=cfg.n_analysis)
        rep = hp.classify_region(cfg.d1, cfg.d2, bundle.kappas, bundle.Ks)
        region = rep.region or "boundary"
        print(f"({cfg.d1}, {cfg.d2}) -> {region}")
        print(
            f"H2={rep.H2} H3={rep.H3} H5={rep.H5} H6={rep.H6} "
            f"d*={'n/a' if rep.d_star is None else f'{rep.d_star:.6f}'}"
        )
        return 0

    if args.command == "steady":
        sim_grid = Grid(0.0, math.pi, cfg.n)
        params = cfg.model_params(sim_grid)
        state = find_positive_steady(params, sim_grid)
        print(
            f"order={state.order} s={state.s:.6f} residual={state.newton_residual} "
            f"positive={state.positive} max_u={state.u.max():.6f} max_v={state.v.max():.6f}"
        )
        if args.out:
            write_csv(
                Path(args.out),
                ["x", "u", "v"],
                zip(sim_grid.x, state.u.values, state.v.values),
            )
        return 0

    if args.command == "tau":
        grid = Grid(0.0, math.pi, cfg.n_analysis)
        params = cfg.model_params(grid)
        bundle = analyze(params, n=cfg.n_analysis)
        rep = hp.classify_region(cfg.d1, cfg.d2, bundle.kappas, bundle.Ks)
        branch = "H3H6" if rep.H3 else "H2H5"
        data = hp.assemble_hopf_data(
            cfg.d1, cfg.d2, bundle.kappas, bundle.Ks, branch, bundle.s1, args.n_max
        )
        print(
            f"branch={branch} p1={data.p1_0:+.6f} p2={data.p2_0:+.6f} "
            f"h0={data.h_0:.6f} theta0={data.theta_0:.6f} d*={data.d_star:+.6f}"
        )
        print(f"characteristic residual = {data.char_residual:.3e}")
        print(f"transversality sign = {data.transversality_sign}")
        print(f"Im(S0(0)) = {data.Sn0_im:.6f}")
        for i, t in enumerate(data.tau):
            print(f"tau_{i} = {t:.4f}")
        return 0

    if args.command == "simulate":
        sim_grid = Grid(0.0, math.pi, cfg.n)
        params = cfg.model_params(sim_grid)
        state = find_positive_steady(params, sim_grid)
        result = simulate(params, args.tau, state, cfg.sim_config())
        print(
            f"tau={args.tau} outcome={result.outcome} amplitude={result.amplitude:.4e} "
            f"period={result.period_estimate} dt={result.dt:.3e} "
            f"negativity={result.negativity_flag}"
        )
        outdir.mkdir(parents=True, exist_ok=True)
        write_timeseries_csv(outdir / "timeseries.csv", result)
        write_snapshots_csv(outdir / "snapshots.csv", result)
        print(f"wrote {outdir / 'timeseries.csv'} and {outdir / 'snapshots.csv'}")
        return 0

    if args.command == "reproduce":
        report = run_suite(builtin_suite(), output_dir=outdir, workers=args.workers)
        for record in report.records:
            for check in record.get("checks", []):
                status = "PASS" if check["passed"] else "FAIL"
                print(f"[{status}] {check['name']}: expected {check['expected']}, got {check['actual']}")
        print(f"{report.passed} passed, {report.failed} failed ({report.wall_time:.1f}s)")
        return 0 if report.ok else 4

    if args.command == "sweep":
        grid = Grid(0.0, math.pi, cfg.n_analysis)
        params = cfg.model_params(grid)
        rows = sweep_regions(
            params,
            (args.d1_min, args.d1_max),
            (args.d2_min, args.d2_max),
            args.resolution,
            n_analysis=min(cfg.n_analysis, 400),
        )
        outdir.mkdir(parents=True, exist_ok=True)
        write_regions_csv(outdir / "regions.csv", rows)
        print(f"wrote {outdir / 'regions.csv'} ({len(rows)} points)")
        return 0

    raise ConfigError(f"unhandled command {args.command!r}")


def entrypoint():  # console-script shim
    raise SystemExit(main())


if __name__ == "__main__":
    entrypoint()
