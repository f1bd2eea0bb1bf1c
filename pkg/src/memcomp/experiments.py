"""Canonical experiment definitions, robust steady-state construction,
suite execution, and artifact emission.

The built-in suite reproduces the reference computations: the two
principal eigenvalues, both region-line tables, the delay-independent
stability points, and the two Hopf pairs with threshold bisection.
Independent runs execute on a thread pool (the step kernel releases the
GIL); results and CSV artifacts are deterministic for a fixed spec.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import hopf as hp
from .dynamics import SimConfig, find_hopf_threshold, simulate
from .eigen import ResourceProfile, principal_eigen, richardson
from .errors import BracketError, ConvergenceError, MemcompError
from .grid import Grid
from .model import ModelParams, preset_q1, preset_q2
from .steady import (
    SteadyState,
    lambda_primes,
    leading_state,
    refine_steady_state,
    s_from_lambda,
)

FLOAT_FMT = "%.17g"


@dataclass(frozen=True)
class ExperimentSpec:
    id: str
    kind: str  # "eigen" | "lines" | "stability" | "hopf"
    preset: str  # "Q1" | "Q2"
    points: tuple = ()  # ((d1, d2), ...)
    taus: tuple = ()
    expected_outcomes: dict = field(default_factory=dict)  # tau -> outcome
    expected_lines: dict = field(default_factory=dict)
    expected_eigenvalues: dict = field(default_factory=dict)
    threshold_bracket: tuple | None = None
    expected_threshold: float | None = None
    n_analysis: int = 1000
    config: SimConfig = field(default_factory=SimConfig)


@dataclass
class SuiteReport:
    records: list
    passed: int
    failed: int
    wall_time: float

    @property
    def ok(self) -> bool:
        return self.failed == 0


def builtin_suite() -> list[ExperimentSpec]:
    """The six canonical experiments."""
    sim = SimConfig()
    return [
        ExperimentSpec(
            id="eigenvalues",
            kind="eigen",
            preset="Q1",
            expected_eigenvalues={"cos1": 0.9291, "sin1": 0.5403},
        ),
        ExperimentSpec(
            id="q1-lines",
            kind="lines",
            preset="Q1",
            expected_lines={
                "l1_slope": -1.0622,
                "l1_intercept": -0.9050,
                "l3_slope": 1.2379,
                "l3_intercept": -0.1827,
                "l5_slope": 1.8466,
                "l6_slope": 30.0015,
            },
        ),
        ExperimentSpec(
            id="q2-lines",
            kind="lines",
            preset="Q2",
            expected_lines={
                "l1_slope": -1.0622,
                "l1_intercept": -1.0101,
                "l3_slope": 0.9903,
                "l3_intercept": -0.2249,
                "l5_slope": 0.6155,
                "l6_slope": 0.7387,
            },
        ),
        ExperimentSpec(
            id="p1-p2-stability",
            kind="stability",
            preset="Q1",
            points=((1.0, -1.0), (0.1, 0.5)),
            taus=(10.0,),
            expected_outcomes={10.0: "ConvergedToSteadyState"},
            config=sim,
        ),
        ExperimentSpec(
            id="p3-hopf",
            kind="hopf",
            preset="Q1",
            points=((1.0, 3.0),),
            taus=(4.0, 10.0),
            expected_outcomes={
                4.0: "ConvergedToSteadyState",
                10.0: "SustainedOscillation",
            },
            threshold_bracket=(4.0, 10.0),
            expected_threshold=4.6458,
            config=sim,
        ),
        ExperimentSpec(
            id="p4-hopf",
            kind="hopf",
            preset="Q2",
            points=((2.0, 1.4),),
            taus=(3.0, 17.0),
            expected_outcomes={
                3.0: "ConvergedToSteadyState",
                17.0: "SustainedOscillation",
            },
            threshold_bracket=(3.0, 17.0),
            expected_threshold=3.3592,
            config=sim,
        ),
    ]


def _preset(name: str, grid: Grid, d1: float = 0.0, d2: float = 0.0) -> ModelParams:
    if name == "Q1":
        return preset_q1(grid, d1, d2)
    if name == "Q2":
        return preset_q2(grid, d1, d2)
    raise KeyError(f"unknown preset {name!r}")


@dataclass(frozen=True)
class AnalysisBundle:
    """Eigenpairs and all closed-form coefficients on one analysis grid."""

    grid: Grid
    eig1: object
    eig2: object
    kappas: hp.KappaSet
    Ks: hp.KSet
    lambda1_prime0: float
    lambda2_prime0: float
    s1: float
    s2: float | None


def analyze(params: ModelParams, n: int = 1000, self_flux: str = "gradient_energy"):
    """Eigenpairs, interaction coefficients, and expansion amplitudes."""
    grid = Grid(params.r1.samples.grid.a, params.r1.samples.grid.b, n)
    p = params.on_grid(grid)
    eig1 = principal_eigen(p.r1, grid)
    eig2 = principal_eigen(p.r2, grid)
    kappas = hp.compute_kappas(eig1, eig2, p.omega, grid, self_flux=self_flux)
    Ks = hp.compute_Ks(kappas, p, eig1.lambda_star, eig2.lambda_star)
    lp1, lp2 = lambda_primes(p, eig1, eig2, kappas)
    s1 = s_from_lambda(p.lambda1, eig1.lambda_star, lp1)
    try:
        s2 = s_from_lambda(p.lambda2, eig2.lambda_star, lp2)
    except MemcompError:
        s2 = None
    return AnalysisBundle(
        grid=grid,
        eig1=eig1,
        eig2=eig2,
        kappas=kappas,
        Ks=Ks,
        lambda1_prime0=lp1,
        lambda2_prime0=lp2,
        s1=s1,
        s2=s2,
    )


def find_positive_steady(
    params: ModelParams, grid: Grid, s_hint: float | None = None
) -> SteadyState:
    """Best-effort construction of a positive coexistence state.

    Ladder: (1) direct Newton from the leading-order state; (2) Newton
    warm-started along a relaxation trajectory of the undelayed system;
    (3) homotopy in the memory coefficients from d = 0. The last state
    that converges is returned even when positivity is lost (the flag
    records it); only a complete failure raises.
    """
    p = params.on_grid(grid)
    eig1 = principal_eigen(p.r1, grid)
    eig2 = principal_eigen(p.r2, grid)
    kappas = hp.compute_kappas(eig1, eig2, p.omega, grid)
    lp1, _ = lambda_primes(p, eig1, eig2, kappas)
    if s_hint is None:
        try:
            s_hint = s_from_lambda(p.lambda1, eig1.lambda_star, lp1)
        except MemcompError:
            s_hint = 1.0
    lead = leading_state(s_hint, p.omega, eig1, eig2)

    best: SteadyState | None = None
    try:
        cand = refine_steady_state(lead, p)
        if cand.positive:
            return replace(cand, s=s_hint)
        best = cand
    except ConvergenceError:
        pass

    # homotopy in (d1, d2) from the undelayed coexistence state
    p0 = p.with_point(0.0, 0.0)
    state = _relaxed_coexistence(p0, grid, eig1, eig2)
    if state is not None:
        current = state
        completed = True
        for frac in np.linspace(0.0, 1.0, 21)[1:]:
            pt = p.with_point(params.d1 * frac, params.d2 * frac)
            try:
                current = refine_steady_state(current, pt)
            except ConvergenceError:
                completed = False
                break
        if completed:
            if current.positive:
                return replace(current, s=s_hint)
            # a genuine root at the target point, positivity lost
            if best is None:
                best = current

    if best is not None:
        return replace(best, s=s_hint)
    raise ConvergenceError(
        "no positive coexistence state found (direct, relaxation, and "
        "homotopy stages all failed)"
    )


def _relaxed_coexistence(p0: ModelParams, grid: Grid, eig1, eig2) -> SteadyState | None:
    """Timestep the undelayed system from a mid-amplitude positive state
    and Newton-polish the endpoint."""
    u = 0.5 * eig1.phi.values / eig1.phi.max()
    v = 0.5 * eig2.phi.values / eig2.phi.max()
    start = SteadyState(s=0.0, u=grid.field(u), v=grid.field(v), order="leading")
    cfg = SimConfig(
        n=grid.n,
        t_end=150.0,
        eps=0.0,
        perturbation="none",
        snapshot_interval=150.0,
        series_interval=1.0,
    )
    try:
        res = simulate(p0, 0.0, start, cfg)
    except ConvergenceError:
        return None
    if not res.snapshots:
        return None
    _, u_f, v_f = res.snapshots[-1]
    endpoint = SteadyState(s=0.0, u=u_f, v=v_f, order="leading")
    try:
        polished = refine_steady_state(endpoint, p0)
    except ConvergenceError:
        return None
    if polished.u.max() < 1e-8 or polished.v.max() < 1e-8:
        return None
    return polished


def sweep_regions(
    params: ModelParams,
    d1_range: tuple[float, float],
    d2_range: tuple[float, float],
    resolution: int,
    n_analysis: int = 400,
) -> list[dict]:
    """Classify a rectangular lattice of (d1, d2) points."""
    if resolution < 2:
        raise ValueError("resolution must be at least 2 per axis")
    bundle = analyze(params, n=n_analysis)
    rows = []
    for d1 in np.linspace(*d1_range, resolution):
        for d2 in np.linspace(*d2_range, resolution):
            rep = hp.classify_region(float(d1), float(d2), bundle.kappas, bundle.Ks)
            rows.append(
                {
                    "d1": float(d1),
                    "d2": float(d2),
                    "region": rep.region or "boundary",
                    "H2": rep.H2,
                    "H3": rep.H3,
                    "H5": rep.H5,
                    "H6": rep.H6,
                }
            )
    return rows


# ---------------------------------------------------------------------------
# suite execution


def _run_eigen_experiment(spec: ExperimentSpec) -> dict:
    checks = []
    values = {}
    for name, expected in spec.expected_eigenvalues.items():
        g_f = Grid(0.0, np.pi, spec.n_analysis)
        g_c = Grid(0.0, np.pi, spec.n_analysis // 2)
        lam_f = principal_eigen(ResourceProfile.builtin(name, g_f), g_f).lambda_star
        lam_c = principal_eigen(ResourceProfile.builtin(name, g_c), g_c).lambda_star
        lam = richardson(lam_c, g_c.h, lam_f, g_f.h)
        values[name] = lam
        checks.append(
            {
                "name": f"eigenvalue[{name}]",
                "expected": expected,
                "actual": lam,
                "tolerance": 5e-4,
                "passed": bool(abs(lam - expected) <= 5e-4),
            }
        )
    return {"values": values, "checks": checks}


def _line_table(bundle: AnalysisBundle) -> dict:
    lines = hp.region_lines(bundle.kappas, bundle.Ks)
    H3 = bundle.Ks.K1 * bundle.Ks.K3 - bundle.Ks.K2 * bundle.Ks.K4 > 0
    l6 = lines.l6_ratio_wide[0] if H3 else lines.l6_ratio_narrow[0]
    return {
        "l1_slope": lines.l1[0],
        "l1_intercept": lines.l1[1],
        "l2_intercept": lines.l2[1],
        "l3_slope": lines.l3[0],
        "l3_intercept": lines.l3[1],
        "l4_intercept": lines.l4[1],
        "l5_slope": lines.l5[0],
        "l6_slope": l6,
        "l6_narrow": lines.l6_ratio_narrow[0],
        "l6_wide": lines.l6_ratio_wide[0],
    }


def _run_lines_experiment(spec: ExperimentSpec) -> dict:
    grid = Grid(0.0, np.pi, spec.n_analysis)
    params = _preset(spec.preset, grid)
    bundle = analyze(params, n=spec.n_analysis)
    table = _line_table(bundle)
    checks = []
    for key, expected in spec.expected_lines.items():
        tol = 0.5 if key == "l6_slope" else 0.01
        actual = table[key]
        checks.append(
            {
                "name": f"{spec.preset}:{key}",
                "expected": expected,
                "actual": actual,
                "tolerance": tol,
                "passed": bool(abs(actual - expected) <= tol),
            }
        )
    return {"values": table, "checks": checks}


def _prepare_point(spec: ExperimentSpec, d1: float, d2: float):
    sim_grid = Grid(0.0, np.pi, spec.config.n)
    params = _preset(spec.preset, sim_grid, d1, d2)
    state = find_positive_steady(params, sim_grid)
    return params, state


def _run_dynamics_point(spec: ExperimentSpec, d1: float, d2: float) -> dict:
    record = {"point": (d1, d2), "runs": [], "checks": []}
    try:
        params, state = _prepare_point(spec, d1, d2)
    except MemcompError as exc:
        record["steady_error"] = str(exc)
        for tau in spec.taus:
            expected = spec.expected_outcomes.get(tau)
            if expected:
                record["checks"].append(
                    {
                        "name": f"{spec.id}@({d1},{d2}) tau={tau}",
                        "expected": expected,
                        "actual": f"steady-state construction failed: {exc}",
                        "passed": False,
                    }
                )
        return record
    record["steady_positive"] = state.positive
    record["steady_residual"] = state.newton_residual
    for tau in spec.taus:
        expected = spec.expected_outcomes.get(tau)
        try:
            res = simulate(params, tau, state, spec.config)
            outcome = res.outcome
            run = {
                "tau": tau,
                "outcome": outcome,
                "amplitude": res.amplitude,
                "period": res.period_estimate,
                "negativity": res.negativity_flag,
                "dt": res.dt,
                "result": res,
            }
        except ConvergenceError as exc:
            outcome = "NumericalFailure"
            run = {
                "tau": tau,
                "outcome": outcome,
                "error": str(exc),
                "result": exc.partial_result,
            }
        record["runs"].append(run)
        if expected:
            record["checks"].append(
                {
                    "name": f"{spec.id}@({d1},{d2}) tau={tau}",
                    "expected": expected,
                    "actual": outcome,
                    "passed": bool(outcome == expected),
                }
            )
    if spec.threshold_bracket is not None:
        lo, hi = spec.threshold_bracket
        entry = {"bracket": (lo, hi)}
        try:
            thr, history = find_hopf_threshold(params, lo, hi, state, spec.config)
            entry["threshold"] = thr
            entry["history"] = history
            passed = (
                lo < thr < hi
                and abs(thr - spec.expected_threshold) <= 1.0
                and all(
                    h2[1] - h2[0] <= h1[1] - h1[0]
                    for h1, h2 in zip(history, history[1:])
                )
            )
            entry["passed"] = bool(passed)
        except (BracketError, ConvergenceError) as exc:
            entry["error"] = str(exc)
            entry["passed"] = False
        record["threshold"] = entry
        record["checks"].append(
            {
                "name": f"{spec.id} threshold",
                "expected": spec.expected_threshold,
                "actual": entry.get("threshold", entry.get("error")),
                "passed": entry["passed"],
            }
        )
    return record


def run_experiment(spec: ExperimentSpec) -> dict:
    t0 = time.perf_counter()
    if spec.kind == "eigen":
        record = _run_eigen_experiment(spec)
    elif spec.kind == "lines":
        record = _run_lines_experiment(spec)
    elif spec.kind in ("stability", "hopf"):
        record = {"points": [], "checks": []}
        for d1, d2 in spec.points:
            pt = _run_dynamics_point(spec, d1, d2)
            record["points"].append(pt)
            record["checks"].extend(pt["checks"])
    else:
        raise ValueError(f"unknown experiment kind {spec.kind!r}")
    record["id"] = spec.id
    record["kind"] = spec.kind
    record["preset"] = spec.preset
    record["elapsed"] = time.perf_counter() - t0
    return record


def run_suite(
    specs: list[ExperimentSpec],
    output_dir: str | Path | None = None,
    workers: int = 3,
) -> SuiteReport:
    """Execute all experiments (independent ones in parallel) and emit
    CSV/JSON artifacts when an output directory is given."""
    t0 = time.perf_counter()
    if not specs:
        return SuiteReport(records=[], passed=0, failed=0, wall_time=0.0)
    if workers > 1 and len(specs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(run_experiment, specs))
    else:
        records = [run_experiment(s) for s in specs]
    passed = sum(1 for r in records for c in r.get("checks", []) if c["passed"])
    failed = sum(1 for r in records for c in r.get("checks", []) if not c["passed"])
    report = SuiteReport(
        records=records,
        passed=passed,
        failed=failed,
        wall_time=time.perf_counter() - t0,
    )
    if output_dir is not None:
        write_artifacts(report, Path(output_dir))
    return report


# ---------------------------------------------------------------------------
# artifact emission


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (float, np.floating)):
        return FLOAT_FMT % x
    return str(x)


def write_csv(path: Path, header: list[str], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(x) for x in row))
    path.write_text("\n".join(lines) + "\n")


def write_timeseries_csv(path: Path, result) -> None:
    write_csv(
        path,
        ["t", "l2_u", "l2_v", "max_u", "max_v"],
        zip(result.times, result.l2_u, result.l2_v, result.max_u, result.max_v),
    )


def write_snapshots_csv(path: Path, result) -> None:
    rows = []
    for t, uf, vf in result.snapshots:
        for x, uu, vv in zip(uf.grid.x, uf.values, vf.values):
            rows.append((t, x, uu, vv))
    write_csv(path, ["t", "x", "u", "v"], rows)


def write_regions_csv(path: Path, rows: list[dict]) -> None:
    write_csv(
        path,
        ["d1", "d2", "region", "H2", "H3", "H5", "H6"],
        (
            (r["d1"], r["d2"], r["region"], r["H2"], r["H3"], r["H5"], r["H6"])
            for r in rows
        ),
    )


def write_eigen_csv(path: Path, grid: Grid, phi: np.ndarray) -> None:
    write_csv(path, ["x", "phi"], zip(grid.x, phi))


def _json_safe(obj):
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items() if k != "result"}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return obj


def write_artifacts(report: SuiteReport, outdir: Path) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    def num_tag(x) -> str:
        return str(x).replace(".", "p").replace("-", "m")

    for record in report.records:
        rid = record["id"]
        for pt in record.get("points", []):
            d1, d2 = pt["point"]
            tag = f"{rid}_d1_{num_tag(d1)}_d2_{num_tag(d2)}"
            for run in pt.get("runs", []):
                res = run.get("result")
                if res is None:
                    continue
                stem = f"{tag}_tau_{num_tag(run['tau'])}"
                write_timeseries_csv(outdir / f"{stem}_timeseries.csv", res)
                if res.snapshots:
                    write_snapshots_csv(outdir / f"{stem}_snapshots.csv", res)
    payload = {
        "passed": report.passed,
        "failed": report.failed,
        "records": [_json_safe(r) for r in report.records],
    }
    (outdir / "report.json").write_text(json.dumps(payload, indent=2, sort_keys=True))
