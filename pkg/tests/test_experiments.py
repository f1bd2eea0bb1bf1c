import math
from pathlib import Path

import numpy as np
import pytest

from memcomp import Grid, SimConfig
from memcomp.errors import ConvergenceError
from memcomp.experiments import (
    ExperimentSpec,
    analyze,
    builtin_suite,
    find_positive_steady,
    run_experiment,
    run_suite,
    sweep_regions,
    write_regions_csv,
    write_timeseries_csv,
)
from memcomp.model import preset_q1, preset_q2

PI = math.pi


class TestBuiltinSuite:
    def test_size_is_six(self):
        assert len(builtin_suite()) == 6

    def test_ids_unique(self):
        ids = [s.id for s in builtin_suite()]
        assert len(set(ids)) == 6

    def test_q1_spec_parameters(self):
        grid = Grid(0.0, PI, 16)
        p = preset_q1(grid)
        assert p.omega == PI / 4
        assert p.lambda1 == 2.0 and p.lambda2 == 2.0
        assert (p.a11, p.a12, p.a21, p.a22) == (0.5, 0.5, 1.0, 1.5)

    def test_p4_expected_threshold(self):
        spec = {s.id: s for s in builtin_suite()}["p4-hopf"]
        assert spec.expected_threshold == 3.3592
        assert spec.threshold_bracket == (3.0, 17.0)

    def test_expected_outcomes_only_on_backed_runs(self):
        for spec in builtin_suite():
            for tau in spec.expected_outcomes:
                assert tau in spec.taus


class TestRunSuite:
    def test_empty_suite(self):
        report = run_suite([])
        assert report.ok and report.records == []

    def test_lines_experiment_deterministic(self):
        spec = [s for s in builtin_suite() if s.id == "q2-lines"][0]
        a = run_experiment(spec)
        b = run_experiment(spec)
        assert a["values"] == b["values"]

    def test_parallel_serial_equivalence(self):
        specs = [s for s in builtin_suite() if s.kind in ("eigen", "lines")]
        serial = run_suite(specs, workers=1)
        parallel = run_suite(specs, workers=3)

        def strip(records):
            return [
                {k: v for k, v in r.items() if k != "elapsed"} for r in records
            ]

        assert strip(serial.records) == strip(parallel.records)
        assert (serial.passed, serial.failed) == (parallel.passed, parallel.failed)

    def test_artifacts_and_determinism(self, tmp_path):
        grid = Grid(0.0, PI, 48)
        p = preset_q1(grid, 0.1, 0.5)
        state = find_positive_steady(p, grid)
        from memcomp.dynamics import simulate

        cfg = SimConfig(n=48, t_end=5.0, snapshot_interval=1.0)
        res1 = simulate(p, 0.5, state, cfg)
        res2 = simulate(p, 0.5, state, cfg)
        f1, f2 = tmp_path / "a.csv", tmp_path / "b.csv"
        write_timeseries_csv(f1, res1)
        write_timeseries_csv(f2, res2)
        assert f1.read_bytes() == f2.read_bytes()
        header = f1.read_text().splitlines()[0]
        assert header == "t,l2_u,l2_v,max_u,max_v"
        # 17-significant-digit serialization round-trips exactly
        first_val = f1.read_text().splitlines()[1].split(",")[1]
        assert float(first_val) == res1.l2_u[0]


class TestFindPositiveSteady:
    def test_direct_route(self):
        grid = Grid(0.0, PI, 128)
        p = preset_q1(grid, 0.1, 0.5)  # inside the always-stable band
        st = find_positive_steady(p, grid)
        assert st.positive and st.order == "refined"
        assert st.newton_residual < 1e-9

    def test_homotopy_route(self):
        grid = Grid(0.0, PI, 128)
        p = preset_q2(grid, 2.0, 1.4)
        st = find_positive_steady(p, grid)
        assert st.positive
        # the coexistence state here is strongly asymmetric
        assert st.v.max() > st.u.max()

    def test_memory_collapse_point_fails(self):
        grid = Grid(0.0, PI, 128)
        p = preset_q1(grid, 1.0, -1.0)
        with pytest.raises(ConvergenceError):
            find_positive_steady(p, grid)


class TestSweep:
    def test_interior_box_in_d2(self, q1_bundle):
        grid = Grid(0.0, PI, 200)
        p = preset_q1(grid)
        rows = sweep_regions(p, (-0.2, 0.0), (0.3, 0.5), 2, n_analysis=300)
        assert len(rows) == 4
        assert all(r["region"] == "D2" for r in rows)

    def test_labels_change_only_at_band_edges(self):
        grid = Grid(0.0, PI, 200)
        p = preset_q1(grid)
        rows = sweep_regions(p, (0.0, 0.0), (-3.0, 3.0), 141, n_analysis=300)
        # one column of the lattice: a degenerate sweep along d1 = 0
        labels = [r["region"] for r in rows[:141]]
        switches = sum(1 for a, b in zip(labels, labels[1:]) if a != b)
        # along d1 = 0 the labels change only at the four band edges
        assert switches <= 4
        assert "D2" in labels and "D3_1" in labels

    def test_resolution_validated(self):
        grid = Grid(0.0, PI, 64)
        p = preset_q1(grid)
        with pytest.raises(ValueError):
            sweep_regions(p, (0, 1), (0, 1), 1)

    def test_csv_schema(self, tmp_path):
        grid = Grid(0.0, PI, 64)
        p = preset_q1(grid)
        rows = sweep_regions(p, (0, 1), (0, 1), 2, n_analysis=200)
        path = tmp_path / "regions.csv"
        write_regions_csv(path, rows)
        lines = path.read_text().splitlines()
        assert lines[0] == "d1,d2,region,H2,H3,H5,H6"
        assert len(lines) == 5


class TestAnalyze:
    def test_bundle_consistency(self, q1_bundle):
        assert abs(q1_bundle.eig1.lambda_star - 0.9291) < 5e-4
        assert abs(q1_bundle.eig2.lambda_star - 0.5403) < 5e-4
        assert q1_bundle.s1 > 0
        assert q1_bundle.kappas.kappa1 < 0 and q1_bundle.kappas.kappa2 < 0

    def test_amplitude_discrepancy_reported(self, q1_bundle, q2_bundle):
        # the two single-branch amplitudes are reported side by side; for
        # the strong-competition preset the second branch cannot reach its
        # target at all (negative slope), which is reported as None
        assert q1_bundle.s2 is None
        assert q1_bundle.lambda2_prime0 < 0
        assert q2_bundle.s2 is not None
        assert abs(q2_bundle.s1 - q2_bundle.s2) > 1e-3
