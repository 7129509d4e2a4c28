import csv
import json
import os
import tempfile
import unittest

from pydantic import ValidationError

from biharm_bench.errors import CatalogError, PointEvaluationError, ReportWriteError
from biharm_bench.experiments.run import main
from biharm_bench.experiments.utils import get_cmd_line_parser
from biharm_bench.family import mu_roots
from biharm_bench.sweep import (
    ResidualReport,
    RunConfig,
    emit_report,
    load_config,
    run_scan,
    run_verify,
)


class TestVerify(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.chen = run_verify(RunConfig(immersion="chen", m=2, grid=[4]))
        cls.circle = run_verify(RunConfig(immersion="circle", m=1, grid=[4]))

    def test_chen_passes(self):
        report = self.chen
        self.assertTrue(report.passed)
        self.assertEqual(len(report.records), 16)
        self.assertEqual([r.index for r in report.records], list(range(16)))
        self.assertEqual(
            set(report.verdicts), {"split", "kahler", "spaceform", "humbilical", "reduced", "identities"}
        )
        self.assertLess(report.aggregates["spaceform.relative"].max, 1e-6)
        self.assertEqual(report.aggregates["spaceform.relative"].count, 16)
        self.assertLess(report.identities["trace_relation"], 1e-10)

    def test_structure_verdicts(self):
        self.assertEqual(
            set(self.chen.structure_verdicts),
            {"lagrangian_defect", "fit_residual", "pnmc_defect", "codazzi_residual"},
        )
        for key, verdict in self.chen.structure_verdicts.items():
            self.assertEqual(verdict.status, "pass", msg=key)

    def test_structure_verdicts_are_advisory(self):
        # The complex line passes the general criterion but is not Lagrangian.
        report = run_verify(RunConfig(immersion="holomorphic-control", m=2, grid=[4], criteria=["split"]))
        self.assertTrue(report.passed)
        verdict = report.structure_verdicts["lagrangian_defect"]
        self.assertEqual(verdict.status, "fail")
        self.assertAlmostEqual(verdict.max_value, 1.0, delta=1e-10)
        # Minimal everywhere: the normalized mean curvature is undefined.
        self.assertEqual(report.structure_verdicts["pnmc_defect"].status, "no-points")

    def test_worker_count_does_not_change_report(self):
        config = RunConfig(immersion="chen", m=2, grid=[4], workers=4)
        parallel = run_verify(config)
        self.assertEqual(parallel.aggregates, self.chen.aggregates)
        self.assertEqual(parallel.verdicts, self.chen.verdicts)
        self.assertEqual(
            [record.residuals for record in parallel.records],
            [record.residuals for record in self.chen.records],
        )

    def test_circle_fails(self):
        report = self.circle
        self.assertFalse(report.passed)
        self.assertNotIn("identities", report.verdicts)
        verdict = report.verdicts["split"]
        self.assertEqual(verdict.status, "fail")
        self.assertAlmostEqual(verdict.max_value, 1.0, delta=1e-8)
        self.assertEqual(verdict.failed_points, 0)

    def test_json_report(self):
        with tempfile.TemporaryDirectory() as directory:
            path = os.path.join(directory, "report.json")
            emit_report(self.chen, path, "json")
            with open(path) as f:
                data = json.load(f)
        self.assertEqual(data["provenance"]["engine_version"], "0.1")
        restored = ResidualReport.model_validate(data)
        self.assertEqual(restored.verdicts, self.chen.verdicts)
        self.assertEqual(restored.structure_verdicts, self.chen.structure_verdicts)
        self.assertEqual(restored.records[5].point, self.chen.records[5].point)

    def test_csv_report(self):
        with tempfile.TemporaryDirectory() as directory:
            path = os.path.join(directory, "report.csv")
            emit_report(self.circle, path, "csv")
            with open(path, newline="") as f:
                rows = list(csv.reader(f))
        self.assertEqual(len(rows), 5)
        self.assertEqual(rows[0][:2], ["index", "u0"])
        self.assertEqual(rows[0][-1], "errors")
        self.assertTrue(all(len(row) == len(rows[0]) for row in rows))

    def test_write_errors(self):
        with self.assertRaises(ReportWriteError):
            emit_report(self.circle, os.path.join(tempfile.gettempdir(), "missing", "dir", "r.json"))
        with tempfile.TemporaryDirectory() as directory:
            with self.assertRaises(ValueError):
                emit_report(self.circle, os.path.join(directory, "r.txt"), "txt")

    def test_perturbed_mu_fails(self):
        config = RunConfig(immersion="chen", m=2, mu=1.05 * mu_roots(2)[0], grid=[4], criteria=["spaceform"])
        report = run_verify(config)
        self.assertFalse(report.passed)
        self.assertEqual(report.verdicts["spaceform"].status, "fail")
        self.assertGreater(report.aggregates["spaceform.relative"].max, 1e-2)
        self.assertEqual(report.verdicts["identities"].status, "fail")
        self.assertGreater(report.identities["trace_relation"], 1e-2)

    def test_empty_grid(self):
        report = ResidualReport.assemble(RunConfig(), {}, [4], ["split"], [])
        self.assertEqual(report.verdicts["split"].status, "no-points")
        self.assertFalse(report.passed)

    def test_custom_builder(self):
        config = RunConfig(immersion="biharm_bench.tests.test_sweep:fold", m=1, grid=[5])
        with self.assertRaises(PointEvaluationError) as context:
            run_verify(config)
        self.assertEqual(context.exception.point, (0.0,))
        with self.assertRaises(CatalogError):
            run_verify(RunConfig(immersion="no_such_module:build"))
        with self.assertRaises(CatalogError):
            run_verify(RunConfig(immersion="enneper"))


class TestConfig(unittest.TestCase):
    def test_yaml_with_overrides(self):
        with tempfile.TemporaryDirectory() as directory:
            path = os.path.join(directory, "run.yaml")
            with open(path, "w") as f:
                f.write("immersion: circle\nm: 1\ntolerances:\n  criteria: 1.0e-3\n")
            config = load_config(
                path, {"m": None, "grid": [4], "tolerances": {"geometry": 1e-7, "criteria": None}}
            )
        self.assertEqual(config.immersion, "circle")
        self.assertEqual(config.m, 1)
        self.assertEqual(config.grid, [4])
        self.assertEqual(config.tolerances.criteria, 1e-3)
        self.assertEqual(config.tolerances.geometry, 1e-7)
        self.assertEqual(config.tolerances.identities, 1e-10)

    def test_validation(self):
        for values in (
            {"mu_root": 4},
            {"grid": [3]},
            {"criteria": ["nope"]},
            {"mu": 0.0},
            {"workers": 0},
            {"m": 0},
            {"tolerances": {"criteria": -1.0}},
            {"format": "xml"},
        ):
            with self.assertRaises(ValidationError, msg=str(values)):
                RunConfig(**values)

    def test_grid_counts(self):
        self.assertEqual(RunConfig().grid_counts(2), [32, 32])
        self.assertEqual(RunConfig().grid_counts(3), [8, 8, 8])
        self.assertEqual(RunConfig(grid=[5]).grid_counts(3), [5, 5, 5])
        with self.assertRaises(ValueError):
            RunConfig(grid=[5, 6]).grid_counts(3)


class TestCommandLine(unittest.TestCase):
    def test_parser(self):
        args = get_cmd_line_parser(
            ["verify", "-i", "circle", "--grid", "8", "--tol-criteria", "1e-3", "--criteria", "split,spaceform"]
        )
        overrides = args["overrides"]
        self.assertEqual(overrides["immersion"], "circle")
        self.assertEqual(overrides["grid"], [8])
        self.assertEqual(overrides["criteria"], ["split", "spaceform"])
        self.assertEqual(overrides["tolerances"]["criteria"], 1e-3)
        self.assertIsNone(overrides["m"])
        self.assertFalse(args["verbose"])

        args = get_cmd_line_parser(["scan", "--m-max", "4", "--grid", "4,4"])
        self.assertEqual((args["m_min"], args["m_max"]), (2, 4))
        self.assertEqual(args["grid"], [4, 4])

    def test_exit_codes(self):
        self.assertEqual(main(["catalog"]), 0)
        self.assertEqual(main(["verify", "-i", "circle", "--grid", "4"]), 1)
        self.assertEqual(main(["verify", "-i", "enneper"]), 2)
        self.assertEqual(main(["verify", "--mu-root", "7"]), 2)

    def test_scan(self):
        rows = run_scan(range(2, 5))
        self.assertEqual(len(rows), 12)
        self.assertTrue(all(row.verdict == "pass" for row in rows))
        self.assertEqual([row.root_index for row in rows[:4]], [0, 1, 2, 3])
        for row in rows:
            self.assertLess(max(row.res_516, row.res_53pp, row.res_lambda), 1e-10)
            self.assertAlmostEqual(row.a, (row.lam + (row.m - 1) * row.mu) / row.m, delta=1e-14)
        with self.assertRaises(CatalogError):
            run_scan([1])

        with tempfile.TemporaryDirectory() as directory:
            path = os.path.join(directory, "scan.csv")
            self.assertEqual(main(["scan", "--m-min", "2", "--m-max", "3", "-o", path]), 0)
            with open(path, newline="") as f:
                rows = list(csv.reader(f))
        self.assertEqual(len(rows), 9)
        self.assertEqual(rows[0][-1], "verdict")


if __name__ == "__main__":
    unittest.main()
