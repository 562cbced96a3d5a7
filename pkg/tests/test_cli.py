import json
import os

from cellscout.cli import EXIT_CONFIG, EXIT_DATA, EXIT_OK, main
from cellscout.table import load_csv, write_csv
from tests.test_learner import two_column_tables

RUN_FLAGS = [
    "--budget", "50",
    "--seed", "3",
    "--batch-size", "4",
    "--embedding-dim", "4",
    "--committee-size", "5",
    "--cv-folds", "3",
]


def write_tables(tmp_path, seed=0):
    dirty, gt = two_column_tables(n=40, seed=seed)
    dirty_path = os.path.join(tmp_path, "dirty.csv")
    gt_path = os.path.join(tmp_path, "gt.csv")
    write_csv(dirty, dirty_path)
    write_csv(gt, gt_path)
    return dirty_path, gt_path


class TestRun:
    def test_report_written_within_budget(self, tmp_path):
        dirty_path, gt_path = write_tables(tmp_path)
        report_path = os.path.join(tmp_path, "report.json")
        code = main(
            ["run", "--data", dirty_path, "--ground-truth", gt_path, "--report", report_path]
            + RUN_FLAGS
        )
        assert code == EXIT_OK
        report = json.loads(open(report_path).read())
        assert report["labels_used"] <= 50
        assert set(report) == {
            "final_f1",
            "final_precision",
            "final_recall",
            "labels_used",
            "per_column",
            "convergence_curve",
        }

    def test_budget_below_initialization_is_config_error(self, tmp_path, capsys):
        dirty_path, gt_path = write_tables(tmp_path)
        code = main(
            ["run", "--data", dirty_path, "--ground-truth", gt_path, "--budget", "3"]
            + RUN_FLAGS[2:]
        )
        assert code == EXIT_CONFIG
        assert "budget" in capsys.readouterr().err.lower()

    def test_byte_identical_reports(self, tmp_path):
        dirty_path, gt_path = write_tables(tmp_path)
        paths = [os.path.join(tmp_path, f"r{i}.json") for i in (1, 2)]
        for path in paths:
            code = main(
                ["run", "--data", dirty_path, "--ground-truth", gt_path, "--report", path]
                + RUN_FLAGS
            )
            assert code == EXIT_OK
        assert open(paths[0], "rb").read() == open(paths[1], "rb").read()

    def test_missing_data_file(self, tmp_path):
        code = main(
            ["run", "--data", os.path.join(tmp_path, "none.csv"), "--ground-truth", "x"]
            + RUN_FLAGS
        )
        assert code == EXIT_DATA

    def test_run_log_is_jsonl(self, tmp_path):
        dirty_path, gt_path = write_tables(tmp_path)
        log_path = os.path.join(tmp_path, "run.jsonl")
        report_path = os.path.join(tmp_path, "r.json")
        main(
            [
                "run", "--data", dirty_path, "--ground-truth", gt_path,
                "--report", report_path, "--run-log", log_path,
            ]
            + RUN_FLAGS
        )
        records = [json.loads(line) for line in open(log_path)]
        assert records
        for record in records:
            assert {"iteration", "column", "labels_used", "per_column", "global"} <= set(record)

    def test_session_out_and_resume(self, tmp_path):
        dirty_path, gt_path = write_tables(tmp_path)
        snap_path = os.path.join(tmp_path, "session.json")
        r1 = os.path.join(tmp_path, "a.json")
        code = main(
            [
                "run", "--data", dirty_path, "--ground-truth", gt_path,
                "--report", r1, "--session-out", snap_path,
            ]
            + RUN_FLAGS
        )
        assert code == EXIT_OK and os.path.exists(snap_path)
        # resuming a finished session re-emits the identical report
        r2 = os.path.join(tmp_path, "b.json")
        code = main(
            [
                "run", "--data", dirty_path, "--ground-truth", gt_path,
                "--report", r2, "--resume", snap_path,
            ]
            + RUN_FLAGS
        )
        assert code == EXIT_OK
        assert open(r1, "rb").read() == open(r2, "rb").read()


class TestInject:
    def test_roundtrip(self, tmp_path):
        dirty_path, gt_path = write_tables(tmp_path, seed=1)
        clean = load_csv(gt_path)
        plan = {
            "seed": 5,
            "columns": [{"column": 1, "rate": 1.0, "kind": "format", "marker": "$"}],
            "pairs": [],
        }
        plan_path = os.path.join(tmp_path, "plan.json")
        json.dump(plan, open(plan_path, "w"))
        out_dirty = os.path.join(tmp_path, "out_dirty.csv")
        out_gt = os.path.join(tmp_path, "out_gt.csv")
        code = main(
            ["inject", "--clean", gt_path, "--plan", plan_path, "--dirty-out", out_dirty, "--gt-out", out_gt]
        )
        assert code == EXIT_OK
        dirty2 = load_csv(out_dirty)
        gt2 = load_csv(out_gt)
        assert gt2 == clean
        assert all(dirty2.cells[i][1] != gt2.cells[i][1] for i in range(clean.n_rows))

    def test_zero_rate_identical_files(self, tmp_path):
        _, gt_path = write_tables(tmp_path, seed=2)
        plan_path = os.path.join(tmp_path, "plan.json")
        json.dump({"seed": 1, "columns": [{"column": 0, "rate": 0.0, "kind": "typo"}]}, open(plan_path, "w"))
        out_dirty = os.path.join(tmp_path, "d.csv")
        out_gt = os.path.join(tmp_path, "g.csv")
        assert main(
            ["inject", "--clean", gt_path, "--plan", plan_path, "--dirty-out", out_dirty, "--gt-out", out_gt]
        ) == EXIT_OK
        assert open(out_dirty).read() == open(out_gt).read()

    def test_plan_naming_missing_column(self, tmp_path):
        _, gt_path = write_tables(tmp_path)
        plan_path = os.path.join(tmp_path, "plan.json")
        json.dump({"seed": 1, "columns": [{"column": 7, "rate": 0.1, "kind": "typo"}]}, open(plan_path, "w"))
        code = main(
            ["inject", "--clean", gt_path, "--plan", plan_path,
             "--dirty-out", os.path.join(tmp_path, "d.csv"), "--gt-out", os.path.join(tmp_path, "g.csv")]
        )
        assert code == EXIT_CONFIG
