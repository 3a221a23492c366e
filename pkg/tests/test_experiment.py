import csv
import io
import json
import math

import numpy as np
import pytest

from pcga.analytics import RunLog
from pcga.core import ConfigurationError
from pcga.experiment import (
    ExperimentSpec,
    ManifestMismatch,
    expand_grid,
    preset,
    read_manifest,
    resolve_lambda,
    run_experiment,
)
from pcga.logfiles import format_log, parse_log
from pcga.reports import KINDS, compute_targets, load_logs, report


def _spec(**kw):
    base = dict(problems=((2, (12,)),), mu=(2,), lam=("1",), p_c=(0.0, 0.5), runs=3,
                budget_factor=5.0, name="tiny")
    base.update(kw)
    return ExperimentSpec(**base)


def _rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_leadingones_grid_has_5544_cells():
    grid = expand_grid(preset("leadingones"))
    assert len(grid.cells) == 5544 and not grid.skipped


def test_single_cell_grid_yields_runs_jobs():
    grid = expand_grid(_spec(p_c=(0.3,), runs=7))
    assert len(grid.cells) == 1 and len(grid.jobs()) == 7


def test_seed_assignment_is_deterministic_and_distinct():
    a = [j.seed for j in expand_grid(_spec()).jobs()]
    b = [j.seed for j in expand_grid(_spec()).jobs()]
    assert a == b and len(set(a)) == len(a)
    assert a != [j.seed for j in expand_grid(_spec(master_seed=1)).jobs()]


def test_invalid_cells_are_skipped():
    grid = expand_grid(_spec(problems=((20, (10, 16)),)))
    assert {c.n for c in grid.cells} == {16}
    assert grid.skipped


def test_lambda_rules():
    assert [resolve_lambda(r, 5) for r in ("1", "half", "mu", 7)] == [1, 3, 5, 7]
    with pytest.raises(ConfigurationError):
        _spec(lam=("double",))


def test_spec_round_trip_and_digest():
    spec = ExperimentSpec.from_dict({
        "name": "x", "runs": 2, "problems": [{"id": 1, "dims": [10, 20]}],
        "grid": {"mu": [2, 4], "lambda": ["1", "mu"], "p_c": [0, 0.5]},
    })
    assert len(expand_grid(spec).cells) == 16
    assert ExperimentSpec.from_dict(spec.to_dict()).digest() == spec.digest()
    with pytest.raises(ConfigurationError):
        ExperimentSpec.from_dict({"problems": [{"id": 1, "dims": 10}], "mu": [2], "colour": 1})


def test_run_experiment_writes_logs_and_resumes(tmp_path):
    out = run_experiment(_spec(), tmp_path / "r")
    logs = sorted((out / "logs").glob("*.log"))
    assert len(logs) == 6
    manifest = read_manifest(out)
    assert manifest["complete"] and len(manifest["cells"]) == 2
    victim = logs[3]
    before = victim.read_bytes()
    victim.unlink()
    stamp = {p: p.stat().st_mtime_ns for p in logs if p != victim}
    run_experiment(_spec(), out)
    assert victim.read_bytes() == before
    assert all(p.stat().st_mtime_ns == t for p, t in stamp.items())


def test_parallel_matches_serial(tmp_path):
    a = run_experiment(_spec(), tmp_path / "a", workers=1)
    b = run_experiment(_spec(), tmp_path / "b", workers=3)
    for p in (a / "logs").glob("*.log"):
        assert p.read_bytes() == (b / "logs" / p.name).read_bytes()


def test_manifest_mismatch(tmp_path):
    run_experiment(_spec(), tmp_path)
    with pytest.raises(ManifestMismatch):
        run_experiment(_spec(runs=4), tmp_path)


def test_log_round_trip(tmp_path):
    out = run_experiment(_spec(runs=1), tmp_path)
    for path in (out / "logs").glob("*.log"):
        text = path.read_text()
        log = parse_log(text)
        log.check()
        assert format_log(log) == text
    log = RunLog(np.array([1, 5]), np.array([0.5, 2.0]), 9, 10, False, meta={"cell": 0})
    again = parse_log(format_log(log))
    assert again.evals.tolist() == [1, 5] and again.best.tolist() == [0.5, 2.0]
    assert math.isinf(again.target)


@pytest.mark.parametrize("kind", KINDS)
def test_reports_render(tmp_path, kind):
    spec = _spec(mutation=("sbm", "fast"), lam=("1", "mu"))
    out = run_experiment(spec, tmp_path)
    text = report(load_logs(out), kind)
    rows = _rows(text)
    assert rows
    assert all("NA" not in r.values() or kind == "fixed-target" for r in rows)


def test_failed_cells_are_marked(tmp_path):
    # budget far below what LeadingOnes n=40 needs: every run fails
    spec = _spec(problems=((2, (40,)),), budget_factor=0.01, p_c=(0.0, 0.5))
    out = run_experiment(spec, tmp_path)
    data = load_logs(out)
    ert = _rows(report(data, "ert-table"))
    assert {r["ert"] for r in ert} == {"inf"} and {r["status"] for r in ert} == {"failed"}
    norm = _rows(report(data, "normalized-heatmap-data"))
    assert {r["status"] for r in norm} == {"failed"}
    star = _rows(report(data, "pc-star-table"))
    assert star[0]["mu=2"] == "none"


def test_incomplete_cells_reported_as_na(tmp_path):
    out = run_experiment(_spec(), tmp_path)
    for p in (out / "logs").glob("c00001_*.log"):
        p.unlink()
    data = load_logs(out)
    assert data.incomplete_cells == [1]
    rows = _rows(report(data, "ert-table"))
    bad = [r for r in rows if r["p_c"] == "0.5"]
    assert bad[0]["ert"] == "NA" and bad[0]["status"] == "incomplete"


def test_targets_from_logs(tmp_path):
    out = run_experiment(_spec(target="none", budget_factor=1.0), tmp_path)
    targets = compute_targets(load_logs(out))
    assert set(targets) == {(2, 12)}
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["cells"]["0"]["target"] == "inf"
