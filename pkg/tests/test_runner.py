import json

import numpy as np
import pytest
from PIL import Image

from ivosbench.dataset import davis_palette, generate_synthetic, write_davis_dataset
from ivosbench.runner import (
    RunConfig,
    auto_click_radius,
    report_from_dict,
    report_to_dict,
    run_evaluation,
    run_session,
    score_predictions,
    write_report,
)


class TestRunSession:
    def test_static_scene_perfect_from_round_one(self, static_spec):
        ds = generate_synthetic(static_spec)
        curve, state = run_session(ds, RunConfig())
        assert curve.samples[0].global_jf == 1.0
        assert state.stopped  # nothing left to click in round 2
        assert len(curve.samples) == 1

    def test_jump_scene_monotone_and_converges(self, jump_spec):
        ds = generate_synthetic(jump_spec)
        curve, _ = run_session(ds, RunConfig())
        values = [s.global_jf for s in curve.samples]
        assert all(a <= b + 1e-12 for a, b in zip(values, values[1:]))
        assert values[-1] == 1.0

    def test_round_budget_respected(self, jump_spec):
        ds = generate_synthetic(jump_spec)
        curve, state = run_session(ds, RunConfig(max_rounds=2))
        assert state.round <= 2
        assert len(curve.samples) <= 2

    def test_timing_enabled_records_timestamps(self, static_spec):
        ds = generate_synthetic(static_spec)
        curve, _ = run_session(ds, RunConfig(timing=True))
        assert all(s.wall_clock_seconds is not None for s in curve.samples)

    def test_region_grow_backend_end_to_end(self, static_spec):
        # solid shapes on a contrasting background: flood fill recovers them
        spec = dict(static_spec)
        spec["background_color"] = [240, 240, 240]
        spec["objects"] = [dict(spec["objects"][0], color=[20, 40, 200])]
        ds = generate_synthetic(spec)
        curve, _ = run_session(ds, RunConfig(interaction="region-grow"))
        assert curve.samples[-1].global_jf == 1.0

    def test_exclude_first_and_last_toggle(self, jump_spec):
        spec = dict(jump_spec)
        spec["objects"] = [dict(spec["objects"][0], teleports=[[13, 40, 30]])]
        ds = generate_synthetic(spec)
        curve, _ = run_session(ds, RunConfig(exclude_first_and_last=True, max_rounds=1))
        full, _ = run_session(ds, RunConfig(max_rounds=1))
        # round 1 fixes frames 0..12 of 20; dropping frames 0 and 19 rescales
        assert full.samples[0].global_jf == pytest.approx(13 / 20)
        assert curve.samples[0].global_jf == pytest.approx(12 / 18)

    def test_recorded_scribbles_drive_round_one(self, static_spec, tmp_path):
        import json

        from ivosbench.dataset import write_davis_dataset
        from ivosbench.runner import attach_scribbles
        from ivosbench.dataset import load_dataset

        ds = generate_synthetic(static_spec)
        write_davis_dataset(ds, tmp_path)
        scribble_dir = tmp_path / "Scribbles" / ds.name
        scribble_dir.mkdir(parents=True)
        # a diagonal scribble across the object on frame 5
        scribble_dir.joinpath("001.json").write_text(json.dumps({
            "sequence": ds.name,
            "scribbles": [
                [] if i != 5 else [{
                    "object_id": 1,
                    "path": [[7 / 63, 9 / 47], [11 / 63, 12 / 47], [15 / 63, 15 / 47]],
                }]
                for i in range(ds.n_frames)
            ],
        }))
        (loaded,) = load_dataset(tmp_path)
        attach_scribbles([loaded], tmp_path)
        assert loaded.initial_scribbles is not None
        curve, state = run_session(loaded, RunConfig(strategy="f2"))
        assert state.annotated[0] == 5  # the scribble file fixes the round-1 frame
        assert curve.samples[0].global_jf == 1.0


class TestRunEvaluation:
    def test_static_dataset_r_auc_one(self, static_spec):
        report = run_evaluation([generate_synthetic(static_spec)], RunConfig())
        assert report.r_auc == 1.0
        assert not report.partial

    def test_sequences_merged_in_name_order(self, static_spec, jump_spec):
        datasets = [generate_synthetic(jump_spec), generate_synthetic(static_spec)]
        report = run_evaluation(datasets, RunConfig())
        assert list(report.per_sequence) == ["jump", "static"]

    def test_worker_invariance(self, static_spec, jump_spec):
        datasets = [generate_synthetic(jump_spec), generate_synthetic(static_spec)]
        one = run_evaluation(datasets, RunConfig(workers=1))
        four = run_evaluation(datasets, RunConfig(workers=4))
        one.config["workers"] = four.config["workers"] = None
        assert one == four

    def test_failure_isolation_marks_partial(self, static_spec, jump_spec):
        good = generate_synthetic(static_spec)
        bad = generate_synthetic(jump_spec)
        bad.annotations = bad.annotations[:1] + [np.zeros((1, 1), dtype=np.int32)] * 19
        report = run_evaluation([good, bad], RunConfig())
        assert report.partial
        assert "jump" in report.errors
        assert list(report.per_sequence) == ["static"]

    def test_all_sequences_failing_raises(self, jump_spec):
        bad = generate_synthetic(jump_spec)
        bad.annotations = bad.annotations[:1] + [np.zeros((1, 1), dtype=np.int32)] * 19
        with pytest.raises(ValueError):
            run_evaluation([bad], RunConfig())

    def test_report_self_consistency(self, jump_spec):
        from ivosbench.metrics import round_auc

        report = run_evaluation([generate_synthetic(jump_spec)], RunConfig())
        assert report.r_auc == pytest.approx(
            round_auc(report.global_curve, report.max_rounds), abs=1e-12
        )

    def test_timing_section_present_only_when_enabled(self, static_spec):
        ds = generate_synthetic(static_spec)
        plain = run_evaluation([ds], RunConfig())
        timed = run_evaluation([ds], RunConfig(timing=True))
        assert plain.auc_time is None and plain.jf_at_60 is None
        assert timed.auc_time is not None and timed.jf_at_60 is not None


class TestReportSerialization:
    def test_json_round_trip(self, jump_spec, tmp_path):
        report = run_evaluation([generate_synthetic(jump_spec)], RunConfig())
        path = tmp_path / "report.json"
        write_report(report, path, fmt="json")
        with open(path) as f:
            data = json.load(f)
        assert data["schema_version"] == __import__("ivosbench").__version__
        assert report_from_dict(data) == report

    def test_csv_row_count(self, static_spec, jump_spec, tmp_path):
        report = run_evaluation(
            [generate_synthetic(static_spec), generate_synthetic(jump_spec)], RunConfig()
        )
        path = tmp_path / "report.csv"
        write_report(report, path, fmt="csv")
        rows = path.read_text().strip().splitlines()
        expected = sum(len(c.samples) for c in report.per_sequence.values())
        assert len(rows) == 1 + expected + 1  # header + per-round rows + summary
        assert rows[-1].startswith("__summary__")

    def test_byte_identical_reports_modulo_timestamp(self, jump_spec, tmp_path):
        datasets = [generate_synthetic(jump_spec)]
        a = report_to_dict(run_evaluation(datasets, RunConfig()), generated_at="X")
        b = report_to_dict(run_evaluation(datasets, RunConfig()), generated_at="X")
        assert json.dumps(a) == json.dumps(b)

    def test_unknown_format_rejected(self, static_spec, tmp_path):
        report = run_evaluation([generate_synthetic(static_spec)], RunConfig())
        with pytest.raises(ValueError):
            write_report(report, tmp_path / "r.xml", fmt="xml")


class TestScorePredictions:
    def _write_predictions(self, ds, root, perturb=False):
        palette = davis_palette()
        for i, labels in enumerate(ds.annotations):
            arr = np.asarray(labels, dtype=np.uint8).copy()
            if perturb and i == 0:
                arr[:] = 0
            img = Image.fromarray(arr, mode="P")
            img.putpalette(palette.flatten().tolist())
            out = root / ds.name
            out.mkdir(parents=True, exist_ok=True)
            img.save(out / f"{i:05d}.png")

    def test_perfect_predictions(self, static_spec, tmp_path):
        ds = generate_synthetic(static_spec)
        write_davis_dataset(ds, tmp_path / "gt")
        self._write_predictions(ds, tmp_path / "pred")
        result = score_predictions(tmp_path / "pred", tmp_path / "gt")
        assert result["overall"] == {"j": 1.0, "f": 1.0, "jf": 1.0}

    def test_imperfect_predictions_lower_score(self, static_spec, tmp_path):
        ds = generate_synthetic(static_spec)
        write_davis_dataset(ds, tmp_path / "gt")
        self._write_predictions(ds, tmp_path / "pred", perturb=True)
        result = score_predictions(tmp_path / "pred", tmp_path / "gt")
        assert result["overall"]["jf"] < 1.0
        assert result["per_sequence"]["static"]["jf"] < 1.0

    def test_missing_predictions_rejected(self, static_spec, tmp_path):
        ds = generate_synthetic(static_spec)
        write_davis_dataset(ds, tmp_path / "gt")
        from ivosbench.dataset import DatasetError

        with pytest.raises(DatasetError):
            score_predictions(tmp_path / "pred", tmp_path / "gt")


class TestRunConfig:
    def test_defaults_follow_protocol(self):
        config = RunConfig()
        assert config.max_rounds == 8
        assert config.max_clicks == 3
        assert config.memory_stride == 5

    def test_validation(self):
        with pytest.raises(ValueError):
            RunConfig(strategy="f4")
        with pytest.raises(ValueError):
            RunConfig(max_rounds=0)
        with pytest.raises(ValueError):
            RunConfig(propagator="teleport")

    def test_auto_click_radius_scales_with_diagonal(self):
        assert auto_click_radius(854, 480) == 5
        assert auto_click_radius(64, 48) == 1
        assert auto_click_radius(1708, 960) == 10
