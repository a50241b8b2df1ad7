"""Session loop, benchmark artifacts, and event-log replay.

The CSV/JSON formats are pinned down to the byte here because downstream
tooling diffs them; replay equality is the batch-vs-incremental oracle.
"""

import json
import math
from pathlib import Path

import numpy as np
import pytest

from rosme.errors import CorruptLog, ParseError, ValidationError
from rosme.harness import (
    BenchmarkError,
    SessionConfig,
    aggregate,
    recorded_series,
    replay,
    run_benchmark,
    run_session,
    start_pose,
    write_csv,
)
from rosme.metrics import MetricSample, SessionSeries
from rosme.simkernel import DetectorConfig
from rosme.worldmodel import load_world


def short_cfg(**over) -> SessionConfig:
    base = dict(world="small_office", policy="frontier", seed=42, runs=2, duration=6.0)
    base.update(over)
    return SessionConfig(**base)


class TestSessionConfig:
    def test_validate_accepts_zero_duration(self):
        short_cfg(duration=0.0).validate()

    def test_validate_rejects_bad_fields(self):
        with pytest.raises(ValidationError):
            short_cfg(duration=-1.0).validate()
        with pytest.raises(ValidationError):
            short_cfg(runs=0).validate()
        with pytest.raises(ValidationError):
            short_cfg(dt=0.0).validate()
        with pytest.raises(ValidationError):
            short_cfg(sample_period=0.0).validate()
        with pytest.raises(ParseError):
            short_cfg(world="no_such_world").validate()

    def test_echo_omits_out_dir(self, tmp_path):
        echo = short_cfg(out_dir=str(tmp_path)).echo()
        assert "out_dir" not in echo
        assert echo["world"] == "small_office"
        assert echo["sensor"]["lidar_beams"] == 180


class TestStartPose:
    def test_center_free_cell_facing_east(self):
        world = load_world("small_office")
        pose = start_pose(world)
        assert pose.theta == 0.0
        res = world.resolution
        cx = int(pose.x / res)
        cy = int(pose.y / res)
        assert world.free_mask[cy, cx]
        # no free cell sits strictly closer to the room center
        mx = world.width * res / 2.0
        my = world.height * res / 2.0
        ys, xs = np.nonzero(world.free_mask)
        centers_x = (xs + 0.5) * res
        centers_y = (ys + 0.5) * res
        best = np.min((centers_x - mx) ** 2 + (centers_y - my) ** 2)
        here = (pose.x - mx) ** 2 + (pose.y - my) ** 2
        assert here <= best + 1e-12


class TestSessionLoop:
    def test_zero_duration_yields_single_zero_sample(self):
        result = run_session(short_cfg(duration=0.0, runs=1))
        for name in ("ori", "cori", "opi"):
            samples = result.series.samples[name]
            assert len(samples) == 1
            assert samples[0].t == 0.0
            assert samples[0].value == 0.0

    def test_sample_grid_and_forced_terminal_sample(self):
        result = run_session(short_cfg(duration=2.5, runs=1))
        times = [s.t for s in result.series.samples["ori"]]
        assert times == [0.0, 1.0, 2.0, 2.5]

    def test_series_tagged_with_run_and_policy(self):
        result = run_session(short_cfg(duration=1.0), run_id=3, seed=99)
        assert result.series.run_id == 3
        assert result.series.seed == 99
        assert result.series.policy == "frontier"

    def test_event_log_structure(self, tmp_path):
        log = tmp_path / "events.jsonl"
        run_session(short_cfg(duration=2.0, runs=1), log_path=log)
        lines = log.read_text().splitlines()
        records = [json.loads(line) for line in lines]
        header, *body, end = records
        assert header["kind"] == "header"
        assert header["version"] == 1
        assert header["seed"] == 42
        assert "out_dir" not in header
        assert end["kind"] == "end"
        assert end["lines"] == len(lines)
        kinds = {r["kind"] for r in body}
        assert {"pose", "scan", "metric"} <= kinds
        t_prev = 0.0
        for r in body:
            assert r["t"] + 1e-12 >= t_prev
            t_prev = r["t"]

    def test_detection_records_round_trip(self, tmp_path):
        log = tmp_path / "events.jsonl"
        run_session(short_cfg(duration=3.0, runs=1), log_path=log)
        detections = [
            json.loads(line)
            for line in log.read_text().splitlines()
            if '"detection"' in line
        ]
        assert detections  # the start view of small_office sees objects
        for d in detections:
            assert isinstance(d["object_id"], int)
            assert 0.0 <= d["confidence"] <= 1.0
            assert all(isinstance(p, int) for p in d["point_ids"])


class TestBenchmark:
    def test_seeds_are_base_plus_k(self, tmp_path):
        report = run_benchmark(short_cfg(out_dir=str(tmp_path)))
        assert [m["seed"] for m in report.run_meta] == [42, 43]
        for k in range(2):
            head = json.loads(
                (tmp_path / f"run_{k}.events.jsonl").read_text().splitlines()[0]
            )
            assert head["seed"] == 42 + k
            assert head["run"] == k

    def test_csv_format(self, tmp_path):
        run_benchmark(short_cfg(runs=1, duration=2.0, out_dir=str(tmp_path)))
        lines = (tmp_path / "run_0.csv").read_text().splitlines()
        assert lines[0] == "t,metric,value"
        rows = [line.split(",") for line in lines[1:]]
        for t, name, value in rows:
            float(t), float(value)
            assert len(t.split(".")[1]) == 6
            assert len(value.split(".")[1]) == 6
        keys = [(float(t), name) for t, name, _ in rows]
        assert keys == sorted(keys)
        assert keys[0] == (0.0, "cori")  # three metrics per time, name-sorted

    def test_report_json_shape(self, tmp_path):
        report = run_benchmark(short_cfg(out_dir=str(tmp_path)))
        on_disk = json.loads((tmp_path / "report.json").read_text())
        assert on_disk == report.to_json()
        assert set(on_disk) == {"config", "versions", "metrics", "finals", "runs"}
        for name in ("ori", "cori", "opi"):
            block = on_disk["metrics"][name]
            assert len(block["t"]) == len(block["mean"]) == len(block["std"])
            assert len(on_disk["finals"][name]) == 2

    def test_single_run_std_is_zero(self, tmp_path):
        report = run_benchmark(short_cfg(runs=1, duration=3.0))
        assert all(v == 0.0 for v in report.std["ori"])

    def test_aggregate_matches_independent_recompute(self, tmp_path):
        run_benchmark(short_cfg(duration=8.0, out_dir=str(tmp_path)))
        report = json.loads((tmp_path / "report.json").read_text())
        per_run = []
        for k in range(2):
            rows = {}
            lines = (tmp_path / f"run_{k}.csv").read_text().splitlines()[1:]
            for line in lines:
                t, name, value = line.split(",")
                rows.setdefault(name, []).append((float(t), float(value)))
            per_run.append(rows)
        for name in ("ori", "cori", "opi"):
            grid = report["metrics"][name]["t"]
            for j, t in enumerate(grid):
                held = []
                for rows in per_run:
                    v = 0.0
                    for st, sv in rows[name]:
                        if st <= t + 1e-12:
                            v = sv
                    held.append(v)
                mean = sum(held) / len(held)
                var = sum((h - mean) ** 2 for h in held) / len(held)
                assert abs(report["metrics"][name]["mean"][j] - mean) < 1e-12
                assert abs(report["metrics"][name]["std"][j] - math.sqrt(var)) < 1e-12

    def test_byte_identical_reruns(self, tmp_path):
        d1, d2 = tmp_path / "a", tmp_path / "b"
        run_benchmark(short_cfg(out_dir=str(d1)))
        run_benchmark(short_cfg(out_dir=str(d2)))
        for name in [p.name for p in d1.iterdir()]:
            assert (d1 / name).read_bytes() == (d2 / name).read_bytes()

    def test_run_failure_names_run_and_seed(self):
        cfg = short_cfg(policy="no_such_policy")
        with pytest.raises(BenchmarkError, match=r"run 0 \(seed 42\)"):
            run_benchmark(cfg)

    def test_preflight_validation(self):
        with pytest.raises(ValidationError):
            run_benchmark(short_cfg(runs=0))


class TestAggregate:
    def series(self, run_id, pts):
        s = SessionSeries(run_id=run_id, seed=run_id, policy="x")
        for t, v in pts:
            s.append(MetricSample(t, "ori", v))
        return s

    def test_union_grid_and_hold_last(self):
        a = self.series(0, [(0.0, 0.0), (1.0, 0.4)])
        b = self.series(1, [(0.0, 0.0), (2.0, 0.8)])
        grid, mean, std, finals = aggregate([a, b], ("ori",))
        assert grid == [0.0, 1.0, 2.0]
        # at t=1: a=0.4, b holds 0.0; at t=2: a holds 0.4, b=0.8
        assert mean["ori"] == pytest.approx([0.0, 0.2, 0.6])
        assert std["ori"][1] == pytest.approx(0.2)
        assert finals["ori"] == [0.4, 0.8]


class TestWriteCsv:
    def test_rows_sorted_by_time_then_name(self, tmp_path):
        s = SessionSeries(run_id=0, seed=0, policy="x")
        s.append(MetricSample(0.0, "zzz", 0.25))
        s.append(MetricSample(1.0, "zzz", 0.5))
        s.append(MetricSample(0.0, "aaa", 0.125))
        path = tmp_path / "out.csv"
        write_csv(s, path)
        assert path.read_text() == (
            "t,metric,value\n"
            "0.000000,aaa,0.125000\n"
            "0.000000,zzz,0.250000\n"
            "1.000000,zzz,0.500000\n"
        )


class TestReplay:
    @pytest.fixture()
    def log(self, tmp_path):
        path = tmp_path / "events.jsonl"
        run_session(
            short_cfg(duration=5.0, runs=1, policy="random"), log_path=path
        )
        return path

    def test_replay_equals_recorded_bit_exactly(self, log):
        recomputed = replay(log)
        recorded = recorded_series(log)
        for name in ("ori", "cori", "opi"):
            got = [(s.t, s.value) for s in recomputed.samples[name]]
            want = [(s.t, s.value) for s in recorded.samples[name]]
            assert got == want

    def test_zero_duration_log_replays_to_single_zero_sample(self, tmp_path):
        path = tmp_path / "zero.jsonl"
        run_session(short_cfg(duration=0.0, runs=1), log_path=path)
        series = replay(path)
        for name in ("ori", "cori", "opi"):
            assert [(s.t, s.value) for s in series.samples[name]] == [(0.0, 0.0)]

    def test_truncation_reports_last_line(self, log, tmp_path):
        text = log.read_text()
        cut = text[: int(len(text) * 0.6)].rsplit("\n", 1)[0] + "\n"
        broken = tmp_path / "cut.jsonl"
        broken.write_text(cut)
        lines = cut.count("\n")
        with pytest.raises(CorruptLog) as err:
            replay(broken)
        assert err.value.line == lines + 1  # the missing end marker

    def test_mid_record_truncation(self, log, tmp_path):
        lines = log.read_text().splitlines()
        broken = tmp_path / "cut.jsonl"
        broken.write_text("\n".join(lines[:10] + [lines[10][:20]]) + "\n")
        with pytest.raises(CorruptLog) as err:
            replay(broken)
        assert err.value.line == 11
        assert "line 11" in str(err.value)

    def test_tampered_metric_detected(self, log, tmp_path):
        lines = log.read_text().splitlines()
        out = []
        for line in lines:
            rec = json.loads(line)
            if rec["kind"] == "metric" and rec["t"] > 0 and rec["value"] > 0:
                rec["value"] = rec["value"] / 2.0
                line = json.dumps(rec, separators=(",", ":"))
            out.append(line)
        tampered = tmp_path / "tampered.jsonl"
        tampered.write_text("\n".join(out) + "\n")
        recomputed = replay(tampered)
        recorded = recorded_series(tampered)
        assert any(
            a.value != b.value
            for name in recorded.samples
            for a, b in zip(recomputed.samples[name], recorded.samples[name])
        )

    def test_empty_file(self, tmp_path):
        empty = tmp_path / "empty.jsonl"
        empty.write_text("")
        with pytest.raises(CorruptLog) as err:
            replay(empty)
        assert err.value.line == 1

    def test_missing_header(self, log, tmp_path):
        lines = log.read_text().splitlines()
        headless = tmp_path / "headless.jsonl"
        headless.write_text("\n".join(lines[1:]) + "\n")
        with pytest.raises(CorruptLog):
            replay(headless)

    def test_unsupported_version(self, log, tmp_path):
        lines = log.read_text().splitlines()
        head = json.loads(lines[0])
        head["version"] = 99
        lines[0] = json.dumps(head, separators=(",", ":"))
        bad = tmp_path / "v99.jsonl"
        bad.write_text("\n".join(lines) + "\n")
        with pytest.raises(CorruptLog):
            replay(bad)

    def test_record_after_end_marker(self, log, tmp_path):
        text = log.read_text()
        bad = tmp_path / "tail.jsonl"
        bad.write_text(text + '{"kind":"pose","t":9999.0,"x":0,"y":0,"theta":0}\n')
        with pytest.raises(CorruptLog) as err:
            replay(bad)
        assert err.value.line == text.count("\n") + 1

    def test_time_going_backwards(self, log, tmp_path):
        lines = log.read_text().splitlines()
        idx = next(
            i
            for i, l in enumerate(lines)
            if json.loads(l).get("t", 0.0) > 1.0
        )
        rec = json.loads(lines[idx])
        rec["t"] = 0.0
        lines[idx] = json.dumps(rec, separators=(",", ":"))
        bad = tmp_path / "back.jsonl"
        bad.write_text("\n".join(lines) + "\n")
        with pytest.raises(CorruptLog) as err:
            replay(bad)
        assert err.value.line == idx + 1

    def test_unknown_kind(self, log, tmp_path):
        lines = log.read_text().splitlines()
        lines.insert(2, '{"kind":"mystery","t":0.0}')
        bad = tmp_path / "kind.jsonl"
        bad.write_text("\n".join(lines) + "\n")
        with pytest.raises(CorruptLog) as err:
            replay(bad)
        assert err.value.line == 3

    def test_blank_line(self, log, tmp_path):
        lines = log.read_text().splitlines()
        lines.insert(5, "")
        bad = tmp_path / "blank.jsonl"
        bad.write_text("\n".join(lines) + "\n")
        with pytest.raises(CorruptLog) as err:
            replay(bad)
        assert err.value.line == 6


class TestPerfectDetectorPlumbing:
    def test_detector_override_reaches_the_detector(self):
        noisy = run_session(short_cfg(runs=1, duration=3.0, seed=7))
        perfect = run_session(
            short_cfg(
                runs=1, duration=3.0, seed=7, detector=DetectorConfig.perfect()
            )
        )
        n_conf = {
            r.object_id: r.best_confidence for r in noisy.store.records.values()
        }
        p_conf = {
            r.object_id: r.best_confidence for r in perfect.store.records.values()
        }
        assert p_conf and n_conf != p_conf
