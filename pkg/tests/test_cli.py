import json

import numpy as np
import pytest

from semsample.cli import EXIT_DATA, EXIT_OK, EXIT_USAGE, main


def run(*args):
    return main(list(args))


def read_indices(path):
    return [int(x) for x in path.read_text().split()]


@pytest.fixture
def scene_set(tmp_path):
    out = tmp_path / "scenes"
    code = run(
        "gen", "--out", str(out), "--scenes", "3", "--seed", "40",
        "--points", "256", "--objects", "2",
    )
    assert code == EXIT_OK
    return out


class TestGen:
    def test_identical_reruns(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            assert run("gen", "--out", str(out), "--scenes", "2", "--seed", "1",
                       "--points", "128", "--objects", "2") == EXIT_OK
        for name in ("manifest.json", "scene_0000.txt", "scene_0001.txt"):
            assert (a / name).read_bytes() == (b / name).read_bytes()

    def test_zero_scenes_usage_error(self, tmp_path):
        assert run("gen", "--out", str(tmp_path / "x"), "--scenes", "0") == EXIT_USAGE

    def test_manifest_hash_tracks_flags(self, tmp_path):
        run("gen", "--out", str(tmp_path / "a"), "--scenes", "1", "--points", "128", "--objects", "2")
        run("gen", "--out", str(tmp_path / "b"), "--scenes", "1", "--points", "129", "--objects", "2")
        ha = json.loads((tmp_path / "a" / "manifest.json").read_text())["config_hash"]
        hb = json.loads((tmp_path / "b" / "manifest.json").read_text())["config_hash"]
        assert ha != hb

    def test_timestamps_only_in_sidecar_log(self, tmp_path):
        out = tmp_path / "s"
        run("gen", "--out", str(out), "--scenes", "1", "--points", "128", "--objects", "2")
        assert (out / "run.log").exists()


class TestSampleAndEval:
    def test_full_budget_is_permutation(self, scene_set, tmp_path):
        scene = scene_set / "scene_0000.txt"
        idx_file = tmp_path / "idx.txt"
        code = run(
            "sample", "--scene", str(scene), "--method", "fps", "-m", "256",
            "--indices-out", str(idx_file),
        )
        assert code == EXIT_OK
        assert sorted(read_indices(idx_file)) == list(range(256))

    def test_sfps_requires_scores(self, scene_set, tmp_path):
        code = run(
            "sample", "--scene", str(scene_set / "scene_0000.txt"), "--method", "sfps",
            "-m", "16", "--indices-out", str(tmp_path / "i.txt"),
        )
        assert code == EXIT_USAGE

    def test_diagnostics_written(self, scene_set, tmp_path):
        idx_file = tmp_path / "idx.txt"
        diag_file = tmp_path / "diag.json"
        code = run(
            "sample", "--scene", str(scene_set / "scene_0000.txt"), "--method", "sfps",
            "-m", "16", "--scores", "oracle", "--indices-out", str(idx_file),
            "--diagnostics-out", str(diag_file),
        )
        assert code == EXIT_OK
        record = json.loads(diag_file.read_text())
        assert record["method"] == "sfps" and record["m"] == 16
        assert len(record["per_step_weighted_distance"]) == 16

    def test_eval_matches_bench(self, scene_set, tmp_path, capsys):
        csv_path = tmp_path / "per_scene.csv"
        assert run(
            "bench", "--scenes", str(scene_set), "--samplers", "sfps", "--gammas", "1",
            "--budgets", "32", "--scores", "oracle", "--per-scene", str(csv_path),
        ) == EXIT_OK
        capsys.readouterr()

        idx_file = tmp_path / "idx.txt"
        run(
            "sample", "--scene", str(scene_set / "scene_0001.txt"), "--method", "sfps",
            "-m", "32", "--gamma", "1", "--scores", "oracle",
            "--indices-out", str(idx_file),
        )
        capsys.readouterr()
        assert run("eval", "--scene", str(scene_set / "scene_0001.txt"),
                   "--indices", str(idx_file)) == EXIT_OK
        ev = json.loads(capsys.readouterr().out)
        row = next(
            line.split(",")
            for line in csv_path.read_text().splitlines()
            if ",scene_0001," in line
        )
        assert float(row[6]) == ev["foreground_rate"]
        assert float(row[7]) == ev["point_recall"]

    def test_scene_and_kitti_mutually_exclusive(self, tmp_path):
        assert run("sample", "--method", "fps", "-m", "4",
                   "--indices-out", str(tmp_path / "i.txt")) == EXIT_USAGE

    def test_kitti_input(self, tmp_path, rng):
        from semsample import PointCloud, write_kitti_bin

        path = tmp_path / "scan.bin"
        write_kitti_bin(path, PointCloud(rng.uniform(-5, 5, (32, 3))))
        idx_file = tmp_path / "idx.txt"
        assert run("sample", "--kitti", str(path), "--method", "fps", "-m", "8",
                   "--indices-out", str(idx_file)) == EXIT_OK
        assert len(read_indices(idx_file)) == 8

    def test_missing_scene_file_is_data_error(self, tmp_path):
        assert run("sample", "--scene", str(tmp_path / "missing.txt"), "--method", "fps",
                   "-m", "4", "--indices-out", str(tmp_path / "i.txt")) == EXIT_DATA


class TestBench:
    def test_table_output(self, scene_set, capsys):
        assert run(
            "bench", "--scenes", str(scene_set), "--samplers", "fps,sfps",
            "--gammas", "0,1", "--budgets", "64,32", "--scores", "oracle",
        ) == EXIT_OK
        out = capsys.readouterr().out
        assert "sfps(gamma=1)" in out and "fps" in out
        # five rows per budget level: fps + sfps gamma sweep of 2, over 2 levels
        assert out.count("\n") >= 8

    def test_unknown_sampler_rejected(self, scene_set):
        assert run("bench", "--scenes", str(scene_set), "--samplers", "magic") == EXIT_USAGE

    def test_unknown_flag_rejected(self, scene_set):
        assert run("bench", "--scenes", str(scene_set), "--frobnicate") == EXIT_USAGE

    def test_csv_written(self, scene_set, tmp_path, capsys):
        csv_path = tmp_path / "out.csv"
        assert run(
            "bench", "--scenes", str(scene_set), "--samplers", "fps",
            "--budgets", "32", "--csv", str(csv_path),
        ) == EXIT_OK
        capsys.readouterr()
        lines = csv_path.read_text().strip().splitlines()
        assert lines[0].startswith("method,level,budget")
        assert len(lines) == 2

    def test_reruns_byte_identical(self, scene_set, tmp_path, capsys):
        outs = []
        for name in ("r1.csv", "r2.csv"):
            path = tmp_path / name
            assert run(
                "bench", "--scenes", str(scene_set), "--samplers", "fps,sfps",
                "--gammas", "1", "--budgets", "32", "--scores", "oracle",
                "--csv", str(path),
            ) == EXIT_OK
            outs.append(path.read_bytes())
        capsys.readouterr()
        assert outs[0] == outs[1]


class TestEnvDefaultDir:
    def test_relative_paths_resolve_under_data_dir(self, tmp_path, monkeypatch):
        monkeypatch.setenv("SEMSAMPLE_DATA_DIR", str(tmp_path))
        assert run("gen", "--out", "nested/scenes", "--scenes", "1",
                   "--points", "128", "--objects", "2") == EXIT_OK
        assert (tmp_path / "nested" / "scenes" / "manifest.json").exists()
