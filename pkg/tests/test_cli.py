import json

import numpy as np
import pytest

from specnorm.cli import main


class TestRender:
    def test_writes_image_and_sidecars(self, tmp_path):
        rc = main(["render", "--out", str(tmp_path), "--name", "scene",
                   "--sigma", "0", "--seed", "1"])
        assert rc == 0
        for suffix in (".pgm", ".png", ".params.json", ".gt.json"):
            assert (tmp_path / f"scene{suffix}").exists()
        gt = json.loads((tmp_path / "scene.gt.json").read_text())
        assert len(gt["normal"]) == 3
        params = json.loads((tmp_path / "scene.params.json").read_text())
        assert params["noise_sigma"] == 0.0
        assert params["seed"] == 1


class TestTrial:
    def test_json_output(self, capsys):
        rc = main(["trial", "--sigma", "0", "--seed", "0"])
        assert rc == 0
        out = json.loads(capsys.readouterr().out)
        assert out["success"]
        assert out["error_deg"] < 0.1

    def test_failure_exit_code(self, capsys):
        rc = main(["trial", "--isovalue", "1.5", "--seed", "0"])
        assert rc == 1
        out = json.loads(capsys.readouterr().out)
        assert out["reason"] == "empty isophote"


class TestSweep:
    def test_csv_written(self, tmp_path, capsys):
        rc = main(["sweep", "--param", "sigma", "--values", "0,0.05",
                   "--trials", "2", "--out", str(tmp_path), "--seed", "0"])
        assert rc == 0
        data = (tmp_path / "sweep_sigma.csv").read_text().splitlines()
        assert data[0].startswith("swept_param,")
        assert len(data) == 5  # header + 2 values x 2 trials
        assert (tmp_path / "sweep_sigma.summary.csv").exists()


class TestReconstruct:
    def test_round_trip_on_rendered_scene(self, tmp_path, capsys):
        main(["render", "--out", str(tmp_path), "--name", "scene",
              "--sigma", "0", "--bits", "16"])
        k_path = tmp_path / "k.json"
        gt = json.loads((tmp_path / "scene.gt.json").read_text())
        k_path.write_text(json.dumps(gt["intrinsics"]))
        rc = main(["reconstruct", str(tmp_path / "scene.pgm"), str(k_path),
                   "--roi", "0,0,406,406", "--blur", "0", "--out",
                   str(tmp_path), "--overlay"])
        assert rc == 0
        results = json.loads((tmp_path / "scene.results.json").read_text())
        (res,) = results
        assert res["success"]
        normals = np.array(res["normals"])
        truth = np.array(gt["normal"])
        errs = np.degrees(np.arccos(np.clip(normals @ truth, -1, 1)))
        assert errs.min() < 0.2
        assert (tmp_path / "scene.overlay.png").exists()


class TestSelftest:
    def test_fast_mode_passes(self, capsys):
        rc = main(["selftest", "--fast"])
        assert rc == 0
        out = capsys.readouterr().out
        assert "PASS" in out and "FAIL" not in out


class TestVersionAndErrors:
    def test_version(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["--version"])
        assert exc.value.code == 0

    def test_unknown_sweep_param(self):
        with pytest.raises(SystemExit):
            main(["sweep", "--param", "bogus"])
