import json
import subprocess
import sys

import numpy as np
import pytest

from wifipain.cli import main
from wifipain.pain import ChannelAllocation, PainMatrix, dump_json, read_pain
from wifipain.synth import SynthConfig, generate

FAST = {"steps_per_phase": 300}


@pytest.fixture(scope="module")
def fixture_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("synth")
    generate(SynthConfig(n_homes=8, seed=5)).write(out)
    return out


def write(tmp_path, name, doc):
    path = tmp_path / name
    dump_json(doc, path)
    return str(path)


def run(argv, capsys):
    code = main(argv)
    return code, capsys.readouterr()


class TestEstimate:
    def test_reproduces_ground_truth(self, fixture_dir, tmp_path, capsys):
        out = tmp_path / "p.json"
        code, _ = run(["estimate", "--usage", str(fixture_dir / "usage_day_1.csv"),
                       "--scans", str(fixture_dir / "scans.csv"),
                       "--macmap", str(fixture_dir / "macmap.csv"), "--out", str(out)], capsys)
        assert code == 0
        np.testing.assert_allclose(read_pain(out).values,
                                   read_pain(fixture_dir / "ground_truth_p.json").values, atol=1e-9)
        for role in ("U", "S", "Sb"):
            assert (tmp_path / f"p_{role}.json").exists()

    def test_empty_scans(self, fixture_dir, tmp_path, capsys):
        scans = tmp_path / "scans.csv"
        scans.write_text("scanner_home_id,sensed_mac,snr_db,timestamp\n")
        out = tmp_path / "p.json"
        code, _ = run(["estimate", "--usage", str(fixture_dir / "usage_day_1.csv"),
                       "--scans", str(scans), "--macmap", str(fixture_dir / "macmap.csv"),
                       "--out", str(out)], capsys)
        assert code == 0
        assert not read_pain(out).values.any()

    def test_evening_three_values_per_day(self, fixture_dir, tmp_path, capsys):
        cfg = write(tmp_path, "cfg.json", {"window": "evening"})
        usage = [str(fixture_dir / f"usage_day_{k}.csv") for k in (1, 2, 3, 4)]
        code, cap = run(["estimate", "--usage", *usage, "--scans", str(fixture_dir / "scans.csv"),
                         "--macmap", str(fixture_dir / "macmap.csv"), "--config", cfg,
                         "--out", str(tmp_path / "p.json")], capsys)
        assert code == 0
        assert json.loads(cap.out)["hours_per_home"] == 3 * 4

    def test_parse_error_exit_2(self, fixture_dir, tmp_path, capsys):
        bad = tmp_path / "u.csv"
        bad.write_text("home_id,timestamp,airtime_pct\n101,yesterday,3\n")
        code, cap = run(["estimate", "--usage", str(bad), "--scans", str(fixture_dir / "scans.csv"),
                         "--macmap", str(fixture_dir / "macmap.csv"),
                         "--out", str(tmp_path / "p.json")], capsys)
        assert code == 2
        assert "u.csv:2" in cap.err

    def test_unknown_home_exit_2(self, fixture_dir, tmp_path, capsys):
        bad = tmp_path / "u.csv"
        bad.write_text("home_id,timestamp,airtime_pct\n999,2021-08-21T20:00:00-04:00,3\n")
        code, cap = run(["estimate", "--usage", str(bad), "--scans", str(fixture_dir / "scans.csv"),
                         "--macmap", str(fixture_dir / "macmap.csv"),
                         "--out", str(tmp_path / "p.json")], capsys)
        assert code == 2
        assert "999" in cap.err


class TestSolveEvaluate:
    @pytest.mark.parametrize("solver", ["anneal", "exhaustive", "bnb", "cd"])
    def test_separable_pair(self, solver, tmp_path, capsys):
        pain = write(tmp_path, "p.json", PainMatrix([[0, 5.0], [5.0, 0]]).to_dict())
        code, cap = run(["solve", "--pain", pain, "--channels", "2", "--solver", solver,
                         "--out", str(tmp_path / "r.json")], capsys)
        assert code == 0
        assert float(cap.out) == 0.0

    def test_anneal_not_below_exhaustive(self, tmp_path, capsys):
        rng = np.random.default_rng(8)
        P = rng.uniform(size=(8, 8))
        np.fill_diagonal(P, 0)
        pain = write(tmp_path, "p.json", PainMatrix(P).to_dict())
        cfg = write(tmp_path, "c.json", FAST)
        _, a = run(["solve", "--pain", pain, "--solver", "anneal", "--seed", "3", "--config", cfg],
                   capsys)
        _, e = run(["solve", "--pain", pain, "--solver", "exhaustive"], capsys)
        assert float(a.out) >= float(e.out)

    def test_same_seed_same_bytes(self, tmp_path, capsys):
        rng = np.random.default_rng(2)
        P = rng.uniform(size=(6, 6))
        np.fill_diagonal(P, 0)
        pain = write(tmp_path, "p.json", PainMatrix(P).to_dict())
        cfg = write(tmp_path, "c.json", FAST)
        for name in ("a.json", "b.json"):
            run(["solve", "--pain", pain, "--seed", "4", "--config", cfg,
                 "--out", str(tmp_path / name)], capsys)
        assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()

    def test_evaluate_matches_report(self, tmp_path, capsys):
        rng = np.random.default_rng(3)
        P = rng.uniform(size=(7, 7))
        np.fill_diagonal(P, 0)
        pain = write(tmp_path, "p.json", PainMatrix(P).to_dict())
        report = tmp_path / "r.json"
        run(["solve", "--pain", pain, "--solver", "bnb", "--out", str(report)], capsys)
        code, cap = run(["evaluate", "--pain", pain, "--allocation", str(report)], capsys)
        assert code == 0
        doc = json.loads(cap.out)
        assert doc["total"] == json.loads(report.read_text())["objective"]
        assert sum(doc["per_home"].values()) == pytest.approx(doc["total"], rel=1e-12)

    def test_evaluate_all_same_channel(self, tmp_path, capsys):
        P = np.array([[0, 1, 2], [3, 0, 4], [5, 6, 0]], float)
        pain = write(tmp_path, "p.json", PainMatrix(P).to_dict())
        alloc = write(tmp_path, "a.json", ChannelAllocation.from_channels([1, 1, 1], 2).to_dict())
        _, cap = run(["evaluate", "--pain", pain, "--allocation", alloc], capsys)
        assert json.loads(cap.out)["total"] == 21.0

    def test_evaluate_dimension_mismatch(self, tmp_path, capsys):
        pain = write(tmp_path, "p.json", PainMatrix(np.zeros((3, 3))).to_dict())
        alloc = write(tmp_path, "a.json", ChannelAllocation.from_channels([0, 1], 2).to_dict())
        code, _ = run(["evaluate", "--pain", pain, "--allocation", alloc], capsys)
        assert code == 2

    def test_exhaustive_too_large_exit_3(self, tmp_path, capsys):
        pain = write(tmp_path, "p.json", PainMatrix(np.zeros((20, 20))).to_dict())
        code, cap = run(["solve", "--pain", pain, "--solver", "exhaustive"], capsys)
        assert code == 3
        assert "bnb" in cap.err

    def test_bad_channels_exit_1(self, tmp_path, capsys):
        pain = write(tmp_path, "p.json", PainMatrix(np.zeros((2, 2))).to_dict())
        code, _ = run(["solve", "--pain", pain, "--channels", "1"], capsys)
        assert code == 1

    def test_usage_error_exit_1(self, capsys):
        with pytest.raises(SystemExit) as info:
            main(["solve"])
        assert info.value.code == 1

    def test_missing_file_exit_2(self, tmp_path, capsys):
        code, _ = run(["evaluate", "--pain", str(tmp_path / "nope.json"),
                       "--allocation", str(tmp_path / "nope.json")], capsys)
        assert code == 2


def test_module_entry_point_version():
    out = subprocess.run([sys.executable, "-m", "wifipain", "--version"],
                         capture_output=True, text=True)
    assert out.returncode == 0
    assert out.stdout.startswith("wifipain ")


def test_synth_subcommand(tmp_path, capsys):
    cfg = write(tmp_path, "s.json", {"n_homes": 4, "layout": "grid", "layout_shape": [2, 2],
                                     "sensing_radius": 1.0, "start_date": "2021-08-21"})
    code, _ = run(["synth", "--config", cfg, "--seed", "2", "--out", str(tmp_path / "d")], capsys)
    assert code == 0
    assert (tmp_path / "d" / "experiment.json").exists()
