import json

import pytest

from blinddeconv.cli import (
    EXIT_GENERATION,
    EXIT_INPUT,
    EXIT_NONCONVERGED,
    EXIT_OK,
    EXIT_SELFTEST,
    EXIT_USAGE,
    SWEEP_HEADER,
    SweepConfig,
    load_sweep_config,
    main,
    run_sweep,
    sweep_csv,
)


@pytest.fixture
def signal_file(tmp_path):
    path = tmp_path / "pair.json"
    assert main(["gen", "--l1", "2", "--l2", "3", "--min-delta", "0.3", "--seed", "1", "--out", str(path)]) == EXIT_OK
    return path


@pytest.fixture
def measurement_file(tmp_path, signal_file):
    path = tmp_path / "meas.json"
    assert main(["measure", str(signal_file), "--sigma", "0", "--out", str(path)]) == EXIT_OK
    return path


class TestGenMeasure:
    def test_gen_stdout(self, capsys):
        assert main(["gen", "--l1", "2", "--l2", "2", "--seed", "3"]) == EXIT_OK
        obj = json.loads(capsys.readouterr().out)
        assert len(obj["x1"]) == 2 and len(obj["x2"]) == 2

    def test_gen_deterministic(self, capsys):
        main(["gen", "--l1", "3", "--l2", "2", "--seed", "5"])
        first = capsys.readouterr().out
        main(["gen", "--l1", "3", "--l2", "2", "--seed", "5"])
        assert capsys.readouterr().out == first

    def test_generation_failure(self):
        assert main(["gen", "--l1", "6", "--l2", "6", "--min-delta", "50"]) == EXIT_GENERATION

    def test_measure(self, measurement_file):
        obj = json.loads(measurement_file.read_text())
        assert (obj["L1"], obj["L2"]) == (2, 3)
        assert len(obj["b"]) == 4 * 5 - 4
        assert obj["noise_norm"] == 0.0

    def test_missing_file(self, tmp_path):
        assert main(["measure", str(tmp_path / "nope.json")]) == EXIT_INPUT

    def test_malformed_file(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text('{"x1": [0, 1], "x2": [1]}')
        assert main(["measure", str(bad)]) == EXIT_INPUT

    def test_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            main(["gen", "--l1", "2"])
        assert exc.value.code == EXIT_USAGE

    def test_negative_sigma(self, signal_file):
        assert main(["measure", str(signal_file), "--sigma", "-1"]) == EXIT_USAGE


class TestBoundsCertify:
    def test_bounds(self, signal_file, capsys):
        assert main(["bounds", str(signal_file), "--samples", "200"]) == EXIT_OK
        obj = json.loads(capsys.readouterr().out)
        assert obj["gamma_bound"] <= obj["gamma_bruteforce"]
        assert obj["normalization"] == "x / |x|_2"

    def test_certify(self, signal_file, capsys):
        assert main(["certify", str(signal_file)]) == EXIT_OK
        obj = json.loads(capsys.readouterr().out)
        assert obj["passed"] is True
        assert obj["rank_W"] == obj["N"] - 1
        assert obj["omega_l1"] <= obj["N"]


class TestSolve:
    def test_with_ground_truth(self, measurement_file, signal_file, tmp_path):
        out = tmp_path / "sol.json"
        code = main(["solve", str(measurement_file), "--ground-truth", str(signal_file), "--out", str(out)])
        assert code == EXIT_OK
        obj = json.loads(out.read_text())
        assert obj["converged"] is True
        assert obj["matrix_error"] <= 1e-4
        assert len(obj["x1_hat"]) == 2 and len(obj["x2_hat"]) == 3

    def test_strict_nonconverged(self, measurement_file):
        assert main(["solve", str(measurement_file), "--max-iters", "1", "--strict"]) == EXIT_NONCONVERGED

    def test_nonstrict_nonconverged(self, measurement_file, capsys):
        assert main(["solve", str(measurement_file), "--max-iters", "1"]) == EXIT_OK
        assert json.loads(capsys.readouterr().out)["matrix_error"] is None

    def test_bad_tolerance(self, measurement_file):
        assert main(["solve", str(measurement_file), "--tol", "0"]) == EXIT_INPUT

    def test_ground_truth_mismatch(self, measurement_file, tmp_path):
        other = tmp_path / "other.json"
        main(["gen", "--l1", "3", "--l2", "3", "--out", str(other)])
        assert main(["solve", str(measurement_file), "--ground-truth", str(other)]) == EXIT_INPUT


class TestSweep:
    ARGS = ["sweep", "--l1", "2", "--l2", "2", "--trials", "2", "--sigma", "1e-3", "--sigma", "1e-2"]

    def test_stdout(self, capsys):
        assert main(self.ARGS) == EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert lines[0].split(",") == SWEEP_HEADER
        assert len(lines) == 1 + 2 * 2
        assert all(line.endswith("true") for line in lines[1:])

    def test_jobs_do_not_change_output(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        main(self.ARGS + ["--out", str(a)])
        main(self.ARGS + ["--out", str(b), "--jobs", "2"])
        assert a.read_bytes() == b.read_bytes()

    def test_toml_config(self, tmp_path):
        cfg = tmp_path / "sweep.toml"
        cfg.write_text('L1 = 2\nL2 = 2\ntrials = 1\nsigmas = [1e-3]\nbase_seed = 4\n')
        config = load_sweep_config(str(cfg))
        assert config == SweepConfig(L1=2, L2=2, trials=1, sigmas=(1e-3,), base_seed=4)

    def test_json_config_and_override(self, tmp_path, capsys):
        cfg = tmp_path / "sweep.json"
        cfg.write_text(json.dumps({"L1": 2, "L2": 2, "trials": 3, "sigmas": [1e-3]}))
        assert main(["sweep", "--config", str(cfg), "--trials", "1"]) == EXIT_OK
        assert len(capsys.readouterr().out.splitlines()) == 2

    @pytest.mark.parametrize(
        "text", ['{"L1": 2, "bogus": 1}', "[1, 2]", "{not json", '{"trials": 0}']
    )
    def test_bad_config(self, tmp_path, text):
        cfg = tmp_path / "bad.json"
        cfg.write_text(text)
        assert main(["sweep", "--config", str(cfg)]) == EXIT_INPUT

    def test_csv_formatting(self):
        rows = [[1, 2, 2, None, 0.5, 1e-3, 0.1, 0.2, 0.3, 4.0, None, True]]
        text = sweep_csv(rows)
        assert text.splitlines()[1] == "1,2,2,,0.5,0.001,0.10000000000000001,0.20000000000000001,0.29999999999999999,4,,true"

    def test_run_sweep_rows(self):
        rows = run_sweep(SweepConfig(L1=2, L2=2, trials=2, sigmas=(0.0,)))
        assert [r[0] for r in rows] == [0, 1]


class TestSelftest:
    def test_passes(self, capsys):
        assert main(["selftest"]) == EXIT_OK
        assert capsys.readouterr().out.strip().endswith("selftest: PASS")

    def test_failure_code(self, monkeypatch):
        import blinddeconv.selftest as st

        monkeypatch.setitem(st.SUITES, "broken", lambda rng: iter([("always fails", False)]))
        assert main(["selftest"]) == EXIT_SELFTEST
