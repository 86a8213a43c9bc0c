from decimation import AlgorithmSettings, run_trial
from exp_harness import write_trace
from formula import CnfFormula
from main import EXIT_CONFIG, EXIT_IO, EXIT_OK, EXIT_REPRODUCIBILITY, main
from service.report import read_table


def test_sweep_run(workdir):
    out = workdir / "sweep.csv"
    code = main(["--n", "15", "--r", "1.0", "--trials", "2", "--omega", "5", "--out", str(out)])
    assert code == EXIT_OK
    assert len(read_table(out)) == 1
    assert (workdir / "sweep_trials.csv").exists()


def test_probe_run(workdir):
    out = workdir / "bias.csv"
    argv = ["--n", "15", "--probe", "bias", "--samples", "2", "--t_values", "0,3", "--out", str(out)]
    assert main(argv) == EXIT_OK
    assert list(read_table(out)["t"]) == [0, 3]


def test_config_errors(workdir):
    assert main(["--r", "2.0", "--m", "5"]) == EXIT_CONFIG
    assert main(["--config", str(workdir / "missing.env")]) == EXIT_CONFIG
    assert main(["--n", "4", "--r", "10", "--out", str(workdir / "x.csv")]) == EXIT_CONFIG


def test_replay_exit_codes(workdir):
    f = CnfFormula.from_clauses(3, [[1, 2], [-2, 3], [-3]])
    algorithm = AlgorithmSettings()
    path = write_trace(workdir / "t.json", f, algorithm, 0, run_trial(f, algorithm, 0))
    assert main(["--replay", str(path)]) == EXIT_OK
    path.write_text(path.read_text().replace('"bit": true', '"bit": false', 1))
    assert main(["--replay", str(path)]) == EXIT_REPRODUCIBILITY
    assert main(["--replay", str(workdir / "gone.json")]) == EXIT_IO
