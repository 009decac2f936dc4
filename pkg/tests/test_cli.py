import json

import pytest

from cli.dispatch import EXIT_OK, EXIT_RUNTIME, EXIT_VALIDATION, dispatch


def run(capsys, *argv):
    code = dispatch(list(argv))
    out = capsys.readouterr().out
    return code, json.loads(out) if code == EXIT_OK and out.strip() else None


@pytest.fixture(scope="module")
def cli_dataset(tmp_path_factory):
    out = tmp_path_factory.mktemp("cli_data")
    code = dispatch([
        "synth", "--task", "layer-select", "--out", str(out), "--n", "40",
        "--layers", "5", "--dim", "4", "--frames", "6", "--seed", "9",
        "--report", str(out / "synth.json"),
    ])
    assert code == EXIT_OK
    return out


def train_args(directory, *extra):
    return [
        "train",
        "--train-manifest", str(directory / "train.jsonl"),
        "--test-manifest", str(directory / "test.jsonl"),
        "--interface", "weighted-sum",
        "--epochs", "3", "--batch", "8", "--lr", "0.01", "--seed", "4",
        *extra,
    ]


# --- params -------------------------------------------------------------------

@pytest.mark.parametrize("interface,extra,expected", [
    ("weighted-sum", [], 13),
    ("concat-proj", [], 7668480),
    ("group-ws", ["--groups", "3"], 13 + 3 * 768 * 768 + 768),
    ("pca-concat", [], 0),
    ("cls-pool", [], 5514752),
    ("hier-conv", [], 5899776),
])
def test_params_report(capsys, interface, extra, expected):
    code, report = run(capsys, "params", "--interface", interface, "--layers", "13", "--dim", "768", *extra)
    assert code == EXIT_OK
    assert report["param_count"] == expected
    assert report["interface"] == interface


def test_params_reports_hierconv_schedule(capsys):
    _, report = run(capsys, "params", "--interface", "hier-conv", "--layers", "13", "--dim", "8")
    assert report["param_count"] == 656
    assert report["depth"] == 2
    assert len(report["schedule"]) == 3


def test_invalid_configuration_exits_one(capsys):
    code = dispatch(["params", "--interface", "cls-pool", "--heads", "3", "--layers", "13", "--dim", "8"])
    assert code == EXIT_VALIDATION
    assert "error" in capsys.readouterr().err


# --- usage --------------------------------------------------------------------

@pytest.mark.parametrize("argv", [
    ["frobnicate"],
    ["params", "--interface", "weighted-sum", "--layers", "13", "--dim", "8", "--bogus"],
    ["params", "--interface", "mean-pool", "--layers", "13", "--dim", "8"],
    ["params", "--interface", "weighted-sum"],
    [],
])
def test_bad_usage_exits_one(capsys, argv):
    assert dispatch(argv) == EXIT_VALIDATION


def test_help_exits_zero(capsys):
    assert dispatch(["--help"]) == EXIT_OK
    assert "layeragg" in capsys.readouterr().out


# --- gradcheck and bench ------------------------------------------------------

def test_gradcheck_passes(capsys):
    code, report = run(capsys, "gradcheck", "--interface", "hier-conv")
    assert code == EXIT_OK
    assert report["passed"] is True
    assert len(report["results"]) == 2


def test_gradcheck_failure_exits_two(capsys, monkeypatch):
    from interfaces import concat_proj

    original = concat_proj.backward

    def skewed(*args, **kwargs):
        grads, grad_input = original(*args, **kwargs)
        return {name: 2.0 * g for name, g in grads.items()}, grad_input

    monkeypatch.setattr(concat_proj, "backward", skewed)
    assert dispatch(["gradcheck", "--interface", "concat-proj"]) == EXIT_RUNTIME
    report = json.loads(capsys.readouterr().out)
    assert report["passed"] is False


def test_bench_report(capsys):
    code, report = run(capsys, "bench", "--interface", "cls-pool", "--layers", "5", "--dim", "8", "--frames", "10", "--iters", "2")
    assert code == EXIT_OK
    assert set(report) == {"interface", "iterations", "total_seconds", "frames_per_second"}
    assert report["iterations"] == 2


# --- synth, train, eval -------------------------------------------------------

def test_synth_report(cli_dataset):
    report = json.loads((cli_dataset / "synth.json").read_text())
    assert report["records"] == 40
    assert (report["train_records"], report["test_records"]) == (32, 8)
    assert report["spec"]["signal_layers"] == [3]
    assert (cli_dataset / "utt_00039.lif").exists()


def test_synth_collision_reports_ceiling(capsys, tmp_path):
    code, report = run(capsys, "synth", "--task", "collision", "--out", str(tmp_path), "--n", "4")
    assert code == EXIT_OK
    assert report["weighted_sum_ceiling"] == pytest.approx(0.579, abs=0.005)


def test_synth_rejects_bad_signal_layers(capsys, tmp_path):
    code = dispatch(["synth", "--task", "collision", "--out", str(tmp_path), "--n", "4", "--signal-layers", "3,x"])
    assert code == EXIT_VALIDATION


def test_train_then_eval(capsys, cli_dataset, tmp_path):
    model = tmp_path / "model.lim"
    code, report = run(capsys, *train_args(cli_dataset, "--model", str(model)))
    assert code == EXIT_OK
    assert len(report["epoch_losses"]) == 3
    assert report["total_params"] == 5 + 4 * 2 + 2
    assert "wall_clock_seconds" not in report

    code, result = run(capsys, "eval", "--manifest", str(cli_dataset / "test.jsonl"), "--model", str(model))
    assert code == EXIT_OK
    assert result["accuracy"] == report["test_accuracy"]
    assert result["count"] == 8


def test_identical_train_runs_write_identical_reports(cli_dataset, tmp_path):
    for name in ("a.json", "b.json"):
        assert dispatch(train_args(cli_dataset, "--report", str(tmp_path / name))) == EXIT_OK
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_timing_flag(capsys, cli_dataset):
    _, report = run(capsys, *train_args(cli_dataset, "--timing"))
    assert report["wall_clock_seconds"] >= 0.0


def test_missing_manifest_exits_one(capsys, tmp_path):
    code = dispatch([
        "train", "--train-manifest", str(tmp_path / "nope.jsonl"), "--test-manifest", str(tmp_path / "nope.jsonl"),
        "--interface", "weighted-sum",
    ])
    assert code == EXIT_VALIDATION


def test_corrupt_model_exits_one(capsys, cli_dataset, tmp_path):
    (tmp_path / "bad.lim").write_bytes(b"XXXX" + b"\x00" * 20)
    code = dispatch(["eval", "--manifest", str(cli_dataset / "test.jsonl"), "--model", str(tmp_path / "bad.lim")])
    assert code == EXIT_VALIDATION


def test_small_experiment(capsys, tmp_path):
    code, report = run(
        capsys, "experiment", "--out", str(tmp_path), "--interfaces", "weighted-sum,hier-conv",
        "--layers", "7", "--epochs", "1", "--n", "20", "--seed", "2",
    )
    assert code == EXIT_OK
    assert [row["interface"] for row in report["rows"]] == ["weighted-sum", "hier-conv", "weighted-sum+wide-head"]
    assert (tmp_path / "results.csv").exists()


def test_experiment_rejects_unknown_interface(capsys, tmp_path):
    code = dispatch(["experiment", "--out", str(tmp_path), "--interfaces", "weighted-sum,mean-pool"])
    assert code == EXIT_VALIDATION


def test_undecodable_manifest_exits_one(capsys, tmp_path):
    (tmp_path / "bad.jsonl").write_bytes(b"\xff\xfe garbage\n")
    code = dispatch([
        "train", "--train-manifest", str(tmp_path / "bad.jsonl"), "--test-manifest", str(tmp_path / "bad.jsonl"),
        "--interface", "weighted-sum",
    ])
    assert code == EXIT_VALIDATION
    assert "line 1" in capsys.readouterr().err


def test_main_exits_with_dispatch_code(capsys, monkeypatch):
    from cli.dispatch import main

    monkeypatch.setattr("sys.argv", ["layeragg", "--help"])
    with pytest.raises(SystemExit) as info:
        main()
    assert info.value.code == EXIT_OK
    assert "layeragg" in capsys.readouterr().out
