import hashlib
import json
import time
from importlib import resources

import pytest

from wsptm.cli import EXIT_CHECKPOINT, EXIT_INPUT, EXIT_OK, main, parse_grid
from wsptm.exceptions import InputError


@pytest.fixture(scope="module")
def data():
    root = resources.files("wsptm") / "data"
    return str(root / "toy_corpus.tsv"), str(root / "toy_seeds.tsv")


def run(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def base_args(data, out):
    return ["--corpus", data[0], "--seeds", data[1], "--output-dir", str(out), "--stopwords", "none"]


class TestParseGrid:
    def test_integer_range(self):
        assert parse_grid("0..5", "P") == [0, 1, 2, 3, 4, 5]

    def test_step_range(self):
        assert parse_grid("0.1:0.3:0.1", "rho") == [0.1, 0.2, 0.3]

    def test_list(self):
        assert parse_grid("full,-LF", "components") == ["full", "-LF"]

    @pytest.mark.parametrize("text", ["", " , ", "a..b", "0:1:0"])
    def test_invalid(self, text):
        with pytest.raises(InputError):
            parse_grid(text, "rho")


class TestTrainEval:
    def test_train_is_fast_and_reproducible(self, data, tmp_path, capsys):
        # the output directory is part of the config snapshot, so reuse it
        digests = []
        for _ in range(2):
            start = time.perf_counter()
            code, out, _ = run(["train"] + base_args(data, tmp_path), capsys)
            assert code == EXIT_OK
            assert time.perf_counter() - start < 10
            digests.append(hashlib.sha256((tmp_path / "checkpoint.npz").read_bytes()).hexdigest())
        assert digests[0] == digests[1]
        trace = (tmp_path / "trace.csv").read_text().splitlines()
        assert trace[0] == "iter,objective,penalty"
        assert "rho = 0.9" in (tmp_path / "config.txt").read_text()

    def test_eval_report(self, data, tmp_path, capsys):
        out = tmp_path / "run"
        assert run(["train"] + base_args(data, out), capsys)[0] == EXIT_OK
        code, stdout, _ = run(["eval", str(out / "checkpoint.npz"), "--fold-in-iter", "5"], capsys)
        assert code == EXIT_OK
        report = json.loads(stdout)
        assert report == json.loads((out / "report.json").read_text())
        assert report["micro_f1"] >= 0.9
        assert report["config_snapshot"]["fold_in_iter"] == 5
        from dataclasses import fields
        from wsptm.config import RunConfig
        assert set(report["config_snapshot"]) == {f.name for f in fields(RunConfig)}

    def test_eval_matches_training_classification(self, data, tmp_path, capsys):
        import numpy as np
        from wsptm.checkpoint import load_checkpoint
        from wsptm.config import RunConfig
        from wsptm.pipeline import evaluation_ids, load_inputs, train

        out = tmp_path / "run"
        run(["train"] + base_args(data, out), capsys)
        _, stdout, _ = run(["eval", str(out / "checkpoint.npz"), "--perplexity", "false"], capsys)
        _, state, _ = load_checkpoint(out / "checkpoint.npz")
        cfg = RunConfig(corpus=data[0], seeds=data[1], stopwords=None)
        corpus, seeds = load_inputs(cfg)
        model = train(corpus, seeds, cfg)
        ids = evaluation_ids(corpus)
        np.testing.assert_array_equal(state.theta.argmax(1)[ids], model.state.theta.argmax(1)[ids])
        assert json.loads(stdout)["perplexity"] is None

    def test_missing_seed_file(self, data, tmp_path, capsys):
        code, _, err = run(["train", "--corpus", data[0], "--seeds", str(tmp_path / "none.tsv"),
                            "--output-dir", str(tmp_path)], capsys)
        assert code == EXIT_INPUT
        assert "none.tsv" in err

    def test_bad_config_value(self, data, tmp_path, capsys):
        code, _, err = run(["train"] + base_args(data, tmp_path) + ["--rho", "2"], capsys)
        assert code == EXIT_INPUT and "rho" in err

    def test_malformed_checkpoint(self, tmp_path, capsys):
        path = tmp_path / "broken.npz"
        path.write_bytes(b"\x00" * 64)
        assert run(["eval", str(path)], capsys)[0] == EXIT_CHECKPOINT

    def test_vocabulary_mismatch(self, data, tmp_path, capsys):
        out = tmp_path / "run"
        run(["train"] + base_args(data, out), capsys)
        code, _, err = run(["eval", str(out / "checkpoint.npz"), "--min-doc-freq", "20"], capsys)
        assert code == EXIT_CHECKPOINT and "vocabulary" in err

    def test_config_file(self, data, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(f"corpus = {data[0]}\nseeds = {data[1]}\nstopwords = none\nmax_iter = 3\n"
                       f"output_dir = {tmp_path / 'out'}\n")
        code, stdout, _ = run(["train", "--config", str(cfg)], capsys)
        assert code == EXIT_OK and "(3 iterations)" in stdout


class TestAblateCommand:
    def test_p_sweep_rows(self, data, tmp_path, capsys):
        args = ["ablate", "--axis", "P", "--grid", "0..2"] + base_args(data, tmp_path)
        code, stdout, _ = run(args + ["--max-iter", "3", "--perplexity", "false"], capsys)
        assert code == EXIT_OK
        lines = stdout.strip().splitlines()
        assert len(lines) == 1 + 3
        assert (tmp_path / "sweep_P.csv").read_text() == stdout

    def test_full_p_grid_has_six_rows(self):
        assert len(parse_grid("0..5", "P")) == 6

    def test_empty_grid_is_usage_error(self, data, tmp_path, capsys):
        code, _, err = run(["ablate", "--axis", "rho", "--grid", ","] + base_args(data, tmp_path), capsys)
        assert code == EXIT_INPUT and "grid" in err

    def test_unknown_axis_rejected_by_parser(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["ablate", "--axis", "eta"])
        assert exc.value.code == 2


class TestDiagnostics:
    def test_stats(self, data, tmp_path, capsys):
        code, stdout, _ = run(["stats"] + base_args(data, tmp_path), capsys)
        stats = json.loads(stdout)
        assert code == EXIT_OK
        assert stats["P=1"]["NonSW"] == 0
        assert stats["P=0"]["TrueMark"] <= stats["P=1"]["TrueMark"]

    def test_dump_priors(self, data, tmp_path, capsys):
        code, _, _ = run(["dump-priors"] + base_args(data, tmp_path), capsys)
        rows = [json.loads(l) for l in (tmp_path / "priors.jsonl").read_text().splitlines()]
        assert code == EXIT_OK
        assert {"doc", "alpha_prime", "M", "F", "omega"} <= set(rows[0])
        assert abs(sum(rows[0]["alpha_prime"]) - (10 + 0.01 * len(rows[0]["F"]))) < 1e-9
