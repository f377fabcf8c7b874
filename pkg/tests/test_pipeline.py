import numpy as np
import pytest

from wsptm.config import RunConfig
from wsptm.exceptions import InputError
from wsptm.pipeline import ablate, default_grid, evaluation_ids, grid_config, sweep_csv

from conftest import make_corpus, planted


class TestGrids:
    def test_rho_grid(self):
        grid = default_grid("rho")
        assert grid[0] == 0.1 and grid[-1] == 0.9 and len(grid) == 17
        np.testing.assert_allclose(np.diff(grid), 0.05)

    def test_p_grid_starts_at_zero(self):
        assert default_grid("P") == [0, 1, 2, 3, 4, 5]

    def test_unknown_axis(self):
        with pytest.raises(InputError):
            default_grid("eta")

    def test_components(self):
        base = RunConfig()
        assert grid_config(base, "components", "-LF", 0).rho == 0.0
        no_pnnc = grid_config(base, "components", "-PNNC", 1)
        assert (no_pnnc.tau, no_pnnc.P) == (0.0, 0)
        assert grid_config(base, "P", 0, 0).tau == 0.0
        assert grid_config(base, "P", 3, 0).tau == base.tau

    def test_seeds_differ_per_point(self):
        base = RunConfig()
        assert grid_config(base, "rho", 0.1, 0).rng_seed != grid_config(base, "rho", 0.1, 1).rng_seed
        assert grid_config(base, "rho", 0.1, 0).rng_seed == grid_config(base, "rho", 0.5, 0).rng_seed


class TestEvaluationIds:
    def test_prefers_labeled_test_documents(self):
        corpus = make_corpus(["aa bb", "bb cc", "cc aa"], labels=[0, 1, None], K=2, splits=["train", "test", "test"])
        np.testing.assert_array_equal(evaluation_ids(corpus), [1])

    def test_falls_back_to_all_labeled(self):
        corpus = make_corpus(["aa bb", "bb cc"], labels=[0, 1])
        np.testing.assert_array_equal(evaluation_ids(corpus), [0, 1])


@pytest.fixture(scope="module")
def tiny():
    return planted(n_docs=200, K=3, words_per_class=60, n_background=100, seed=2)


class TestAblate:
    def test_deterministic_and_parallel_equal(self, tiny):
        corpus, seeds = tiny
        base = RunConfig(max_iter=10, perplexity=False)
        a = ablate(corpus, seeds, base, "rho", [0.2, 0.8], workers=1)
        b = ablate(corpus, seeds, base, "rho", [0.2, 0.8], workers=2)
        assert [r.to_json() for _, r in a] == [r.to_json() for _, r in b]

    def test_csv(self, tiny):
        corpus, seeds = tiny
        rows = ablate(corpus, seeds, RunConfig(max_iter=5, fold_in_iter=2), "components")
        text = sweep_csv("components", rows)
        lines = text.splitlines()
        assert lines[0] == "param,value,micro_f1,macro_f1,perplexity"
        assert [l.split(",")[1] for l in lines[1:]] == ["full", "-PNNC", "-LF"]
        assert all(l.split(",")[4] for l in lines[1:])

    def test_empty_grid(self, tiny):
        corpus, seeds = tiny
        with pytest.raises(InputError):
            ablate(corpus, seeds, RunConfig(), "rho", [])
