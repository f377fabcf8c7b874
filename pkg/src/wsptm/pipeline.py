"""End-to-end training, evaluation and parameter sweeps driven by a RunConfig."""
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from wsptm.corpus import load_corpus, load_seed_words, read_seed_file
from wsptm.evaluation import EvalReport, classify, confusion_matrix, f1_scores, perplexity
from wsptm.exceptions import InputError
from wsptm.graph import build_document_graph
from wsptm.inference import fit
from wsptm.priors import build_supervision

logger = logging.getLogger(__name__)

AXES = ("rho", "tau", "P", "components")
COMPONENTS = ("full", "-PNNC", "-LF")


def default_grid(axis):
    if axis in ("rho", "tau"):
        return [round(0.1 + 0.05 * i, 2) for i in range(17)]
    if axis == "P":
        return [0, 1, 2, 3, 4, 5]
    if axis == "components":
        return list(COMPONENTS)
    raise InputError(f"unknown axis {axis!r}; expected one of {AXES}")


@dataclass
class TrainedModel:
    config: object
    supervision: object
    graph: object
    result: object

    @property
    def state(self):
        return self.result.state


def load_inputs(config):
    """Read the corpus and seed files named in ``config``."""
    if not config.corpus:
        raise InputError("no corpus file given")
    if not config.seeds:
        raise InputError("no seed file given")
    raw_seeds = read_seed_file(config.seeds)
    K = max(raw_seeds) + 1 if raw_seeds else None
    corpus = load_corpus(config.corpus, config.min_doc_freq, config.min_word_len, config.stopwords, K=K)
    seeds = load_seed_words(config.seeds, corpus, config.purify, config.purify_seed)
    return corpus, seeds


def train(corpus, seeds, config):
    sup = build_supervision(corpus, seeds, config.prior_config(), baseline=config.baseline)
    graph = build_document_graph(corpus, config.k_neighbors, config.graph_weighting)
    result = fit(corpus, sup.prior.alpha_prime, sup.gamma, sup.pi, graph, config.model_config())
    logger.info("fit finished after %d iterations (converged=%s)", len(result.trace) - 1, result.converged)
    return TrainedModel(config, sup, graph, result)


def evaluation_ids(corpus):
    """Labeled test documents, or every labeled document if the test split is empty."""
    gold = corpus.gold()
    ids = np.array([d.id for d in corpus.documents if d.split == "test" and gold[d.id] >= 0], dtype=np.int64)
    if ids.size == 0:
        logger.info("no labeled test documents; evaluating on all labeled documents")
        ids = np.flatnonzero(gold >= 0)
    if ids.size == 0:
        raise InputError("corpus has no gold labels to evaluate against")
    return ids


def evaluate(state, corpus, alpha_prime, config):
    ids = evaluation_ids(corpus)
    gold = corpus.gold()[ids]
    pred = classify(state.theta, ids)
    micro, macro, per_class = f1_scores(pred, gold, corpus.K)
    ppl = None
    if config.perplexity:
        ppl = perplexity(state, alpha_prime[ids], corpus.X[ids], config.alpha_hat, config.fold_in_iter)
    return EvalReport(
        micro_f1=micro,
        macro_f1=macro,
        per_class_f1=per_class.tolist(),
        confusion=confusion_matrix(pred, gold, corpus.K).tolist(),
        n_documents=int(ids.size),
        perplexity=ppl,
        config_snapshot=config.to_dict(),
    )


def grid_config(base, axis, value, index):
    """The config of one sweep point, with its own RNG seed."""
    rng_seed = int(np.random.SeedSequence([base.rng_seed, index]).generate_state(1)[0])
    if axis == "rho":
        return base.replace(rho=float(value), rng_seed=rng_seed)
    if axis == "tau":
        return base.replace(tau=float(value), rng_seed=rng_seed)
    if axis == "P":
        P = int(value)
        # no pseudo-neighbors means no neighbor share in the membership degree
        return base.replace(P=P, tau=base.tau if P > 0 else 0.0, rng_seed=rng_seed)
    if axis == "components":
        if value == "full":
            return base.replace(rng_seed=rng_seed)
        if value == "-PNNC":
            return base.replace(tau=0.0, P=0, rng_seed=rng_seed)
        if value == "-LF":
            return base.replace(rho=0.0, rng_seed=rng_seed)
        raise InputError(f"unknown component variant {value!r}; expected one of {COMPONENTS}")
    raise InputError(f"unknown axis {axis!r}; expected one of {AXES}")


def worker_count():
    try:
        return max(1, int(os.environ.get("WSPTM_THREADS", "1")))
    except ValueError:
        raise InputError("WSPTM_THREADS must be an integer") from None


def ablate(corpus, seeds, base_config, axis, grid=None, workers=None, fixed_seed=False):
    """Train and evaluate one model per grid value.

    Returns a list of ``(value, EvalReport)`` in grid order. Each point gets
    an RNG seed derived from ``(base_config.rng_seed, index)``; with
    ``fixed_seed`` every point reuses ``base_config.rng_seed`` instead.
    """
    grid = default_grid(axis) if grid is None else list(grid)
    if not grid:
        raise InputError("empty grid")
    configs = [grid_config(base_config, axis, v, i) for i, v in enumerate(grid)]
    if fixed_seed:
        configs = [c.replace(rng_seed=base_config.rng_seed) for c in configs]

    def run(cfg):
        model = train(corpus, seeds, cfg)
        return evaluate(model.state, corpus, model.supervision.prior.alpha_prime, cfg)

    workers = workers or worker_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(run, configs))
    else:
        reports = [run(c) for c in configs]
    return list(zip(grid, reports))


def sweep_csv(axis, rows):
    lines = ["param,value,micro_f1,macro_f1,perplexity"]
    for value, rep in rows:
        ppl = "" if rep.perplexity is None else repr(rep.perplexity)
        lines.append(f"{axis},{value},{rep.micro_f1!r},{rep.macro_f1!r},{ppl}")
    return "\n".join(lines) + "\n"
