"""
Dataless text classification with a seed-word supervised topic model.

Documents are explained by one category topic per label plus background
topics. Seed words give every document a Dirichlet prior over labels built
from seed counts, pseudo-nearest labels found with prototype vectors, and
corpus-level label frequencies. Inference is generalized EM with graph
smoothing of the document-label proportions.

Typical use::

    from wsptm import RunConfig, load_inputs, train, evaluate

    config = RunConfig(corpus="docs.tsv", seeds="seeds.tsv")
    corpus, seeds = load_inputs(config)
    model = train(corpus, seeds, config)
    report = evaluate(model.state, corpus, model.supervision.prior.alpha_prime, config)
"""
from wsptm.config import RunConfig
from wsptm.corpus import Corpus, SeedWordSet, Vocabulary, build_corpus, build_seed_words, load_corpus, load_seed_words
from wsptm.evaluation import EvalReport, classify, coverage_stats, f1_scores, perplexity
from wsptm.graph import DocumentGraph, build_document_graph, manifold_penalty
from wsptm.inference import ModelConfig, ModelState, fit
from wsptm.pipeline import ablate, evaluate, load_inputs, train
from wsptm.priors import PriorConfig, SupervisedPrior, build_supervision

__version__ = "0.1.0"

__all__ = [
    "Corpus", "DocumentGraph", "EvalReport", "ModelConfig", "ModelState", "PriorConfig", "RunConfig",
    "SeedWordSet", "SupervisedPrior", "Vocabulary", "ablate", "build_corpus", "build_document_graph",
    "build_seed_words", "build_supervision", "classify", "coverage_stats", "evaluate", "f1_scores", "fit",
    "load_corpus", "load_inputs", "load_seed_words", "manifold_penalty", "perplexity", "train",
]
