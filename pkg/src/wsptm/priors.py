"""
Supervision derived from seed words.

Everything the topic model learns about labels enters through this module:

* word/label relevance used for the topic-type switch,
* prototype vectors and each document's pseudo-nearest labels,
* the membership degree and label frequency that form the supervised
  Dirichlet prior over category topics,
* the information-content term weights.

Co-occurrence counts (used both for relevance and for prototypes) count,
for every document, the seed tokens of label k when word v is present::

    SC[v, k] = sum_d 1[tf_dv > 0] * DF[d, k]
"""
import logging
import math
from dataclasses import dataclass

import numpy as np

from wsptm.corpus import count_seed_occurrences
from wsptm.exceptions import InputError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PriorConfig:
    eta: float = 10.0
    alpha0: float = 0.01
    rho: float = 0.9
    tau: float = 0.1
    P: int = 1
    epsilon: float = 0.01
    b: float = math.e - 1

    def __post_init__(self):
        if self.eta <= 0:
            raise InputError("eta must be > 0")
        if self.alpha0 <= 0:
            raise InputError("alpha0 must be > 0")
        if not 0 <= self.rho <= 1:
            raise InputError("rho must lie in [0, 1]")
        if not 0 <= self.tau <= 1:
            raise InputError("tau must lie in [0, 1]")
        if self.P < 0:
            raise InputError("P must be >= 0")
        if self.P == 0 and self.tau > 0:
            raise InputError("P = 0 disables pseudo-neighbors and requires tau = 0")
        if self.epsilon <= 0:
            raise InputError("epsilon must be > 0")
        if self.b <= 0:
            raise InputError("b must be > 0")


@dataclass
class SupervisedPrior:
    """Document-specific Dirichlet parameters over category topics.

    ``M`` and ``F`` are the membership degree and label frequency the prior
    was assembled from; ``omega`` holds each document's pseudo-nearest
    labels (D x P, empty when P = 0). For the seed-count baseline prior M,
    F and omega are ``None``.
    """

    alpha_prime: np.ndarray
    M: np.ndarray | None = None
    F: np.ndarray | None = None
    omega: np.ndarray | None = None


def _cooccurrence(X, DF):
    """V x K seed co-occurrence counts, see module docstring."""
    B = (X > 0).astype(np.float64)
    return np.asarray(B.T @ DF)


def compute_relevance(corpus, seeds, epsilon=0.01, DF=None):
    """Relevance gamma (V x K) between each word and each category topic."""
    if DF is None:
        DF, _ = count_seed_occurrences(corpus, seeds)
    SC = _cooccurrence(corpus.X, DF)
    K = SC.shape[1]

    total = SC.sum(axis=1, keepdims=True)
    share = np.divide(SC, total, out=np.zeros_like(SC), where=total > 0)
    # words never seen with a seed keep an all-zero row
    u = np.where(total > 0, np.maximum(share - 1.0 / K, 0.0), 0.0)

    col = u.sum(axis=0, keepdims=True)
    u = np.divide(u, col, out=np.zeros_like(u), where=col > 0)
    row = u.sum(axis=1, keepdims=True)
    u = np.divide(u, row, out=np.zeros_like(u), where=row > 0)
    return np.maximum(u, epsilon)


def compute_prototypes(corpus, seeds, b=math.e - 1, DF=None):
    """Prototype vectors c (K x V).

    ``c[k, v] = b ** (SF[k, v] / S[k]) * ln(K / CF[v])`` where SF is the
    seed co-occurrence count, S[k] the number of seed tokens of label k and
    CF[v] the number of labels whose seeds co-occur with v. Words without
    any co-occurrence (CF = 0) get an all-zero column.
    """
    if DF is None:
        DF, _ = count_seed_occurrences(corpus, seeds)
    SF = _cooccurrence(corpus.X, DF).T
    K = SF.shape[0]
    S = DF.sum(axis=0)
    missing = np.flatnonzero(S == 0)
    if missing.size:
        raise InputError(f"seed words of label {missing[0]} never occur in the corpus")

    CF = (SF > 0).sum(axis=0)
    discrim = np.zeros(SF.shape[1])
    seen = CF > 0
    discrim[seen] = np.log(K / CF[seen])
    return np.power(b, SF / S[:, None]) * discrim[None, :]


def find_pseudo_neighbors(corpus, prototypes, P):
    """Top-P labels per document by cosine similarity to the prototypes.

    Returns a D x P int array. Ties go to the lower label id.
    """
    K = prototypes.shape[0]
    if not 0 <= P <= K:
        raise InputError(f"P must lie in [0, K={K}], got {P}")
    X = corpus.X if hasattr(corpus, "X") else corpus
    D = X.shape[0]
    if P == 0:
        return np.zeros((D, 0), dtype=np.int64)

    dots = np.asarray(X @ prototypes.T)
    doc_norm = np.sqrt(np.asarray(X.multiply(X).sum(axis=1))).ravel()
    proto_norm = np.linalg.norm(prototypes, axis=1)
    denom = doc_norm[:, None] * proto_norm[None, :]
    cos = np.divide(dots, denom, out=np.zeros_like(dots), where=denom > 0)

    blank = ~np.any(cos > 0, axis=1)
    if blank.any():
        logger.warning(
            "%d documents share no words with any prototype; assigned labels 0..%d",
            int(blank.sum()), P - 1,
        )
    order = np.argsort(-np.round(cos, 12), axis=1, kind="stable")
    return order[:, :P]


def membership_degree(DF, omega, tau, P):
    """Label membership degree M (D x K).

    Mixes the seed-count share with a uniform vote for the pseudo-nearest
    labels. Documents without any seed token take the vote alone, so with
    P = 0 their rows are all zero.
    """
    DF = np.asarray(DF, dtype=np.float64)
    D, K = DF.shape
    omega = np.asarray(omega, dtype=np.int64).reshape(D, -1)
    if omega.shape[1] != P:
        raise InputError(f"omega has {omega.shape[1]} labels per document, expected P={P}")

    vote = np.zeros((D, K))
    if P > 0:
        np.put_along_axis(vote, omega, 1.0 / P, axis=1)

    total = DF.sum(axis=1, keepdims=True)
    share = np.divide(DF, total, out=np.zeros_like(DF), where=total > 0)
    return np.where(total > 0, (1 - tau) * share + tau * vote, vote)


def label_frequency(TF, seeds):
    """Label frequency F_k estimated from corpus counts of each label's seeds."""
    TF = np.asarray(TF, dtype=np.float64)
    counts = np.array([TF[list(s)].sum() for s in seeds.sets])
    total = counts.sum()
    if total <= 0:
        raise InputError("no seed word occurs in the corpus")
    return counts / total


def compute_supervised_prior(M, F, config, omega=None):
    """alpha'_dk = eta * ((1 - rho) * M_dk + rho * F_k) + alpha0."""
    M = np.asarray(M, dtype=np.float64)
    F = np.asarray(F, dtype=np.float64)
    alpha = config.eta * ((1 - config.rho) * M + config.rho * F[None, :]) + config.alpha0
    return SupervisedPrior(alpha, M, F, omega)


def compute_baseline_prior(DF, eta=10.0, alpha0=0.01):
    """Seed-count prior: eta * DF_dk / sum_i DF_di + alpha0 (alpha0 alone for seedless rows)."""
    DF = np.asarray(DF, dtype=np.float64)
    total = DF.sum(axis=1, keepdims=True)
    share = np.divide(DF, total, out=np.zeros_like(DF), where=total > 0)
    return eta * share + alpha0


def compute_term_weights(TF, total_tokens=None):
    """Information-content weights pi_v = -ln(TF_v / total_tokens)."""
    TF = np.asarray(TF, dtype=np.float64)
    if total_tokens is None:
        total_tokens = TF.sum()
    if total_tokens <= 0:
        raise InputError("corpus has no tokens")
    if np.any(TF < 1):
        raise InputError("every vocabulary word must occur at least once")
    return -np.log(TF / total_tokens)


@dataclass
class Supervision:
    """All seed-derived inputs of one training run."""

    prior: SupervisedPrior
    gamma: np.ndarray
    pi: np.ndarray
    DF: np.ndarray
    TF: np.ndarray
    prototypes: np.ndarray | None = None


def build_supervision(corpus, seeds, config=None, baseline=False):
    """Compute the prior, relevance and term weights for ``corpus``.

    With ``baseline`` the seed-count prior is used and term weights are all
    one; ``config.rho``, ``tau`` and ``P`` are then ignored.
    """
    config = config or PriorConfig()
    if seeds.K != corpus.K:
        raise InputError(f"seed set has {seeds.K} labels, corpus has {corpus.K}")
    DF, TF = count_seed_occurrences(corpus, seeds)
    gamma = compute_relevance(corpus, seeds, config.epsilon, DF=DF)

    if baseline:
        prior = SupervisedPrior(compute_baseline_prior(DF, config.eta, config.alpha0))
        return Supervision(prior, gamma, np.ones(corpus.V), DF, TF)

    if config.P > corpus.K:
        raise InputError(f"P={config.P} exceeds the number of labels K={corpus.K}")
    protos = compute_prototypes(corpus, seeds, config.b, DF=DF)
    omega = find_pseudo_neighbors(corpus, protos, config.P)
    M = membership_degree(DF, omega, config.tau, config.P)
    F = label_frequency(TF, seeds)
    prior = compute_supervised_prior(M, F, config, omega)
    pi = compute_term_weights(TF, TF.sum())
    return Supervision(prior, gamma, pi, DF, TF, protos)
