"""
Generalized EM for the weakly supervised topic model.

The model has K category topics (one per label) and G background topics.
Each token first picks a topic type: category with probability
``delta = theta_d . gamma_w`` and background otherwise. It then picks a topic
from ``theta_d`` or ``theta_hat_d`` and a word from that topic.

Tokens carry a weight ``pi(w)`` and count as that many occurrences in
every sufficient statistic. A document's repeated tokens of the same word
share one posterior, so all per-token arrays here are indexed by the
nonzeros of the document-term matrix with a ``count`` column.
"""
import logging
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as ssp

from wsptm.exceptions import InputError
from wsptm.graph import manifold_penalty, neighbor_mean

logger = logging.getLogger(__name__)

_TINY = np.finfo(np.float64).tiny


@dataclass(frozen=True)
class ModelConfig:
    G: int | None = None
    beta: float = 0.01
    beta_hat: float = 0.01
    alpha_hat: float = 0.1
    lam: float = 100.0
    kappa: float = 0.1
    max_iter: int = 200
    rng_seed: int = 0
    tol: float = 1e-5
    max_inner: int = 50
    gem_accept: bool = True

    def __post_init__(self):
        if self.G is not None and self.G < 1:
            raise InputError("G must be >= 1")
        for name in ("beta", "beta_hat", "alpha_hat", "tol"):
            if getattr(self, name) <= 0:
                raise InputError(f"{name} must be > 0")
        if self.lam < 0:
            raise InputError("lambda must be >= 0")
        if not 0 <= self.kappa <= 1:
            raise InputError("kappa must lie in [0, 1]")
        if self.max_iter < 0 or self.max_inner < 0:
            raise InputError("iteration counts must be >= 0")

    def n_background(self, K):
        return K if self.G is None else self.G


@dataclass
class ModelState:
    theta: np.ndarray       # D x K
    theta_hat: np.ndarray   # D x G
    phi: np.ndarray         # K x V
    phi_hat: np.ndarray     # G x V
    gamma: np.ndarray       # V x K, fixed
    pi: np.ndarray          # V, fixed

    @property
    def K(self):
        return self.theta.shape[1]

    @property
    def G(self):
        return self.theta_hat.shape[1]

    def copy(self):
        return ModelState(*(np.array(a) for a in (
            self.theta, self.theta_hat, self.phi, self.phi_hat, self.gamma, self.pi)))


@dataclass
class TokenPosterior:
    """Posterior topic responsibilities of every distinct (document, word) pair.

    ``N[n, k]`` is the probability that one token of ``word[n]`` in
    ``doc[n]`` came from category topic k, ``N_hat[n, g]`` likewise for
    background topic g. A pair occurring ``count[n]`` times stands for that
    many identical tokens.
    """

    doc: np.ndarray
    word: np.ndarray
    count: np.ndarray
    N: np.ndarray
    N_hat: np.ndarray
    shape: tuple

    def per_token(self):
        """Expand to one row per token, in document order."""
        reps = self.count.astype(np.int64)
        return (np.repeat(self.doc, reps), np.repeat(self.word, reps),
                np.repeat(self.N, reps, axis=0), np.repeat(self.N_hat, reps, axis=0))

    def weighted_doc_counts(self, pi, which="N"):
        """sum_n pi(w_dn) * responsibility, per document (D x K or D x G)."""
        R = self.N if which == "N" else self.N_hat
        w = self.count * pi[self.word]
        S = ssp.csr_matrix((w, (self.doc, np.arange(len(w)))), shape=(self.shape[0], len(w)))
        return np.asarray(S @ R)

    def weighted_word_counts(self, pi, which="N"):
        """sum over tokens of word v of pi(v) * responsibility (K x V or G x V)."""
        R = self.N if which == "N" else self.N_hat
        w = self.count * pi[self.word]
        S = ssp.csr_matrix((w, (self.word, np.arange(len(w)))), shape=(self.shape[1], len(w)))
        return np.asarray(S @ R).T


def _matrix(corpus):
    X = corpus.X if hasattr(corpus, "X") else corpus
    return ssp.csr_matrix(X)


def _triplets(X):
    doc = np.repeat(np.arange(X.shape[0]), np.diff(X.indptr))
    return doc, X.indices.astype(np.int64), X.data.astype(np.float64)


def init_state(corpus, config, gamma, pi, rng_seed=None):
    """Draw theta, theta_hat, phi and phi_hat rows from a flat Dirichlet."""
    D, V = _matrix(corpus).shape
    K = gamma.shape[1]
    G = config.n_background(K)
    rng = np.random.default_rng(config.rng_seed if rng_seed is None else rng_seed)
    theta = rng.dirichlet(np.ones(K), size=D)
    theta_hat = rng.dirichlet(np.ones(G), size=D)
    phi = rng.dirichlet(np.ones(V), size=K)
    phi_hat = rng.dirichlet(np.ones(V), size=G)
    return ModelState(theta, theta_hat, phi, phi_hat, np.asarray(gamma, float), np.asarray(pi, float))


def e_step(state, corpus):
    """Posterior responsibilities of category and background topics."""
    X = _matrix(corpus)
    doc, word, count = _triplets(X)
    theta_d = state.theta[doc]
    delta = np.einsum("nk,nk->n", theta_d, state.gamma[word])

    cat = theta_d * state.phi[:, word].T
    cat_norm = cat.sum(axis=1, keepdims=True)
    bg = state.theta_hat[doc] * state.phi_hat[:, word].T
    bg_norm = bg.sum(axis=1, keepdims=True)
    if not (np.all(cat_norm > 0) and np.all(bg_norm > 0)):
        raise FloatingPointError("zero topic mixture probability for some token")

    N = delta[:, None] * (cat / cat_norm)
    N_hat = (1 - delta)[:, None] * (bg / bg_norm)
    return TokenPosterior(doc, word, count, N, N_hat, X.shape)


def m_step_globals(posteriors, pi, config):
    """Closed-form updates of theta_hat, phi and phi_hat from weighted responsibilities."""
    V = posteriors.shape[1]
    G = posteriors.N_hat.shape[1]

    doc_bg = posteriors.weighted_doc_counts(pi, "N_hat")
    theta_hat = (doc_bg + config.alpha_hat) / (doc_bg.sum(axis=1, keepdims=True) + G * config.alpha_hat)

    word_cat = posteriors.weighted_word_counts(pi, "N")
    phi = (word_cat + config.beta) / (word_cat.sum(axis=1, keepdims=True) + V * config.beta)

    word_bg = posteriors.weighted_word_counts(pi, "N_hat")
    phi_hat = (word_bg + config.beta_hat) / (word_bg.sum(axis=1, keepdims=True) + V * config.beta_hat)
    return theta_hat, phi, phi_hat


def init_theta(posteriors, alpha_prime, pi):
    """Posterior-mean theta from weighted category responsibilities and alpha'."""
    counts = posteriors.weighted_doc_counts(pi, "N") + alpha_prime
    return counts / counts.sum(axis=1, keepdims=True)


def smooth_step(theta, graph, kappa):
    """One move of every row toward the mean of its graph neighbors."""
    out = (1 - kappa) * theta + kappa * neighbor_mean(theta, graph)
    return out / out.sum(axis=1, keepdims=True)


def update_theta(theta, graph, objective_fn, kappa, max_inner=50):
    """Smooth theta along the graph for as long as the objective does not drop.

    Returns ``(theta, value, steps)`` where ``value`` is the objective at the
    returned theta and ``steps`` the number of accepted smoothing moves.
    """
    best = theta
    best_val = objective_fn(best)
    steps = 0
    for _ in range(max_inner):
        trial = smooth_step(best, graph, kappa)
        if np.array_equal(trial, best):
            break
        val = objective_fn(trial)
        if not val >= best_val:
            break
        best, best_val = trial, val
        steps += 1
    return best, best_val, steps


def _dirichlet_term(x, conc):
    return float(np.sum(conc * np.log(np.maximum(x, _TINY))))


class _Objective:
    """Objective as a function of theta with the other parameters held fixed."""

    def __init__(self, state, X, alpha_prime, graph, config):
        self.doc, self.word, count = _triplets(X)
        self.weight = count * state.pi[self.word]
        self.gamma_w = state.gamma[self.word]
        self.phi_w = state.phi[:, self.word].T
        self.bg = np.einsum("ng,ng->n", state.theta_hat[self.doc], state.phi_hat[:, self.word].T)
        self.alpha_prime = alpha_prime
        self.graph = graph
        self.lam = config.lam
        self.fixed = (
            _dirichlet_term(state.theta_hat, config.alpha_hat)
            + _dirichlet_term(state.phi, config.beta)
            + _dirichlet_term(state.phi_hat, config.beta_hat)
        )

    def terms(self, theta):
        theta_d = theta[self.doc]
        delta = np.einsum("nk,nk->n", theta_d, self.gamma_w)
        cat = np.einsum("nk,nk->n", theta_d, self.phi_w)
        p = delta * cat + (1 - delta) * self.bg
        loglik = float(np.sum(self.weight * np.log(np.maximum(p, _TINY))))
        prior = _dirichlet_term(theta, self.alpha_prime) + self.fixed
        penalty = manifold_penalty(theta, self.graph) if self.graph is not None else 0.0
        return {
            "loglik": loglik,
            "log_prior": prior,
            "penalty": penalty,
            "objective": loglik + prior - self.lam * penalty,
        }

    def __call__(self, theta):
        return self.terms(theta)["objective"]


def objective_terms(state, corpus, alpha_prime, graph, config):
    """Components of the regularized objective at ``state``.

    ``loglik`` is the pi-weighted marginal log-likelihood of the tokens,
    ``log_prior`` the Dirichlet log-densities of theta, theta_hat, phi and
    phi_hat (up to normalizers, exponents equal to the concentrations so
    that the closed-form M-step updates are exact maximizers), ``penalty``
    the manifold penalty and ``objective = loglik + log_prior - lam * penalty``.
    """
    return _Objective(state, _matrix(corpus), alpha_prime, graph, config).terms(state.theta)


def objective(state, corpus, alpha_prime, graph, config):
    return objective_terms(state, corpus, alpha_prime, graph, config)["objective"]


@dataclass
class FitResult:
    state: ModelState
    trace: list = field(default_factory=list)
    converged: bool = False

    @property
    def objectives(self):
        return np.array([t["objective"] for t in self.trace])

    def trace_csv(self):
        lines = ["iter,objective,penalty"]
        lines += [f"{t['iter']},{t['objective']!r},{t['penalty']!r}" for t in self.trace]
        return "\n".join(lines) + "\n"


def _check_finite(it, **arrays):
    for name, value in arrays.items():
        if not np.all(np.isfinite(value)):
            raise FloatingPointError(f"non-finite values in {name} at iteration {it}")


def fit(corpus, alpha_prime, gamma, pi, graph, config, callback=None, state=None):
    """Run generalized EM.

    Parameters
    ----------
    corpus : Corpus or sparse matrix
        Documents to fit (D x V counts).
    alpha_prime : ndarray, shape (D, K)
        Document-specific Dirichlet prior over category topics.
    gamma : ndarray, shape (V, K)
        Word/label relevance driving the topic-type switch.
    pi : ndarray, shape (V,)
        Token weights.
    graph : DocumentGraph or None
        Neighbor graph for the manifold penalty; ``None`` disables smoothing.
    config : ModelConfig
    callback : callable, optional
        Called as ``callback(iteration, state, posteriors, info)`` after
        every iteration. ``info`` holds ``theta_init_objective`` (objective
        right after the posterior-mean theta update) and ``objective``.
    state : ModelState, optional
        Starting point; drawn with :func:`init_state` when omitted.

    Notes
    -----
    With ``config.gem_accept`` each block of the M-step (theta_hat, phi and
    phi_hat together, then theta) is kept only if it does not lower the
    objective, which makes the trace non-decreasing. Without it every
    iteration restarts theta from the posterior-mean update.

    Returns
    -------
    FitResult
    """
    X = _matrix(corpus)
    alpha_prime = np.asarray(alpha_prime, dtype=np.float64)
    if alpha_prime.shape != (X.shape[0], gamma.shape[1]):
        raise InputError(f"alpha' has shape {alpha_prime.shape}, expected {(X.shape[0], gamma.shape[1])}")
    if state is None:
        state = init_state(X, config, gamma, pi)
    else:
        state = state.copy()

    start = objective_terms(state, X, alpha_prime, graph, config)
    result = FitResult(state, [{"iter": 0, "objective": start["objective"], "penalty": start["penalty"]}])
    prev = start["objective"]

    for it in range(1, config.max_iter + 1):
        post = e_step(state, X)
        theta_hat, phi, phi_hat = m_step_globals(post, state.pi, config)
        _check_finite(it, theta_hat=theta_hat, phi=phi, phi_hat=phi_hat)
        candidate = replace(state, theta_hat=theta_hat, phi=phi, phi_hat=phi_hat)
        fn = _Objective(candidate, X, alpha_prime, graph, config)
        if config.gem_accept and fn(state.theta) < prev:
            # the responsibilities are not an exact posterior, so the closed
            # forms can lose ground; a generalized M-step keeps the old block
            fn = _Objective(state, X, alpha_prime, graph, config)
        else:
            state = candidate

        theta0 = init_theta(post, alpha_prime, state.pi)
        _check_finite(it, theta=theta0)
        init_val = fn(theta0)
        if graph is not None and config.lam > 0:
            theta, val, _ = update_theta(theta0, graph, fn, config.kappa, config.max_inner)
        else:
            theta, val = theta0, init_val
        if config.gem_accept and val < fn(state.theta):
            theta, val = state.theta, fn(state.theta)
        state = replace(state, theta=theta)

        terms = fn.terms(theta)
        _check_finite(it, objective=terms["objective"])
        result.trace.append({"iter": it, "objective": terms["objective"], "penalty": terms["penalty"]})
        if callback is not None:
            callback(it, state, post, {"theta_init_objective": init_val, "objective": val})

        cur = terms["objective"]
        if abs(cur - prev) < config.tol * abs(cur):
            result.converged = True
            break
        prev = cur

    result.state = state
    return result
