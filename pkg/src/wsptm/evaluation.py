"""Classification, F1 metrics, held-out perplexity and seed coverage statistics."""
import json
import logging
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.sparse as ssp

from wsptm.inference import ModelState, e_step, init_theta

logger = logging.getLogger(__name__)


@dataclass
class EvalReport:
    micro_f1: float
    macro_f1: float
    per_class_f1: list
    confusion: list
    n_documents: int
    perplexity: float | None = None
    config_snapshot: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


def classify(theta, doc_ids=None):
    """argmax_k theta_dk per document; the lowest label wins ties."""
    theta = np.asarray(theta)
    if doc_ids is not None:
        theta = theta[np.asarray(doc_ids, dtype=np.int64)]
    return np.argmax(theta, axis=1)


def confusion_matrix(pred, gold, K):
    """K x K counts; rows are gold labels, columns predictions."""
    cm = np.zeros((K, K), dtype=np.int64)
    np.add.at(cm, (np.asarray(gold), np.asarray(pred)), 1)
    return cm


def f1_scores(pred, gold, K):
    """Micro-F1, macro-F1 and per-class F1 for single-label predictions.

    A class with no gold and no predicted documents has F1 = 0 and still
    counts in the macro average.
    """
    pred = np.asarray(pred)
    gold = np.asarray(gold)
    if pred.shape != gold.shape:
        raise ValueError("pred and gold differ in length")
    cm = confusion_matrix(pred, gold, K)
    tp = np.diag(cm).astype(float)
    fp = cm.sum(axis=0) - tp
    fn = cm.sum(axis=1) - tp
    denom = 2 * tp + fp + fn
    per_class = np.divide(2 * tp, denom, out=np.zeros(K), where=denom > 0)
    total = 2 * tp.sum() + fp.sum() + fn.sum()
    micro = 2 * tp.sum() / total if total > 0 else 0.0
    return float(micro), float(per_class.mean()), per_class


def fold_in(state, alpha, X, alpha_hat=0.1, n_iter=20):
    """Estimate theta and theta_hat of documents ``X`` with the topics frozen.

    Starts from the prior mean of ``alpha`` and a flat theta_hat, then
    alternates the E-step with the closed-form theta and theta_hat updates.
    No graph smoothing is applied.
    """
    X = ssp.csr_matrix(X)
    D = X.shape[0]
    G = state.G
    alpha = np.asarray(alpha, dtype=np.float64)
    theta = alpha / alpha.sum(axis=1, keepdims=True)
    theta_hat = np.full((D, G), 1.0 / G)
    for _ in range(n_iter):
        tmp = ModelState(theta, theta_hat, state.phi, state.phi_hat, state.gamma, state.pi)
        post = e_step(tmp, X)
        theta = init_theta(post, alpha, state.pi)
        counts = post.weighted_doc_counts(state.pi, "N_hat") + alpha_hat
        theta_hat = counts / counts.sum(axis=1, keepdims=True)
    return theta, theta_hat


def token_log_probs(state, X, theta, theta_hat):
    """log p(w) of every distinct (document, word) pair of ``X`` and its count."""
    X = ssp.csr_matrix(X)
    doc = np.repeat(np.arange(X.shape[0]), np.diff(X.indptr))
    word = X.indices
    theta_d = theta[doc]
    delta = np.einsum("nk,nk->n", theta_d, state.gamma[word])
    cat = np.einsum("nk,kn->n", theta_d, state.phi[:, word])
    bg = np.einsum("ng,gn->n", theta_hat[doc], state.phi_hat[:, word])
    return np.log(delta * cat + (1 - delta) * bg), X.data.astype(np.float64)


def perplexity(state, alpha_test, X_test, alpha_hat=0.1, n_iter=20):
    """exp(-sum log p(w) / number of tokens) over the test documents.

    Topics stay fixed; each document's mixtures are fitted by
    :func:`fold_in`. Token log-probabilities are unweighted. Documents with
    no in-vocabulary token are excluded.
    """
    X_test = ssp.csr_matrix(X_test)
    alpha_test = np.asarray(alpha_test, dtype=np.float64)
    lengths = np.asarray(X_test.sum(axis=1)).ravel()
    keep = lengths > 0
    if not keep.all():
        logger.info("excluding %d empty test documents from perplexity", int((~keep).sum()))
        X_test = X_test[keep]
        alpha_test = alpha_test[keep]
    if X_test.shape[0] == 0:
        raise ValueError("no non-empty test documents")
    theta, theta_hat = fold_in(state, alpha_test, X_test, alpha_hat, n_iter)
    logp, counts = token_log_probs(state, X_test, theta, theta_hat)
    return float(np.exp(-np.sum(counts * logp) / counts.sum()))


def marked_labels(DF, omega):
    """D x K boolean mask of labels with nonzero membership degree."""
    marked = np.asarray(DF) > 0
    omega = np.asarray(omega, dtype=np.int64).reshape(marked.shape[0], -1)
    if omega.shape[1]:
        np.put_along_axis(marked, omega, True, axis=1)
    return marked


def coverage_stats(DF, omega, gold):
    """Counts of documents without any marked label and with a marked gold label.

    Unlabeled documents (gold < 0) count toward ``NonSW`` but can never be
    ``TrueMark``.
    """
    marked = marked_labels(DF, omega)
    gold = np.asarray(gold)
    D = marked.shape[0]
    labeled = gold >= 0
    true_mark = np.zeros(D, dtype=bool)
    true_mark[labeled] = marked[np.flatnonzero(labeled), gold[labeled]]
    return {
        "NonSW": int((~marked.any(axis=1)).sum()),
        "TrueMark": int(true_mark.sum()),
        "total": int(D),
    }
