"""Document neighbor graph and the manifold smoothness penalty."""
from dataclasses import dataclass

import numpy as np
import scipy.sparse as ssp

from wsptm.exceptions import InputError


@dataclass(frozen=True)
class DocumentGraph:
    W: ssp.csr_matrix
    degree: np.ndarray

    @classmethod
    def from_adjacency(cls, W):
        W = ssp.csr_matrix(W, dtype=np.float64)
        W.setdiag(0)
        W.eliminate_zeros()
        return cls(W, np.asarray(W.sum(axis=1)).ravel())

    @property
    def n_edges(self):
        return self.W.nnz // 2

    def edges(self):
        """Undirected edges as ``(i, j)`` pairs with ``i < j``."""
        coo = ssp.triu(self.W, k=1).tocoo()
        order = np.lexsort((coo.col, coo.row))
        return list(zip(coo.row[order].tolist(), coo.col[order].tolist()))

    def write_edge_list(self, path):
        with open(path, "w", encoding="utf-8") as f:
            for i, j in self.edges():
                f.write(f"{i}\t{j}\n")


def _row_normalize(X):
    X = ssp.csr_matrix(X, dtype=np.float64)
    norms = np.sqrt(np.asarray(X.multiply(X).sum(axis=1)).ravel())
    norms[norms == 0] = 1.0
    return ssp.diags(1.0 / norms) @ X


def _tfidf(X):
    X = ssp.csr_matrix(X, dtype=np.float64)
    D = X.shape[0]
    df = np.bincount(X.indices, minlength=X.shape[1])
    idf = np.log((1 + D) / (1 + df)) + 1
    return X @ ssp.diags(idf)


def nearest_neighbors(X, k, weighting="tf", block_size=512):
    """Indices of the ``k`` most cosine-similar rows of ``X`` for each row.

    A row never lists itself; equal similarities go to the lower row id.
    """
    X = X.X if hasattr(X, "X") else X
    D = X.shape[0]
    if D < k + 1:
        raise InputError(f"need at least {k + 1} documents for {k} neighbors, got {D}")
    if weighting == "tfidf":
        X = _tfidf(X)
    elif weighting != "tf":
        raise InputError(f"unknown weighting {weighting!r}")
    Xn = _row_normalize(X)
    XnT = Xn.T.tocsr()

    out = np.empty((D, k), dtype=np.int64)
    for start in range(0, D, block_size):
        stop = min(start + block_size, D)
        sims = np.asarray((Xn[start:stop] @ XnT).todense())
        # rounding lets mathematically equal cosines tie so the lower id wins
        sims = np.round(sims, 12)
        sims[np.arange(stop - start), np.arange(start, stop)] = -np.inf
        out[start:stop] = np.argsort(-sims, axis=1, kind="stable")[:, :k]
    return out


def build_document_graph(corpus, k_neighbors=5, weighting="tf"):
    """Symmetric 0/1 graph linking each document to its top-k neighbors.

    ``W[i, j] = 1`` when either document is among the other's neighbors.
    """
    nn = nearest_neighbors(corpus, k_neighbors, weighting)
    D = nn.shape[0]
    rows = np.repeat(np.arange(D), k_neighbors)
    A = ssp.csr_matrix((np.ones(rows.size), (rows, nn.ravel())), shape=(D, D))
    W = ((A + A.T) > 0).astype(np.float64)
    return DocumentGraph.from_adjacency(W)


def manifold_penalty(theta, graph):
    """0.5 * sum_k sum_ij (theta_ik - theta_jk)^2 W_ij, via the graph Laplacian."""
    theta = np.asarray(theta, dtype=np.float64)
    W = graph.W if isinstance(graph, DocumentGraph) else ssp.csr_matrix(graph)
    degree = graph.degree if isinstance(graph, DocumentGraph) else np.asarray(W.sum(axis=1)).ravel()
    Lt = degree[:, None] * theta - W @ theta
    return max(float(np.sum(theta * Lt)), 0.0)


def neighbor_mean(theta, graph):
    """Average of each document's neighbor rows; isolated rows are returned unchanged."""
    sums = graph.W @ theta
    out = theta.copy()
    has = graph.degree > 0
    out[has] = sums[has] / graph.degree[has, None]
    return out
