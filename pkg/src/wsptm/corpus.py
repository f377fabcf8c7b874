"""
Corpus ingestion: tokenization, vocabulary construction and seed words.

Corpus files hold one document per line with three tab-separated fields::

    <label or ->    <train|test>    <text>

Seed files hold one label per line::

    <label id>    word[,word...]

Labels are 0-based integers. A label of ``-`` marks an unlabeled document.
"""
import hashlib
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as ssp

from wsptm.exceptions import InputError

logger = logging.getLogger(__name__)

SPLITS = ("train", "test")

_TOKEN_RE = re.compile(r"[a-z0-9]+")


def tokenize(text):
    """Lowercase ``text`` and split it on runs of non-alphanumeric characters."""
    return _TOKEN_RE.findall(text.lower())


def english_stopwords():
    from sklearn.feature_extraction.text import ENGLISH_STOP_WORDS

    return frozenset(ENGLISH_STOP_WORDS)


def read_stopwords(path):
    with open(path, encoding="utf-8") as f:
        return frozenset(w.strip().lower() for w in f if w.strip())


class Vocabulary:
    """Dense, ordered mapping between word strings and integer ids."""

    def __init__(self, words):
        self.words = list(words)
        self.index = {w: i for i, w in enumerate(self.words)}
        if len(self.index) != len(self.words):
            raise InputError("vocabulary contains duplicate words")
        if not self.words:
            raise InputError("vocabulary is empty")

    def __len__(self):
        return len(self.words)

    def __contains__(self, word):
        return word in self.index

    def __getitem__(self, word):
        return self.index[word]

    def digest(self):
        """SHA-256 of the ordered word list; identifies the vocabulary in checkpoints."""
        h = hashlib.sha256()
        for w in self.words:
            h.update(w.encode("utf-8"))
            h.update(b"\n")
        return h.hexdigest()


@dataclass(frozen=True)
class Document:
    id: int
    tokens: np.ndarray
    gold_label: int | None = None
    split: str = "train"

    @property
    def length(self):
        return len(self.tokens)

    @property
    def tf(self):
        """Sparse term frequencies as a ``(word_ids, counts)`` pair."""
        return np.unique(self.tokens, return_counts=True)


@dataclass
class Corpus:
    """An indexed document collection.

    ``X`` is the D x V document-term count matrix in CSR form and is the
    representation every numeric routine in the package works on.
    """

    vocabulary: Vocabulary
    documents: list
    K: int
    X: ssp.csr_matrix = field(init=False, repr=False)

    def __post_init__(self):
        V = len(self.vocabulary)
        for i, doc in enumerate(self.documents):
            if doc.id != i:
                raise InputError(f"document ids must be dense; got {doc.id} at position {i}")
            if doc.gold_label is not None and not 0 <= doc.gold_label < self.K:
                raise InputError(f"document {i}: gold label {doc.gold_label} outside [0, {self.K})")
            if doc.length == 0:
                raise InputError(f"document {i} is empty")
        indptr = np.zeros(len(self.documents) + 1, dtype=np.int64)
        indptr[1:] = np.cumsum([d.length for d in self.documents])
        indices = np.concatenate([d.tokens for d in self.documents]) if self.documents else np.zeros(0, int)
        if indices.size and indices.max() >= V:
            raise InputError("token id outside the vocabulary")
        X = ssp.csr_matrix(
            (np.ones(len(indices)), indices, indptr), shape=(len(self.documents), V)
        )
        X.sum_duplicates()
        X.sort_indices()
        self.X = X

    @property
    def D(self):
        return len(self.documents)

    @property
    def V(self):
        return len(self.vocabulary)

    def gold(self):
        """Gold labels as an int array, -1 where a document is unlabeled."""
        return np.array([-1 if d.gold_label is None else d.gold_label for d in self.documents])

    def split_ids(self, split):
        return np.array([d.id for d in self.documents if d.split == split], dtype=np.int64)


def build_corpus(records, K=None, min_doc_freq=5, min_word_len=2, stopwords=None):
    """Build a :class:`Corpus` from ``(label, split, text)`` records.

    Parameters
    ----------
    records : iterable of (int or None, str, str)
        Gold label (``None`` if unknown), split name and raw text.
    K : int, optional
        Number of labels. Inferred as ``max(gold) + 1`` when omitted.
    min_doc_freq : int
        Words appearing in fewer documents are removed.
    min_word_len : int
        Words shorter than this many characters are removed.
    stopwords : collection of str, optional
        Words to remove before counting document frequencies.

    Notes
    -----
    The vocabulary keeps first-occurrence order over the input, so ids do
    not depend on the train/test split. Documents left empty by filtering
    are dropped and the remaining ids renumbered.
    """
    stopwords = frozenset() if stopwords is None else frozenset(stopwords)
    raw = []
    for label, split, text in records:
        if split not in SPLITS:
            raise InputError(f"unknown split {split!r}")
        words = [w for w in tokenize(text) if len(w) >= min_word_len and w not in stopwords]
        raw.append((label, split, words))

    doc_freq = {}
    for _, _, words in raw:
        for w in dict.fromkeys(words):
            doc_freq[w] = doc_freq.get(w, 0) + 1
    kept = [w for w, df in doc_freq.items() if df >= min_doc_freq]
    if not kept:
        raise InputError("corpus is empty after filtering")
    vocab = Vocabulary(kept)

    documents = []
    dropped = 0
    for label, split, words in raw:
        ids = np.fromiter((vocab.index[w] for w in words if w in vocab.index), dtype=np.int64)
        if ids.size == 0:
            dropped += 1
            continue
        documents.append(Document(len(documents), ids, label, split))
    if dropped:
        logger.info("dropped %d documents left empty after filtering", dropped)
    if not documents:
        raise InputError("corpus is empty after filtering")

    if K is None:
        labels = [d.gold_label for d in documents if d.gold_label is not None]
        if not labels:
            raise InputError("cannot infer the number of labels from an unlabeled corpus")
        K = max(labels) + 1
    return Corpus(vocab, documents, K)


def read_corpus_records(path):
    """Parse a corpus file into ``(label, split, text)`` records."""
    records = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\n").rstrip("\r")
            if not line.strip():
                continue
            parts = line.split("\t", 2)
            if len(parts) != 3:
                raise InputError(f"{path}:{lineno}: expected 3 tab-separated fields, got {len(parts)}")
            label, split, text = parts
            label = label.strip()
            if label == "-":
                gold = None
            else:
                try:
                    gold = int(label)
                except ValueError:
                    raise InputError(f"{path}:{lineno}: bad label {label!r}") from None
                if gold < 0:
                    raise InputError(f"{path}:{lineno}: negative label {gold}")
            split = split.strip()
            if split not in SPLITS:
                raise InputError(f"{path}:{lineno}: split must be one of {SPLITS}, got {split!r}")
            records.append((gold, split, text))
    return records


def load_corpus(docs_path, min_doc_freq=5, min_word_len=2, stopwords="english", K=None):
    """Read and preprocess a corpus file.

    ``stopwords`` is a path to a one-word-per-line file, ``"english"`` for
    the standard English list, or ``None`` to keep every word.
    """
    path = Path(docs_path)
    if not path.is_file():
        raise InputError(f"corpus file not found: {path}")
    if stopwords == "english":
        stop = english_stopwords()
    elif stopwords is None:
        stop = None
    else:
        stop = read_stopwords(stopwords)
    return build_corpus(read_corpus_records(path), K, min_doc_freq, min_word_len, stop)


@dataclass(frozen=True)
class SeedWordSet:
    """Per-label lists of vocabulary ids."""

    sets: tuple

    @property
    def K(self):
        return len(self.sets)

    def indicator(self, V):
        """V x K 0/1 matrix with a one where word v is a seed of label k."""
        rows = np.concatenate([np.asarray(s, dtype=np.int64) for s in self.sets])
        cols = np.concatenate([np.full(len(s), k) for k, s in enumerate(self.sets)])
        return ssp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(V, self.K))

    def words(self, vocabulary):
        return [[vocabulary.words[i] for i in s] for s in self.sets]


def read_seed_file(path):
    """Parse a seed file into ``{label: [word, ...]}`` (order preserved)."""
    path = Path(path)
    if not path.is_file():
        raise InputError(f"seed file not found: {path}")
    seeds = {}
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.strip()
            if not line:
                continue
            parts = line.split("\t", 1)
            if len(parts) != 2:
                raise InputError(f"{path}:{lineno}: expected 'label<TAB>word[,word...]'")
            try:
                label = int(parts[0])
            except ValueError:
                raise InputError(f"{path}:{lineno}: bad label {parts[0]!r}") from None
            words = [w for entry in parts[1].split(",") for w in tokenize(entry)]
            seeds.setdefault(label, []).extend(words)
    return seeds


def build_seed_words(seeds, corpus, purify=True, rng_seed=0):
    """Map ``{label: [word, ...]}`` onto the corpus vocabulary.

    Seed words missing from the vocabulary are dropped with a warning. With
    ``purify``, a word listed under several labels is kept under exactly one
    of them, chosen uniformly with ``rng_seed``.
    """
    K = corpus.K
    for label in seeds:
        if not 0 <= label < K:
            raise InputError(f"seed label {label} outside [0, {K})")

    sets = [[] for _ in range(K)]
    for label in sorted(seeds):
        for w in seeds[label]:
            if w not in corpus.vocabulary:
                logger.warning("seed word %r of label %d not in vocabulary; dropped", w, label)
                continue
            v = corpus.vocabulary[w]
            if v not in sets[label]:
                sets[label].append(v)

    if purify:
        owners = {}
        for k, s in enumerate(sets):
            for v in s:
                owners.setdefault(v, []).append(k)
        rng = np.random.default_rng(rng_seed)
        for v in sorted(owners):
            labels = owners[v]
            if len(labels) < 2:
                continue
            keep = labels[rng.integers(len(labels))]
            for k in labels:
                if k != keep:
                    sets[k].remove(v)

    for k, s in enumerate(sets):
        if not s:
            raise InputError(f"label {k} has no seed words in the vocabulary")
    return SeedWordSet(tuple(tuple(s) for s in sets))


def load_seed_words(path, corpus, purify=True, rng_seed=0):
    return build_seed_words(read_seed_file(path), corpus, purify, rng_seed)


def count_seed_occurrences(corpus, seeds):
    """Seed-token counts per document and label, and corpus counts per word.

    Returns
    -------
    DF : ndarray, shape (D, K)
        Number of tokens of document d that are seed words of label k.
    TF : ndarray, shape (V,)
        Number of tokens of word v in the whole corpus.
    """
    X = corpus.X
    DF = np.asarray((X @ seeds.indicator(X.shape[1])).todense())
    TF = np.asarray(X.sum(axis=0)).ravel()
    return DF, TF
