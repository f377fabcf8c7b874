"""Planted-category corpora for tests, demos and the bundled toy data."""
import numpy as np


def _zipf(n, s, rng):
    w = 1.0 / np.arange(1, n + 1) ** s
    rng.shuffle(w)
    return w / w.sum()


def make_planted_corpus(
    n_docs=2000,
    K=4,
    n_seeds=2,
    words_per_class=60,
    n_background=300,
    doc_len=(40, 80),
    class_weights=None,
    category_share=(0.25, 0.55),
    leak=0.1,
    seed_rank=(4, 12),
    test_fraction=0.3,
    seed=0,
):
    """Sample documents from K planted categories plus shared background words.

    Each category owns a block of ``words_per_class`` words. A document of
    class c draws a share of its tokens (uniform in ``category_share``) from
    category c, mostly from c's block and with probability ``leak`` from a
    random other block, and the rest from the background block.

    Seed words of class c are taken from the middle of its frequency ranking
    (ranks in ``seed_rank``), so many documents contain no seed at all.

    Returns
    -------
    records : list of (int, str, str)
        ``(label, split, text)`` rows in corpus-file order.
    seeds : dict of int -> list of str
    """
    rng = np.random.default_rng(seed)
    if class_weights is None:
        class_weights = np.ones(K)
    class_weights = np.asarray(class_weights, dtype=float)
    class_weights /= class_weights.sum()

    blocks = [[f"c{k}w{i}" for i in range(words_per_class)] for k in range(K)]
    background = [f"bg{i}" for i in range(n_background)]
    cat_dists = [_zipf(words_per_class, 1.0, rng) for _ in range(K)]
    bg_dist = _zipf(n_background, 1.0, rng)

    seeds = {}
    lo, hi = seed_rank
    for k in range(K):
        ranked = np.argsort(-cat_dists[k], kind="stable")
        picks = rng.choice(np.arange(lo, hi), size=n_seeds, replace=False)
        seeds[k] = [blocks[k][i] for i in ranked[np.sort(picks)]]

    labels = rng.choice(K, size=n_docs, p=class_weights)
    records = []
    for c in labels:
        n = int(rng.integers(doc_len[0], doc_len[1] + 1))
        share = rng.uniform(*category_share)
        n_cat = rng.binomial(n, share)
        words = []
        for _ in range(n_cat):
            k = c if rng.random() >= leak else int(rng.integers(K))
            words.append(blocks[k][rng.choice(words_per_class, p=cat_dists[k])])
        words += [background[i] for i in rng.choice(n_background, size=n - n_cat, p=bg_dist)]
        rng.shuffle(words)
        split = "test" if rng.random() < test_fraction else "train"
        records.append((int(c), split, " ".join(words)))
    return records, seeds


def write_corpus_file(records, path):
    with open(path, "w", encoding="utf-8") as f:
        for label, split, text in records:
            f.write(f"{'-' if label is None else label}\t{split}\t{text}\n")


def write_seed_file(seeds, path):
    with open(path, "w", encoding="utf-8") as f:
        for k in sorted(seeds):
            f.write(f"{k}\t{','.join(seeds[k])}\n")
