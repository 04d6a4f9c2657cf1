"""Meta-path spreading recommender and the UBCF / IPP baselines."""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .hin import Hin, HinError, LinkGroup, MetaPath, validate_meta_path
from .walks import resolve_meta_path, source_matrix


@dataclass(frozen=True)
class MixedPathSpec:
    """Convex mixture of meta-paths sharing source (users) and target (items)."""

    paths: tuple  # ((MetaPath, weight), ...)

    def __post_init__(self):
        paths = tuple((mp, float(w)) for mp, w in self.paths)
        if not paths:
            raise HinError("a mixture needs at least one meta-path")
        if any(w < 0 for _, w in paths):
            raise HinError("mixture weights must be non-negative")
        if abs(sum(w for _, w in paths) - 1.0) > 1e-9:
            raise HinError("mixture weights must sum to 1")
        ends = {(mp.source, mp.target) for mp, _ in paths}
        if len(ends) != 1:
            raise HinError(f"meta-paths do not share endpoints: {sorted(ends)}")
        object.__setattr__(self, "paths", paths)

    @classmethod
    def build(cls, hin: Hin, paths) -> MixedPathSpec:
        return cls(tuple((resolve_meta_path(hin, p), w) for p, w in paths))

    @property
    def source(self):
        return self.paths[0][0].source

    @property
    def target(self):
        return self.paths[0][0].target

    def __str__(self):
        return " + ".join(f"{w:g}*[{mp}]" for mp, w in self.paths)


@dataclass(frozen=True, eq=False)
class RecommendationSet:
    n: int
    user_group: str
    item_group: str
    items: tuple  # per user index: int array of item indices, best first
    scores: tuple  # per user index: float array aligned with items
    provenance: str

    def __eq__(self, other):
        if not isinstance(other, RecommendationSet):
            return NotImplemented
        return (self.n, self.user_group, self.item_group, self.provenance) == \
            (other.n, other.user_group, other.item_group, other.provenance) and \
            all(np.array_equal(a, b) for a, b in zip(self.items, other.items)) and \
            all(np.array_equal(a, b) for a, b in zip(self.scores, other.scores))

    __hash__ = None

    def __len__(self):
        return len(self.items)

    def n_edges(self):
        return sum(len(x) for x in self.items)

    def truncate(self, n) -> RecommendationSet:
        return RecommendationSet(n, self.user_group, self.item_group,
                                 tuple(x[:n] for x in self.items),
                                 tuple(s[:n] for s in self.scores), self.provenance)

    def to_link_group(self, name="rec") -> LinkGroup:
        src = np.repeat(np.arange(len(self.items)), [len(x) for x in self.items])
        dst = np.concatenate(self.items) if self.items else np.zeros(0, dtype=np.int64)
        return LinkGroup(name, self.user_group, self.item_group, src, dst)

    def to_csv(self, path, hin: Hin):
        users = hin.group(self.user_group).labels
        items = hin.group(self.item_group).labels
        with open(path, "w", newline="", encoding="utf-8") as f:
            w = csv.writer(f)
            w.writerow(["user", "rank", "item", "score"])
            for u, (lst, sc) in enumerate(zip(self.items, self.scores)):
                for rank, (i, s) in enumerate(zip(lst.tolist(), sc.tolist()), start=1):
                    w.writerow([users[u], rank, items[i], repr(float(s))])


def score_matrix(hin: Hin, spec: MixedPathSpec, jobs: int = 1) -> sp.csr_matrix:
    """Spreading scores for every user at once (rows are users)."""
    total = None
    for mp, w in spec.paths:
        if w == 0:
            continue
        part = source_matrix(hin, mp, jobs=jobs) * w
        total = part if total is None else total + part
    if total is None:
        total = sp.csr_matrix((len(hin.group(spec.source)), len(hin.group(spec.target))))
    return sp.csr_matrix(total)


def spread_scores(hin: Hin, spec: MixedPathSpec, user) -> np.ndarray:
    group = hin.group(spec.source)
    u = int(user) if isinstance(user, (int, np.integer)) else group.index(user)
    if not 0 <= u < len(group):
        raise HinError(f"unknown user index {user}")
    out = np.zeros(len(hin.group(spec.target)))
    for mp, w in spec.paths:
        if w:
            out += w * source_matrix(hin, mp, [u]).toarray().ravel()
    return out


def recommend_top_n(scores, exclusions, n: int, keep_zero: bool = False) -> list:
    """Highest scores first, ties by ascending item index; excluded items never appear.

    Zero-score items are dropped unless ``keep_zero`` (used by the popularity
    baseline, whose contract lists every eligible item).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    scores = np.asarray(scores, dtype=float)
    eligible = np.ones(len(scores), dtype=bool)
    excl = np.fromiter((int(i) for i in exclusions), dtype=np.int64)
    eligible[excl] = False
    if not keep_zero:
        eligible &= scores > 0
    cand = np.flatnonzero(eligible)
    order = np.lexsort((cand, -scores[cand]))
    return cand[order[:n]].tolist()


def exclusion_matrix(hin: Hin, relation, n_users, n_items) -> sp.csr_matrix:
    lg = hin.link(relation)
    m = sp.csr_matrix((np.ones(len(lg)), (lg.src, lg.dst)), shape=(n_users, n_items))
    m.sum_duplicates()
    return m


def rank_all(scores: sp.spmatrix | np.ndarray, excluded: sp.csr_matrix, n: int,
             keep_zero: bool = False):
    """Batch form of :func:`recommend_top_n` over a users x items score matrix."""
    dense = scores.toarray() if sp.issparse(scores) else np.array(scores, dtype=float)
    n_users, n_items = dense.shape
    items, vals = [], []
    excl = sp.csr_matrix(excluded)
    for u in range(n_users):
        row = dense[u]
        eligible = np.ones(n_items, dtype=bool)
        eligible[excl.indices[excl.indptr[u]:excl.indptr[u + 1]]] = False
        if not keep_zero:
            eligible &= row > 0
        cand = np.flatnonzero(eligible)
        if len(cand) > n:
            # partial selection, then an exact (score desc, index asc) sort of the survivors
            kth = np.partition(-row[cand], n - 1)[n - 1]
            cand = cand[-row[cand] <= kth]
        order = np.lexsort((cand, -row[cand]))[:n]
        chosen = cand[order]
        items.append(chosen.astype(np.int64))
        vals.append(row[chosen])
    return tuple(items), tuple(vals)


def _path(hin, steps) -> MetaPath:
    return validate_meta_path(hin, steps)


def two_path_spec(hin: Hin, x: str, y: str, alpha: float, likes: str = "likes") -> MixedPathSpec:
    """Weights (1 - alpha) on the user-content path and alpha on the item-content path."""
    if not 0.0 <= alpha <= 1.0:
        raise HinError(f"alpha must lie in [0, 1], got {alpha}")
    user_path = _path(hin, [(x, False), (x, True), (likes, False)])
    item_path = _path(hin, [(likes, False), (y, False), (y, True)])
    return MixedPathSpec(((user_path, 1.0 - alpha), (item_path, alpha)))


def two_path_recommend(hin: Hin, x: str, y: str, alpha: float, n: int,
                       likes: str = "likes", exclude: str | None = None,
                       jobs: int = 1) -> RecommendationSet:
    """Recommend from ``(1-alpha) p_{X X^-1 likes} + alpha p_{likes Y Y^-1}``.

    Items the user already likes are excluded; pass ``exclude="rates"`` to
    exclude every rated item instead.
    """
    spec = two_path_spec(hin, x, y, alpha, likes)
    return recommend_mixture(hin, spec, n, exclude or likes, jobs=jobs,
                             provenance=f"two-path X={x} Y={y} alpha={alpha:g}")


def recommend_mixture(hin: Hin, spec: MixedPathSpec, n: int, exclude: str,
                      jobs: int = 1, provenance: str | None = None) -> RecommendationSet:
    n_users, n_items = len(hin.group(spec.source)), len(hin.group(spec.target))
    scores = score_matrix(hin, spec, jobs=jobs)
    excluded = exclusion_matrix(hin, exclude, n_users, n_items)
    items, vals = rank_all(scores, excluded, n)
    return RecommendationSet(n, spec.source, spec.target, items, vals, provenance or str(spec))


def _binary(hin, relation):
    lg = hin.link(relation)
    n_users, n_items = len(hin.group(lg.source)), len(hin.group(lg.target))
    b = sp.csr_matrix((np.ones(len(lg)), (lg.src, lg.dst)), shape=(n_users, n_items))
    b.sum_duplicates()
    b.data[:] = 1.0
    return b


def ubcf_recommend(hin: Hin, n: int, k: int = 50, likes: str = "likes",
                   exclude: str | None = "rates", popularity_fallback: bool = False) -> RecommendationSet:
    """User-based collaborative filtering.

    Cosine similarity on binary like vectors; each item scores the summed
    similarity of the ``k`` nearest neighbours who like it.
    """
    b = _binary(hin, likes)
    lg = hin.link(likes)
    n_users, n_items = b.shape
    norms = np.sqrt(np.asarray(b.sum(axis=1)).ravel())
    inv = np.divide(1.0, norms, out=np.zeros_like(norms), where=norms > 0)
    sim = (sp.diags(inv) @ b @ b.T @ sp.diags(inv)).toarray()
    np.fill_diagonal(sim, 0.0)
    weights = np.zeros_like(sim)
    for u in range(n_users):
        cand = np.flatnonzero(sim[u] > 0)
        if len(cand) > k:
            cand = cand[np.lexsort((cand, -sim[u, cand]))[:k]]
        weights[u, cand] = sim[u, cand]
    scores = weights @ b.toarray()
    excl_rel = exclude if exclude and exclude in hin.link_groups else likes
    excluded = exclusion_matrix(hin, excl_rel, n_users, n_items)
    items, vals = rank_all(scores, excluded, n)
    if popularity_fallback:
        pop = ipp_recommend(hin, n, likes=likes, exclude=exclude)
        items, vals = list(items), list(vals)
        for u in range(n_users):
            if len(items[u]) == 0:
                items[u], vals[u] = pop.items[u], pop.scores[u]
        items, vals = tuple(items), tuple(vals)
    return RecommendationSet(n, lg.source, lg.target, items, vals, f"UBCF k={k}")


def ipp_recommend(hin: Hin, n: int, likes: str = "likes", exclude: str | None = "rates") -> RecommendationSet:
    """Most-liked items overall, minus the ones the user has rated."""
    lg = hin.link(likes)
    n_users, n_items = len(hin.group(lg.source)), len(hin.group(lg.target))
    popularity = hin.in_degree(likes).astype(float)
    excl_rel = exclude if exclude and exclude in hin.link_groups else likes
    excluded = exclusion_matrix(hin, excl_rel, n_users, n_items)
    items, vals = rank_all(np.broadcast_to(popularity, (n_users, n_items)), excluded, n,
                           keep_zero=True)
    return RecommendationSet(n, lg.source, lg.target, items, vals, "IPP")
