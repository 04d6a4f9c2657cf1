"""Hold-out splits, top-N accuracy, the alpha grid and the shuffle study."""
from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields

import numpy as np

from .diversity import DegenerateError, collective_diversity, mean_individual_diversity
from .hin import Hin, HinError, LinkGroup
from .randomizer import ShuffleConfig, jaccard, replicate_seed, shuffle_link_group
from .recommender import RecommendationSet, exclusion_matrix, rank_all, two_path_spec
from .walks import source_matrix

DEFAULT_ALPHAS = (1.0, 0.8, 0.6, 0.4, 0.2, 0.0)
DEFAULT_SIZES = (5, 10, 15, 20)
AVERAGING = "macro over users with at least one test edge"


@dataclass(frozen=True)
class SplitSpec:
    fraction: float = 0.1
    seed: int = 0
    relation: str = "likes"
    rates: str | None = "rates"

    def __post_init__(self):
        if not 0.0 < self.fraction < 1.0:
            raise ValueError("hold-out fraction must lie in (0, 1)")


def split_likes(hin: Hin, spec: SplitSpec):
    """Hide ``floor(fraction * |pairs|)`` distinct user-item like pairs.

    Hidden pairs leave both the likes and the rates relation of the training
    network. Returns ``(train, test)``; ``test`` is a simple link group.
    """
    likes = hin.link(spec.relation)
    pairs = np.unique(likes.pairs(), axis=0)
    k = int(math.floor(spec.fraction * len(pairs)))
    rng = np.random.default_rng(int(spec.seed))
    hidden = np.sort(rng.choice(len(pairs), size=k, replace=False))
    test = LinkGroup.from_pairs(f"{spec.relation}_test", likes.source, likes.target, pairs[hidden])
    n_items = len(hin.group(likes.target))
    hidden_keys = pairs[hidden, 0] * n_items + pairs[hidden, 1]

    def drop_hidden(lg):
        keep = ~np.isin(lg.src * n_items + lg.dst, hidden_keys)
        values = None if lg.values is None else lg.values[keep]
        return LinkGroup(lg.name, lg.source, lg.target, lg.src[keep], lg.dst[keep], values)

    replaced = [drop_hidden(likes)]
    if spec.rates and spec.rates in hin.link_groups:
        rates = hin.link(spec.rates)
        if (rates.source, rates.target) != (likes.source, likes.target):
            raise HinError(f"{spec.rates!r} does not join the same groups as {spec.relation!r}")
        replaced.append(drop_hidden(rates))
    return hin.with_link_groups(replaced), test


@dataclass(frozen=True)
class Metrics:
    precision: float
    recall: float
    f1: float
    n_users: int


def precision_recall_f1(recs: RecommendationSet, test: LinkGroup) -> Metrics:
    """Per-user precision, recall and F1, macro-averaged over users with test edges.

    An empty list has precision 0; F1 is 0 when precision and recall are both 0.
    """
    by_user = {}
    for u, i in zip(test.src.tolist(), test.dst.tolist()):
        by_user.setdefault(u, set()).add(i)
    if not by_user:
        raise DegenerateError("empty test set")
    p_sum = r_sum = f_sum = 0.0
    for u, truth in by_user.items():
        lst = recs.items[u].tolist() if u < len(recs.items) else []
        hits = len(truth.intersection(lst))
        p = hits / len(lst) if lst else 0.0
        r = hits / len(truth)
        f = 2 * p * r / (p + r) if p + r > 0 else 0.0
        p_sum, r_sum, f_sum = p_sum + p, r_sum + r, f_sum + f
    n = len(by_user)
    return Metrics(p_sum / n, r_sum / n, f_sum / n, n)


@dataclass(frozen=True)
class ExperimentResult:
    dataset: str
    x: str
    y: str
    alpha: float
    list_size: int
    replicate: int
    f1: float
    precision: float
    recall: float
    mi_diversity: float
    col_diversity: float


def write_results_csv(path, results):
    names = [f.name for f in fields(ExperimentResult)]
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(names)
        for r in sorted(results, key=_result_key):
            row = asdict(r)
            w.writerow([repr(v) if isinstance(v, float) else v for v in (row[n] for n in names)])


def read_results_csv(path):
    out = []
    with open(path, newline="", encoding="utf-8") as f:
        for row in csv.DictReader(f):
            out.append(ExperimentResult(
                row["dataset"], row["x"], row["y"], float(row["alpha"]), int(row["list_size"]),
                int(row["replicate"]), float(row["f1"]), float(row["precision"]),
                float(row["recall"]), float(row["mi_diversity"]), float(row["col_diversity"])))
    return out


def _result_key(r):
    return (r.dataset, r.x, r.y, r.replicate, -r.alpha, r.list_size)


def _diversities(train: Hin, recs: RecommendationSet, diversity_relation: str):
    hin = train.with_link_groups([recs.to_link_group("rec")])
    path = [("rec", False), (diversity_relation, False)]
    try:
        mi = mean_individual_diversity(hin, path).value
        col = collective_diversity(hin, path).value
    except DegenerateError:
        mi = col = float("nan")
    return mi, col


def evaluate_grid(train: Hin, test: LinkGroup, x: str, y: str, alphas, sizes,
                  dataset: str = "", replicate: int = 0, likes: str = "likes",
                  exclude: str | None = None, diversity_relation: str = "Ty"):
    """One result per (alpha, list size) on an already split network."""
    sizes = sorted(int(n) for n in sizes)
    if not sizes or sizes[0] < 1:
        raise ValueError("list sizes must be >= 1")
    alphas = [float(a) for a in alphas]
    specs = [two_path_spec(train, x, y, a, likes) for a in alphas]
    excl_rel = exclude or likes
    base = specs[0]
    excluded = exclusion_matrix(train, excl_rel, len(train.group(base.source)),
                                 len(train.group(base.target)))
    # the two path matrices are shared by every alpha
    user_rows = source_matrix(train, specs[0].paths[0][0])
    item_rows = source_matrix(train, specs[0].paths[1][0])
    out = []
    for alpha, spec in zip(alphas, specs):
        if alpha == 0.0:
            scores = user_rows
        elif alpha == 1.0:
            scores = item_rows
        else:
            scores = user_rows * (1.0 - alpha) + item_rows * alpha
        items, vals = rank_all(scores, excluded, sizes[-1])
        full = RecommendationSet(sizes[-1], spec.source, spec.target, items, vals,
                                 f"two-path X={x} Y={y} alpha={alpha:g}")
        for n in sizes:
            recs = full.truncate(n)
            m = precision_recall_f1(recs, test)
            mi, col = _diversities(train, recs, diversity_relation)
            out.append(ExperimentResult(dataset, x, y, alpha, n, replicate,
                                        m.f1, m.precision, m.recall, mi, col))
    return out


def run_alpha_grid(hin: Hin, x: str, y: str, alphas=DEFAULT_ALPHAS, sizes=DEFAULT_SIZES,
                   split: SplitSpec = SplitSpec(), dataset: str = "", **kw):
    """Split once, then evaluate every (alpha, list size) cell on that split."""
    train, test = split_likes(hin, split)
    return evaluate_grid(train, test, x, y, alphas, sizes, dataset=dataset,
                         likes=split.relation, **kw)


@dataclass(frozen=True)
class StudyRow:
    metric: str
    alpha: float
    list_size: int
    original: float
    q_low: float
    median: float
    q_high: float
    replicates: int


STUDY_METRICS = ("f1", "mi_diversity", "col_diversity")


def write_study_csv(path, rows, quantiles=(0.1, 0.9)):
    lo, hi = (f"q{round(q * 100):02d}" for q in quantiles)
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["metric", "alpha", "list_size", "original", lo, "median", hi, "replicates"])
        for r in rows:
            w.writerow([r.metric, repr(r.alpha), r.list_size, repr(r.original), repr(r.q_low),
                        repr(r.median), repr(r.q_high), r.replicates])


def read_study_csv(path):
    rows = []
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        next(reader)
        for m, a, n, o, lo, med, hi, k in reader:
            rows.append(StudyRow(m, float(a), int(n), float(o), float(lo), float(med), float(hi), int(k)))
    return rows


def _replicate_job(args):
    train, test, shuffled, index, seed, swap_factor, x, y, alphas, sizes, kw = args
    shuffled_hin = shuffle_link_group(train, ShuffleConfig(shuffled, seed, swap_factor))
    results = evaluate_grid(shuffled_hin, test, x, y, alphas, sizes, replicate=index, **kw)
    jac = jaccard(train.link(shuffled), shuffled_hin.link(shuffled))
    return index, seed, jac, results


@dataclass
class StudyOutcome:
    rows: list
    original: list
    replicates: list  # ExperimentResult for every replicate
    manifest: list  # (index, seed, relation, jaccard)


def run_randomization_study(hin: Hin, x: str, y: str, shuffled: str, replicates: int = 10,
                            alphas=(0.8, 0.6, 0.4, 0.2, 0.0), sizes=DEFAULT_SIZES,
                            quantiles=(0.1, 0.9), split: SplitSpec = SplitSpec(),
                            master_seed: int = 0, swap_factor: float = 10.0, jobs: int = 1,
                            dataset: str = "", **kw) -> StudyOutcome:
    """Compare the original network with ``replicates`` shuffles of one relation.

    Every replicate is evaluated on the split of the original, and bands are
    taken per (metric, alpha, list size).
    """
    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    train, test = split_likes(hin, split)
    kw = dict(kw, dataset=dataset, likes=split.relation)
    original = evaluate_grid(train, test, x, y, alphas, sizes, replicate=0, **kw)
    jobs_args = [(train, test, shuffled, i, replicate_seed(master_seed, i), swap_factor,
                  x, y, alphas, sizes, kw) for i in range(1, replicates + 1)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            done = list(pool.map(_replicate_job, jobs_args))
    else:
        done = [_replicate_job(a) for a in jobs_args]
    done.sort(key=lambda t: t[0])
    rep_results = [r for _, _, _, res in done for r in res]
    manifest = [(i, seed, shuffled, jac) for i, seed, jac, _ in done]

    rows = []
    for metric in STUDY_METRICS:
        for o in sorted(original, key=lambda r: (-r.alpha, r.list_size)):
            vals = np.array([getattr(r, metric) for r in rep_results
                             if r.alpha == o.alpha and r.list_size == o.list_size])
            q_lo, med, q_hi = np.quantile(vals, [quantiles[0], 0.5, quantiles[1]])
            rows.append(StudyRow(metric, o.alpha, o.list_size, getattr(o, metric),
                                 float(q_lo), float(med), float(q_hi), len(vals)))
    return StudyOutcome(rows, original, rep_results, manifest)
