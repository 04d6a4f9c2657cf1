import math

import numpy as np
import pytest

from hinlab import (
    DegenerateError, LinkGroup, ObjectGroup, SplitSpec, build_hin, evaluate_grid,
    precision_recall_f1, run_alpha_grid, run_randomization_study, split_likes, two_path_recommend,
)
from hinlab.evaluation import read_results_csv, read_study_csv, write_results_csv, write_study_csv
from hinlab.recommender import RecommendationSet


def likes_hin(n_users=10, n_items=10, with_rates=True):
    groups = [ObjectGroup("user", tuple(map(str, range(n_users)))),
              ObjectGroup("movie", tuple(map(str, range(n_items))))]
    pairs = [(u, i) for u in range(n_users) for i in range(n_items)]
    links = [LinkGroup.from_pairs("likes", "user", "movie", pairs)]
    if with_rates:
        links.append(LinkGroup.from_pairs("rates", "user", "movie", pairs + [(0, 0)]))
    return build_hin(groups, links)


def test_split_counts_and_partition():
    hin = likes_hin()
    train, test = split_likes(hin, SplitSpec(0.1, seed=4))
    assert len(test) == 10
    original = hin.link("likes").edge_set()
    kept = train.link("likes").edge_set()
    assert kept | test.edge_set() == original and not kept & test.edge_set()
    assert not train.link("rates").edge_set() & test.edge_set()
    again_train, again_test = split_likes(hin, SplitSpec(0.1, seed=4))
    assert again_test.edge_set() == test.edge_set()
    with pytest.raises(ValueError):
        SplitSpec(1.0)


def recs_for(lists, n=2):
    items = tuple(np.array(x, dtype=np.int64) for x in lists)
    scores = tuple(np.ones(len(x)) for x in lists)
    return RecommendationSet(n, "user", "movie", items, scores, "fixed")


def test_metrics_by_hand():
    test = LinkGroup.from_pairs("t", "user", "movie", [(0, 1)])
    m = precision_recall_f1(recs_for([[1, 2]]), test)
    assert (m.precision, m.recall, m.f1) == (0.5, 1.0, pytest.approx(2 / 3))
    assert precision_recall_f1(recs_for([[3, 4]]), test).f1 == 0.0
    # three users: hit 1 of 2 lists items / 2 truths, empty list, full hit
    test = LinkGroup.from_pairs("t", "user", "movie", [(0, 1), (0, 5), (1, 2), (2, 3)])
    m = precision_recall_f1(recs_for([[1, 2], [], [3, 4]]), test)
    f_user0, f_user2 = 0.5, 2 * 0.5 * 1.0 / 1.5
    assert m.n_users == 3
    assert m.precision == pytest.approx((0.5 + 0 + 0.5) / 3)
    assert m.recall == pytest.approx((0.5 + 0 + 1.0) / 3)
    assert m.f1 == pytest.approx((f_user0 + f_user2) / 3)
    with pytest.raises(DegenerateError):
        precision_recall_f1(recs_for([[1]]), LinkGroup.from_pairs("t", "user", "movie", []))


def test_own_training_likes_score_zero(ml100k):
    recs = two_path_recommend(ml100k, "Lo", "Ty", 0.4, 10)
    assert precision_recall_f1(recs, ml100k.link("likes")).f1 == 0.0


def test_single_cell_matches_direct(ml100k):
    split = SplitSpec(0.1, seed=3)
    (row,) = run_alpha_grid(ml100k, "Lo", "Ty", [0.6], [5], split)
    train, test = split_likes(ml100k, split)
    direct = precision_recall_f1(two_path_recommend(train, "Lo", "Ty", 0.6, 5), test)
    assert row.f1 == direct.f1 and row.precision == direct.precision
    assert 1.0 <= row.mi_diversity <= 19 and 1.0 <= row.col_diversity <= 19


def test_grid_shape_and_csv(ml100k, tmp_path):
    rows = run_alpha_grid(ml100k, "Lo", "Ty", sizes=[5, 10], split=SplitSpec(0.1, 2), dataset="ml100k")
    assert len(rows) == 12
    write_results_csv(tmp_path / "g.csv", rows)
    back = read_results_csv(tmp_path / "g.csv")
    assert sorted(back, key=lambda r: (-r.alpha, r.list_size)) == sorted(rows, key=lambda r: (-r.alpha, r.list_size))
    again = run_alpha_grid(ml100k, "Lo", "Ty", sizes=[5, 10], split=SplitSpec(0.1, 2), dataset="ml100k")
    write_results_csv(tmp_path / "h.csv", again)
    assert (tmp_path / "g.csv").read_bytes() == (tmp_path / "h.csv").read_bytes()


def test_study_single_replicate_collapses(ml100k, tmp_path):
    out = run_randomization_study(ml100k, "Lo", "Ty", "Lo", replicates=1, alphas=[0.4], sizes=[5],
                                  split=SplitSpec(0.1, 1), master_seed=1)
    assert len(out.rows) == 3
    for row in out.rows:
        assert row.q_low == row.median == row.q_high and row.replicates == 1
    write_study_csv(tmp_path / "s.csv", out.rows)
    assert read_study_csv(tmp_path / "s.csv") == out.rows
    assert (tmp_path / "s.csv").read_text().splitlines()[0] == \
        "metric,alpha,list_size,original,q10,median,q90,replicates"


def test_constant_metric_band():
    # one shared location: no swap is possible, so every replicate equals the original
    rng = np.random.default_rng(0)
    n_users, n_items = 30, 20
    groups = [ObjectGroup("user", tuple(map(str, range(n_users)))),
              ObjectGroup("movie", tuple(map(str, range(n_items)))),
              ObjectGroup("type", ("a", "b", "c")), ObjectGroup("location", ("z",))]
    likes = {(u, int(i)) for u in range(n_users) for i in rng.choice(n_items, 6, replace=False)}
    hin = build_hin(groups, [
        LinkGroup.from_pairs("likes", "user", "movie", sorted(likes)),
        LinkGroup.from_pairs("Ty", "movie", "type", [(i, i % 3) for i in range(n_items)]),
        LinkGroup.from_pairs("Lo", "user", "location", [(u, 0) for u in range(n_users)]),
    ])
    out = run_randomization_study(hin, "Lo", "Ty", "Lo", replicates=4, alphas=[0.5, 0.0],
                                  sizes=[2, 4], split=SplitSpec(0.2, 0), master_seed=9)
    assert len(out.rows) == 2 * 2 * 3
    for row in out.rows:
        assert row.q_low == row.median == row.q_high
        assert row.original == row.median or (math.isnan(row.original) and math.isnan(row.median))
    assert all(jac == 1.0 for _, _, _, jac in out.manifest)
