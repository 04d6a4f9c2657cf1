import numpy as np
import pytest

from hinlab import HinError, LinkGroup, ObjectGroup, ShuffleConfig, build_hin, jaccard, shuffle_link_group
from hinlab.randomizer import replicate_seed, replicate_stream, write_replicate_manifest


def multi_membership(rng, n_users=60, n_groups=15):
    pairs = {(u, int(g)) for u in range(n_users)
             for g in rng.choice(n_groups, size=int(rng.integers(1, 6)), replace=False)}
    groups = [ObjectGroup("user", tuple(map(str, range(n_users)))),
              ObjectGroup("group", tuple(map(str, range(n_groups))))]
    return build_hin(groups, [LinkGroup.from_pairs("Gr", "user", "group", sorted(pairs)),
                              LinkGroup.from_pairs("Fr", "user", "user", [(0, 1), (1, 2), (2, 0)])])


def assert_degrees_kept(before, after, relation):
    a, b = before.link(relation), after.link(relation)
    assert len(a) == len(b)
    assert np.array_equal(before.out_degree(relation), after.out_degree(relation))
    assert np.array_equal(before.in_degree(relation), after.in_degree(relation))
    assert b.is_simple()


def test_degrees_and_other_relations():
    hin = multi_membership(np.random.default_rng(0))
    out = shuffle_link_group(hin, ShuffleConfig("Gr", 11))
    assert_degrees_kept(hin, out, "Gr")
    assert out.link("Fr") is hin.link("Fr")
    assert jaccard(hin.link("Gr"), out.link("Gr")) < 0.8


def test_self_relation_gains_no_loops():
    pairs = [(i, (i + 1) % 30) for i in range(30)] + [(i, (i + 7) % 30) for i in range(30)]
    hin = build_hin([ObjectGroup("u", tuple(map(str, range(30))))], [LinkGroup.from_pairs("Fr", "u", "u", pairs)])
    out = shuffle_link_group(hin, ShuffleConfig("Fr", 3))
    assert_degrees_kept(hin, out, "Fr")
    lg = out.link("Fr")
    assert not np.any(lg.src == lg.dst)


def test_single_target_is_identity():
    hin = build_hin([ObjectGroup("A", tuple("abcde")), ObjectGroup("B", ("x",))],
                    [LinkGroup.from_pairs("R", "A", "B", [(i, 0) for i in range(5)])])
    out = shuffle_link_group(hin, ShuffleConfig("R", 1))
    assert out.link("R").same_edges(hin.link("R"))


def test_errors():
    hin = build_hin([ObjectGroup("A", ("a", "b")), ObjectGroup("B", ("x", "y"))],
                    [LinkGroup.from_pairs("R", "A", "B", [(0, 0)]),
                     LinkGroup.from_pairs("P", "A", "B", [(0, 0), (0, 0), (1, 1)])])
    with pytest.raises(HinError, match="too few"):
        shuffle_link_group(hin, ShuffleConfig("R", 1))
    with pytest.raises(HinError, match="parallel"):
        shuffle_link_group(hin, ShuffleConfig("P", 1))
    with pytest.raises(HinError):
        shuffle_link_group(hin, ShuffleConfig("nope", 1))
    with pytest.raises(ValueError):
        ShuffleConfig("R", 1, swap_factor=0)


def test_determinism_and_stream():
    hin = multi_membership(np.random.default_rng(1))
    a = shuffle_link_group(hin, ShuffleConfig("Gr", 99)).link("Gr")
    b = shuffle_link_group(hin, ShuffleConfig("Gr", 99)).link("Gr")
    assert np.array_equal(a.src, b.src) and np.array_equal(a.dst, b.dst)
    first = [(i, s, h.link("Gr").edge_set()) for i, s, h in replicate_stream(hin, "Gr", 5, 3)]
    second = [(i, s, h.link("Gr").edge_set()) for i, s, h in replicate_stream(hin, "Gr", 5, 3)]
    assert first == second
    assert [i for i, _, _ in first] == [1, 2, 3]
    assert len({s for _, s, _ in first}) == 3
    (i, seed, one), = list(replicate_stream(hin, "Gr", 5, 1))
    assert seed == replicate_seed(5, 1)
    assert one.link("Gr").same_edges(shuffle_link_group(hin, ShuffleConfig("Gr", seed)).link("Gr"))
    assert 0 <= replicate_seed(2**63, 10**6) < 2**64


def test_manifest_csv(tmp_path):
    write_replicate_manifest(tmp_path / "r.csv", [(1, 42, "Lo", 0.25)])
    assert (tmp_path / "r.csv").read_text().splitlines() == ["replicate,seed,relation,jaccard", "1,42,Lo,0.25"]


def test_ml100k_location_mixes(ml100k):
    out = shuffle_link_group(ml100k, ShuffleConfig("Lo", 1, 10))
    assert_degrees_kept(ml100k, out, "Lo")
    assert jaccard(ml100k.link("Lo"), out.link("Lo")) < 0.5
