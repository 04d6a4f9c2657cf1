import numpy as np
import pytest

from hinlab import (
    DataError, HinError, RelationTableSpec, derive_likes, parse_movielens_100k,
    parse_relation_tables, read_manifest,
)
from hinlab.ingest import read_manifest_options


def _flags(*genres):
    return "|".join("1" if i in genres else "0" for i in range(19))


def write_ml(tmp_path, data="1\t1\t5\t0\n", items=None, users="1|24|M|technician|85711\n"):
    (tmp_path / "u.data").write_text(data)
    items = items or f"1|Toy Story (1995)|01-Jan-1995||http://x|{_flags(3, 4)}\n"
    (tmp_path / "u.item").write_text(items, encoding="latin-1")
    (tmp_path / "u.user").write_text(users)
    return tmp_path


def test_single_row(tmp_path):
    hin = parse_movielens_100k(write_ml(tmp_path))
    assert len(hin.link("rates")) == 1
    assert hin.link("rates").values.tolist() == [5]
    assert len(hin.link("Ty")) == 2
    assert hin.group("release").labels == ("1995",)
    assert hin.group("age").labels == ("24",)
    for name in ("Oc", "Ag", "Ge", "Lo", "Ye"):
        assert len(hin.link(name)) == 1


def test_missing_user_file(tmp_path):
    write_ml(tmp_path)
    (tmp_path / "u.user").unlink()
    with pytest.raises(DataError, match="u.user"):
        parse_movielens_100k(tmp_path)


@pytest.mark.parametrize("data, message", [
    ("1\t1\t5\n", r"u.data:1"),
    ("1\t1\t5\t0\n1\t1\t9\t0\n", r"u.data:2: rating 9"),
    ("1\t7\t5\t0\n", "unknown movie"),
])
def test_malformed_rows(tmp_path, data, message):
    with pytest.raises(DataError, match=message):
        parse_movielens_100k(write_ml(tmp_path, data=data))


def test_duplicate_titles_collapse(tmp_path):
    items = (f"1|Heat (1995)|01-Jan-1995|||{_flags(1)}\n"
             f"2|Heat (1995)|01-Jan-1995|||{_flags(1)}\n"
             f"3|Misc||||{_flags(0)}\n")
    data = "1\t1\t4\t10\n1\t2\t4\t10\n1\t2\t2\t11\n1\t3\t1\t12\n"
    hin = parse_movielens_100k(write_ml(tmp_path, data=data, items=items))
    assert hin.group("movie").labels == ("Heat (1995)", "Misc")
    assert len(hin.link("rates")) == 3  # identical records kept once
    assert hin.group("release").labels == ("1995", "unknown")


def test_derive_likes_thresholds(tmp_path):
    data = "".join(f"1\t1\t{r}\t{r}\n" for r in range(1, 6))
    hin = parse_movielens_100k(write_ml(tmp_path, data=data))
    sizes = [len(derive_likes(hin, "rates", t).link("likes")) for t in range(1, 7)]
    assert sizes == [5, 4, 3, 2, 1, 0]
    one = derive_likes(hin, "rates", 1).link("likes")
    assert one.same_edges(hin.link("rates"))
    with pytest.raises(HinError):
        derive_likes(hin, "Ty", 3)
    with pytest.raises(HinError):
        derive_likes(hin, "nope", 3)


def test_ingest_deterministic(tmp_path):
    path = write_ml(tmp_path, data="1\t1\t5\t0\n")
    a, b = parse_movielens_100k(path), parse_movielens_100k(path)
    for name in a.link_groups:
        assert a.link(name).same_edges(b.link(name))
    assert [g.labels for g in a.object_groups.values()] == [g.labels for g in b.object_groups.values()]


def test_ml100k_counts(ml100k):
    sizes = {name: len(g) for name, g in ml100k.object_groups.items()}
    assert sizes == {"user": 943, "movie": 1664, "type": 19, "release": 72, "occupation": 21,
                     "age": 61, "gender": 2, "location": 795}
    edges = {name: len(lg) for name, lg in ml100k.link_groups.items()}
    assert edges["rates"] == 99965 and edges["Ty"] == 2863 and edges["likes"] == 82495
    assert all(edges[r] == 943 for r in ("Oc", "Ag", "Ge", "Lo"))
    assert edges["Ye"] == 1664
    thresholds = [len(derive_likes(ml100k, "rates", t).link("likes")) for t in range(1, 7)]
    assert thresholds == sorted(thresholds, reverse=True) and thresholds[0] == 99965


def _table(path, rows, delimiter="\t"):
    path.write_text("".join(delimiter.join(r) + "\n" for r in rows))
    return str(path)


def test_tables_dedup_and_union(tmp_path):
    a = _table(tmp_path / "a.tsv", [("u1", "i1"), ("u1", "i1"), ("u2", "i2")])
    b = _table(tmp_path / "b.csv", [("g", "u3"), ("g", "u1")], ",")
    hin = parse_relation_tables([
        RelationTableSpec(a, "likes", "user", "item"),
        RelationTableSpec(b, "Gr", "group", "user", source_column=0, target_column=1, delimiter=","),
    ])
    assert len(hin.link("likes")) == 2
    assert hin.group("user").labels == ("u1", "u2", "u3")


def test_tables_errors(tmp_path):
    a = _table(tmp_path / "a.tsv", [("u1", "i1")])
    with pytest.raises(DataError, match="out of bounds"):
        parse_relation_tables([RelationTableSpec(a, "R", "A", "B", target_column=4)])
    with pytest.raises(DataError):
        parse_relation_tables([RelationTableSpec(str(tmp_path / "none.tsv"), "R", "A", "B")])
    with pytest.raises(ValueError):
        RelationTableSpec(a, "R", "A", "B", source_column=1, target_column=1)
    with pytest.raises(ValueError):
        RelationTableSpec(a, "R", "A", "B", delimiter="")


DM_TABLES = [
    ("actors.tsv", "Ac", "movie", "actor"),
    ("directors.tsv", "Di", "movie", "director"),
    ("types.tsv", "Ty", "movie", "type"),
    ("groups.tsv", "Gr", "user", "usergroup"),
    ("locations.tsv", "Lo", "user", "location"),
    ("ratings.tsv", "rates", "user", "movie"),
    ("friends.tsv", "Fr", "user", "user"),
]


def write_dm(tmp_path, rng):
    users = [f"u{i}" for i in range(12)]
    movies = [f"m{i}" for i in range(15)]
    pools = {"actor": [f"a{i}" for i in range(30)], "director": [f"d{i}" for i in range(6)],
             "type": [f"t{i}" for i in range(5)], "usergroup": [f"g{i}" for i in range(4)],
             "location": [f"l{i}" for i in range(3)], "movie": movies, "user": users}
    blocks = ["likes_from = rates\nlikes_threshold = 3\n"]
    for fname, rel, src_group, dst_group in DM_TABLES:
        sources = users if src_group == "user" else movies
        rows = []
        for s in sources:
            for t in rng.choice(pools[dst_group], size=int(rng.integers(1, 4)), replace=False):
                rows.append((s, str(t), str(int(rng.integers(1, 6)))))
        (tmp_path / fname).write_text("src\tdst\trating\n" + "".join("\t".join(r) + "\n" for r in rows))
        block = (f"path = {fname}\nrelation = {rel}\nsource_group = {src_group}\n"
                 f"target_group = {dst_group}\ndelimiter = tab\nheader = true\n")
        if rel == "rates":
            block += "value_column = 2\n"
        blocks.append(block)
    manifest = tmp_path / "dm.manifest"
    manifest.write_text("# synthetic DM-shaped dataset\n" + "\n".join(blocks))
    return manifest


def test_dm_shaped_manifest(tmp_path):
    manifest = write_dm(tmp_path, np.random.default_rng(0))
    specs = read_manifest(manifest)
    assert len(specs) == 7
    assert read_manifest_options(manifest) == {"likes_from": "rates", "likes_threshold": "3"}
    hin = derive_likes(parse_relation_tables(specs), "rates", 3)
    arcs = {(n, s, t) for n, s, t in hin.schema.arcs}
    assert arcs == {("Ac", "movie", "actor"), ("Di", "movie", "director"), ("Ty", "movie", "type"),
                    ("Gr", "user", "usergroup"), ("Lo", "user", "location"),
                    ("rates", "user", "movie"), ("Fr", "user", "user"), ("likes", "user", "movie")}
    assert hin.link("rates").values is not None


def test_manifest_errors(tmp_path):
    bad = tmp_path / "bad.manifest"
    bad.write_text("path = x.tsv\nrelation = R\n")
    with pytest.raises(DataError, match="missing"):
        read_manifest(bad)
    bad.write_text("colour = red\n")
    with pytest.raises(DataError, match="unknown key"):
        read_manifest(bad)
