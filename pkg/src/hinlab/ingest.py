"""Readers for MovieLens 100K and generic delimiter-separated relation tables."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .hin import Hin, HinError, LinkGroup, ObjectGroup, build_hin

ML100K_GENRES = (
    "unknown", "Action", "Adventure", "Animation", "Children's", "Comedy", "Crime",
    "Documentary", "Drama", "Fantasy", "Film-Noir", "Horror", "Musical", "Mystery",
    "Romance", "Sci-Fi", "Thriller", "War", "Western",
)
UNKNOWN_RELEASE = "unknown"


class DataError(HinError):
    """Unreadable or malformed input data."""


def _lines(path: Path, encoding="latin-1"):
    if not path.is_file():
        raise DataError(f"missing file: {path}")
    with open(path, encoding=encoding, newline="") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.rstrip("\r\n")
            if line:
                yield lineno, line


class _Labels:
    """Node labels in order of first appearance."""

    def __init__(self):
        self.index = {}

    def add(self, label):
        return self.index.setdefault(label, len(self.index))

    def group(self, name):
        return ObjectGroup(name, tuple(self.index))


def parse_movielens_100k(directory) -> Hin:
    """Build the ML100K network from ``u.data``, ``u.item`` and ``u.user``.

    A movie is identified by its title: the 18 ids that duplicate another
    title collapse onto it. Rating records that become identical after that
    mapping (same user, movie, rating and timestamp) are kept once. Ratings
    stay on the ``rates`` edges as payload for :func:`derive_likes`.
    """
    directory = Path(directory)
    paths = {name: directory / name for name in ("u.data", "u.item", "u.user")}
    for p in paths.values():
        if not p.is_file():
            raise DataError(f"missing file: {p}")

    users, occupations, ages, genders, locations = (_Labels() for _ in range(5))
    user_of, user_attrs = {}, []
    for lineno, line in _lines(paths["u.user"]):
        parts = line.split("|")
        if len(parts) != 5:
            raise DataError(f"{paths['u.user']}:{lineno}: expected 5 fields, got {len(parts)}")
        uid, age, gender, occupation, zipcode = (x.strip() for x in parts)
        if not age.isdigit():
            raise DataError(f"{paths['u.user']}:{lineno}: bad age {age!r}")
        user_of[uid] = users.add(uid)
        user_attrs.append((str(int(age)), gender, occupation, zipcode))

    item_title, item_info = {}, {}
    for lineno, line in _lines(paths["u.item"]):
        parts = line.split("|")
        if len(parts) != 5 + len(ML100K_GENRES):
            raise DataError(f"{paths['u.item']}:{lineno}: expected {5 + len(ML100K_GENRES)} fields, "
                            f"got {len(parts)}")
        mid, title, date = parts[0].strip(), parts[1].strip(), parts[2].strip()
        flags = parts[5:]
        if any(f not in ("0", "1") for f in flags):
            raise DataError(f"{paths['u.item']}:{lineno}: genre flags must be 0/1")
        year = date.rsplit("-", 1)[-1] if date else UNKNOWN_RELEASE
        if date and not (len(year) == 4 and year.isdigit()):
            raise DataError(f"{paths['u.item']}:{lineno}: bad release date {date!r}")
        item_title[mid] = title
        # first id seen for a title defines its content
        item_info.setdefault(title, (year, [g for g, f in zip(ML100K_GENRES, flags) if f == "1"]))

    movies = _Labels()
    records = {}
    for lineno, line in _lines(paths["u.data"]):
        parts = line.split("\t")
        if len(parts) != 4:
            raise DataError(f"{paths['u.data']}:{lineno}: expected 4 tab-separated fields, got {len(parts)}")
        uid, mid, rating, ts = (x.strip() for x in parts)
        if uid not in user_of:
            raise DataError(f"{paths['u.data']}:{lineno}: unknown user {uid!r}")
        if mid not in item_title:
            raise DataError(f"{paths['u.data']}:{lineno}: unknown movie {mid!r}")
        try:
            r, t = int(rating), int(ts)
        except ValueError:
            raise DataError(f"{paths['u.data']}:{lineno}: non-integer rating or timestamp") from None
        if not 1 <= r <= 5:
            raise DataError(f"{paths['u.data']}:{lineno}: rating {r} outside 1..5")
        m = movies.add(item_title[mid])
        records.setdefault((user_of[uid], m, r, t), None)

    rec = np.array(list(records), dtype=np.int64).reshape(-1, 4)
    types, releases = _Labels(), _Labels()
    for g in ML100K_GENRES:
        types.add(g)
    ty_pairs, ye_pairs = [], []
    for m, title in enumerate(movies.index):
        year, genres = item_info[title]
        ye_pairs.append((m, releases.add(year)))
        ty_pairs.extend((m, types.index[g]) for g in genres)

    oc, ag, ge, lo = [], [], [], []
    for u, (age, gender, occupation, zipcode) in enumerate(user_attrs):
        oc.append((u, occupations.add(occupation)))
        ag.append((u, ages.add(age)))
        ge.append((u, genders.add(gender)))
        lo.append((u, locations.add(zipcode)))

    groups = [users.group("user"), movies.group("movie"), types.group("type"),
              releases.group("release"), occupations.group("occupation"), ages.group("age"),
              genders.group("gender"), locations.group("location")]
    links = [
        LinkGroup("rates", "user", "movie", rec[:, 0], rec[:, 1], rec[:, 2]),
        LinkGroup.from_pairs("Ty", "movie", "type", ty_pairs),
        LinkGroup.from_pairs("Ye", "movie", "release", ye_pairs),
        LinkGroup.from_pairs("Oc", "user", "occupation", oc),
        LinkGroup.from_pairs("Ag", "user", "age", ag),
        LinkGroup.from_pairs("Ge", "user", "gender", ge),
        LinkGroup.from_pairs("Lo", "user", "location", lo),
    ]
    return build_hin(groups, links)


def derive_likes(hin: Hin, rating_relation: str = "rates", threshold: int = 3,
                 name: str = "likes") -> Hin:
    """Add ``name`` holding the rating edges whose rating is at least ``threshold``."""
    lg = hin.link(rating_relation)
    if lg.values is None:
        raise HinError(f"relation {rating_relation!r} carries no rating values")
    keep = lg.values >= threshold
    likes = LinkGroup(name, lg.source, lg.target, lg.src[keep], lg.dst[keep], lg.values[keep])
    return hin.with_link_groups([likes])


@dataclass(frozen=True)
class RelationTableSpec:
    path: str
    relation: str
    source_group: str
    target_group: str
    source_column: int = 0
    target_column: int = 1
    delimiter: str = "\t"
    header: bool = False
    value_column: int | None = None  # integer payload, e.g. a rating

    def __post_init__(self):
        if not self.delimiter:
            raise ValueError("delimiter must be non-empty")
        if self.source_column == self.target_column:
            raise ValueError("source and target columns must differ")


def parse_relation_tables(specs) -> Hin:
    """One link group per table; groups are the union of labels seen per group name.

    Repeated rows are kept once. Node order follows first appearance across
    the tables in the order given.
    """
    labels = {}
    links = []
    for spec in specs:
        path = Path(spec.path)
        try:
            f = open(path, encoding="utf-8", newline="")
        except OSError as exc:
            raise DataError(f"cannot read {path}: {exc}") from exc
        src_labels = labels.setdefault(spec.source_group, _Labels())
        dst_labels = labels.setdefault(spec.target_group, _Labels())
        seen = {}
        with f:
            reader = csv.reader(f, delimiter=spec.delimiter)
            for lineno, row in enumerate(reader, start=1):
                if spec.header and lineno == 1:
                    continue
                if not row or all(not c.strip() for c in row):
                    continue
                cols = [spec.source_column, spec.target_column]
                if spec.value_column is not None:
                    cols.append(spec.value_column)
                if max(cols) >= len(row):
                    raise DataError(f"{path}:{lineno}: column index {max(cols)} out of bounds "
                                    f"({len(row)} columns)")
                a = src_labels.add(row[spec.source_column].strip())
                b = dst_labels.add(row[spec.target_column].strip())
                if spec.value_column is not None:
                    try:
                        v = int(float(row[spec.value_column]))
                    except ValueError:
                        raise DataError(f"{path}:{lineno}: non-numeric value") from None
                    seen.setdefault((a, b, v), None)
                else:
                    seen.setdefault((a, b), None)
        arr = np.array(list(seen), dtype=np.int64).reshape(-1, 3 if spec.value_column is not None else 2)
        values = arr[:, 2] if spec.value_column is not None else None
        links.append(LinkGroup(spec.relation, spec.source_group, spec.target_group,
                               arr[:, 0], arr[:, 1], values))
    groups = [lab.group(name) for name, lab in labels.items()]
    return build_hin(groups, links)


_MANIFEST_KEYS = {
    "path": str, "relation": str, "source_group": str, "target_group": str,
    "source_column": int, "target_column": int, "delimiter": str, "header": bool,
    "value_column": int,
}


def _coerce(key, raw):
    kind = _MANIFEST_KEYS[key]
    if kind is bool:
        return raw.lower() in ("1", "true", "yes", "on")
    if key == "delimiter":
        return {"\\t": "\t", "tab": "\t", "comma": ",", "pipe": "|", "space": " "}.get(raw, raw)
    return kind(raw)


def read_manifest(path) -> list:
    """Relation-table manifest: ``key = value`` lines, one blank-line-separated block per table.

    Relative paths resolve against the manifest's directory. Lines starting
    with ``#`` are comments. An optional leading block of ``likes_from`` /
    ``likes_threshold`` keys is returned through :func:`read_manifest_options`.
    """
    return _read_manifest(path)[0]


def read_manifest_options(path) -> dict:
    return _read_manifest(path)[1]


def _read_manifest(path):
    path = Path(path)
    specs, options, block = [], {}, {}

    def flush(lineno):
        if not block:
            return
        if "path" not in block:
            options.update(block)
        else:
            missing = {"path", "relation", "source_group", "target_group"} - set(block)
            if missing:
                raise DataError(f"{path}:{lineno}: table block missing {sorted(missing)}")
            kw = {k: _coerce(k, v) for k, v in block.items()}
            p = Path(kw["path"])
            kw["path"] = str(p if p.is_absolute() else path.parent / p)
            specs.append(RelationTableSpec(**kw))
        block.clear()

    lineno = 0
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if line.startswith("#"):
            continue
        if not line:
            flush(lineno)
            continue
        if "=" not in line:
            raise DataError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _MANIFEST_KEYS and key not in ("likes_from", "likes_threshold"):
            raise DataError(f"{path}:{lineno}: unknown key {key!r}")
        block[key] = value
    flush(lineno)
    return specs, options
