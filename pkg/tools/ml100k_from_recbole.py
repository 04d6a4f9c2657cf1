"""Rebuild the GroupLens ML100K layout (u.data, u.item, u.user) from RecBole's bundled copy.

GroupLens is not always reachable; the ``recbole`` wheel ships the same ratings
as atomic files. Usage::

    pip download --no-deps recbole -d /tmp/wheels
    python tools/ml100k_from_recbole.py /tmp/wheels/recbole-*.whl data/ml-100k

Release dates are rebuilt as ``01-Jan-<year>`` from the year RecBole extracted
from the title; the one movie without a date keeps an empty field.
"""
import csv
import io
import sys
import zipfile
from pathlib import Path

GENRES = [
    "unknown", "Action", "Adventure", "Animation", "Children's", "Comedy",
    "Crime", "Documentary", "Drama", "Fantasy", "Film-Noir", "Horror",
    "Musical", "Mystery", "Romance", "Sci-Fi", "Thriller", "War", "Western",
]
PREFIX = "recbole/dataset_example/ml-100k/ml-100k"


def _rows(text):
    rows = list(csv.reader(io.StringIO(text), delimiter="\t"))
    return rows[1:]


def _read_source(src):
    src = Path(src)
    if src.is_dir():
        return {ext: (src / f"ml-100k.{ext}").read_text(encoding="latin-1")
                for ext in ("inter", "item", "user")}
    with zipfile.ZipFile(src) as z:
        return {ext: z.read(f"{PREFIX}.{ext}").decode("latin-1")
                for ext in ("inter", "item", "user")}


def convert(src, out):
    files = _read_source(src)
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)

    with open(out / "u.data", "w", encoding="latin-1", newline="") as f:
        for user, item, rating, ts in _rows(files["inter"]):
            f.write(f"{user}\t{item}\t{int(float(rating))}\t{int(float(ts))}\n")

    with open(out / "u.item", "w", encoding="latin-1", newline="") as f:
        for item, title, year, classes in _rows(files["item"]):
            tags = set(classes.split())
            if year.isdigit():
                full_title, date = f"{title} ({year})", f"01-Jan-{year}"
            elif year == "V":
                # "(1995) (V)": the year is the last token of the title
                full_title, date = f"{title} (V)", f"01-Jan-{title[-5:-1]}"
            else:
                full_title, date = "unknown", ""
            flags = "|".join("1" if g in tags else "0" for g in GENRES)
            f.write(f"{item}|{full_title}|{date}|||{flags}\n")

    with open(out / "u.user", "w", encoding="latin-1", newline="") as f:
        for user, age, gender, occupation, zipcode in _rows(files["user"]):
            f.write(f"{user}|{age}|{gender}|{occupation}|{zipcode}\n")


if __name__ == "__main__":
    if len(sys.argv) != 3:
        sys.exit(__doc__)
    convert(sys.argv[1], sys.argv[2])
