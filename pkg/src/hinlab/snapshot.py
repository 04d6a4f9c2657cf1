"""Binary network snapshot.

Layout (all integers little-endian)::

    8 bytes   magic  b"HINSNAP\\0"
    u32       format version (1)
    u64       header length H
    H bytes   UTF-8 JSON header: {"groups": [{"name", "labels"}],
              "relations": [{"name", "source", "target", "n_edges", "has_values"}]}
    per relation, in header order:
      i64[n_source + 1]  CSR row pointer over the source group
      i64[n_edges]       target indices, rows sorted by (target, value)
      i16[n_edges]       edge values, only when has_values

Edges are written in canonical order, so a load/save round trip is byte-stable.
"""
from __future__ import annotations

import hashlib
import json
import struct
from pathlib import Path

import numpy as np

from .hin import Hin, LinkGroup, ObjectGroup, build_hin
from .ingest import DataError

MAGIC = b"HINSNAP\0"
VERSION = 1


def dumps(hin: Hin) -> bytes:
    header = {
        "groups": [{"name": g.name, "labels": list(g.labels)} for g in hin.object_groups.values()],
        "relations": [],
    }
    arrays = []
    for lg in hin.link_groups.values():
        lg = lg.canonical()
        n_src = len(hin.group(lg.source))
        indptr = np.zeros(n_src + 1, dtype="<i8")
        np.cumsum(np.bincount(lg.src, minlength=n_src), out=indptr[1:])
        arrays.append(indptr.tobytes())
        arrays.append(lg.dst.astype("<i8").tobytes())
        if lg.values is not None:
            arrays.append(lg.values.astype("<i2").tobytes())
        header["relations"].append({"name": lg.name, "source": lg.source, "target": lg.target,
                                    "n_edges": len(lg), "has_values": lg.values is not None})
    head = json.dumps(header, sort_keys=True, ensure_ascii=False, separators=(",", ":")).encode("utf-8")
    return b"".join([MAGIC, struct.pack("<IQ", VERSION, len(head)), head, *arrays])


def loads(data: bytes) -> Hin:
    if data[:8] != MAGIC:
        raise DataError("not a network snapshot (bad magic)")
    version, head_len = struct.unpack_from("<IQ", data, 8)
    if version != VERSION:
        raise DataError(f"unsupported snapshot version {version}")
    pos = 8 + 12
    header = json.loads(data[pos:pos + head_len].decode("utf-8"))
    pos += head_len
    groups = [ObjectGroup(g["name"], tuple(g["labels"])) for g in header["groups"]]
    sizes = {g.name: len(g) for g in groups}

    def take(dtype, count):
        nonlocal pos
        width = np.dtype(dtype).itemsize
        if pos + width * count > len(data):
            raise DataError("truncated snapshot")
        arr = np.frombuffer(data, dtype=dtype, count=count, offset=pos)
        pos += width * count
        return arr.astype(np.int64)

    links = []
    for rel in header["relations"]:
        n_src, m = sizes[rel["source"]], rel["n_edges"]
        indptr = take("<i8", n_src + 1)
        dst = take("<i8", m)
        values = take("<i2", m) if rel["has_values"] else None
        src = np.repeat(np.arange(n_src), np.diff(indptr))
        links.append(LinkGroup(rel["name"], rel["source"], rel["target"], src, dst, values))
    if pos != len(data):
        raise DataError("trailing bytes after snapshot")
    return build_hin(groups, links)


def save(hin: Hin, path) -> str:
    """Write the snapshot; returns its SHA-256 hex digest."""
    blob = dumps(hin)
    Path(path).write_bytes(blob)
    return hashlib.sha256(blob).hexdigest()


def load(path) -> Hin:
    try:
        blob = Path(path).read_bytes()
    except OSError as exc:
        raise DataError(f"cannot read snapshot {path}: {exc}") from exc
    return loads(blob)


def fingerprint(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
