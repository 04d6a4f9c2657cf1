"""Random walks along meta-paths.

Each step moves uniformly over the outgoing edges of the current node. Mass
reaching a node without outgoing edges is absorbed and reported as
``lost_mass``; it is never renormalized here.
"""
from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .hin import Hin, HinError, LinkGroup, MetaPath, validate_meta_path

_BLOCK = 512


@dataclass(frozen=True, eq=False)
class TransitionOperator:
    relation: str
    inverted: bool
    matrix: sp.csr_matrix  # |source group| x |target group|, row-stochastic where not dangling
    dangling: np.ndarray  # bool per source node

    @classmethod
    def from_link_group(cls, lg: LinkGroup, n_source: int, n_target: int) -> TransitionOperator:
        counts = sp.csr_matrix(
            (np.ones(len(lg)), (lg.src, lg.dst)), shape=(n_source, n_target))
        counts.sum_duplicates()
        out_deg = np.bincount(lg.src, minlength=n_source).astype(float)
        dangling = out_deg == 0
        scale = np.divide(1.0, out_deg, out=np.zeros_like(out_deg), where=~dangling)
        matrix = sp.csr_matrix(sp.diags(scale) @ counts)
        matrix.sort_indices()
        dangling.flags.writeable = False
        return cls(lg.display_name, lg.inverted, matrix, dangling)

    def row(self, i) -> np.ndarray:
        return self.matrix.getrow(i).toarray().ravel()


@dataclass(frozen=True, eq=False)
class Pmf:
    group: str
    mass: np.ndarray
    lost_mass: float = 0.0

    def __len__(self):
        return len(self.mass)

    @property
    def surviving(self) -> float:
        return float(self.mass.sum())

    def to_csv(self, path, labels):
        with open(path, "w", newline="", encoding="utf-8") as f:
            w = csv.writer(f)
            w.writerow(["node", "probability"])
            for lab, p in zip(labels, self.mass.tolist()):
                w.writerow([lab, repr(p)])


def transition_operator(hin: Hin, relation: str, inverted: bool = False) -> TransitionOperator:
    lg = hin.link(relation)
    # cached on the forward link group, which derived networks share
    cache = lg.__dict__.setdefault("_operators", {})
    key = (bool(inverted), len(hin.group(lg.source)), len(hin.group(lg.target)))
    if key not in cache:
        view = lg.inverse() if inverted else lg
        cache[key] = TransitionOperator.from_link_group(
            view, len(hin.group(view.source)), len(hin.group(view.target)))
    return cache[key]


def resolve_meta_path(hin, meta_path) -> MetaPath:
    if isinstance(meta_path, MetaPath):
        return meta_path
    return validate_meta_path(hin, meta_path)


def operators(hin: Hin, meta_path) -> list:
    mp = resolve_meta_path(hin, meta_path)
    return [transition_operator(hin, s.relation, s.inverted) for s in mp.steps]


def propagate(start, ops) -> sp.csr_matrix:
    """Push each row of ``start`` through the operator chain, left to right."""
    out = sp.csr_matrix(start)
    for op in ops:
        out = out @ op.matrix
    return sp.csr_matrix(out)


def source_matrix(hin: Hin, meta_path, sources=None, jobs: int = 1) -> sp.csr_matrix:
    """Rows are p_path(s) for every source (or the given source indices).

    Rows are computed in fixed-size blocks, so the result does not depend on
    ``jobs``.
    """
    mp = resolve_meta_path(hin, meta_path)
    ops = operators(hin, mp)
    n = len(hin.group(mp.source))
    idx = np.arange(n) if sources is None else np.asarray(sources, dtype=np.int64)
    blocks = [idx[i:i + _BLOCK] for i in range(0, len(idx), _BLOCK)] or [idx]

    def run(block):
        start = sp.csr_matrix((np.ones(len(block)), (np.arange(len(block)), block)),
                              shape=(len(block), n))
        return propagate(start, ops)

    if jobs > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(run, blocks))
    else:
        parts = [run(b) for b in blocks]
    out = sp.csr_matrix(sp.vstack(parts, format="csr"))
    out.sort_indices()
    return out


def _source_index(hin, group, source) -> int:
    g = hin.group(group)
    if isinstance(source, (int, np.integer)):
        if not 0 <= source < len(g):
            raise HinError(f"source index {source} outside group {group!r}")
        return int(source)
    return g.index(source)


def source_distribution(hin: Hin, meta_path, source) -> Pmf:
    mp = resolve_meta_path(hin, meta_path)
    i = _source_index(hin, mp.source, source)
    mass = source_matrix(hin, mp, [i]).toarray().ravel()
    return Pmf(mp.target, mass, max(0.0, 1.0 - float(mass.sum())))


def collective_distribution(hin: Hin, meta_path) -> Pmf:
    mp = resolve_meta_path(hin, meta_path)
    n = len(hin.group(mp.source))
    if n == 0:
        raise HinError(f"source group {mp.source!r} is empty")
    start = sp.csr_matrix(np.full((1, n), 1.0 / n))
    mass = propagate(start, operators(hin, mp)).toarray().ravel()
    return Pmf(mp.target, mass, max(0.0, 1.0 - float(mass.sum())))


def all_source_distributions(hin: Hin, meta_path, jobs: int = 1) -> dict:
    mp = resolve_meta_path(hin, meta_path)
    rows = source_matrix(hin, mp, jobs=jobs)
    labels = hin.group(mp.source).labels
    out = {}
    for i, lab in enumerate(labels):
        mass = rows.getrow(i).toarray().ravel()
        out[lab] = Pmf(mp.target, mass, max(0.0, 1.0 - float(mass.sum())))
    return out
