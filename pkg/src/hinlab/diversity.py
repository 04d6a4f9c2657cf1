"""Perplexity-based diversity of meta-path walk distributions."""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .hin import Hin, MetaPathError, validate_meta_path
from .walks import Pmf, collective_distribution, resolve_meta_path, source_matrix

log = logging.getLogger(__name__)


class DegenerateError(ValueError):
    """Entropy is undefined: no probability mass survives."""


def _as_probabilities(pmf) -> np.ndarray:
    mass = pmf.mass if isinstance(pmf, Pmf) else np.asarray(pmf, dtype=float)
    mass = np.asarray(mass, dtype=float).ravel()
    if np.any(mass < 0):
        raise ValueError("negative probability")
    total = mass.sum()
    if total <= 0:
        raise DegenerateError("all-zero distribution")
    # lost mass is renormalized away: diversity of what is reachable
    return mass / total


def shannon_entropy(pmf) -> float:
    """Entropy in bits, with 0 log 0 = 0."""
    p = _as_probabilities(pmf)
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def perplexity(pmf) -> float:
    return float(2.0 ** shannon_entropy(pmf))


def row_entropies(rows: sp.csr_matrix):
    """Entropy (bits) of every row after renormalization, plus a mask of non-empty rows."""
    rows = sp.csr_matrix(rows)
    rows.eliminate_zeros()
    sums = np.asarray(rows.sum(axis=1)).ravel()
    alive = sums > 0
    counts = np.diff(rows.indptr)
    p = rows.data / np.repeat(np.where(alive, sums, 1.0), counts)
    terms = np.where(p > 0, -p * np.log2(np.where(p > 0, p, 1.0)), 0.0)
    ent = np.zeros(rows.shape[0])
    nz = counts > 0
    ent[nz] = np.add.reduceat(terms, rows.indptr[:-1][nz]) if terms.size else 0.0
    return ent, alive


@dataclass(frozen=True)
class DiversityReport:
    meta_path: str
    kind: str  # "mean-individual" | "collective"
    value: float
    excluded_sources: int = 0
    n_sources: int = 0


def mean_individual_diversity(hin: Hin, meta_path, jobs: int = 1) -> DiversityReport:
    """Geometric mean over sources of the perplexity of each source's walk.

    Sources whose walk is fully absorbed are left out and counted in
    ``excluded_sources``.
    """
    mp = resolve_meta_path(hin, meta_path)
    rows = source_matrix(hin, mp, jobs=jobs)
    ent, alive = row_entropies(rows)
    if not alive.any():
        raise DegenerateError(f"every source of {mp} is dangling")
    # geometric mean of 2**H  ==  2**(mean H)
    value = float(2.0 ** ent[alive].mean())
    return DiversityReport(str(mp), "mean-individual", value,
                           int((~alive).sum()), int(alive.size))


def collective_diversity(hin: Hin, meta_path) -> DiversityReport:
    mp = resolve_meta_path(hin, meta_path)
    pmf = collective_distribution(hin, mp)
    if pmf.surviving <= 0:
        raise DegenerateError(f"no mass survives along {mp}")
    rows = source_matrix(hin, mp)
    _, alive = row_entropies(rows)
    return DiversityReport(str(mp), "collective", perplexity(pmf),
                           int((~alive).sum()), int(alive.size))


@dataclass(frozen=True)
class MosaicCell:
    source_group: str
    middle_relation: str
    target_group: str
    measure: str
    value: float
    excluded_sources: int


@dataclass
class Mosaic:
    cells: list = field(default_factory=list)
    skipped: list = field(default_factory=list)  # (source, middle, target, reason)

    HEADER = ("source_group", "middle_relation", "target_group", "measure", "value", "excluded_sources")

    def value(self, source_group, middle_relation, target_group):
        for c in self.cells:
            if (c.source_group, c.middle_relation, c.target_group) == (source_group, middle_relation, target_group):
                return c.value
        raise KeyError((source_group, middle_relation, target_group))

    def to_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as f:
            w = csv.writer(f)
            w.writerow(self.HEADER)
            for c in self.cells:
                w.writerow([c.source_group, c.middle_relation, c.target_group, c.measure,
                            repr(c.value), c.excluded_sources])


def diversity_mosaic(hin: Hin, sources, targets, middles, jobs: int = 1) -> Mosaic:
    """Mean individual diversity of ``S^-1 X T`` for every combination.

    ``sources`` are relation names from the user group to a user-content group;
    ``None`` stands for the user group itself (the leading step is dropped).
    ``middles`` are user->item relations, ``targets`` item->content relations.
    """
    mosaic = Mosaic()
    for s in sources:
        for x in middles:
            for t in targets:
                steps = ([] if s is None else [(s, True)]) + [(x, False), (t, False)]
                try:
                    mp = validate_meta_path(hin, steps)
                    report = mean_individual_diversity(hin, mp, jobs=jobs)
                except (MetaPathError, DegenerateError) as exc:
                    log.warning("mosaic cell (%s, %s, %s) skipped: %s", s, x, t, exc)
                    mosaic.skipped.append((s, x, t, str(exc)))
                    continue
                mosaic.cells.append(MosaicCell(
                    mp.source, x, mp.target, "MI", report.value, report.excluded_sources))
    return mosaic
