"""Degree-preserving randomization of a single link group (configuration model)."""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .hin import Hin, HinError, LinkGroup


@dataclass(frozen=True)
class ShuffleConfig:
    relation: str
    seed: int
    swap_factor: float = 10.0

    def __post_init__(self):
        if not self.swap_factor > 0:
            raise ValueError("swap_factor must be positive")


def replicate_seed(master_seed: int, index: int) -> int:
    """Per-replicate 64-bit seed: two words of ``SeedSequence(master, spawn_key=(index,))``."""
    words = np.random.SeedSequence(int(master_seed), spawn_key=(int(index),)).generate_state(2, np.uint32)
    return int(words[0]) | (int(words[1]) << 32)


def double_edge_swap(src: np.ndarray, dst: np.ndarray, attempts: int, rng: np.random.Generator,
                     allow_loops: bool = True):
    """Repeatedly exchange the targets of two random edges, keeping the graph simple.

    Returns new (src, dst) arrays and the number of accepted swaps. ``src`` is
    never modified, so out-degrees hold trivially; in-degrees hold because
    each swap trades targets between two edges.
    """
    src = np.array(src, dtype=np.int64)
    dst = np.array(dst, dtype=np.int64)
    m = len(src)
    n_dst = int(dst.max()) + 1 if m else 0
    present = set((src * n_dst + dst).tolist())
    accepted = 0
    batch = 4096
    done = 0
    while done < attempts:
        size = min(batch, attempts - done)
        picks = rng.integers(0, m, size=(size, 2))
        for i, j in picks.tolist():
            if i == j:
                continue
            a, x, b, y = src[i], dst[i], src[j], dst[j]
            if a == b or x == y:
                continue
            ay, bx = a * n_dst + y, b * n_dst + x
            if ay in present or bx in present:
                continue
            if not allow_loops and (a == y or b == x):
                continue
            present.discard(a * n_dst + x)
            present.discard(b * n_dst + y)
            present.add(ay)
            present.add(bx)
            dst[i], dst[j] = y, x
            accepted += 1
        done += size
    return src, dst, accepted


def shuffle_link_group(hin: Hin, config: ShuffleConfig) -> Hin:
    lg = hin.link(config.relation)
    if len(lg) < 2:
        raise HinError(f"relation {config.relation!r} has too few edges to shuffle")
    if not lg.is_simple():
        raise HinError(f"relation {config.relation!r} has parallel edges; shuffling needs a simple relation")
    rng = np.random.default_rng(int(config.seed))
    attempts = int(round(config.swap_factor * len(lg)))
    allow_loops = lg.source != lg.target or bool(np.any(lg.src == lg.dst))
    src, dst, _ = double_edge_swap(lg.src, lg.dst, attempts, rng, allow_loops=allow_loops)
    shuffled = LinkGroup(lg.name, lg.source, lg.target, src, dst)
    return hin.with_link_groups([shuffled])


def jaccard(a: LinkGroup, b: LinkGroup) -> float:
    ea, eb = a.edge_set(), b.edge_set()
    union = len(ea | eb)
    return len(ea & eb) / union if union else 1.0


def replicate_stream(hin: Hin, relation: str, master_seed: int, count: int,
                     swap_factor: float = 10.0):
    """Yield ``(index, seed, shuffled Hin)`` for replicates 1..count."""
    if count < 1:
        raise ValueError("count must be >= 1")
    for index in range(1, count + 1):
        seed = replicate_seed(master_seed, index)
        yield index, seed, shuffle_link_group(hin, ShuffleConfig(relation, seed, swap_factor))


def write_replicate_manifest(path, rows):
    """``rows``: iterable of (index, seed, relation, jaccard to original)."""
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["replicate", "seed", "relation", "jaccard"])
        for index, seed, relation, jac in rows:
            w.writerow([index, seed, relation, repr(float(jac))])
