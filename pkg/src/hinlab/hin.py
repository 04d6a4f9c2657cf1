"""Typed heterogeneous graph: object groups, link groups, schema and meta-paths.

Nodes are dense integer indices inside their object group; labels are only
needed at ingest and reporting boundaries.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import numpy as np


class HinError(ValueError):
    """Structural problem with a network or one of its parts."""


class UnknownRelationError(HinError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else ""


class MetaPathError(HinError):
    """A step sequence does not compose on the schema.

    ``step`` is the 1-based position of the first offending step.
    """

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


def _readonly(a, dtype=np.int64):
    arr = np.ascontiguousarray(a, dtype=dtype)
    if arr.flags.writeable:
        arr = arr.copy()
        arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class ObjectGroup:
    name: str
    labels: tuple

    def __post_init__(self):
        labels = tuple(str(x) for x in self.labels)
        object.__setattr__(self, "labels", labels)
        index = {lab: i for i, lab in enumerate(labels)}
        if len(index) != len(labels):
            raise HinError(f"duplicate node label in group {self.name!r}")
        object.__setattr__(self, "_index", index)

    def __len__(self):
        return len(self.labels)

    def index(self, label) -> int:
        try:
            return self._index[str(label)]
        except KeyError:
            raise HinError(f"unknown node {label!r} in group {self.name!r}") from None

    def __contains__(self, label):
        return str(label) in self._index

    def __eq__(self, other):
        if not isinstance(other, ObjectGroup):
            return NotImplemented
        return self.name == other.name and self.labels == other.labels

    __hash__ = None


@dataclass(frozen=True, eq=False)
class LinkGroup:
    """Edges of one relation, ``src[k] -> dst[k]``.

    ``values`` optionally carries one small integer per edge (ratings kept by
    ingest). Identical records are collapsed at ingest, so parallel edges only
    appear when their payload differs.
    """

    name: str
    source: str
    target: str
    src: np.ndarray
    dst: np.ndarray
    values: np.ndarray | None = None
    inverted: bool = False

    def __post_init__(self):
        src, dst = _readonly(self.src), _readonly(self.dst)
        if src.shape != dst.shape or src.ndim != 1:
            raise HinError(f"relation {self.name!r}: src/dst length mismatch")
        object.__setattr__(self, "src", src)
        object.__setattr__(self, "dst", dst)
        if self.values is not None:
            values = _readonly(self.values, np.int16)
            if values.shape != src.shape:
                raise HinError(f"relation {self.name!r}: values length mismatch")
            object.__setattr__(self, "values", values)

    @classmethod
    def from_pairs(cls, name, source, target, pairs, values=None):
        pairs = np.asarray(list(pairs) if not isinstance(pairs, np.ndarray) else pairs,
                           dtype=np.int64).reshape(-1, 2)
        return cls(name, source, target, pairs[:, 0], pairs[:, 1], values)

    def __len__(self):
        return len(self.src)

    @property
    def display_name(self):
        return f"{self.name}^-1" if self.inverted else self.name

    def inverse(self) -> LinkGroup:
        # shares the edge arrays, nothing is copied
        return LinkGroup(self.name, self.target, self.source, self.dst, self.src,
                         self.values, not self.inverted)

    def pairs(self) -> np.ndarray:
        return np.column_stack([self.src, self.dst])

    def edge_set(self) -> frozenset:
        return frozenset(zip(self.src.tolist(), self.dst.tolist()))

    def is_simple(self) -> bool:
        return len(self.edge_set()) == len(self)

    def out_degree(self, n_source: int) -> np.ndarray:
        return np.bincount(self.src, minlength=n_source)

    def in_degree(self, n_target: int) -> np.ndarray:
        return np.bincount(self.dst, minlength=n_target)

    def canonical(self) -> LinkGroup:
        """Materialized copy, edges sorted by (source, target, value).

        An inverted view becomes a plain relation in its current orientation.
        """
        keys = [self.dst, self.src] if self.values is None else [self.values, self.dst, self.src]
        order = np.lexsort(keys)
        if not self.inverted and np.array_equal(order, np.arange(len(order))):
            return self
        values = None if self.values is None else self.values[order]
        return LinkGroup(self.name, self.source, self.target, self.src[order], self.dst[order], values)

    def same_edges(self, other: LinkGroup) -> bool:
        a, b = self.canonical(), other.canonical()
        if (a.source, a.target) != (b.source, b.target):
            return False
        return np.array_equal(a.src, b.src) and np.array_equal(a.dst, b.dst)


@dataclass(frozen=True)
class Schema:
    nodes: frozenset
    arcs: frozenset  # (relation, source group, target group)

    @classmethod
    def from_parts(cls, groups: Iterable[str], links: Iterable[LinkGroup]) -> Schema:
        return cls(frozenset(groups), frozenset((lg.name, lg.source, lg.target) for lg in links))


@dataclass(frozen=True)
class Step:
    relation: str
    inverted: bool = False

    def __str__(self):
        return f"{self.relation}^-1" if self.inverted else self.relation


@dataclass(frozen=True)
class MetaPath:
    steps: tuple
    source: str
    target: str

    def __len__(self):
        return len(self.steps)

    def __str__(self):
        return " ".join(str(s) for s in self.steps)


_INV = re.compile(r"^(.*?)(\^-1|-1|~)$")


def parse_step(token) -> Step:
    """Accepts ``Step``, ``(name, inverted)`` or strings like ``"Ty^-1"`` / ``"Ty~"``."""
    if isinstance(token, Step):
        return token
    if isinstance(token, tuple):
        name, inverted = token
        return Step(str(name), bool(inverted))
    token = str(token).strip()
    m = _INV.match(token)
    if m and m.group(1):
        return Step(m.group(1), True)
    return Step(token, False)


def parse_steps(spec) -> list:
    if isinstance(spec, str):
        spec = [t for t in re.split(r"[\s,.]+", spec) if t]
    return [parse_step(t) for t in spec]


class Hin:
    """Frozen heterogeneous information network.

    Build with :func:`build_hin`; derived networks come from
    :meth:`with_link_groups`, never from mutation.
    """

    def __init__(self, groups: Mapping[str, ObjectGroup], links: Mapping[str, LinkGroup]):
        self._groups = dict(groups)
        self._links = dict(links)
        self.schema = Schema.from_parts(self._groups, self._links.values())
        self._degrees = {
            name: (lg.out_degree(len(self._groups[lg.source])),
                   lg.in_degree(len(self._groups[lg.target])))
            for name, lg in self._links.items()
        }
        for out_deg, in_deg in self._degrees.values():
            out_deg.flags.writeable = False
            in_deg.flags.writeable = False

    @property
    def object_groups(self) -> Mapping[str, ObjectGroup]:
        return MappingProxyType(self._groups)

    @property
    def link_groups(self) -> Mapping[str, LinkGroup]:
        return MappingProxyType(self._links)

    def __repr__(self):
        groups = ", ".join(f"{g}={len(v)}" for g, v in self._groups.items())
        links = ", ".join(f"{n}={len(v)}" for n, v in self._links.items())
        return f"Hin(groups[{groups}], links[{links}])"

    def group(self, name) -> ObjectGroup:
        try:
            return self._groups[name]
        except KeyError:
            raise HinError(f"unknown object group {name!r}") from None

    def link(self, name, inverted=False) -> LinkGroup:
        try:
            lg = self._links[name]
        except KeyError:
            raise UnknownRelationError(f"unknown relation {name!r}") from None
        return lg.inverse() if inverted else lg

    def invert(self, name) -> LinkGroup:
        return self.link(name, inverted=True)

    def out_degree(self, name) -> np.ndarray:
        self.link(name)
        return self._degrees[name][0]

    def in_degree(self, name) -> np.ndarray:
        self.link(name)
        return self._degrees[name][1]

    def with_link_groups(self, link_groups: Sequence[LinkGroup] = (), drop: Sequence[str] = ()) -> Hin:
        """New network sharing every untouched group; ``link_groups`` replace same-named ones."""
        links = {k: v for k, v in self._links.items() if k not in set(drop)}
        for lg in link_groups:
            links[lg.name] = lg.canonical()
        return build_hin(self._groups.values(), links.values())

    def with_object_groups(self, groups: Sequence[ObjectGroup]) -> Hin:
        all_groups = dict(self._groups)
        for g in groups:
            all_groups[g.name] = g
        return build_hin(all_groups.values(), self._links.values())


def build_hin(object_groups: Iterable[ObjectGroup], link_groups: Iterable[LinkGroup]) -> Hin:
    groups = {}
    for g in object_groups:
        if g.name in groups:
            raise HinError(f"duplicate object group name {g.name!r}")
        groups[g.name] = g
    links = {}
    for lg in link_groups:
        if lg.name in links:
            raise HinError(f"duplicate relation name {lg.name!r}")
        for end in (lg.source, lg.target):
            if end not in groups:
                raise HinError(f"relation {lg.name!r} references unknown group {end!r}")
        n_src, n_dst = len(groups[lg.source]), len(groups[lg.target])
        if len(lg) and (lg.src.min() < 0 or lg.src.max() >= n_src
                        or lg.dst.min() < 0 or lg.dst.max() >= n_dst):
            raise HinError(f"relation {lg.name!r} has an endpoint outside its group")
        links[lg.name] = lg.canonical()
    return Hin(groups, links)


def link_group_from_labels(name, source: ObjectGroup, target: ObjectGroup, pairs, values=None) -> LinkGroup:
    """Edges given as (source label, target label); unknown labels raise."""
    idx = [(source.index(a), target.index(b)) for a, b in pairs]
    return LinkGroup.from_pairs(name, source.name, target.name, idx, values)


def validate_meta_path(hin: Hin, steps) -> MetaPath:
    steps = parse_steps(steps)
    if not steps:
        raise MetaPathError("empty meta-path", step=None)
    source = current = None
    for k, step in enumerate(steps, start=1):
        if step.relation not in hin.link_groups:
            raise MetaPathError(f"step {k}: unknown relation {step.relation!r}", step=k)
        lg = hin.link(step.relation, step.inverted)
        if current is None:
            source = lg.source
        elif lg.source != current:
            raise MetaPathError(
                f"step {k} ({step}) starts at {lg.source!r} but the path is at {current!r}", step=k)
        current = lg.target
    return MetaPath(tuple(steps), source, current)
