"""Finite Kripke frames and models, and the modal/tangle/fixpoint checker.

Worlds are opaque strings; their order in ``Frame.worlds`` is the canonical
order used by every deterministic construction in the package.  Extensions
are computed internally as integer bitmasks over that order.

On transitive frames the tangle modality is evaluated through the cluster
criterion: ``x`` satisfies ``<t>{D}`` iff some successor ``y`` of ``x`` is
reflexive and every member of ``D`` holds somewhere in the cluster of ``y``.
A brute-force lasso oracle (:func:`tangle_oracle`) is kept alongside purely
for cross-validation; it never feeds the checker.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Mapping

from .formula import (
    And,
    Atom,
    Bot,
    Box,
    BoxD,
    Dia,
    DiaD,
    Exists,
    Forall,
    Formula,
    Iff,
    Implies,
    Mu,
    Neg,
    Nu,
    Or,
    Tangle,
    TangleD,
    Top,
)


class NonTransitiveError(ValueError):
    """An operation that presupposes a transitive relation got something else."""


@dataclass(frozen=True)
class Frame:
    worlds: tuple[str, ...]
    rel: frozenset[tuple[str, str]]

    def __post_init__(self):
        object.__setattr__(self, "worlds", tuple(self.worlds))
        object.__setattr__(self, "rel", frozenset(self.rel))
        if not self.worlds:
            raise ValueError("a frame needs at least one world")
        if len(set(self.worlds)) != len(self.worlds):
            raise ValueError("duplicate world ids")
        scope = set(self.worlds)
        for pair in self.rel:
            if pair[0] not in scope or pair[1] not in scope:
                raise ValueError(f"relation pair {pair} outside the world set")

    def successors(self, w: str) -> frozenset[str]:
        return frozenset(v for (u, v) in self.rel if u == w)


class KripkeModel:
    """A frame plus a valuation.  Atoms absent from ``val`` are false
    everywhere.  Instances are value-compared and treated as immutable."""

    __slots__ = ("frame", "val")

    def __init__(self, frame: Frame, val: Mapping[str, Iterable[str]]):
        scope = set(frame.worlds)
        clean: dict[str, frozenset[str]] = {}
        for atom, worlds in val.items():
            ws = frozenset(worlds)
            if not ws <= scope:
                raise ValueError(f"valuation of '{atom}' mentions unknown worlds")
            clean[atom] = ws
        self.frame = frame
        self.val = clean

    def __eq__(self, other) -> bool:
        if not isinstance(other, KripkeModel):
            return NotImplemented
        mine = {a: s for a, s in self.val.items() if s}
        theirs = {a: s for a, s in other.val.items() if s}
        return self.frame == other.frame and mine == theirs

    def __hash__(self):
        return hash((self.frame, frozenset((a, s) for a, s in self.val.items() if s)))

    def __repr__(self):
        return f"KripkeModel(worlds={len(self.frame.worlds)}, atoms={sorted(self.val)})"


# ---------------------------------------------------------------------------
# Relation analysis


@dataclass(frozen=True)
class RelationProperties:
    reflexive: bool
    transitive: bool
    serial: bool


def relation_properties(frame: Frame) -> RelationProperties:
    rel = frame.rel
    reflexive = all((w, w) in rel for w in frame.worlds)
    serial = all(any((w, v) in rel for v in frame.worlds) for w in frame.worlds)
    succ = {w: frame.successors(w) for w in frame.worlds}
    transitive = all(succ[v] <= succ[u] for (u, v) in rel)
    return RelationProperties(reflexive, transitive, serial)


@dataclass(frozen=True)
class Closures:
    transitive: Frame
    reflexive_transitive: Frame


def closures(frame: Frame) -> Closures:
    n = len(frame.worlds)
    index = {w: i for i, w in enumerate(frame.worlds)}
    succ = [0] * n
    for (u, v) in frame.rel:
        succ[index[u]] |= 1 << index[v]
    changed = True
    while changed:
        changed = False
        for i in range(n):
            acc = succ[i]
            for k in range(n):
                if acc & (1 << k):
                    acc |= succ[k]
            if acc != succ[i]:
                succ[i] = acc
                changed = True
    trans_pairs = frozenset(
        (frame.worlds[i], frame.worlds[j])
        for i in range(n)
        for j in range(n)
        if succ[i] & (1 << j)
    )
    refl_pairs = trans_pairs | frozenset((w, w) for w in frame.worlds)
    return Closures(Frame(frame.worlds, trans_pairs), Frame(frame.worlds, refl_pairs))


@dataclass(frozen=True)
class ClusterDecomposition:
    """Partition of a transitive frame into clusters.

    ``clusters[i]`` lists the member worlds; ``degenerate[i]`` flags the
    singleton irreflexive clusters; ``order`` holds the strict
    reachability pairs between cluster indices; ``rank[i]`` counts the
    clusters on the longest chain starting at cluster ``i`` (maximal
    clusters have rank 1).
    """

    clusters: tuple[frozenset[str], ...]
    degenerate: tuple[bool, ...]
    order: frozenset[tuple[int, int]]
    rank: tuple[int, ...]

    def cluster_of(self, w: str) -> int:
        for i, c in enumerate(self.clusters):
            if w in c:
                return i
        raise KeyError(w)


def cluster_decomposition(frame: Frame) -> ClusterDecomposition:
    props = relation_properties(frame)
    if not props.transitive:
        raise NonTransitiveError("cluster decomposition needs a transitive relation")
    rel = frame.rel
    assigned: dict[str, int] = {}
    clusters: list[frozenset[str]] = []
    for w in frame.worlds:
        if w in assigned:
            continue
        mates = {w} | {
            v for v in frame.worlds if v != w and (w, v) in rel and (v, w) in rel
        }
        idx = len(clusters)
        clusters.append(frozenset(mates))
        for v in mates:
            assigned[v] = idx
    degenerate = tuple(
        len(c) == 1 and (next(iter(c)), next(iter(c))) not in rel for c in clusters
    )
    order = frozenset(
        (assigned[u], assigned[v]) for (u, v) in rel if assigned[u] != assigned[v]
    )
    # longest chain of clusters starting at each cluster; the order is a
    # strict partial order, so plain memoized recursion terminates
    rank: dict[int, int] = {}

    def rank_of(i: int) -> int:
        if i not in rank:
            nexts = [j for (a, j) in order if a == i]
            rank[i] = 1 + max((rank_of(j) for j in nexts), default=0)
        return rank[i]

    ranks = tuple(rank_of(i) for i in range(len(clusters)))
    return ClusterDecomposition(tuple(clusters), degenerate, order, ranks)


def _components(worlds: Iterable[str], pairs: Iterable[tuple[str, str]]) -> tuple[frozenset[str], ...]:
    """Connected components of the symmetrised relation, ordered by first world."""
    worlds = list(worlds)
    adj: dict[str, set[str]] = {w: set() for w in worlds}
    for (u, v) in pairs:
        if u in adj and v in adj:
            adj[u].add(v)
            adj[v].add(u)
    seen: set[str] = set()
    out: list[frozenset[str]] = []
    for w in worlds:
        if w in seen:
            continue
        comp = {w}
        stack = [w]
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if v not in comp:
                    comp.add(v)
                    stack.append(v)
        seen |= comp
        out.append(frozenset(comp))
    return tuple(out)


def path_components(frame: Frame) -> tuple[frozenset[str], ...]:
    """Partition of the worlds into zigzag-connectivity components."""
    return _components(frame.worlds, frame.rel)


def locally_n_connected(frame: Frame, n: int) -> bool:
    """Every successor set splits into at most ``n`` path components, where
    the connecting paths must stay inside the successor set.  An empty
    successor set has zero components and never violates the bound."""
    for w in frame.worlds:
        succ = frame.successors(w)
        if not succ:
            continue
        inner = [(u, v) for (u, v) in frame.rel if u in succ and v in succ]
        if len(_components(sorted(succ, key=frame.worlds.index), inner)) > n:
            return False
    return True


def min_local_connectedness(frame: Frame) -> int:
    """Least ``n >= 1`` such that the frame is locally n-connected."""
    worst = 1
    for w in frame.worlds:
        succ = frame.successors(w)
        if not succ:
            continue
        inner = [(u, v) for (u, v) in frame.rel if u in succ and v in succ]
        worst = max(worst, len(_components(sorted(succ, key=frame.worlds.index), inner)))
    return worst


# ---------------------------------------------------------------------------
# Model checking


class Evaluator:
    """Bitmask evaluator over a fixed frame.

    Build once per frame, then query :meth:`extension` with different
    valuations; the frame analysis (successor masks, clusters) is reused.
    """

    def __init__(self, frame: Frame):
        self.frame = frame
        self.worlds = frame.worlds
        self.n = len(frame.worlds)
        self.full = (1 << self.n) - 1
        index = {w: i for i, w in enumerate(frame.worlds)}
        self.index = index
        self.succ = [0] * self.n
        for (u, v) in frame.rel:
            self.succ[index[u]] |= 1 << index[v]
        self._transitive: bool | None = None
        self._cluster_masks: list[int] | None = None

    # -- frame facts ------------------------------------------------------

    def is_transitive(self) -> bool:
        if self._transitive is None:
            self._transitive = all(
                self.succ[j] & ~self.succ[i] == 0
                for i in range(self.n)
                for j in range(self.n)
                if self.succ[i] & (1 << j)
            )
        return self._transitive

    def _nondegenerate_clusters(self) -> list[int]:
        """Masks of the non-degenerate clusters (every member reflexive)."""
        if self._cluster_masks is None:
            masks: list[int] = []
            seen = 0
            for i in range(self.n):
                bit = 1 << i
                if seen & bit:
                    continue
                if not self.succ[i] & bit:
                    # an irreflexive world is in a non-degenerate cluster only
                    # with a distinct mutual neighbour, impossible under
                    # transitivity without a self loop
                    continue
                mask = bit
                for j in range(i + 1, self.n):
                    if self.succ[i] & (1 << j) and self.succ[j] & bit:
                        mask |= 1 << j
                seen |= mask
                masks.append(mask)
            self._cluster_masks = masks
        return self._cluster_masks

    # -- sets <-> masks ---------------------------------------------------

    def mask(self, worlds: Iterable[str]) -> int:
        m = 0
        for w in worlds:
            m |= 1 << self.index[w]
        return m

    def unmask(self, mask: int) -> frozenset[str]:
        return frozenset(w for i, w in enumerate(self.worlds) if mask & (1 << i))

    def valuation_masks(self, val: Mapping[str, Iterable[str]]) -> dict[str, int]:
        return {atom: self.mask(ws) for atom, ws in val.items()}

    # -- evaluation -------------------------------------------------------

    def extension(self, phi: Formula, val: Mapping[str, int]) -> int:
        if isinstance(phi, Atom):
            return val.get(phi.name, 0)
        if isinstance(phi, Top):
            return self.full
        if isinstance(phi, Bot):
            return 0
        if isinstance(phi, Neg):
            return self.full & ~self.extension(phi.sub, val)
        if isinstance(phi, And):
            return self.extension(phi.left, val) & self.extension(phi.right, val)
        if isinstance(phi, Or):
            return self.extension(phi.left, val) | self.extension(phi.right, val)
        if isinstance(phi, Implies):
            return (self.full & ~self.extension(phi.left, val)) | self.extension(
                phi.right, val
            )
        if isinstance(phi, Iff):
            a = self.extension(phi.left, val)
            b = self.extension(phi.right, val)
            return self.full & ~(a ^ b)
        if isinstance(phi, (Box, BoxD)):
            sub = self.extension(phi.sub, val)
            out = 0
            for i in range(self.n):
                if self.succ[i] & ~sub == 0:
                    out |= 1 << i
            return out
        if isinstance(phi, (Dia, DiaD)):
            sub = self.extension(phi.sub, val)
            out = 0
            for i in range(self.n):
                if self.succ[i] & sub:
                    out |= 1 << i
            return out
        if isinstance(phi, Forall):
            return self.full if self.extension(phi.sub, val) == self.full else 0
        if isinstance(phi, Exists):
            return self.full if self.extension(phi.sub, val) else 0
        if isinstance(phi, (Tangle, TangleD)):
            return self._tangle(phi.members, val)
        if isinstance(phi, Mu):
            return self._lfp(phi.var, phi.body, val)
        if isinstance(phi, Nu):
            # greatest fixpoint through the complement of the dual least one
            var, body = phi.var, phi.body
            current = 0
            while True:
                inner = self.extension(body, {**val, var: self.full & ~current})
                step = self.full & ~inner
                if step == current:
                    return self.full & ~current
                current = step
        raise TypeError(f"not a formula: {phi!r}")

    def _lfp(self, var: str, body: Formula, val: Mapping[str, int]) -> int:
        current = 0
        # monotone, so at most n+1 rounds are needed
        for _ in range(self.n + 2):
            step = self.extension(body, {**val, var: current})
            if step == current:
                return current
            current = step
        raise RuntimeError("fixpoint iteration failed to stabilize")

    def _tangle(self, members: tuple[Formula, ...], val: Mapping[str, int]) -> int:
        if not self.is_transitive():
            raise NonTransitiveError(
                "tangle formulas require a transitive frame"
            )
        masks = [self.extension(m, val) for m in members]
        good = 0
        for cluster in self._nondegenerate_clusters():
            if all(mask & cluster for mask in masks):
                good |= cluster
        out = 0
        for i in range(self.n):
            if self.succ[i] & good:
                out |= 1 << i
        return out


def model_check(model: KripkeModel, phi: Formula) -> frozenset[str]:
    """Worlds of ``model`` satisfying ``phi``."""
    ev = Evaluator(model.frame)
    return ev.unmask(ev.extension(phi, ev.valuation_masks(model.val)))


def tangle_oracle(model: KripkeModel, world: str, members: Iterable[Formula]) -> bool:
    """Independent lasso check for the tangle clause at one world.

    Enumerates the simple cycles reachable from ``world`` and asks whether
    some cycle carries every member formula.  Exact on transitive frames;
    member formulas should themselves be tangle-free.
    """
    members = list(members)
    ev = Evaluator(model.frame)
    val = ev.valuation_masks(model.val)
    member_masks = [ev.extension(m, val) for m in members]
    n = ev.n
    start = ev.index[world]

    reach = 1 << start
    frontier = [start]
    while frontier:
        i = frontier.pop()
        new = ev.succ[i] & ~reach
        for j in range(n):
            if new & (1 << j):
                reach |= 1 << j
                frontier.append(j)

    # depth-first enumeration of simple cycles inside the reachable part;
    # each cycle is anchored at its least node to avoid rotations
    def cycle_masks(first: int, current: int, on_path: int):
        succ = ev.succ[current]
        if succ & (1 << first):
            yield on_path
        for j in range(first + 1, n):
            bit = 1 << j
            if succ & bit and not on_path & bit and reach & bit:
                yield from cycle_masks(first, j, on_path | bit)

    for first in range(n):
        if not reach & (1 << first):
            continue
        for cmask in cycle_masks(first, first, 1 << first):
            if all(mask & cmask for mask in member_masks):
                return True
    return False


def generated_submodel(model: KripkeModel, root: str) -> KripkeModel:
    """Restriction to the worlds reachable from ``root`` (root included).

    The global quantifier afterwards ranges over the submodel only.
    """
    if root not in model.frame.worlds:
        raise KeyError(root)
    keep = {root}
    stack = [root]
    while stack:
        u = stack.pop()
        for v in model.frame.successors(u):
            if v not in keep:
                keep.add(v)
                stack.append(v)
    worlds = tuple(w for w in model.frame.worlds if w in keep)
    rel = frozenset(p for p in model.frame.rel if p[0] in keep and p[1] in keep)
    val = {a: ws & keep for a, ws in model.val.items()}
    return KripkeModel(Frame(worlds, rel), val)


# ---------------------------------------------------------------------------
# Serialization


def model_to_dict(model: KripkeModel) -> dict:
    worlds = list(model.frame.worlds)
    order = {w: i for i, w in enumerate(worlds)}
    return {
        "worlds": worlds,
        "rel": sorted([list(p) for p in model.frame.rel], key=lambda p: (order[p[0]], order[p[1]])),
        "val": {
            a: sorted(ws, key=order.get)
            for a, ws in sorted(model.val.items())
            if ws
        },
    }


def model_from_dict(data: Mapping) -> KripkeModel:
    try:
        worlds = tuple(str(w) for w in data["worlds"])
        rel = frozenset((str(u), str(v)) for (u, v) in data["rel"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed model data: {exc}") from exc
    val = {str(a): [str(w) for w in ws] for a, ws in data.get("val", {}).items()}
    return KripkeModel(Frame(worlds, rel), val)


def model_to_json(model: KripkeModel) -> str:
    return json.dumps(model_to_dict(model), indent=2, sort_keys=False)


def model_from_json(text: str) -> KripkeModel:
    return model_from_dict(json.loads(text))


_RANK_COLORS = [
    "#cfe8ff",
    "#d8f5d3",
    "#ffe9c7",
    "#f5d3e0",
    "#e3d9f7",
    "#f7f3c9",
    "#d3f0f2",
]


def to_dot(model_or_frame: KripkeModel | Frame, name: str = "model") -> str:
    """Graphviz digraph; on transitive frames clusters become same-rank
    groups filled by rank."""
    if isinstance(model_or_frame, KripkeModel):
        frame = model_or_frame.frame
        val = model_or_frame.val
    else:
        frame = model_or_frame
        val = {}
    labels = {}
    for w in frame.worlds:
        atoms = sorted(a for a, ws in val.items() if w in ws)
        labels[w] = f"{w}\\n{', '.join(atoms)}" if atoms else w
    lines = [f"digraph {name} {{", "  node [shape=ellipse, style=filled];"]
    props = relation_properties(frame)
    if props.transitive:
        dec = cluster_decomposition(frame)
        for i, cluster in enumerate(dec.clusters):
            color = _RANK_COLORS[(dec.rank[i] - 1) % len(_RANK_COLORS)]
            members = sorted(cluster, key=frame.worlds.index)
            lines.append(f"  subgraph cluster_{i} {{")
            lines.append(f'    label="rank {dec.rank[i]}"; rank=same;')
            for w in members:
                lines.append(f'    "{w}" [label="{labels[w]}", fillcolor="{color}"];')
            lines.append("  }")
    else:
        for w in frame.worlds:
            lines.append(f'  "{w}" [label="{labels[w]}", fillcolor="#eeeeee"];')
    order = {w: i for i, w in enumerate(frame.worlds)}
    for (u, v) in sorted(frame.rel, key=lambda p: (order[p[0]], order[p[1]])):
        lines.append(f'  "{u}" -> "{v}";')
    lines.append("}")
    return "\n".join(lines)
