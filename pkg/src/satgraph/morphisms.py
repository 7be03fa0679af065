"""Maps between finite graphs: homomorphisms, quotient maps, lifting checks."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from . import _bits
from .graphs import FiniteGraph


@dataclass(frozen=True, eq=False)
class GraphMap:
    """A total vertex map between two finite graphs.

    ``image[v]`` is the target vertex of source vertex v.  The map itself
    carries no promise of edge preservation; use the predicates below.
    """

    source: FiniteGraph
    target: FiniteGraph
    image: np.ndarray = field(repr=False)

    def __post_init__(self):
        img = np.ascontiguousarray(self.image, dtype=np.int64)
        if img.shape != (self.source.vertex_count,):
            raise ValueError("image must assign every source vertex")
        if img.size and (img.min() < 0 or img.max() >= self.target.vertex_count):
            raise ValueError("image value out of target range")
        img.flags.writeable = False
        object.__setattr__(self, "image", img)

    def __call__(self, v: int) -> int:
        return int(self.image[v])

    @classmethod
    def identity(cls, g: FiniteGraph) -> "GraphMap":
        return cls(g, g, np.arange(g.vertex_count))

    @classmethod
    def constant(cls, source: FiniteGraph, target: FiniteGraph, value: int = 0) -> "GraphMap":
        return cls(source, target, np.full(source.vertex_count, value))

    def fibers(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.target.vertex_count)]
        for u, p in enumerate(self.image):
            out[int(p)].append(u)
        return out

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GraphMap):
            return NotImplemented
        return (
            self.source == other.source
            and self.target == other.target
            and np.array_equal(self.image, other.image)
        )

    __hash__ = None  # type: ignore[assignment]


def is_homomorphism(h: GraphMap) -> bool:
    """Every source edge maps onto a target edge (loops absorb collapses)."""
    src, tgt, img = h.source, h.target, h.image
    v = src.vertex_count
    chunk = max(1, (1 << 22) // max(1, v))
    for r0 in range(0, v, chunk):
        r1 = min(v, r0 + chunk)
        block = _bits.unpack_rows(src.packed_rows[r0:r1], v)
        for local, u in enumerate(range(r0, r1)):
            nbrs = np.nonzero(block[local])[0]
            hu = int(img[u])
            hn = img[nbrs]
            bits = (tgt.packed_rows[hu, hn >> 6] >> (hn & 63).astype(np.uint64)) & np.uint64(1)
            if not bits.all():
                return False
    return True


def is_strict(h: GraphMap) -> bool:
    """Every target edge between image points pulls back to a source edge."""
    fibers = h.fibers()
    fiber_masks = [sum(1 << u for u in fib) for fib in fibers]
    tgt = h.target
    for p in range(tgt.vertex_count):
        if not fibers[p]:
            continue
        for q in range(p + 1, tgt.vertex_count):
            if not fibers[q] or not tgt.adjacent(p, q):
                continue
            mask_q = fiber_masks[q]
            if not any(h.source.neighbors_mask(a) & mask_q for a in fibers[p]):
                return False
    return True


def is_surjective(h: GraphMap) -> bool:
    return bool(np.all(np.bincount(h.image, minlength=h.target.vertex_count) > 0))


def is_quotient_map(h: GraphMap) -> bool:
    return is_surjective(h) and is_homomorphism(h) and is_strict(h)


def compose(outer: GraphMap, inner: GraphMap) -> GraphMap:
    """The map v -> outer(inner(v)); inner's target must be outer's source."""
    if inner.target is not outer.source and inner.target != outer.source:
        raise ValueError("inner.target must equal outer.source")
    return GraphMap(inner.source, outer.target, outer.image[inner.image])


@dataclass(frozen=True)
class LiftingReport:
    """Outcome of a fiber-lifting check.

    On failure, ``counterexample`` is a pair (downstairs vertex, upstairs
    targets): no preimage of the downstairs vertex is adjacent to all of
    the listed upstairs vertices, which is directly re-checkable.
    """

    holds: bool
    counterexample: Optional[tuple[int, tuple[int, ...]]] = None

    def __bool__(self) -> bool:
        return self.holds


def check_lifting_property(h: GraphMap, n: int) -> LiftingReport:
    """Verify the quotient map h lifts common-neighbour configurations.

    For every target vertex v, every set of up to n-1 distinct neighbours
    of v, and every choice of preimages of those neighbours, some preimage
    of v must be adjacent to all the chosen preimages.  Enumeration order
    (v ascending, tuple length ascending, subsets and preimage choices
    lexicographic) makes the reported counterexample deterministic.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if not is_quotient_map(h):
        raise ValueError("lifting check expects a quotient map")
    src, tgt = h.source, h.target
    fibers = h.fibers()
    fiber_masks = [sum(1 << u for u in fib) for fib in fibers]
    src_masks = [src.neighbors_mask(u) for u in range(src.vertex_count)]
    for v in range(tgt.vertex_count):
        nbrs = [w for w in range(tgt.vertex_count) if tgt.adjacent(v, w)]
        base_mask = fiber_masks[v]
        for k in range(1, n):
            for subset in itertools.combinations(nbrs, k):
                for pre in itertools.product(*(fibers[w] for w in subset)):
                    cand = base_mask
                    for u in pre:
                        cand &= src_masks[u]
                        if cand == 0:
                            break
                    if cand == 0:
                        return LiftingReport(False, (v, tuple(pre)))
    return LiftingReport(True)
