"""Canonical serialization: graph JSON, tower files, DOT export.

Encoders emit one fixed byte representation (compact separators, fixed key
order, edges sorted lexicographically with a < b and loops implied), so
encode -> decode -> encode is byte-identical and files diff cleanly.
Decoders validate strictly and reject anything non-canonical.
"""

from __future__ import annotations

import io
import json
from typing import IO, Any

import numpy as np

from .graphs import FiniteGraph
from .morphisms import GraphMap
from .towers import Tower

_MAX_SEED = 2**64 - 1


class FormatError(ValueError):
    """Input does not conform to the canonical file format."""


# -- graphs -------------------------------------------------------------------


def write_graph(g: FiniteGraph, fp: IO[str]) -> None:
    fp.write(f'{{"v":{g.vertex_count},"edges":[')
    first = True
    for chunk in g.edges_chunks():
        text = ",".join(f"[{a},{b}]" for a, b in chunk.tolist())
        if not first:
            fp.write(",")
        fp.write(text)
        first = False
    fp.write("]}")


def encode_graph(g: FiniteGraph) -> str:
    buf = io.StringIO()
    write_graph(g, buf)
    return buf.getvalue()


def graph_from_obj(obj: Any) -> FiniteGraph:
    if not isinstance(obj, dict) or set(obj.keys()) != {"v", "edges"}:
        raise FormatError('graph object must have exactly the keys "v" and "edges"')
    v = obj["v"]
    if not isinstance(v, int) or isinstance(v, bool) or v < 1:
        raise FormatError("vertex count must be a positive integer")
    edges = obj["edges"]
    if not isinstance(edges, list):
        raise FormatError("edges must be a list")
    prev = None
    for e in edges:
        if (
            not isinstance(e, list)
            or len(e) != 2
            or not all(isinstance(x, int) and not isinstance(x, bool) for x in e)
        ):
            raise FormatError("each edge must be a pair of integers")
        a, b = e
        if not 0 <= a < b < v:
            raise FormatError(f"edge [{a},{b}] out of range or not ordered a < b")
        if prev is not None and (a, b) <= prev:
            raise FormatError("edges must be strictly increasing lexicographically")
        prev = (a, b)
    return FiniteGraph.from_edges(v, edges)


def decode_graph(text: str) -> FiniteGraph:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc}") from exc
    return graph_from_obj(obj)


# -- towers -------------------------------------------------------------------


def write_tower(t: Tower, fp: IO[str]) -> None:
    fp.write(f'{{"n":{t.n},"seed":{t.seed},"levels":[')
    for idx, g in enumerate(t.levels):
        if idx:
            fp.write(",")
        write_graph(g, fp)
    fp.write('],"bonds":[')
    for idx, bond in enumerate(t.bonds):
        if idx:
            fp.write(",")
        fp.write("[" + ",".join(map(str, bond.image.tolist())) + "]")
    fp.write('],"per_level_m":[')
    fp.write(",".join(str(m) for m in t.per_level_m))
    fp.write("]}\n")


def encode_tower(t: Tower) -> str:
    buf = io.StringIO()
    write_tower(t, buf)
    return buf.getvalue()


def save_tower(t: Tower, path: str) -> None:
    with open(path, "w", encoding="ascii", newline="") as fp:
        write_tower(t, fp)


def tower_from_obj(obj: Any) -> Tower:
    keys = {"n", "seed", "levels", "bonds", "per_level_m"}
    if not isinstance(obj, dict) or set(obj.keys()) != keys:
        raise FormatError(f"tower object must have exactly the keys {sorted(keys)}")
    n, seed = obj["n"], obj["seed"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise FormatError("n must be a positive integer")
    if not isinstance(seed, int) or isinstance(seed, bool) or not 0 <= seed <= _MAX_SEED:
        raise FormatError("seed must be a 64-bit unsigned integer")
    levels_obj, bonds_obj, ms_obj = obj["levels"], obj["bonds"], obj["per_level_m"]
    if not isinstance(levels_obj, list) or not levels_obj:
        raise FormatError("levels must be a non-empty list")
    if not isinstance(bonds_obj, list) or not isinstance(ms_obj, list):
        raise FormatError("bonds and per_level_m must be lists")
    if len(bonds_obj) != len(levels_obj) - 1 or len(ms_obj) != len(bonds_obj):
        raise FormatError("levels, bonds and per_level_m lengths disagree")
    levels = tuple(graph_from_obj(g) for g in levels_obj)
    per_level_m = []
    for m in ms_obj:
        if not isinstance(m, int) or isinstance(m, bool) or m < 1:
            raise FormatError("per_level_m entries must be integers >= 1")
        per_level_m.append(m)
    for d, m in enumerate(per_level_m):
        if levels[d + 1].vertex_count != levels[d].vertex_count * (m + 1):
            raise FormatError(f"level {d + 1} size does not match per_level_m")
    bonds = []
    for d, arr in enumerate(bonds_obj):
        src, tgt = levels[d + 1], levels[d]
        if not isinstance(arr, list) or len(arr) != src.vertex_count:
            raise FormatError(f"bond {d} must list one parent per level-{d + 1} vertex")
        if not all(
            isinstance(x, int) and not isinstance(x, bool) and 0 <= x < tgt.vertex_count
            for x in arr
        ):
            raise FormatError(f"bond {d} has a parent out of range")
        bonds.append(GraphMap(src, tgt, np.asarray(arr, dtype=np.int64)))
    return Tower(n, seed, levels, tuple(bonds), tuple(per_level_m))


def decode_tower(text: str) -> Tower:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc}") from exc
    return tower_from_obj(obj)


def load_tower(path: str) -> Tower:
    try:
        with open(path, "r", encoding="ascii") as fp:
            text = fp.read()
    except (OSError, UnicodeDecodeError) as exc:
        raise FormatError(f"cannot read tower file: {exc}") from exc
    return decode_tower(text)


# -- DOT export -----------------------------------------------------------------


def level_to_dot(t: Tower, level: int) -> str:
    """Graph-description text for one level; deterministic byte-for-byte.

    Above level 0, vertices are labelled with their (base, copy) product
    coordinates.  Loops are omitted; edges appear in canonical order.
    """
    if not 0 <= level <= t.depth:
        raise ValueError("level out of range")
    g = t.levels[level]
    lines = ["graph {"]
    if level == 0:
        for v in range(g.vertex_count):
            lines.append(f'  {v} [label="{v}"];')
    else:
        copies = t.per_level_m[level - 1] + 1
        for v in range(g.vertex_count):
            lines.append(f'  {v} [label="({v // copies},{v % copies})"];')
    for a, b in g.edges():
        lines.append(f"  {a} -- {b};")
    lines.append("}")
    return "\n".join(lines) + "\n"
