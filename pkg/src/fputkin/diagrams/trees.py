"""Ordered ternary trees with signs and degenerate-node markings.

A tree shape is a nested tuple: ``None`` is a leaf and a 3-tuple of shapes
is a branching node.  Nodes are numbered in preorder (root is 0).  Signs
follow the rule that the children of a node with sign ``z`` carry
``(z, -z, z)``.  A degenerate node stores its distinguished child position,
which is 1 (first) or 3 (third), the two children sharing the parent's sign.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cache, cached_property

from ..errors import InvalidParameter

MAX_TREE_SCALE = 6
Shape = tuple | None


@cache
def tree_shapes(n: int) -> tuple:
    """All ordered ternary shapes with ``n`` branching nodes, in canonical order."""
    if n < 0:
        return ()
    if n == 0:
        return (None,)
    out = []
    for a in range(n):
        for b in range(n - a):
            c = n - 1 - a - b
            for s1 in tree_shapes(a):
                for s2 in tree_shapes(b):
                    for s3 in tree_shapes(c):
                        out.append((s1, s2, s3))
    return tuple(out)


def fuss_catalan(n: int) -> int:
    """Number of ordered ternary trees with ``n`` branching nodes."""
    return math.comb(3 * n, n) // (2 * n + 1)


def count_shapes_bruteforce(n: int) -> int:
    """Count shapes by testing every branch/leaf word of length ``3n + 1``.

    A preorder word is valid when the running balance (``+2`` per branching
    node, ``-1`` per leaf, starting from 1) first reaches zero at the end.
    """
    length = 3 * n + 1
    count = 0
    for word in itertools.product((0, 1), repeat=length):
        if sum(word) != n:
            continue
        open_slots = 1
        ok = True
        for i, is_branch in enumerate(word):
            open_slots += 2 if is_branch else -1
            if open_slots == 0 and i != length - 1:
                ok = False
                break
        if ok and open_slots == 0:
            count += 1
    return count


def shape_scale(shape: Shape) -> int:
    if shape is None:
        return 0
    return 1 + sum(shape_scale(c) for c in shape)


@dataclass(frozen=True)
class NodeInfo:
    index: int
    parent: int | None
    position: int  # 1, 2, 3 within the parent; 0 for the root
    children: tuple  # child node indices, empty for leaves
    sign: int
    depth: int

    @property
    def is_leaf(self) -> bool:
        return not self.children


@dataclass(frozen=True)
class EnhancedTree:
    """A signed ternary tree with an optional set of degenerate nodes.

    ``degenerate`` is a sorted tuple of ``(node_index, distinguished_position)``
    pairs with ``distinguished_position`` in ``{1, 3}``.
    """

    shape: Shape
    sign: int = 1
    degenerate: tuple = field(default=())

    def __post_init__(self) -> None:
        if self.sign not in (1, -1):
            raise InvalidParameter("tree sign must be +1 or -1")
        object.__setattr__(self, "degenerate", tuple(sorted(tuple(d) for d in self.degenerate)))
        branching = {n.index for n in self.nodes if not n.is_leaf}
        seen = set()
        for node, pos in self.degenerate:
            if node not in branching:
                raise InvalidParameter(f"degenerate node {node} is not a branching node")
            if pos not in (1, 3):
                raise InvalidParameter("distinguished child must be the first or third child")
            if node in seen:
                raise InvalidParameter(f"node {node} marked twice")
            seen.add(node)

    @cached_property
    def nodes(self) -> tuple:
        out: list[NodeInfo] = []

        def visit(shape, parent, position, sign, depth):
            idx = len(out)
            out.append(None)  # placeholder keeps preorder numbering
            kids = []
            if shape is not None:
                for pos, (child, child_sign) in enumerate(zip(shape, (sign, -sign, sign)), start=1):
                    kids.append(visit(child, idx, pos, child_sign, depth + 1))
            out[idx] = NodeInfo(idx, parent, position, tuple(kids), sign, depth)
            return idx

        visit(self.shape, None, 0, self.sign, 0)
        return tuple(out)

    @property
    def scale(self) -> int:
        return sum(1 for n in self.nodes if not n.is_leaf)

    @property
    def branching(self) -> tuple:
        return tuple(n.index for n in self.nodes if not n.is_leaf)

    @property
    def leaves(self) -> tuple:
        return tuple(n.index for n in self.nodes if n.is_leaf)

    @cached_property
    def degenerate_map(self) -> dict:
        return dict(self.degenerate)

    def is_degenerate(self, node: int) -> bool:
        return node in self.degenerate_map

    def degenerate_roles(self, node: int) -> tuple[int, int, int]:
        """``(distinguished, middle, partner)`` child indices of a degenerate node."""
        pos = self.degenerate_map[node]
        c1, c2, c3 = self.nodes[node].children
        return (c1, c2, c3) if pos == 1 else (c3, c2, c1)

    def leaves_under(self, node: int) -> tuple:
        info = self.nodes[node]
        if info.is_leaf:
            return (node,)
        return tuple(l for c in info.children for l in self.leaves_under(c))

    def plain(self) -> "EnhancedTree":
        return EnhancedTree(self.shape, self.sign)

    def with_sign(self, sign: int) -> "EnhancedTree":
        return EnhancedTree(self.shape, sign, self.degenerate)

    def to_json(self, leaf_offset: int = 0) -> dict:
        """Nested JSON; leaves carry their (offset) node index."""

        def emit(idx):
            info = self.nodes[idx]
            if info.is_leaf:
                return {"sign": info.sign, "leaf": idx + leaf_offset}
            node = {"sign": info.sign, "children": [emit(c) for c in info.children]}
            if idx in self.degenerate_map:
                node["degenerate"] = True
                node["distinguished"] = self.degenerate_map[idx]
            return node

        return emit(0)

    @classmethod
    def from_json(cls, data: dict) -> "EnhancedTree":
        degenerate = []
        counter = [0]

        def parse(node):
            idx = counter[0]
            counter[0] += 1
            if "children" not in node:
                return None
            if len(node["children"]) != 3:
                raise InvalidParameter("branching nodes need exactly three children")
            if node.get("degenerate"):
                degenerate.append((idx, int(node["distinguished"])))
            return tuple(parse(c) for c in node["children"])

        shape = parse(data)
        tree = cls(shape, int(data["sign"]), tuple(degenerate))
        for info, sign in zip(tree.nodes, _json_signs(data)):
            if info.sign != sign:
                raise InvalidParameter("sign pattern violates the (z, -z, z) rule")
        return tree


def _json_signs(node: dict) -> list:
    out = [int(node["sign"])]
    for child in node.get("children", ()):
        out.extend(_json_signs(child))
    return out


def degenerate_markings(tree: EnhancedTree):
    """Every marking of a plain tree: each branching node is plain or degenerate with choice 1 or 3."""
    branching = tree.branching
    for choice in itertools.product((0, 1, 3), repeat=len(branching)):
        marks = tuple((node, c) for node, c in zip(branching, choice) if c)
        yield EnhancedTree(tree.shape, tree.sign, marks)


def enumerate_trees(n: int, sign: int = 1, with_degeneracies: bool = False) -> list[EnhancedTree]:
    """All trees of scale ``n`` (optionally with every degenerate marking)."""
    if n < 0:
        raise InvalidParameter("scale must be non-negative")
    if n > MAX_TREE_SCALE:
        raise InvalidParameter(f"exhaustive tree enumeration is limited to scale <= {MAX_TREE_SCALE}")
    out = []
    for shape in tree_shapes(n):
        plain = EnhancedTree(shape, sign)
        if with_degeneracies:
            out.extend(degenerate_markings(plain))
        else:
            out.append(plain)
    return out
