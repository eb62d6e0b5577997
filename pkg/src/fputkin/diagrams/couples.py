"""Couples: a plus tree, a minus tree and a pairing of their leaves.

Nodes of a couple are addressed by a global index: the plus tree occupies
``0 .. P-1`` and the minus tree ``P .. P+M-1`` (each in preorder).  The
pairing is a sorted tuple of ``(plus_leaf, minus_leaf)`` global indices,
where "plus" and "minus" refer to the leaf signs.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from functools import cached_property

from ..errors import InvalidParameter
from .trees import EnhancedTree, degenerate_markings, enumerate_trees

MAX_COUPLE_ORDER = 4


@dataclass(frozen=True)
class EnhancedCouple:
    plus: EnhancedTree
    minus: EnhancedTree
    pairing: tuple

    def __post_init__(self) -> None:
        if self.plus.sign != 1 or self.minus.sign != -1:
            raise InvalidParameter("couple trees must carry signs + and -")
        object.__setattr__(self, "pairing", tuple(sorted(tuple(p) for p in self.pairing)))
        leaves = set(self.leaves)
        used = [g for pair in self.pairing for g in pair]
        if sorted(used) != sorted(leaves):
            raise InvalidParameter("pairing must cover every leaf exactly once")
        for a, b in self.pairing:
            if self.sign(a) != 1 or self.sign(b) != -1:
                raise InvalidParameter("paired leaves must have opposite signs, listed (+, -)")

    # -- addressing -------------------------------------------------------------
    @property
    def offset(self) -> int:
        return len(self.plus.nodes)

    def locate(self, g: int) -> tuple[EnhancedTree, int]:
        return (self.plus, g) if g < self.offset else (self.minus, g - self.offset)

    def info(self, g: int):
        tree, local = self.locate(g)
        return tree.nodes[local]

    def sign(self, g: int) -> int:
        return self.info(g).sign

    def children(self, g: int) -> tuple:
        tree, local = self.locate(g)
        base = 0 if tree is self.plus else self.offset
        return tuple(c + base for c in tree.nodes[local].children)

    def parent(self, g: int) -> int | None:
        tree, local = self.locate(g)
        p = tree.nodes[local].parent
        if p is None:
            return None
        return p + (0 if tree is self.plus else self.offset)

    def position(self, g: int) -> int:
        return self.info(g).position

    @property
    def roots(self) -> tuple[int, int]:
        return (0, self.offset)

    @cached_property
    def all_nodes(self) -> tuple:
        return tuple(range(self.offset + len(self.minus.nodes)))

    @cached_property
    def leaves(self) -> tuple:
        return tuple(g for g in self.all_nodes if self.info(g).is_leaf)

    @cached_property
    def branching(self) -> tuple:
        return tuple(g for g in self.all_nodes if not self.info(g).is_leaf)

    @property
    def order(self) -> int:
        return self.plus.scale + self.minus.scale

    @cached_property
    def partner(self) -> dict:
        out = {}
        for a, b in self.pairing:
            out[a] = b
            out[b] = a
        return out

    def is_degenerate(self, g: int) -> bool:
        tree, local = self.locate(g)
        return tree.is_degenerate(local)

    def degenerate_roles(self, g: int) -> tuple[int, int, int]:
        """Global ``(distinguished, middle, partner)`` children of a degenerate node."""
        tree, local = self.locate(g)
        base = 0 if tree is self.plus else self.offset
        return tuple(c + base for c in tree.degenerate_roles(local))

    @cached_property
    def degenerate_nodes(self) -> tuple:
        return tuple(g for g in self.branching if self.is_degenerate(g))

    def leaves_under(self, g: int) -> tuple:
        tree, local = self.locate(g)
        base = 0 if tree is self.plus else self.offset
        return tuple(l + base for l in tree.leaves_under(local))

    def plain(self) -> "EnhancedCouple":
        return EnhancedCouple(self.plus.plain(), self.minus.plain(), self.pairing)

    # -- serialization ---------------------------------------------------------
    def to_json(self) -> dict:
        return {
            "order": self.order,
            "plus": self.plus.to_json(0),
            "minus": self.minus.to_json(self.offset),
            "pairing": [list(p) for p in self.pairing],
        }

    @classmethod
    def from_json(cls, data: dict) -> "EnhancedCouple":
        plus = EnhancedTree.from_json(data["plus"])
        minus = EnhancedTree.from_json(data["minus"])
        couple = cls(plus, minus, tuple(tuple(p) for p in data["pairing"]))
        if "order" in data and int(data["order"]) != couple.order:
            raise InvalidParameter("declared order does not match the trees")
        return couple

    def key(self) -> str:
        """Canonical serialization used for deterministic ordering."""
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))


def couple_zeta(couple: EnhancedCouple) -> complex:
    """Product of ``-i * sign`` over all branching nodes."""
    out = 1 + 0j
    for g in couple.branching:
        out *= -1j * couple.sign(g)
    return out


def is_enhanced(couple: EnhancedCouple) -> bool:
    """The leaves under the distinguished and middle children of each
    degenerate node must not be paired entirely among themselves."""
    for g in couple.degenerate_nodes:
        star, middle, _ = couple.degenerate_roles(g)
        group = set(couple.leaves_under(star)) | set(couple.leaves_under(middle))
        if all(couple.partner[l] in group for l in group):
            return False
    return True


def _pairings(plus: EnhancedTree, minus: EnhancedTree):
    offset = len(plus.nodes)
    leaves = [(l, s) for l, s in ((i, plus.nodes[i].sign) for i in plus.leaves)]
    leaves += [(l + offset, minus.nodes[l].sign) for l in minus.leaves]
    positive = [g for g, s in leaves if s == 1]
    negative = [g for g, s in leaves if s == -1]
    for perm in itertools.permutations(negative):
        yield tuple(zip(positive, perm))


def iter_couples(n: int, with_degeneracies: bool = True):
    """Generate all couples of order ``n`` passing the enhanced filter."""
    if n < 0:
        raise InvalidParameter("order must be non-negative")
    if n > MAX_COUPLE_ORDER:
        raise InvalidParameter(f"exhaustive couple enumeration is limited to order <= {MAX_COUPLE_ORDER}")
    for n_plus in range(n, -1, -1):
        for tp in enumerate_trees(n_plus, 1):
            for tm in enumerate_trees(n - n_plus, -1):
                plus_marks = list(degenerate_markings(tp)) if with_degeneracies else [tp]
                minus_marks = list(degenerate_markings(tm)) if with_degeneracies else [tm]
                for pairing in _pairings(tp, tm):
                    for mp in plus_marks:
                        for mm in minus_marks:
                            couple = EnhancedCouple(mp, mm, pairing)
                            if is_enhanced(couple):
                                yield couple


def enumerate_couples(n: int, with_degeneracies: bool = True) -> list[EnhancedCouple]:
    return list(iter_couples(n, with_degeneracies))


def trivial_couple() -> EnhancedCouple:
    return EnhancedCouple(EnhancedTree(None, 1), EnhancedTree(None, -1), ((0, 1),))
