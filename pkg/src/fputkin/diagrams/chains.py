"""Double bonds, chains, splicing and unit twists.

Two atoms joined by exactly two bonds form a double bond: CL when it is one
PC bond plus one LP bond, CN when both bonds are LP.  A double bond is
negative when its two bonds point in opposite directions.  Chains are paths
(or cycles) of consecutive double bonds; a chain is irregular when every
double bond is both CL and negative.

On the couple side a CL chain ``(n_0, ..., n_q)`` has ``n_{j+1}`` a child of
``n_j`` and a leaf child ``m_{j+1}`` of ``n_j`` paired with a leaf child
``p_{j+1}`` of ``n_{j+1}``.  Splicing removes ``n_1 .. n_q`` together with
the ``m_j, p_j`` leaves and hands the remaining children of ``n_q`` to
``n_0``.  A unit twist at ``n_2`` (parent ``n_1``) swaps ``n_2`` with the
paired leaf child ``n_12`` of ``n_1`` and swaps the two children of ``n_2``
other than its paired leaf child ``n_21``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import NotAdmissible
from .couples import EnhancedCouple
from .molecules import Molecule
from .trees import EnhancedTree


# -- molecule side -------------------------------------------------------------


@dataclass(frozen=True)
class DoubleBond:
    atoms: tuple  # (a, b) with a < b
    bonds: tuple  # two bond indices
    kind: str  # "CL" or "CN"
    negative: bool


@dataclass(frozen=True)
class Chain:
    atoms: tuple
    links: tuple  # DoubleBond per consecutive pair
    cyclic: bool
    hyperchain: bool
    pseudo_hyperchain: bool
    gaps: tuple | None  # per link; None when undecorated

    @property
    def length(self) -> int:
        return len(self.links)

    @property
    def cl(self) -> bool:
        return all(l.kind == "CL" for l in self.links)

    @property
    def negative(self) -> bool:
        return all(l.negative for l in self.links)

    @property
    def irregular(self) -> bool:
        return self.cl and self.negative

    @property
    def gap(self):
        return None if not self.gaps else self.gaps[0]


def double_bonds(mol: Molecule) -> list[DoubleBond]:
    groups: dict = {}
    for i, b in enumerate(mol.bonds):
        if b.tail != b.head:
            groups.setdefault(tuple(sorted((b.tail, b.head))), []).append(i)
    out = []
    for atoms, idx in sorted(groups.items()):
        if len(idx) != 2:
            continue
        b1, b2 = (mol.bonds[i] for i in idx)
        kinds = {b1.kind, b2.kind}
        if kinds == {"PC"}:
            continue  # cannot occur for couple molecules
        kind = "CL" if kinds == {"PC", "LP"} else "CN"
        out.append(DoubleBond(atoms, tuple(idx), kind, b1.tail != b2.tail))
    return out


def centered_residue(x: int, N: int) -> int:
    """Representative of ``x mod N`` in ``(-N/2, N/2]``."""
    r = x % N
    return r - N if r > N // 2 else r


def bond_gap(mol: Molecule, link: DoubleBond, start: int, N: int | None = None):
    """``k - l`` for a negative double bond read from atom ``start``.

    For CL bonds ``k`` is the PC label and ``l`` the LP label; for CN bonds
    ``k`` labels the bond leaving ``start``.  Same-direction double bonds
    have no gap.  With a grid size ``N`` the difference is reduced to its
    centered residue, so that wavenumbers are compared on the circle.
    """
    b1, b2 = (mol.bonds[i] for i in link.bonds)
    if b1.label is None or b2.label is None or not link.negative:
        return None
    if link.kind == "CL":
        pc, lp = (b1, b2) if b1.kind == "PC" else (b2, b1)
        gap = pc.label - lp.label
    else:
        out, back = (b1, b2) if b1.tail == start else (b2, b1)
        gap = out.label - back.label
    return gap if N is None else centered_residue(gap, N)


def _neighbors_by_single_bonds(mol: Molecule, atom: int, linked: set) -> set:
    return {b.other(atom) for i, b in enumerate(mol.bonds) if atom in (b.tail, b.head) and i not in linked}


def find_chains(mol: Molecule, N: int | None = None) -> list[Chain]:
    """All maximal chains (paths or cycles of double bonds), deterministic order.

    ``N`` (the grid size) reduces decorated gaps to centered residues.
    """
    links = double_bonds(mol)
    adj: dict = {}
    for l in links:
        a, b = l.atoms
        adj.setdefault(a, []).append((b, l))
        adj.setdefault(b, []).append((a, l))
    seen: set = set()
    chains = []
    starts = sorted(a for a in adj if len(adj[a]) == 1) + sorted(a for a in adj if len(adj[a]) != 1)
    for start in starts:
        if start in seen:
            continue
        cyclic = len(adj[start]) != 1
        atoms, path = [start], []
        seen.add(start)
        prev_link = None
        current = start
        while True:
            nxt = [(b, l) for b, l in sorted(adj[current], key=lambda x: x[0]) if l is not prev_link]
            nxt = [(b, l) for b, l in nxt if b not in seen or (cyclic and b == start and len(path) >= 1)]
            if not nxt:
                break
            b, l = nxt[0]
            path.append(l)
            if b == start:
                break
            atoms.append(b)
            seen.add(b)
            prev_link, current = l, b
        if not cyclic and atoms[0] > atoms[-1]:
            atoms, path = atoms[::-1], path[::-1]
        linked = {i for l in path for i in l.bonds}
        ends = (atoms[0], atoms[-1])
        hyper = pseudo = False
        if not cyclic and ends[0] != ends[1]:
            hyper = any({b.tail, b.head} == set(ends) for i, b in enumerate(mol.bonds) if i not in linked)
            common = _neighbors_by_single_bonds(mol, ends[0], linked) & _neighbors_by_single_bonds(mol, ends[1], linked)
            pseudo = bool(common - set(atoms))
        gaps = tuple(bond_gap(mol, l, a, N) for l, a in zip(path, atoms))
        chains.append(Chain(tuple(atoms), tuple(path), cyclic, hyper, pseudo, None if any(g is None for g in gaps) else gaps))
    return chains


# -- couple side -----------------------------------------------------------------


@dataclass(frozen=True)
class CoupleChain:
    nodes: tuple  # (n_0, ..., n_q)
    m_leaves: tuple  # m_1 .. m_q (leaf children of n_0 .. n_{q-1})
    p_leaves: tuple  # p_1 .. p_q (leaf children of n_1 .. n_q)
    irregular: bool

    @property
    def length(self) -> int:
        return len(self.nodes) - 1


def _bond_count(couple: EnhancedCouple, a: int, b: int) -> int:
    """Number of molecule bonds between the atoms of branching nodes ``a`` and ``b``."""
    count = int(couple.parent(b) == a) + int(couple.parent(a) == b)
    for x, y in couple.pairing:
        px, py = couple.parent(x), couple.parent(y)
        if px is not None and py is not None and {px, py} == {a, b} and a != b:
            count += 1
    return count


def cl_link(couple: EnhancedCouple, parent: int, child: int):
    """``(m, p)`` if parent and child form a CL double bond, else None."""
    if couple.parent(child) != parent or not couple.children(child):
        return None
    links = []
    for m in couple.children(parent):
        if m == child or couple.children(m):
            continue
        p = couple.partner[m]
        if couple.parent(p) == child:
            links.append((m, p))
    if len(links) != 1 or _bond_count(couple, parent, child) != 2:
        return None
    return links[0]


def cl_chains(couple: EnhancedCouple, min_length: int = 1) -> list[CoupleChain]:
    """Maximal CL chains of a couple, ordered by their top node."""
    down: dict = {}
    for g in couple.branching:
        for c in couple.children(g):
            link = cl_link(couple, g, c)
            if link is not None:
                down[g] = (c, link)
    has_up = {c for c, _ in down.values()}
    out = []
    for top in sorted(down):
        if top in has_up:
            continue
        nodes, ms, ps = [top], [], []
        g = top
        while g in down:
            c, (m, p) = down[g]
            nodes.append(c)
            ms.append(m)
            ps.append(p)
            g = c
        irregular = all(couple.sign(n) != couple.sign(m) for n, m in zip(nodes[1:], ms))
        if len(nodes) - 1 >= min_length:
            out.append(CoupleChain(tuple(nodes), tuple(ms), tuple(ps), irregular))
    return out


def sub_chain(couple: EnhancedCouple, nodes) -> CoupleChain:
    """Validate an explicit node sequence as a CL chain."""
    nodes = tuple(nodes)
    if len(nodes) < 2:
        raise NotAdmissible("a chain needs at least two nodes")
    ms, ps = [], []
    for a, b in zip(nodes, nodes[1:]):
        link = cl_link(couple, a, b)
        if link is None:
            raise NotAdmissible(f"nodes {a} and {b} are not joined by a CL double bond")
        ms.append(link[0])
        ps.append(link[1])
    irregular = all(couple.sign(n) != couple.sign(m) for n, m in zip(nodes[1:], ms))
    return CoupleChain(nodes, tuple(ms), tuple(ps), irregular)


def _rebuild(couple: EnhancedCouple, children_override: dict):
    """New couple from overridden child lists; returns it with the old-to-new index map."""
    def kids(g):
        return children_override.get(g, couple.children(g))

    trees, order = [], []
    for root, sign in zip(couple.roots, (1, -1)):
        visited = []

        def shape(g):
            visited.append(g)
            ks = kids(g)
            return None if not ks else tuple(shape(c) for c in ks)

        sh = shape(root)
        trees.append((sh, sign, visited))
    plus_shape, _, plus_nodes = trees[0]
    minus_shape, _, minus_nodes = trees[1]
    index = {g: i for i, g in enumerate(plus_nodes)}
    index.update({g: i + len(plus_nodes) for i, g in enumerate(minus_nodes)})

    def marks(nodes, base):
        out = []
        for g in nodes:
            if couple.children(g) and couple.is_degenerate(g):
                tree, local = couple.locate(g)
                out.append((index[g] - base, tree.degenerate_map[local]))
        return tuple(out)

    plus = EnhancedTree(plus_shape, 1, marks(plus_nodes, 0))
    minus = EnhancedTree(minus_shape, -1, marks(minus_nodes, len(plus_nodes)))
    pairs = []
    offset = len(plus.nodes)
    for a, b in couple.pairing:
        if a not in index or b not in index:
            continue
        na, nb = index[a], index[b]
        sa = plus.nodes[na].sign if na < offset else minus.nodes[na - offset].sign
        pairs.append((na, nb) if sa == 1 else (nb, na))
    try:
        new = EnhancedCouple(plus, minus, tuple(pairs))
    except Exception as exc:  # sign or coverage failure
        raise NotAdmissible(f"transformation breaks the couple structure: {exc}") from exc
    return new, index


def splice(couple: EnhancedCouple, chain: CoupleChain | tuple, labels=None):
    """Remove ``n_1 .. n_q`` and their paired leaves; returns ``(couple, labels, index)``.

    The children of ``n_0`` become its remaining child ``n_0^1`` (kept in
    place) and the two remaining children of ``n_q``: the one whose sign is
    opposite to ``n_0`` takes the middle slot and the other takes the free
    outer slot.  If that is impossible the chain is not admissible.
    """
    if not isinstance(chain, CoupleChain):
        chain = sub_chain(couple, chain)
    nodes = chain.nodes
    for g in nodes:
        if couple.is_degenerate(g):
            raise NotAdmissible("splicing requires non-degenerate chain nodes")
    n0, nq = nodes[0], nodes[-1]
    sigma = couple.sign(n0)
    kept = [c for c in couple.children(n0) if c not in (nodes[1], chain.m_leaves[0])]
    (first,) = kept
    rest = [c for c in couple.children(nq) if c != chain.p_leaves[-1]]
    first_pos = couple.position(first)
    slots: dict = {first_pos: first}
    opposite = [c for c in rest if couple.sign(c) != sigma]
    same = [c for c in rest if couple.sign(c) == sigma]
    if first_pos == 2:
        if len(same) != 2:
            raise NotAdmissible("remaining children carry inconsistent signs")
        slots[1], slots[3] = same
    else:
        if len(opposite) != 1 or len(same) != 1:
            raise NotAdmissible("remaining children carry inconsistent signs")
        slots[2] = opposite[0]
        slots[4 - first_pos] = same[0]
    new, index = _rebuild(couple, {n0: (slots[1], slots[2], slots[3])})
    for g, i in index.items():
        if new.sign(i) != couple.sign(g):
            raise NotAdmissible("splicing would change a sign")
    new_labels = None
    if labels is not None:
        labels = np.asarray(labels)
        new_labels = np.zeros(len(new.all_nodes), dtype=labels.dtype)
        for g, i in index.items():
            new_labels[i] = labels[g]
    return new, new_labels, index


def twist_partners(couple: EnhancedCouple, node: int):
    """``(parent, n12, n21)`` when ``node`` is twist-admissible, else None."""
    parent = couple.parent(node)
    if parent is None:
        return None
    link = cl_link(couple, parent, node)
    if link is None:
        return None
    n12, n21 = link
    if couple.sign(node) == couple.sign(n12):
        return None  # the double bond is not negative
    return parent, n12, n21


def is_twist_admissible(couple: EnhancedCouple, node: int) -> bool:
    return twist_partners(couple, node) is not None and not couple.is_degenerate(node) and not couple.is_degenerate(couple.parent(node))


def unit_twist(couple: EnhancedCouple, node: int, labels=None):
    """Unit twist at ``node``; returns ``(couple, labels, index)``.

    The new labels follow the twist rule: the twisted node takes the label
    of the paired leaves and the paired leaves take the old node label.
    """
    found = twist_partners(couple, node)
    if found is None:
        raise NotAdmissible(f"node {node} is not twist-admissible")
    parent, n12, n21 = found
    if couple.is_degenerate(node) or couple.is_degenerate(parent):
        raise NotAdmissible("unit twists are defined for non-degenerate nodes")
    swapped_parent = tuple(n12 if c == node else node if c == n12 else c for c in couple.children(parent))
    kids = couple.children(node)
    others = [c for c in kids if c != n21]
    swapped_node = tuple(others[1] if c == others[0] else others[0] if c == others[1] else c for c in kids)
    new, index = _rebuild(couple, {parent: swapped_parent, node: swapped_node})
    new_labels = None
    if labels is not None:
        labels = np.asarray(labels)
        new_labels = np.zeros(len(new.all_nodes), dtype=labels.dtype)
        for g, i in index.items():
            new_labels[i] = labels[g]
        new_labels[index[node]] = labels[n12]
        new_labels[index[n12]] = labels[node]
        new_labels[index[n21]] = labels[node]
    return new, new_labels, index
