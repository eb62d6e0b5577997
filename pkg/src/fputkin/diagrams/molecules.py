"""Molecules: directed multigraphs built from couples.

Atoms are the branching nodes of a couple.  A parent-child (PC) bond joins a
branching node to a branching child; a leaf-pair (LP) bond joins the parents
of two paired leaves.  A pair involving the root of a trivial tree produces
no bond.  Directions: an LP bond points from the atom of the ``-`` leaf to
the atom of the ``+`` leaf; a PC bond points parent to child when the child
has sign ``-`` and child to parent otherwise.

Each bond end ``(atom, bond)`` carries a code giving the position of the
associated node ``m(atom, bond)`` inside the atom's family: 0 when it is
the atom's own node (the child end of a PC bond), and 1, 2, 3 for the
first, second, third child otherwise.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace

from ..errors import InvalidParameter, StructuralError
from .couples import EnhancedCouple
from .trees import EnhancedTree


@dataclass(frozen=True)
class Bond:
    tail: int
    head: int
    kind: str  # "PC" or "LP"
    tail_code: int
    head_code: int
    tail_node: int | None = None  # couple node m(tail, bond)
    head_node: int | None = None  # couple node m(head, bond)
    label: int | None = None  # decoration (grid label)

    def other(self, atom: int) -> int:
        return self.head if atom == self.tail else self.tail

    def sign_at(self, atom: int) -> int:
        """+1 if outgoing from ``atom``, -1 if incoming (self-loops count once each way)."""
        return 1 if atom == self.tail else -1


@dataclass
class Molecule:
    atoms: list
    bonds: list
    atom_node: dict = field(default_factory=dict)  # atom -> couple node
    degenerate_atoms: set = field(default_factory=set)
    meta: dict = field(default_factory=dict)

    # -- degrees ----------------------------------------------------------------
    def incident(self, atom: int) -> list:
        return [(i, b) for i, b in enumerate(self.bonds) if atom in (b.tail, b.head)]

    def degree(self, atom: int) -> int:
        return sum((b.tail == atom) + (b.head == atom) for b in self.bonds)

    def out_degree(self, atom: int) -> int:
        return sum(b.tail == atom for b in self.bonds)

    def in_degree(self, atom: int) -> int:
        return sum(b.head == atom for b in self.bonds)

    def components(self) -> list[set]:
        adj = {a: set() for a in self.atoms}
        for b in self.bonds:
            adj[b.tail].add(b.head)
            adj[b.head].add(b.tail)
        seen, comps = set(), []
        for a in self.atoms:
            if a in seen:
                continue
            stack, comp = [a], set()
            while stack:
                v = stack.pop()
                if v in comp:
                    continue
                comp.add(v)
                stack.extend(adj[v] - comp)
            seen |= comp
            comps.append(comp)
        return comps

    @property
    def chi(self) -> int:
        """``E - V + F``."""
        return len(self.bonds) - len(self.atoms) + len(self.components())

    def copy(self) -> "Molecule":
        return Molecule(list(self.atoms), list(self.bonds), dict(self.atom_node), set(self.degenerate_atoms), dict(self.meta))

    # -- decorations ------------------------------------------------------------
    def is_degenerate_atom(self, atom: int) -> bool:
        """Two bonds of opposite direction at ``atom`` with equal decoration."""
        ends = []
        for b in self.bonds:
            if b.tail == atom:
                ends.append((1, b.label))
            if b.head == atom:
                ends.append((-1, b.label))
        for (s1, k1), (s2, k2) in itertools.combinations(ends, 2):
            if s1 != s2 and k1 is not None and k1 == k2:
                return True
        return False

    def is_fully_degenerate(self, atom: int) -> bool:
        labels = {b.label for _, b in self.incident(atom)}
        return len(labels) == 1 and None not in labels

    def to_dot(self, name: str = "molecule") -> str:
        lines = [f"digraph {name} {{"]
        for a in self.atoms:
            shape = "diamond" if a in self.degenerate_atoms else "circle"
            lines.append(f'  a{a} [label="{a}", shape={shape}];')
        for b in self.bonds:
            text = b.kind if b.label is None else f"{b.kind} {b.label}"
            lines.append(f'  a{b.tail} -> a{b.head} [label="{text}", taillabel="{b.tail_code}", headlabel="{b.head_code}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def molecule_from_couple(couple: EnhancedCouple, labels=None, validate: bool = True) -> Molecule:
    """Build the labeled directed molecule of a nontrivial couple.

    ``labels`` (one integer per couple node) decorates every bond with the
    label of its associated node.
    """
    if couple.order == 0:
        raise InvalidParameter("the trivial couple has no molecule")
    atoms = list(couple.branching)
    bonds = []

    def lab(node):
        return None if labels is None else int(labels[node])

    for g in couple.branching:
        parent = couple.parent(g)
        if parent is not None:
            pos = couple.position(g)
            # codes: 0 at the child atom (its own node), position at the parent atom
            if couple.sign(g) == -1:
                bonds.append(Bond(parent, g, "PC", pos, 0, g, g, lab(g)))
            else:
                bonds.append(Bond(g, parent, "PC", 0, pos, g, g, lab(g)))
    for plus_leaf, minus_leaf in couple.pairing:
        p_parent, m_parent = couple.parent(plus_leaf), couple.parent(minus_leaf)
        if p_parent is None or m_parent is None:
            continue  # a trivial-tree root is involved
        bonds.append(
            Bond(
                m_parent,
                p_parent,
                "LP",
                couple.position(minus_leaf),
                couple.position(plus_leaf),
                minus_leaf,
                plus_leaf,
                lab(plus_leaf),
            )
        )
    meta = {"order": couple.order, "roles": {g: couple.degenerate_roles(g) for g in couple.degenerate_nodes}}
    mol = Molecule(atoms, bonds, {a: a for a in atoms}, set(couple.degenerate_nodes), meta)
    if validate:
        validate_molecule(mol, couple.order)
    return mol


def validate_molecule(mol: Molecule, order: int | None = None) -> None:
    """Raise :class:`StructuralError` unless the couple-molecule profile holds."""
    n = len(mol.atoms) if order is None else order
    if len(mol.atoms) != n:
        raise StructuralError(f"expected {n} atoms, found {len(mol.atoms)}")
    if len(mol.bonds) != 2 * n - 1:
        raise StructuralError(f"expected {2 * n - 1} bonds, found {len(mol.bonds)}")
    if len(mol.components()) != 1:
        raise StructuralError("molecule is not connected")
    for a in mol.atoms:
        if mol.out_degree(a) > 2 or mol.in_degree(a) > 2:
            raise StructuralError(f"atom {a} exceeds in/out degree 2")
    degrees = sorted(mol.degree(a) for a in mol.atoms)
    low = [d for d in degrees if d != 4]
    if low not in ([3, 3], [2]):
        raise StructuralError(f"degree profile {degrees} is not (3, 3, 4, ...) or (2, 4, ...)")


# -- reconstruction from codes ------------------------------------------------------


def _code_assignments(mol: Molecule):
    """Code choices ``{(bond, end): code}`` with one child end per PC bond.

    Every PC bond has exactly one end coded 0 (the child atom), each atom has
    at most one such end, and the remaining ends of an atom receive distinct
    codes from ``{1, 2, 3}``.
    """
    pc = [i for i, b in enumerate(mol.bonds) if b.kind == "PC"]
    ends_of = {a: [] for a in mol.atoms}
    for i, b in enumerate(mol.bonds):
        ends_of[b.tail].append((i, 0))
        ends_of[b.head].append((i, 1))
    for orient in itertools.product((0, 1), repeat=len(pc)):
        zero = {(i, e) for i, e in zip(pc, orient)}
        per_atom = []
        for a in mol.atoms:
            own = [end for end in ends_of[a] if end in zero]
            rest = [end for end in ends_of[a] if end not in zero]
            if len(own) > 1 or len(rest) > 3:
                per_atom = None
                break
            per_atom.append([dict(zip(rest, codes)) for codes in itertools.permutations((1, 2, 3), len(rest))])
        if per_atom is None:
            continue
        for combo in itertools.product(*per_atom):
            merged = dict.fromkeys(zero, 0)
            for part in combo:
                merged.update(part)
            yield merged


def _shape_of(atom, child_atom, filled):
    kids = []
    for pos in (1, 2, 3):
        c = child_atom.get((atom, pos))
        kids.append(None if c is None else _shape_of(c, child_atom, filled))
    return tuple(kids)


def couples_from_codes(mol: Molecule, codes: dict) -> list[EnhancedCouple]:
    """Couples consistent with a molecule and one code assignment (possibly none)."""
    child_atom: dict = {}
    parent_of: dict = {}
    leaf_pairs = []
    for i, b in enumerate(mol.bonds):
        ct, ch = codes[(i, 0)], codes[(i, 1)]
        if b.kind == "PC":
            if (ct == 0) == (ch == 0):
                return []
            child, parent, pos = (b.tail, b.head, ch) if ct == 0 else (b.head, b.tail, ct)
            if (parent, pos) in child_atom or child in parent_of:
                return []
            child_atom[(parent, pos)] = child
            parent_of[child] = parent
        else:
            if ct == 0 or ch == 0:
                return []
            leaf_pairs.append(((b.tail, ct), (b.head, ch)))
    roots = [a for a in mol.atoms if a not in parent_of]
    if len(roots) not in (1, 2):
        return []
    leaf_slots = {(a, pos) for a in mol.atoms for pos in (1, 2, 3)} - set(child_atom)
    used = [s for pair in leaf_pairs for s in pair]
    if len(set(used)) != len(used):
        return []
    free_slots = leaf_slots - set(used)
    if len(roots) == 2 and free_slots:
        return []
    if len(roots) == 1 and len(free_slots) != 1:
        return []
    # acyclicity: every atom reaches a root
    for a in mol.atoms:
        seen = set()
        v = a
        while v in parent_of:
            if v in seen:
                return []
            seen.add(v)
            v = parent_of[v]
    out = []
    root_orders = [tuple(roots)] if len(roots) == 1 else [tuple(roots), tuple(reversed(roots))]
    for order in root_orders:
        for trivial_sign in ((1, -1) if len(roots) == 1 else (None,)):
            if not _directions_match(mol, order, trivial_sign, parent_of, child_atom, codes, free_slots):
                continue
            couple = _assemble(mol, order, trivial_sign, child_atom, leaf_pairs, free_slots)
            if couple is not None:
                out.append(couple)
    return out


def _directions_match(mol, roots, trivial_sign, parent_of, child_atom, codes, free_slots) -> bool:
    """Cheap sign/direction test before a candidate couple is assembled."""
    if len(roots) == 2:
        root_sign = {roots[0]: 1, roots[1]: -1}
    else:
        root_sign = {roots[0]: -trivial_sign}
    position = {child: pos for (parent, pos), child in child_atom.items()}
    sign: dict = {}

    def atom_sign(a):
        if a not in sign:
            sign[a] = root_sign[a] if a not in parent_of else atom_sign(parent_of[a]) * (-1 if position[a] == 2 else 1)
        return sign[a]

    def slot_sign(a, pos):
        return atom_sign(a) * (-1 if pos == 2 else 1)

    for i, b in enumerate(mol.bonds):
        if b.kind == "PC":
            child = b.tail if codes[(i, 0)] == 0 else b.head
            parent = b.other(child)
            expected_tail = parent if atom_sign(child) == -1 else child
            if b.tail != expected_tail:
                return False
        else:
            if slot_sign(b.tail, codes[(i, 0)]) != -1 or slot_sign(b.head, codes[(i, 1)]) != 1:
                return False
    for a, pos in free_slots:
        if slot_sign(a, pos) != -trivial_sign:
            return False
    return True


def _assemble(mol, roots, trivial_sign, child_atom, leaf_pairs, free_slots):
    if len(roots) == 2:
        plus_root, minus_root = roots
    elif trivial_sign == 1:
        plus_root, minus_root = None, roots[0]
    else:
        plus_root, minus_root = roots[0], None
    plus_shape = None if plus_root is None else _shape_of(plus_root, child_atom, None)
    minus_shape = None if minus_root is None else _shape_of(minus_root, child_atom, None)
    plus, minus = EnhancedTree(plus_shape, 1), EnhancedTree(minus_shape, -1)
    offset = len(plus.nodes)
    # map (atom, pos) and atoms to global node indices
    index: dict = {}
    for root, tree, base in ((plus_root, plus, 0), (minus_root, minus, offset)):
        if root is None:
            continue

        def walk(atom, local):
            index[atom] = base + local
            kids = tree.nodes[local].children
            for pos, child_local in zip((1, 2, 3), kids):
                index[(atom, pos)] = base + child_local
                c = child_atom.get((atom, pos))
                if c is not None:
                    walk(c, child_local)

        walk(root, 0)
    pairs = []
    for s1, s2 in leaf_pairs:
        pairs.append((index[s1], index[s2]))
    if free_slots:
        (slot,) = free_slots
        pairs.append((index[slot], 0 if plus_root is None else offset))
    signed = []
    for a, b in pairs:
        sa = (plus.nodes[a].sign if a < offset else minus.nodes[a - offset].sign)
        sb = (plus.nodes[b].sign if b < offset else minus.nodes[b - offset].sign)
        if sa == sb:
            return None
        signed.append((a, b) if sa == 1 else (b, a))
    try:
        couple = EnhancedCouple(plus, minus, tuple(signed))
    except InvalidParameter:
        return None
    # directions must reproduce the molecule under the atom relabelling
    rebuilt = molecule_from_couple(couple, validate=False)
    inverse = {index[a]: a for a in mol.atoms}
    want = sorted((b.tail, b.head, b.kind) for b in mol.bonds)
    got = sorted((inverse[b.tail], inverse[b.head], b.kind) for b in rebuilt.bonds)
    return couple if want == got else None


def reconstruct_couples(mol: Molecule) -> list[EnhancedCouple]:
    """All plain couples whose molecule equals ``mol`` as a directed labeled graph."""
    seen, out = set(), []
    for codes in _code_assignments(mol):
        for couple in couples_from_codes(mol, codes):
            key = couple.key()
            if key not in seen:
                seen.add(key)
                out.append(couple)
    return out


def decorate(mol: Molecule, labels) -> Molecule:
    """Copy of ``mol`` with every bond labelled by its associated couple node."""
    bonds = [replace(b, label=int(labels[b.head_node])) for b in mol.bonds]
    out = mol.copy()
    out.bonds = bonds
    return out
