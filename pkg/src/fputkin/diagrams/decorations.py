"""Enumeration of k-decorations of a couple on the grid ``{j/N}``.

Node wavenumbers are integer labels in ``1..N-1`` (the wavenumber is
``label / N``).  The constraints are linear modulo ``N``:

* both roots carry the label of ``k``;
* paired leaves carry equal labels;
* a plain branching node satisfies ``k = k1 - k2 + k3`` with ``k1 != k2``
  and ``k3 != k2``;
* a degenerate node satisfies ``k_middle = k_distinguished`` and
  ``k = k_partner``.

The system is reduced by Gauss-Jordan elimination with unit pivots and the
free labels are enumerated exhaustively.
"""

from __future__ import annotations

import itertools

import numpy as np

from ..errors import InvalidParameter
from .couples import EnhancedCouple

MAX_DECORATION_GRID = 16


def _constraint_rows(couple: EnhancedCouple, k_label: int):
    V = len(couple.all_nodes)
    rows = []

    def row(coeffs, rhs=0):
        r = np.zeros(V + 1, dtype=np.int64)
        for var, c in coeffs:
            r[var] += c
        r[V] = rhs
        rows.append(r)

    for root in couple.roots:
        row([(root, 1)], k_label)
    for a, b in couple.pairing:
        row([(a, 1), (b, -1)])
    for g in couple.branching:
        c1, c2, c3 = couple.children(g)
        if couple.is_degenerate(g):
            star, middle, partner = couple.degenerate_roles(g)
            row([(middle, 1), (star, -1)])
            row([(g, 1), (partner, -1)])
        else:
            row([(g, 1), (c1, -1), (c2, 1), (c3, -1)])
    return np.array(rows), V


def _eliminate(rows: np.ndarray, V: int, N: int):
    """Reduced rows modulo ``N`` with unit pivots, plus leftover check rows."""
    A = rows % N
    pivots: list[tuple[int, int]] = []
    leftover = []
    for i in range(A.shape[0]):
        current = A[i] % N
        for prow, pcol in pivots:
            if current[pcol]:
                current = (current - current[pcol] * A[prow]) % N
        units = [c for c in range(V) if current[c] in (1, N - 1)]
        if not units:
            if np.any(current[:V]):
                leftover.append(current)
            elif current[V] % N:
                return None, None, None  # inconsistent system
            continue
        col = units[0]
        if current[col] == N - 1:
            current = (-current) % N
        A[i] = current
        for prow, _ in pivots:
            if A[prow][col]:
                A[prow] = (A[prow] - A[prow][col] * current) % N
        pivots.append((i, col))
    # re-reduce leftover rows against the final pivots
    checks = []
    for row in leftover:
        for prow, pcol in pivots:
            if row[pcol]:
                row = (row - row[pcol] * A[prow]) % N
        checks.append(row)
    return A, pivots, checks


def couple_decorations(couple: EnhancedCouple, k_label: int, N: int) -> np.ndarray:
    """All k-decorations as an integer array of shape ``(D, nodes)``."""
    if N > MAX_DECORATION_GRID:
        raise InvalidParameter(f"exhaustive decoration sums are limited to N <= {MAX_DECORATION_GRID}")
    if not 0 < k_label < N:
        raise InvalidParameter("k label must lie in 1..N-1")
    rows, V = _constraint_rows(couple, k_label)
    A, pivots, checks = _eliminate(rows, V, N)
    if A is None:
        return np.zeros((0, V), dtype=np.int64)
    pivot_cols = [c for _, c in pivots]
    free = [c for c in range(V) if c not in set(pivot_cols)]
    if free:
        grid = np.array(list(itertools.product(range(1, N), repeat=len(free))), dtype=np.int64)
    else:
        grid = np.zeros((1, 0), dtype=np.int64)
    labels = np.zeros((grid.shape[0], V), dtype=np.int64)
    labels[:, free] = grid
    for prow, pcol in pivots:
        coeffs = A[prow][:V].copy()
        coeffs[pcol] = 0
        labels[:, pcol] = (A[prow][V] - labels @ coeffs) % N
    keep = np.all(labels != 0, axis=1)
    for row in checks:
        keep &= ((labels @ row[:V]) - row[V]) % N == 0
    for g in couple.branching:
        if not couple.is_degenerate(g):
            c1, c2, c3 = couple.children(g)
            keep &= (labels[:, c1] != labels[:, c2]) & (labels[:, c3] != labels[:, c2])
    return labels[keep]


def is_valid_decoration(couple: EnhancedCouple, labels, k_label: int, N: int) -> bool:
    """Direct check of every decoration constraint (used as an oracle)."""
    x = [int(v) for v in labels]
    if any(not 0 < v < N for v in x):
        return False
    if x[couple.roots[0]] != k_label or x[couple.roots[1]] != k_label:
        return False
    if any(x[a] != x[b] for a, b in couple.pairing):
        return False
    for g in couple.branching:
        c1, c2, c3 = couple.children(g)
        if (x[g] - x[c1] + x[c2] - x[c3]) % N:
            return False
        if couple.is_degenerate(g):
            star, middle, partner = couple.degenerate_roles(g)
            if x[middle] != x[star] or x[g] != x[partner]:
                return False
        elif x[c1] == x[c2] or x[c3] == x[c2]:
            return False
    return True
