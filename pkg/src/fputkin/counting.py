"""Exhaustive lattice-point counts for quasi-resonant sets.

Two families are scanned on the interior grid ``{j/N}``:

* three-vector sets ``x - y + z = k`` with
  ``|sin(pi x) - sin(pi y) + sin(pi z) - |sin(pi k)| - m| <= 1/T``, weighted by
  ``|sin(pi x) sin(pi y) sin(pi z)|``;
* two-vector sets ``x +- y = k`` with ``|sin(pi x) +- sin(pi y) - m| <= 1/T``,
  weighted by ``|sin(pi x) sin(pi (k - x))|``.

All membership tests use integer labels, and sine values come from a table
that is exactly symmetric under ``j -> N - j`` so reflected sets carry
bit-identical weights.  Weighted sums use ``math.fsum``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import InvalidParameter

Sign = Literal["plus", "minus"]
REPORT_COLUMNS = ["N", "T", "k", "m", "set", "raw_count", "weighted_sum", "bound_value", "ratio"]


@dataclass(frozen=True)
class CountingQuery:
    N: int
    T: float
    k: float
    m: float = 0.0
    sign: Sign = "plus"
    epsilon: float = 0.05

    def __post_init__(self) -> None:
        if self.N < 2:
            raise InvalidParameter("N must be at least 2")
        if not 1.0 < self.T <= self.N ** (1.0 - self.epsilon) * (1 + 1e-12):
            raise InvalidParameter(f"T={self.T} outside (1, N^(1-eps)]")
        label = self.k * self.N
        if not -self.N < round(label) < 2 * self.N:
            raise InvalidParameter("k must lie in (-1, 2)")
        if self.sign not in ("plus", "minus"):
            raise InvalidParameter(f"unknown sign {self.sign!r}")

    @property
    def k_label(self) -> int:
        """Nearest grid label; off-grid ``k`` is snapped to ``round(k N) / N``."""
        return int(round(self.k * self.N))

    @property
    def k_grid(self) -> float:
        return self.k_label / self.N


@dataclass(frozen=True)
class CountingReport:
    query: CountingQuery
    set_name: str
    raw_count: int
    weighted_sum: float
    bound_value: float

    @property
    def ratio(self) -> float:
        return self.weighted_sum / self.bound_value

    def row(self) -> list:
        q = self.query
        return [q.N, q.T, q.k, q.m, self.set_name, self.raw_count, self.weighted_sum, self.bound_value, self.ratio]


def sine_table(N: int) -> np.ndarray:
    """``|sin(pi j / N)|`` for ``j = 0..N-1``, exactly symmetric in ``j -> N - j``."""
    j = np.arange(N)
    return np.sin(np.pi * np.minimum(j, N - j) / N)


def _three_vector_parts(N: int, k_label: int):
    sines = sine_table(N)
    labels = np.arange(1, N)
    X, Y = np.meshgrid(labels, labels, indexing="ij")
    Z = (k_label - X + Y) % N
    valid = Z != 0
    sx, sy, sz = sines[X], sines[Y], sines[Z]
    # group as (sx + sz) - sy so that reflection x <-> N-x, y <-> N-y, z <-> N-z is exact
    combo = (sx + sz) - sy - sines[k_label % N]
    weight = (sx * sz) * sy
    return combo[valid], weight[valid]


def count_three_vector(q: CountingQuery) -> CountingReport:
    combo, weight = _three_vector_parts(q.N, q.k_label)
    inside = np.abs(combo - q.m) <= 1.0 / q.T
    bound = q.N**2 / q.T * math.log(q.T)
    return CountingReport(q, "S3", int(np.count_nonzero(inside)), math.fsum(weight[inside]), bound)


def _two_vector_parts(N: int, k_label: int, sign: Sign):
    sines = sine_table(N)
    x = np.arange(1, N)
    y = k_label - x if sign == "plus" else x - k_label
    valid = (y > 0) & (y < N)
    x, y = x[valid], y[valid]
    combo = sines[x] + sines[y] if sign == "plus" else sines[x] - sines[y]
    # |sin(pi (k - x))| equals |sin(pi y)| in both cases
    weight = sines[x] * sines[np.abs(k_label - x) % N]
    return combo, weight


def two_vector_bound(q: CountingQuery) -> float:
    if q.sign == "plus" or abs(q.k_grid) >= q.T ** (-0.5):
        return q.N * q.T ** (-0.5)
    return float(q.N)


def count_two_vector(q: CountingQuery) -> CountingReport:
    combo, weight = _two_vector_parts(q.N, q.k_label, q.sign)
    inside = np.abs(combo - q.m) <= 1.0 / q.T
    name = "S2+" if q.sign == "plus" else "S2-"
    return CountingReport(q, name, int(np.count_nonzero(inside)), math.fsum(weight[inside]), two_vector_bound(q))


def default_k_grid(N: int, cells: int = 32) -> list[float]:
    """``cells`` grid wavenumbers spread over ``(-1, 2)`` avoiding 0 and 1."""
    targets = np.linspace(-1.0, 2.0, cells + 2)[1:-1]
    labels = []
    for t in targets:
        j = int(round(t * N))
        if j % N == 0:
            j += 1
        labels.append(j)
    return [j / N for j in labels]


def default_m_grid(cells: int = 21) -> list[float]:
    return list(np.linspace(-5.0, 5.0, cells))


@dataclass
class ScanRow:
    N: int
    T: float
    set_name: str
    max_ratio: float
    argmax_k: float
    argmax_m: float
    reports: list


def bound_ratio_scan(N_list=(64, 128, 256), T_exponents=(0.5, 0.8), k_cells=32, m_grid=None, sets=("S3", "S2+", "S2-"), T_values=None):
    """Maximum ratio ``weighted_sum / bound_value`` per ``(N, T, set)``.

    ``T_values`` (a mapping ``N -> list of T``) overrides ``T = N^exponent``.
    """
    m_grid = default_m_grid() if m_grid is None else list(m_grid)
    rows: list[ScanRow] = []
    for N in N_list:
        Ts = T_values[N] if T_values is not None else [float(N) ** e for e in T_exponents]
        ks = default_k_grid(N, k_cells)
        for T in Ts:
            for name in sets:
                best = (-np.inf, None, None)
                reports = []
                for k in ks:
                    if name == "S3":
                        combo, weight = _three_vector_parts(N, int(round(k * N)))
                    else:
                        sign = "plus" if name == "S2+" else "minus"
                        combo, weight = _two_vector_parts(N, int(round(k * N)), sign)
                    for m in m_grid:
                        q = CountingQuery(N, T, k, m, "plus" if name != "S2-" else "minus")
                        inside = np.abs(combo - m) <= 1.0 / T
                        bound = N**2 / T * math.log(T) if name == "S3" else two_vector_bound(q)
                        rep = CountingReport(q, name, int(np.count_nonzero(inside)), math.fsum(weight[inside]), bound)
                        reports.append(rep)
                        if rep.ratio > best[0]:
                            best = (rep.ratio, k, m)
                rows.append(ScanRow(N, T, name, best[0], best[1], best[2], reports))
    return rows


def write_report_csv(reports, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(REPORT_COLUMNS)
        for rep in reports:
            w.writerow([f"{v:.17g}" if isinstance(v, float) else v for v in rep.row()])
