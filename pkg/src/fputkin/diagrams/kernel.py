"""Couple kernels: decorated sums of nested oscillatory time integrals.

For a couple ``Q`` of order ``n`` and wavenumber ``k``::

    K_Q(t, s, k) = P^n zeta(Q) sum_E eps_E A_plus(t) A_minus(s) prod_{+ leaves} n_in

with ``P = beta T / N``.  ``A_plus`` is the nested integral over the plus
tree (every node time below ``t`` and below its parent's time) of
``exp(i sign_n W_n phase(t_n))`` with ``phase(s) = T s + A(s)``;
``A_minus`` is the same over the minus tree with upper limit ``s``.  The
nested integrals are evaluated innermost first on a Chebyshev-Lobatto grid
using a spectral antiderivative matrix; the grid is doubled until two
successive estimates agree.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cache

import numpy as np
from numpy.polynomial import chebyshev

from ..errors import InvalidParameter
from ..model import SimParams, dispersion, interaction_coeff_int, spectrum_on_grid
from ..renormalization import FrequencyShift, zero_shift
from .couples import EnhancedCouple, couple_zeta
from .decorations import couple_decorations

SIGN_RULES = ("none", "eq_eps")


class QuadratureWarning(UserWarning):
    """Raised (as a warning) when a time integral misses its tolerance."""


@cache
def _unit_antiderivative(points: int):
    """Lobatto nodes on [-1, 1] and the matrix mapping values to antiderivatives from -1."""
    y = -np.cos(np.pi * np.arange(points) / (points - 1))
    V = chebyshev.chebvander(y, points - 1)
    integ = np.stack([chebyshev.chebint(np.eye(points)[j], lbnd=-1) for j in range(points)], axis=1)
    W = chebyshev.chebvander(y, points)
    return y, W @ integ @ np.linalg.inv(V)


def antiderivative_grid(t_end: float, points: int):
    """Nodes ``x`` on ``[0, t_end]`` and ``Q`` with ``(Q f)_i ~ int_0^{x_i} f``."""
    y, Q = _unit_antiderivative(points)
    return 0.5 * t_end * (y + 1.0), 0.5 * t_end * Q


def node_mismatch(couple: EnhancedCouple, labels: np.ndarray, omega_table: np.ndarray) -> dict:
    """``w(k_n) - w(k_1) + w(k_2) - w(k_3)`` per branching node (array over decorations)."""
    out = {}
    for g in couple.branching:
        c1, c2, c3 = couple.children(g)
        w = omega_table
        out[g] = (w[labels[:, g]] - w[labels[:, c1]]) + (w[labels[:, c2]] - w[labels[:, c3]])
    return out


def decoration_weights(
    couple: EnhancedCouple, labels: np.ndarray, params: SimParams, sign_rule: str = "none"
) -> np.ndarray:
    """``eps_E``: product of interaction coefficients over branching nodes.

    With ``sign_rule="eq_eps"`` a node whose three children carry equal
    wavenumbers contributes ``-T`` instead of ``T``.
    """
    if sign_rule not in SIGN_RULES:
        raise InvalidParameter(f"sign_rule must be one of {SIGN_RULES}")
    N = params.N
    eps = np.ones(labels.shape[0])
    for g in couple.branching:
        c1, c2, c3 = couple.children(g)
        coeff = interaction_coeff_int(labels[:, g], labels[:, c1], labels[:, c2], labels[:, c3], N, params)
        if sign_rule == "eq_eps":
            equal = (labels[:, c1] == labels[:, c2]) & (labels[:, c2] == labels[:, c3])
            coeff = np.where(equal, -coeff, coeff)
        eps = eps * coeff
    return eps


def _tree_integral(couple, root, mismatch, x, Q, phase):
    """Values of the nested integral of the subtree at ``root`` on the grid ``x``."""
    if not couple.children(root):
        return None  # leaves contribute the constant 1
    acc = np.exp(1j * couple.sign(root) * mismatch[root][:, None] * phase[None, :])
    for child in couple.children(root):
        sub = _tree_integral(couple, child, mismatch, x, Q, phase)
        if sub is not None:
            acc = acc * sub
    return acc @ Q.T


def tree_time_factors(couple, root, mismatch, t_end, shift, T, points):
    """Nested integral of the tree at ``root`` up to ``t_end`` for each decoration."""
    size = next(iter(mismatch.values())).shape[0] if mismatch else 1
    if not couple.children(root):
        return np.ones(size, dtype=complex)
    if t_end == 0.0:
        return np.zeros(size, dtype=complex)
    x, Q = antiderivative_grid(t_end, points)
    phase = shift.phase(x, T)
    return _tree_integral(couple, root, mismatch, x, Q, phase)[:, -1]


@dataclass(frozen=True)
class KernelEstimate:
    value: complex
    error: float
    points: int
    converged: bool
    decorations: int


def couple_kernel_estimate(
    couple: EnhancedCouple,
    t: float,
    s: float,
    k: float,
    shift: FrequencyShift | None,
    params: SimParams,
    n_in,
    *,
    sign_rule: str = "none",
    points: int = 64,
    max_points: int = 1024,
    tol: float = 1e-11,
) -> KernelEstimate:
    if couple.order > 4:
        raise InvalidParameter("couple kernels are evaluated for order <= 4")
    if not (0.0 <= t <= 1.0 and 0.0 <= s <= 1.0):
        raise InvalidParameter("t and s must lie in [0, 1]")
    shift = zero_shift() if shift is None else shift
    N = params.N
    k_label = int(round(k * N)) if isinstance(k, float) else int(k)
    if isinstance(k, float) and abs(k * N - k_label) > 1e-9:
        raise InvalidParameter("k must be a grid wavenumber j/N")
    labels = couple_decorations(couple, k_label, N)
    if labels.shape[0] == 0:
        return KernelEstimate(0j, 0.0, 0, True, 0)
    n = np.concatenate([[0.0], spectrum_on_grid(n_in, params.grid)])
    omega_table = dispersion(np.arange(N) / N, params)
    mismatch = node_mismatch(couple, labels, omega_table)
    eps = decoration_weights(couple, labels, params, sign_rule)
    plus_leaves = [l for l in couple.leaves if couple.sign(l) == 1]
    leaf_weight = np.prod(n[labels[:, plus_leaves]], axis=1)
    P = params.beta * params.time_scale / N
    prefactor = P**couple.order * couple_zeta(couple)
    T = params.time_scale
    base = eps * leaf_weight

    def total(m):
        plus = tree_time_factors(couple, couple.roots[0], mismatch, t, shift, T, m)
        minus = tree_time_factors(couple, couple.roots[1], mismatch, s, shift, T, m)
        return prefactor * np.sum(base * plus * minus)

    if couple.order == 0:
        return KernelEstimate(complex(prefactor * np.sum(base)), 0.0, 0, True, labels.shape[0])
    m = points
    previous = total(m)
    while True:
        m2 = 2 * m - 1
        current = total(m2)
        err = abs(current - previous)
        scale = max(abs(current), P**couple.order * float(np.sum(np.abs(base))), 1e-300)
        if err <= tol * scale or m2 >= max_points:
            converged = err <= tol * scale
            if not converged:
                warnings.warn(f"couple kernel quadrature error {err:.3e} above tolerance", QuadratureWarning)
            return KernelEstimate(complex(current), float(err), m2, converged, labels.shape[0])
        previous, m = current, m2


def evaluate_couple_kernel(couple, t, s, k, shift, params, n_in, **options) -> complex:
    """``K_Q(t, s, k)``; a :class:`QuadratureWarning` flags an unmet tolerance."""
    return couple_kernel_estimate(couple, t, s, k, shift, params, n_in, **options).value


def couple_time_factor(couple: EnhancedCouple, labels, t: float, s: float, shift, params: SimParams, points: int = 129):
    """Product of the plus and minus nested integrals for one decoration."""
    shift = zero_shift() if shift is None else shift
    labels = np.asarray(labels, dtype=np.int64)[None, :]
    omega_table = dispersion(np.arange(params.N) / params.N, params)
    mismatch = node_mismatch(couple, labels, omega_table)
    T = params.time_scale
    plus = tree_time_factors(couple, couple.roots[0], mismatch, t, shift, T, points)
    minus = tree_time_factors(couple, couple.roots[1], mismatch, s, shift, T, points)
    return complex((plus * minus)[0])


def kernel_sums(couples, t, s, k, shift, params, n_in, **options) -> dict:
    """Sum of kernels grouped by ``(plus scale, minus scale)``."""
    out: dict = {}
    for couple in couples:
        key = (couple.plus.scale, couple.minus.scale)
        out[key] = out.get(key, 0j) + evaluate_couple_kernel(couple, t, s, k, shift, params, n_in, **options)
    return out
