"""Sample-wise evaluation of the first tree iterates ``c^(0)``, ``c^(1)``, ``c^(2)``.

``c^(j)`` is the sum over all trees of scale ``j`` of the inductive iterate:
plain nodes carry the non-degenerate cubic sum with phase
``exp(i W (T s + A(s)))`` and degenerate nodes carry the variance-subtracted
self-interaction terms.  The first iterate has the closed form::

    c1_k(s) = -i P [ sum' T c_1 conj(c_2) c_3 I(W, s) + s D_k c_k ]

with ``I(W, s) = int_0^s exp(i W phase)`` and
``D_k = sum_l (T_{k,l,l,k} + T_{k,k,l,l}) (|c_l|^2 - n_l)``.  The second
iterate integrates the scale-2 right-hand side with Gauss-Legendre nodes
on ``[0, t]``, using exact expectations for the subtracted terms.
"""

from __future__ import annotations

import numpy as np

from ..errors import InvalidParameter
from ..model import ModeField, SimParams, dispersion, interaction_coeff_int, spectrum_on_grid
from ..renormalization import FrequencyShift, phase_integrals, quadruple_table, zero_shift

FOURTH_MOMENT = {"gaussian": 2.0, "phase": 1.0}


class IterateWorkspace:
    """Precomputed quadruple tables and phase integrals for one ``(t, shift)``."""

    def __init__(self, params: SimParams, n_in, t: float, shift: FrequencyShift | None, nodes: int = 96, fine: int = 4097):
        if not 0.0 <= t <= 1.0:
            raise InvalidParameter("t must lie in [0, 1]")
        self.params = params
        self.t = t
        self.shift = zero_shift() if shift is None else shift
        self.n = spectrum_on_grid(n_in, params.grid)
        N = params.N
        self.P = params.beta * params.time_scale / N
        T = params.time_scale
        table = quadruple_table(params)
        self.table = table
        self.j = table.j - 1
        self.j1 = table.j1 - 1
        self.j2 = table.j2 - 1
        self.j3 = table.j3 - 1
        labels = params.grid.indices
        K, L = np.meshgrid(labels, labels, indexing="ij")
        # both self-interaction coefficients, summed: T_{k,l,l,k} + T_{k,k,l,l}
        self.self_coeff = interaction_coeff_int(K, L, L, K, N, params) + interaction_coeff_int(K, K, L, L, N, params)
        x, w = np.polynomial.legendre.leggauss(nodes)
        self.s_nodes = 0.5 * t * (x + 1.0)
        self.s_weights = 0.5 * t * w
        grid = np.unique(np.concatenate([np.linspace(0.0, t, fine), self.s_nodes, [t]]))
        phase = self.shift.phase(grid, T)
        I = phase_integrals(table.mismatch, grid, phase)
        where = np.searchsorted(grid, self.s_nodes)
        self.I_nodes = I[:, where]  # (Q, nodes)
        self.I_end = I[:, -1]
        self.node_phase = np.exp(1j * table.mismatch[:, None] * self.shift.phase(self.s_nodes, T)[None, :])
        self.aggregate = np.zeros((table.j.size, N - 1))
        self.aggregate[np.arange(table.j.size), self.j] = 1.0

    def cubic(self, a, b, c, weights):
        """``sum' weights_q a_{j1} conj(b_{j2}) c_{j3}`` aggregated onto ``j``."""
        prod = a[:, self.j1] * np.conj(b[:, self.j2]) * c[:, self.j3]
        return (prod * weights[None, :]) @ self.aggregate

    def first(self, c0, s_index=None):
        """``c^(1)`` at a node index (or at ``t`` when ``s_index`` is None)."""
        I = self.I_end if s_index is None else self.I_nodes[:, s_index]
        s = self.t if s_index is None else self.s_nodes[s_index]
        D = (np.abs(c0) ** 2 - self.n[None, :]) @ self.self_coeff.T
        return -1j * self.P * (self.cubic(c0, c0, c0, self.table.coeff * I) + s * D * c0)


def iterates(eta, params: SimParams, n_in, t: float, shift: FrequencyShift | None = None, max_order: int = 2, nodes: int = 96, workspace: IterateWorkspace | None = None) -> dict:
    """``{0: c0, 1: c1, 2: c2}`` for noise samples ``eta`` of shape ``(M, N-1)``."""
    if max_order not in (0, 1, 2):
        raise InvalidParameter("iterates are available for orders 0, 1, 2")
    eta = np.atleast_2d(np.asarray(eta, dtype=complex))
    n = spectrum_on_grid(n_in, params.grid)
    c0 = np.sqrt(n)[None, :] * eta
    out = {0: c0}
    if max_order == 0:
        return out
    ws = workspace or IterateWorkspace(params, n_in, t, shift, nodes)
    out[1] = ws.first(c0)
    if max_order == 1:
        return out
    kurt = FOURTH_MOMENT.get(params.dist, 2.0)
    P = ws.P
    # E[c1_l conj(c0_l)] = -i P s (kurt - 1) (T_llll + T_llll) n_l^2
    diag = np.diag(ws.self_coeff)
    power = np.abs(c0) ** 2 - n[None, :]
    total = np.zeros_like(c0)
    for i, s in enumerate(ws.s_nodes):
        c1 = ws.first(c0, i)
        weights = ws.table.coeff * ws.node_phase[:, i]
        rhs = ws.cubic(c1, c0, c0, weights) + ws.cubic(c0, c1, c0, weights) + ws.cubic(c0, c0, c1, weights)
        mean_cross = -1j * P * s * (kurt - 1.0) * diag * n**2
        cross = c1 * np.conj(c0) - mean_cross[None, :]
        cross = cross + np.conj(cross)  # c1 conj(c0) + c0 conj(c1) minus its mean
        rhs = rhs + (cross @ ws.self_coeff.T) * c0 + (power @ ws.self_coeff.T) * c1
        total += ws.s_weights[i] * rhs
    out[2] = -1j * P * total
    return out


def iterate_sample(order: int, eta, t: float, shift: FrequencyShift | None, params: SimParams, n_in, nodes: int = 96) -> ModeField:
    """``c^(order)`` at rescaled time ``t`` for one or more noise samples."""
    if order not in (0, 1, 2):
        raise InvalidParameter("order must be 0, 1 or 2")
    values = iterates(eta, params, n_in, t, shift, max_order=order, nodes=nodes)[order]
    if np.ndim(eta) == 1:
        values = values[0]
    return ModeField(values, time=t, meta={"order": order})


def pair_moments(samples: dict, pairs=((0, 0), (1, 0), (0, 1), (1, 1), (2, 0), (0, 2))) -> dict:
    """Sample mean and standard error of ``c^(a)_k conj(c^(b)_k)`` per pair ``(a, b)``.

    The standard error is reported separately for the real and imaginary
    parts as a complex number ``se_re + 1j * se_im``.
    """
    out = {}
    for a, b in pairs:
        prod = samples[a] * np.conj(samples[b])
        M = prod.shape[0]
        mean = prod.mean(axis=0)
        se = prod.real.std(axis=0, ddof=1) / np.sqrt(M) + 1j * prod.imag.std(axis=0, ddof=1) / np.sqrt(M)
        out[(a, b)] = (mean, se)
    return out


def order_moments(samples: dict, max_order: int = 2) -> dict:
    """Per total order ``n``: mean and standard error of ``sum_{a+b=n} c^(a) conj(c^(b))``."""
    out = {}
    for order in range(max_order + 1):
        prod = sum(samples[a] * np.conj(samples[order - a]) for a in range(order + 1))
        M = prod.shape[0]
        se = prod.real.std(axis=0, ddof=1) / np.sqrt(M) + 1j * prod.imag.std(axis=0, ddof=1) / np.sqrt(M)
        out[order] = (prod.mean(axis=0), se)
    return out
