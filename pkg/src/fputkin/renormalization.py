"""Deterministic nonlinear frequency shift and the associated gauge transform.

The shift has the form ``w_k A(s)`` where the scalar ``A`` solves
``A'(s) = (3 beta T / (2 kappa^2 N)) sum_l w_l E|c_l(s)|^2`` with ``A(0) = 0``.
At order 0 the expectation is ``n_in`` and ``A`` is linear; at order 2 the
second-order correction to ``E|c_l|^2`` is fed back and the resulting
fixed-point problem is solved by Picard iteration on a tabulated ``A``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.interpolate import CubicHermiteSpline

from .errors import FixedPointFailed, InvalidParameter
from .model import (
    ModeField,
    SimParams,
    constrained_quadruples,
    dispersion,
    interaction_coeff_int,
    spectrum_on_grid,
)

TABLE_POINTS = 1024


@dataclass(frozen=True)
class FrequencyShift:
    """Tabulated ``A(s)`` on ``[0, 1]`` with its derivative.

    When ``linear_rate`` is set the shift is exactly ``linear_rate * s`` and
    evaluation bypasses the table.
    """

    C0: float
    s: np.ndarray
    A: np.ndarray
    A_dot: np.ndarray
    order: int
    linear_rate: float | None = None
    iterations: int = 0
    residual: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.A[0] != 0.0:
            raise InvalidParameter("frequency shift must vanish at s=0")

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        if self.linear_rate is not None:
            return self.linear_rate * s
        return CubicHermiteSpline(self.s, self.A, self.A_dot)(s)

    def derivative(self, s):
        s = np.asarray(s, dtype=float)
        if self.linear_rate is not None:
            return np.full_like(s, self.linear_rate)
        return CubicHermiteSpline(self.s, self.A, self.A_dot).derivative()(s)

    def phase(self, s, T: float):
        """Total phase clock ``T s + A(s)`` multiplying each mismatch."""
        return T * np.asarray(s, dtype=float) + self(s)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["s", "A", "A_dot"])
            for row in zip(self.s, self.A, self.A_dot):
                w.writerow([f"{v:.17g}" for v in row])


def zero_shift(points: int = TABLE_POINTS) -> FrequencyShift:
    """The trivial gauge ``A = 0``."""
    s = np.linspace(0.0, 1.0, points)
    return FrequencyShift(0.0, s, np.zeros(points), np.zeros(points), order=-1, linear_rate=0.0)


def leading_shift_constant(n_in, params: SimParams) -> float:
    """``C0 = (3 / (2 kappa^2 N)) sum_l w_l n_in(l)``."""
    n = spectrum_on_grid(n_in, params.grid)
    omega = dispersion(params.grid.points, params)
    return 3.0 / (2.0 * params.kappa**2 * params.N) * float(np.sum(omega * n))


def phase_integrals(mismatch, s_grid: np.ndarray, phase_grid: np.ndarray) -> np.ndarray:
    """``I(W, s) = int_0^s exp(i W phase(s')) ds'`` on every grid node.

    The phase is treated as piecewise linear between nodes and each panel is
    integrated in closed form, so linear phases are reproduced exactly.
    Returns an array of shape ``(len(mismatch), len(s_grid))``.
    """
    W = np.asarray(mismatch, dtype=float)[:, None]
    h = np.diff(s_grid)[None, :]
    slope = (np.diff(phase_grid) / np.diff(s_grid))[None, :]
    x = W * slope * h
    start = np.exp(1j * W * phase_grid[None, :-1])
    # (exp(i x) - 1) / (i x), with the series near zero
    small = np.abs(x) < 1e-4
    safe = np.where(small, 1.0, x)
    ratio = np.where(small, 1.0 + 0.5j * x - x * x / 6.0, (np.exp(1j * safe) - 1.0) / (1j * safe))
    panels = start * h * ratio
    out = np.zeros((W.shape[0], s_grid.size), dtype=complex)
    out[:, 1:] = np.cumsum(panels, axis=1)
    return out


@dataclass(frozen=True)
class QuadrupleTable:
    """Non-degenerate constrained quadruples with their interaction data."""

    j: np.ndarray
    j1: np.ndarray
    j2: np.ndarray
    j3: np.ndarray
    coeff: np.ndarray
    mismatch: np.ndarray


def quadruple_table(params: SimParams) -> QuadrupleTable:
    N = params.N
    j, j1, j2, j3 = constrained_quadruples(N, exclude_degenerate=True)
    coeff = interaction_coeff_int(j, j1, j2, j3, N, params)
    omega = dispersion(np.arange(0, N) / N, params)
    mismatch = (omega[j] - omega[j1]) + (omega[j2] - omega[j3])
    return QuadrupleTable(j, j1, j2, j3, coeff, mismatch)


def bracket(a, b, c, d):
    """``a b c d (1/a - 1/b + 1/c - 1/d)`` written without division.

    Evaluated as ``(a d)(b - c) + (b c)(d - a)`` so that exchanging
    ``(a, c) <-> (b, d)`` negates the result bit for bit.
    """
    return (a * d) * (b - c) + (b * c) * (d - a)


def second_order_weights(n: np.ndarray, table: QuadrupleTable) -> np.ndarray:
    """``|T|^2 n n1 n2 n3 (1/n - 1/n1 + 1/n2 - 1/n3)`` per quadruple."""
    full = np.concatenate([[0.0], n])
    return table.coeff**2 * bracket(full[table.j], full[table.j1], full[table.j2], full[table.j3])


def second_order_correction(
    n: np.ndarray, params: SimParams, s_grid: np.ndarray, phase_grid: np.ndarray, chunk: int = 4096
) -> np.ndarray:
    """Exact second-order change of ``E|c_k(s)|^2`` for Gaussian data.

    Returns an array ``(N-1, len(s_grid))``: ``2 (beta T / N)^2 sum |T|^2 B |I|^2``
    over non-degenerate quadruples.  The degenerate self-interaction terms
    cancel identically against the subtraction built into the iterates.
    """
    table = quadruple_table(params)
    weights = second_order_weights(n, table)
    P = params.beta * params.time_scale / params.N
    out = np.zeros((params.N - 1, s_grid.size))
    for lo in range(0, weights.size, chunk):
        sl = slice(lo, lo + chunk)
        I = phase_integrals(table.mismatch[sl], s_grid, phase_grid)
        contrib = weights[sl, None] * (I.real**2 + I.imag**2)
        np.add.at(out, table.j[sl] - 1, contrib)
    return 2.0 * P * P * out


def weighted_second_order_correction(
    n: np.ndarray,
    mode_weights: np.ndarray,
    params: SimParams,
    s_grid: np.ndarray,
    phase_grid: np.ndarray,
    chunk: int = 4096,
) -> np.ndarray:
    """``sum_k mode_weights_k * second_order_correction_k`` on the s-grid.

    Quadruples sharing a mismatch value (to 1e-11) are merged before the phase
    integrals are formed, which is what makes the order-2 closure affordable.
    """
    table = quadruple_table(params)
    weights = second_order_weights(n, table) * np.asarray(mode_weights)[table.j - 1]
    keys, inverse = np.unique(np.round(table.mismatch, 11), return_inverse=True)
    merged = np.bincount(inverse, weights=weights, minlength=keys.size)
    P = params.beta * params.time_scale / params.N
    out = np.zeros(s_grid.size)
    for lo in range(0, keys.size, chunk):
        sl = slice(lo, lo + chunk)
        I = phase_integrals(keys[sl], s_grid, phase_grid)
        out += merged[sl] @ (I.real**2 + I.imag**2)
    return 2.0 * P * P * out


def solve_frequency_shift(
    n_in,
    params: SimParams,
    order: int = 0,
    tol: float = 1e-10,
    max_iter: int = 50,
    points: int = TABLE_POINTS,
) -> FrequencyShift:
    """Solve for ``A(s)`` at closure order 0 or 2."""
    if order not in (0, 2):
        raise InvalidParameter("closure order must be 0 or 2")
    if tol <= 0:
        raise InvalidParameter("tol must be positive")
    n = spectrum_on_grid(n_in, params.grid)
    C0 = leading_shift_constant(n, params)
    T = params.time_scale
    rate = C0 * params.beta * T
    s = np.linspace(0.0, 1.0, points)
    if order == 0:
        return FrequencyShift(C0, s, rate * s, np.full(points, rate), order=0, linear_rate=rate)

    omega = dispersion(params.grid.points, params)
    prefactor = 3.0 * params.beta * T / (2.0 * params.kappa**2 * params.N)
    A = rate * s
    residual = np.inf
    for it in range(1, max_iter + 1):
        correction = weighted_second_order_correction(n, omega, params, s, T * s + A)
        A_dot = prefactor * (np.sum(omega * n) + correction)
        A_new = np.concatenate([[0.0], cumulative_simpson(A_dot, x=s)])
        residual = float(np.max(np.abs(A_new - A)))
        A = A_new
        if not np.isfinite(residual):
            break
        if residual < tol:
            return FrequencyShift(C0, s, A, A_dot, order=2, iterations=it, residual=residual)
    raise FixedPointFailed("frequency-shift iteration did not converge", residual)


def shift_rhs_two_sums(expected_power: np.ndarray, params: SimParams) -> np.ndarray:
    """Right side of the vector shift equation written with both sums.

    ``(beta T / N) (sum_l T_{k,l,l,k} E_l + sum_l T_{k,k,l,l} E_l)`` for every
    grid ``k``.  Both coefficients are evaluated from the general interaction
    formula rather than the product shortcut.
    """
    N = params.N
    j = params.grid.indices
    K, L = np.meshgrid(j, j, indexing="ij")
    first = interaction_coeff_int(K, L, L, K, N, params)
    second = interaction_coeff_int(K, K, L, L, N, params)
    E = np.asarray(expected_power, dtype=float)
    return params.beta * params.time_scale / N * (first @ E + second @ E)


def shift_rhs_scalar(expected_power: np.ndarray, params: SimParams) -> np.ndarray:
    """``w_k A'`` with ``A' = (3 beta T / (2 kappa^2 N)) sum_l w_l E_l``."""
    omega = dispersion(params.grid.points, params)
    A_dot = 3.0 * params.beta * params.time_scale / (2.0 * params.kappa**2 * params.N) * float(omega @ expected_power)
    return omega * A_dot


def gauge_transform(b_prime, shift: FrequencyShift, s: float, params: SimParams) -> ModeField:
    """``c_k = b'_k exp(i w_k A(s))``."""
    if not 0.0 <= s <= 1.0:
        raise InvalidParameter("s must lie in [0, 1]")
    values = b_prime.values if isinstance(b_prime, ModeField) else np.asarray(b_prime, dtype=complex)
    omega = dispersion(params.grid.points, params)
    return ModeField(values * np.exp(1j * omega * float(shift(s))), time=s)


def inverse_gauge_transform(c, shift: FrequencyShift, s: float, params: SimParams) -> ModeField:
    """Undo :func:`gauge_transform`."""
    values = c.values if isinstance(c, ModeField) else np.asarray(c, dtype=complex)
    omega = dispersion(params.grid.points, params)
    return ModeField(values * np.exp(-1j * omega * float(shift(s))), time=s)


def shifted_mismatch_modes(j, j1, j2, j3, shift: FrequencyShift, s: float, params: SimParams):
    """``w~_k - w~_k1 + w~_k2 - w~_k3`` from the per-mode shifted frequencies."""
    omega = dispersion(np.arange(params.N) / params.N, params)
    shifted = omega * float(shift(s))
    return (shifted[j] - shifted[j1]) + (shifted[j2] - shifted[j3])
