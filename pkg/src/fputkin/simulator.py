"""Time integration of the reduced spectral equation and ensemble statistics.

The equation is ``i db_k/dt = w_k b_k + (beta/N) sum T_{k,1,2,3} b_1 conj(b_2) b_3``
with the sum over ``k1 - k2 + k3 = k (mod 1)``.  Integration uses Strang
splitting: the diagonal linear part is rotated exactly and the cubic part is
advanced with one classical RK4 step.
"""

from __future__ import annotations

import time as _time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import IntegrationDiverged, InvalidParameter
from .model import (
    SimParams,
    dispersion,
    interaction_coeff_int,
    sample_ensemble,
    spectrum_on_grid,
)

DIVERGENCE_THRESHOLD = 1e6


@dataclass
class Trajectory:
    times: np.ndarray
    snapshots: np.ndarray  # shape (n_times, ..., N-1)
    params: SimParams
    dt: float
    steps: int = 0


@dataclass
class EnsembleSpectrum:
    times: np.ndarray
    mean: np.ndarray  # (n_times, N-1)
    stderr: np.ndarray  # (n_times, N-1)
    samples: int
    excluded: list[int] = field(default_factory=list)
    wall_time: float = 0.0


class CubicTerm:
    """Evaluates ``NL_k = sum_{k1-k2+k3=k mod 1} T_{k,1,2,3} b_1 conj(b_2) b_3``.

    ``method='fft'`` splits the sum by the wrap sign of ``k1 - k2 + k3`` into a
    linear convolution of ``u = sqrt(w) b`` and reads off the three shifted
    branches; ``method='direct'`` is the plain O(N^3) sum.
    """

    def __init__(self, params: SimParams, method: str = "fft"):
        if method not in ("fft", "direct"):
            raise InvalidParameter(f"unknown cubic-term method {method!r}")
        self.params = params
        self.method = method
        N = params.N
        self.N = N
        self.omega = dispersion(params.grid.points, params)
        self.sqrt_omega = np.sqrt(self.omega)
        self.prefactor = 3.0 / (4.0 * params.kappa**2)
        self._L = 4 * N
        if method == "direct":
            j = np.arange(1, N)
            J, J1, J2 = np.meshgrid(j, j, j, indexing="ij")
            J3 = (J - J1 + J2) % N
            valid = J3 != 0
            J3 = np.where(valid, J3, 1)
            coeff = interaction_coeff_int(J, J1, J2, J3, N, params)
            self._coeff = np.where(valid, coeff, 0.0)
            self._j3 = J3 - 1

    def __call__(self, b: np.ndarray) -> np.ndarray:
        if self.method == "direct":
            return self._direct(b)
        return self._fft(b)

    def _direct(self, b: np.ndarray) -> np.ndarray:
        b = np.asarray(b, dtype=complex)
        # b1 conj(b2) b3 with b3 indexed through the momentum constraint
        b3 = b[..., self._j3]  # (..., j, j1, j2)
        prod = b[..., None, :, None] * np.conj(b)[..., None, None, :] * b3
        return np.sum(self._coeff * prod, axis=(-2, -1))

    def _fft(self, b: np.ndarray) -> np.ndarray:
        N, L = self.N, self._L
        u = np.asarray(b, dtype=complex) * self.sqrt_omega
        shape = u.shape[:-1]
        a = np.zeros(shape + (L,), dtype=complex)
        c = np.zeros(shape + (L,), dtype=complex)
        j = np.arange(1, N)
        a[..., j] = u
        c[..., (-j) % L] = np.conj(u)
        fa = np.fft.fft(a, axis=-1)
        fc = np.fft.fft(c, axis=-1)
        p = np.fft.ifft(fa * fa * fc, axis=-1)
        # exponent m = j1 - j2 + j3 lies in [3-N, 2N-3]; no aliasing for L = 4N
        direct = p[..., j]
        over = p[..., j + N]
        under = p[..., (j - N) % L]
        return self.prefactor * self.sqrt_omega * (direct - over - under)


def rhs_reduced(b, t: float, params: SimParams, method: str = "fft") -> np.ndarray:
    """Time derivative of the reduced equation at state ``b``."""
    del t  # autonomous
    term = CubicTerm(params, method)
    b = np.asarray(b, dtype=complex)
    return -1j * (term.omega * b + (params.beta / params.N) * term(b))


def conserved_quantities(b, params: SimParams, method: str = "fft") -> tuple[np.ndarray, np.ndarray]:
    """Return ``(action, hamiltonian)`` for one field or a stack of fields."""
    b = np.asarray(b, dtype=complex)
    term = CubicTerm(params, method)
    action = np.sum(np.abs(b) ** 2, axis=-1)
    quadratic = np.sum(term.omega * np.abs(b) ** 2, axis=-1)
    quartic = np.real(np.sum(np.conj(b) * term(b), axis=-1))
    return action, quadratic + params.beta / (2.0 * params.N) * quartic


def hamiltonian_direct(b, params: SimParams) -> float:
    """Quartic Hamiltonian by an explicit loop over constrained quadruples."""
    b = np.asarray(b, dtype=complex)
    N = params.N
    j = np.arange(1, N)
    omega = dispersion(j / N, params)
    total = complex(np.sum(omega * np.abs(b) ** 2))
    quartic = 0.0 + 0.0j
    for j1 in j:
        J2, J3 = np.meshgrid(j, j, indexing="ij")
        J4 = (j1 - J2 + J3) % N  # k1 - k2 + k3 - k4 = 0 with k4 = k1 - k2 + k3
        valid = J4 != 0
        J4 = np.where(valid, J4, 1)
        # T_{1,2,3,4}: first index k1, the remaining three satisfy k2 - k3 + k4 = k1
        coeff = interaction_coeff_int(np.full_like(J2, j1), J2, J3, J4, N, params)
        term = np.conj(b[j1 - 1]) * b[J2 - 1] * np.conj(b[J3 - 1]) * b[J4 - 1]
        quartic += np.sum(np.where(valid, coeff * term, 0.0))
    return float(np.real(total + params.beta / (2.0 * N) * quartic))


class StrangStepper:
    """Exact linear rotation composed with an RK4 step of the cubic flow."""

    def __init__(self, params: SimParams, dt: float, method: str = "fft"):
        self.params = params
        self.dt = float(dt)
        self.term = CubicTerm(params, method)
        self.coupling = params.beta / params.N
        self.half_rotation = np.exp(-0.5j * self.term.omega * self.dt)

    def nonlinear(self, b: np.ndarray) -> np.ndarray:
        return -1j * self.coupling * self.term(b)

    def rk4(self, b: np.ndarray, h: float) -> np.ndarray:
        f = self.nonlinear
        k1 = f(b)
        k2 = f(b + 0.5 * h * k1)
        k3 = f(b + 0.5 * h * k2)
        k4 = f(b + h * k3)
        return b + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    def step(self, b: np.ndarray) -> np.ndarray:
        b = self.half_rotation * b
        if self.coupling != 0.0:
            b = self.rk4(b, self.dt)
        return self.half_rotation * b


def max_stable_dt(params: SimParams, amplitude_sq: float = 1.0) -> float:
    """Step bound from the fastest linear phase and the cubic coupling scale."""
    omega_max = params.frequency_scale
    bound = 0.1 / omega_max
    tmax = 3.0 / (4.0 * params.kappa**2) * omega_max**2
    if params.beta > 0:
        # random-phase estimate of the cubic rate: (beta/N) * N * T_max * |b|^2
        bound = min(bound, 0.1 / (params.beta * tmax * max(amplitude_sq, 1e-300)))
    return bound


def evolve(
    b0,
    t_end: float,
    dt: float,
    params: SimParams,
    snapshot_times=None,
    method: str = "fft",
    check_dt: bool = True,
) -> Trajectory:
    """Integrate from ``t=0`` to ``t_end`` recording the requested snapshots.

    ``b0`` may be one field or a stack ``(M, N-1)``.  The step is shrunk so that
    every snapshot time is hit exactly.
    """
    b = np.array(b0, dtype=complex)
    if b.shape[-1] != params.grid.size:
        raise InvalidParameter("initial field does not match the grid")
    if dt <= 0 or t_end < 0:
        raise InvalidParameter("dt must be positive and t_end non-negative")
    if snapshot_times is None:
        snapshot_times = [0.0, t_end]
    times = np.unique(np.concatenate([[0.0], np.asarray(snapshot_times, dtype=float)]))
    if times[-1] > t_end + 1e-12 or times[0] < 0:
        raise InvalidParameter("snapshot times must lie in [0, t_end]")
    if check_dt:
        amp = float(np.max(np.abs(b)) ** 2) if b.size else 1.0
        if dt > 0.1 / params.frequency_scale * (1 + 1e-12):
            raise InvalidParameter(f"dt={dt} does not resolve the fastest linear phase")
        if dt > max_stable_dt(params, amp) * (1 + 1e-12):
            raise InvalidParameter(f"dt={dt} too large for the cubic coupling")

    snaps = [b.copy()]
    steps = 0
    current = 0.0
    steppers: dict[float, StrangStepper] = {}
    for target in times[1:]:
        span = target - current
        n = max(1, int(np.ceil(span / dt - 1e-9)))
        h = span / n
        key = round(h, 15)
        if key not in steppers:
            steppers[key] = StrangStepper(params, h, method)
        stepper = steppers[key]
        for i in range(n):
            b = stepper.step(b)
            steps += 1
            mag = np.max(np.abs(b)) if b.size else 0.0
            if not np.isfinite(mag) or mag > DIVERGENCE_THRESHOLD:
                raise IntegrationDiverged("integration diverged", current + i * h)
        current = target
        snaps.append(b.copy())
    return Trajectory(times=times, snapshots=np.stack(snaps), params=params, dt=dt, steps=steps)


def linear_solution(b0, times, params: SimParams) -> np.ndarray:
    """Closed-form solution ``exp(-i w t) b0`` of the linear equation."""
    omega = dispersion(params.grid.points, params)
    times = np.asarray(times, dtype=float)
    return np.exp(-1j * times[:, None] * omega[None, :]) * np.asarray(b0)[None, :]


def interaction_picture(traj: Trajectory, T: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Map ``b_k(t)`` to ``b'_k(s) = exp(i w_k T s) b_k(T s)`` with ``s = t / T``."""
    T = traj.params.time_scale if T is None else T
    omega = dispersion(traj.params.grid.points, traj.params)
    s = traj.times / T
    phase = np.exp(1j * np.multiply.outer(traj.times, omega))
    shape = (len(s),) + (1,) * (traj.snapshots.ndim - 2) + (omega.size,)
    return s, traj.snapshots * phase.reshape(shape)


def rhs_interaction_picture(b_prime, s: float, params: SimParams, method: str = "fft") -> np.ndarray:
    """Right side of the equation satisfied by ``b'`` on the slow clock ``s``.

    ``i db'_k/ds = (beta T / N) sum T_{k123} b'_1 conj(b'_2) b'_3 exp(i Omega T s)``,
    evaluated by rotating back to the lab frame so the same cubic kernel applies.
    """
    T = params.time_scale
    omega = dispersion(params.grid.points, params)
    b = np.exp(-1j * omega * T * s) * np.asarray(b_prime, dtype=complex)
    term = CubicTerm(params, method)
    nl = term(b)
    return -1j * (params.beta * T / params.N) * np.exp(1j * omega * T * s) * nl


def _column_sum(x: np.ndarray) -> np.ndarray:
    # pairwise summation over samples: put samples on the contiguous axis
    return np.ascontiguousarray(np.moveaxis(x, 0, -1)).sum(axis=-1)


def ensemble_spectrum(
    n_in,
    params: SimParams,
    M: int,
    times,
    dt: float | None = None,
    batch: int = 250,
    threads: int = 1,
    method: str = "fft",
    sample_offset: int = 0,
) -> EnsembleSpectrum:
    """Monte-Carlo estimate of ``E|b_k(t)|^2`` over ``M`` seeded members."""
    if M < 2:
        raise InvalidParameter("ensemble needs at least two members")
    start = _time.perf_counter()
    n = spectrum_on_grid(n_in, params.grid)
    times = np.asarray(times, dtype=float)
    t_end = float(times.max())
    if dt is None:
        dt = min(max_stable_dt(params, float(np.max(n)) * 10.0), 0.1 / params.frequency_scale)
    indices = list(range(sample_offset, sample_offset + M))
    chunks = [indices[i : i + batch] for i in range(0, M, batch)]

    def run(chunk):
        b0 = sample_ensemble(n, params, chunk)
        try:
            traj = evolve(b0, t_end, dt, params, times, method=method, check_dt=False)
            return chunk, np.abs(traj.snapshots[np.searchsorted(traj.times, times)]) ** 2, []
        except IntegrationDiverged:
            # fall back to one member at a time to isolate the failures
            rows, bad = [], []
            for idx, row in zip(chunk, b0):
                try:
                    tr = evolve(row, t_end, dt, params, times, method=method, check_dt=False)
                    rows.append(np.abs(tr.snapshots[np.searchsorted(tr.times, times)]) ** 2)
                except IntegrationDiverged:
                    bad.append(idx)
                    rows.append(np.full((len(times), n.size), np.nan))
            return chunk, np.stack(rows, axis=1), bad

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, chunks))
    else:
        results = [run(c) for c in chunks]
    power = np.concatenate([r[1] for r in results], axis=1)  # (n_times, M, N-1)
    excluded = [i for r in results for i in r[2]]
    keep = ~np.isnan(power[0, :, 0])
    power = power[:, keep, :]
    m = power.shape[1]
    if m < 2:
        raise IntegrationDiverged("fewer than two ensemble members survived", 0.0)
    samples_first = np.moveaxis(power, 1, 0)
    mean = _column_sum(samples_first) / m
    dev = samples_first - mean[None]
    var = _column_sum(dev * dev) / (m - 1)
    stderr = np.sqrt(var / m)
    return EnsembleSpectrum(
        times=times,
        mean=mean,
        stderr=stderr,
        samples=m,
        excluded=excluded,
        wall_time=_time.perf_counter() - start,
    )
