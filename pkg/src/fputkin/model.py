"""Wavenumber grid, dispersion, interaction coefficients and random initial data.

All wavenumbers are dimensionless and live on the unit torus.  The simulation
grid is the interior set ``{j/N : j = 1..N-1}``; the end points are excluded
because the dispersion vanishes there.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Literal

import numpy as np

from .errors import InvalidParameter

Distribution = Literal["gaussian", "phase"]
ProfileFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Grid:
    """Interior points of the lattice ``Z_N`` inside ``(0, 1)``."""

    N: int

    def __post_init__(self) -> None:
        if not isinstance(self.N, (int, np.integer)) or self.N < 2:
            raise InvalidParameter(f"grid size must be an integer >= 2, got {self.N!r}")

    @property
    def size(self) -> int:
        return self.N - 1

    @property
    def indices(self) -> np.ndarray:
        return np.arange(1, self.N)

    @property
    def points(self) -> np.ndarray:
        return self.indices / self.N

    def __len__(self) -> int:
        return self.N - 1


def build_grid(N: int) -> Grid:
    """Return the interior grid for lattice size ``N``."""
    return Grid(N)


def default_time_scale(N: int, gamma: float, epsilon: float) -> float:
    """Largest admissible rescaling time ``N^-eps * min(N, N^(5 gamma / 4))``."""
    return float(N) ** (-epsilon) * min(float(N), float(N) ** (1.25 * gamma))


@dataclass(frozen=True)
class SimParams:
    """Physical and numerical parameters of one run.

    ``beta`` defaults to ``N^-gamma``.  An explicit ``beta_override`` is only
    meant for controlled experiments such as the linear limit.
    """

    N: int
    gamma: float = 0.6
    kappa: float = 1.0
    mass: float = 1.0
    epsilon: float = 0.05
    T: float | None = None
    seed: int = 0
    dist: Distribution = "gaussian"
    beta_override: float | None = None

    def __post_init__(self) -> None:
        if not isinstance(self.N, (int, np.integer)) or self.N < 2:
            raise InvalidParameter(f"N must be an integer >= 2, got {self.N!r}")
        if not 0.0 < self.gamma < 1.0:
            raise InvalidParameter(f"gamma must lie in (0, 1), got {self.gamma}")
        if self.kappa <= 0 or self.mass <= 0:
            raise InvalidParameter("kappa and mass must be positive")
        if self.epsilon < 0:
            raise InvalidParameter("epsilon must be non-negative")
        if self.dist not in ("gaussian", "phase"):
            raise InvalidParameter(f"unknown distribution {self.dist!r}")
        if self.T is not None and self.T <= 0:
            raise InvalidParameter("T must be positive")
        if not 0 <= int(self.seed) < 2**64:
            raise InvalidParameter("seed must be an unsigned 64-bit integer")

    @property
    def grid(self) -> Grid:
        return Grid(self.N)

    @property
    def beta(self) -> float:
        if self.beta_override is not None:
            return float(self.beta_override)
        return float(self.N) ** (-self.gamma)

    @property
    def time_scale(self) -> float:
        """The rescaling time ``T`` used by the interaction picture."""
        if self.T is not None:
            return float(self.T)
        return default_time_scale(self.N, self.gamma, self.epsilon)

    @property
    def T_kin(self) -> float:
        return float(self.N) ** (2.0 * self.gamma) / (4.0 * np.pi)

    @property
    def frequency_scale(self) -> float:
        """Prefactor ``2 sqrt(kappa / m)`` of the dispersion relation."""
        return 2.0 * np.sqrt(self.kappa / self.mass)

    def with_(self, **changes) -> "SimParams":
        return replace(self, **changes)


def dispersion(k, params: SimParams | None = None):
    """Linear frequency ``2 sqrt(kappa/m) |sin(pi k)|``."""
    scale = 2.0 if params is None else params.frequency_scale
    return scale * np.abs(np.sin(np.pi * np.asarray(k, dtype=float)))


def wrap_sign(x):
    """Return ``sgn sin(pi x)``: +1 on (0,1), -1 on (-1,0) and (1,2)."""
    return np.sign(np.sin(np.pi * np.asarray(x, dtype=float)))


def _interaction_prefactor(params: SimParams | None) -> float:
    kappa = 1.0 if params is None else params.kappa
    return 3.0 / (4.0 * kappa**2)


def interaction_coeff(k, k1, k2, k3, params: SimParams | None = None, *, check: bool = True):
    """Quartic interaction coefficient of the reduced equation.

    The sign is negative exactly when ``k1 - k2 + k3`` leaves ``(0, 1)``, that
    is when the momentum constraint is met only after a wrap by one unit.
    Inputs must be interior wavenumbers with ``k1 - k2 + k3 = k (mod 1)``.
    """
    k, k1, k2, k3 = (np.asarray(v, dtype=float) for v in (k, k1, k2, k3))
    s = k1 - k2 + k3
    if check:
        wrapped = s - np.round(s - k)
        if np.any(np.abs(wrapped - k) > 1e-9):
            raise InvalidParameter("momentum constraint k1 - k2 + k3 = k (mod 1) violated")
    # on grid points the sign of sin(pi s) is exact because s is never an integer
    sign = np.where((s > 0.0) & (s < 1.0), 1.0, -1.0)
    omega = dispersion(np.stack([k, k1, k2, k3]), params)
    return _interaction_prefactor(params) * sign * np.sqrt(np.prod(omega, axis=0))


def interaction_coeff_int(j, j1, j2, j3, N: int, params: SimParams | None = None):
    """Interaction coefficient on integer grid labels ``j/N`` (exact sign test)."""
    j, j1, j2, j3 = (np.asarray(v) for v in (j, j1, j2, j3))
    s = j1 - j2 + j3
    sign = np.where((s > 0) & (s < N), 1.0, -1.0)
    omega = dispersion(np.stack([j, j1, j2, j3]) / N, params)
    return _interaction_prefactor(params) * sign * np.sqrt(np.prod(omega, axis=0))


def resonance_mismatch(k, k1, k2, k3, params: SimParams | None = None):
    """``omega_k - omega_k1 + omega_k2 - omega_k3``."""
    w = dispersion(np.stack(np.broadcast_arrays(*(np.asarray(v, float) for v in (k, k1, k2, k3)))), params)
    return (w[0] - w[1]) + (w[2] - w[3])


# --- spectra -----------------------------------------------------------------


def default_profile(k):
    """Default smooth positive spectrum ``1 + cos(2 pi k) / 2``."""
    return 1.0 + 0.5 * np.cos(2.0 * np.pi * np.asarray(k, dtype=float))


def bump_profile(k, center: float = 0.35, width: float = 0.12, height: float = 1.0, floor: float = 0.5):
    """Smooth periodic bump on top of a constant floor."""
    k = np.asarray(k, dtype=float)
    d = np.angle(np.exp(2j * np.pi * (k - center))) / (2.0 * np.pi)
    return floor + height * np.exp(-0.5 * (d / width) ** 2)


def rayleigh_jeans_profile(k, c: float = 1.0, params: SimParams | None = None):
    """Stationary spectrum ``c / omega(k)``."""
    return c / dispersion(k, params)


PROFILES: dict[str, ProfileFn] = {
    "default": default_profile,
    "bump": bump_profile,
    "constant": lambda k: np.ones_like(np.asarray(k, dtype=float)),
    "rayleigh_jeans": rayleigh_jeans_profile,
}


def spectrum_on_grid(profile: ProfileFn | np.ndarray | str, grid: Grid) -> np.ndarray:
    """Evaluate a spectrum on the grid, validating non-negativity."""
    if isinstance(profile, str):
        if profile not in PROFILES:
            raise InvalidParameter(f"unknown profile {profile!r}")
        profile = PROFILES[profile]
    if callable(profile):
        values = np.asarray(profile(grid.points), dtype=float)
    else:
        values = np.asarray(profile, dtype=float)
    if values.shape != (grid.size,):
        raise InvalidParameter(f"spectrum has shape {values.shape}, expected ({grid.size},)")
    if not np.all(np.isfinite(values)) or np.any(values < 0):
        raise InvalidParameter("spectrum must be finite and non-negative")
    return values


# --- random data -------------------------------------------------------------


def _sample_generator(seed: int, sample: int) -> np.random.Generator:
    # Philox is counter based; the (seed, sample) pair selects an independent stream
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(sample),))
    return np.random.Generator(np.random.Philox(ss))


def sample_noise(size: int, seed: int, sample: int, dist: Distribution = "gaussian") -> np.ndarray:
    """Unit-variance complex variables ``eta_k`` for one ensemble member.

    Mode ``j`` always consumes the ``j``-th draw of the member's stream, so
    values are reproducible per (seed, sample, mode).
    """
    rng = _sample_generator(seed, sample)
    if dist == "gaussian":
        z = rng.standard_normal((size, 2))
        return (z[:, 0] + 1j * z[:, 1]) / np.sqrt(2.0)
    if dist == "phase":
        return np.exp(2j * np.pi * rng.random(size))
    raise InvalidParameter(f"unknown distribution {dist!r}")


def sample_initial_data(n_in, params: SimParams, sample: int = 0) -> np.ndarray:
    """Draw ``b_k(0) = sqrt(n_in(k)) eta_k`` for one member of the ensemble."""
    n = spectrum_on_grid(n_in, params.grid)
    eta = sample_noise(params.grid.size, params.seed, sample, params.dist)
    return np.sqrt(n) * eta


def sample_ensemble(n_in, params: SimParams, samples) -> np.ndarray:
    """Stack initial data for the given sample indices, shape ``(M, N-1)``."""
    n = spectrum_on_grid(n_in, params.grid)
    eta = np.stack([sample_noise(params.grid.size, params.seed, s, params.dist) for s in samples])
    return np.sqrt(n)[None, :] * eta


@dataclass
class ModeField:
    """Complex amplitudes on the grid at a given time."""

    values: np.ndarray
    time: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=complex)
        if not np.all(np.isfinite(self.values)):
            raise InvalidParameter("mode field contains non-finite values")


def constrained_quadruples(N: int, exclude_degenerate: bool = True):
    """Integer labels ``(j, j1, j2, j3)`` with ``j1 - j2 + j3 = j (mod N)``.

    All four labels lie in ``1..N-1``.  With ``exclude_degenerate`` the pairs
    ``j1 = j2`` and ``j3 = j2`` are dropped, which leaves the sum used by the
    non-degenerate interaction.
    """
    j = np.arange(1, N)
    J, J1, J2 = (a.ravel() for a in np.meshgrid(j, j, j, indexing="ij"))
    J3 = (J - J1 + J2) % N
    keep = J3 != 0
    if exclude_degenerate:
        keep &= (J1 != J2) & (J3 != J2)
    return J[keep], J1[keep], J2[keep], J3[keep]
