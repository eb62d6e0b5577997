"""Collision operator, kinetic time stepping and the second-order predictor.

The collision operator is

    K(phi)(xi) = int int W phi phi1 phi2 phi3 (1/phi - 1/phi1 + 1/phi2 - 1/phi3)
                 delta(w - w1 + w2 - w3) dxi1 dxi2,       xi3 = xi - xi1 + xi2 mod 1.

``W`` is either the squared interaction coefficient (default, the weight that
makes the finite-``N`` increment tend to ``(t / T_kin) K``) or the constant 1.
The delta function is resolved three ways: a sinc^2 broadening integrated by
composite Gauss-Legendre quadrature, an exact level-set (co-area) reduction,
and a plain lattice sum.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from .errors import InvalidParameter, PositivityLost, QuadratureFailed
from .model import SimParams, dispersion, spectrum_on_grid
from .renormalization import (
    FrequencyShift,
    bracket,
    phase_integrals,
    quadruple_table,
    second_order_weights,
    zero_shift,
)

Method = Literal["sinc_broadened", "level_set", "discrete_sum"]
Weight = Literal["interaction", "unit"]
DEFAULT_PARAMS = SimParams(N=64)


# --- spectra as functions ----------------------------------------------------


class SpectrumInterpolant:
    """Continuous spectrum built from nodal values.

    The product ``w(xi) n(xi)`` is interpolated by a cubic spline and divided by
    ``w`` again, so spectra like ``c / w`` that blow up at the end points are
    represented without loss.
    """

    def __init__(self, nodes, values, params: SimParams | None = None):
        self.nodes = np.asarray(nodes, dtype=float)
        self.values = np.asarray(values, dtype=float)
        self.params = params
        if self.nodes.shape != self.values.shape or self.nodes.size < 4:
            raise InvalidParameter("interpolant needs at least four matching nodes and values")
        omega = dispersion(self.nodes, params)
        order = np.argsort(self.nodes)
        self.nodes, self.values, omega = self.nodes[order], self.values[order], omega[order]
        self._spline = CubicSpline(self.nodes, omega * self.values, bc_type="not-a-knot")

    @classmethod
    def from_grid(cls, values, N: int, params: SimParams | None = None) -> "SpectrumInterpolant":
        return cls(np.arange(1, N) / N, values, params)

    def __call__(self, xi):
        # outside the node range ``w n`` continues linearly from the end node,
        # floored at the constant-``n`` continuation so it stays positive
        xi = np.asarray(xi, dtype=float)
        inner = np.clip(xi, self.nodes[0], self.nodes[-1])
        omega = dispersion(xi, self.params)
        linear = self._spline(inner) + self._spline(inner, 1) * (xi - inner)
        floor = self._interp_n(inner) * omega
        product = np.where(xi == inner, self._spline(inner), np.maximum(linear, floor))
        return product / omega

    def _interp_n(self, xi):
        return self._spline(xi) / dispersion(xi, self.params)


def as_profile(phi, params: SimParams | None = None) -> Callable[[np.ndarray], np.ndarray]:
    """Return a callable spectrum; grid arrays are interpolated."""
    if callable(phi):
        return phi
    values = np.asarray(phi, dtype=float)
    return SpectrumInterpolant.from_grid(values, values.size + 1, params)


def _check_positive(phi: Callable, samples: int = 257) -> None:
    xi = (np.arange(samples) + 0.5) / samples
    vals = np.asarray(phi(xi), dtype=float)
    if not np.all(np.isfinite(vals)) or np.any(vals <= 0):
        raise InvalidParameter("spectrum must be positive on (0, 1)")


def _weight_coefficient(params: SimParams | None) -> float:
    kappa = 1.0 if params is None else params.kappa
    return (3.0 / (4.0 * kappa**2)) ** 2


def _integrand(phi, xi, x1, x2, params, weight: Weight):
    """Collision density and resonance mismatch at ``(xi1, xi2) = (x1, x2)``."""
    x3 = np.mod(xi - x1 + x2, 1.0)
    w0 = dispersion(xi, params)
    w1, w2, w3 = dispersion(x1, params), dispersion(x2, params), dispersion(x3, params)
    # xi3 = 0 is a null set where spectra like c / w are undefined
    x3 = np.where(x3 == 0.0, 0.5, x3)
    density = bracket(phi(xi), phi(x1), phi(x2), phi(x3))
    if weight == "interaction":
        density = _weight_coefficient(params) * ((w0 * w2) * (w1 * w3)) * density
    elif weight != "unit":
        raise InvalidParameter(f"unknown weight {weight!r}")
    density = np.where(w3 == 0.0, 0.0, density)
    return density, (w0 - w1) + (w2 - w3)


def _abs_integrand(phi, xi, x1, x2, params, weight: Weight):
    """Same as :func:`_integrand` with the bracket replaced by its absolute terms."""
    x3 = np.mod(xi - x1 + x2, 1.0)
    x3 = np.where(x3 == 0.0, 0.5, x3)
    a, b, c, d = phi(xi), phi(x1), phi(x2), phi(x3)
    mag = np.abs(a * d * b) + np.abs(a * d * c) + np.abs(b * c * d) + np.abs(b * c * a)
    if weight == "interaction":
        w = dispersion(np.stack(np.broadcast_arrays(xi, x1, x2, x3)), params)
        mag = _weight_coefficient(params) * np.prod(w, axis=0) * mag
    return mag


def sinc_kernel(x, tau: float):
    """Broadened delta ``(tau / 2 pi) sinc^2(tau x / 2)``."""
    return tau / (2.0 * np.pi) * np.sinc(tau * np.asarray(x) / (2.0 * np.pi)) ** 2


@dataclass
class CollisionResult:
    xi: np.ndarray
    values: np.ndarray
    method: str
    broadening: float | None = None
    quadrature_error_estimate: np.ndarray | None = None
    operator_scale: np.ndarray | None = None
    excised_mass: np.ndarray | None = None
    weight: str = "interaction"
    meta: dict = field(default_factory=dict)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["k", "value", "error_estimate", "method", "tau"])
            err = self.quadrature_error_estimate
            for i, (x, v) in enumerate(zip(self.xi, self.values)):
                e = 0.0 if err is None else err[i]
                tau = "" if self.broadening is None else f"{self.broadening:.17g}"
                w.writerow([f"{x:.17g}", f"{v:.17g}", f"{e:.17g}", self.method, tau])


# --- sinc-broadened quadrature -------------------------------------------------


def _gauss_legendre_nodes(panels: int, order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(0.0, 1.0, panels + 1)
    h = np.diff(edges)
    nodes = (edges[:-1, None] + 0.5 * h[:, None] * (x[None, :] + 1.0)).ravel()
    weights = (0.5 * h[:, None] * w[None, :]).ravel()
    return nodes, weights


def _sinc_value(phi, xi, tau, params, weight, panels, order, chunk=256):
    nodes, weights = _gauss_legendre_nodes(panels, order)
    total = 0.0
    scale = 0.0
    for lo in range(0, nodes.size, chunk):
        x1 = nodes[lo : lo + chunk, None]
        w1 = weights[lo : lo + chunk, None]
        dens, omega = _integrand(phi, xi, x1, nodes[None, :], params, weight)
        ker = sinc_kernel(omega, tau)
        total += float(np.sum(w1 * weights[None, :] * dens * ker))
        mag = _abs_integrand(phi, xi, x1, nodes[None, :], params, weight)
        scale += float(np.sum(w1 * weights[None, :] * mag * ker))
    return total, scale


def _sinc_broadened(phi, xi, tau, params, weight, panels, order):
    if panels is None:
        # roughly one panel per sinc^2 oscillation along the steepest direction
        freq = 2.0 if params is None else params.frequency_scale
        panels = max(64, int(math.ceil(tau * freq / 4.0)))
    fine, scale = _sinc_value(phi, xi, tau, params, weight, panels, order)
    coarse, _ = _sinc_value(phi, xi, tau, params, weight, max(1, panels // 2), order)
    return fine, abs(fine - coarse), scale


# --- level-set reduction ---------------------------------------------------------


def _level_set_inner(phi, xi, x1, params, weight, sing_tol, samples):
    """Sum over roots xi2 of F / |dOmega/dxi2| at fixed xi1.

    Returns (kept, excised) contributions.
    """
    scale = 2.0 if params is None else params.frequency_scale
    grid = np.linspace(0.0, 1.0, samples)
    kink = np.mod(x1 - xi, 1.0)
    grid = np.unique(np.concatenate([grid, [kink]]))
    grid = grid[(grid > 0.0) & (grid < 1.0)]

    def mismatch(x2):
        return _integrand(phi, xi, x1, x2, params, weight)[1]

    values = mismatch(grid)
    kept = 0.0
    excised = 0.0
    roots: list[float] = []
    for i in np.nonzero(values == 0.0)[0]:
        roots.append(float(grid[i]))
    for i in np.nonzero(values[:-1] * values[1:] < 0.0)[0]:
        try:
            roots.append(brentq(mismatch, grid[i], grid[i + 1], xtol=1e-15, rtol=1e-15))
        except (ValueError, RuntimeError) as exc:
            raise QuadratureFailed(f"level-set root search failed at xi1={x1}: {exc}") from exc
    for r in roots:
        x3 = np.mod(xi - x1 + r, 1.0)
        slope = scale * np.pi * abs(np.cos(np.pi * r) - np.cos(np.pi * x3))
        dens = float(_integrand(phi, xi, x1, r, params, weight)[0])
        if dens == 0.0:
            continue
        d_set = xi - x1 + 2.0 * r
        dist = abs(d_set - 2.0 * np.round(d_set / 2.0))
        if dist < sing_tol or abs(x1 - xi) < sing_tol or slope == 0.0:
            if slope > 0.0:
                excised += abs(dens) / slope
            continue
        kept += dens / slope
    return kept, excised


def _level_set(phi, xi, params, weight, sing_tol, samples, epsabs, epsrel):
    def inner(x1):
        return _level_set_inner(phi, xi, x1, params, weight, sing_tol, samples)[0]

    val, err = quad(inner, 0.0, 1.0, points=[xi], limit=400, epsabs=epsabs, epsrel=epsrel)
    # excised contribution on a fixed rule, reported and not added
    nodes, weights = _gauss_legendre_nodes(40, 5)
    excised = sum(
        w * _level_set_inner(phi, xi, x, params, weight, sing_tol, samples)[1] for x, w in zip(nodes, weights)
    )
    return val, err, excised


# --- lattice sum ---------------------------------------------------------------------


def discrete_collision_summands(values, j: int, N: int, params, weight, kernel, tau, resonance_tol, magnitude=False):
    """All summands of the lattice collision sum at output label ``j``.

    With ``magnitude`` the bracket is replaced by the sum of the absolute
    values of its four terms, which gives the operator scale.
    """
    full = np.concatenate([[0.0], np.asarray(values, dtype=float)])
    labels = np.arange(1, N)
    J1, J2 = np.meshgrid(labels, labels, indexing="ij")
    J3 = (j - J1 + J2) % N
    ok = J3 != 0
    J1, J2, J3 = J1[ok], J2[ok], J3[ok]
    omega = dispersion(np.arange(N) / N, params)
    a, b, c, d = full[j], full[J1], full[J2], full[J3]
    if magnitude:
        dens = np.abs(a * d * b) + np.abs(a * d * c) + np.abs(b * c * d) + np.abs(b * c * a)
    else:
        dens = bracket(a, b, c, d)
    if weight == "interaction":
        dens = _weight_coefficient(params) * ((omega[j] * omega[J2]) * (omega[J1] * omega[J3])) * dens
    mismatch = (omega[j] - omega[J1]) + (omega[J2] - omega[J3])
    if kernel == "sinc":
        ker = sinc_kernel(mismatch, tau)
    elif kernel == "resonant":
        ker = (np.abs(mismatch) <= resonance_tol).astype(float)
    else:
        raise InvalidParameter(f"unknown lattice kernel {kernel!r}")
    return dens * ker / (N * N)


def discrete_collision(values, N: int, params=None, weight: Weight = "interaction", kernel="sinc", tau=200.0, resonance_tol=1e-12):
    """Lattice collision sum at every grid label, each summed with ``math.fsum``."""
    return np.array(
        [
            math.fsum(discrete_collision_summands(values, j, N, params, weight, kernel, tau, resonance_tol))
            for j in range(1, N)
        ]
    )


# --- public entry point ---------------------------------------------------------------


def collision_operator(
    phi,
    xi,
    method: Method = "level_set",
    params: SimParams | None = None,
    *,
    weight: Weight = "interaction",
    tau: float | None = None,
    sing_tol: float | None = None,
    panels: int | None = None,
    order: int = 8,
    extrapolate: bool = False,
    samples: int = 1024,
    epsabs: float = 1e-8,
    epsrel: float = 1e-6,
    kernel: str = "sinc",
    resonance_tol: float = 1e-12,
) -> CollisionResult:
    """Evaluate ``K(phi)`` at the wavenumbers ``xi``.

    ``phi`` is a callable on ``(0, 1)`` or an array of grid values.  For the
    ``discrete_sum`` method the wavenumbers must be grid points ``j / N`` of the
    lattice carried by ``params`` and grid arrays are used without
    interpolation.  ``extrapolate`` applies one Richardson step in ``tau`` to
    the sinc method (values at ``tau`` and ``2 tau``).
    """
    xi_arr = np.atleast_1d(np.asarray(xi, dtype=float))
    if np.any((xi_arr <= 0.0) | (xi_arr >= 1.0)):
        raise InvalidParameter("evaluation wavenumbers must lie in (0, 1)")

    if method == "discrete_sum":
        p = params or DEFAULT_PARAMS
        N = p.N
        if callable(phi):
            values = np.asarray(phi(p.grid.points), dtype=float)
        else:
            values = np.asarray(phi, dtype=float)
        if values.shape != (N - 1,) or np.any(values <= 0):
            raise InvalidParameter("lattice spectrum must be positive with N-1 entries")
        labels = np.rint(xi_arr * N).astype(int)
        if np.any(np.abs(labels / N - xi_arr) > 1e-12):
            raise InvalidParameter("discrete_sum evaluates only on grid points")
        tau = 200.0 if tau is None else tau
        vals, scales = [], []
        for j in labels:
            summands = discrete_collision_summands(values, j, N, p, weight, kernel, tau, resonance_tol)
            vals.append(math.fsum(summands))
            mags = discrete_collision_summands(values, j, N, p, weight, kernel, tau, resonance_tol, magnitude=True)
            scales.append(math.fsum(mags))
        return CollisionResult(
            xi_arr,
            np.array(vals),
            method,
            broadening=tau if kernel == "sinc" else None,
            quadrature_error_estimate=np.zeros(len(vals)),
            operator_scale=np.array(scales),
            weight=weight,
            meta={"kernel": kernel, "N": N},
        )

    profile = as_profile(phi, params)
    _check_positive(profile)
    values, errors, scales, excised = [], [], [], []
    if method == "sinc_broadened":
        tau = 200.0 if tau is None else float(tau)
        for x in xi_arr:
            v, e, s = _sinc_broadened(profile, x, tau, params, weight, panels, order)
            if extrapolate:
                v2, e2, _ = _sinc_broadened(profile, x, 2.0 * tau, params, weight, None if panels is None else 2 * panels, order)
                e = abs(v2 - v) + 2.0 * e2 + e
                v = 2.0 * v2 - v
            values.append(v)
            errors.append(e)
            scales.append(s)
        return CollisionResult(
            xi_arr, np.array(values), method, tau, np.array(errors), np.array(scales), None, weight,
            meta={"extrapolated": extrapolate},
        )
    if method == "level_set":
        if sing_tol is None:
            sing_tol = 1.0 / (params or DEFAULT_PARAMS).time_scale
        for x in xi_arr:
            v, e, m = _level_set(profile, x, params, weight, sing_tol, samples, epsabs, epsrel)
            values.append(v)
            errors.append(e)
            excised.append(m)
        return CollisionResult(
            xi_arr, np.array(values), method, None, np.array(errors), None, np.array(excised), weight,
            meta={"sing_tol": sing_tol},
        )
    raise InvalidParameter(f"unknown collision method {method!r}")


def collision_scale(phi, xi, params: SimParams | None = None, weight: Weight = "interaction", tau: float = 200.0) -> np.ndarray:
    """Operator scale: the sinc-broadened integral of the absolute bracket terms."""
    res = collision_operator(phi, xi, "sinc_broadened", params, weight=weight, tau=tau)
    return res.operator_scale


# --- kinetic equation ------------------------------------------------------------------


@dataclass
class WKEResult:
    times: np.ndarray
    nodes: np.ndarray
    spectra: np.ndarray  # (n_times, n_nodes)
    action: np.ndarray
    energy: np.ndarray
    method: str


def _node_integral(nodes, values):
    spline = CubicSpline(nodes, values, bc_type="not-a-knot")
    return float(spline.integrate(0.0, 1.0))


def wke_solve(
    n_in,
    t_end: float,
    params: SimParams | None = None,
    *,
    nodes=None,
    method: Method = "level_set",
    dt: float | None = None,
    max_relative_change: float = 0.05,
    save_every: int = 1,
    **collision_options,
) -> WKEResult:
    """Advance ``dn/dt = K(n)`` with classical RK4 on a set of nodes.

    Between nodes the state is carried by :class:`SpectrumInterpolant`.  With
    ``dt=None`` the step is chosen so that no node changes by more than
    ``max_relative_change`` per step, estimated from the first stage.
    """
    if t_end < 0:
        raise InvalidParameter("t_end must be non-negative")
    nodes = np.linspace(0.0, 1.0, 18)[1:-1] if nodes is None else np.asarray(nodes, dtype=float)
    if method == "discrete_sum":
        raise InvalidParameter("the kinetic solver needs a continuum collision method")
    if callable(n_in):
        n = np.asarray(n_in(nodes), dtype=float)
    else:
        n = np.asarray(n_in, dtype=float)
    if np.any(n <= 0):
        raise PositivityLost("initial spectrum is not positive", 0.0)
    omega = dispersion(nodes, params)

    def rate(state):
        if np.any(state <= 0) or not np.all(np.isfinite(state)):
            raise PositivityLost("kinetic spectrum lost positivity inside a step", t + h)
        profile = SpectrumInterpolant(nodes, state, params)
        return collision_operator(profile, nodes, method, params, **collision_options).values

    times, spectra = [0.0], [n.copy()]
    t = h = 0.0
    step = 0
    while t < t_end - 1e-14 * max(1.0, t_end):
        k1 = rate(n)
        h = dt
        if h is None:
            growth = np.max(np.abs(k1) / n)
            h = t_end - t if growth == 0 else min(t_end - t, max_relative_change / growth)
        h = min(h, t_end - t)
        k2 = rate(n + 0.5 * h * k1)
        k3 = rate(n + 0.5 * h * k2)
        k4 = rate(n + h * k3)
        n = n + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t += h
        step += 1
        if np.any(n <= 0) or not np.all(np.isfinite(n)):
            raise PositivityLost("kinetic spectrum lost positivity", t)
        if step % save_every == 0 or t >= t_end:
            times.append(t)
            spectra.append(n.copy())
    spectra_arr = np.array(spectra)
    action = np.array([_node_integral(nodes, s) for s in spectra_arr])
    energy = np.array([_node_integral(nodes, omega * s) for s in spectra_arr])
    return WKEResult(np.array(times), nodes, spectra_arr, action, energy, method)


# --- finite-N predictor ------------------------------------------------------------------


@dataclass
class PredictorResult:
    k: np.ndarray
    values: np.ndarray
    resonant: np.ndarray
    s: float
    tau: float
    form: str


def second_order_predictor(
    n_in,
    t: float,
    shift: FrequencyShift | None,
    params: SimParams,
    form: Literal["stated", "exact"] = "stated",
    resonance_tol: float = 1e-12,
) -> PredictorResult:
    """Second-order increment ``S_k`` of ``E|b_k(t)|^2`` on the grid.

    ``form='stated'`` uses ``sinc^2(W tau / 2) (tau / (T s))^2`` with
    ``tau = T s + A(s)`` and leaves exact resonances out of the main sum (their
    size is returned in ``resonant``).  ``form='exact'`` is the Gaussian
    expectation of the first two iterates, ``|int_0^s exp(i W (T s' + A(s'))) ds'|^2``,
    with exact resonances included; the two agree when ``A = 0``.
    """
    T = params.time_scale
    if not 0.0 <= t <= T * (1 + 1e-12):
        raise InvalidParameter("t must lie in [0, T]")
    shift = zero_shift() if shift is None else shift
    n = spectrum_on_grid(n_in, params.grid)
    s = t / T
    tau = T * s + float(shift(s))
    table = quadruple_table(params)
    weights = second_order_weights(n, table)
    P = params.beta * T / params.N
    resonant_mask = np.abs(table.mismatch) <= resonance_tol
    size = params.N - 1
    if form == "stated":
        if s == 0.0:
            factor = np.zeros_like(weights)
        else:
            factor = s * s * sinc_factor(table.mismatch, tau) * (tau / (T * s)) ** 2
        main = np.where(resonant_mask, 0.0, weights * factor)
        resonant = np.where(resonant_mask, weights * s * s, 0.0)
    elif form == "exact":
        s_grid = np.linspace(0.0, s, 1025) if s > 0 else np.array([0.0, 0.0])
        if s > 0:
            phase = T * s_grid + shift(s_grid)
            I = _phase_integral_final(table.mismatch, s_grid, phase)
            main = weights * I
        else:
            main = np.zeros_like(weights)
        resonant = np.where(resonant_mask, main, 0.0)
    else:
        raise InvalidParameter(f"unknown predictor form {form!r}")
    values = 2.0 * P * P * np.bincount(table.j - 1, weights=main, minlength=size)
    res = 2.0 * P * P * np.bincount(table.j - 1, weights=resonant, minlength=size)
    return PredictorResult(params.grid.points, values, res, s, tau, form)


def _phase_integral_final(mismatch, s_grid, phase, chunk=8192):
    keys, inverse = np.unique(mismatch, return_inverse=True)
    out = np.empty(keys.size)
    for lo in range(0, keys.size, chunk):
        I = phase_integrals(keys[lo : lo + chunk], s_grid, phase)[:, -1]
        out[lo : lo + chunk] = I.real**2 + I.imag**2
    return out[inverse]


def sinc_factor(mismatch, tau: float):
    """``sinc^2(W tau / 2)`` with ``sinc(x) = sin(x) / x``."""
    return np.sinc(np.asarray(mismatch) * tau / (2.0 * np.pi)) ** 2


def kinetic_prediction(n_in, t: float, params: SimParams, method: Method = "level_set", **options) -> np.ndarray:
    """``(t / T_kin) K(n_in)`` on the interior grid."""
    n = spectrum_on_grid(n_in, params.grid)
    profile = n_in if callable(n_in) else SpectrumInterpolant.from_grid(n, params.N, params)
    if isinstance(n_in, str):
        from .model import PROFILES

        profile = PROFILES[n_in]
    res = collision_operator(profile, params.grid.points, method, params, **options)
    return t / params.T_kin * res.values


# --- discrete versus continuum ---------------------------------------------------------------


def discrete_continuum_compare(F, chi, k: float, T: float, N: int, params: SimParams | None = None, panels: int = 256, order: int = 8):
    """Lattice sum and integral of ``F(x, y) chi(T Omega(k, x, y, k - x + y))``.

    Returns ``(discrete / N^2, integral, difference)``.
    """
    labels = np.arange(1, N)
    X, Y = np.meshgrid(labels / N, labels / N, indexing="ij")
    jz = (int(round(k * N)) - labels[:, None] + labels[None, :]) % N
    ok = jz != 0
    w = lambda x: dispersion(x, params)  # noqa: E731
    omega = (w(k) - w(X)) + (w(Y) - w(jz / N))
    summand = np.where(ok, F(X, Y) * chi(T * omega), 0.0)
    discrete = math.fsum(summand.ravel()) / (N * N)

    nodes, weights = _gauss_legendre_nodes(panels, order)
    total = 0.0
    for lo in range(0, nodes.size, 512):
        x = nodes[lo : lo + 512, None]
        y = nodes[None, :]
        z = np.mod(k - x + y, 1.0)
        om = (w(k) - w(x)) + (w(y) - w(z))
        total += float(np.sum(weights[lo : lo + 512, None] * weights[None, :] * F(x, y) * chi(T * om)))
    return discrete, total, discrete - total


# --- sinc^2 concentration ----------------------------------------------------------------------


def sinc_concentration_error(f: Callable[[float], float], t: float, cutoff: float = 1.0) -> float:
    """``|t int sinc^2(t x / 2) f(x) dx - 2 pi f(0)|`` over the real line.

    Uses ``t sinc^2(t x / 2) = 2 (1 - cos(t x)) / (t x^2)``.  The part ``|x| < cutoff``
    is integrated directly; the tails use the Fourier-weighted rule for the
    cosine term.
    """

    def even(x):
        return f(x) + f(-x)

    def core(x):
        if t * x < 1e-4:
            return t * even(x)
        return 2.0 * (1.0 - math.cos(t * x)) / (t * x * x) * even(x)

    n_osc = max(50, int(t * cutoff / math.pi) + 50)
    inner, _ = quad(core, 0.0, cutoff, limit=4 * n_osc)
    tail_plain, _ = quad(lambda x: 2.0 * even(x) / (t * x * x), cutoff, np.inf, limit=200)
    tail_cos, _ = quad(lambda x: 2.0 * even(x) / (t * x * x), cutoff, np.inf, weight="cos", wvar=t, limlst=100)
    total = inner + tail_plain - tail_cos
    return abs(total - 2.0 * np.pi * f(0.0))


def fit_decay_exponent(ts, errors) -> float:
    """Least-squares slope ``p`` of ``log error = c - p log t``."""
    slope, _ = np.polyfit(np.log(ts), np.log(errors), 1)
    return -float(slope)
