"""End-to-end acceptance checks, one test per criterion.

Each test prints a single ``CRITERION <n>: PASS`` or ``CRITERION <n>: FAIL``
line with the measured quantities, then asserts the criterion.
"""

import math
import os
import time

import numpy as np

from fputkin.counting import bound_ratio_scan
from fputkin.diagrams.couples import iter_couples
from fputkin.diagrams.decorations import couple_decorations
from fputkin.diagrams.iterates import iterates, order_moments, pair_moments
from fputkin.diagrams.kernel import kernel_sums
from fputkin.diagrams.molecules import decorate, molecule_from_couple, validate_molecule
from fputkin.diagrams.preprocess import operation_del, removable_atoms
from fputkin.diagrams.trees import count_shapes_bruteforce, fuss_catalan, tree_shapes
from fputkin.kinetic import (
    collision_operator,
    collision_scale,
    discrete_collision,
    discrete_collision_summands,
    discrete_continuum_compare,
    fit_decay_exponent,
    second_order_predictor,
    sinc_concentration_error,
)
from fputkin.model import PROFILES, SimParams, dispersion, rayleigh_jeans_profile, resonance_mismatch
from fputkin.model import sample_initial_data, sample_noise, spectrum_on_grid
from fputkin.renormalization import leading_shift_constant, shifted_mismatch_modes, solve_frequency_shift
from fputkin.simulator import conserved_quantities, ensemble_spectrum, evolve, linear_solution, max_stable_dt

THREADS = os.cpu_count() or 1
# collected for the terminal summary, which shows them even without -s
CRITERION_LINES = []


def report(number, ok, detail):
    line = f"CRITERION {number}: {'PASS' if ok else 'FAIL'} ({detail})"
    CRITERION_LINES.append(line)
    print("\n" + line)
    assert ok, f"criterion {number}: {detail}"


def test_criterion_01_conservation():
    p = SimParams(64, gamma=0.6)
    b0 = sample_initial_data("default", p, 0)
    T = p.time_scale
    # the splitting is second order; an eighth of the stability limit keeps
    # the energy error well inside the budget at a cost of seconds
    dt = max_stable_dt(p, float(np.max(np.abs(b0)) ** 2)) / 8
    start = time.perf_counter()
    traj = evolve(b0, T, dt, p, np.linspace(0.0, T, 21))
    elapsed = time.perf_counter() - start
    action, energy = conserved_quantities(traj.snapshots, p)
    action_drift = float(np.max(np.abs(action - action[0])) / action[0])
    energy_drift = float(np.max(np.abs(energy - energy[0])) / abs(energy[0]))
    ok = action_drift <= 1e-8 and energy_drift <= 1e-6 and elapsed <= 120
    report(1, ok, f"action drift {action_drift:.2e}, energy drift {energy_drift:.2e}, {elapsed:.1f} s")


def test_criterion_02_linear_limit():
    p = SimParams(64, beta_override=0.0)
    b0 = sample_initial_data("default", p, 1)
    times = np.linspace(0.0, p.time_scale, 11)
    traj = evolve(b0, p.time_scale, 0.05, p, times)
    err = float(np.max(np.abs(traj.snapshots - linear_solution(b0, times, p))))
    report(2, err <= 1e-12, f"max deviation {err:.2e}")


def test_criterion_03_null_space():
    p = SimParams(64)
    xi = np.array([0.15, 0.35, 0.6, 0.85])

    def constant(x):
        return np.full_like(np.asarray(x, dtype=float), 0.8)

    def rayleigh_jeans(x):
        return rayleigh_jeans_profile(x, params=p)

    scale = collision_scale(rayleigh_jeans, xi, p)
    const_max, rj_ratio = 0.0, 0.0
    for method in ("sinc_broadened", "level_set"):
        const_max = max(const_max, float(np.max(np.abs(collision_operator(constant, xi, method, p).values))))
        rj = collision_operator(rayleigh_jeans, xi, method, p).values
        rj_ratio = max(rj_ratio, float(np.max(np.abs(rj) / scale)))

    # discrete method: the broadened lattice sum and the exact-resonance lattice sum
    N = 24
    q = SimParams(N)
    values = np.random.default_rng(5).uniform(0.3, 2.0, N - 1)
    omega = dispersion(q.grid.points, q)
    magnitude = max(
        math.fsum(discrete_collision_summands(values, j, N, q, "interaction", "sinc", 200.0, 1e-12, magnitude=True))
        for j in range(1, N)
    )
    broadened = discrete_collision(values, N, q)
    resonant = discrete_collision(values, N, q, kernel="resonant")
    action_sum = abs(math.fsum(broadened)) / magnitude
    broadened_energy = abs(math.fsum(omega * broadened)) / magnitude
    resonant_sums = max(abs(math.fsum(resonant)), abs(math.fsum(omega * resonant))) / magnitude
    ok = const_max == 0.0 and rj_ratio <= 1e-4 and action_sum <= 1e-13 and resonant_sums <= 1e-12
    report(
        3,
        ok,
        f"|K(const)| {const_max:.1e}, |K(c/w)|/scale {rj_ratio:.1e}, sum K {action_sum:.1e}, "
        f"resonant sums {resonant_sums:.1e}, broadened energy sum {broadened_energy:.1e}",
    )


def test_criterion_04_sinc_concentration():
    functions = {
        "gaussian": lambda x: math.exp(-x * x),
        "lorentzian": lambda x: 1.0 / (1.0 + x * x),
        "shifted": lambda x: math.exp(-((x - 0.3) ** 2)) * math.cos(x),
    }
    ts = np.geomspace(10.0, 1e4, 9)
    exponents = {}
    start = time.perf_counter()
    for name, f in functions.items():
        exponents[name] = fit_decay_exponent(ts, [sinc_concentration_error(f, t) for t in ts])
    elapsed = time.perf_counter() - start
    ok = all(0.4 <= e <= 1.1 for e in exponents.values())
    report(4, ok, ", ".join(f"{k} {v:.3f}" for k, v in exponents.items()) + f", {elapsed:.1f} s")


def test_criterion_05_kinetic_trend():
    sizes = (64, 128, 256)
    M = 2000
    start = time.perf_counter()
    finest = SimParams(sizes[-1])
    K_fine = collision_operator(PROFILES["default"], finest.grid.points, "level_set", finest, sing_tol=1e-4).values
    distances = []
    for N in sizes:
        p = SimParams(N, dist="phase", seed=11)
        K = K_fine[(sizes[-1] // N) * np.arange(1, N) - 1]
        t = 0.01 * p.T_kin
        ens = ensemble_spectrum("default", p, M, [0.0, t], threads=THREADS)
        n = spectrum_on_grid("default", p.grid)
        rescaled = (ens.mean[-1] - n) * p.T_kin / t
        distances.append(float(np.max(np.abs(rescaled - K)) / np.max(np.abs(K))))
        print(f"N={N}: relative distance {distances[-1]:.3f}, excluded {len(ens.excluded)}")
    elapsed = time.perf_counter() - start
    ok = distances[0] <= 0.35 and all(b <= a for a, b in zip(distances, distances[1:])) and elapsed <= 3600
    report(5, ok, "distances " + ", ".join(f"{d:.3f}" for d in distances) + f", {elapsed:.0f} s")


def test_criterion_06_predictor_vs_monte_carlo():
    p = SimParams(64, gamma=0.6, seed=3)
    t = 0.01 * p.T_kin
    start = time.perf_counter()
    ens = ensemble_spectrum("default", p, 2000, [0.0, t], threads=THREADS)
    pred = second_order_predictor("default", t, None, p, form="exact")
    n = spectrum_on_grid("default", p.grid)
    within = np.abs(ens.mean[-1] - (n + pred.values)) <= 3.0 * ens.stderr[-1]
    fraction = float(np.mean(within))
    elapsed = time.perf_counter() - start
    report(6, fraction >= 0.9 and elapsed <= 900, f"fraction within 3 stderr {fraction:.3f}, {elapsed:.0f} s")


def test_criterion_07_counting_bounds():
    sizes = (64, 128, 256)
    # T = N^0.5 is doubled upwards; T = N^0.8 is approached from T / 2 so that
    # both members of each pair respect T <= N^(1 - eps)
    T_values = {N: [N**0.5, 2 * N**0.5, N**0.8 / 2, N**0.8] for N in sizes}
    start = time.perf_counter()
    rows = bound_ratio_scan(sizes, T_values=T_values)
    elapsed = time.perf_counter() - start
    best = {(r.N, r.T, r.set_name): r.max_ratio for r in rows}
    growth = []
    for N in sizes:
        Ts = T_values[N]
        for lo, hi in ((Ts[0], Ts[1]), (Ts[2], Ts[3])):
            for name in ("S3", "S2+", "S2-"):
                growth.append(best[(N, hi, name)] / best[(N, lo, name)])
    finite = all(np.isfinite(v) for v in best.values())
    headline = max(best.values())
    ok = finite and max(growth) <= 2.0 and elapsed <= 600
    for N in sizes:
        for name in ("S3", "S2+", "S2-"):
            print(f"N={N} {name}: " + ", ".join(f"T={T:.1f} ratio {best[(N, T, name)]:.3f}" for T in T_values[N]))
    report(7, ok, f"max ratio {headline:.3f}, max growth under doubling {max(growth):.3f}, {elapsed:.0f} s")


def test_criterion_08_discrete_to_continuum():
    pairs = {
        "sine/gaussian": (
            lambda x, y: np.sin(np.pi * x) ** 2 * np.sin(np.pi * y) ** 2,
            lambda z: np.exp(-z * z),
        ),
        "cosine/lorentzian": (
            lambda x, y: 1.0 + np.cos(2 * np.pi * x) * np.cos(2 * np.pi * y),
            lambda z: 1.0 / (1.0 + z * z) ** 2,
        ),
    }
    T = 8.0
    start = time.perf_counter()
    ok = True
    details = []
    for name, (F, chi) in pairs.items():
        errors = [abs(discrete_continuum_compare(F, chi, 0.25, T, N)[2]) for N in (64, 128, 256)]
        # monotone decrease up to a factor of two of noise between neighbours
        steady = all(b <= 2.0 * a for a, b in zip(errors, errors[1:])) and errors[-1] < errors[0]
        ok &= steady
        details.append(f"{name} " + ", ".join(f"{e:.2e}" for e in errors))
    elapsed = time.perf_counter() - start
    report(8, ok and elapsed <= 300, "; ".join(details) + f", {elapsed:.0f} s")


def test_criterion_09_combinatorics():
    start = time.perf_counter()
    counts = [len(tree_shapes(n)) for n in range(5)]
    trees_ok = counts == [1, 1, 3, 12, 55] and all(
        count_shapes_bruteforce(n) == fuss_catalan(n) == c for n, c in enumerate(counts)
    )
    molecules = 0
    for n in range(1, 5):
        for couple in iter_couples(n, with_degeneracies=False):
            validate_molecule(molecule_from_couple(couple, validate=False), n)
            molecules += 1
    del_ok, pair_steps, runs = True, 0, 0
    for n in (1, 2, 3):
        for couple in iter_couples(n):
            if not couple.degenerate_nodes:
                continue
            mol = molecule_from_couple(couple)
            for labels in couple_decorations(couple, 1, 6)[:2]:
                out, ledger = operation_del(decorate(mol, labels))
                runs += 1
                del_ok &= not removable_atoms(out)
                for step in ledger:
                    if len(step.atoms) == 2:
                        pair_steps += 1
                        del_ok &= step.dchi == -2
    elapsed = time.perf_counter() - start
    ok = trees_ok and del_ok and pair_steps > 0 and elapsed <= 120
    report(9, ok, f"trees {counts}, {molecules} molecules valid, {runs} DEL runs, {pair_steps} pair steps, {elapsed:.0f} s")


def test_criterion_10_diagrams_vs_monte_carlo():
    p = SimParams(8, seed=7)
    t = 0.5
    M = 5000
    start = time.perf_counter()
    eta = np.stack([sample_noise(7, p.seed, m, "gaussian") for m in range(M)])
    samples = iterates(eta, p, "default", t, None)
    per_pair = pair_moments(samples)
    per_order = order_moments(samples)
    worst = 0.0
    floor = 1e-12  # absolute allowance for moments that vanish sample by sample
    couples = [c for n in range(3) for c in iter_couples(n)]
    for j in range(1, 8):
        sums = kernel_sums(couples, t, t, j / 8, None, p, "default")
        for key, (mean, se) in per_pair.items():
            diff = sums.get(key, 0j) - mean[j - 1]
            worst = max(
                worst,
                abs(diff.real) / (se[j - 1].real + floor / 3),
                abs(diff.imag) / (se[j - 1].imag + floor / 3),
            )
        for order, (mean, se) in per_order.items():
            total = sum(v for (a, b), v in sums.items() if a + b == order)
            diff = total - mean[j - 1]
            worst = max(worst, abs(diff.real) / (se[j - 1].real + floor / 3), abs(diff.imag) / (se[j - 1].imag + floor / 3))
    elapsed = time.perf_counter() - start
    report(10, worst <= 3.0 and elapsed <= 600, f"largest |kernel sum - MC| / stderr {worst:.2f}, {elapsed:.0f} s")


def test_criterion_11_gauge_identities():
    rng = np.random.default_rng(2024)
    p = SimParams(64)
    shift = solve_frequency_shift("default", p, 2)
    worst = 0.0
    for _ in range(10_000):
        j1, j2, j3 = (int(v) for v in rng.integers(1, 64, size=3))
        j = (j1 - j2 + j3) % 64
        if j == 0:
            continue
        s = float(rng.uniform(0.0, 1.0))
        A = float(shift(s))
        shifted = shifted_mismatch_modes(j, j1, j2, j3, shift, s, p)
        plain = resonance_mismatch(j / 64, j1 / 64, j2 / 64, j3 / 64, p)
        worst = max(worst, abs(shifted - plain * A) / (8.0 * abs(A) + 1e-300))
    zero = float(shift(0.0))
    order0 = solve_frequency_shift("default", p, 0)
    grid = np.linspace(0.0, 1.0, 101)
    closed = leading_shift_constant(spectrum_on_grid("default", p.grid), p) * p.beta * p.time_scale * grid
    exact = bool(np.array_equal(order0(grid), closed))
    ok = worst <= 8 * np.finfo(float).eps and zero == 0.0 and exact
    report(11, ok, f"max |shifted - Omega A| / (8|A|) {worst:.1e}, A(0) = {zero}, order-0 closed form exact: {exact}")
