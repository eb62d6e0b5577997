import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fputkin.diagrams.chains import (
    bond_gap,
    cl_chains,
    find_chains,
    is_twist_admissible,
    splice,
    unit_twist,
)
from fputkin.diagrams.couples import EnhancedCouple, enumerate_couples, iter_couples, trivial_couple
from fputkin.diagrams.decorations import couple_decorations, is_valid_decoration
from fputkin.diagrams.iterates import iterates
from fputkin.diagrams.kernel import couple_time_factor, evaluate_couple_kernel, kernel_sums, node_mismatch
from fputkin.diagrams.molecules import decorate, molecule_from_couple, reconstruct_couples, validate_molecule
from fputkin.diagrams.preprocess import (
    ReductionLog,
    check_reduction_log,
    expected_pairings,
    greedy_reduction,
    leaf_moment,
    operation_del,
    removable_atoms,
)
from fputkin.diagrams.trees import (
    EnhancedTree,
    count_shapes_bruteforce,
    degenerate_markings,
    enumerate_trees,
    fuss_catalan,
    tree_shapes,
)
from fputkin.errors import InvalidParameter, NotAdmissible
from fputkin.kinetic import second_order_predictor
from fputkin.model import SimParams, dispersion, sample_noise, spectrum_on_grid

# -- independent enumeration helpers ----------------------------------------------------


def grow_shapes(n):
    """Scale-n shapes obtained by replacing one leaf of a scale-(n-1) shape."""
    if n == 0:
        return {None}

    def expansions(shape):
        if shape is None:
            yield (None, None, None)
            return
        for i in range(3):
            for sub in expansions(shape[i]):
                yield shape[:i] + (sub,) + shape[i + 1 :]

    return {new for shape in grow_shapes(n - 1) for new in expansions(shape)}


def flatten(shape, sign):
    """Preorder list of (sign, children) entries."""
    nodes = []

    def visit(s, z):
        idx = len(nodes)
        nodes.append(None)
        kids = () if s is None else tuple(visit(c, cz) for c, cz in zip(s, (z, -z, z)))
        nodes[idx] = (z, kids)
        return idx

    visit(shape, sign)
    return nodes


def perfect_matchings(plus, minus):
    if not plus:
        yield ()
        return
    head = plus[0]
    for i, partner in enumerate(minus):
        for rest in perfect_matchings(plus[1:], minus[:i] + minus[i + 1 :]):
            yield ((head, partner),) + rest


def brute_force_couple_count(n):
    total = 0
    for a in range(n + 1):
        for sp in grow_shapes(a):
            for sm in grow_shapes(n - a):
                nodes = flatten(sp, 1) + [(z, tuple(c + len(flatten(sp, 1)) for c in kids)) for z, kids in flatten(sm, -1)]
                leaves = [i for i, (_, kids) in enumerate(nodes) if not kids]
                below = {}

                def under(i):
                    if i not in below:
                        kids = nodes[i][1]
                        below[i] = {i} if not kids else set().union(*(under(c) for c in kids))
                    return below[i]

                branching = [i for i, (_, kids) in enumerate(nodes) if kids]
                plus = [l for l in leaves if nodes[l][0] == 1]
                minus = [l for l in leaves if nodes[l][0] == -1]
                for matching in perfect_matchings(plus, minus):
                    partner = {}
                    for x, y in matching:
                        partner[x], partner[y] = y, x
                    for marks in itertools.product((0, 1, 3), repeat=len(branching)):
                        ok = True
                        for node, mark in zip(branching, marks):
                            if mark:
                                kids = nodes[node][1]
                                group = under(kids[mark - 1]) | under(kids[1])
                                if all(partner[l] in group for l in group):
                                    ok = False
                                    break
                        total += ok
    return total


# -- trees ---------------------------------------------------------------------------------


def test_tree_counts_match_brute_force_and_closed_form():
    expected = [1, 1, 3, 12, 55]
    for n, value in enumerate(expected):
        assert len(tree_shapes(n)) == value
        assert len(grow_shapes(n)) == value
        assert count_shapes_bruteforce(n) == value
        assert fuss_catalan(n) == value


def test_scale_one_signs():
    tree = EnhancedTree((None, None, None), 1)
    assert [node.sign for node in tree.nodes] == [1, 1, -1, 1]
    assert [node.sign for node in EnhancedTree((None, None, None), -1).nodes] == [-1, -1, 1, -1]


def test_tree_marking_checks():
    with pytest.raises(InvalidParameter):
        EnhancedTree((None, None, None), 1, ((0, 2),))
    with pytest.raises(InvalidParameter):
        EnhancedTree((None, None, None), 1, ((1, 1),))
    assert len(list(degenerate_markings(enumerate_trees(2)[0]))) == 9


@given(st.integers(0, 3), st.sampled_from([1, -1]))
def test_tree_json_round_trip(n, sign):
    for plain in enumerate_trees(n, sign):
        for tree in degenerate_markings(plain):
            assert EnhancedTree.from_json(tree.to_json()) == tree


# -- couples ------------------------------------------------------------------------------


def plain_couple_closed_form(n):
    # (n + 1)! pairings for each ordered pair of shapes with scales summing to n
    return math.factorial(n + 1) * sum(fuss_catalan(a) * fuss_catalan(n - a) for a in range(n + 1))


def test_plain_couple_counts():
    for n, value in enumerate([1, 4, 42, 720]):
        assert plain_couple_closed_form(n) == value
        assert len(enumerate_couples(n, with_degeneracies=False)) == value


@pytest.mark.parametrize("n,value", [(0, 1), (1, 8), (2, 238)])
def test_enhanced_couple_counts(n, value):
    assert brute_force_couple_count(n) == value
    assert len(enumerate_couples(n)) == value


def test_enhanced_couple_count_order_three():
    assert brute_force_couple_count(3) == 12360
    assert sum(1 for _ in iter_couples(3)) == 12360


def test_couple_validation_and_round_trip():
    with pytest.raises(InvalidParameter):
        EnhancedCouple(EnhancedTree(None, 1), EnhancedTree(None, 1), ((0, 1),))
    with pytest.raises(InvalidParameter):
        iter_couples(5).__next__()
    for couple in enumerate_couples(2)[::17]:
        assert EnhancedCouple.from_json(couple.to_json()) == couple


def test_decorations_match_direct_check():
    N, k = 5, 2
    for couple in enumerate_couples(1) + enumerate_couples(2)[::23]:
        found = {tuple(row) for row in couple_decorations(couple, k, N)}
        size = len(couple.all_nodes)
        if size <= 8:
            direct = {
                labels for labels in itertools.product(range(1, N), repeat=size) if is_valid_decoration(couple, labels, k, N)
            }
            assert found == direct
        assert all(is_valid_decoration(couple, row, k, N) for row in found)


# -- kernels ------------------------------------------------------------------------------


def test_trivial_couple_kernel_is_the_input_spectrum():
    p = SimParams(8)
    n = spectrum_on_grid("default", p.grid)
    for j in range(1, 8):
        assert evaluate_couple_kernel(trivial_couple(), 0.5, 0.5, j / 8, None, p, "default") == pytest.approx(n[j - 1], rel=1e-15)


def test_time_factor_without_oscillation():
    p = SimParams(8)
    couple = next(
        c for c in iter_couples(2) if c.plus.scale == 1 and c.minus.scale == 1 and len(c.degenerate_nodes) == 2
    )
    labels = np.full(len(couple.all_nodes), 3)
    mismatch = node_mismatch(couple, labels[None, :], dispersion(np.arange(8) / 8, p))
    assert all(np.all(v == 0.0) for v in mismatch.values())
    assert couple_time_factor(couple, labels, 0.7, 0.4, None, p) == pytest.approx(0.7 * 0.4, rel=1e-13)


def test_order_two_kernels_reproduce_the_predictor():
    p = SimParams(8)
    s = 0.5
    couples = enumerate_couples(2)
    exact = second_order_predictor("default", s * p.time_scale, None, p, form="exact").values
    for j in (1, 3, 4):
        total = sum(kernel_sums(couples, s, s, j / 8, None, p, "default").values())
        assert abs(total.imag) <= 1e-12 * abs(total.real)
        assert total.real == pytest.approx(exact[j - 1], rel=1e-6)


def test_kernel_argument_checks():
    p = SimParams(8)
    with pytest.raises(InvalidParameter):
        evaluate_couple_kernel(trivial_couple(), 1.5, 0.5, 0.25, None, p, "default")
    with pytest.raises(InvalidParameter):
        evaluate_couple_kernel(trivial_couple(), 0.5, 0.5, 0.3, None, p, "default")


# -- iterates ----------------------------------------------------------------------------------


def test_zeroth_iterate_is_scaled_noise():
    p = SimParams(8, seed=3)
    eta = np.array([sample_noise(7, 3, i, "gaussian") for i in range(4)])
    out = iterates(eta, p, "default", 0.5, max_order=0)
    assert np.array_equal(out[0], np.sqrt(spectrum_on_grid("default", p.grid))[None, :] * eta)


def test_iterates_vanish_without_coupling():
    p = SimParams(8, beta_override=0.0)
    eta = np.array([sample_noise(7, 0, i, "gaussian") for i in range(3)])
    out = iterates(eta, p, "default", 0.5, max_order=2)
    assert np.array_equal(out[1], np.zeros_like(out[1]))
    assert np.array_equal(out[2], np.zeros_like(out[2]))


# -- molecules ---------------------------------------------------------------------------------


def test_order_two_molecules_have_two_atoms_three_bonds():
    for couple in enumerate_couples(2, with_degeneracies=False):
        mol = molecule_from_couple(couple)
        assert len(mol.atoms) == 2 and len(mol.bonds) == 3


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_every_molecule_passes_validation(n):
    for couple in iter_couples(n, with_degeneracies=False):
        mol = molecule_from_couple(couple, validate=False)
        validate_molecule(mol, n)
        assert len(mol.components()) == 1


def test_reference_molecule():
    plus = EnhancedTree(((None, None, None), (None, None, None), None), 1, ((5, 1),))
    minus = EnhancedTree(None, -1)
    couple = EnhancedCouple(plus, minus, ((2, 10), (7, 3), (4, 8), (9, 6)))
    mol = molecule_from_couple(couple)
    assert sorted(mol.atoms) == [0, 1, 5]
    bonds = sorted((b.tail, b.head, b.kind) for b in mol.bonds)
    assert bonds == sorted([(1, 0, "PC"), (0, 5, "PC"), (1, 5, "LP"), (5, 1, "LP"), (5, 0, "LP")])
    assert mol.degenerate_atoms == {5}


@pytest.mark.parametrize("n", [1, 2])
def test_reconstruction_recovers_the_couple(n):
    for couple in iter_couples(n, with_degeneracies=False):
        keys = {c.key() for c in reconstruct_couples(molecule_from_couple(couple))}
        assert couple.key() in keys


# -- chains, twists and splicing --------------------------------------------------------------


def test_splice_removes_chain_nodes_and_commutes_with_twist():
    spliced = twisted = 0
    for couple in enumerate_couples(3, with_degeneracies=False):
        for chain in cl_chains(couple):
            if chain.irregular:
                new, _, _ = splice(couple, chain)
                assert new.order == couple.order - chain.length
                molecule_from_couple(new)
                spliced += 1
        for g in couple.branching:
            if is_twist_admissible(couple, g):
                tw, _, index = unit_twist(couple, g)
                molecule_from_couple(tw)
                parent = couple.parent(g)
                a, _, _ = splice(couple, (parent, g))
                b, _, _ = splice(tw, (index[parent], index[g]))
                assert a.key() == b.key()
                twisted += 1
    assert spliced > 0 and twisted > 0


def test_twist_keeps_decorations_valid():
    N, k = 6, 2
    checked = 0
    for couple in enumerate_couples(3, with_degeneracies=False)[::5]:
        for g in couple.branching:
            if not is_twist_admissible(couple, g):
                continue
            for labels in couple_decorations(couple, k, N)[:10]:
                tw, new_labels, _ = unit_twist(couple, g, labels)
                for h in tw.branching:
                    c1, c2, c3 = tw.children(h)
                    assert (new_labels[h] - new_labels[c1] + new_labels[c2] - new_labels[c3]) % N == 0
                checked += 1
    assert checked > 0


def test_irregular_chain_gaps_agree_in_size():
    N, k = 6, 2
    checked = 0
    for couple in enumerate_couples(3, with_degeneracies=False)[::3]:
        mol = molecule_from_couple(couple)
        if not any(ch.irregular and ch.length >= 2 for ch in find_chains(mol)):
            continue
        for labels in couple_decorations(couple, k, N)[:8]:
            for chain in find_chains(decorate(mol, labels), N):
                if chain.irregular and chain.length >= 2:
                    assert len({abs(g) for g in chain.gaps}) == 1
                    checked += 1
    assert checked > 0


def test_inadmissible_operations_raise():
    couple = enumerate_couples(1, with_degeneracies=False)[0]
    with pytest.raises(NotAdmissible):
        unit_twist(couple, 0)
    with pytest.raises(NotAdmissible):
        splice(couple, (0,))
    mol = molecule_from_couple(enumerate_couples(2, with_degeneracies=False)[0])
    assert bond_gap(mol, type("L", (), {"bonds": (0, 1), "negative": False})(), 0) is None


# -- degenerate atom removal ------------------------------------------------------------------


def test_operation_del_ledger():
    pair_steps = 0
    profiles = set()
    for n in (1, 2):
        for couple in iter_couples(n):
            if not couple.degenerate_nodes:
                continue
            mol = molecule_from_couple(couple)
            for labels in couple_decorations(couple, 1, 6)[:3]:
                out, ledger = operation_del(decorate(mol, labels))
                assert removable_atoms(out) == []
                for step in ledger:
                    if len(step.atoms) == 2:
                        assert step.dchi == -2
                        pair_steps += 1
                    else:
                        assert step.dchi == -1
                for comp in out.components():
                    profiles.add(tuple(sorted(d for d in (out.degree(a) for a in comp) if d != 4)))
    assert pair_steps > 0
    assert profiles <= {(3, 3), (2,), ()}


def test_operation_del_needs_decorations():
    couple = next(c for c in iter_couples(1) if c.degenerate_nodes)
    with pytest.raises(InvalidParameter):
        operation_del(molecule_from_couple(couple))


# -- pairing multiplicities -------------------------------------------------------------------


def test_expected_pairings_examples():
    leaf_plus, leaf_minus = EnhancedTree(None, 1), EnhancedTree(None, -1)
    assert expected_pairings(leaf_plus, leaf_minus, [1, 1]) == 1
    assert expected_pairings(leaf_plus, leaf_minus, [1, 2]) == 0
    star = EnhancedTree((None, None, None), 1)
    assert expected_pairings(star, leaf_minus, [1, 1, 1, 1, 1]) == 2
    assert leaf_moment(star, leaf_minus, [1, 1, 1, 1, 1], "phase") == 1


@settings(max_examples=30)
@given(st.integers(0, 2), st.integers(0, 2), st.integers(0, 10_000), st.data())
def test_expected_pairings_match_gaussian_moments(a, b, seed, data):
    if a + b > 2:
        a, b = a % 2, b % 2
    rng = np.random.default_rng(seed)
    tp = data.draw(st.sampled_from(enumerate_trees(a, 1, with_degeneracies=True)))
    tm = data.draw(st.sampled_from(enumerate_trees(b, -1, with_degeneracies=True)))
    labels = rng.integers(1, 3, size=len(tp.nodes) + len(tm.nodes))
    assert expected_pairings(tp, tm, labels) == leaf_moment(tp, tm, labels, "gaussian")


# -- reduction logs ---------------------------------------------------------------------------


def test_reduction_identities_hold_for_loop_free_molecules():
    checked = 0
    for n in (2, 3):
        for couple in iter_couples(n, with_degeneracies=False):
            mol = molecule_from_couple(couple, validate=False)
            if any(b.tail == b.head for b in mol.bonds):
                with pytest.raises(NotAdmissible):
                    greedy_reduction(mol)
                continue
            log = greedy_reduction(mol)
            check = check_reduction_log(log, len(mol.bonds), len(mol.atoms))
            assert check.edge_identity and check.chi_identity
            assert log.m1 + log.m2 + log.m3 == len(mol.atoms)
            checked += 1
    assert checked > 0


def test_reduction_inequalities_as_stated():
    # both operation-count inequalities are asserted as stated for every
    # loop-free molecule of order 3
    failures = []
    for couple in iter_couples(3, with_degeneracies=False):
        mol = molecule_from_couple(couple, validate=False)
        if any(b.tail == b.head for b in mol.bonds):
            continue
        log = greedy_reduction(mol)
        check = check_reduction_log(log, len(mol.bonds), len(mol.atoms))
        if not (check.bridge_bound and check.two_vector_bound):
            failures.append((log.m0, log.m2, log.m3))
    print(f"order-3 logs violating an inequality: {len(failures)}, e.g. (m0, m2, m3) = {failures[:1]}")
    assert not failures


def test_reduction_log_arithmetic():
    log = ReductionLog(m0=0, m1=1, m2=2, m3=2)
    check = check_reduction_log(log, edges=10, atoms=5)
    assert check.edge_identity and check.chi_identity
    assert not check.bridge_bound or check.two_vector_bound
