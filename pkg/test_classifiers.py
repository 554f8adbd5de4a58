"""Test membership predicates, cycle conditions and extractors"""
import sys
from pathlib import Path

sys.path.append(str(Path(__file__).parent))

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from services import catalog
from services.classifiers import (anova_terms, classify, extract_multilateral, extract_potential,
                                  extract_zero_sum_form, is_common_interest, is_non_strategic,
                                  is_normalized, is_zero_sum, potential_cycle_test,
                                  potential_function_check, prop_zero_test, symmetric_zero_sum_test,
                                  zero_sum_cycle_test)
from services.errors import (NotInBError, NotPotentialError, NotSymmetricError,
                             NotZeroSumEquivalentError)
from services.game_core import Game, StrategySpace, is_strategically_equivalent
from services.subspace_engine import decompose_main, full_interaction

seeds = st.integers(min_value=0, max_value=2 ** 31 - 1)

COURNOT_GRID = [0.0, 1.0, 2.0, 3.0, 4.0]


def cournot3():
    return catalog.cournot(catalog.CournotSpec(3, 10.0, 1.0, [1.0, 1.0, 1.0], COURNOT_GRID))


def table1_b():
    return decompose_main(catalog.table1_game()).component('B')


# ==================== DEFINITIONAL CHECKS ====================

def test_definitional_predicates():
    c = catalog.table1_components()['C']
    assert is_common_interest(c) and is_normalized(c)

    zero = Game.zeros(StrategySpace.from_sizes([2, 3]))
    assert all(check(zero) for check in (is_common_interest, is_zero_sum, is_normalized,
                                         is_non_strategic))

    mp = catalog.matching_pennies()
    assert is_zero_sum(mp) and is_normalized(mp)
    assert not is_common_interest(mp)


def test_predicates_follow_environment_tolerance(monkeypatch):
    mp = catalog.matching_pennies()
    payoffs = mp.payoffs.copy()
    payoffs[1] += 1e-6
    near = Game(mp.space, payoffs)
    assert not is_zero_sum(near)
    monkeypatch.setenv('GAMEDECOMP_TOL', '1e-5')
    assert is_zero_sum(near)
    assert classify(near).flags['zero_sum']


# ==================== CYCLE CONDITIONS ====================

def test_potential_cycle_test_examples():
    c = catalog.table1_components()['C']
    result = potential_cycle_test(c)
    assert result.passed and result.worst_violation == 0.0

    rps = potential_cycle_test(catalog.rps())
    assert not rps
    assert rps.worst_violation == pytest.approx(6.0)

    assert potential_cycle_test(cournot3(), 1e-9).passed


def test_zero_sum_cycle_test_examples():
    assert zero_sum_cycle_test(catalog.rps()).passed
    coordination = zero_sum_cycle_test(catalog.coordination(2))
    assert not coordination.passed
    assert coordination.worst_violation == pytest.approx(4.0)
    assert zero_sum_cycle_test(catalog.separable_pd()).passed
    assert coordination.to_dict() == {'pass': False, 'worst_violation': coordination.worst_violation}


def test_symmetric_zero_sum_test():
    assert symmetric_zero_sum_test(catalog.rps())
    assert not symmetric_zero_sum_test(catalog.standard_pd())
    assert symmetric_zero_sum_test(catalog.separable_pd())
    # agrees with the general cube test on symmetric games
    for game in (catalog.rps(), catalog.standard_pd(), catalog.separable_pd(), catalog.table1_game()):
        assert symmetric_zero_sum_test(game) == zero_sum_cycle_test(game).passed


def test_symmetric_zero_sum_test_rejects_asymmetric():
    with pytest.raises(NotSymmetricError):
        symmetric_zero_sum_test(catalog.matching_pennies())
    with pytest.raises(NotSymmetricError):
        symmetric_zero_sum_test(cournot3())


def test_prop_zero_test():
    embedded = catalog.bayesian_embed(catalog.example3_symmetric_spec())
    result = prop_zero_test(embedded)
    assert result.passed
    assert all(w is not None for w in result.witness)

    passive = catalog.random_member('E', StrategySpace.from_sizes([2, 3, 2]), 1)
    result = prop_zero_test(passive)
    assert result.passed
    assert result.witness == [0, 1, 2]
    assert result.to_dict()['witness'] == [1, 2, 3]

    assert not prop_zero_test(catalog.rps()).passed


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_interaction_potential_games_pass(seed):
    space = catalog.random_space(seed)
    assert potential_cycle_test(catalog.interaction_potential_game(space, seed)).passed


@pytest.mark.parametrize("kind, potential, zero_sum", [
    ('NC', True, False),
    ('NZ', False, True),
    ('D+E', True, True),
    ('C+E', True, False),
    ('Z+E', False, True),
])
def test_cycle_tests_on_random_classes(kind, potential, zero_sum):
    for seed in range(20):
        f = catalog.random_member(kind, catalog.random_space(seed), seed)
        assert potential_cycle_test(f).passed == potential
        assert zero_sum_cycle_test(f).passed == zero_sum


# ==================== EXTRACTORS ====================

def test_extract_potential_table1_b():
    v = extract_potential(table1_b())
    first = np.array([1.0, 0.0, 0.0])
    expected = first[:, None] + first[None, :] - 2.0
    assert np.allclose(v, expected, atol=1e-12)
    assert v[0, 0] == pytest.approx(0.0, abs=1e-12)


def test_extract_potential_common_interest():
    c = catalog.table1_components()['C']
    v = extract_potential(c)
    assert np.allclose(v, c.payoffs[0] - c.payoffs[0][0, 0])


def test_extract_potential_cournot_identity():
    f = cournot3()
    assert potential_function_check(f, extract_potential(f)) <= 1e-9


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_potential_path_order_changes_only_a_constant(seed):
    space = catalog.random_space(seed)
    f = catalog.random_member('C+E', space, seed)
    forward = extract_potential(f)
    backward = extract_potential(f, order=list(reversed(range(space.n))))
    difference = forward - backward
    assert np.ptp(difference) <= 1e-9
    assert potential_function_check(f, forward) <= 1e-9


def test_extract_potential_rejects_rps():
    with pytest.raises(NotPotentialError) as exc:
        extract_potential(catalog.rps())
    assert exc.value.worst_violation == pytest.approx(6.0)


def test_anova_terms_sum_to_input():
    tensor = np.random.default_rng(4).standard_normal((2, 3, 4))
    terms = anova_terms(tensor)
    assert len(terms) == 8
    assert np.allclose(sum(terms.values()), tensor)


def test_zero_sum_form_of_zero_sum_game():
    f = catalog.rps()
    form = extract_zero_sum_form(f)
    assert form.w.allclose(f, 1e-12)
    assert np.max(np.abs(form.h.payoffs)) <= 1e-12


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_zero_sum_form_roundtrip(seed):
    f = catalog.random_member('Z+E', catalog.random_space(seed), seed)
    form = extract_zero_sum_form(f)
    assert form.to_game().allclose(f, 1e-9)
    assert is_zero_sum(form.w, 1e-9)
    assert is_non_strategic(form.h, 1e-9)
    assert np.max(np.abs(full_interaction(form.w.payoffs.sum(axis=0)))) <= 1e-10


def test_zero_sum_form_of_contest_matches_closed_form_w():
    grid = [0.25, 0.5, 0.75, 1.0]
    spec = catalog.ContestSpec(3, 1.0, [1.0, 2.0, 0.5], grid)
    f = catalog.contest(spec)
    form = extract_zero_sum_form(f)

    axes = [np.asarray(grid).reshape([-1 if k == i else 1 for k in range(3)]) for i in range(3)]
    total = sum(axes)
    shape = (len(grid),) * 3
    w = []
    for i in range(3):
        cost_gap = sum(spec.costs[i] * axes[i] - spec.costs[j] * axes[j] for j in range(3) if j != i)
        w.append(np.broadcast_to((axes[i] / total - 1 / 3) * spec.prize - cost_gap / 2, shape))
    assert is_strategically_equivalent(form.w, Game(f.space, np.stack(w)), 1e-9)


def test_zero_sum_form_rejects_coordination():
    with pytest.raises(NotZeroSumEquivalentError):
        extract_zero_sum_form(catalog.coordination(2))


def test_multilateral_table1_b():
    form = extract_multilateral(table1_b())
    zeta_1, zeta_2 = form.zeta
    assert np.allclose(zeta_2 - zeta_2[0], [0.0, -1.0, -1.0])
    assert np.allclose(zeta_1 - zeta_1[0], [0.0, -1.0, -1.0])


def test_multilateral_cournot_reconstruction():
    f = cournot3()
    form = extract_multilateral(f)
    assert is_strategically_equivalent(f, form.to_game(f.space), 1e-9)


def test_multilateral_recovers_symmetric_zeta():
    zeta = np.array([0.0, 2.0, -1.0])
    payoff = np.broadcast_to(zeta[:, None], (3, 3)) + np.broadcast_to(zeta[None, :], (3, 3))
    f = Game.from_arrays([payoff, payoff])
    form = extract_multilateral(f)
    assert np.allclose(form.zeta[1] - form.zeta[1][0], zeta - zeta[0])
    assert np.allclose(form.zeta[0] - form.zeta[0][0], zeta - zeta[0])


def test_multilateral_rejects_rps():
    with pytest.raises(NotInBError):
        extract_multilateral(catalog.rps())


# ==================== CLASSIFICATION ====================

def test_classify_examples():
    rps = classify(catalog.rps())
    assert rps.flags['zero_sum_equivalent'] and not rps.flags['potential']

    table1 = classify(catalog.table1_game())
    assert not table1.flags['potential']
    assert not table1.flags['zero_sum_equivalent']
    assert not table1.flags['zs_potential_B']
    assert all(v > 0.1 for v in table1.component_norms.values())

    pd_report = classify(catalog.separable_pd())
    assert pd_report.flags['potential']
    assert pd_report.flags['zero_sum_equivalent']
    assert pd_report.flags['zs_potential_B']


def test_classify_default_contest():
    f = catalog.build('contest')
    assert f.space.payoff_count == 3 * 20 ** 3
    report = classify(f)
    assert report.flags['zero_sum_equivalent']
    assert report.component_norms['NC'] <= 1e-9 * max(1.0, report.component_norms['NZ'])


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_classification_implications(seed):
    space = catalog.random_space(seed)
    for kind in ('E', 'D+E', 'L'):
        flags = classify(catalog.random_member(kind, space, seed)).flags
        if flags['zs_potential_B'] or flags['non_strategic']:
            assert flags['potential'] and flags['zero_sum_equivalent']
