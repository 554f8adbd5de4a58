"""Test projectors, constraint kernels and decompositions"""
import sys
from pathlib import Path

sys.path.append(str(Path(__file__).parent))

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from config import Config
from services import catalog
from services.classifiers import (is_common_interest, is_normalized, is_zero_sum, potential_cycle_test,
                                  zero_sum_cycle_test)
from services.errors import GameTooLargeError, InvalidSpecError
from services.game_core import StrategySpace, inner_product, norm
from services.subspace_engine import (KINDS, ConstraintSet, Projector, decompose, decompose_candogan,
                                      decompose_elementary, decompose_four, decompose_main,
                                      generic_project, project_C, project_E, project_N, project_NC, project_NZ,
                                      project_Z, subspace_dimension)

seeds = st.integers(min_value=0, max_value=2 ** 31 - 1)
CLOSED_KINDS = [k for k in KINDS if k != 'generic']


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_projectors_idempotent_and_self_adjoint(seed):
    space = catalog.random_space(seed)
    f = catalog.random_member('L', space, seed)
    g = catalog.random_member('L', space, seed + 1)
    for kind in CLOSED_KINDS:
        p = Projector(kind)
        pf = p(f)
        assert np.max(np.abs(p(pf).payoffs - pf.payoffs)) <= 1e-10
        assert inner_product(pf, g) == pytest.approx(inner_product(f, p(g)), abs=1e-10 * norm(f) * norm(g))


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_closed_form_nc_matches_generic_projector(seed):
    space = catalog.random_space(seed)
    f = catalog.random_member('L', space, seed)
    generic = Projector.generic('normalized_common_interest')(f)
    assert np.max(np.abs(project_NC(f).payoffs - generic.payoffs)) <= 1e-9


CLOSED_FORMS = [
    ('common_interest', project_C),
    ('zero_sum', project_Z),
    ('normalized', project_N),
    ('non_strategic', project_E),
    ('normalized_common_interest', project_NC),
    ('normalized_zero_sum', project_NZ),
]


@pytest.mark.parametrize("name, projector", CLOSED_FORMS)
@settings(max_examples=10, deadline=None)
@given(seeds)
def test_closed_forms_match_constraint_kernels(name, projector, seed):
    space = catalog.random_space(seed)
    f = catalog.random_member('L', space, seed)
    assert np.max(np.abs(generic_project(name, f).payoffs - projector(f).payoffs)) <= 1e-9 * max(1.0, norm(f))


@pytest.mark.parametrize("sizes", [(2, 3), (3, 3), (2, 2, 3)])
def test_subspace_dimensions_match_closed_forms(sizes):
    space = StrategySpace.from_sizes(sizes)
    n = len(sizes)
    profiles = int(np.prod(sizes))
    passive = sum(profiles // s for s in sizes)
    assert subspace_dimension('C', space) == profiles
    assert subspace_dimension('Z', space) == (n - 1) * profiles
    assert subspace_dimension('E', space) == passive
    assert subspace_dimension('N', space) == n * profiles - passive
    assert subspace_dimension('NC', space) == int(np.prod([s - 1 for s in sizes]))


def test_constraint_set_row_count_matches_matrix():
    space = StrategySpace.from_sizes([2, 3])
    for name in ('zero_sum', 'common_interest', 'normalized', 'non_strategic', 'normalized_zero_sum'):
        constraints = ConstraintSet.named(name)
        assert constraints.matrix(space).shape == (constraints.row_count(space), space.payoff_count)


def test_unknown_names_rejected():
    with pytest.raises(InvalidSpecError):
        ConstraintSet.named('balanced')
    with pytest.raises(InvalidSpecError):
        Projector('X')
    with pytest.raises(InvalidSpecError):
        Projector('generic')
    with pytest.raises(InvalidSpecError):
        decompose(catalog.rps(), 'helmholtz')


def test_size_guard(monkeypatch):
    monkeypatch.setattr(Config, 'MAX_PAYOFF_ENTRIES', 10)
    f = catalog.random_member('L', StrategySpace.from_sizes([2, 5]), 0)
    with pytest.raises(GameTooLargeError):
        generic_project('normalized_zero_sum', f)
    with pytest.raises(GameTooLargeError):
        decompose_main(f)


def test_main_decomposition_near_the_entry_cap():
    space = StrategySpace.from_sizes([150, 160])
    assert space.payoff_count <= Config.MAX_PAYOFF_ENTRIES
    f = catalog.random_member('L', space, 11)
    result = decompose_main(f)
    tol = 1e-9 * max(1.0, norm(f))
    assert result.residual <= tol
    nz = result.component('NZ')
    assert is_zero_sum(nz, tol) and is_normalized(nz, tol)
    nc = result.component('NC')
    assert is_common_interest(nc, tol) and is_normalized(nc, tol)


def test_contest_decomposes_at_default_size():
    f = catalog.build('contest')
    result = decompose_main(f)
    assert result.residual <= 1e-9 * max(1.0, norm(f))


# ==================== DECOMPOSITIONS ====================

def test_table1_main_decomposition():
    f = catalog.table1_game()
    parts = catalog.table1_components()
    result = decompose_main(f)
    assert result.component('NC').allclose(parts['C'], 1e-12)
    assert result.component('NZ').allclose(parts['Z'], 1e-12)
    assert result.component('B').allclose(parts['B'] + parts['E'], 1e-12)
    assert result.residual <= 1e-12
    assert result.total().allclose(f, 1e-12)


def test_four_component_refines_b():
    f = catalog.table1_game()
    main = decompose_main(f)
    four = decompose_four(f)
    assert list(four.components) == ['NC', 'NZ', 'NB', 'E']
    assert (four.component('NB') + four.component('E')).allclose(main.component('B'), 1e-12)
    assert four.component('E').allclose(project_E(f), 1e-12)


def test_candogan_regrouping():
    f = catalog.random_member('L', StrategySpace.from_sizes([3, 3]), 9)
    main = decompose_main(f)
    result = decompose_candogan(f)
    assert result.component('harmonic').allclose(main.component('NZ'), 1e-12)
    potential = result.component('potential') + result.component('nonstrategic')
    assert potential.allclose(main.component('NC') + main.component('B'), 1e-10)


def test_elementary_yields_two_results():
    f = catalog.table1_game()
    cz, ne = decompose_elementary(f)
    assert set(cz.components) == {'C', 'Z'}
    assert set(ne.components) == {'N', 'E'}
    assert len(decompose(f, 'elementary')) == 2
    assert len(decompose(f, 'main')) == 1


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_main_decomposition_pythagoras(seed):
    space = catalog.random_space(seed)
    f = catalog.random_member('L', space, seed)
    result = decompose_main(f)
    squares = sum(v ** 2 for v in result.component_norms.values())
    assert squares == pytest.approx(norm(f) ** 2, abs=1e-8 * max(1.0, norm(f) ** 2))
    assert result.residual <= 1e-9 * max(1.0, norm(f))


# ==================== COMPONENT RECOVERY ====================

def _b_member(space, seed):
    return decompose_main(catalog.random_member('L', space, seed)).component('B')


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_main_decomposition_recovers_planted_components(seed):
    space = catalog.random_space(seed)
    c = catalog.random_member('NC', space, seed)
    z = catalog.random_member('NZ', space, seed + 1)
    b = _b_member(space, seed + 2)
    f = c + z + b
    tol = 1e-9 * max(1.0, norm(f))
    result = decompose_main(f)
    assert result.component('NC').allclose(c, tol)
    assert result.component('NZ').allclose(z, tol)
    assert result.component('B').allclose(b, tol)

    # shifting only the zero-sum part leaves the other two components where they were
    extra = catalog.random_member('NZ', space, seed + 3)
    shifted = decompose_main(f + extra)
    assert shifted.component('NC').allclose(c, tol)
    assert shifted.component('NZ').allclose(z + extra, tol)
    assert shifted.component('B').allclose(b, tol)


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_main_components_belong_to_their_classes(seed):
    space = catalog.random_space(seed)
    f = catalog.random_member('L', space, seed)
    tol = 1e-9 * max(1.0, norm(f))
    result = decompose_main(f)
    nc, nz, b = (result.component(name) for name in ('NC', 'NZ', 'B'))
    assert is_common_interest(nc, tol) and is_normalized(nc, tol)
    assert is_zero_sum(nz, tol) and is_normalized(nz, tol)
    assert potential_cycle_test(b, tol).passed
    assert zero_sum_cycle_test(b, tol).passed


def test_non_strategic_game_is_all_b():
    f = catalog.random_member('E', StrategySpace.from_sizes([3, 2, 2]), 6)
    result = decompose_main(f)
    assert norm(result.component('NC')) <= 1e-12
    assert norm(result.component('NZ')) <= 1e-12
    assert result.component('B').allclose(f, 1e-12)


def test_rps_is_purely_harmonic():
    rps = catalog.rps()
    assert decompose_main(rps).component('NZ').allclose(rps, 1e-12)
    result = decompose_candogan(rps)
    assert result.component('harmonic').allclose(rps, 1e-12)
    assert norm(result.component('potential')) <= 1e-12
    assert norm(result.component('nonstrategic')) <= 1e-12


def test_normalized_coordination_is_purely_potential():
    coordination = catalog.table1_components()['C']
    result = decompose_candogan(coordination)
    assert result.component('potential').allclose(coordination, 1e-12)
    assert norm(result.component('harmonic')) <= 1e-12
    assert norm(result.component('nonstrategic')) <= 1e-12
