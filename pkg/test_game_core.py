"""Test games, mixed profiles and the inner-product space"""
import sys
from pathlib import Path

sys.path.append(str(Path(__file__).parent))

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from services import catalog
from services.errors import InvalidGameError, InvalidProfileError, ShapeMismatchError
from services.game_core import (Game, MixedProfile, StrategySpace, deviation_gain, expected_payoff,
                                inner_product, is_nash, is_strategically_equivalent, norm,
                                own_payoffs, scale)
from services.subspace_engine import project_C, project_E, project_N, project_Z

seeds = st.integers(min_value=0, max_value=2 ** 31 - 1)


# ==================== CONSTRUCTION ====================

def test_space_sizes_and_counts():
    space = StrategySpace.from_sizes([2, 3, 4])
    assert space.n == 3
    assert space.sizes == (2, 3, 4)
    assert space.profile_count == 24
    assert space.payoff_count == 72
    assert space.labels[1] == ('1', '2', '3')


@pytest.mark.parametrize("labels", [[('a', 'b')], [('a',), ()]])
def test_space_rejects_bad_shapes(labels):
    with pytest.raises(InvalidGameError):
        StrategySpace(tuple(labels))


def test_game_rejects_wrong_shape_and_nan():
    space = StrategySpace.from_sizes([2, 2])
    with pytest.raises(InvalidGameError):
        Game(space, np.zeros((2, 2, 3)))
    payoffs = np.zeros((2, 2, 2))
    payoffs[0, 1, 1] = np.nan
    with pytest.raises(InvalidGameError):
        Game(space, payoffs)


def test_game_is_immutable():
    f = catalog.rps()
    with pytest.raises(AttributeError):
        f.payoffs = None
    with pytest.raises(ValueError):
        f.payoffs[0, 0, 0] = 1.0


def test_flat_layout_is_player_then_row_major():
    f = catalog.table1_game()
    assert f.flat[:3].tolist() == [4.0, -1.0, 1.0]
    assert f.flat[9:12].tolist() == [4.0, 1.0, -1.0]


# ==================== VECTOR SPACE ====================

def test_shape_mismatch_names_dimension():
    with pytest.raises(ShapeMismatchError) as exc:
        inner_product(catalog.rps(), catalog.matching_pennies())
    assert exc.value.dimension == 'strategies[1]'

    three = Game.zeros(StrategySpace.from_sizes([2, 2, 2]))
    with pytest.raises(ShapeMismatchError) as exc:
        catalog.matching_pennies() + three
    assert exc.value.dimension == 'players'


def test_operators_match_functions():
    f = catalog.table1_game()
    g = catalog.rps()
    assert (f + g).allclose(Game(f.space, f.payoffs + g.payoffs))
    assert (f - g).allclose(Game(f.space, f.payoffs - g.payoffs))
    assert (2 * f).allclose(scale(f, 2.0))
    assert (-f).allclose(scale(f, -1.0))


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_inner_product_bilinear_symmetric(seed):
    space = catalog.random_space(seed)
    f, g, h = (catalog.random_member('L', space, seed + k) for k in range(3))
    assert inner_product(f, g) == pytest.approx(inner_product(g, f), abs=1e-10)
    lhs = inner_product(2.5 * f + g, h)
    rhs = 2.5 * inner_product(f, h) + inner_product(g, h)
    assert lhs == pytest.approx(rhs, abs=1e-9)
    assert abs(inner_product(f, g)) <= norm(f) * norm(g) + 1e-12


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_complementary_subspaces_are_orthogonal(seed):
    space = catalog.random_space(seed)
    f = catalog.random_member('L', space, seed)
    g = catalog.random_member('L', space, seed + 1)
    c, z = project_C(f), project_Z(g)
    assert abs(inner_product(c, z)) <= 1e-10 * max(1.0, norm(c) * norm(z))
    e, n = project_E(f), project_N(g)
    assert abs(inner_product(e, n)) <= 1e-10 * max(1.0, norm(e) * norm(n))


# ==================== MIXED PROFILES ====================

def test_profile_clamps_tiny_negatives_and_rejects_large_ones():
    space = StrategySpace.from_sizes([2, 2])
    sigma = MixedProfile(space, [[1.0 + 5e-16, -5e-16], [0.5, 0.5]])
    assert sigma[0][1] == 0.0
    with pytest.raises(InvalidProfileError):
        MixedProfile(space, [[1.1, -0.1], [0.5, 0.5]])
    with pytest.raises(InvalidProfileError):
        MixedProfile(space, [[0.6, 0.6], [0.5, 0.5]])
    with pytest.raises(InvalidProfileError):
        MixedProfile(space, [[1.0, 0.0, 0.0], [0.5, 0.5]])


def test_profile_helpers():
    space = StrategySpace.from_sizes([3, 2])
    pure = MixedProfile.pure(space, (2, 0))
    assert pure[0].tolist() == [0.0, 0.0, 1.0]
    uniform = MixedProfile.uniform(space)
    assert uniform[1].tolist() == [0.5, 0.5]


def test_expected_payoff_and_own_payoffs():
    f = catalog.table1_game()
    sigma = MixedProfile.pure(f.space, (0, 1))
    assert expected_payoff(f, sigma, 0) == -1.0
    assert expected_payoff(f, sigma, 1) == 1.0
    assert own_payoffs(f, sigma, 0).tolist() == [-1.0, 2.0, 0.0]


def test_nash_examples():
    f = catalog.rps()
    assert is_nash(f, MixedProfile.uniform(f.space))
    assert not is_nash(f, MixedProfile.pure(f.space, (0, 0)))
    pd_game = catalog.standard_pd()
    assert is_nash(pd_game, MixedProfile.pure(pd_game.space, (1, 1)))


def test_nash_tolerance_follows_environment(monkeypatch):
    f = catalog.rps()
    rock = MixedProfile.pure(f.space, (0, 0))
    monkeypatch.setenv('GAMEDECOMP_TOL', '2.0')
    assert is_nash(f, rock)
    monkeypatch.setenv('GAMEDECOMP_TOL', '1e-9')
    assert not is_nash(f, rock)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_deviation_gain_invariant_under_non_strategic_shift(seed):
    space = catalog.random_space(seed)
    f = catalog.random_member('L', space, seed)
    h = catalog.random_member('E', space, seed + 1)
    rng = np.random.default_rng(seed)
    sigma = MixedProfile(space, [rng.dirichlet(np.ones(size)) for size in space.sizes])
    for i in range(space.n):
        assert deviation_gain(f, sigma, i) == pytest.approx(deviation_gain(f + h, sigma, i), abs=1e-10)


@pytest.mark.parametrize("c", [0.5, 3.0, 100.0])
def test_nash_invariant_under_positive_scaling(c):
    f = catalog.table1_game()
    sigma = MixedProfile(f.space, [[1 / 6, 0.0, 5 / 6], [1 / 6, 0.0, 5 / 6]])
    assert is_nash(f, sigma, 1e-9)
    assert is_nash(scale(f, c), sigma, 1e-9 * c)


# ==================== STRATEGIC EQUIVALENCE ====================

def test_strategic_equivalence_examples():
    f = catalog.table1_game()
    h = catalog.random_member('E', f.space, 3)
    assert is_strategically_equivalent(f, f + h)

    b = catalog.table1_components()['B']
    # shift each player's payoff by a function of the opponent's strategy only
    shifted = b.with_payoffs(b.payoffs + np.stack([np.tile([[2.0, -1.0, 0.5]], (3, 1)),
                                                   np.tile([[7.0], [0.0], [-3.0]], (1, 3))]))
    assert is_strategically_equivalent(b, shifted)

    coordination = catalog.coordination(2)
    assert not is_strategically_equivalent(catalog.matching_pennies(), coordination)
