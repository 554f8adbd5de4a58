"""
Builders for the example games: the four-component illustration, textbook games,
discretized Cournot and contest games, the Bayesian type-agent embedding and
random members of each subspace.
"""
import logging
from dataclasses import dataclass, field

import numpy as np

from services.errors import InvalidSpecError, UnknownClassError
from services.game_core import Game, StrategySpace
from services.subspace_engine import (project_C, project_E, project_N, project_NC, project_NZ,
                                      project_Z)
from services.classifiers import MultilateralForm
from utils import make_rng, subsets

logger = logging.getLogger(__name__)


# ==================== FOUR-COMPONENT ILLUSTRATION ====================

_TABLE1_A = [[4, -1, 1], [1, 2, -2], [-1, 0, 2]]
_TABLE1_B = [[4, 1, -1], [-1, 2, 0], [1, -2, 2]]

_RPS = [[0, -1, 1], [1, 0, -1], [-1, 1, 0]]


def _bimatrix(a, b, labels=None):
    return Game.from_arrays([np.array(a, dtype=float), np.array(b, dtype=float)], labels)


def table1_game():
    return _bimatrix(_TABLE1_A, _TABLE1_B)


def table1_components():
    """C, Z, B and E exactly as printed; C + Z + B + E equals table1_game()"""
    common = np.full((3, 3), -1.0) + 3.0 * np.eye(3)
    first = np.zeros(3)
    first[0] = 1.0
    own_first = np.broadcast_to(first[:, None], (3, 3))
    other_first = np.broadcast_to(first[None, :], (3, 3))
    return {
        'C': _bimatrix(common, common),
        'Z': rps(),
        'B': _bimatrix(own_first, other_first),
        'E': _bimatrix(other_first, own_first),
    }


# ==================== TEXTBOOK GAMES ====================

def rps():
    a = np.array(_RPS, dtype=float)
    return _bimatrix(a, -a, labels=[('R', 'P', 'S'), ('R', 'P', 'S')])


def matching_pennies():
    a = np.array([[1.0, -1.0], [-1.0, 1.0]])
    return _bimatrix(a, -a, labels=[('H', 'T'), ('H', 'T')])


def coordination(k=2):
    if k < 1:
        raise InvalidSpecError("coordination game needs at least one strategy", k=k)
    a = np.eye(k)
    return _bimatrix(a, a)


def prisoners_dilemma(T=5.0, R=3.0, P=1.0, S=0.0):
    """Symmetric PD with (C,C)=(R,R), (C,D)=(S,T), (D,C)=(T,S), (D,D)=(P,P)"""
    a = np.array([[R, S], [T, P]], dtype=float)
    return _bimatrix(a, a.T, labels=[('C', 'D'), ('C', 'D')])


def standard_pd():
    return prisoners_dilemma(5.0, 3.0, 1.0, 0.0)


def separable_pd():
    """PD whose payoff differences separate by player: T - P + S - R = 0"""
    return prisoners_dilemma(5.0, 3.0, 2.0, 0.0)


# ==================== QUASI-COURNOT OLIGOPOLY ====================

def _check_grid(grid, name):
    grid = np.asarray(grid, dtype=float).reshape(-1)
    if grid.size < 1:
        raise InvalidSpecError(f"{name} grid is empty")
    if np.any(np.diff(grid) <= 0):
        raise InvalidSpecError(f"{name} grid must be strictly increasing", grid=grid.tolist())
    return grid


@dataclass
class CournotSpec:
    n: int
    alpha: float
    beta: float
    costs: list
    grid: list

    def __post_init__(self):
        if self.n < 2:
            raise InvalidSpecError("Cournot game needs at least 2 firms", n=self.n)
        if self.beta <= 0:
            raise InvalidSpecError("demand slope beta must be positive", beta=self.beta)
        if len(self.costs) != self.n:
            raise InvalidSpecError(f"expected {self.n} costs, got {len(self.costs)}")
        if any(c < 0 for c in self.costs):
            raise InvalidSpecError("costs must be nonnegative", costs=list(self.costs))
        grid = _check_grid(self.grid, 'quantity')
        if grid[0] < 0:
            raise InvalidSpecError("quantities must be nonnegative", grid=grid.tolist())
        self.grid = grid

    def min_upper_bound(self):
        """Smallest quantity cap keeping the interior equilibrium inside [0, cap]"""
        c = np.asarray(self.costs, dtype=float)
        return (self.alpha - self.n * c.min() + (self.n - 1) * c.max()) / ((self.n + 1) * self.beta)


def _grid_axes(grid, n):
    """One broadcastable copy of the grid per player axis"""
    axes = []
    for i in range(n):
        shape = [1] * n
        shape[i] = grid.size
        axes.append(grid.reshape(shape))
    return axes


def cournot(spec):
    """f^(i)(s) = (alpha - beta sum_j s_j) s_i - c_i s_i on the quantity grid"""
    axes = _grid_axes(spec.grid, spec.n)
    total = sum(axes)
    shape = (spec.grid.size,) * spec.n
    payoffs = [np.broadcast_to((spec.alpha - spec.beta * total) * s - c * s, shape)
               for s, c in zip(axes, spec.costs)]
    labels = [tuple(f"{q:g}" for q in spec.grid)] * spec.n
    logger.debug(f"cournot game: n={spec.n}, {spec.grid.size} quantity levels")
    return Game.from_arrays(payoffs, labels)


def cournot_equilibrium(spec):
    """Interior equilibrium s_i = (alpha - (n+1) c_i + sum_j c_j) / ((n+1) beta)"""
    c = np.asarray(spec.costs, dtype=float)
    return (spec.alpha - (spec.n + 1) * c + c.sum()) / ((spec.n + 1) * spec.beta)


# ==================== CONTEST ====================

@dataclass
class ContestSpec:
    n: int
    prize: float
    costs: list
    grid: list

    def __post_init__(self):
        if self.n < 2:
            raise InvalidSpecError("contest needs at least 2 players", n=self.n)
        if self.prize <= 0:
            raise InvalidSpecError("prize must be positive", prize=self.prize)
        if len(self.costs) != self.n:
            raise InvalidSpecError(f"expected {self.n} costs, got {len(self.costs)}")
        if any(c <= 0 for c in self.costs):
            raise InvalidSpecError("costs must be positive", costs=list(self.costs))
        grid = _check_grid(self.grid, 'effort')
        if grid[0] <= 0:
            raise InvalidSpecError("effort grid must exclude 0", grid=grid.tolist())
        self.grid = grid


def contest(spec):
    """f^(i)(s) = v s_i / sum_j s_j - c_i s_i on the effort grid"""
    axes = _grid_axes(spec.grid, spec.n)
    total = sum(axes)
    shape = (spec.grid.size,) * spec.n
    payoffs = [np.broadcast_to(spec.prize * s / total - c * s, shape)
               for s, c in zip(axes, spec.costs)]
    labels = [tuple(f"{e:g}" for e in spec.grid)] * spec.n
    return Game.from_arrays(payoffs, labels)


def contest_phi_closed_form(spec, s):
    """(sum c)(sum s) - 2 sum_i sqrt(c_i v) sqrt(sum_{l != i} s_l) + (n - 1) v"""
    s = np.asarray(s, dtype=float)
    c = np.asarray(spec.costs, dtype=float)
    others = s.sum() - s
    return float(c.sum() * s.sum() - 2.0 * np.sum(np.sqrt(c * spec.prize) * np.sqrt(others))
                 + (spec.n - 1) * spec.prize)


def contest_best_response(spec, others, i):
    """Unconstrained interior best response sqrt(v X / c_i) - X against opponents' total X"""
    return np.sqrt(spec.prize * others / spec.costs[i]) - others


def contest_equilibrium(spec):
    """Interior equilibrium: X = (n-1) v / sum c, s_i = X - c_i X^2 / v"""
    c = np.asarray(spec.costs, dtype=float)
    total = (spec.n - 1) * spec.prize / c.sum()
    return total - c * total ** 2 / spec.prize


# ==================== BAYESIAN TYPE-AGENT EMBEDDING ====================

@dataclass
class BayesianSpec:
    """
    Two-player Bayesian game with finite type sets.

    ``tables1[a][b]`` and ``tables2[a][b]`` are the payoff matrices of players alpha and beta
    (rows: alpha's strategies, columns: beta's) when alpha has type a and beta has type b.
    """

    p: list
    q: list
    tables1: list
    tables2: list
    tol: float = field(default=1e-12, repr=False)

    def __post_init__(self):
        for name, probs in (('p', self.p), ('q', self.q)):
            probs = np.asarray(probs, dtype=float)
            if probs.size < 1 or np.any(probs < 0):
                raise InvalidSpecError(f"type probabilities {name} must be nonnegative and non-empty")
            if abs(probs.sum() - 1.0) > self.tol:
                raise InvalidSpecError(f"type probabilities {name} sum to {probs.sum():.15g}, not 1")
        self.p = np.asarray(self.p, dtype=float)
        self.q = np.asarray(self.q, dtype=float)
        self.tables1 = np.asarray(self.tables1, dtype=float)
        self.tables2 = np.asarray(self.tables2, dtype=float)
        expected = (self.p.size, self.q.size)
        for name, tables in (('tables1', self.tables1), ('tables2', self.tables2)):
            if tables.ndim != 4 or tables.shape[:2] != expected:
                raise InvalidSpecError(f"{name} must have shape (k_alpha, k_beta, m_alpha, m_beta)",
                                       shape=list(tables.shape))
        if self.tables1.shape != self.tables2.shape:
            raise InvalidSpecError("payoff tables of the two players differ in shape")

    @property
    def k_alpha(self):
        return self.p.size

    @property
    def k_beta(self):
        return self.q.size


def bayesian_embed(spec):
    """
    Type-agent game with k_alpha + k_beta players.

    Agent a <= k_alpha earns sum_b f^(1)(s_a, s_b, a, b) p_a q_b; agent b earns
    sum_a f^(2)(s_a, s_b, a, b) p_a q_b.
    """
    ka, kb = spec.k_alpha, spec.k_beta
    m_alpha, m_beta = spec.tables1.shape[2:]
    n = ka + kb
    sizes = (m_alpha,) * ka + (m_beta,) * kb
    payoffs = np.zeros((n,) + sizes)

    def embed(matrix, a, b):
        # place matrix on axes (a, ka + b) and broadcast over the other agents
        shape = [1] * n
        shape[a] = m_alpha
        shape[ka + b] = m_beta
        return np.broadcast_to(matrix.reshape(shape), sizes)

    for a in range(ka):
        for b in range(kb):
            weight = spec.p[a] * spec.q[b]
            payoffs[a] += weight * embed(spec.tables1[a, b], a, b)
            payoffs[ka + b] += weight * embed(spec.tables2[a, b], a, b)

    labels = ([tuple(f"a{k + 1}" for k in range(m_alpha))] * ka
              + [tuple(f"b{k + 1}" for k in range(m_beta))] * kb)
    logger.debug(f"bayesian embedding: {ka} + {kb} type agents")
    return Game(StrategySpace(tuple(labels)), payoffs)


def _example3_tables(a, b):
    common = np.array([[a, 0.0], [0.0, b]])
    crossed = np.array([[b, 0.0], [0.0, a]])
    # (g1, g2) is common interest, (h1, h2) has opposed preferences over the two matches
    return common, common, common, crossed


def example3_spec(a=2.0, b=1.0, p=0.5):
    """Player alpha with one type, player beta with two types of probability p and 1 - p"""
    g1, g2, h1, h2 = _example3_tables(a, b)
    return BayesianSpec(p=[1.0], q=[p, 1.0 - p], tables1=[[g1, h1]], tables2=[[g2, h2]])


def example3_symmetric_spec(a=2.0, b=1.0, p=0.5, q=0.5):
    """Two types per side; beta's type selects the common or the crossed table"""
    g1, g2, h1, h2 = _example3_tables(a, b)
    row1 = [g1, h1]
    row2 = [g2, h2]
    return BayesianSpec(p=[p, 1.0 - p], q=[q, 1.0 - q], tables1=[row1, row1], tables2=[row2, row2])


# ==================== RANDOM MEMBERS ====================

RANDOM_CLASSES = ('L', 'C', 'Z', 'N', 'E', 'NC', 'NZ', 'D+E', 'B', 'C+E', 'Z+E')


def random_space(seed, players=(2, 3), strategies=(2, 4)):
    """Strategy space with a random player count and random strategy counts in the given ranges"""
    rng = make_rng(seed)
    n = int(rng.integers(players[0], players[1] + 1))
    sizes = [int(rng.integers(strategies[0], strategies[1] + 1)) for _ in range(n)]
    return StrategySpace.from_sizes(sizes)


def _gaussian(space, rng):
    return Game(space, rng.standard_normal((space.n,) + space.sizes))


def _random_multilateral(space, rng):
    zeta = []
    for l in range(space.n):
        others = tuple(size for k, size in enumerate(space.sizes) if k != l)
        zeta.append(rng.standard_normal(others))
    return MultilateralForm(zeta).to_game(space)


def random_member(kind, space, seed):
    """Random game in the named class; deterministic per seed"""
    if kind not in RANDOM_CLASSES:
        raise UnknownClassError(f"unknown game class {kind!r}", known=list(RANDOM_CLASSES))
    rng = make_rng(seed)

    if kind == 'L':
        return _gaussian(space, rng)
    if kind in ('D+E', 'B'):
        return _random_multilateral(space, rng) + project_E(_gaussian(space, rng))
    if kind == 'C+E':
        return project_C(_gaussian(space, rng)) + project_E(_gaussian(space, rng))
    if kind == 'Z+E':
        return project_Z(_gaussian(space, rng)) + project_E(_gaussian(space, rng))

    projectors = {'C': project_C, 'Z': project_Z, 'N': project_N, 'E': project_E,
                  'NC': project_NC, 'NZ': project_NZ}
    return projectors[kind](_gaussian(space, rng))


def interaction_potential_game(space, seed):
    """f^(i) = sum over coalitions M containing i of xi_M(s_M); a potential game for any draw"""
    rng = make_rng(seed)
    payoffs = np.zeros((space.n,) + space.sizes)
    for coalition in subsets(space.n):
        if not coalition:
            continue
        shape = [size if k in coalition else 1 for k, size in enumerate(space.sizes)]
        xi = np.broadcast_to(rng.standard_normal(shape), space.sizes)
        for i in coalition:
            payoffs[i] += xi
    return Game(space, payoffs)


# ==================== REGISTRY ====================

def _floats(raw, default):
    if raw is None:
        return list(default)
    return [float(x) for x in str(raw).split(',') if x.strip()]


def _number(params, key, default, cast=float):
    raw = params.get(key)
    if raw is None:
        return default
    try:
        return cast(raw)
    except ValueError:
        raise InvalidSpecError(f"parameter {key}={raw!r} is not a valid number")


def _cournot_from_params(params):
    n = _number(params, 'n', 3, int)
    costs = _floats(params.get('costs'), [1.0] * n)
    grid = _floats(params.get('grid'), [0.0, 1.0, 2.0, 3.0, 4.0])
    spec = CournotSpec(n, _number(params, 'alpha', 10.0), _number(params, 'beta', 1.0), costs, grid)
    return cournot(spec)


def _contest_from_params(params):
    n = _number(params, 'n', 3, int)
    costs = _floats(params.get('costs'), [1.0] * n)
    steps = _number(params, 'steps', 20, int)
    denominator = _number(params, 'denominator', 45.0)
    grid = _floats(params.get('grid'), [k / denominator for k in range(1, steps + 1)])
    return contest(ContestSpec(n, _number(params, 'prize', 1.0), costs, grid))


def _random_from_params(params):
    seed = _number(params, 'seed', 0, int)
    space = random_space(seed)
    if params.get('sizes'):
        space = StrategySpace.from_sizes([int(x) for x in str(params['sizes']).split(',')])
    return random_member(params.get('class', 'L'), space, seed)


CATALOG = {
    'table1': lambda params: table1_game(),
    'table1-C': lambda params: table1_components()['C'],
    'table1-Z': lambda params: table1_components()['Z'],
    'table1-B': lambda params: table1_components()['B'],
    'table1-E': lambda params: table1_components()['E'],
    'rps': lambda params: rps(),
    'matching-pennies': lambda params: matching_pennies(),
    'coordination': lambda params: coordination(_number(params, 'k', 2, int)),
    'separable-pd': lambda params: separable_pd(),
    'standard-pd': lambda params: standard_pd(),
    'cournot': _cournot_from_params,
    'contest': _contest_from_params,
    'bayesian': lambda params: bayesian_embed(example3_symmetric_spec(
        _number(params, 'a', 2.0), _number(params, 'b', 1.0),
        _number(params, 'p', 0.5), _number(params, 'q', 0.5))),
    'example3': lambda params: bayesian_embed(example3_spec(
        _number(params, 'a', 2.0), _number(params, 'b', 1.0), _number(params, 'p', 0.5))),
    'random': _random_from_params,
}


def build(name, params=None):
    """Build a registered game from string parameters"""
    if name not in CATALOG:
        raise InvalidSpecError(f"unknown catalog entry {name!r}", known=sorted(CATALOG))
    game = CATALOG[name](dict(params or {}))
    logger.info(f"✅ built catalog game {name} with sizes {game.space.sizes}")
    return game
