"""Phi-function evaluation and equilibrium solvers for finite games"""
import itertools
import logging
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from scipy import linalg

from config import Config
from services.classifiers import (extract_multilateral, extract_potential, is_common_interest,
                                  is_normalized, is_zero_sum)
from services.errors import InvalidGameError, InvalidSpecError, NotZeroSumError, PreconditionError
from services.game_core import (Game, MixedProfile, contract, deviation_gain, is_nash,
                                own_payoffs)
from utils import barycentric_grid, max_abs

logger = logging.getLogger(__name__)


# ==================== PHI FUNCTION ====================

def phi(f, sigma):
    """Phi_f(sigma) = sum_i [max_t f^(i)(t, sigma_{-i}) - f^(i)(sigma)]; zero exactly at Nash profiles"""
    return float(sum(deviation_gain(f, sigma, i) for i in range(f.n)))


class PhiEvaluator:
    """Phi_f bound to a game, optionally evaluated through an equivalent zero-sum form"""

    def __init__(self, game, zero_sum_form=None):
        self.game = game
        self.zero_sum_form = zero_sum_form
        # deviation gains are invariant under adding a non-strategic game
        self._target = zero_sum_form.w if zero_sum_form is not None else game

    def __call__(self, sigma):
        return phi(self._target, sigma)

    def pure_table(self):
        return phi_pure_table(self._target)


def phi_pure_table(f):
    """Phi_f at every pure profile, as a tensor over S"""
    total = np.zeros(f.space.sizes)
    for i in range(f.n):
        best = f.payoffs[i].max(axis=i, keepdims=True)
        total += best - f.payoffs[i]
    return total


# ==================== NASH LISTS ====================

@dataclass
class NashList:
    profiles: list
    degenerate: bool = False
    method: str = ''
    extra: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.profiles)

    def symmetric(self, tol=1e-9):
        return [p for p in self.profiles
                if len(p.vectors) == 2 and p[0].shape == p[1].shape and max_abs(p[0] - p[1]) <= tol]

    def contains(self, sigma, tol=1e-9):
        return any(p.allclose(sigma, tol) for p in self.profiles)

    def to_dict(self):
        payload = {'method': self.method,
                   'degenerate': self.degenerate,
                   'profiles': [p.to_lists() for p in self.profiles]}
        payload.update(self.extra)
        return payload


def pure_nash(f, tol=None):
    """Brute scan over pure profiles"""
    tol = Config.default_tolerance() if tol is None else tol
    mask = np.ones(f.space.sizes, dtype=bool)
    for i in range(f.n):
        best = f.payoffs[i].max(axis=i, keepdims=True)
        mask &= f.payoffs[i] >= best - tol
    profiles = [MixedProfile.pure(f.space, s) for s in zip(*np.nonzero(mask))]
    logger.debug(f"pure scan on {f.space.sizes}: {len(profiles)} equilibria")
    return NashList(profiles, degenerate=False, method='pure')


# ==================== SUPPORT ENUMERATION ====================

def _indifference(payoff, rows, cols):
    """
    Mixed strategy y on ``cols`` making the row player indifferent over ``rows``.

    Solves [payoff[rows, cols] -1; 1 0] [y; u] = [0; 1] with partial pivoting.
    Returns (y, u) or None when the system is singular.
    """
    k = len(rows)
    system = np.zeros((k + 1, k + 1))
    system[:k, :k] = payoff[np.ix_(rows, cols)]
    system[:k, k] = -1.0
    system[k, :k] = 1.0
    rhs = np.zeros(k + 1)
    rhs[k] = 1.0

    lu, piv = linalg.lu_factor(system, check_finite=False)
    scale = max(1.0, max_abs(system))
    if np.min(np.abs(np.diag(lu))) < Config.SINGULARITY_THRESHOLD * scale:
        return None
    solution = linalg.lu_solve((lu, piv), rhs, check_finite=False)
    return solution[:k], solution[k]


def _full_vector(size, support, values):
    v = np.zeros(size)
    v[list(support)] = values
    return v


def bimatrix_nash(f, tol=None):
    """
    Support enumeration over equal-size support pairs.

    The degenerate flag is raised when a support system is singular or an
    unused strategy ties the equilibrium payoff; equal-size enumeration may then
    miss equilibria, so the flag is advisory.
    """
    if f.n != 2:
        raise PreconditionError("support enumeration needs a two-player game", players=f.n)
    tol = Config.TIE_TOL if tol is None else tol
    a, b = f.payoffs
    m, n = a.shape
    found = []
    degenerate = False

    for k in range(1, min(m, n) + 1):
        for rows in itertools.combinations(range(m), k):
            for cols in itertools.combinations(range(n), k):
                # player 2's mix makes player 1 indifferent, and vice versa
                col_side = _indifference(a, rows, cols)
                row_side = _indifference(b.T, cols, rows)
                if col_side is None or row_side is None:
                    degenerate = True
                    continue
                y_sup, u = col_side
                x_sup, w = row_side
                if np.any(x_sup < -tol) or np.any(y_sup < -tol):
                    continue

                x = _full_vector(m, rows, np.clip(x_sup, 0.0, None))
                y = _full_vector(n, cols, np.clip(y_sup, 0.0, None))
                x /= x.sum()
                y /= y.sum()

                row_payoffs = a @ y
                col_payoffs = x @ b
                if row_payoffs.max() > u + tol or col_payoffs.max() > w + tol:
                    continue

                unused_rows = [r for r in range(m) if r not in rows]
                unused_cols = [c for c in range(n) if c not in cols]
                if (np.any(row_payoffs[unused_rows] >= u - tol)
                        or np.any(col_payoffs[unused_cols] >= w - tol)):
                    degenerate = True
                if np.any(x_sup <= tol) or np.any(y_sup <= tol):
                    degenerate = True

                profile = MixedProfile(f.space, [x, y])
                if not any(p.allclose(profile, tol) for p in found):
                    found.append(profile)

    if degenerate:
        logger.warning(f"⚠️ support enumeration on {f.space.sizes}: game looks degenerate, "
                       f"equilibrium list may be incomplete")
    logger.info(f"✅ support enumeration found {len(found)} equilibria")
    return NashList(found, degenerate=degenerate, method='support')


# ==================== UNIFORM PROFILES ====================

def uniform_profile(space):
    return MixedProfile.uniform(space)


def verify_uniform_ne(f, tol=1e-10):
    """
    Uniform profile of a normalized zero-sum or normalized common-interest game.

    Checks the Nash property and the stronger fact that every pure strategy earns
    zero against the uniform opponents.
    """
    membership_tol = Config.default_tolerance()
    if not is_normalized(f, membership_tol):
        raise PreconditionError("game is not normalized", violated='normalized')
    if not (is_zero_sum(f, membership_tol) or is_common_interest(f, membership_tol)):
        raise PreconditionError("game is neither zero-sum nor common interest",
                                violated='zero_sum|common_interest')

    sigma = uniform_profile(f.space)
    if not is_nash(f, sigma, tol):
        return False
    return all(max_abs(own_payoffs(f, sigma, i)) <= tol for i in range(f.n))


# ==================== DOMINANT STRATEGIES ====================

@dataclass
class DominantStrategyResult:
    profile: tuple
    strict: bool
    maximizers: tuple

    def to_mixed(self, space):
        return MixedProfile.pure(space, self.profile)

    def to_dict(self):
        return {'profile': [int(k) for k in self.profile],
                'strict': self.strict,
                'maximizers': [[int(k) for k in group] for group in self.maximizers]}


def dominant_strategy(f, tol=None):
    """Dominant profile (argmax zeta_2, argmax zeta_1) of a two-player zero-sum equivalent potential game"""
    if f.n != 2:
        raise PreconditionError("dominant strategy extraction needs a two-player game", players=f.n)
    tol = Config.default_tolerance() if tol is None else tol
    form = extract_multilateral(f, tol)

    # player 1's strategic payoff is zeta_2(s_1); player 2's is zeta_1(s_2)
    own = [form.zeta[1], form.zeta[0]]
    maximizers = tuple(tuple(int(k) for k in np.flatnonzero(z >= z.max() - tol)) for z in own)
    profile = tuple(group[0] for group in maximizers)
    strict = all(len(group) == 1 for group in maximizers)
    return DominantStrategyResult(profile, strict, maximizers)


# ==================== MINIMAX ====================

def _simplex_max(matrix):
    """
    max 1.y s.t. matrix y <= 1, y >= 0 for a positive matrix, by a dense tableau with Bland's rule.

    Returns (objective, y, dual) where dual solves the companion covering program.
    """
    m, n = matrix.shape
    tableau = np.zeros((m + 1, n + m + 1))
    tableau[:m, :n] = matrix
    tableau[:m, n:n + m] = np.eye(m)
    tableau[:m, -1] = 1.0
    tableau[m, :n] = -1.0
    basis = list(range(n, n + m))
    eps = 1e-12

    while True:
        entering = next((c for c in range(n + m) if tableau[m, c] < -eps), None)
        if entering is None:
            break
        column = tableau[:m, entering]
        candidates = [(tableau[r, -1] / column[r], basis[r], r) for r in range(m) if column[r] > eps]
        # bounded: the feasible region sits inside a box because matrix > 0
        _, _, leaving = min(candidates)
        tableau[leaving] /= tableau[leaving, entering]
        for r in range(m + 1):
            if r != leaving:
                tableau[r] -= tableau[r, entering] * tableau[leaving]
        basis[leaving] = entering

    y = np.zeros(n + m)
    for r, var in enumerate(basis):
        y[var] = tableau[r, -1]
    dual = tableau[m, n:n + m].copy()
    return tableau[m, -1], y[:n], dual


@dataclass
class MinimaxResult:
    value: float
    strategies: tuple

    def to_profile(self, space):
        return MixedProfile(space, list(self.strategies))

    def to_dict(self):
        return {'value': self.value, 'strategies': [s.tolist() for s in self.strategies]}


def minimax(f, tol=None):
    """Value and optimal strategies of a two-player zero-sum game (player 1 maximizes f^(1))"""
    tol = Config.default_tolerance() if tol is None else tol
    if f.n != 2:
        raise NotZeroSumError("minimax needs a two-player game", players=f.n)
    violation = max_abs(f.payoffs.sum(axis=0))
    if violation > tol:
        raise NotZeroSumError("game is not zero-sum", worst_violation=violation)

    a = f.payoffs[0]
    shift = a.min() - 1.0
    positive = a - shift
    objective, y_raw, x_raw = _simplex_max(positive)
    value = 1.0 / objective + shift
    x = np.clip(x_raw, 0.0, None)
    y = np.clip(y_raw, 0.0, None)
    result = MinimaxResult(float(value), (x / x.sum(), y / y.sum()))

    if not is_nash(f, result.to_profile(f.space), Config.SOLVER_NASH_TOL):
        logger.warning("⚠️ minimax strategies fail the Nash check")
    logger.info(f"✅ minimax value {value:.6g}")
    return result


def minimax_nash(f, tol=None):
    result = minimax(f, tol)
    return NashList([result.to_profile(f.space)], degenerate=False, method='minimax',
                    extra={'value': result.value})


# ==================== GRIDS ====================

def _check_symmetric_three(f):
    if f.n != 2 or f.space.sizes != (3, 3):
        raise InvalidGameError("grid evaluation needs a two-player game with 3 strategies each",
                               sizes=list(f.space.sizes))
    # symmetric: f^(2)(s1, s2) = f^(1)(s2, s1)
    asymmetry = max_abs(f.payoffs[1] - f.payoffs[0].T)
    if asymmetry > Config.default_tolerance() * max(1.0, max_abs(f.payoffs)):
        raise InvalidSpecError("grid evaluation needs a symmetric game", asymmetry=asymmetry)


def phi_grid(f, resolution):
    """Phi_f at symmetric profiles sigma_1 = sigma_2 = p over a barycentric grid"""
    _check_symmetric_three(f)
    if resolution < 2:
        raise InvalidGameError("resolution must be at least 2", resolution=resolution)
    points = barycentric_grid(resolution)
    values = []
    for p in points:
        sigma = MixedProfile(f.space, [p, p])
        values.append(phi(f, sigma))
    frame = pd.DataFrame(points, columns=['p1', 'p2', 'p3'])
    frame['phi'] = values
    return frame


def potential_grid(f, resolution):
    """Expected potential E_sigma[v] at symmetric profiles of a potential game"""
    _check_symmetric_three(f)
    if resolution < 2:
        raise InvalidGameError("resolution must be at least 2", resolution=resolution)
    v = extract_potential(f)
    points = barycentric_grid(resolution)
    values = [float(contract(v, [p, p])) for p in points]
    frame = pd.DataFrame(points, columns=['p1', 'p2', 'p3'])
    frame['potential'] = values
    return frame


# ==================== COMBINATIONS ====================

def linear_combination_ne_check(f, g, sigma, rho, rho_prime, tol=None):
    """A profile that is Nash for f and g stays Nash for rho f + rho' g when rho, rho' > 0"""
    tol = Config.SOLVER_NASH_TOL if tol is None else tol
    if rho <= 0 or rho_prime <= 0:
        raise PreconditionError("weights must be positive", rho=rho, rho_prime=rho_prime)
    if not is_nash(f, sigma, tol):
        raise PreconditionError("profile is not a Nash equilibrium of the first game")
    if not is_nash(g, sigma, tol):
        raise PreconditionError("profile is not a Nash equilibrium of the second game")
    combined = Game(f.space, rho * f.payoffs + rho_prime * g.payoffs)
    return is_nash(combined, sigma, tol)


SOLVERS = ('pure', 'support', 'uniform', 'dominant', 'minimax')


def solve(f, method, tol=None):
    """Dispatch a named solver and return a NashList"""
    if method == 'pure':
        return pure_nash(f, tol)
    if method == 'support':
        return bimatrix_nash(f, tol)
    if method == 'uniform':
        ok = verify_uniform_ne(f)
        profiles = [uniform_profile(f.space)] if ok else []
        return NashList(profiles, degenerate=False, method='uniform', extra={'verified': ok})
    if method == 'dominant':
        result = dominant_strategy(f, tol)
        return NashList([result.to_mixed(f.space)], degenerate=not result.strict, method='dominant',
                        extra={'strict': result.strict})
    if method == 'minimax':
        return minimax_nash(f, tol)
    raise InvalidGameError(f"unknown method {method!r}", known=list(SOLVERS))
