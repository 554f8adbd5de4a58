"""Membership tests for the classes of games and constructive extractors"""
import logging
from dataclasses import dataclass, field

import numpy as np

from config import Config
from services.errors import (InternalConsistencyError, NotInBError, NotPotentialError,
                             NotSymmetricError, NotZeroSumEquivalentError)
from services.game_core import Game, non_strategic_residual, norm, own_axis_mean
from services.subspace_engine import decompose_main
from utils import max_abs, subsets

logger = logging.getLogger(__name__)


def _tol(tol):
    return Config.default_tolerance() if tol is None else tol


# ==================== DEFINITIONAL CHECKS ====================

def is_common_interest(f, tol=None):
    return max_abs(f.payoffs - f.payoffs[0]) <= _tol(tol)


def is_zero_sum(f, tol=None):
    return max_abs(f.payoffs.sum(axis=0)) <= _tol(tol)


def is_normalized(f, tol=None):
    return all(max_abs(f.payoffs[i].sum(axis=i)) <= _tol(tol) for i in range(f.n))


def is_non_strategic(f, tol=None):
    return non_strategic_residual(f.payoffs) <= _tol(tol)


# ==================== CYCLE CONDITIONS ====================

@dataclass
class CycleTestResult:
    passed: bool
    worst_violation: float

    def __bool__(self):
        return self.passed

    def to_dict(self):
        return {'pass': self.passed, 'worst_violation': self.worst_violation}


def _pair_violation(y, i, j):
    """Worst |y(s_i,s_j) - y(t_i,s_j) - y(s_i,t_j) + y(t_i,t_j)| over strategies and spectators"""
    y = np.moveaxis(y, (i, j), (0, 1))
    worst = 0.0
    for t_i in range(y.shape[0]):
        r = y - y[t_i:t_i + 1]
        for t_j in range(y.shape[1]):
            m = r - r[:, t_j:t_j + 1]
            worst = max(worst, max_abs(m))
    return worst


def potential_cycle_test(f, tol=None):
    """
    Pairwise Monderer-Shapley condition with spectator coordinates fixed.

    For every pair of players (i, j) the second mixed difference of f^(i) over the
    (i, j) coordinates must equal that of f^(j).
    """
    worst = 0.0
    for i in range(f.n):
        for j in range(i + 1, f.n):
            worst = max(worst, _pair_violation(f.payoffs[i] - f.payoffs[j], i, j))
    return CycleTestResult(worst <= _tol(tol), worst)


def _cube_differences(tensor):
    """Alternating sums over every cube S(a, b) with a_l < b_l on each axis"""
    result = tensor
    for axis in range(tensor.ndim):
        size = result.shape[axis]
        a, b = np.triu_indices(size, k=1)
        result = np.take(result, a, axis=axis) - np.take(result, b, axis=axis)
    return result


def _cube_term_count(sizes):
    count = 1
    for size in sizes:
        count *= max(1, size * (size - 1) // 2)
    return count


def zero_sum_cycle_test(f, tol=None):
    """
    sum_i sum_{s in S(a,b)} (-1)^#(s) f^(i)(s) = 0 for every choice of a_l, b_l.

    Only the player sum F = sum_i f^(i) enters. Cubes with a_l = b_l on some axis vanish,
    and swapping a_l with b_l flips the sign, so a_l < b_l covers every magnitude.
    """
    total = f.payoffs.sum(axis=0)
    if any(size < 2 for size in f.space.sizes):
        return CycleTestResult(True, 0.0)

    if _cube_term_count(f.space.sizes) <= Config.MAX_CYCLE_TERMS:
        worst = max_abs(_cube_differences(total))
    else:
        # anchored form: b = base profile; zero for every a iff zero for every (a, b)
        logger.warning(f"⚠️ zero-sum cycle scan on {f.space.sizes} exceeds "
                       f"{Config.MAX_CYCLE_TERMS} terms, using base-anchored cubes")
        anchored = total
        for axis in range(total.ndim):
            anchored = anchored - np.take(anchored, [0], axis=axis)
        worst = max_abs(anchored)
    return CycleTestResult(worst <= _tol(tol), worst)


def symmetric_zero_sum_test(f, tol=None):
    """Two-player symmetric form: f1(s,t) - f1(t,t) + f1(t,s) - f1(s,s) = 0 for all s, t"""
    tol = _tol(tol)
    if f.n != 2 or f.space.sizes[0] != f.space.sizes[1]:
        raise NotSymmetricError("symmetric test needs a two-player game with equal strategy counts",
                                sizes=list(f.space.sizes))
    a, b = f.payoffs
    asymmetry = max_abs(a - b.T)
    if asymmetry > tol:
        raise NotSymmetricError("game is not symmetric: f1(s,t) != f2(t,s)", worst_violation=asymmetry)

    d = np.diag(a)
    m = a - d[None, :] + a.T - d[:, None]
    return max_abs(m) <= tol


@dataclass
class AxisConstancyResult:
    passed: bool
    witness: list

    def to_dict(self):
        return {'pass': self.passed,
                'witness': [None if l is None else l + 1 for l in self.witness]}


def prop_zero_test(f, tol=None):
    """
    For each player i, look for a coordinate l with f^(i) constant along axis l.

    The search tries l = i first, then the other coordinates in order. Passing means
    the game is strategically equivalent to a zero-sum game.
    """
    tol = _tol(tol)
    witness = []
    for i in range(f.n):
        found = None
        for l in [i] + [k for k in range(f.n) if k != i]:
            tensor = f.payoffs[i]
            if max_abs(tensor - own_axis_mean(tensor, l)) <= tol:
                found = l
                break
        witness.append(found)
    return AxisConstancyResult(all(l is not None for l in witness), witness)


# ==================== EXTRACTORS ====================

def extract_potential(f, tol=None, order=None):
    """
    Potential v with v(base) = 0, base = first strategy of every player.

    v(s) sums own-payoff differences along a coordinate path from the base profile,
    changing coordinates in ``order`` (player order by default).
    """
    tol = _tol(tol)
    test = potential_cycle_test(f, tol)
    if not test.passed:
        raise NotPotentialError("game fails the potential cycle test",
                                worst_violation=test.worst_violation)

    order = list(range(f.n)) if order is None else list(order)
    sizes = f.space.sizes
    v = np.zeros(sizes)
    changed = set()
    for i in order:
        # f^(i) with coordinates not yet changed (other than i) pinned at base
        index = tuple(slice(None) if (k in changed or k == i) else slice(0, 1) for k in range(f.n))
        step = f.payoffs[i][index]
        step = step - np.take(step, [0], axis=i)
        v = v + np.broadcast_to(step, sizes)
        changed.add(i)
    return v


def potential_function_check(f, v):
    """Worst mismatch between unilateral payoff differences and potential differences"""
    worst = 0.0
    for i in range(f.n):
        gap = f.payoffs[i] - v
        worst = max(worst, max_abs(gap - own_axis_mean(gap, i)))
    return worst


def anova_terms(tensor):
    """
    Hoeffding expansion v = sum_U v_U over coordinate subsets U.

    v_U = prod_{l in U} (I - T_l) prod_{l not in U} T_l v depends only on coordinates in U.
    Terms are returned at full shape.
    """
    n = tensor.ndim
    terms = {}
    for subset in subsets(n):
        term = np.array(tensor, dtype=float)
        for axis in range(n):
            mean = term.mean(axis=axis, keepdims=True)
            term = term - mean if axis in subset else np.broadcast_to(mean, term.shape).copy()
        terms[subset] = term
    return terms


def _omitted_groups(tensor):
    """Group the non-full ANOVA terms by their smallest omitted coordinate"""
    n = tensor.ndim
    everyone = frozenset(range(n))
    groups = [np.zeros(tensor.shape) for _ in range(n)]
    for subset, term in anova_terms(tensor).items():
        if subset == everyone:
            continue
        groups[min(everyone - subset)] += term
    return groups


@dataclass
class ZeroSumForm:
    """f = w + h with w zero-sum and h non-strategic"""

    w: Game
    h: Game

    def to_game(self):
        return self.w + self.h


def extract_zero_sum_form(f, tol=None):
    tol = _tol(tol)
    test = zero_sum_cycle_test(f, tol)
    if not test.passed:
        raise NotZeroSumEquivalentError("game fails the zero-sum cycle test",
                                        worst_violation=test.worst_violation)

    groups = _omitted_groups(f.payoffs.sum(axis=0))
    h = Game(f.space, np.stack(groups))
    w = Game(f.space, f.payoffs - h.payoffs)
    return ZeroSumForm(w, h)


@dataclass
class MultilateralForm:
    """zeta_l over S_{-l}; the game (sum_{l != i} zeta_l)_i is equivalent to the source game"""

    zeta: list = field(default_factory=list)

    def full(self, l, sizes):
        return np.broadcast_to(np.expand_dims(self.zeta[l], l), sizes)

    def to_game(self, space):
        sizes = space.sizes
        expanded = [self.full(l, sizes) for l in range(space.n)]
        total = np.sum(expanded, axis=0)
        return Game(space, np.stack([total - expanded[i] for i in range(space.n)]))


def extract_multilateral(f, tol=None):
    tol = _tol(tol)
    potential = potential_cycle_test(f, tol)
    zero_sum = zero_sum_cycle_test(f, tol)
    if not (potential.passed and zero_sum.passed):
        raise NotInBError("game is not a zero-sum equivalent potential game",
                          worst_violation=max(potential.worst_violation, zero_sum.worst_violation),
                          potential_violation=potential.worst_violation,
                          zero_sum_violation=zero_sum.worst_violation)

    v = extract_potential(f, tol)
    groups = _omitted_groups(v)
    zeta = [np.take(groups[l], 0, axis=l) for l in range(f.n)]
    return MultilateralForm(zeta)


# ==================== CLASSIFICATION ====================

@dataclass
class ClassificationReport:
    flags: dict
    violations: dict
    component_norms: dict

    def to_dict(self):
        return {'flags': dict(self.flags),
                'violations': dict(self.violations),
                'component_norms': dict(self.component_norms)}


def _cross_check(name, flag, component_norm, violation, scale):
    """Cycle evidence and projection evidence must agree unless both sit near the threshold"""
    limit = Config.CROSS_CHECK_TOL * scale
    if flag and component_norm > limit:
        raise InternalConsistencyError(
            f"{name}: cycle test passes but the orthogonal component has norm {component_norm:.3e}",
            component_norm=component_norm, worst_violation=violation)
    if not flag and component_norm <= Config.ORTHOGONALITY_TOL * scale and violation > limit:
        raise InternalConsistencyError(
            f"{name}: cycle test fails by {violation:.3e} but the orthogonal component vanishes",
            component_norm=component_norm, worst_violation=violation)
    if not flag and component_norm <= limit:
        logger.warning(f"⚠️ {name}: near-threshold evidence (violation {violation:.3e}, "
                       f"component norm {component_norm:.3e})")


def classify(f, tol=None):
    tol = _tol(tol)
    potential = potential_cycle_test(f, tol)
    zero_sum_eq = zero_sum_cycle_test(f, tol)
    main = decompose_main(f)
    norms = main.component_norms
    scale = max(1.0, norm(f))

    # potential <=> f_NZ = 0 ; zero-sum equivalent <=> f_NC = 0
    _cross_check('potential', potential.passed, norms['NZ'], potential.worst_violation, scale)
    _cross_check('zero_sum_equivalent', zero_sum_eq.passed, norms['NC'], zero_sum_eq.worst_violation,
                 scale)

    flags = {
        'common_interest': is_common_interest(f, tol),
        'zero_sum': is_zero_sum(f, tol),
        'normalized': is_normalized(f, tol),
        'non_strategic': is_non_strategic(f, tol),
        'potential': potential.passed,
        'zero_sum_equivalent': zero_sum_eq.passed,
        'zs_potential_B': potential.passed and zero_sum_eq.passed,
    }
    violations = {
        'potential_cycle': potential.worst_violation,
        'zero_sum_cycle': zero_sum_eq.worst_violation,
        'non_strategic': non_strategic_residual(f.payoffs),
        'player_sum': max_abs(f.payoffs.sum(axis=0)),
    }
    logger.info(f"✅ classified game {f.space.sizes}: potential={flags['potential']}, "
                f"zero_sum_equivalent={flags['zero_sum_equivalent']}")
    return ClassificationReport(flags, violations, norms)
