"""Finite normal-form games as vectors in an inner-product space"""
import logging
import math
from dataclasses import dataclass

import numpy as np

from config import Config
from services.errors import (GameTooLargeError, InvalidGameError, InvalidProfileError,
                             ShapeMismatchError)

logger = logging.getLogger(__name__)

_INDEX_LIMIT = np.iinfo(np.int64).max


@dataclass(frozen=True)
class StrategySpace:
    """Players and their labeled strategy sets, S = S_1 x ... x S_n"""

    labels: tuple

    def __post_init__(self):
        labels = tuple(tuple(str(label) for label in player) for player in self.labels)
        object.__setattr__(self, 'labels', labels)

        if len(labels) < 2:
            raise InvalidGameError(f"a game needs at least 2 players, got {len(labels)}")
        for i, player in enumerate(labels):
            if len(player) < 1:
                raise InvalidGameError(f"player {i + 1} has no strategies")

        count = 1
        for size in self.sizes:
            count *= size
            if count > _INDEX_LIMIT:
                raise GameTooLargeError("profile count exceeds the native integer range",
                                        sizes=list(self.sizes))

    @classmethod
    def from_sizes(cls, sizes):
        return cls(tuple(tuple(str(k + 1) for k in range(size)) for size in sizes))

    @property
    def n(self):
        return len(self.labels)

    @property
    def sizes(self):
        return tuple(len(player) for player in self.labels)

    @property
    def profile_count(self):
        return math.prod(self.sizes)

    @property
    def payoff_count(self):
        return self.n * self.profile_count

    def same_shape(self, other):
        return self.sizes == other.sizes


class Game:
    """
    Payoff tensors f = (f^(1), ..., f^(n)) over a strategy space.

    ``payoffs`` has shape (n, |S_1|, ..., |S_n|); its C-order flattening is the
    canonical row-major layout with s_1 outermost inside each player block.
    """

    __slots__ = ('space', 'payoffs')

    def __init__(self, space, payoffs):
        array = np.array(payoffs, dtype=float)
        expected = (space.n,) + space.sizes
        if array.shape != expected:
            raise InvalidGameError(f"payoff array has shape {array.shape}, expected {expected}",
                                   shape=list(array.shape), expected=list(expected))
        if not np.all(np.isfinite(array)):
            raise InvalidGameError("payoffs must be finite (no NaN or infinity)")
        array.flags.writeable = False
        object.__setattr__(self, 'space', space)
        object.__setattr__(self, 'payoffs', array)

    def __setattr__(self, name, value):
        raise AttributeError("Game is immutable")

    @classmethod
    def from_arrays(cls, arrays, labels=None):
        """Build a game from one payoff tensor per player"""
        arrays = [np.asarray(a, dtype=float) for a in arrays]
        if labels is None:
            space = StrategySpace.from_sizes(arrays[0].shape)
        else:
            space = StrategySpace(tuple(tuple(p) for p in labels))
        return cls(space, np.stack(arrays))

    @classmethod
    def zeros(cls, space):
        return cls(space, np.zeros((space.n,) + space.sizes))

    def with_payoffs(self, payoffs):
        return Game(self.space, payoffs)

    @property
    def n(self):
        return self.space.n

    @property
    def flat(self):
        return self.payoffs.reshape(-1)

    def payoff(self, i):
        return self.payoffs[i]

    def allclose(self, other, tol=1e-9):
        _check_same_space(self, other)
        return bool(np.max(np.abs(self.payoffs - other.payoffs), initial=0.0) <= tol)

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __neg__(self):
        return scale(self, -1.0)

    def __mul__(self, c):
        return scale(self, c)

    __rmul__ = __mul__

    def __repr__(self):
        return f"Game(n={self.n}, sizes={self.space.sizes})"


class MixedProfile:
    """Per-player probability vectors sigma_i over S_i"""

    __slots__ = ('space', 'vectors')

    def __init__(self, space, vectors):
        vectors = list(vectors)
        if len(vectors) != space.n:
            raise InvalidProfileError(f"profile has {len(vectors)} strategies, game has {space.n} players")

        checked = []
        for i, (vector, size) in enumerate(zip(vectors, space.sizes)):
            v = np.array(vector, dtype=float).reshape(-1)
            if v.shape != (size,):
                raise InvalidProfileError(f"player {i + 1} strategy has length {v.size}, expected {size}",
                                          player=i + 1)
            if not np.all(np.isfinite(v)):
                raise InvalidProfileError(f"player {i + 1} strategy is not finite", player=i + 1)
            if np.any(v < -Config.PROFILE_CLAMP):
                raise InvalidProfileError(f"player {i + 1} strategy has negative mass {v.min():.3e}",
                                          player=i + 1)
            v[v < 0] = 0.0
            if abs(v.sum() - 1.0) > Config.PROFILE_SUM_TOL:
                raise InvalidProfileError(f"player {i + 1} strategy sums to {v.sum():.15g}, not 1",
                                          player=i + 1)
            v.flags.writeable = False
            checked.append(v)

        object.__setattr__(self, 'space', space)
        object.__setattr__(self, 'vectors', tuple(checked))

    def __setattr__(self, name, value):
        raise AttributeError("MixedProfile is immutable")

    @classmethod
    def pure(cls, space, profile):
        vectors = []
        for k, size in zip(profile, space.sizes):
            v = np.zeros(size)
            v[k] = 1.0
            vectors.append(v)
        return cls(space, vectors)

    @classmethod
    def uniform(cls, space):
        return cls(space, [np.full(size, 1.0 / size) for size in space.sizes])

    def __getitem__(self, i):
        return self.vectors[i]

    def to_lists(self):
        return [v.tolist() for v in self.vectors]

    def allclose(self, other, tol=1e-9):
        return all(np.max(np.abs(a - b)) <= tol for a, b in zip(self.vectors, other.vectors))

    def __repr__(self):
        body = ', '.join(np.array2string(v, precision=4) for v in self.vectors)
        return f"MixedProfile({body})"


# ==================== VECTOR SPACE ====================

def _check_same_space(f, g):
    if f.space.n != g.space.n:
        raise ShapeMismatchError("games have different player counts",
                                 dimension='players', left=f.space.n, right=g.space.n)
    for i, (a, b) in enumerate(zip(f.space.sizes, g.space.sizes)):
        if a != b:
            raise ShapeMismatchError(f"player {i + 1} has {a} vs {b} strategies",
                                     dimension=f'strategies[{i + 1}]', left=a, right=b)


def inner_product(f, g):
    """<f, g> = sum_i sum_s f^(i)(s) g^(i)(s) under the counting measure"""
    _check_same_space(f, g)
    return float(np.dot(f.flat, g.flat))


def norm(f):
    return float(np.sqrt(np.dot(f.flat, f.flat)))


def add(f, g):
    _check_same_space(f, g)
    return Game(f.space, f.payoffs + g.payoffs)


def sub(f, g):
    _check_same_space(f, g)
    return Game(f.space, f.payoffs - g.payoffs)


def scale(f, c):
    return Game(f.space, f.payoffs * float(c))


# ==================== MIXED EXTENSION ====================

def _check_profile(f, sigma):
    if not f.space.same_shape(sigma.space):
        raise InvalidProfileError("profile does not match the game's strategy space",
                                  game=list(f.space.sizes), profile=list(sigma.space.sizes))


def contract(tensor, vectors, skip=None):
    """Contract every axis of ``tensor`` except ``skip`` against the given vectors"""
    result = tensor
    for axis in reversed(range(len(vectors))):
        if axis == skip:
            continue
        result = np.tensordot(result, vectors[axis], axes=([axis], [0]))
    return result


def own_payoffs(f, sigma, i):
    """Vector of f^(i)(t_i, sigma_{-i}) over pure t_i"""
    _check_profile(f, sigma)
    return contract(f.payoffs[i], sigma.vectors, skip=i)


def expected_payoff(f, sigma, i):
    """f^(i)(sigma) = sum_s f^(i)(s) prod_k sigma_k(s_k)"""
    return float(own_payoffs(f, sigma, i) @ sigma[i])


def deviation_gain(f, sigma, i):
    """Best pure deviation payoff for player i minus the current expected payoff"""
    u = own_payoffs(f, sigma, i)
    return float(np.max(u) - u @ sigma[i])


def is_nash(f, sigma, tol=None):
    tol = Config.default_tolerance() if tol is None else tol
    return all(deviation_gain(f, sigma, i) <= tol for i in range(f.n))


def own_axis_mean(tensor, axis):
    """T_l: average over one coordinate, broadcast back to the full shape"""
    return np.broadcast_to(tensor.mean(axis=axis, keepdims=True), tensor.shape)


def non_strategic_residual(payoffs):
    """max_i |h^(i) - T_i h^(i)|, zero iff h is non-strategic"""
    return max(float(np.max(np.abs(payoffs[i] - own_axis_mean(payoffs[i], i))))
               for i in range(payoffs.shape[0]))


def is_strategically_equivalent(f, g, tol=None):
    """True iff f - g is non-strategic within ``tol``"""
    tol = Config.default_tolerance() if tol is None else tol
    _check_same_space(f, g)
    return non_strategic_residual(f.payoffs - g.payoffs) <= tol
