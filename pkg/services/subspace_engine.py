"""
Orthogonal projections onto the subspaces of games and the decompositions built from them.

Subspaces of L (all games over a fixed strategy space):
    C   common interest          Z   zero-sum
    N   normalized               E   non-strategic
    NC  = N & C                  NZ  = N & Z

Closed forms: E = Lambda (own-strategy averages T_i), C = player average, NC = Q applied to the
player average with Q = prod_l (I - T_l). NZ = (I - T_i)(f^(i) - mu) per player, where mu solves
sum_l (I - T_l) mu = sum_i (I - T_i) f^(i); that operator scales each Hoeffding term of order k by k.
The constraint-kernel projector covers every subspace on small games and cross-checks the closed forms.
"""
import logging
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import linalg

from config import Config
from services.errors import GameTooLargeError, InternalConsistencyError, InvalidSpecError
from services.game_core import Game, inner_product, norm, own_axis_mean
from utils import subsets

logger = logging.getLogger(__name__)

KINDS = ('E', 'N', 'C', 'Z', 'NC', 'NZ', 'generic')


# ==================== CLOSED-FORM OPERATORS ====================

def lambda_map(payoffs):
    """Lambda(f) = (T_1 f^(1), ..., T_n f^(n))"""
    return np.stack([own_axis_mean(payoffs[i], i) for i in range(payoffs.shape[0])])


def player_average(payoffs):
    """Phi-map: every component replaced by (1/n) sum_i f^(i)"""
    return np.broadcast_to(payoffs.mean(axis=0, keepdims=True), payoffs.shape).copy()


def full_interaction(tensor):
    """Q v = prod_l (I - T_l) v, the part of v that depends jointly on every coordinate"""
    result = np.array(tensor, dtype=float)
    for axis in range(result.ndim):
        result = result - result.mean(axis=axis, keepdims=True)
    return result


def project_E(f):
    return Game(f.space, lambda_map(f.payoffs))


def project_N(f):
    return Game(f.space, f.payoffs - lambda_map(f.payoffs))


def project_C(f):
    return Game(f.space, player_average(f.payoffs))


def project_Z(f):
    return Game(f.space, f.payoffs - player_average(f.payoffs))


def project_NC(f):
    """Projection onto N & C: the player average followed by Q on the common function"""
    common = full_interaction(f.payoffs.mean(axis=0))
    return Game(f.space, np.broadcast_to(common, f.payoffs.shape))


# ==================== CONSTRAINT SETS ====================

def _index_tensor(space):
    return np.arange(space.payoff_count).reshape((space.n,) + space.sizes)


def _own_axis_groups(idx, i):
    """Rows of flat indices, one row per s_{-i}, running along player i's own axis"""
    own = np.moveaxis(idx[i], i, -1)
    return own.reshape(-1, own.shape[-1])


def _zero_sum_rows(space):
    idx = _index_tensor(space)
    rows = np.zeros((space.profile_count, space.payoff_count))
    r = np.arange(space.profile_count)
    for i in range(space.n):
        rows[r, idx[i].reshape(-1)] = 1.0
    return rows


def _common_interest_rows(space):
    idx = _index_tensor(space)
    count = space.profile_count
    rows = np.zeros(((space.n - 1) * count, space.payoff_count))
    r = np.arange(count)
    for i in range(space.n - 1):
        rows[i * count + r, idx[i].reshape(-1)] = 1.0
        rows[i * count + r, idx[i + 1].reshape(-1)] = -1.0
    return rows


def _normalized_rows(space):
    idx = _index_tensor(space)
    blocks = []
    for i in range(space.n):
        groups = _own_axis_groups(idx, i)
        block = np.zeros((groups.shape[0], space.payoff_count))
        block[np.arange(groups.shape[0])[:, None], groups] = 1.0
        blocks.append(block)
    return np.vstack(blocks)


def _non_strategic_rows(space):
    # (I - T_i) f^(i) = 0, one row per entry; redundant rows are absorbed by the rank cut
    idx = _index_tensor(space)
    blocks = []
    for i in range(space.n):
        groups = _own_axis_groups(idx, i)
        size = groups.shape[1]
        block = np.zeros((groups.size, space.payoff_count))
        for k in range(size):
            rows = np.arange(groups.shape[0]) * size + k
            block[rows[:, None], groups] = -1.0 / size
            block[rows, groups[:, k]] += 1.0
        blocks.append(block)
    return np.vstack(blocks)


_ROW_BUILDERS = {
    'zero_sum': (_zero_sum_rows,),
    'common_interest': (_common_interest_rows,),
    'normalized': (_normalized_rows,),
    'non_strategic': (_non_strategic_rows,),
    'normalized_zero_sum': (_normalized_rows, _zero_sum_rows),
    'normalized_common_interest': (_normalized_rows, _common_interest_rows),
}

# subspace kind -> named constraint set whose kernel it is
SUBSPACE_CONSTRAINTS = {
    'C': 'common_interest',
    'Z': 'zero_sum',
    'N': 'normalized',
    'E': 'non_strategic',
    'NC': 'normalized_common_interest',
    'NZ': 'normalized_zero_sum',
}


@dataclass(frozen=True)
class ConstraintSet:
    """Linear functionals over the flat game vector; the target subspace is their common kernel"""

    name: str
    builders: tuple = field(compare=False)

    @classmethod
    def named(cls, name):
        if name not in _ROW_BUILDERS:
            raise InvalidSpecError(f"unknown constraint set {name!r}", known=sorted(_ROW_BUILDERS))
        return cls(name, _ROW_BUILDERS[name])

    def matrix(self, space):
        _guard_size(space, rows=self.row_count(space))
        return np.vstack([build(space) for build in self.builders])

    def row_count(self, space):
        count = 0
        for build in self.builders:
            if build is _zero_sum_rows:
                count += space.profile_count
            elif build is _common_interest_rows:
                count += (space.n - 1) * space.profile_count
            elif build is _normalized_rows:
                count += sum(space.profile_count // s for s in space.sizes)
            else:
                count += space.payoff_count
        return count


def _guard_entries(space):
    if space.payoff_count > Config.MAX_PAYOFF_ENTRIES:
        raise GameTooLargeError(
            f"game has {space.payoff_count} payoff entries, above the cap of "
            f"{Config.MAX_PAYOFF_ENTRIES}; use a smaller game or raise GAMEDECOMP_MAX_ENTRIES",
            payoff_entries=space.payoff_count)


def _guard_size(space, rows):
    _guard_entries(space)
    cells = rows * space.payoff_count
    if cells > Config.MAX_CONSTRAINT_CELLS:
        raise GameTooLargeError(
            f"constraint matrix would have {cells} cells, above the cap of "
            f"{Config.MAX_CONSTRAINT_CELLS}; use a smaller game",
            constraint_cells=cells)


@lru_cache(maxsize=64)
def _row_space_basis(constraints, space):
    """Orthonormal basis of the constraint row space via QR with column pivoting"""
    A = constraints.matrix(space)
    q, r, _ = linalg.qr(A.T, mode='economic', pivoting=True)
    diag = np.abs(np.diag(r))
    if diag.size == 0 or diag[0] == 0.0:
        return np.zeros((space.payoff_count, 0))
    rank = int(np.sum(diag > diag[0] * max(A.shape) * np.finfo(float).eps))
    logger.debug(f"constraint set {constraints.name} on {space.sizes}: {A.shape[0]} rows, rank {rank}")
    basis = q[:, :rank]
    basis.flags.writeable = False
    return basis


def generic_project(constraints, f):
    """Orthogonal projection of f onto the kernel of ``constraints`` (a ConstraintSet or set name)"""
    if isinstance(constraints, str):
        constraints = ConstraintSet.named(constraints)
    basis = _row_space_basis(constraints, f.space)
    x = f.flat
    projected = x - basis @ (basis.T @ x)
    return Game(f.space, projected.reshape(f.payoffs.shape))


def subspace_dimension(kind, space):
    """Dimension of a subspace of L, from the rank of its constraint matrix"""
    if kind not in SUBSPACE_CONSTRAINTS:
        raise InvalidSpecError(f"unknown subspace {kind!r}", known=sorted(SUBSPACE_CONSTRAINTS))
    basis = _row_space_basis(ConstraintSet.named(SUBSPACE_CONSTRAINTS[kind]), space)
    return space.payoff_count - basis.shape[1]


# ==================== PROJECTOR OBJECTS ====================

@dataclass(frozen=True)
class Projector:
    kind: str
    constraints: ConstraintSet = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidSpecError(f"unknown projector kind {self.kind!r}", known=list(KINDS))
        if self.kind == 'generic' and self.constraints is None:
            raise InvalidSpecError("a generic projector needs a constraint set")

    def __call__(self, f):
        if self.kind == 'generic':
            return generic_project(self.constraints, f)
        return _CLOSED_FORMS[self.kind](f)

    @classmethod
    def generic(cls, name):
        return cls('generic', ConstraintSet.named(name))


def _inverse_interaction_order(tensor):
    """Zero-mean mu with sum_l (I - T_l) mu = v: every Hoeffding term v_U divided by |U|"""
    n = tensor.ndim
    result = np.zeros(tensor.shape)
    for subset in subsets(n):
        if not subset:
            continue
        term = np.array(tensor, dtype=float)
        for axis in range(n):
            mean = term.mean(axis=axis, keepdims=True)
            term = term - mean if axis in subset else mean
        result = result + term / len(subset)
    return result


def project_NZ(f):
    """Projection onto N & Z: f^(i) - mu made normalized along player i's own axis"""
    _guard_entries(f.space)
    own_free = f.payoffs - lambda_map(f.payoffs)
    mu = _inverse_interaction_order(own_free.sum(axis=0))
    shifted = f.payoffs - mu
    return Game(f.space, shifted - lambda_map(shifted))


_CLOSED_FORMS = {
    'E': project_E,
    'N': project_N,
    'C': project_C,
    'Z': project_Z,
    'NC': project_NC,
    'NZ': project_NZ,
}


# ==================== DECOMPOSITIONS ====================

@dataclass
class DecompositionResult:
    scheme: str
    components: dict
    residual: float
    component_norms: dict

    def component(self, name):
        return self.components[name]

    def total(self):
        games = list(self.components.values())
        result = games[0]
        for g in games[1:]:
            result = result + g
        return result


def _assemble(scheme, f, components):
    """Check orthogonality, reconstruction and Pythagoras, then package the result"""
    names = list(components)
    f_norm_sq = inner_product(f, f)
    scale_sq = max(1.0, f_norm_sq)

    for a in range(len(names)):
        for b in range(a + 1, len(names)):
            overlap = inner_product(components[names[a]], components[names[b]])
            if abs(overlap) > Config.ORTHOGONALITY_TOL * scale_sq:
                raise InternalConsistencyError(
                    f"{scheme}: components {names[a]} and {names[b]} are not orthogonal",
                    inner_product=overlap)

    total = np.sum([g.payoffs for g in components.values()], axis=0)
    residual = float(np.linalg.norm((f.payoffs - total).reshape(-1)))
    if residual > Config.RESIDUAL_TOL * max(1.0, np.sqrt(f_norm_sq)):
        raise InternalConsistencyError(f"{scheme}: components do not reconstruct the game",
                                       residual=residual)

    norms = {name: norm(g) for name, g in components.items()}
    gap = abs(f_norm_sq - sum(v * v for v in norms.values()))
    if gap > Config.PYTHAGORAS_TOL * scale_sq:
        raise InternalConsistencyError(f"{scheme}: squared norms do not add up", gap=gap)

    logger.debug(f"{scheme} decomposition of {f.space.sizes}: residual {residual:.2e}")
    return DecompositionResult(scheme, components, residual, norms)


def decompose_elementary(f):
    """f = f_C + f_Z and f = f_N + f_E"""
    cz = _assemble('elementary-cz', f, {'C': project_C(f), 'Z': project_Z(f)})
    ne = _assemble('elementary-ne', f, {'N': project_N(f), 'E': project_E(f)})
    return cz, ne


def _main_parts(f):
    f_nc = project_NC(f)
    f_nz = project_NZ(f)
    f_b = Game(f.space, f.payoffs - f_nc.payoffs - f_nz.payoffs)
    return f_nc, f_nz, f_b


def decompose_main(f):
    """f = f_NC + f_NZ + f_B with f_B zero-sum equivalent and potential"""
    f_nc, f_nz, f_b = _main_parts(f)
    return _assemble('main', f, {'NC': f_nc, 'NZ': f_nz, 'B': f_b})


def decompose_four(f):
    """Orthogonal refinement f = f_NC + f_NZ + f_NB + f_E with f_E = Lambda f"""
    f_nc, f_nz, f_b = _main_parts(f)
    f_e = project_E(f)
    f_nb = Game(f.space, f_b.payoffs - f_e.payoffs)
    return _assemble('four', f, {'NC': f_nc, 'NZ': f_nz, 'NB': f_nb, 'E': f_e})


def decompose_candogan(f):
    """Potential, non-strategic and harmonic components"""
    f_nc, f_nz, f_b = _main_parts(f)
    f_e = project_E(f)
    potential = Game(f.space, f_b.payoffs - f_e.payoffs + f_nc.payoffs)
    return _assemble('candogan', f, {'potential': potential, 'nonstrategic': f_e, 'harmonic': f_nz})


SCHEMES = ('elementary', 'main', 'four', 'candogan')


def decompose(f, scheme):
    """Run a named scheme; always returns a list (elementary yields two results)"""
    if scheme == 'elementary':
        results = list(decompose_elementary(f))
    elif scheme == 'main':
        results = [decompose_main(f)]
    elif scheme == 'four':
        results = [decompose_four(f)]
    elif scheme == 'candogan':
        results = [decompose_candogan(f)]
    else:
        raise InvalidSpecError(f"unknown scheme {scheme!r}", known=list(SCHEMES))
    logger.info(f"✅ {scheme} decomposition done for game with sizes {f.space.sizes}")
    return results
