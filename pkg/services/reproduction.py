"""
Reproduction suite for the worked examples: the four-component illustration, its equilibria,
projector identities, cycle tests, extractors and the discretized continuous games.

Each check returns a CheckResult; run_all() collects them into a pandas DataFrame.
"""
import logging
from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy.optimize import linprog

from services import catalog
from services.classifiers import (extract_multilateral, extract_potential, extract_zero_sum_form,
                                  potential_cycle_test, potential_function_check,
                                  zero_sum_cycle_test)
from services.equilibrium import (PhiEvaluator, bimatrix_nash, dominant_strategy, minimax, pure_nash,
                                  verify_uniform_ne)
from services.errors import GameDecompError
from services.game_core import (Game, MixedProfile, inner_product, is_nash,
                                is_strategically_equivalent, non_strategic_residual, norm,
                                own_payoffs)
from services.subspace_engine import Projector, decompose_main, generic_project, project_NC
from utils import barycentric_grid, make_rng, max_abs

logger = logging.getLogger(__name__)

TABLE1_SYMMETRIC_EQUILIBRIA = [
    (1.0, 0.0, 0.0),
    (0.0, 1.0, 0.0),
    (0.0, 0.0, 1.0),
    (1 / 2, 1 / 2, 0.0),
    (1 / 6, 0.0, 5 / 6),
    (0.0, 2 / 3, 1 / 3),
    (1 / 6, 1 / 2, 1 / 3),
]


@dataclass
class CheckResult:
    criterion: int
    name: str
    passed: bool
    detail: str = ''

    def to_dict(self):
        return {'criterion': self.criterion, 'name': self.name,
                'passed': self.passed, 'detail': self.detail}


def _draw_space(rng, players=(2, 3), strategies=(2, 4)):
    return catalog.random_space(int(rng.integers(0, 2 ** 31)), players, strategies)


def _seed(rng):
    return int(rng.integers(0, 2 ** 31))


# ==================== FOUR-COMPONENT ILLUSTRATION ====================

def check_table1_decomposition():
    f = catalog.table1_game()
    parts = catalog.table1_components()
    result = decompose_main(f)
    gaps = {
        'NC-C': max_abs(result.component('NC').payoffs - parts['C'].payoffs),
        'NZ-Z': max_abs(result.component('NZ').payoffs - parts['Z'].payoffs),
        'B-(B+E)': max_abs(result.component('B').payoffs
                           - (parts['B'] + parts['E']).payoffs),
    }
    passed = all(g <= 1e-12 for g in gaps.values())
    detail = ', '.join(f"{k}={v:.1e}" for k, v in gaps.items())
    return CheckResult(1, 'table1 main decomposition', passed, detail)


def check_table1_equilibria():
    f = catalog.table1_game()
    found = bimatrix_nash(f)
    symmetric = found.symmetric(1e-9)
    expected = [MixedProfile(f.space, [p, p]) for p in TABLE1_SYMMETRIC_EQUILIBRIA]

    missing = [e for e in expected if not any(e.allclose(s, 1e-9) for s in symmetric)]
    extra = [s for s in symmetric if not any(s.allclose(e, 1e-9) for e in expected)]
    best_response_ok = all(is_nash(f, e, 1e-9) for e in expected)
    passed = not missing and not extra and best_response_ok
    detail = (f"{len(symmetric)} symmetric of {len(found)} total, missing={len(missing)}, "
              f"extra={len(extra)}, degenerate={found.degenerate}")
    return CheckResult(2, 'table1 symmetric equilibria', passed, detail)


def check_component_equilibria():
    f = catalog.table1_game()
    result = decompose_main(f)
    f_nc, f_nz, f_b = (result.component(k) for k in ('NC', 'NZ', 'B'))
    uniform = MixedProfile.uniform(f.space)

    nz = bimatrix_nash(f_nz)
    nz_unique = len(nz) == 1 and nz.profiles[0].allclose(uniform, 1e-9)

    dominant = dominant_strategy(f_b)
    b_pure = pure_nash(f_b)
    b_ok = (dominant.profile == (0, 0) and dominant.strict and len(b_pure) == 1
            and b_pure.profiles[0].allclose(MixedProfile.pure(f.space, (0, 0))))

    nc_pure = pure_nash(f_nc)
    diagonal = [MixedProfile.pure(f.space, (k, k)) for k in range(3)]
    nc_ok = verify_uniform_ne(f_nc) and all(nc_pure.contains(d) for d in diagonal)

    passed = nz_unique and b_ok and nc_ok
    detail = f"NZ unique uniform={nz_unique}, B dominant (1,1)={b_ok}, NC uniform+diagonal={nc_ok}"
    return CheckResult(3, 'component equilibrium structure', passed, detail)


# ==================== PROJECTORS AND CYCLE TESTS ====================

def check_projectors(draws=200, seed=2024):
    rng = make_rng(seed)
    worst = {'idempotent': 0.0, 'self_adjoint': 0.0, 'nc_closed_vs_generic': 0.0}
    kinds = ('E', 'N', 'C', 'Z', 'NC', 'NZ')

    for _ in range(draws):
        space = _draw_space(rng)
        f = catalog.random_member('L', space, _seed(rng))
        g = catalog.random_member('L', space, _seed(rng))
        scale = max(1.0, norm(f) * norm(g))
        for kind in kinds:
            p = Projector(kind)
            pf = p(f)
            worst['idempotent'] = max(worst['idempotent'], max_abs(p(pf).payoffs - pf.payoffs))
            asym = abs(inner_product(pf, g) - inner_product(f, p(g))) / scale
            worst['self_adjoint'] = max(worst['self_adjoint'], asym)
        # raises when orthogonality, reconstruction or Pythagoras fails
        decompose_main(f)
        gap = max_abs(project_NC(f).payoffs
                      - generic_project('normalized_common_interest', f).payoffs)
        worst['nc_closed_vs_generic'] = max(worst['nc_closed_vs_generic'], gap)

    passed = (worst['idempotent'] <= 1e-10 and worst['self_adjoint'] <= 1e-10
              and worst['nc_closed_vs_generic'] <= 1e-9)
    detail = ', '.join(f"{k}={v:.1e}" for k, v in worst.items())
    return CheckResult(4, 'projector identities', passed, detail)


CYCLE_CLASSES = ('L', 'C', 'Z', 'E', 'NC', 'NZ', 'C+E', 'Z+E', 'D+E')


def check_cycle_equivalence(draws=300, seed=7):
    rng = make_rng(seed)
    mismatches = []
    for kind in CYCLE_CLASSES:
        for _ in range(draws):
            space = _draw_space(rng)
            f = catalog.random_member(kind, space, _seed(rng))
            norms = decompose_main(f).component_norms
            threshold = 1e-8 * norm(f)
            potential = potential_cycle_test(f).passed
            zero_sum = zero_sum_cycle_test(f).passed
            if potential != (norms['NZ'] <= threshold):
                mismatches.append((kind, 'potential'))
            if zero_sum != (norms['NC'] <= threshold):
                mismatches.append((kind, 'zero_sum'))

    detail = f"{len(CYCLE_CLASSES) * draws} games, {len(mismatches)} disagreements"
    if mismatches:
        detail += f" (first: {mismatches[0]})"
    return CheckResult(5, 'cycle tests vs projection norms', not mismatches, detail)


# ==================== EQUILIBRIA OF ZERO-SUM EQUIVALENT GAMES ====================

def _convex_combinations_pass(f, profiles, rng, samples=10):
    for _ in range(samples):
        weights = rng.dirichlet(np.ones(len(profiles)))
        vectors = [sum(w * p[i] for w, p in zip(weights, profiles)) for i in range(f.n)]
        vectors = [v / v.sum() for v in vectors]
        if not is_nash(f, MixedProfile(f.space, vectors), 1e-8):
            return False
    return True


def check_zero_sum_uniqueness(draws=100, seed=11):
    rng = make_rng(seed)
    multiple = 0
    degenerate = 0
    convex_failures = 0
    for _ in range(draws):
        space = _draw_space(rng, players=(2, 2))
        f = catalog.random_member('Z+E', space, _seed(rng))
        found = bimatrix_nash(f)
        if found.degenerate:
            degenerate += 1
            if len(found) >= 2 and not _convex_combinations_pass(f, found.profiles, rng):
                convex_failures += 1
        elif len(found) != 1:
            multiple += 1

    passed = multiple == 0 and convex_failures == 0
    detail = (f"{draws} games, {degenerate} flagged degenerate, {multiple} nondegenerate "
              f"with != 1 equilibrium, {convex_failures} convexity failures")
    return CheckResult(6, 'unique equilibrium for two-player zero-sum equivalent games', passed, detail)


def check_extractors(draws=100, seed=13):
    rng = make_rng(seed)
    worst = {'zero_sum_w': 0.0, 'non_strategic_h': 0.0, 'reconstruction': 0.0, 'potential': 0.0}
    multilateral_ok = True
    for _ in range(draws):
        space = _draw_space(rng)
        f = catalog.random_member('Z+E', space, _seed(rng))
        form = extract_zero_sum_form(f)
        worst['zero_sum_w'] = max(worst['zero_sum_w'], max_abs(form.w.payoffs.sum(axis=0)))
        worst['non_strategic_h'] = max(worst['non_strategic_h'], non_strategic_residual(form.h.payoffs))
        worst['reconstruction'] = max(worst['reconstruction'],
                                      max_abs(form.to_game().payoffs - f.payoffs))

        g = catalog.random_member('C+E', space, _seed(rng))
        worst['potential'] = max(worst['potential'], potential_function_check(g, extract_potential(g)))

        b = catalog.random_member('D+E', space, _seed(rng))
        rebuilt = extract_multilateral(b).to_game(space)
        multilateral_ok = multilateral_ok and is_strategically_equivalent(b, rebuilt)

    passed = all(v <= 1e-9 for v in worst.values()) and multilateral_ok
    detail = ', '.join(f"{k}={v:.1e}" for k, v in worst.items()) + f", multilateral={multilateral_ok}"
    return CheckResult(7, 'extractor roundtrips', passed, detail)


# ==================== DISCRETIZED CONTINUOUS GAMES ====================

def check_cournot():
    grid = [0.0, 1.0, 2.0, 3.0, 4.0]
    beta = 1.0
    three = catalog.cournot(catalog.CournotSpec(3, 10.0, beta, [1.0, 1.0, 1.0], grid))
    two = catalog.cournot(catalog.CournotSpec(2, 10.0, beta, [1.0, 1.0], grid))

    three_ok = potential_cycle_test(three).passed and zero_sum_cycle_test(three).passed
    two_zero_sum = zero_sum_cycle_test(two)
    step = grid[1] - grid[0]
    two_ok = (potential_cycle_test(two).passed and not two_zero_sum.passed
              and two_zero_sum.worst_violation >= 2 * beta * step ** 2)
    detail = (f"n=3 both tests={three_ok}, n=2 zero-sum violation="
              f"{two_zero_sum.worst_violation:.3g} (bound {2 * beta * step ** 2:g})")
    return CheckResult(8, 'quasi-Cournot cycle tests', three_ok and two_ok, detail)


def contest_resolution_bound(spec, profile):
    """Largest gap between continuous and grid best-response payoffs summed over players"""
    grid = np.asarray(spec.grid)
    step = float(np.max(np.diff(grid)))
    others = np.sum(profile) - np.asarray(profile)
    curvature = 2.0 * spec.prize * others / (grid[0] + others) ** 3
    return float(np.sum(0.5 * curvature * (step / 2.0) ** 2))


def contest_comparison(spec):
    """Numeric Phi from the extracted zero-sum form against the closed form on the grid"""
    f = catalog.contest(spec)
    numeric = PhiEvaluator(f, extract_zero_sum_form(f)).pure_table()
    grid = np.asarray(spec.grid)
    closed = np.zeros_like(numeric)
    compared = 0
    worst_excess = 0.0
    worst_gap = 0.0

    for index in np.ndindex(numeric.shape):
        s = grid[list(index)]
        closed[index] = catalog.contest_phi_closed_form(spec, s)
        others = s.sum() - s
        responses = [catalog.contest_best_response(spec, others[i], i) for i in range(spec.n)]
        if not all(grid[0] <= r <= grid[-1] for r in responses):
            continue
        compared += 1
        gap = closed[index] - numeric[index]
        worst_gap = max(worst_gap, abs(gap))
        # grid maxima never exceed continuous maxima; the shortfall is bounded by curvature
        excess = max(-gap - 1e-12, gap - contest_resolution_bound(spec, s) - 1e-12)
        worst_excess = max(worst_excess, excess)

    closed_argmin = np.unravel_index(np.argmin(closed), closed.shape)
    same_argmin = numeric[closed_argmin] <= numeric.min() + 1e-12
    return {'compared': compared, 'worst_gap': worst_gap, 'worst_excess': worst_excess,
            'same_argmin': bool(same_argmin), 'argmin': tuple(int(k) for k in closed_argmin)}


def check_contest(steps=20, denominator=45.0):
    spec = catalog.ContestSpec(3, 1.0, [1.0, 1.0, 1.0],
                               [k / denominator for k in range(1, steps + 1)])
    summary = contest_comparison(spec)
    passed = summary['compared'] > 0 and summary['worst_excess'] <= 0.0 and summary['same_argmin']
    detail = (f"{summary['compared']} interior profiles, max |closed - numeric|="
              f"{summary['worst_gap']:.2e}, argmin grid index={summary['argmin']}")
    return CheckResult(9, 'contest Phi closed form', passed, detail)


def check_bayesian(seed=17):
    spec = catalog.example3_symmetric_spec(a=2.0, b=1.0, p=0.3, q=0.6)
    embedded = catalog.bayesian_embed(spec)
    potential_ok = (zero_sum_cycle_test(embedded).passed
                    and potential_cycle_test(embedded).passed)

    rng = make_rng(seed)
    tables1 = rng.standard_normal((2, 2, 2, 3))
    tables2 = rng.standard_normal((2, 2, 2, 3))
    generic = catalog.bayesian_embed(catalog.BayesianSpec([0.4, 0.6], [0.25, 0.75], tables1, tables2))
    generic_ok = zero_sum_cycle_test(generic).passed

    detail = f"potential type games: both tests={potential_ok}, random type games zero-sum={generic_ok}"
    return CheckResult(10, 'Bayesian type-agent embedding', potential_ok and generic_ok, detail)


def check_uniform_equilibria(draws=100, seed=19):
    rng = make_rng(seed)
    failures = 0
    worst = 0.0
    for kind in ('NZ', 'NC'):
        for _ in range(draws):
            space = _draw_space(rng)
            f = catalog.random_member(kind, space, _seed(rng))
            uniform = MixedProfile.uniform(space)
            if not verify_uniform_ne(f):
                failures += 1
            worst = max(worst, max(max_abs(own_payoffs(f, uniform, i)) for i in range(f.n)))
    passed = failures == 0 and worst <= 1e-10
    detail = f"{2 * draws} games, {failures} failures, worst pure payoff vs uniform={worst:.1e}"
    return CheckResult(11, 'uniform equilibrium of normalized games', passed, detail)


def grid_value_bounds(a, resolution=300):
    """Grid lower and upper bounds on the value of a 3 x 3 zero-sum game"""
    points = barycentric_grid(resolution)
    lower = float(np.max(np.min(points @ a, axis=1)))
    upper = float(np.min(np.max(points @ a.T, axis=1)))
    return lower, upper


def lp_value(a):
    """Reference value via scipy's LP solver: max v s.t. x^T A >= v, sum x = 1"""
    m, n = a.shape
    cost = np.zeros(m + 1)
    cost[-1] = -1.0
    a_ub = np.hstack([-a.T, np.ones((n, 1))])
    a_eq = np.append(np.ones(m), 0.0).reshape(1, -1)
    bounds = [(0, None)] * m + [(None, None)]
    result = linprog(cost, A_ub=a_ub, b_ub=np.zeros(n), A_eq=a_eq, b_eq=[1.0],
                     bounds=bounds, method='highs')
    return float(-result.fun)


def perturbed_rps():
    a = np.array([[0.0, -1.0, 1.5], [1.0, 0.0, -1.0], [-1.0, 1.2, 0.0]])
    return Game.from_arrays([a, -a])


def check_minimax():
    exact_ok = True
    for f in (catalog.rps(), catalog.matching_pennies()):
        result = minimax(f)
        uniform = MixedProfile.uniform(f.space)
        exact_ok = (exact_ok and abs(result.value) <= 1e-9
                    and result.to_profile(f.space).allclose(uniform, 1e-9))

    f = perturbed_rps()
    result = minimax(f)
    lower, upper = grid_value_bounds(f.payoffs[0])
    reference = lp_value(f.payoffs[0])
    oracle_ok = (lower - 1e-12 <= result.value <= upper + 1e-12
                 and abs(result.value - reference) <= 1e-6
                 and is_nash(f, result.to_profile(f.space), 1e-8))
    detail = (f"symmetric games exact={exact_ok}, perturbed value={result.value:.9f} "
              f"in [{lower:.6f}, {upper:.6f}], LP reference={reference:.9f}")
    return CheckResult(12, 'minimax', exact_ok and oracle_ok, detail)


# ==================== SUITE ====================

CHECKS = (
    check_table1_decomposition,
    check_table1_equilibria,
    check_component_equilibria,
    check_projectors,
    check_cycle_equivalence,
    check_zero_sum_uniqueness,
    check_extractors,
    check_cournot,
    check_contest,
    check_bayesian,
    check_uniform_equilibria,
    check_minimax,
)


def run_all(checks=CHECKS):
    """Run every check; an exception inside a check marks it failed instead of aborting the suite"""
    results = []
    for number, check in enumerate(checks, start=1):
        try:
            result = check()
        except GameDecompError as e:
            logger.error(f"❌ {check.__name__}: {e.message}")
            result = CheckResult(number, check.__name__, False, f"{type(e).__name__}: {e.message}")
        marker = '✅' if result.passed else '❌'
        logger.info(f"{marker} [{result.criterion}] {result.name}: {result.detail}")
        results.append(result)
    return pd.DataFrame([r.to_dict() for r in results])
