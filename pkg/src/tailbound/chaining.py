"""Finite-family chaining with a deflation step.

A FunctionFamily holds centered functions tabulated on a finite discrete
support, together with a norm on differences: either the CGF functional
sup_{lambda in R} sqrt(2 log E e^{lambda h}) / |lambda| (the default) or an
Orlicz norm. A deflation map A with |A[F]| <= e^k and ||A[f]|| <= ||f||
shrinks the family to {f - A[f]}; the chain bound combines the gamma
functional over admissible sequences anchored at {0} with covering
resolutions epsilon_ell, and every reported value carries a certificate
(the realizing sequences) that replays to the reported number.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .cgf import (
    CENTERING_TOL,
    CgfOracle,
    DiscreteDistribution,
    TabulatedFunction,
    cgf_discrete,
    rate_bound_T,
)
from .numerics import NumericError, logsumexp, maximize_on_interval
from .orlicz import OrliczGenerator, orlicz_norm

LOG2 = math.log(2.0)
ZERO_NORM_TOL = 1e-12
PLAN_NORM_SLACK = 1e-12

EXACT_EPSILON_LIMIT = 12  # exhaustive subset enumeration threshold for epsilon_ell
EXACT_GAMMA_LIMIT = 8  # exhaustive nested-sequence threshold for gamma


def _cgf_value(logp: np.ndarray, vals: np.ndarray, lam: float) -> float:
    # expm1 path keeps precision where the log-sum-exp one would cancel
    if abs(lam) * float(np.max(np.abs(vals)) if vals.size else 0.0) <= 1e-3:
        return math.log1p(float(np.dot(np.exp(logp), np.expm1(lam * vals))))
    return logsumexp(logp + lam * vals)


def cgf_functional_norm(dist: DiscreteDistribution, values: np.ndarray) -> float:
    """sup_{lambda in R} sqrt(2 Lambda_h(lambda)) / |lambda| for tabulated h.

    The lambda -> 0 limit equals sqrt(Var h) and is always a candidate; the
    remaining supremum is located on a two-sided geometric grid followed by
    golden-section refinement around the best grid point. Requires h to be
    (numerically) centered, else the supremum diverges at lambda -> 0.
    """
    values = np.asarray(values, dtype=float).reshape(-1)
    if values.shape[0] != dist.size:
        raise ValueError("values length does not match support size")
    mask = dist.probabilities > 0.0
    probs = dist.probabilities[mask]
    vals = values[mask]
    vmax = float(np.max(np.abs(vals))) if vals.size else 0.0
    if vmax == 0.0:
        return 0.0
    mean = float(np.dot(probs, vals))
    if abs(mean) > 1e-8 * max(vmax, 1.0):
        raise ValueError("CGF functional norm requires a centered function")
    variance = max(float(np.dot(probs, vals * vals)) - mean * mean, 0.0)
    logp = np.log(probs)

    def g(lam: float) -> float:
        # 2 Lambda(lam) / lam^2, whose sup over R is the squared norm
        return 2.0 * _cgf_value(logp, vals, lam) / (lam * lam)

    best_sq = variance
    for sign in (1.0, -1.0):
        grid = sign * np.power(2.0, np.arange(-40, 61) / 2.0) / vmax
        gv = np.array([g(l) for l in grid])
        j = int(np.argmax(gv))
        lo = grid[max(j - 1, 0)]
        hi = grid[min(j + 1, grid.size - 1)]
        if lo > hi:
            lo, hi = hi, lo
        _, refined = maximize_on_interval(g, lo, hi, rel_tol=1e-10)
        best_sq = max(best_sq, float(gv[j]), refined)

    norm = math.sqrt(best_sq)
    # positive-definiteness on discrete support: a function that is nonzero
    # on an atom of positive probability cannot have norm 0
    if norm <= ZERO_NORM_TOL and vmax > ZERO_NORM_TOL:
        raise NumericError("norm evaluated to 0 on a function that is nonzero with positive probability")
    return norm


@dataclass(frozen=True)
class FunctionFamily:
    """Finite family of centered tabulated functions with a designated zero.

    members: mapping name -> values (one per support point), in a stable
    order. norm_context selects the metric: "cgf" for the CGF functional or
    an OrliczGenerator instance. Member norms and all pairwise difference
    norms are computed once at construction.
    """

    distribution: DiscreteDistribution
    members: dict
    norm_context: object = "cgf"

    def __post_init__(self):
        if not self.members:
            raise ValueError("family must contain at least one member")
        names = tuple(self.members.keys())
        rows = []
        for name in names:
            f = TabulatedFunction(self.members[name])
            if f.values.shape[0] != self.distribution.size:
                raise ValueError(f"member {name!r} length does not match support size")
            m = float(np.dot(self.distribution.probabilities, f.values))
            if abs(m) > CENTERING_TOL:
                raise ValueError(f"member {name!r} is not centered: mean {m!r}")
            rows.append(f.values)
        values = np.array(rows, dtype=float)
        zero_index = None
        for i in range(values.shape[0]):
            if np.all(values[i] == 0.0):
                zero_index = i
                break
        if zero_index is None:
            raise ValueError("family must contain the zero function as a member")
        if not (self.norm_context == "cgf" or isinstance(self.norm_context, OrliczGenerator)):
            raise ValueError("norm_context must be 'cgf' or an OrliczGenerator")
        values.flags.writeable = False
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "zero_index", zero_index)
        object.__setattr__(self, "members", {n: values[i] for i, n in enumerate(names)})

        norms = np.array([self.norm_of(values[i]) for i in range(len(names))])
        dist_mat = np.zeros((len(names), len(names)))
        for i in range(len(names)):
            for j in range(i + 1, len(names)):
                dist_mat[i, j] = dist_mat[j, i] = self.norm_of(values[i] - values[j])
        norms.flags.writeable = False
        dist_mat.flags.writeable = False
        object.__setattr__(self, "member_norms", norms)
        object.__setattr__(self, "distances", dist_mat)
        # memo for w_r values; recomputation is deterministic, so concurrent
        # duplicate writes are benign
        object.__setattr__(self, "_wr_cache", {})

    @property
    def size(self) -> int:
        return len(self.names)

    def norm_of(self, values: np.ndarray) -> float:
        if self.norm_context == "cgf":
            return cgf_functional_norm(self.distribution, values)
        return orlicz_norm(self.distribution, TabulatedFunction(values), self.norm_context).value

    def oracle_of(self, values: np.ndarray) -> CgfOracle:
        return cgf_discrete(self.distribution, TabulatedFunction(values))

    def max_member_norm(self) -> float:
        return float(np.max(self.member_norms))


def class_wr(family: FunctionFamily, r: float) -> float:
    """w_r = sup over normalized member differences h/||h|| of T_r.

    Iterates ordered pairs so both signs of every difference are covered;
    differences with norm at most 1e-12 are skipped. Returns 0 when every
    difference is zero.
    """
    if not (r >= 0.0):
        raise ValueError("r must be nonnegative")
    cached = family._wr_cache.get(r)
    if cached is not None:
        return cached
    best = 0.0
    values = family.values
    for i in range(family.size):
        for j in range(family.size):
            if i == j:
                continue
            d = family.distances[i, j]
            if d <= ZERO_NORM_TOL:
                continue
            oracle = family.oracle_of((values[i] - values[j]) / d)
            best = max(best, rate_bound_T(oracle, r))
    family._wr_cache[r] = best
    return best


def extremal_difference(family: FunctionFamily, r: float):
    """The ordered pair (i, j) whose normalized difference attains class_wr.

    Ties break to the smallest (i, j) in lexicographic order. Returns
    (i, j, w) or None when all differences are zero.
    """
    best = None
    best_val = -1.0
    values = family.values
    for i in range(family.size):
        for j in range(family.size):
            if i == j or family.distances[i, j] <= ZERO_NORM_TOL:
                continue
            d = family.distances[i, j]
            oracle = family.oracle_of((values[i] - values[j]) / d)
            val = rate_bound_T(oracle, r)
            if val > best_val:
                best_val = val
                best = (i, j, val)
    return best


@dataclass(frozen=True)
class DeflationPlan:
    """Deflation map A as an assignment member index -> member index.

    The range size must satisfy |A[F]| <= e^k; k = 0 is the trivial plan
    sending everything to the zero member (standard chaining).
    """

    assignment: tuple
    k: int

    def __post_init__(self):
        if self.k < 0:
            raise ValueError("k must be nonnegative")
        object.__setattr__(self, "assignment", tuple(int(a) for a in self.assignment))


def trivial_plan(family: FunctionFamily) -> DeflationPlan:
    """A[f] = 0 for every member: recovers standard (non-deflated) chaining."""
    return DeflationPlan(tuple([family.zero_index] * family.size), 0)


def validate_plan(family: FunctionFamily, plan: DeflationPlan) -> None:
    if len(plan.assignment) != family.size:
        raise ValueError("plan assignment length does not match the family")
    for i, a in enumerate(plan.assignment):
        if not (0 <= a < family.size):
            raise ValueError("plan assignment index out of range")
        if family.member_norms[a] > family.member_norms[i] + PLAN_NORM_SLACK:
            raise ValueError(
                f"plan violates the norm constraint at member {family.names[i]!r}"
            )
    if plan.assignment[family.zero_index] != family.zero_index:
        raise ValueError("plan must map the zero member to itself")
    if len(set(plan.assignment)) > math.floor(math.exp(plan.k)):
        raise ValueError("plan range exceeds the e^k budget")


def build_deflation(family: FunctionFamily, k: int) -> DeflationPlan:
    """Greedy k-center deflation with center budget floor(e^k).

    Centers come from farthest-first traversal under the family norm starting
    at the zero member. Each member is then assigned to its nearest center
    with norm not exceeding the member's own (ties to the smallest member
    index), keeping the zero member whenever no admissible center strictly
    improves on it.
    """
    if not isinstance(k, (int, np.integer)) or isinstance(k, bool) or k < 1:
        raise ValueError("k must be a positive integer")
    m_budget = min(math.floor(math.exp(k)), family.size)
    dist = family.distances
    centers = [family.zero_index]
    while len(centers) < m_budget:
        min_d = np.min(dist[:, centers], axis=1)
        cand = int(np.argmax(min_d))  # argmax returns the smallest tied index
        if min_d[cand] <= 0.0:
            break
        centers.append(cand)
    norms = family.member_norms
    assignment = []
    for i in range(family.size):
        best_c = family.zero_index
        best_d = dist[i, family.zero_index]
        for c in sorted(centers):
            if norms[c] > norms[i] + PLAN_NORM_SLACK:
                continue
            if dist[i, c] < best_d:
                best_d = dist[i, c]
                best_c = c
        assignment.append(best_c)
    plan = DeflationPlan(tuple(assignment), int(k))
    validate_plan(family, plan)
    return plan


@dataclass(frozen=True)
class DeflatedSet:
    """The deflated family {f - A[f]}, deduplicated, with its metric data."""

    values: np.ndarray  # (q, support) distinct deflated functions
    labels: tuple
    zero_pos: int
    member_map: tuple  # member index -> row in values
    dist: np.ndarray  # (q, q) pairwise norms
    norms: np.ndarray  # (q,) norms, = dist[:, zero_pos]

    @property
    def size(self) -> int:
        return self.values.shape[0]


def deflate(family: FunctionFamily, plan: DeflationPlan) -> DeflatedSet:
    validate_plan(family, plan)
    rows = []
    labels = []
    keys = {}
    member_map = []
    for i in range(family.size):
        h = family.values[i] - family.values[plan.assignment[i]]
        key = h.tobytes()
        if key not in keys:
            keys[key] = len(rows)
            rows.append(h)
            labels.append(f"{family.names[i]}-{family.names[plan.assignment[i]]}")
        member_map.append(keys[key])
    values = np.array(rows)
    zero_pos = keys[np.zeros(family.values.shape[1]).tobytes()]
    q = values.shape[0]
    dist = np.zeros((q, q))
    for a in range(q):
        for b in range(a + 1, q):
            dist[a, b] = dist[b, a] = family.norm_of(values[a] - values[b])
    values.flags.writeable = False
    dist.flags.writeable = False
    return DeflatedSet(
        values=values,
        labels=tuple(labels),
        zero_pos=zero_pos,
        member_map=tuple(member_map),
        dist=dist,
        norms=dist[:, zero_pos],
    )


def _coverage_radius(dist: np.ndarray, subset) -> float:
    return float(np.max(np.min(dist[:, list(subset)], axis=1)))


def epsilon_ell(deflated: DeflatedSet, ell: int, family: FunctionFamily = None):
    """Best covering radius of the deflated set by at most 2^{2^ell} elements.

    Exact by exhaustive enumeration for sets of at most 12 elements, greedy
    farthest-first otherwise; the returned subset certifies the value.
    """
    if ell < 0:
        raise ValueError("ell must be nonnegative")
    q = deflated.size
    budget = 2 ** (2**ell)
    if budget >= q:
        return 0.0, tuple(range(q))
    dist = deflated.dist
    if q <= EXACT_EPSILON_LIMIT:
        best_val = math.inf
        best_subset = None
        for subset in itertools.combinations(range(q), budget):
            val = _coverage_radius(dist, subset)
            if val < best_val:
                best_val = val
                best_subset = subset
        return best_val, tuple(best_subset)
    subset = [0]
    while len(subset) < budget:
        min_d = np.min(dist[:, subset], axis=1)
        cand = int(np.argmax(min_d))
        if min_d[cand] <= 0.0:
            break
        subset.append(cand)
    return _coverage_radius(dist, subset), tuple(subset)


def _gamma_rates(n: int, ell_top: int):
    return tuple((2.0 ** (ell + 3) + ell + 2) * LOG2 / n for ell in range(ell_top))


def _ell_top(q: int) -> int:
    """Smallest ell >= 1 with 2^{2^ell} >= q; levels from there on may equal
    the whole set, so their chain terms vanish. (Level 0 is pinned to {0} and
    always contributes unless the set is just {0}.)"""
    ell = 1
    while 2 ** (2**ell) < q:
        ell += 1
    return ell


def _gamma_value(dist: np.ndarray, levels, weights) -> float:
    q = dist.shape[0]
    total = np.zeros(q)
    for lvl, w in zip(levels, weights):
        total += 2.0 * w * np.min(dist[:, list(lvl)], axis=1)
    return float(np.max(total))


def gamma_functional(deflated: DeflatedSet, family: FunctionFamily, n: int):
    """Generic-chaining gamma functional of the deflated set.

    gamma = inf over admissible nested sequences (A_0 = {0}, |A_ell| <=
    2^{2^ell}) of the worst-case weighted distance sum, with rates
    (2^{ell+3} + ell + 2) log(2) / n. Sequences are grown greedily by
    farthest-first additions; for sets of at most 8 elements an exhaustive
    search over admissible sequences runs as well and the better value wins.
    Returns (value, certificate) where the certificate lists the realizing
    levels, their rates, and their weights.
    """
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool) or n <= 0:
        raise ValueError("n must be a positive integer")
    q = deflated.size
    z = deflated.zero_pos
    if q == 1:
        return 0.0, {"levels": ((z,),), "rates": (), "weights": ()}
    ell_top = _ell_top(q)
    rates = _gamma_rates(n, ell_top)
    weights = tuple(class_wr(family, rr) for rr in rates)
    dist = deflated.dist

    levels = [[z]]
    for ell in range(1, ell_top):
        cap = min(2 ** (2**ell), q)
        lvl = list(levels[-1])
        while len(lvl) < cap:
            min_d = np.min(dist[:, lvl], axis=1)
            cand = int(np.argmax(min_d))
            if min_d[cand] <= 0.0:
                break
            lvl.append(cand)
        levels.append(lvl)
    greedy_levels = tuple(tuple(lvl) for lvl in levels)
    best_val = _gamma_value(dist, greedy_levels, weights)
    best_levels = greedy_levels

    if q <= EXACT_GAMMA_LIMIT and ell_top == 2:
        # only the ell = 1 level is free: it contains 0, has at most 4
        # elements, and larger never hurts, so enumerate exactly
        others = [i for i in range(q) if i != z]
        pick = min(3, len(others))
        for combo in itertools.combinations(others, pick):
            cand_levels = ((z,), tuple(sorted((z,) + combo)))
            val = _gamma_value(dist, cand_levels, weights)
            if val < best_val:
                best_val = val
                best_levels = cand_levels

    return best_val, {"levels": best_levels, "rates": rates, "weights": weights}


def _epsilon_schedule(deflated: DeflatedSet):
    """All ell with a nonvanishing covering term, with values and subsets."""
    q = deflated.size
    out = []
    ell = 0
    while 2 ** (2**ell) < q:
        val, subset = epsilon_ell(deflated, ell)
        out.append((ell, val, subset))
        ell += 1
    return out


@dataclass(frozen=True)
class ChainBoundReport:
    """Assembled uniform chain bound with its replayable certificate.

    total_rhs = gamma_value + 2 w_r epsilon_sum, and each member's threshold
    is w_shift ||f|| + total_rhs where w_shift = class_wr at rate r + k/n.
    The guarantee is 1 - 2 e^{-nr}.
    """

    n: int
    r: float
    k: int
    gamma_value: float
    epsilon_sum: float
    epsilon_values: tuple
    w_r: float
    w_shift: float
    per_member: dict
    total_rhs: float
    guarantee: float
    deflated_size: int
    certificate: dict

    def thresholds(self) -> np.ndarray:
        return np.array(list(self.per_member.values()))


def theorem_main_bound(
    family: FunctionFamily, plan: DeflationPlan, n: int, r: float
) -> ChainBoundReport:
    """Instance-dependent uniform bound for the deflated family.

    With probability at least 1 - 2 e^{-nr}, every member satisfies
    E_n f <= w_{r+k/n} ||f|| + gamma(A) + 2 w_r sum_ell epsilon_ell(A).
    """
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool) or n <= 0:
        raise ValueError("n must be a positive integer")
    if not (r > 0.0):
        raise ValueError("r must be positive")
    deflated = deflate(family, plan)
    gamma_value, gamma_cert = gamma_functional(deflated, family, n)
    schedule = _epsilon_schedule(deflated)
    epsilon_values = tuple(val for _, val, _s in schedule)
    epsilon_sum = float(sum(epsilon_values))
    w_r = class_wr(family, r)
    w_shift = class_wr(family, r + plan.k / n)
    total_rhs = gamma_value + 2.0 * w_r * epsilon_sum
    per_member = {
        name: w_shift * float(family.member_norms[i]) + total_rhs
        for i, name in enumerate(family.names)
    }
    certificate = {
        "deflated_labels": deflated.labels,
        "deflated_values": [list(map(float, row)) for row in deflated.values],
        "member_map": deflated.member_map,
        "gamma_levels": gamma_cert["levels"],
        "gamma_rates": gamma_cert["rates"],
        "gamma_weights": gamma_cert["weights"],
        "epsilon_subsets": tuple((ell, subset) for ell, _v, subset in schedule),
        "assignment": plan.assignment,
        "k": plan.k,
    }
    report = ChainBoundReport(
        n=int(n),
        r=float(r),
        k=int(plan.k),
        gamma_value=gamma_value,
        epsilon_sum=epsilon_sum,
        epsilon_values=epsilon_values,
        w_r=w_r,
        w_shift=w_shift,
        per_member=per_member,
        total_rhs=total_rhs,
        guarantee=1.0 - 2.0 * math.exp(-n * r),
        deflated_size=deflated.size,
        certificate=certificate,
    )
    if abs(report.total_rhs - (report.gamma_value + 2.0 * report.w_r * report.epsilon_sum)) > 1e-12:
        raise NumericError("chain report self-consistency check failed")
    return report


def replay_certificate(family: FunctionFamily, report: ChainBoundReport) -> dict:
    """Recompute every reported value from the certificate alone.

    Rebuilds the deflated set from the stored assignment, re-evaluates all
    distances, weights, and covering radii over the certified index sets, and
    returns the recomputed quantities for comparison with the report.
    """
    plan = DeflationPlan(tuple(report.certificate["assignment"]), int(report.certificate["k"]))
    deflated = deflate(family, plan)
    stored = np.array(report.certificate["deflated_values"], dtype=float)
    if stored.shape != deflated.values.shape or not np.array_equal(stored, deflated.values):
        raise ValueError("certificate deflated values do not match the family and plan")
    weights = tuple(class_wr(family, rr) for rr in report.certificate["gamma_rates"])
    gamma_value = _gamma_value(deflated.dist, report.certificate["gamma_levels"], weights)
    eps_values = [
        _coverage_radius(deflated.dist, subset)
        for _ell, subset in report.certificate["epsilon_subsets"]
    ]
    epsilon_sum = float(sum(eps_values))
    w_r = class_wr(family, report.r)
    total_rhs = gamma_value + 2.0 * w_r * epsilon_sum
    return {
        "gamma_value": gamma_value,
        "epsilon_sum": epsilon_sum,
        "epsilon_values": tuple(eps_values),
        "total_rhs": total_rhs,
        "weights": weights,
    }


@dataclass(frozen=True)
class OptimizeResult:
    plan: DeflationPlan
    report: ChainBoundReport
    objective: float
    evaluations: tuple  # (k, objective) per candidate, in input order


def optimize_deflation(
    family: FunctionFamily, n: int, r: float, k_candidates
) -> OptimizeResult:
    """Pick the candidate k whose plan minimizes the deflated bound.

    The objective charges the threshold inflation at the worst member:
    total_rhs + (w_{r+k/n} - w_r) max_f ||f||. k = 0 denotes the trivial
    plan. Ties break toward smaller k.
    """
    kc = list(k_candidates)
    if not kc:
        raise ValueError("k candidate list must be nonempty")
    max_norm = family.max_member_norm()
    best = None
    evaluations = []
    for k in kc:
        if not isinstance(k, (int, np.integer)) or isinstance(k, bool) or k < 0:
            raise ValueError("k candidates must be nonnegative integers")
        plan = trivial_plan(family) if k == 0 else build_deflation(family, int(k))
        report = theorem_main_bound(family, plan, n, r)
        objective = report.total_rhs + (report.w_shift - report.w_r) * max_norm
        evaluations.append((int(k), objective))
        if (
            best is None
            or objective < best[0]
            or (objective == best[0] and int(k) < best[1])
        ):
            best = (objective, int(k), plan, report)
    return OptimizeResult(
        plan=best[2], report=best[3], objective=best[0], evaluations=tuple(evaluations)
    )
