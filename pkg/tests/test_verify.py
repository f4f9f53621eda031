"""Monte Carlo harness tests: RNG correctness, plan validation, determinism.

The RNG tests compare the numpy uint64 implementation against a pure-python
big-integer reimplementation of the same avalanche, so a wraparound or cast
bug in either path cannot hide. Counting tests pin exact violation counts:
every draw is a pure function of (root seed, stream, counter), so the counts
are reproducible constants, not statistical quantities.
"""

import dataclasses
import math

import numpy as np
import pytest

from tailbound.cgf import DiscreteDistribution, TabulatedFunction, cgf_discrete, rate_bound_T
from tailbound.chaining import FunctionFamily, extremal_difference
from tailbound.rng import finalize, normals, substream_seed, uniforms
from tailbound.verify import TrialPlan, VerificationReport, run_trials, sweep

_MASK = (1 << 64) - 1
_PY_GOLDEN = 0x9E3779B97F4A7C15


def _finalize_py(z: int) -> int:
    # reference SplitMix64 avalanche in unbounded python ints
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return (z ^ (z >> 31)) & _MASK


def _substream_py(root: int, index: int) -> int:
    return _finalize_py((root + (index + 1) * _PY_GOLDEN) & _MASK)


def _uniform_py(base: int, counter: int) -> float:
    bits = _finalize_py((base + (counter + 1) * _PY_GOLDEN) & _MASK)
    return ((bits >> 11) + 0.5) * 2.0**-53


def _rademacher_plan(**overrides):
    dist = DiscreteDistribution(
        support=np.array([[-1.0], [1.0]]), probabilities=np.array([0.5, 0.5])
    )
    kwargs = dict(
        target="chernoff",
        n=50,
        r=0.05,
        trials=100_000,
        root_seed=20250819,
        distribution=dist,
        function_values=np.array([-1.0, 1.0]),
    )
    kwargs.update(overrides)
    return TrialPlan(**kwargs)


class TestRng:
    def test_finalize_matches_pure_python(self):
        for z in (0, 1, 2**63, 0xDEADBEEF, _MASK, 0x123456789ABCDEF0):
            assert int(finalize(np.uint64(z))) == _finalize_py(z)

    def test_substream_seed_matches_pure_python(self):
        seeds = substream_seed(20250819, np.arange(6))
        for i in range(6):
            assert int(seeds[i]) == _substream_py(20250819, i)
        # scalar index agrees with the vectorized path
        assert int(substream_seed(20250819, 3)) == int(seeds[3])

    def test_uniform_values_match_pure_python(self):
        base = substream_seed(7, 3)
        u = uniforms(base, 5)
        for j in range(5):
            assert u[j] == _uniform_py(int(base), j)

    def test_uniforms_shape_and_open_interval(self):
        seeds = substream_seed(11, np.arange(6).reshape(3, 2))
        u = uniforms(seeds, 5)
        assert u.shape == (3, 2, 5)
        assert np.all(u > 0.0) and np.all(u < 1.0)

    def test_substreams_distinct(self):
        seeds = substream_seed(0, np.arange(4096))
        assert np.unique(seeds).size == 4096

    def test_normals_prefix_stable(self):
        # extending count must not disturb earlier draws
        base = substream_seed(5, 0)
        assert np.array_equal(normals(base, 8)[:4], normals(base, 4))

    def test_uniform_mean(self):
        seeds = substream_seed(17, np.arange(1000))
        u = uniforms(seeds, 1000)
        # se = (1/sqrt(12)) / 1000
        assert abs(u.mean() - 0.5) < 4.0 * (1.0 / math.sqrt(12.0)) / 1000.0

    def test_normal_moments(self):
        seeds = substream_seed(23, np.arange(1000))
        x = normals(seeds, 1000)
        n = x.size
        assert abs(x.mean()) < 4.0 / math.sqrt(n)
        # var(s^2) ~ 2/n for gaussians
        assert abs(x.var() - 1.0) < 4.0 * math.sqrt(2.0 / n)


class TestTrialPlanValidation:
    def test_unknown_target(self):
        with pytest.raises(ValueError):
            _rademacher_plan(target="bernstein")

    @pytest.mark.parametrize("field,value", [("n", 0), ("n", True), ("n", 2.0), ("trials", 0), ("trials", True)])
    def test_bad_counts(self, field, value):
        with pytest.raises(ValueError):
            _rademacher_plan(**{field: value})

    @pytest.mark.parametrize("r", [0.0, -1.0, math.nan])
    def test_bad_rate(self, r):
        with pytest.raises(ValueError):
            _rademacher_plan(r=r)

    @pytest.mark.parametrize("k", [-1, True, 1.5])
    def test_bad_k(self, k):
        with pytest.raises(ValueError):
            _rademacher_plan(k=k)

    def test_chernoff_requires_distribution_and_function(self):
        with pytest.raises(ValueError):
            _rademacher_plan(distribution=None)
        with pytest.raises(ValueError):
            _rademacher_plan(function_values=None)

    def test_chernoff_function_length_mismatch(self):
        with pytest.raises(ValueError):
            _rademacher_plan(function_values=np.array([-1.0, 0.0, 1.0]))

    def test_family_targets_require_family(self):
        for target in ("corollary", "theorem-main"):
            with pytest.raises(ValueError):
                TrialPlan(target=target, n=10, r=0.1, trials=10, root_seed=1)

    def test_gaussian_requirements(self, poly2_model):
        with pytest.raises(ValueError):
            TrialPlan(target="gaussian", n=10, r=0.1, trials=10, root_seed=1, mesh=8)
        with pytest.raises(ValueError):
            TrialPlan(
                target="gaussian", n=10, r=0.1, trials=10, root_seed=1,
                model=poly2_model, mesh=0,
            )
        with pytest.raises(ValueError):
            TrialPlan(
                target="gaussian", n=10, r=0.1, trials=10, root_seed=1,
                model=poly2_model, mesh=8, k=poly2_model.dim + 1,
            )


class TestReportValidation:
    def _kwargs(self):
        rate = 0.03
        return dict(
            target="chernoff", n=10, r=1.0, k=0, trials=100, violations=3,
            rate=rate, guarantee=0.05,
            stderr=math.sqrt(rate * (1.0 - rate) / 100), passed=True,
        )

    def test_valid_report(self):
        rep = VerificationReport(**self._kwargs())
        d = rep.as_dict()
        assert d["pass"] is True
        assert d["violations"] == 3

    @pytest.mark.parametrize("rate", [-0.1, 1.2])
    def test_rate_range(self, rate):
        kw = self._kwargs()
        kw.update(rate=rate, passed=rate <= kw["guarantee"] + 3 * kw["stderr"])
        with pytest.raises(ValueError):
            VerificationReport(**kw)

    def test_inconsistent_pass_flag(self):
        kw = self._kwargs()
        kw["passed"] = False
        with pytest.raises(ValueError):
            VerificationReport(**kw)


class TestRunTrials:
    def test_chernoff_reference_run(self):
        plan = _rademacher_plan()
        rep = run_trials(plan)
        # deterministic count: pure function of (seed, plan)
        assert rep.violations == 1547
        assert rep.rate == pytest.approx(0.01547, abs=0)
        assert rep.guarantee == pytest.approx(math.exp(-2.5), rel=1e-15)
        assert rep.stderr == pytest.approx(math.sqrt(rep.rate * (1 - rep.rate) / plan.trials))
        assert rep.passed
        assert rep.as_dict()["pass"] is True

    def test_chernoff_rate_near_chernoff_ceiling(self):
        # the bound is not vacuous here: observed rate within [c/50, c]
        plan = _rademacher_plan()
        rep = run_trials(plan)
        assert rep.guarantee / 50 < rep.rate <= rep.guarantee

    def test_threshold_override_impossible(self):
        plan = _rademacher_plan(trials=500)
        rep = run_trials(plan, threshold_override=-1.0)
        assert rep.violations == 500
        assert rep.rate == 1.0
        assert rep.stderr == 0.0
        assert not rep.passed

    def test_threshold_override_unreachable(self):
        plan = _rademacher_plan(trials=500)
        rep = run_trials(plan, threshold_override=2.0)
        # |empirical mean| <= 1 for a sign function
        assert rep.violations == 0
        assert rep.passed

    def test_corollary_family12(self, family12):
        plan = TrialPlan(
            target="corollary", n=200, r=0.05, trials=20_000, root_seed=7,
            family=family12,
        )
        rep = run_trials(plan)
        assert rep.violations == 0
        assert rep.passed
        # threshold the harness tests against is the extremal pair's T_r
        assert extremal_difference(family12, 0.05) is not None

    def test_theorem_main_family12(self, family12):
        plan = TrialPlan(
            target="theorem-main", n=200, r=0.05, trials=20_000, root_seed=7, k=2,
            family=family12,
        )
        rep = run_trials(plan)
        assert rep.violations == 0
        assert rep.guarantee == pytest.approx(2.0 * math.exp(-10.0), rel=1e-12)
        assert rep.passed

    def test_singleton_zero_family(self):
        dist = DiscreteDistribution(
            support=np.array([[-1.0], [1.0]]), probabilities=np.array([0.5, 0.5])
        )
        fam = FunctionFamily(dist, {"zero": np.zeros(2)})
        for target in ("corollary", "theorem-main"):
            plan = TrialPlan(
                target=target, n=20, r=0.1, trials=2_000, root_seed=3, family=fam
            )
            rep = run_trials(plan)
            assert rep.violations == 0
            assert rep.rate == 0.0
            assert rep.passed

    def test_gaussian_poly2(self, poly2_model):
        plan = TrialPlan(
            target="gaussian", n=100, r=0.02, trials=1_500, root_seed=42, k=2,
            model=poly2_model, mesh=128,
        )
        rep = run_trials(plan)
        assert rep.guarantee == pytest.approx(2.0 * math.exp(-2.0), rel=1e-12)
        assert rep.violations == 0
        assert rep.passed

    def test_sampler_mean_matches_distribution(self, family12):
        # replicate the harness sampling convention on one centered member
        dist = family12.distribution
        vals = family12.values[1]
        cdf = np.cumsum(dist.probabilities)
        cdf[-1] = 1.0
        u = uniforms(substream_seed(99, np.arange(1, 1001)), 1000)
        draws = vals[np.searchsorted(cdf, u)]
        sigma = math.sqrt(float(np.sum(dist.probabilities * vals**2)))
        assert abs(draws.mean()) < 4.0 * sigma / 1000.0


class TestParallelism:
    def test_thread_count_determinism(self, monkeypatch, family12):
        plans = [
            _rademacher_plan(trials=20_000),
            TrialPlan(
                target="theorem-main", n=100, r=0.03, trials=4_000, root_seed=11,
                k=2, family=family12,
            ),
        ]
        for plan in plans:
            reports = []
            for threads in ("1", "3", "8", "0"):
                monkeypatch.setenv("TAILBOUND_THREADS", threads)
                reports.append(run_trials(plan).as_dict())
            assert all(rep == reports[0] for rep in reports[1:])

    def test_gaussian_thread_determinism(self, monkeypatch, poly2_model):
        plan = TrialPlan(
            target="gaussian", n=60, r=0.05, trials=1_200, root_seed=5, k=3,
            model=poly2_model, mesh=64,
        )
        reports = []
        for threads in ("1", "4"):
            monkeypatch.setenv("TAILBOUND_THREADS", threads)
            reports.append(run_trials(plan).as_dict())
        assert reports[0] == reports[1]

    def test_invalid_thread_env(self, monkeypatch):
        monkeypatch.setenv("TAILBOUND_THREADS", "many")
        with pytest.raises(ValueError):
            run_trials(_rademacher_plan(trials=100))


class TestSweep:
    def test_single_point_equals_run_trials(self):
        plan = _rademacher_plan(trials=2_000)
        reports = sweep(plan)
        assert len(reports) == 1
        assert reports[0].as_dict() == run_trials(plan).as_dict()

    def test_grid_order_and_values(self):
        plan = _rademacher_plan(trials=500)
        reports = sweep(plan, n_values=[20, 40], r_values=[0.05, 0.1])
        assert [(rep.n, rep.r) for rep in reports] == [
            (20, 0.05), (20, 0.1), (40, 0.05), (40, 0.1),
        ]
        for rep in reports:
            direct = run_trials(dataclasses.replace(plan, n=rep.n, r=rep.r))
            assert rep.as_dict() == direct.as_dict()

    def test_k_axis(self, family12):
        plan = TrialPlan(
            target="theorem-main", n=50, r=0.05, trials=400, root_seed=2,
            family=family12,
        )
        reports = sweep(plan, k_values=[0, 2, 3])
        assert [rep.k for rep in reports] == [0, 2, 3]

    def test_empty_axis_rejected(self):
        plan = _rademacher_plan(trials=100)
        with pytest.raises(ValueError):
            sweep(plan, r_values=[])

    def test_invalid_grid_point_propagates(self):
        plan = _rademacher_plan(trials=100)
        with pytest.raises(ValueError):
            sweep(plan, n_values=[10, 0])


def test_chernoff_threshold_is_rate_bound(rademacher):
    # the harness thresholds chernoff runs at T_r of the tracked function
    dist = DiscreteDistribution(
        support=np.asarray(rademacher["support"], dtype=float),
        probabilities=np.asarray(rademacher["probabilities"], dtype=float),
    )
    f = TabulatedFunction(np.asarray(rademacher["functions"]["f"], dtype=float))
    t_direct = rate_bound_T(cgf_discrete(dist, f), 0.05)
    plan = _rademacher_plan(trials=4_000)
    boosted = run_trials(plan, threshold_override=t_direct)
    assert boosted.as_dict() == run_trials(plan).as_dict()
