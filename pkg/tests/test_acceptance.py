"""End-to-end acceptance suite.

Each test enforces one release criterion at its stated tolerance and prints a
PASS line on success (run with ``pytest -s`` to see them).  The trace bank
for the inequality and ceiling criteria spans the instance zoo, twenty seeds
and the four initial-curvature fractions.
"""

import copy
import time

import numpy as np
import pytest

from autocond.dataio import write_trace_csv
from autocond.diagnostics import (
    failure_census,
    lemma1_check,
    rate_fit,
    theorem1_bound_check,
    theorem5_bound_check,
    theorem6_bound_check,
)
from autocond.instances import (
    SphereManifold,
    StiefelManifold,
    holder_toy,
    nonconvex_quadratic_simplex,
    quadratic_problem,
    quartic_kernel,
    random_sphere_point,
    random_stiefel_point,
    rel_smooth_quartic,
    sphere_rayleigh,
    stiefel_brockett,
    stiefel_initial_curvature,
    synthetic_logreg,
    trimmed_l1_prox,
    trimmed_l1_prox_bruteforce,
    trimmed_l1_value,
)
from autocond.oracles import euclidean_kernel, gradient_check
from autocond.solvers import (
    SolverConfig,
    ac_bpgm,
    ac_cgm,
    ac_pgm,
    ac_rgm,
    pgm_constant,
    rgm_armijo,
)

SEEDS = range(20)
THETAS = (0.05, 0.01, 0.005, 0.001)


def announce(name):
    print(f"\nACCEPTANCE[{name}]: PASS")


def observed_floor(trace):
    return min([trace.header.initial_objective]
               + [r.objective for r in trace.records])


@pytest.fixture(scope="module")
def trace_bank():
    """(kind, seed, theta) -> (trace, known_L, f_star_hint, extra)."""
    started = time.perf_counter()
    bank = {}
    for seed in SEEDS:
        quad = quadratic_problem(30, seed, trimmed=(0.05, 5))
        logreg = synthetic_logreg(60, 20, seed).composite()
        simplex = nonconvex_quadratic_simplex(10, seed)
        sphere = sphere_rayleigh(20, seed)
        quartic = rel_smooth_quartic(8, 12, seed)
        sphere_x0 = random_sphere_point(20, seed + 1000003)
        quartic_x0 = np.random.default_rng(seed + 1000003).standard_normal(8) / np.sqrt(8)
        for theta in THETAS:
            cfg = lambda fam, L, tol: SolverConfig(
                family=fam, alpha=1.1 if fam in ("pgm", "bpgm") else 0.6,
                l0=theta * L, max_iter=350, residual_tol=tol)
            # tolerances sit above the curvature-estimate noise floor
            # (~eps |f| / step^2), where the no-clamping estimator is exact
            t = ac_pgm(quad, np.zeros(30), cfg("pgm", quad.known_L, 1e-6))
            bank[("quad", seed, theta)] = (t, quad.known_L, quad.lower_bound_hint, None)
            t = ac_pgm(logreg, np.zeros(20), cfg("pgm", logreg.known_L, 1e-7))
            bank[("logreg", seed, theta)] = (t, logreg.known_L, observed_floor(t), None)
            t = ac_cgm(simplex, np.full(10, 0.1), cfg("cgm", simplex.known_L, 1e-6))
            bank[("simplex", seed, theta)] = (t, simplex.known_L, observed_floor(t),
                                              simplex.diameter)
            t = ac_rgm(sphere, sphere_x0, cfg("rgm", sphere.known_L, 1e-6))
            bank[("sphere", seed, theta)] = (t, sphere.known_L, observed_floor(t), None)
            t = ac_bpgm(quartic, quartic_kernel(), quartic_x0,
                        cfg("bpgm", quartic.known_L, 1e-8))
            bank[("quartic", seed, theta)] = (t, quartic.known_L, 0.0, None)
    bank["elapsed"] = time.perf_counter() - started
    return bank


class TestInequalitySuite:
    def test_lemma_and_theorem_bounds_across_zoo(self, trace_bank):
        started = time.perf_counter()
        for (key, payload) in trace_bank.items():
            if key == "elapsed":
                continue
            kind, seed, theta = key
            trace, known_l, hint, extra = payload
            if kind in ("quad", "logreg"):
                assert lemma1_check(trace).passed, (kind, seed, theta)
                assert theorem1_bound_check(trace, known_l, hint).passed, \
                    (kind, seed, theta)
            elif kind == "simplex":
                assert theorem5_bound_check(trace, known_l, extra, hint).passed, \
                    (seed, theta)
            elif kind == "sphere":
                assert theorem6_bound_check(trace, known_l, hint).passed, \
                    (seed, theta)
        elapsed = trace_bank["elapsed"] + time.perf_counter() - started
        assert elapsed <= 300.0, f"inequality suite took {elapsed:.1f}s (> 5 min)"
        announce("inequality-suite")

    def test_mutations_fail(self, trace_bank):
        def saturate(trace):
            # residuals far above any theorem bound, failure set emptied so
            # the trajectory constant C cannot absorb the corruption
            mutated = copy.deepcopy(trace)
            for record in mutated.records:
                record.residual = 1e6
                if record.success is not None:
                    record.success = True
            return mutated

        trace, known_l, hint, _ = trace_bank[("logreg", 0, 0.01)]
        inflated = copy.deepcopy(trace)
        inflated.records[0].residual *= 10.0
        assert not lemma1_check(inflated).passed
        assert not theorem1_bound_check(saturate(trace), known_l, hint).passed

        trace, known_l, hint, diameter = trace_bank[("simplex", 0, 0.01)]
        assert not theorem5_bound_check(saturate(trace), known_l, diameter,
                                        hint).passed

        trace, known_l, hint, _ = trace_bank[("sphere", 0, 0.01)]
        assert not theorem6_bound_check(saturate(trace), known_l, hint).passed
        announce("inequality-suite-mutations")


class TestGammaCeilingAndCensus:
    def test_exact_bounds_on_l_known_instances(self, trace_bank):
        for (key, payload) in trace_bank.items():
            if key == "elapsed":
                continue
            kind, seed, theta = key
            trace, known_l, _, _ = payload
            l0 = trace.header.config["l0"]
            cap = max(l0, known_l) + 1e-9
            assert all(r.gamma <= cap for r in trace.records if r.gamma is not None), \
                (kind, seed, theta)
            count, bound = failure_census(trace, known_l)
            assert count <= bound, (kind, seed, theta, count, bound)
        announce("gamma-ceiling-and-failure-census")


class TestSublinearRate:
    def test_quadratic_trimmed_l1_slope(self):
        problem = quadratic_problem(50, 11, eig_min=0.002, eig_max=1.0,
                                    trimmed=(0.05, 5))
        cfg = SolverConfig(family="pgm", alpha=1.1, l0=0.01 * problem.known_L,
                           max_iter=5000, residual_tol=0.0)
        trace = ac_pgm(problem, np.zeros(50), cfg)
        fit = rate_fit(trace, 0.5, scale="loglog")
        assert fit.slope <= -0.5 + 0.15, fit
        announce("sublinear-rate")


class TestWeakSmoothnessAdaptivity:
    def run_holder(self, nu, seed=5):
        problem = holder_toy(nu, 20)
        rng = np.random.default_rng(seed)
        x0 = rng.standard_normal(20)
        x0 /= np.linalg.norm(x0)
        cfg = SolverConfig(family="pgm", alpha=1.1, l0=1.0, max_iter=5000,
                           residual_tol=0.0)
        trace = ac_pgm(problem, x0, cfg)
        return rate_fit(trace, 0.5, scale="loglog").slope

    def test_exponent_and_ordering(self):
        slope_half = self.run_holder(0.5)
        assert slope_half <= -1.0 / 3.0 + 0.1, slope_half
        slope_steep = self.run_holder(0.9)
        slope_shallow = self.run_holder(0.3)
        assert slope_steep < slope_shallow, (slope_steep, slope_shallow)
        announce("weak-smoothness-adaptivity")


class TestKlLinearRate:
    def test_semilog_fit(self):
        model = synthetic_logreg(200, 50, 7)  # lambda1 = 1e-2/m, lambda2 = 10/m
        assert model.kappa == 10
        problem = model.composite()
        cfg = SolverConfig(family="pgm", alpha=1.1, l0=0.01 * problem.known_L,
                           max_iter=30000, residual_tol=1e-8)
        trace = ac_pgm(problem, np.zeros(50), cfg)
        fit = rate_fit(trace, 0.5, scale="semilog")
        assert fit.slope < 0.0, fit
        assert fit.r_squared >= 0.9, fit
        announce("kl-linear-rate")


class TestConstantStepsizeDominance:
    def test_ac_pgm_reaches_tolerance_first(self):
        model = synthetic_logreg(200, 50, 7)
        problem = model.composite()
        known_l = problem.known_L
        cfg = SolverConfig(family="pgm", alpha=1.1, l0=0.01 * known_l,
                           max_iter=50000, residual_tol=1e-6)
        adaptive = ac_pgm(problem, np.zeros(50), cfg)
        constant = pgm_constant(problem, np.zeros(50), 1.1 * known_l,
                                max_iter=50000, tol=1e-6)

        def first_hit(trace):
            for record in trace.records:
                if record.residual <= 1e-6:
                    return record.k
            return None

        k_adaptive, k_constant = first_hit(adaptive), first_hit(constant)
        assert k_adaptive is not None and k_constant is not None
        assert k_adaptive < k_constant, (k_adaptive, k_constant)
        announce("constant-stepsize-dominance")


class TestBregmanReduction:
    def test_euclidean_kernel_reproduces_proximal_iterates(self):
        worst = 0.0
        for seed in range(10):
            problem = quadratic_problem(20, seed, trimmed=(0.05, 4))
            x0 = np.random.default_rng(seed + 99).standard_normal(20)
            cfg_p = SolverConfig(family="pgm", alpha=1.1, l0=0.02, max_iter=300,
                                 residual_tol=1e-9)
            cfg_b = SolverConfig(family="bpgm", alpha=1.1, l0=0.02, max_iter=300,
                                 residual_tol=1e-9)
            proximal = ac_pgm(problem, x0, cfg_p, keep_iterates=True)
            bregman = ac_bpgm(problem, euclidean_kernel(problem.prox), x0, cfg_b,
                              keep_iterates=True)
            assert len(proximal.iterates) == len(bregman.iterates), seed
            for a, b in zip(proximal.iterates, bregman.iterates):
                worst = max(worst, float(np.max(np.abs(a - b))))
        assert worst <= 1e-12, worst
        announce("bregman-reduction")


class TestProxOracleEquivalence:
    def test_five_hundred_random_instances(self):
        rng = np.random.default_rng(2024)
        weights = (0.0, 0.1, 1.0, 10.0)
        for trial in range(500):
            n = int(rng.integers(3, 9))
            kappa = int(rng.integers(0, n + 1))
            weight = float(weights[rng.integers(0, 4)])
            y = rng.standard_normal(n) * float(rng.choice([0.3, 1.0, 5.0]))
            fast = trimmed_l1_prox(y, weight, kappa)
            brute = trimmed_l1_prox_bruteforce(y, weight, kappa)

            def objective(x):
                return weight * trimmed_l1_value(x, kappa) \
                    + 0.5 * float(np.sum((x - y) ** 2))

            assert objective(fast) - objective(brute) <= 1e-12, \
                (trial, n, kappa, weight)
        announce("prox-oracle-equivalence")


class TestRetractionAccounting:
    def test_table_pattern_across_five_seeds(self):
        for seed in range(5):
            problem = stiefel_brockett(25, 5, seed)
            x0 = random_stiefel_point(25, 5, seed + 1000003)
            probe = stiefel_initial_curvature(problem, x0, seed + 2000003)
            armijo_cfg = SolverConfig(family="armijo", sigma=1e-4, t=0.5,
                                      s=0.001 * probe, max_iter=10 ** 6,
                                      residual_tol=1e-4)
            rgm_cfg = SolverConfig(family="rgm", alpha=0.6, l0=0.01 * probe,
                                   max_iter=10 ** 6, residual_tol=1e-4)
            standard = rgm_armijo(problem, x0, armijo_cfg)
            reduced = rgm_armijo(problem, x0, armijo_cfg, reduced=True)
            adaptive = ac_rgm(problem, x0, rgm_cfg)
            for trace in (standard, reduced, adaptive):
                assert trace.records[-1].residual <= 1e-4, seed
                assert len(trace.records) < 10 ** 6
            s_std = standard.summary()
            s_red = reduced.summary()
            s_ac = adaptive.summary()
            assert s_ac["total_retractions"] == s_ac["iterations"], seed
            assert s_std["total_retractions"] > s_std["iterations"], seed
            assert s_red["total_retractions"] <= s_std["total_retractions"], seed
        announce("retraction-accounting")


class TestRetractionAxioms:
    def test_fixed_point_and_first_order_slopes(self):
        stiefel = StiefelManifold(9, 3)
        x_st = random_stiefel_point(9, 3, 0)
        xi_st = stiefel.project_tangent(
            x_st, np.random.default_rng(1).standard_normal((9, 3)))
        sphere = SphereManifold(12)
        x_sp = random_sphere_point(12, 2)
        xi_sp = sphere.project_tangent(
            x_sp, np.random.default_rng(3).standard_normal(12))

        assert stiefel.retract(x_st, np.zeros_like(x_st)) is x_st
        assert sphere.retract(x_sp, np.zeros_like(x_sp)) is x_sp

        for manifold, x, xi in ((stiefel, x_st, xi_st), (sphere, x_sp, xi_sp)):
            scales = np.array([1e-2, 1e-3, 1e-4, 1e-5])
            deviations = [np.linalg.norm(manifold.retract(x, t * xi) - (x + t * xi))
                          for t in scales]
            slope = np.polyfit(np.log(scales), np.log(deviations), 1)[0]
            assert slope >= 1.9, (manifold.name, slope)
        announce("retraction-axioms")


class TestGradientChecks:
    def test_all_instance_gradients(self):
        rng = np.random.default_rng(31)
        cases = []

        logreg = synthetic_logreg(40, 15, 0)
        cases.append(("logreg", logreg.smooth_value, logreg.smooth_gradient,
                      [rng.standard_normal(15) * 0.5 for _ in range(20)]))

        quad = quadratic_problem(15, 0, trimmed=(0.05, 3))
        cases.append(("quad", quad.smooth_value, quad.smooth_gradient,
                      [rng.standard_normal(15) for _ in range(20)]))

        holder = holder_toy(0.5, 10)
        cases.append(("holder", holder.smooth_value, holder.smooth_gradient,
                      [rng.standard_normal(10) for _ in range(20)]))

        quartic = rel_smooth_quartic(8, 12, 0)
        cases.append(("quartic", quartic.smooth_value, quartic.smooth_gradient,
                      [rng.standard_normal(8) for _ in range(20)]))

        simplex = nonconvex_quadratic_simplex(10, 0)
        cases.append(("simplex", simplex.smooth_value, simplex.smooth_gradient,
                      [rng.dirichlet(np.ones(10)) for _ in range(20)]))

        brockett = stiefel_brockett(8, 3, 0)
        flat_value = lambda v: brockett.value(v.reshape(8, 3))
        flat_grad = lambda v: brockett.euclidean_gradient(v.reshape(8, 3)).ravel()
        cases.append(("brockett", flat_value, flat_grad,
                      [random_stiefel_point(8, 3, s).ravel() for s in range(20)]))

        rayleigh = sphere_rayleigh(10, 0)
        cases.append(("rayleigh", rayleigh.value, rayleigh.euclidean_gradient,
                      [random_sphere_point(10, s) for s in range(20)]))

        for name, value, gradient, points in cases:
            report = gradient_check(value, gradient, points, tolerance=1e-4)
            assert report.passed, (name, report.max_rel_error)
        announce("gradient-checks")


class TestDeterminism:
    def test_consecutive_runs_byte_identical(self, tmp_path):
        problem = synthetic_logreg(60, 20, 9).composite()
        cfg = SolverConfig(family="pgm", alpha=1.1, l0=0.01 * problem.known_L,
                           max_iter=500, residual_tol=1e-7)
        bodies = []
        for run in range(2):
            trace = ac_pgm(problem, np.zeros(20), cfg)
            path = tmp_path / f"run{run}.csv"
            write_trace_csv(trace, path)
            body = [",".join(line.split(",")[:-1])
                    for line in path.read_text().splitlines()]
            bodies.append(body)
        assert bodies[0] == bodies[1]
        announce("determinism")
