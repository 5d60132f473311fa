"""Linesearch-free first-order solvers with auto-conditioned stepsizes.

Four adaptive methods (proximal gradient, Bregman proximal gradient,
conditional gradient, Riemannian gradient) plus the baselines they are
compared against (constant-stepsize proximal gradient, standard and reduced
Armijo Riemannian gradient).  All share the same stepsize rule: the inverse
stepsize gamma_k is the running maximum of local curvature estimates, so no
iteration is ever retried and no Lipschitz constant is needed up front.

Every solver is a pure state-transition loop emitting one IterationRecord per
iteration into a Trace; runs sharing no mutable state may execute
concurrently.
"""

import math
import time
from dataclasses import dataclass

import numpy as np

from .oracles import bregman_divergence

__all__ = [
    "IterationRecord",
    "LineSearchError",
    "SolverConfig",
    "Trace",
    "TraceHeader",
    "ac_bpgm",
    "ac_cgm",
    "ac_pgm",
    "ac_rgm",
    "pgm_constant",
    "rgm_armijo",
]

# step_norm^2 below this is treated as an exact fixed point
_STEP_UNDERFLOW = 1e-300

_PROX_FAMILIES = ("pgm", "bpgm")      # require alpha > 1
_HALF_FAMILIES = ("cgm", "rgm")       # require alpha > 1/2


class LineSearchError(RuntimeError):
    """Armijo backtracking shrank the trial stepsize below representability."""


@dataclass(frozen=True)
class SolverConfig:
    """Run configuration, validated at construction for the target family.

    ``family`` is one of "pgm", "bpgm", "cgm", "rgm", "armijo".  The adaptive
    families need ``alpha`` (> 1 for pgm/bpgm, > 1/2 for cgm/rgm) and the
    initial curvature guess ``l0`` > 0.  The armijo family instead needs the
    backtracking parameters sigma, t in (0, 1) and initial stepsize s > 0.
    """

    family: str
    alpha: float | None = None
    l0: float | None = None
    max_iter: int = 1000
    residual_tol: float = 1e-6
    sigma: float | None = None
    t: float | None = None
    s: float | None = None

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if self.residual_tol < 0:
            raise ValueError("residual_tol must be nonnegative")
        if self.family in _PROX_FAMILIES or self.family in _HALF_FAMILIES:
            if self.alpha is None or self.l0 is None:
                raise ValueError(f"{self.family} requires alpha and l0")
            if self.l0 <= 0:
                raise ValueError("l0 must be positive")
            low = 1.0 if self.family in _PROX_FAMILIES else 0.5
            if self.alpha <= low:
                raise ValueError(f"{self.family} requires alpha > {low}")
        elif self.family == "armijo":
            if self.sigma is None or self.t is None or self.s is None:
                raise ValueError("armijo requires sigma, t, s")
            if not 0 < self.sigma < 1 or not 0 < self.t < 1 or self.s <= 0:
                raise ValueError("armijo needs sigma, t in (0,1) and s > 0")
        else:
            raise ValueError(f"unknown solver family {self.family!r}")

    @property
    def beta(self):
        """Success threshold: iteration k succeeds iff beta * gamma_k >= L_k."""
        if self.family in _PROX_FAMILIES:
            return (self.alpha + 1.0) / 2.0
        if self.family in _HALF_FAMILIES:
            return self.alpha + 0.5
        return None

    def scalars(self):
        out = {"max_iter": self.max_iter, "residual_tol": self.residual_tol}
        for name in ("alpha", "l0", "sigma", "t", "s"):
            value = getattr(self, name)
            if value is not None:
                out[name] = value
        return out


@dataclass
class IterationRecord:
    """One row of a solver trace.

    ``curvature`` is the local estimate L_k (absent when the run terminated
    before estimation), ``success`` whether beta * gamma_k >= L_k held,
    ``residual`` the solver's stationarity measure at the iteration's start
    point, ``step_norm`` the norm of the update (absent when no update step
    was taken), ``retractions`` the cumulative retraction count (Riemannian
    solvers only) and ``bregman_div`` the divergence between consecutive
    iterates (Bregman solver only, not serialized to CSV).
    """

    k: int
    residual: float
    objective: float
    gamma: float | None = None
    curvature: float | None = None
    success: bool | None = None
    step_norm: float | None = None
    tau: float | None = None
    retractions: int | None = None
    bregman_div: float | None = None
    wall_ns: int = 0


@dataclass
class TraceHeader:
    solver: str
    config: dict
    beta: float | None
    provenance: dict
    initial_objective: float
    seed: int | None = None


@dataclass
class Trace:
    header: TraceHeader
    records: list
    iterates: list | None = None

    def summary(self):
        """Recomputed from the records; never stored."""
        updates = [r for r in self.records if r.step_norm is not None]
        retr = 0
        for r in self.records:
            if r.retractions is not None:
                retr = r.retractions
        return {
            "iterations": len(updates),
            "failures": sum(1 for r in self.records if r.success is False),
            "min_residual": min((r.residual for r in self.records), default=math.inf),
            "final_objective": self.records[-1].objective if self.records else math.inf,
            "total_retractions": retr,
        }


def _header(solver, cfg_scalars, beta, problem, initial_objective):
    provenance = dict(getattr(problem, "provenance", {}) or {})
    return TraceHeader(
        solver=solver,
        config=dict(cfg_scalars),
        beta=beta,
        provenance=provenance,
        initial_objective=float(initial_objective),
        seed=provenance.get("seed"),
    )


def _check_finite(value, what, k):
    if not math.isfinite(value):
        raise ArithmeticError(f"{what} became non-finite at iteration {k}")


def ac_pgm(problem, x0, cfg, keep_iterates=False):
    """Auto-conditioned proximal gradient method.

    Per iteration: gamma_k = max of all past curvature estimates (seeded with
    l0), a prox-gradient step with inverse stepsize alpha * gamma_k, then the
    curvature estimate
    L_k = 2 (f(x_k) - f(x_{k-1}) - <grad f(x_{k-1}), x_k - x_{k-1}>) / ||x_k - x_{k-1}||^2.
    The residual ||R(x_{k-1})|| = alpha * gamma_k * ||x_{k-1} - x_k|| is
    recorded every iteration and checked before estimating L_k, so a
    terminating record carries no curvature entry.
    """
    if cfg.family != "pgm":
        raise ValueError("ac_pgm expects a 'pgm' config")
    x = np.asarray(x0, dtype=np.float64).copy()
    f_x = problem.smooth_value(x)
    g_x = problem.nonsmooth_value(x)
    if not math.isfinite(g_x):
        raise ValueError("x0 lies outside dom g")
    header = _header("ac-pgm", cfg.scalars(), cfg.beta, problem, f_x + g_x)
    records = []
    iterates = [x.copy()] if keep_iterates else None
    gamma = cfg.l0
    for k in range(1, cfg.max_iter + 1):
        started = time.perf_counter_ns()
        grad = problem.smooth_gradient(x)
        scaled = cfg.alpha * gamma
        x_new = problem.prox(x - grad / scaled, scaled)
        step = x_new - x
        sq = float(step @ step)
        step_norm = math.sqrt(sq)
        residual = scaled * step_norm
        f_new = problem.smooth_value(x_new)
        objective = f_new + problem.nonsmooth_value(x_new)
        _check_finite(objective, "objective", k)
        record = IterationRecord(k=k, residual=residual, objective=objective,
                                 gamma=gamma, step_norm=step_norm)
        if keep_iterates:
            iterates.append(x_new.copy())
        if residual <= cfg.residual_tol or sq < _STEP_UNDERFLOW:
            record.wall_ns = time.perf_counter_ns() - started
            records.append(record)
            break
        curvature = 2.0 * (f_new - f_x - float(grad @ step)) / sq
        record.curvature = curvature
        record.success = bool(cfg.beta * gamma >= curvature)
        record.wall_ns = time.perf_counter_ns() - started
        records.append(record)
        gamma = max(gamma, curvature)
        x = x_new
        f_x = f_new
    return Trace(header=header, records=records, iterates=iterates)


def pgm_constant(problem, x0, gamma, max_iter=1000, tol=1e-6, keep_iterates=False):
    """Proximal gradient baseline with fixed inverse stepsize gamma."""
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    x = np.asarray(x0, dtype=np.float64).copy()
    f_x = problem.smooth_value(x)
    g_x = problem.nonsmooth_value(x)
    if not math.isfinite(g_x):
        raise ValueError("x0 lies outside dom g")
    header = _header("pgm-constant",
                     {"gamma": float(gamma), "max_iter": max_iter, "residual_tol": tol},
                     None, problem, f_x + g_x)
    records = []
    iterates = [x.copy()] if keep_iterates else None
    for k in range(1, max_iter + 1):
        started = time.perf_counter_ns()
        grad = problem.smooth_gradient(x)
        x_new = problem.prox(x - grad / gamma, gamma)
        step = x_new - x
        sq = float(step @ step)
        step_norm = math.sqrt(sq)
        residual = gamma * step_norm
        objective = problem.smooth_value(x_new) + problem.nonsmooth_value(x_new)
        _check_finite(objective, "objective", k)
        records.append(IterationRecord(
            k=k, residual=residual, objective=objective, gamma=float(gamma),
            step_norm=step_norm, wall_ns=time.perf_counter_ns() - started))
        if keep_iterates:
            iterates.append(x_new.copy())
        if residual <= tol or sq < _STEP_UNDERFLOW:
            break
        x = x_new
    return Trace(header=header, records=records, iterates=iterates)


def ac_bpgm(problem, kernel, x0, cfg, keep_iterates=False):
    """Auto-conditioned Bregman proximal gradient method.

    The update solves argmin_y { <grad f(x_{k-1}), y> +
    alpha * gamma_k * D_h(y, x_{k-1}) + g(y) } through the kernel, and the
    curvature estimate divides by the Bregman divergence (no factor 2):
    L_k = (f(x_k) - f(x_{k-1}) - <grad f(x_{k-1}), x_k - x_{k-1}>) / D_h(x_k, x_{k-1}).
    With the Euclidean kernel both the iterates and the estimates coincide
    with ac_pgm.
    """
    if cfg.family != "bpgm":
        raise ValueError("ac_bpgm expects a 'bpgm' config")
    x = np.asarray(x0, dtype=np.float64).copy()
    if kernel.in_interior is not None and not kernel.in_interior(x):
        raise ValueError("x0 lies outside int dom h")
    f_x = problem.smooth_value(x)
    g_x = problem.nonsmooth_value(x)
    if not math.isfinite(g_x):
        raise ValueError("x0 lies outside dom g")
    header = _header("ac-bpgm", cfg.scalars(), cfg.beta, problem, f_x + g_x)
    records = []
    iterates = [x.copy()] if keep_iterates else None
    gamma = cfg.l0
    for k in range(1, cfg.max_iter + 1):
        started = time.perf_counter_ns()
        grad = problem.smooth_gradient(x)
        scaled = cfg.alpha * gamma
        x_new = kernel.kernel_step(grad, x, scaled)
        step = x_new - x
        sq = float(step @ step)
        step_norm = math.sqrt(sq)
        residual = scaled * step_norm
        f_new = problem.smooth_value(x_new)
        objective = f_new + problem.nonsmooth_value(x_new)
        _check_finite(objective, "objective", k)
        record = IterationRecord(k=k, residual=residual, objective=objective,
                                 gamma=gamma, step_norm=step_norm)
        if keep_iterates:
            iterates.append(x_new.copy())
        if residual <= cfg.residual_tol or sq < _STEP_UNDERFLOW:
            record.wall_ns = time.perf_counter_ns() - started
            records.append(record)
            break
        div = bregman_divergence(kernel, x_new, x)
        curvature = (f_new - f_x - float(grad @ step)) / div
        record.curvature = curvature
        record.success = bool(cfg.beta * gamma >= curvature)
        record.bregman_div = div
        record.wall_ns = time.perf_counter_ns() - started
        records.append(record)
        gamma = max(gamma, curvature)
        x = x_new
        f_x = f_new
    return Trace(header=header, records=records, iterates=iterates)


def ac_cgm(problem, x0, cfg, keep_iterates=False):
    """Auto-conditioned conditional gradient (Frank-Wolfe) method.

    Per iteration the linear minimization oracle gives v_k, the gap
    G_k = <grad f(x_{k-1}), x_{k-1} - v_k> + g(x_{k-1}) - g(v_k) is the
    residual, and the stepsize is
    tau_k = min(1, G_k / (alpha * gamma_k * ||x_{k-1} - v_k||^2)).  The gap is
    checked before tau_k, so a terminating record carries neither tau nor a
    curvature entry.
    """
    if cfg.family != "cgm":
        raise ValueError("ac_cgm expects a 'cgm' config")
    x = np.asarray(x0, dtype=np.float64).copy()
    f_x = problem.smooth_value(x)
    g_x = problem.nonsmooth_value(x)
    if not math.isfinite(g_x):
        raise ValueError("x0 lies outside dom g")
    header = _header("ac-cgm", cfg.scalars(), cfg.beta, problem, f_x + g_x)
    records = []
    iterates = [x.copy()] if keep_iterates else None
    gamma = cfg.l0
    for k in range(1, cfg.max_iter + 1):
        started = time.perf_counter_ns()
        grad = problem.smooth_gradient(x)
        vertex = problem.lmo(grad)
        if not np.all(np.isfinite(vertex)):
            raise ValueError("linear minimization oracle returned an unbounded point")
        g_v = problem.nonsmooth_value(vertex)
        gap = float(grad @ (x - vertex)) + g_x - g_v
        _check_finite(gap, "Frank-Wolfe gap", k)
        if gap <= cfg.residual_tol:
            records.append(IterationRecord(
                k=k, residual=gap, objective=f_x + g_x, gamma=gamma,
                wall_ns=time.perf_counter_ns() - started))
            break
        direction = vertex - x
        dir_sq = float(direction @ direction)
        tau = min(1.0, gap / (cfg.alpha * gamma * dir_sq))
        x_new = (1.0 - tau) * x + tau * vertex
        step = x_new - x
        sq = float(step @ step)
        f_new = problem.smooth_value(x_new)
        g_new = problem.nonsmooth_value(x_new)
        objective = f_new + g_new
        _check_finite(objective, "objective", k)
        record = IterationRecord(k=k, residual=gap, objective=objective,
                                 gamma=gamma, step_norm=math.sqrt(sq), tau=tau)
        if keep_iterates:
            iterates.append(x_new.copy())
        if sq < _STEP_UNDERFLOW:
            record.wall_ns = time.perf_counter_ns() - started
            records.append(record)
            break
        curvature = 2.0 * (f_new - f_x - float(grad @ step)) / sq
        record.curvature = curvature
        record.success = bool(cfg.beta * gamma >= curvature)
        record.wall_ns = time.perf_counter_ns() - started
        records.append(record)
        gamma = max(gamma, curvature)
        x = x_new
        f_x, g_x = f_new, g_new
    return Trace(header=header, records=records, iterates=iterates)


def ac_rgm(problem, x0, cfg, keep_iterates=False):
    """Auto-conditioned Riemannian gradient method.

    tau_k = 1 / (alpha * gamma_k), x_k = R_{x_{k-1}}(-tau_k grad f(x_{k-1})),
    L_k = 2 (f(x_k) - f(x_{k-1}) + tau_k ||grad||^2) / (tau_k^2 ||grad||^2).
    Exactly one retraction per update iteration.  The gradient norm is
    checked at the start of the iteration; when it is already below the
    tolerance a final record is emitted without performing any retraction.
    """
    if cfg.family != "rgm":
        raise ValueError("ac_rgm expects a 'rgm' config")
    manifold = problem.manifold
    x = np.asarray(x0, dtype=np.float64).copy()
    f_x = problem.value(x)
    header = _header("ac-rgm", cfg.scalars(), cfg.beta, problem, f_x)
    records = []
    iterates = [x.copy()] if keep_iterates else None
    gamma = cfg.l0
    retractions = 0
    for k in range(1, cfg.max_iter + 1):
        started = time.perf_counter_ns()
        grad = problem.gradient(x)
        grad_sq = manifold.inner(x, grad, grad)
        residual = math.sqrt(max(grad_sq, 0.0))
        _check_finite(residual, "gradient norm", k)
        if residual <= cfg.residual_tol:
            records.append(IterationRecord(
                k=k, residual=residual, objective=f_x, gamma=gamma,
                retractions=retractions, wall_ns=time.perf_counter_ns() - started))
            break
        tau = 1.0 / (cfg.alpha * gamma)
        x_new = manifold.retract(x, -tau * grad)
        retractions += 1
        f_new = problem.value(x_new)
        _check_finite(f_new, "objective", k)
        curvature = 2.0 * (f_new - f_x + tau * grad_sq) / (tau * tau * grad_sq)
        records.append(IterationRecord(
            k=k, residual=residual, objective=f_new, gamma=gamma,
            curvature=curvature, success=bool(cfg.beta * gamma >= curvature),
            step_norm=float(np.linalg.norm(x_new - x)), tau=tau,
            retractions=retractions, wall_ns=time.perf_counter_ns() - started))
        if keep_iterates:
            iterates.append(x_new.copy())
        gamma = max(gamma, curvature)
        x = x_new
        f_x = f_new
    return Trace(header=header, records=records, iterates=iterates)


def rgm_armijo(problem, x0, cfg, reduced=False, keep_iterates=False):
    """Riemannian gradient method with (reduced) Armijo backtracking.

    Standard mode evaluates the sufficient-decrease condition along the
    retracted trial point, costing one retraction per trial.  Reduced mode
    first tests the retraction-free surrogate at the ambient trial point
    x - s t^m grad and evaluates the retracted condition only when the
    surrogate holds.  ``retractions`` counts every retraction evaluation,
    rejected trials included.
    """
    if cfg.family != "armijo":
        raise ValueError("rgm_armijo expects an 'armijo' config")
    manifold = problem.manifold
    x = np.asarray(x0, dtype=np.float64).copy()
    f_x = problem.value(x)
    solver = "reduced-armijo" if reduced else "armijo"
    header = _header(solver, cfg.scalars(), None, problem, f_x)
    records = []
    iterates = [x.copy()] if keep_iterates else None
    retractions = 0
    for k in range(1, cfg.max_iter + 1):
        started = time.perf_counter_ns()
        grad = problem.gradient(x)
        grad_sq = manifold.inner(x, grad, grad)
        residual = math.sqrt(max(grad_sq, 0.0))
        _check_finite(residual, "gradient norm", k)
        if residual <= cfg.residual_tol:
            records.append(IterationRecord(
                k=k, residual=residual, objective=f_x,
                retractions=retractions, wall_ns=time.perf_counter_ns() - started))
            break
        m = 0
        while True:
            if m > 60:
                raise LineSearchError(f"stepsize underflow at iteration {k}")
            stepsize = cfg.s * cfg.t ** m
            target = -cfg.sigma * stepsize * grad_sq
            if reduced and problem.value(x - stepsize * grad) - f_x > target:
                m += 1
                continue
            trial = manifold.retract(x, -stepsize * grad)
            retractions += 1
            f_trial = problem.value(trial)
            if f_trial - f_x <= target:
                break
            m += 1
        records.append(IterationRecord(
            k=k, residual=residual, objective=f_trial,
            step_norm=float(np.linalg.norm(trial - x)), tau=stepsize,
            retractions=retractions, wall_ns=time.perf_counter_ns() - started))
        if keep_iterates:
            iterates.append(trial.copy())
        x = trial
        f_x = f_trial
    return Trace(header=header, records=records, iterates=iterates)
