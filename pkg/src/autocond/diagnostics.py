"""Post-hoc verification of solver traces against the theory they implement.

Every checker is a pure function of an immutable Trace (plus the constants
the corresponding statement needs) and returns a serializable report.  The
inequality tolerance 1e-8 * (1 + |rhs|) absorbs floating-point accumulation
across the per-iteration sums.
"""

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "BoundReport",
    "RateFit",
    "failure_census",
    "lemma1_check",
    "lemma3_check",
    "rate_fit",
    "theorem1_bound_check",
    "theorem5_bound_check",
    "theorem6_bound_check",
]

_REL_TOL = 1e-8


@dataclass(frozen=True)
class BoundReport:
    """Per-iteration (lhs, rhs) pairs of an inequality check."""

    name: str
    pairs: tuple
    max_violation: float
    passed: bool

    def to_dict(self):
        return {"name": self.name, "passed": self.passed,
                "max_violation": self.max_violation,
                "pairs": [list(p) for p in self.pairs]}


@dataclass(frozen=True)
class RateFit:
    """Least-squares line over a trailing window of the residual curve."""

    window: tuple
    slope: float
    intercept: float
    r_squared: float

    def to_dict(self):
        return {"window": list(self.window), "slope": self.slope,
                "intercept": self.intercept, "r_squared": self.r_squared}


def _evaluate(name, pairs):
    worst = -math.inf
    ok = True
    for lhs, rhs in pairs:
        worst = max(worst, lhs - rhs)
        if lhs - rhs > _REL_TOL * (1.0 + abs(rhs)):
            ok = False
    return BoundReport(name=name, pairs=tuple(pairs), max_violation=worst, passed=ok)


def _alpha(trace):
    try:
        return float(trace.header.config["alpha"])
    except KeyError as exc:
        raise ValueError("trace header lacks the alpha parameter") from exc


def _l0(trace):
    try:
        return float(trace.header.config["l0"])
    except KeyError as exc:
        raise ValueError("trace header lacks the l0 parameter") from exc


def _update_records(trace):
    return [r for r in trace.records if r.step_norm is not None]


def _require(records, fields):
    for r in records:
        for name in fields:
            if getattr(r, name) is None:
                raise ValueError(f"record k={r.k} lacks field {name!r}")


def _check_hint(trace, f_star_hint):
    observed = min([trace.header.initial_objective]
                   + [r.objective for r in trace.records])
    if f_star_hint > observed + 1e-12 * (1.0 + abs(observed)):
        raise ValueError("F* hint exceeds the best observed objective")


def _failure_peak(trace, key):
    """Max of key(record) over the unsuccessful estimation iterations."""
    peak = 0.0
    for r in trace.records:
        if r.success is False:
            peak = max(peak, key(r))
    return peak


def lemma1_check(trace, problem=None):
    """Per-iteration energy inequality of the proximal solver.

    For every k the weighted residual sum
    (alpha-1)/(4 alpha^2) * sum_{l<=k} residual_l^2 / gamma_l must not exceed
    F(x0) - F(x_k) plus the accumulated stepsize-growth terms
    (gamma_{l+1} - gamma_l)/2 * step_l^2 of the unsuccessful iterations.
    """
    del problem  # header carries F(x0); accepted for signature parity
    alpha = _alpha(trace)
    records = trace.records
    _require(records, ("gamma", "residual", "objective", "step_norm"))
    f0 = trace.header.initial_objective
    lhs_sum = 0.0
    fail_sum = 0.0
    pairs = []
    for r in records:
        lhs_sum += r.residual ** 2 / r.gamma
        if r.success is False:
            fail_sum += 0.5 * (r.curvature - r.gamma) * r.step_norm ** 2
        lhs = (alpha - 1.0) / (4.0 * alpha ** 2) * lhs_sum
        rhs = f0 - r.objective + fail_sum
        pairs.append((lhs, rhs))
    return _evaluate("lemma1", pairs)


def lemma3_check(trace):
    """Bregman analogue of lemma1_check, using the recorded divergences
    D_h(x_l, x_{l-1}) in place of squared step norms (in-memory traces only:
    the divergences are not part of the CSV schema)."""
    alpha = _alpha(trace)
    records = _update_records(trace)
    _require(records, ("gamma", "objective", "bregman_div"))
    f0 = trace.header.initial_objective
    lhs_sum = 0.0
    fail_sum = 0.0
    pairs = []
    for r in records:
        lhs_sum += r.gamma * r.bregman_div
        if r.success is False:
            fail_sum += (r.curvature - r.gamma) * r.bregman_div
        lhs = 0.5 * (alpha - 1.0) * lhs_sum
        rhs = f0 - r.objective + fail_sum
        pairs.append((lhs, rhs))
    return _evaluate("lemma3", pairs)


def theorem1_bound_check(trace, known_l, f_star_hint):
    """Sublinear rate bound for the proximal solver.

    min_{l<=k} residual_l <= sqrt(2 alpha^2 max(L0,L) (2 Delta + C) /
    ((alpha-1) k)), with the trajectory constant
    C = (max(L0,L) - L0) * max over failed iterations of step_l^2.
    """
    _check_hint(trace, f_star_hint)
    alpha = _alpha(trace)
    l0 = _l0(trace)
    cap = max(l0, known_l)
    delta = trace.header.initial_objective - f_star_hint
    const = (cap - l0) * _failure_peak(trace, lambda r: r.step_norm ** 2)
    best = math.inf
    pairs = []
    for r in _update_records(trace):
        best = min(best, r.residual)
        bound = math.sqrt(2.0 * alpha ** 2 * cap * (2.0 * delta + const)
                          / ((alpha - 1.0) * r.k))
        pairs.append((best, bound))
    return _evaluate("theorem1", pairs)


def theorem5_bound_check(trace, known_l, diameter, f_star_hint):
    """Sublinear rate bound on the Frank-Wolfe gap.

    min_{l<=k} G_l <= max(A_k, sqrt(alpha max(L0,L) D^2 A_k)) where
    A_k = (4 alpha L0 Delta + 2 C) / ((2 alpha - 1) L0 k) and
    C = (max(L0,L) - L0) * max over failed iterations of G_l.
    """
    _check_hint(trace, f_star_hint)
    alpha = _alpha(trace)
    l0 = _l0(trace)
    cap = max(l0, known_l)
    delta = trace.header.initial_objective - f_star_hint
    const = (cap - l0) * _failure_peak(trace, lambda r: r.residual)
    best = math.inf
    pairs = []
    for r in _update_records(trace):
        best = min(best, r.residual)
        base = (4.0 * alpha * l0 * delta + 2.0 * const) / ((2.0 * alpha - 1.0) * l0 * r.k)
        bound = max(base, math.sqrt(alpha * cap * diameter ** 2 * base))
        pairs.append((best, bound))
    return _evaluate("theorem5", pairs)


def theorem6_bound_check(trace, known_l, f_star_hint):
    """Sublinear rate bound on the Riemannian gradient norm.

    min_{l<=k} ||grad f(x_{l-1})|| <= sqrt(2 max(L0,L)
    (2 alpha^2 L0^2 Delta + C) / ((2 alpha - 1) L0^2 k)), with
    C = (max(L0,L) - L0) * max over failed iterations of ||grad||^2.
    """
    _check_hint(trace, f_star_hint)
    alpha = _alpha(trace)
    l0 = _l0(trace)
    cap = max(l0, known_l)
    delta = trace.header.initial_objective - f_star_hint
    const = (cap - l0) * _failure_peak(trace, lambda r: r.residual ** 2)
    best = math.inf
    pairs = []
    for r in _update_records(trace):
        best = min(best, r.residual)
        bound = math.sqrt(2.0 * cap * (2.0 * alpha ** 2 * l0 ** 2 * delta + const)
                          / ((2.0 * alpha - 1.0) * l0 ** 2 * r.k))
        pairs.append((best, bound))
    return _evaluate("theorem6", pairs)


def rate_fit(trace, k_start_fraction=0.5, scale="loglog"):
    """Least-squares slope of the min-so-far residual over a tail window.

    ``scale="loglog"`` fits log(min residual) against log(k) (power-law
    exponent); ``scale="semilog"`` fits against k itself (linear-rate
    detection).  A residual of exactly zero truncates the window there.
    """
    if not 0.0 < k_start_fraction < 1.0:
        raise ValueError("k_start_fraction must lie in (0, 1)")
    if scale not in ("loglog", "semilog"):
        raise ValueError("scale must be 'loglog' or 'semilog'")
    records = trace.records
    if len(records) < 50:
        raise ValueError("rate_fit needs a trace of at least 50 iterations")
    best = math.inf
    ks = []
    mins = []
    for r in records:
        best = min(best, r.residual)
        ks.append(r.k)
        mins.append(best)
    total = len(ks)
    start = max(1, math.ceil(k_start_fraction * total))
    ks = ks[start - 1:]
    mins = mins[start - 1:]
    kept_k = []
    kept_m = []
    for k, m in zip(ks, mins):
        if m == 0.0:
            break
        kept_k.append(k)
        kept_m.append(m)
    if len(kept_k) < 2:
        raise ValueError("rate_fit window too short after zero-residual truncation")
    x = np.log(np.asarray(kept_k, dtype=np.float64)) if scale == "loglog" \
        else np.asarray(kept_k, dtype=np.float64)
    y = np.log(np.asarray(kept_m, dtype=np.float64))
    slope, intercept = np.polyfit(x, y, 1)
    fitted = slope * x + intercept
    ss_res = float(np.sum((y - fitted) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r_squared = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return RateFit(window=(kept_k[0], kept_k[-1]), slope=float(slope),
                   intercept=float(intercept), r_squared=r_squared)


def failure_census(trace, known_l):
    """Observed failure count and its theoretical ceiling.

    Returns (count, bound) with bound = ceil(log_beta(max(L0, L) / L0)); the
    count must never exceed the bound for a correct solver.
    """
    beta = trace.header.beta
    if beta is None:
        raise ValueError("trace header lacks beta (not an adaptive solver?)")
    l0 = _l0(trace)
    count = sum(1 for r in trace.records if r.success is False)
    ratio = max(l0, known_l) / l0
    bound = max(0, math.ceil(math.log(ratio) / math.log(beta))) if ratio > 1.0 else 0
    return count, bound
