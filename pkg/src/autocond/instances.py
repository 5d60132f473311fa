"""Concrete problem zoo: every experiment and property test draws from here.

Synthetic generators take an explicit seed and record it (with dimensions and
parameters) in the returned bundle's provenance, which solver traces copy
into their headers.
"""

from itertools import combinations

import numpy as np

from .numerics import SparseMatrix, operator_norm, qr_thin, solve_cubic_scale
from .oracles import (
    BregmanKernel,
    CompositeProblem,
    LmoProblem,
    Manifold,
    RiemannianProblem,
)

__all__ = [
    "LogisticTrimmedL1",
    "SphereManifold",
    "StiefelManifold",
    "holder_toy",
    "logreg_smooth_constant",
    "nonconvex_quadratic_simplex",
    "quadratic_problem",
    "quartic_kernel",
    "quartic_kernel_step",
    "random_sphere_point",
    "random_stiefel_point",
    "rel_smooth_quartic",
    "simplex_lmo",
    "sphere_rayleigh",
    "stiefel_brockett",
    "stiefel_initial_curvature",
    "synthetic_logreg",
    "trimmed_l1_prox",
    "trimmed_l1_prox_bruteforce",
    "trimmed_l1_value",
]


# ---------------------------------------------------------------------------
# trimmed l1 norm: sum of the n - kappa smallest absolute entries
# ---------------------------------------------------------------------------

def trimmed_l1_value(x, kappa):
    """Sum of the n - kappa smallest |x_i| (zero when kappa >= n)."""
    x = np.asarray(x, dtype=np.float64)
    n = x.size
    if not 0 <= kappa <= n:
        raise ValueError("kappa out of range")
    if kappa >= n:
        return 0.0
    mags = np.sort(np.abs(x))
    return float(np.sum(mags[: n - kappa]))


def _soft(y, weight):
    return np.sign(y) * np.maximum(np.abs(y) - weight, 0.0)


def _exempt_order(y):
    # |y_i| descending, ties broken by smaller index first
    n = y.size
    return np.lexsort((np.arange(n), -np.abs(y)))


def trimmed_l1_prox(y, weight, kappa):
    """argmin_x { weight * T_kappa(x) + 0.5 * ||x - y||^2 }.

    The kappa entries largest in |y| are exempted unchanged, the rest are
    soft-thresholded by ``weight``.  The exempt set is re-verified against the
    output; on violation (never expected, the ranking argument is exact) the
    brute-force solver takes over for n <= 20.
    """
    y = np.asarray(y, dtype=np.float64)
    n = y.size
    if not 0 <= kappa <= n:
        raise ValueError("kappa out of range")
    if weight < 0:
        raise ValueError("weight must be nonnegative")
    if weight == 0.0:
        return y.copy()
    order = _exempt_order(y)
    exempt = order[:kappa]
    out = _soft(y, weight)
    out[exempt] = y[exempt]
    if 0 < kappa < n:
        kept = np.abs(out[exempt]).min()
        shrunk = np.abs(np.delete(out, exempt)).max()
        if kept < shrunk:
            if n <= 20:
                return trimmed_l1_prox_bruteforce(y, weight, kappa)
            raise ArithmeticError("trimmed_l1_prox: exempt set inconsistent")
    return out


def trimmed_l1_prox_bruteforce(y, weight, kappa):
    """Global minimizer by enumerating all C(n, kappa) exempt sets (n <= 20).

    Ties across sets resolve to the lexicographically smallest exempt set.
    """
    y = np.asarray(y, dtype=np.float64)
    n = y.size
    if n > 20:
        raise ValueError("brute force limited to n <= 20")
    if not 0 <= kappa <= n:
        raise ValueError("kappa out of range")
    # per-coordinate cost of soft-thresholding a non-exempt entry
    absy = np.abs(y)
    cost = np.where(absy > weight, weight * absy - 0.5 * weight ** 2, 0.5 * y ** 2)
    total = float(np.sum(cost))
    best_obj = None
    best_set = None
    for exempt in combinations(range(n), kappa):
        obj = total - float(np.sum(cost[list(exempt)]))
        if best_obj is None or obj < best_obj:
            best_obj = obj
            best_set = exempt
    out = _soft(y, weight)
    idx = list(best_set)
    out[idx] = y[idx]
    return out


# ---------------------------------------------------------------------------
# regularized logistic regression with trimmed l1 penalty
# ---------------------------------------------------------------------------

def _sigmoid(u):
    out = np.empty_like(u)
    pos = u >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-u[pos]))
    eu = np.exp(u[~pos])
    out[~pos] = eu / (1.0 + eu)
    return out


def logreg_smooth_constant(features, ridge_coefficient):
    """Closed-form curvature bound ||A||_op^2 / (4m) + ridge_coefficient.

    Pass the ridge weight that enters the smooth term; passing the nonsmooth
    weight instead reproduces the alternative printed convention (see
    LogisticTrimmedL1.smooth_constant).
    """
    m = features.n_rows if isinstance(features, SparseMatrix) else features.shape[0]
    if m == 0:
        raise ValueError("empty data")
    zero = features.nnz == 0 if isinstance(features, SparseMatrix) else not np.any(features)
    if zero:
        return float(ridge_coefficient)
    return operator_norm(features) ** 2 / (4.0 * m) + float(ridge_coefficient)


class LogisticTrimmedL1:
    """Binary logistic loss + ridge (smooth) and trimmed l1 penalty (nonsmooth).

    f(x) = (1/m) sum_i log(1 + exp(-b_i <a_i, x>)) + (lambda1/2) ||x||^2
    g(x) = lambda2 * T_kappa(x)
    """

    def __init__(self, features, labels, lambda1, lambda2, kappa, provenance=None):
        labels = np.asarray(labels, dtype=np.float64)
        if not isinstance(features, SparseMatrix):
            features = SparseMatrix.from_dense(np.asarray(features, dtype=np.float64))
        if labels.shape != (features.n_rows,):
            raise ValueError("labels length must match row count")
        if not np.all(np.isin(labels, (-1.0, 1.0))):
            raise ValueError("labels must be -1 or +1")
        if not 0 <= kappa <= features.n_cols:
            raise ValueError("kappa out of range")
        self.features = features
        self.labels = labels
        self.lambda1 = float(lambda1)
        self.lambda2 = float(lambda2)
        self.kappa = int(kappa)
        self.m = features.n_rows
        self.n = features.n_cols
        self.provenance = dict(provenance or {})

    def smooth_value(self, x):
        margins = self.labels * self.features.matvec(x)
        loss = np.logaddexp(0.0, -margins).mean()
        return float(loss + 0.5 * self.lambda1 * (x @ x))

    def smooth_gradient(self, x):
        margins = self.labels * self.features.matvec(x)
        coeff = -self.labels * _sigmoid(-margins) / self.m
        return self.features.rmatvec(coeff) + self.lambda1 * x

    def nonsmooth_value(self, x):
        return self.lambda2 * trimmed_l1_value(x, self.kappa)

    def prox(self, y, gamma):
        return trimmed_l1_prox(y, self.lambda2 / gamma, self.kappa)

    def smooth_constant(self, literal_nonsmooth_weight=False):
        """Upper curvature parameter; the ridge weight lambda1 enters f so it
        is the default, the ``literal_nonsmooth_weight`` switch substitutes
        lambda2 to reproduce the alternative printed convention."""
        ridge = self.lambda2 if literal_nonsmooth_weight else self.lambda1
        return logreg_smooth_constant(self.features, ridge)

    def composite(self):
        return CompositeProblem(
            smooth_value=self.smooth_value,
            smooth_gradient=self.smooth_gradient,
            nonsmooth_value=self.nonsmooth_value,
            prox=self.prox,
            known_L=self.smooth_constant(),
            provenance=self.provenance,
        )


def synthetic_logreg(m, n, seed, lambda1=None, lambda2=None, kappa=10, flip=0.05):
    """Gaussian design with labels from a sparse linear teacher.

    Defaults follow the 1e-2/m and 10/m regularization weights; the exemption
    count is clamped to the feature dimension.
    """
    kappa = min(kappa, n)
    rng = np.random.default_rng(seed)
    dense = rng.standard_normal((m, n))
    teacher = np.zeros(n)
    support = rng.choice(n, size=min(kappa if kappa > 0 else 1, n), replace=False)
    teacher[support] = rng.standard_normal(support.size)
    labels = np.where(dense @ teacher >= 0, 1.0, -1.0)
    flips = rng.random(m) < flip
    labels[flips] *= -1.0
    lambda1 = 1e-2 / m if lambda1 is None else lambda1
    lambda2 = 10.0 / m if lambda2 is None else lambda2
    provenance = {"instance": "logreg-trimmed", "seed": int(seed), "m": int(m),
                  "n": int(n), "lambda1": lambda1, "lambda2": lambda2,
                  "kappa": int(kappa)}
    return LogisticTrimmedL1(SparseMatrix.from_dense(dense), labels,
                             lambda1, lambda2, kappa, provenance)


# ---------------------------------------------------------------------------
# quadratics (with optional trimmed l1 penalty)
# ---------------------------------------------------------------------------

def _random_symmetric(n, eigenvalues, rng):
    basis = qr_thin(rng.standard_normal((n, n)))[0]
    mat = (basis * eigenvalues) @ basis.T
    return 0.5 * (mat + mat.T)


def quadratic_problem(n, seed, eig_min=0.05, eig_max=1.0, trimmed=None):
    """f(x) = 0.5 x'Qx + c'x with spectrum linspace(eig_min, eig_max).

    ``trimmed=(lambda2, kappa)`` attaches g = lambda2 * T_kappa, otherwise
    g == 0.  known_L is the largest eigenvalue; for the unpenalized convex
    case the exact minimum value is supplied as the lower bound hint.
    """
    rng = np.random.default_rng(seed)
    eigs = np.linspace(eig_min, eig_max, n)
    qmat = _random_symmetric(n, eigs, rng)
    c = rng.standard_normal(n)
    provenance = {"instance": "quadratic", "seed": int(seed), "n": int(n),
                  "eig_min": eig_min, "eig_max": eig_max}
    hint = None
    if eig_min > 0:
        hint = float(-0.5 * c @ np.linalg.solve(qmat, c))  # f >= f*, g >= 0
    if trimmed is None:
        nonsmooth = lambda x: 0.0
        prox = lambda y, gamma: y
    else:
        lambda2, kappa = trimmed
        provenance.update({"instance": "quadratic-trimmed",
                           "lambda2": lambda2, "kappa": int(kappa)})
        nonsmooth = lambda x: lambda2 * trimmed_l1_value(x, kappa)
        prox = lambda y, gamma: trimmed_l1_prox(y, lambda2 / gamma, kappa)
    return CompositeProblem(
        smooth_value=lambda x: float(0.5 * x @ (qmat @ x) + c @ x),
        smooth_gradient=lambda x: qmat @ x + c,
        nonsmooth_value=nonsmooth,
        prox=prox,
        known_L=float(eigs[-1]),
        lower_bound_hint=hint,
        provenance=provenance,
    )


def isotropic_quadratic(n, curvature):
    """f(x) = (curvature/2) ||x||^2 with g == 0; exact closed-form dynamics."""
    return CompositeProblem(
        smooth_value=lambda x: 0.5 * curvature * float(x @ x),
        smooth_gradient=lambda x: curvature * x,
        nonsmooth_value=lambda x: 0.0,
        prox=lambda y, gamma: y,
        known_L=float(curvature),
        lower_bound_hint=0.0,
        provenance={"instance": "isotropic-quadratic", "n": int(n),
                    "curvature": curvature},
    )


# ---------------------------------------------------------------------------
# weakly smooth toy: f(x) = ||x||^(1 + nu) / (1 + nu)
# ---------------------------------------------------------------------------

def holder_toy(nu, n, box=False):
    """Gradient is nu-Hoelder but not Lipschitz near the origin.

    grad f(x) = ||x||^(nu - 1) x away from 0 and 0 at the origin (the limit).
    ``box=True`` attaches the indicator of [-1, 1]^n, otherwise g == 0.
    """
    if not 0 < nu < 1:
        raise ValueError("nu must lie in (0, 1)")

    def value(x):
        r = np.linalg.norm(x)
        return float(r ** (1.0 + nu) / (1.0 + nu))

    def gradient(x):
        r = np.linalg.norm(x)
        if r == 0.0:
            return np.zeros_like(x)
        return r ** (nu - 1.0) * x

    if box:
        nonsmooth = lambda x: 0.0 if np.all(np.abs(x) <= 1.0 + 1e-12) else np.inf
        prox = lambda y, gamma: np.clip(y, -1.0, 1.0)
    else:
        nonsmooth = lambda x: 0.0
        prox = lambda y, gamma: y
    return CompositeProblem(
        smooth_value=value,
        smooth_gradient=gradient,
        nonsmooth_value=nonsmooth,
        prox=prox,
        lower_bound_hint=0.0,
        provenance={"instance": "holder-toy", "nu": nu, "n": int(n), "box": box},
    )


# ---------------------------------------------------------------------------
# relatively smooth quartic sensing problem and its Bregman kernel
# ---------------------------------------------------------------------------

def quartic_kernel_step(p, x, gamma):
    """argmin_y { <p, y> + gamma * D_h(y, x) } for h = 0.25||.||^4 + 0.5||.||^2.

    Optimality means grad h(y) = grad h(x) - p / gamma =: d.  Since grad h is
    radial, y = t * d with t * (||d||^2 t^2 + 1) = 1.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    x = np.asarray(x, dtype=np.float64)
    d = (float(x @ x) + 1.0) * x - np.asarray(p, dtype=np.float64) / gamma
    dd = float(d @ d)
    t = solve_cubic_scale(dd)
    y = t * d
    residual = np.linalg.norm((float(y @ y) + 1.0) * y - d)
    if residual > 1e-10 * (1.0 + np.sqrt(dd)):
        raise ArithmeticError("quartic kernel step: optimality residual too large")
    return y


def _quartic_divergence(x, y):
    # cancellation-free expansion of h(x) - h(y) - <grad h(y), x - y>
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    d = x - y
    p = float(d @ d)
    s = float(y @ d)
    u = float(y @ y)
    return 0.5 * p * (1.0 + u) + (s + 0.5 * p) ** 2


def quartic_kernel():
    """Kernel h = 0.25 ||x||^4 + 0.5 ||x||^2 (sigma = 1) with g == 0 steps."""
    return BregmanKernel(
        value=lambda x: 0.25 * float(x @ x) ** 2 + 0.5 * float(x @ x),
        gradient=lambda x: (float(x @ x) + 1.0) * np.asarray(x, dtype=np.float64),
        sigma=1.0,
        kernel_step=quartic_kernel_step,
        divergence=_quartic_divergence,
    )


def rel_smooth_quartic(n, n_sensors, seed):
    """f(x) = 0.25 sum_i (<a_i, x>^2 - b_i)^2 with realizable targets.

    Relative to the quartic kernel this f is L_h-smooth with
    L_h = max(3 sum ||a_i||^4, sum b_i ||a_i||^2); the minimum value is 0.
    """
    rng = np.random.default_rng(seed)
    sensors = rng.standard_normal((n_sensors, n)) / np.sqrt(n)
    signal = rng.standard_normal(n) / np.sqrt(n)
    targets = (sensors @ signal) ** 2
    row_sq = np.sum(sensors ** 2, axis=1)
    rel_bound = float(max(3.0 * np.sum(row_sq ** 2), np.sum(targets * row_sq)))

    def value(x):
        s = sensors @ x
        return 0.25 * float(np.sum((s * s - targets) ** 2))

    def gradient(x):
        s = sensors @ x
        return sensors.T @ ((s * s - targets) * s)

    return CompositeProblem(
        smooth_value=value,
        smooth_gradient=gradient,
        nonsmooth_value=lambda x: 0.0,
        prox=lambda y, gamma: y,
        known_L=rel_bound,
        lower_bound_hint=0.0,
        provenance={"instance": "rel-smooth-quartic", "seed": int(seed),
                    "n": int(n), "n_sensors": int(n_sensors)},
    )


# ---------------------------------------------------------------------------
# nonconvex quadratic over the unit simplex (conditional gradient instance)
# ---------------------------------------------------------------------------

def simplex_lmo(w):
    """Vertex e_i of the unit simplex with i the first index attaining min w."""
    w = np.asarray(w, dtype=np.float64)
    out = np.zeros_like(w)
    out[int(np.argmin(w))] = 1.0
    return out


def _simplex_indicator(x, tol=1e-9):
    x = np.asarray(x, dtype=np.float64)
    if abs(float(np.sum(x)) - 1.0) <= tol and float(x.min()) >= -tol:
        return 0.0
    return np.inf


def nonconvex_quadratic_simplex(n, seed, eig_max=10.0):
    """f(x) = 0.5 x'Qx + c'x with indefinite Q; g = unit-simplex indicator.

    The domain diameter is sqrt(2); known_L is the top eigenvalue of Q (the
    one-sided descent-lemma constant).
    """
    rng = np.random.default_rng(seed)
    eigs = np.linspace(-0.5 * eig_max, eig_max, n)
    qmat = _random_symmetric(n, eigs, rng)
    c = rng.standard_normal(n)
    return LmoProblem(
        smooth_value=lambda x: float(0.5 * x @ (qmat @ x) + c @ x),
        smooth_gradient=lambda x: qmat @ x + c,
        nonsmooth_value=_simplex_indicator,
        lmo=simplex_lmo,
        diameter=float(np.sqrt(2.0)),
        known_L=float(eigs[-1]),
        provenance={"instance": "simplex-quadratic", "seed": int(seed),
                    "n": int(n), "eig_max": eig_max},
    )


# ---------------------------------------------------------------------------
# manifolds and Riemannian instances
# ---------------------------------------------------------------------------

class StiefelManifold(Manifold):
    """St(n, r) with the embedded Euclidean metric and the QR retraction."""

    name = "stiefel"

    def __init__(self, n, r):
        if n < r:
            raise ValueError("need n >= r")
        self.n = int(n)
        self.r = int(r)

    def project_tangent(self, point, ambient):
        sym = point.T @ ambient
        sym = 0.5 * (sym + sym.T)
        return ambient - point @ sym

    def retract(self, point, tangent):
        if not np.any(tangent):
            return point  # retraction axiom: exact fixed point at 0
        return qr_thin(point + tangent)[0]


class SphereManifold(Manifold):
    """Unit sphere with the normalization retraction."""

    name = "sphere"

    def __init__(self, n):
        self.n = int(n)

    def project_tangent(self, point, ambient):
        return ambient - float(point @ ambient) * point

    def retract(self, point, tangent):
        if not np.any(tangent):
            return point
        moved = point + tangent
        return moved / np.linalg.norm(moved)


def random_stiefel_point(n, r, seed):
    rng = np.random.default_rng(seed)
    return qr_thin(rng.standard_normal((n, r)))[0]


def random_sphere_point(n, seed):
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n)
    return v / np.linalg.norm(v)


def stiefel_brockett(n, r, seed):
    """f(X) = tr(X' A X N) on St(n, r), A = Atilde + Atilde', N = diag(r..1)."""
    rng = np.random.default_rng(seed)
    raw = rng.standard_normal((n, n))
    sym = raw + raw.T
    weights = np.arange(r, 0, -1, dtype=np.float64)

    def value(x):
        return float(np.einsum("ij,ij,j->", x, sym @ x, weights))

    def euclidean_gradient(x):
        return 2.0 * (sym @ x) * weights

    return RiemannianProblem(
        manifold=StiefelManifold(n, r),
        value=value,
        euclidean_gradient=euclidean_gradient,
        provenance={"instance": "stiefel-brockett", "seed": int(seed),
                    "n": int(n), "r": int(r)},
    )


def sphere_rayleigh(n, seed=None, matrix=None):
    """f(x) = x'Ax on the unit sphere with the normalization retraction.

    The retraction-smoothness constant is bounded by 2(1 + sqrt(2)) ||A||_op,
    exposed as known_L.
    """
    if matrix is None:
        rng = np.random.default_rng(seed)
        raw = rng.standard_normal((n, n))
        matrix = raw + raw.T
    matrix = np.asarray(matrix, dtype=np.float64)
    bound = 2.0 * (1.0 + np.sqrt(2.0)) * operator_norm(matrix)
    return RiemannianProblem(
        manifold=SphereManifold(n),
        value=lambda x: float(x @ (matrix @ x)),
        euclidean_gradient=lambda x: 2.0 * (matrix @ x),
        known_L=bound,
        provenance={"instance": "sphere-rayleigh",
                    "seed": None if seed is None else int(seed), "n": int(n)},
    )


def _curvature_quotient(problem, x0, grad, direction):
    manifold = problem.manifold
    lin = manifold.inner(x0, grad, direction)
    return 2.0 * abs(problem.value(manifold.retract(x0, direction))
                     - problem.value(x0) - lin)


def stiefel_initial_curvature(problem, x0, seed):
    """Upper-curvature probe 2 |f(R_x0(Z)) - f(x0) - <grad f(x0), Z>| / ||Z||^2.

    Evaluated along two unit tangent directions and maximized: the projection
    of a seeded standard-normal draw and the steepest-descent direction (the
    one the first iteration actually takes, where a random direction
    under-reads the upper curvature by roughly the manifold dimension).
    Deterministic in (x0, seed).
    """
    manifold = problem.manifold
    grad = problem.gradient(x0)
    rng = np.random.default_rng(seed)
    best = None
    grad_sq = manifold.inner(x0, grad, grad)
    if grad_sq > 0.0:
        best = _curvature_quotient(problem, x0, grad, -grad / np.sqrt(grad_sq))
    for _ in range(2):
        direction = rng.standard_normal(np.shape(x0))
        z = manifold.project_tangent(x0, direction)
        norm_sq = manifold.inner(x0, z, z)
        if norm_sq > 0.0:
            probe = _curvature_quotient(problem, x0, grad, z / np.sqrt(norm_sq))
            return probe if best is None else max(best, probe)
    if best is not None:
        return best
    raise ArithmeticError("curvature probe direction projected to zero twice")
