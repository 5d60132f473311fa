"""Problem oracle bundles consumed by the solvers.

All bundles are immutable after construction and hold only pure callables,
so one instance can back many concurrent solver runs.  Infinite nonsmooth
values are encoded with ``math.inf`` (domain membership is data, never an
exception).
"""

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "CompositeProblem",
    "BregmanKernel",
    "LmoProblem",
    "Manifold",
    "RiemannianProblem",
    "GradientCheckReport",
    "bregman_divergence",
    "bregman_divergence_definition",
    "euclidean_kernel",
    "gradient_check",
]


@dataclass(frozen=True)
class CompositeProblem:
    """Oracle bundle for minimizing F = f + g.

    ``prox(y, gamma)`` returns one element of argmin_x { g(x) +
    (gamma/2) * ||x - y||^2 }; selections are deterministic per instance.
    ``known_L`` is an upper curvature parameter when one is available, used
    only by diagnostics and experiment configuration, never by the solvers
    themselves.
    """

    smooth_value: callable
    smooth_gradient: callable
    nonsmooth_value: callable
    prox: callable
    known_L: float | None = None
    lower_bound_hint: float | None = None
    provenance: dict = field(default_factory=dict)

    def objective(self, x):
        return float(self.smooth_value(x) + self.nonsmooth_value(x))


@dataclass(frozen=True)
class BregmanKernel:
    """Strictly convex kernel h generating a Bregman divergence.

    ``kernel_step(p, x, gamma)`` solves
    argmin_y { <p, y> + gamma * D_h(y, x) + g(y) } for the g this kernel was
    built against.  ``divergence`` evaluates D_h(x, y) in a cancellation-free
    form; it must agree with the defining formula
    h(x) - h(y) - <grad h(y), x - y> wherever that is well conditioned.
    ``in_interior`` tests membership of int dom h (default: everywhere).
    """

    value: callable
    gradient: callable
    sigma: float
    kernel_step: callable
    divergence: callable
    in_interior: callable = None

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError("kernel strong-convexity constant must be positive")


def bregman_divergence(kernel, x, y):
    """D_h(x, y) for the given kernel; +inf when y is outside int dom h."""
    if kernel.in_interior is not None and not kernel.in_interior(y):
        return math.inf
    return float(kernel.divergence(x, y))


def bregman_divergence_definition(kernel, x, y):
    """D_h(x, y) straight from the defining formula (reference path)."""
    if kernel.in_interior is not None and not kernel.in_interior(y):
        return math.inf
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    return float(kernel.value(x) - kernel.value(y) - kernel.gradient(y) @ (x - y))


def euclidean_kernel(prox=None):
    """Kernel h = 0.5 ||x||^2 (sigma = 1).

    With this kernel the Bregman step reduces to the standard proximal
    gradient step, so ``kernel_step`` delegates to the supplied prox (identity
    when None, i.e. g == 0) using exactly the same arithmetic the proximal
    solver uses.
    """
    if prox is None:
        prox = lambda y, gamma: y

    def step(p, x, gamma):
        return prox(x - p / gamma, gamma)

    def divergence(x, y):
        # same float path as the proximal solver's squared step norm, so the
        # Bregman curvature estimate reproduces the proximal one bitwise
        d = np.asarray(x) - np.asarray(y)
        return 0.5 * float(d @ d)

    return BregmanKernel(
        value=lambda x: 0.5 * float(x @ x),
        gradient=lambda x: np.asarray(x, dtype=np.float64),
        sigma=1.0,
        kernel_step=step,
        divergence=divergence,
    )


@dataclass(frozen=True)
class LmoProblem:
    """Composite problem whose nonsmooth part admits a linear minimization
    oracle: lmo(w) returns argmin_v { <w, v> + g(v) }.  ``diameter`` bounds
    the domain of g."""

    smooth_value: callable
    smooth_gradient: callable
    nonsmooth_value: callable
    lmo: callable
    diameter: float
    known_L: float | None = None
    provenance: dict = field(default_factory=dict)

    def objective(self, x):
        return float(self.smooth_value(x) + self.nonsmooth_value(x))


class Manifold:
    """Riemannian manifold interface: tangent projection, retraction, metric.

    Concrete manifolds override the four geometry methods.  The Riemannian
    gradient of an ambient gradient is its tangent projection under the
    induced metric, which is what both concrete manifolds here use.
    """

    name = "manifold"

    def project_tangent(self, point, ambient):
        raise NotImplementedError

    def retract(self, point, tangent):
        raise NotImplementedError

    def inner(self, point, a, b):
        return float(np.sum(np.asarray(a) * np.asarray(b)))

    def norm(self, point, tangent):
        return float(np.sqrt(max(self.inner(point, tangent, tangent), 0.0)))

    def riemannian_gradient(self, point, euclidean_gradient):
        return self.project_tangent(point, euclidean_gradient)


@dataclass(frozen=True)
class RiemannianProblem:
    """Smooth objective on a manifold, given by value and ambient gradient."""

    manifold: Manifold
    value: callable
    euclidean_gradient: callable
    known_L: float | None = None
    provenance: dict = field(default_factory=dict)

    def gradient(self, point):
        return self.manifold.riemannian_gradient(point, self.euclidean_gradient(point))


@dataclass(frozen=True)
class GradientCheckReport:
    max_rel_error: float
    tolerance: float
    per_point: tuple

    @property
    def passed(self):
        return self.max_rel_error <= self.tolerance


def gradient_check(value, gradient, points, n_directions=10, step=1e-6,
                   tolerance=1e-4, seed=0):
    """Compare analytic directional derivatives against central differences.

    For each point, ``n_directions`` random unit directions are drawn from a
    seeded generator and (value(x + step*d) - value(x - step*d)) / (2*step)
    is compared with <gradient(x), d>.  Relative error uses max(1, |analytic|)
    as the denominator.  Failures are reported, never raised.
    """
    rng = np.random.default_rng(seed)
    per_point = []
    worst = 0.0
    for x in points:
        x = np.asarray(x, dtype=np.float64)
        grad = np.asarray(gradient(x), dtype=np.float64)
        point_worst = 0.0
        for _ in range(n_directions):
            d = rng.standard_normal(x.shape)
            d /= np.linalg.norm(d)
            fd = (value(x + step * d) - value(x - step * d)) / (2.0 * step)
            an = float(np.sum(grad * d))
            rel = abs(fd - an) / max(1.0, abs(an))
            point_worst = max(point_worst, rel)
        per_point.append(point_worst)
        worst = max(worst, point_worst)
    return GradientCheckReport(max_rel_error=worst, tolerance=tolerance,
                               per_point=tuple(per_point))
