"""Condensate trial-state diagnostics.

The quadratic trial state over a condensate of density rho(u) populates
momentum p with occupation f(rho, p); this module evaluates that function,
its momentum integrals (pair energy per unit volume and the particle count
Tr Gamma), the assembled N^(7/5) upper-bound energy, and a Berezin-Lieb
inequality verifier on finite tight frames -- the finite-dimensional content
of the coherent-state operator-Jensen argument.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .correlation import InequalityReport
from .errors import (
    ConsistencyError,
    DomainError,
    PreconditionError,
    SolverError,
)
from .foldy import foldy_j, simplified_energy_quadrature
from .numerics import integrate_1d
from .variational import RadialProfile, functional_energy, rescale

__all__ = [
    "CondensateSpec",
    "CoherentFrame",
    "XI_FUNCTIONS",
    "occupation_f",
    "pointwise_pair_energy",
    "condensate_from_minimizer",
    "trace_gamma",
    "upper_bound_energy",
    "berezin_lieb_check",
    "random_tight_frame",
    "berezin_lieb_ensemble",
]

FRAME_TOL = 1e-10  # tight-frame residual cap enforced by CoherentFrame


def occupation_f(rho: float, p):
    """Occupation of momentum p over a condensate of density rho.

    Equals ((p^4 + 8 pi rho) / (p^2 sqrt(p^4 + 16 pi rho)) - 1) / 2.  In
    the dimensionless variable q = p / (8 pi rho)^(1/4) this is
    ((q^4+1) / (q^2 sqrt(q^4+2)) - 1) / 2, and since (q^4+1)^2 minus
    q^4 (q^4+2) is exactly 1 it reduces to 1 / (2 D (N + D)) with
    N = q^4 + 1, D = q^2 sqrt(q^4 + 2) -- free of the large-q
    cancellation and stable across the full double range of rho.
    Decays like 16 pi^2 rho^2 / p^8 for large p and grows like
    sqrt(pi rho) / p^2 as p -> 0.
    """
    if rho < 0:
        raise DomainError("rho must be >= 0")
    p_arr = np.asarray(p, dtype=float)
    if np.any(p_arr <= 0) or not np.all(np.isfinite(p_arr)):
        raise DomainError("p must be finite and > 0")
    if rho == 0.0:
        out = np.zeros_like(p_arr)
        return float(out) if out.ndim == 0 else out
    q2 = p_arr * p_arr / math.sqrt(8.0 * math.pi * rho)
    q4 = q2 * q2
    with np.errstate(over="ignore"):  # huge q: denominator -> inf, f -> 0
        low = q2 * np.sqrt(q4 + 2.0)
        out = 0.5 / (low * (q4 + 1.0 + low))
    return float(out) if out.ndim == 0 else out


def pointwise_pair_energy(rho: float, tol: float = 1e-9) -> float:
    """(2 pi)^-3 4 pi int_0^inf p^2 [(p^2/2 + b) f - b sqrt(f (f+1))] dp
    with b = 4 pi rho / p^2 and f = occupation_f(rho, p).

    f minimizes the bracket over occupations pointwise, collapsing the
    integrand to the Bogolubov floor -((t+b) - sqrt(t^2+2tb))/2 at
    t = p^2/2 -- the cutoff-free local energy integral at unit cell
    scale, which is delegated to the shared quadrature and cross-checked
    against the closed form -J rho^(5/4).
    """
    if rho < 0:
        raise DomainError("rho must be >= 0")
    if tol <= 0:
        raise DomainError("tol must be > 0")
    if rho == 0.0:
        return 0.0
    value = simplified_energy_quadrature(rho, 1.0, tol)
    expected = -foldy_j().value * rho**1.25
    if abs(value - expected) > 10.0 * tol * abs(expected):
        raise ConsistencyError(
            f"pair energy {value!r} vs closed form {expected!r} "
            f"beyond 10x tol={tol:g}"
        )
    return value


@dataclass(frozen=True)
class CondensateSpec:
    """Condensate amplitude squared and its normalized radial profile."""

    lambda0_sq: float
    phi0: RadialProfile

    def __post_init__(self):
        if not (math.isfinite(self.lambda0_sq) and self.lambda0_sq >= 0.0):
            raise DomainError("lambda0_sq must be finite and >= 0")

    def density(self) -> np.ndarray:
        """rho(u) = 2 lambda0^2 phi0(u)^2 on the profile's grid."""
        return 2.0 * self.lambda0_sq * self.phi0.values**2


def condensate_from_minimizer(
    n_particles: int, phi_star: RadialProfile
) -> CondensateSpec:
    """lambda0^2 = N/2 with phi0(x) = N^(3/10) phi(N^(1/5) x).

    The in-tandem grid rescale keeps phi0 exactly normalized.
    """
    if n_particles < 1:
        raise PreconditionError("n_particles must be >= 1")
    return CondensateSpec(
        lambda0_sq=0.5 * float(n_particles),
        phi0=rescale(phi_star, float(n_particles) ** 0.2),
    )


def trace_gamma(spec: CondensateSpec, tol: float = 1e-8) -> float:
    """(2 pi)^-3 iint f(rho(u), |p|) du dp over R^3 x R^3.

    Iterated radially: each grid node u carries the momentum integral
    4 pi int p^2 f(rho(u), p) dp, evaluated in the rescaled variable
    q = p / (8 pi rho)^(1/4) so the integrand keeps one fixed O(1) shape
    across the many orders of magnitude rho(u) spans along the profile
    tail.  The inner integral scales exactly like rho^(3/4), so the total
    is proportional to int rho(u)^(3/4) du.  Summation runs in fixed grid
    order for reproducibility.
    """
    if tol <= 0:
        raise DomainError("tol must be > 0")
    density = spec.density()
    weights = spec.phi0.grid.weights
    total = 0.0
    for rho_u, w_u in zip(density, weights):
        if rho_u <= 0.0:
            continue
        p_scale = (8.0 * math.pi * rho_u) ** 0.25

        def g(q: float, rho=rho_u, s=p_scale) -> float:
            p = s * q
            return p * p * occupation_f(rho, p)

        head = integrate_1d(g, 0.0, 1.0, tol=tol / 2)
        tail = integrate_1d(g, 1.0, math.inf, tol=tol / 2)
        total += w_u * p_scale * (head.value + tail.value)
    return total / (2.0 * math.pi**2)


def upper_bound_energy(n_particles: int, phi_star: RadialProfile) -> float:
    """lambda0^2 int |grad phi0|^2 - J (2 lambda0^2)^(5/4) int phi0^(5/2)
    with lambda0^2 = N/2 and phi0 the N^(1/5) rescale of phi_star.

    Because the grid rescales in tandem with the profile, this equals
    N^(7/5) * functional_energy(phi_star) identically; both routes are
    computed and compared.
    """
    if n_particles < 1:
        raise PreconditionError("n_particles must be >= 1")
    energy, _, _ = functional_energy(phi_star)
    spec = condensate_from_minimizer(n_particles, phi_star)
    _, kinetic0, potential0 = functional_energy(spec.phi0)
    two_lambda_sq = 2.0 * spec.lambda0_sq
    value = spec.lambda0_sq * (2.0 * kinetic0) - two_lambda_sq**1.25 * potential0
    expected = float(n_particles) ** 1.4 * energy
    if abs(value - expected) > 1e-8 * abs(expected):
        raise ConsistencyError(
            f"assembled bound {value!r} differs from scaled functional "
            f"{expected!r} beyond 1e-8 relative"
        )
    return value


@dataclass(frozen=True, eq=False)
class CoherentFrame:
    """Finite tight frame: m >= d unit vectors theta_k with weights
    w_k > 0 satisfying sum_k w_k theta_k theta_k^T = identity."""

    dimension: int
    vectors: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        if self.dimension < 2:
            raise DomainError("dimension must be >= 2")
        vectors = np.atleast_2d(np.asarray(self.vectors, dtype=float))
        weights = np.asarray(self.weights, dtype=float).ravel()
        if vectors.ndim != 2 or vectors.shape[1] != self.dimension:
            raise DomainError("vectors must be rows of length `dimension`")
        if vectors.shape[0] < self.dimension:
            raise DomainError("need at least `dimension` vectors")
        if weights.shape[0] != vectors.shape[0]:
            raise DomainError("one weight per vector")
        if not (np.all(np.isfinite(vectors)) and np.all(np.isfinite(weights))):
            raise DomainError("vectors and weights must be finite")
        if np.any(weights <= 0.0):
            raise DomainError("weights must be > 0")
        norms = np.linalg.norm(vectors, axis=1)
        if float(np.max(np.abs(norms - 1.0))) > 1e-10:
            raise DomainError("frame vectors must have unit length")
        object.__setattr__(self, "vectors", vectors)
        object.__setattr__(self, "weights", weights)
        residual = self.frame_residual()
        if residual > FRAME_TOL:
            raise DomainError(
                f"tight-frame residual {residual:.3e} exceeds {FRAME_TOL:g}"
            )

    @property
    def count(self) -> int:
        return self.vectors.shape[0]

    def frame_operator(self) -> np.ndarray:
        return (self.vectors * self.weights[:, None]).T @ self.vectors

    def frame_residual(self) -> float:
        gap = self.frame_operator() - np.eye(self.dimension)
        return float(np.max(np.abs(np.linalg.eigvalsh(gap))))


def random_tight_frame(
    rng: np.random.Generator, dimension: int, count: int
) -> CoherentFrame:
    """Sample `count` unit vectors and symmetrize by the inverse square
    root of their frame operator: rows S^(-1/2) theta_k with weights
    |S^(-1/2) theta_k|^2 form a tight frame by construction."""
    if dimension < 2:
        raise DomainError("dimension must be >= 2")
    if count < dimension:
        raise DomainError("count must be >= dimension")
    for _ in range(64):
        draws = rng.standard_normal((count, dimension))
        norms = np.linalg.norm(draws, axis=1)
        if np.any(norms < 1e-8):
            continue
        units = draws / norms[:, None]
        frame_op = units.T @ units
        eigenvalues, basis = np.linalg.eigh(frame_op)
        if eigenvalues[0] < 1e-8 * eigenvalues[-1]:
            continue  # nearly rank-deficient draw
        inv_root = (basis / np.sqrt(eigenvalues)) @ basis.T
        rows = units @ inv_root
        weights = np.einsum("kd,kd->k", rows, rows)
        vectors = rows / np.sqrt(weights)[:, None]
        return CoherentFrame(dimension=dimension, vectors=vectors, weights=weights)
    raise SolverError("failed to draw a well-conditioned frame")


# Operator-concave on [0, inf) with xi(0) >= 0; fixed whitelist because
# operator concavity of arbitrary user functions cannot be checked
# numerically.
XI_FUNCTIONS = {
    "sqrt": np.sqrt,
    "sqrt-pairing": lambda t: np.sqrt(t * (t + 1.0)),
    "identity": lambda t: np.asarray(t, dtype=float),
    "log1p": np.log1p,
}


def berezin_lieb_check(
    frame: CoherentFrame, f_values, y_matrix, xi: str
) -> InequalityReport:
    """Tr(Y xi(Gamma)) >= sum_k w_k xi(f_k) <theta_k, Y theta_k> for
    Gamma = sum_k w_k f_k theta_k theta_k^T, PSD Y, and whitelisted
    concave xi.  Equality holds when xi is the identity or when all f_k
    coincide."""
    if xi not in XI_FUNCTIONS:
        raise PreconditionError(f"xi must be one of {sorted(XI_FUNCTIONS)}")
    f_arr = np.asarray(f_values, dtype=float).ravel()
    if f_arr.shape[0] != frame.count:
        raise PreconditionError("f_values length must match the frame")
    if not np.all(np.isfinite(f_arr)) or np.any(f_arr < 0.0):
        raise PreconditionError("f_values must be finite and >= 0")
    y_arr = np.asarray(y_matrix, dtype=float)
    if y_arr.shape != (frame.dimension, frame.dimension):
        raise PreconditionError("Y must be dimension x dimension")
    if float(np.max(np.abs(y_arr - y_arr.T))) > 1e-12:
        raise PreconditionError("Y must be symmetric")
    y_low = float(np.linalg.eigvalsh(y_arr)[0])
    if y_low < -1e-10:
        raise PreconditionError(f"Y has negative eigenvalue {y_low:.3e}")

    func = XI_FUNCTIONS[xi]
    gamma = (frame.vectors * (frame.weights * f_arr)[:, None]).T @ frame.vectors
    gamma = 0.5 * (gamma + gamma.T)
    occ, basis = np.linalg.eigh(gamma)
    occ = np.clip(occ, 0.0, None)  # PSD up to roundoff; xi needs t >= 0
    xi_gamma = (basis * func(occ)) @ basis.T
    lhs = float(np.sum(y_arr * xi_gamma))
    quad_forms = np.einsum("kd,de,ke->k", frame.vectors, y_arr, frame.vectors)
    rhs = float(np.dot(frame.weights * func(f_arr), quad_forms))
    return InequalityReport(lhs=lhs, rhs=rhs)


def berezin_lieb_ensemble(
    xi: str,
    trials: int,
    master_seed: int,
    dimension: int = 8,
    count: int = 24,
):
    """Random (frame, PSD Y, f) instances for one xi.

    Returns (n_violations, rows); each row is
    (seed, lhs, rhs, slack) for the trial drawn from that seed.
    """
    if xi not in XI_FUNCTIONS:
        raise PreconditionError(f"xi must be one of {sorted(XI_FUNCTIONS)}")
    if trials < 1:
        raise PreconditionError("trials must be >= 1")
    seeds = np.random.SeedSequence(master_seed).generate_state(
        trials, dtype=np.uint64
    )
    rows = []
    violations = 0
    for seed in seeds:
        rng = np.random.default_rng(int(seed))
        frame = random_tight_frame(rng, dimension, count)
        raw = rng.standard_normal((dimension, dimension))
        y_psd = raw @ raw.T
        f_draw = rng.uniform(0.0, 5.0, size=count)
        report = berezin_lieb_check(frame, f_draw, y_psd, xi)
        if not report.holds:
            violations += 1
        rows.append((int(seed), report.lhs, report.rhs, report.slack))
    return violations, rows
