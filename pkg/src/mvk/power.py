"""Subspace kernels, the directional power-function and a-priori bounds.

With X a set of centers, the reproducing kernel of the span of kernel
translates is

    k_N(x, y) = k(x, X) k(X, X)^+ k(X, y)

and the squared directional power-function at x in direction alpha is
alpha^T (k(x, x) - k_N(x, x)) alpha.  The deficiency matrix
D(x) = k(x, x) - k_N(x, x) also drives the pointwise error bounds in the
2-, infinity- and 1-norm.
"""

from dataclasses import dataclass, field

import numpy as np

from .kernels import PointSet, ScalarKernel, SeparableKernel
from .linalg import PSD_TOL, RANK_TOL, pinv_sym, symmetrize


class PowerBreakdownError(RuntimeError):
    """Power-function value negative beyond the PSD tolerance."""


@dataclass(frozen=True)
class PowerEvaluator:
    """Precomputed pseudo-inverse of the Gramian for power queries."""

    kernel: SeparableKernel
    centers: PointSet
    gram_pinv: np.ndarray
    rank_tol: float = field(default=RANK_TOL)

    @classmethod
    def build(cls, kernel, centers, rank_tol=RANK_TOL):
        if centers.n == 0:
            return cls(kernel, centers, np.zeros((0, 0)), rank_tol)
        centers.assert_distinct()
        G = kernel.gramian(centers)
        return cls(kernel, centers, pinv_sym(G, rank_tol), rank_tol)

    def subspace_kernel(self, x, y):
        """k_N(x, y) = k(x, X) k(X, X)^+ k(X, y)."""
        if self.centers.n == 0:
            return np.zeros((self.kernel.m, self.kernel.m))
        cx = self.kernel.cross(x, self.centers)
        cy = self.kernel.cross(y, self.centers)
        return cx @ self.gram_pinv @ cy.T

    def deficiency(self, x):
        """D(x) = k(x, x) - k_N(x, x), explicitly symmetrized."""
        return symmetrize(self.kernel(x, x) - self.subspace_kernel(x, x))

    def deficiency_many(self, Xq):
        """Deficiency matrices for a (q, d) batch, returns (q, m, m)."""
        Xq = np.atleast_2d(np.asarray(Xq, dtype=np.float64))
        kxx = self.kernel.diag_value(Xq)
        if self.centers.n == 0:
            return kxx
        C = self.kernel.cross_many(Xq, self.centers)
        kn = np.einsum("qan,qbn->qab", C @ self.gram_pinv, C)
        D = kxx - kn
        return 0.5 * (D + np.swapaxes(D, 1, 2))

    def power_sq(self, x, alpha, psd_tol=PSD_TOL):
        """Squared power-function alpha^T D(x) alpha, clamped to [0, inf)."""
        alpha = np.asarray(alpha, dtype=np.float64)
        if np.linalg.norm(alpha) == 0:
            raise ValueError("direction must be nonzero")
        val = float(alpha @ self.deficiency(x) @ alpha)
        scale = max(1.0, float(alpha @ self.kernel(x, x) @ alpha))
        if val < -psd_tol * scale:
            raise PowerBreakdownError(
                f"power-function value {val:.3e} below -psd_tol * scale"
            )
        return max(val, 0.0)

    def error_bounds(self, x, f_norm, residual_norm):
        """Pointwise interpolation error bounds in three norms.

        With D(x) the deficiency matrix the bound factors are
        ||D||_2^(1/2), max_i |D_ii|^(1/2) and sqrt(m) ||D||_2^(1/2); each
        is reported multiplied with the residual native norm
        (``with_residual``) and with the full native norm
        (``with_full_norm``).
        """
        if not (f_norm >= residual_norm >= 0):
            raise ValueError("need f_norm >= residual_norm >= 0")
        D = self.deficiency(x)
        spec = np.sqrt(max(float(np.linalg.norm(D, 2)), 0.0))
        diag = np.sqrt(max(float(np.max(np.abs(np.diag(D)))), 0.0))
        m = self.kernel.m
        factors = {"two_norm": spec, "inf_norm": diag, "one_norm": np.sqrt(m) * spec}
        return {
            "with_residual": {k: v * residual_norm for k, v in factors.items()},
            "with_full_norm": {k: v * f_norm for k, v in factors.items()},
        }


def scalar_power_sq(ks: ScalarKernel, X: PointSet, x):
    """Squared power-function of a scalar kernel (the m = 1 case)."""
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    kxx = ks(x, x)
    if X.n == 0:
        return max(kxx, 0.0)
    row = ks.cross(x[None, :], X.points)[0]
    K = ks.cross(X.points, X.points)
    val = kxx - float(row @ pinv_sym(K) @ row)
    return max(val, 0.0)


def power_additivity_check(kernel: SeparableKernel, X: PointSet, samples,
                           rank_tol=RANK_TOL):
    """Compare per-term order-1 power values against the full power.

    ``samples`` is a list of (x, alpha) pairs.  For each sample the sum of
    the per-term squared powers (via the order-1 factorization
    P_i^2 = Phat_i^2 * alpha^T Q_i alpha) is reported next to the full
    squared power; the gap is nonnegative and vanishes for uncoupled
    decompositions.
    """
    if kernel.p < 2:
        raise ValueError("additivity check needs a decomposition with >= 2 terms")
    pe = PowerEvaluator.build(kernel, X, rank_tol)
    # per-term scalar Gramian pseudo-inverses, shared across samples
    scalar_pinv = [
        pinv_sym(ks.cross(X.points, X.points)) if X.n else None
        for ks, _ in kernel.terms
    ]

    def scalar_part(i, x):
        ks = kernel.terms[i][0]
        x = np.atleast_1d(np.asarray(x, dtype=np.float64))
        if X.n == 0:
            return max(ks(x, x), 0.0)
        row = ks.cross(x[None, :], X.points)[0]
        return max(ks(x, x) - float(row @ scalar_pinv[i] @ row), 0.0)

    reports = []
    for x, alpha in samples:
        alpha = np.asarray(alpha, dtype=np.float64)
        parts = [
            scalar_part(i, x) * float(alpha @ Q @ alpha)
            for i, (_, Q) in enumerate(kernel.terms)
        ]
        whole = pe.power_sq(x, alpha)
        total = float(sum(parts))
        reports.append(
            {"sum_of_parts": total, "whole": whole, "gap": whole - total}
        )
    return reports
