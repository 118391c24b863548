"""Scalar kernels, separable matrix-valued kernels and block Gramians.

A separable matrix-valued kernel is a finite sum

    k(x, y) = sum_i k_i(x, y) * Q_i

with scalar kernels ``k_i`` and symmetric m x m coefficient matrices
``Q_i``.  Its block Gramian on a point set X has the Kronecker structure
``sum_i k_i(X, X) (x) Q_i`` which is how it is assembled here.
"""

from dataclasses import dataclass, field

import numpy as np

from . import backends
from .linalg import PSD_TOL, check_symmetric, is_psd, kron, symmetrize

# Minimal pairwise distance for interpolation centers, in the input scale.
DUP_TOL = 1e-12


class DuplicateCentersError(ValueError):
    """Point set used as centers contains (near-)duplicate points."""


@dataclass(frozen=True)
class ScalarKernel:
    """A symmetric positive (semi-)definite scalar kernel.

    ``gaussian``:   k(x, y) = exp(-shape * ||x - y||^2), shape > 0
    ``polynomial``: k(x, y) = (x . y)^degree, degree >= 1
    """

    kind: str
    shape: float | None = None
    degree: int | None = None

    def __post_init__(self):
        if self.kind == "gaussian":
            if self.shape is None or self.shape <= 0:
                raise ValueError("gaussian kernel needs shape > 0")
        elif self.kind == "polynomial":
            if self.degree is None or self.degree < 1:
                raise ValueError("polynomial kernel needs degree >= 1")
        else:
            raise ValueError(f"unknown scalar kernel kind {self.kind!r}")

    @classmethod
    def gaussian(cls, shape):
        return cls("gaussian", shape=float(shape))

    @classmethod
    def polynomial(cls, degree):
        return cls("polynomial", degree=int(degree))

    @property
    def strictly_pd(self) -> bool:
        # Gaussians are s.p.d. on any point set; polynomial kernels are not.
        return self.kind == "gaussian"

    def cross(self, X, Y):
        """Kernel matrix between point arrays X (n, d) and Y (q, d)."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        Y = np.atleast_2d(np.asarray(Y, dtype=np.float64))
        if self.kind == "gaussian":
            return backends.gaussian_cross(X, Y, self.shape)
        return backends.polynomial_cross(X, Y, self.degree)

    def __call__(self, x, y):
        x = np.atleast_1d(np.asarray(x, dtype=np.float64))
        y = np.atleast_1d(np.asarray(y, dtype=np.float64))
        return float(self.cross(x[None, :], y[None, :])[0, 0])

    def to_dict(self):
        d = {"kind": self.kind}
        if self.kind == "gaussian":
            d["shape"] = self.shape
        else:
            d["degree"] = self.degree
        return d

    @classmethod
    def from_dict(cls, d):
        if d["kind"] == "gaussian":
            return cls.gaussian(d["shape"])
        return cls.polynomial(d["degree"])


class PointSet:
    """Ordered list of n points in R^d."""

    def __init__(self, points, d=None):
        pts = np.asarray(points, dtype=np.float64)
        if pts.size == 0:
            pts = pts.reshape(0, d if d is not None else 1)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2:
            raise ValueError("points must be an (n, d) array")
        if not np.all(np.isfinite(pts)):
            raise ValueError("points contain non-finite values")
        self.points = pts

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def min_separation(self) -> float:
        if self.n < 2:
            return np.inf
        diff = self.points[:, None, :] - self.points[None, :, :]
        dist = np.sqrt(np.sum(diff * diff, axis=-1))
        np.fill_diagonal(dist, np.inf)
        return float(dist.min())

    def assert_distinct(self, dup_tol=DUP_TOL):
        if self.min_separation() <= dup_tol:
            raise DuplicateCentersError(
                f"points are not pairwise distinct (min separation "
                f"{self.min_separation():.3e} <= {dup_tol:.1e})"
            )

    def prefix(self, i) -> "PointSet":
        return PointSet(self.points[:i], d=self.d)

    def __len__(self):
        return self.n


def _as_point(x, d):
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if x.shape != (d,):
        raise ValueError(f"expected a point of dimension {d}, got shape {x.shape}")
    return x


@dataclass(frozen=True)
class SeparableKernel:
    """Matrix-valued kernel k(x, y) = sum_i k_i(x, y) Q_i."""

    m: int
    terms: tuple
    strictly_pd: bool = field(default=False)

    @classmethod
    def create(cls, terms, psd_tol=PSD_TOL, unchecked=False):
        """Build a kernel from (ScalarKernel, coefficient matrix) pairs.

        Coefficients are symmetrized and, unless ``unchecked``, validated
        positive semi-definite.  The kernel is flagged ``strictly_pd`` when
        every scalar kernel is s.p.d., all coefficients are PSD and their
        sum is positive definite.
        """
        norm_terms = []
        m = None
        for ks, Q in terms:
            Q = np.asarray(Q, dtype=np.float64)
            if not check_symmetric(Q):
                raise ValueError("coefficient matrix is not symmetric")
            Q = symmetrize(Q)
            if m is None:
                m = Q.shape[0]
            elif Q.shape[0] != m:
                raise ValueError("coefficient matrices have mismatched sizes")
            if not unchecked:
                ok, lam = is_psd(Q, psd_tol)
                if not ok:
                    raise ValueError(
                        f"coefficient matrix is not PSD (lambda_min = {lam:.3e}); "
                        "use unchecked=True for indefinite coefficients"
                    )
            norm_terms.append((ks, Q))
        if not norm_terms:
            raise ValueError("kernel needs at least one term")
        qsum = sum(Q for _, Q in norm_terms)
        all_psd = all(is_psd(Q, psd_tol)[0] for _, Q in norm_terms)
        _, lam_min = is_psd(qsum, psd_tol)
        spd = (
            all(ks.strictly_pd for ks, _ in norm_terms)
            and all_psd
            and lam_min > psd_tol * max(1.0, float(np.linalg.norm(qsum, 2)))
        )
        return cls(m=m, terms=tuple(norm_terms), strictly_pd=spd)

    @property
    def p(self) -> int:
        return len(self.terms)

    def __call__(self, x, y):
        """Evaluate the m x m kernel value at a pair of points."""
        x = np.atleast_1d(np.asarray(x, dtype=np.float64))
        y = _as_point(y, x.shape[0])
        out = np.zeros((self.m, self.m))
        for ks, Q in self.terms:
            out += ks(x, y) * Q
        return out

    def diag_value(self, x):
        """k(x, x); for x an (q, d) array returns (q, m, m)."""
        x = np.asarray(x, dtype=np.float64)
        if x.ndim <= 1:
            return self(x, x)
        out = np.zeros((x.shape[0], self.m, self.m))
        for ks, Q in self.terms:
            kxx = np.array([ks(p, p) for p in x])
            out += kxx[:, None, None] * Q
        return out

    def gramian(self, X: PointSet, check_distinct=True):
        """Block Gramian k(X, X), assembled as sum_i kron(K_i, Q_i)."""
        if check_distinct:
            X.assert_distinct()
        n = X.n
        G = np.zeros((n * self.m, n * self.m))
        for ks, Q in self.terms:
            G += kron(ks.cross(X.points, X.points), Q)
        return symmetrize(G)

    def cross(self, x, X: PointSet):
        """Row of blocks [k(x, x_1) ... k(x, x_n)], shape (m, m n)."""
        x = _as_point(x, X.d) if X.n else np.atleast_1d(np.asarray(x, float))
        return self.cross_many(x[None, :], X)[0]

    def cross_many(self, Xq, X: PointSet):
        """Cross blocks for a batch of query points, shape (q, m, m n)."""
        Xq = np.atleast_2d(np.asarray(Xq, dtype=np.float64))
        q = Xq.shape[0]
        out = np.zeros((q, self.m, X.n * self.m))
        for ks, Q in self.terms:
            rows = ks.cross(Xq, X.points) if X.n else np.zeros((q, 0))
            # kron of a 1 x n row with Q, batched over queries
            out += np.einsum("qn,ab->qanb", rows, Q).reshape(q, self.m, X.n * self.m)
        return out

    def hadamard_power(self, n: int) -> "MatrixPowerKernel":
        """Pointwise matrix power k(x, y)^n as an evaluable kernel."""
        if n < 0:
            raise ValueError("power must be nonnegative")
        return MatrixPowerKernel(base=self, power=int(n))

    def coefficients(self):
        return [Q for _, Q in self.terms]

    def scalar_kernels(self):
        return [ks for ks, _ in self.terms]

    def to_dict(self):
        return {
            "m": self.m,
            "terms": [
                {**ks.to_dict(), "coeff": Q.flatten().tolist()}
                for ks, Q in self.terms
            ],
        }

    @classmethod
    def from_dict(cls, d, unchecked=False):
        m = int(d["m"])
        terms = []
        for t in d["terms"]:
            ks = ScalarKernel.from_dict(t)
            Q = np.asarray(t["coeff"], dtype=np.float64).reshape(m, m)
            terms.append((ks, Q))
        return cls.create(terms, unchecked=unchecked)


@dataclass(frozen=True)
class MatrixPowerKernel:
    """Pointwise matrix power of a separable kernel's values."""

    base: SeparableKernel
    power: int

    @property
    def m(self) -> int:
        return self.base.m

    def __call__(self, x, y):
        return np.linalg.matrix_power(self.base(x, y), self.power)

    def gramian(self, X: PointSet, check_distinct=True):
        if check_distinct:
            X.assert_distinct()
        n, m = X.n, self.m
        G = np.zeros((n * m, n * m))
        for i in range(n):
            for j in range(i, n):
                B = self(X.points[i], X.points[j])
                G[i * m : (i + 1) * m, j * m : (j + 1) * m] = B
                G[j * m : (j + 1) * m, i * m : (i + 1) * m] = B.T
        return symmetrize(G)
