"""Real and complex kernels, Gram construction and kernel sanity checks.

Points are passed as 2-D numpy arrays with one pattern per row: float arrays
for real kernels, complex arrays for complex kernels (and for the induced real
kernel of a complex one), integer index arrays for precomputed Gram matrices.

Gram matrices follow the reproducing-property argument order,
``gram[i, j] = k(points[j], points[i])``.  For the complex Gaussian kernel this
makes the Gram Hermitian; real-valued kernels give symmetric matrices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

__all__ = [
    "KernelError",
    "KernelDomainError",
    "KernelRangeError",
    "RealGaussian",
    "ComplexGaussian",
    "InducedReal",
    "Scaled",
    "Precomputed",
    "KernelSpec",
    "eval_real_gaussian",
    "eval_complex_gaussian",
    "eval_kernel",
    "build_gram",
    "cross_gram",
    "check_imaginary_annihilation",
    "check_positive_definite",
    "complexified_inner",
    "stack_real_imag",
    "as_complex_points",
    "kernel_to_dict",
    "kernel_from_dict",
]

# exp(709.78) is the largest finite double; keep a margin
EXPONENT_LIMIT = 700.0


class KernelError(ValueError):
    """Base class for kernel evaluation errors."""


class KernelDomainError(KernelError):
    """Raised when points do not match the kernel's input domain."""


class KernelRangeError(KernelError, OverflowError):
    """Raised when a kernel exponent exceeds the representable range."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


def _check_positive(name, value):
    value = float(value)
    if not math.isfinite(value) or value <= 0.0:
        raise ValueError(f"{name} must be a positive finite number, got {value!r}")
    return value


@dataclass(frozen=True)
class RealGaussian:
    """Gaussian RBF ``exp(-t * ||x - y||^2)`` on real vectors."""

    t: float

    def __post_init__(self):
        object.__setattr__(self, "t", _check_positive("t", self.t))

    domain = "real"
    is_complex = False


@dataclass(frozen=True)
class ComplexGaussian:
    """Complex Gaussian ``exp(-t * sum((z_k - conj(w_k))**2))``.

    Unlike the real RBF this kernel is unbounded: points with large imaginary
    parts produce values of modulus well above one.
    """

    t: float

    def __post_init__(self):
        object.__setattr__(self, "t", _check_positive("t", self.t))

    domain = "complex"
    is_complex = True


@dataclass(frozen=True)
class InducedReal:
    """Real part of a complex kernel, viewed as a real kernel on R^{2 nu}."""

    inner: "KernelSpec"

    def __post_init__(self):
        if not self.inner.is_complex:
            raise ValueError("InducedReal wraps a complex-valued kernel only")

    domain = "complex"
    is_complex = False


@dataclass(frozen=True)
class Scaled:
    """Positive multiple ``factor * inner``."""

    factor: float
    inner: "KernelSpec"

    def __post_init__(self):
        object.__setattr__(self, "factor", _check_positive("factor", self.factor))

    @property
    def domain(self):
        return self.inner.domain

    @property
    def is_complex(self):
        return self.inner.is_complex


@dataclass(frozen=True, eq=False)
class Precomputed:
    """Kernel given by a fixed Gram matrix, addressed by point index."""

    gram: np.ndarray

    def __post_init__(self):
        g = np.array(self.gram, dtype=float)
        if g.ndim != 2 or g.shape[0] != g.shape[1] or g.shape[0] == 0:
            raise ValueError(f"precomputed Gram must be a nonempty square matrix, got shape {g.shape}")
        if not np.all(np.isfinite(g)):
            raise ValueError("precomputed Gram has non-finite entries")
        g.setflags(write=False)
        object.__setattr__(self, "gram", g)

    domain = "index"
    is_complex = False

    def __eq__(self, other):
        return isinstance(other, Precomputed) and np.array_equal(self.gram, other.gram)

    def __hash__(self):
        return hash(self.gram.tobytes())


KernelSpec = Union[RealGaussian, ComplexGaussian, InducedReal, Scaled, Precomputed]


def as_complex_points(points):
    """Coerce to a finite 2-D complex array of shape (n, nu)."""
    z = np.asarray(points, dtype=complex)
    if z.ndim == 1:
        z = z[None, :]
    if z.ndim != 2 or z.shape[1] == 0:
        raise KernelDomainError(f"expected complex points of shape (n, nu), got {z.shape}")
    if not np.all(np.isfinite(z)):
        raise KernelDomainError("complex points must be finite")
    return z


def _as_real_points(points):
    x = np.asarray(points)
    if np.iscomplexobj(x):
        raise KernelDomainError("real kernel evaluated on complex points; stack real and imaginary parts first")
    x = x.astype(float)
    if x.ndim == 1:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] == 0:
        raise KernelDomainError(f"expected real points of shape (n, d), got {x.shape}")
    if not np.all(np.isfinite(x)):
        raise KernelDomainError("real points must be finite")
    return x


def stack_real_imag(points):
    """Map complex patterns z = x + iy in C^nu to (x, y) in R^{2 nu}."""
    z = as_complex_points(points)
    return np.hstack([z.real, z.imag])


def _gaussian_exponent(rows, cols, t):
    # exponent[i, j] = -t * sum_k (cols[j, k] - rows[i, k])**2
    diff = cols[None, :, :] - rows[:, None, :]
    return -t * np.sum(diff * diff, axis=-1)


def _complex_exponent(rows, cols, t):
    # (z - conj(w)) = (x_z - x_w) + i (y_z + y_w); z = cols[j], w = rows[i]
    dx = cols.real[None, :, :] - rows.real[:, None, :]
    sy = cols.imag[None, :, :] + rows.imag[:, None, :]
    a = -t * np.sum(dx * dx - sy * sy, axis=-1)
    b = -t * np.sum(2.0 * dx * sy, axis=-1)
    return a, b


def _check_exponent(a):
    if np.any(a > EXPONENT_LIMIT):
        i, j = np.unravel_index(int(np.argmax(a)), a.shape)
        raise KernelRangeError(
            f"kernel exponent {a[i, j]:.6g} at entry ({i}, {j}) exceeds {EXPONENT_LIMIT}",
            index=(int(i), int(j)),
        )


def _complex_exp(a, b):
    ea = np.exp(a)
    return ea * np.cos(b) + 1j * (ea * np.sin(b))


def _cross(spec, rows, cols):
    """Matrix with entries spec(cols[j], rows[i])."""
    if isinstance(spec, RealGaussian):
        rows, cols = _as_real_points(rows), _as_real_points(cols)
        _check_dims(rows, cols)
        return np.exp(_gaussian_exponent(rows, cols, spec.t))
    if isinstance(spec, ComplexGaussian):
        rows, cols = as_complex_points(rows), as_complex_points(cols)
        _check_dims(rows, cols)
        a, b = _complex_exponent(rows, cols, spec.t)
        _check_exponent(a)
        return _complex_exp(a, b)
    if isinstance(spec, InducedReal):
        return np.real(_cross(spec.inner, rows, cols)).copy()
    if isinstance(spec, Scaled):
        return spec.factor * _cross(spec.inner, rows, cols)
    if isinstance(spec, Precomputed):
        r, c = _as_indices(rows, spec), _as_indices(cols, spec)
        return spec.gram[np.ix_(r, c)].copy()
    raise TypeError(f"not a kernel spec: {spec!r}")


def _check_dims(rows, cols):
    if rows.shape[1] != cols.shape[1]:
        raise KernelDomainError(f"dimension mismatch: {rows.shape[1]} != {cols.shape[1]}")


def _as_indices(points, spec):
    idx = np.asarray(points)
    if idx.ndim == 2 and idx.shape[1] == 1:
        idx = idx[:, 0]
    idx = np.atleast_1d(idx)
    if idx.ndim != 1 or not np.issubdtype(idx.dtype, np.integer):
        raise KernelDomainError("precomputed kernel expects integer point indices")
    n = spec.gram.shape[0]
    if np.any(idx < 0) or np.any(idx >= n):
        raise KernelDomainError(f"index out of range for precomputed Gram of size {n}")
    return idx


def eval_real_gaussian(x, y, t):
    """Gaussian RBF between two real vectors."""
    t = _check_positive("t", t)
    x, y = _as_real_points(x), _as_real_points(y)
    if x.shape != y.shape or x.shape[0] != 1:
        raise KernelDomainError(f"dimension mismatch: {x.shape[1]} != {y.shape[1]}")
    return float(np.exp(_gaussian_exponent(y, x, t))[0, 0])


def eval_complex_gaussian(z, w, t) -> complex:
    """Complex Gaussian kernel value for two complex vectors.

    Raises :class:`KernelRangeError` when the real part of the exponent exceeds
    ``EXPONENT_LIMIT`` instead of returning ``inf``.
    """
    t = _check_positive("t", t)
    z, w = as_complex_points(z), as_complex_points(w)
    if z.shape != w.shape or z.shape[0] != 1:
        raise KernelDomainError(f"dimension mismatch: {z.shape[1]} != {w.shape[1]}")
    a, b = _complex_exponent(w, z, t)
    _check_exponent(a)
    return complex(_complex_exp(a, b)[0, 0])


def eval_kernel(spec, a, b):
    """Evaluate ``spec(a, b)`` for single points.

    Real-valued specs return a float, complex specs a complex number.  For a
    precomputed spec ``a`` and ``b`` are indices.
    """
    if isinstance(spec, Precomputed) or (isinstance(spec, Scaled) and spec.domain == "index"):
        a, b = np.atleast_1d(np.asarray(a)), np.atleast_1d(np.asarray(b))
    else:
        a, b = np.atleast_2d(a), np.atleast_2d(b)
        if a.shape[0] != 1 or b.shape[0] != 1:
            raise KernelDomainError("eval_kernel takes single points")
    value = _cross(spec, b, a)[0, 0]
    return complex(value) if spec.is_complex else float(value)


def build_gram(spec, points):
    """Gram matrix with ``gram[i, j] = spec(points[j], points[i])``."""
    if spec.domain == "index":
        pts = np.asarray(points)
    else:
        pts = np.atleast_2d(points)
    if len(pts) == 0:
        raise KernelDomainError("empty point set")
    return _cross(spec, pts, pts)


def cross_gram(spec, rows, cols):
    """Rectangular kernel matrix with ``out[i, j] = spec(cols[j], rows[i])``.

    With ``cols`` the training inputs and ``rows`` query points, a dual
    expansion evaluates as ``cross_gram(spec, queries, train) @ coef``.
    """
    if spec.domain != "index":
        rows, cols = np.atleast_2d(rows), np.atleast_2d(cols)
    return _cross(spec, rows, cols)


def check_imaginary_annihilation(spec, points, coeffs):
    """``|sum_{n,m} c_n c_m Im k(z_n, z_m)|`` for real coefficients.

    Zero in exact arithmetic for any Hermitian kernel, so the return value
    measures floating-point error only.
    """
    if not spec.is_complex:
        raise KernelDomainError("annihilation check needs a complex kernel")
    c = np.asarray(coeffs, dtype=float)
    g = build_gram(spec, points)
    if c.shape != (g.shape[0],):
        raise ValueError(f"expected {g.shape[0]} coefficients, got {c.shape}")
    # g[m, n] = k(z_n, z_m), so the double sum is c^T Im(g)^T c
    return float(abs(c @ np.imag(g).T @ c))


def check_positive_definite(spec, points, trials=500, seed=0):
    """Smallest Rayleigh quotient of the Gram over random real directions.

    Returns ``min_k a_k^T G a_k / a_k^T a_k`` for ``trials`` Gaussian
    directions ``a_k``; values below ``-tol`` witness indefiniteness.
    """
    if spec.is_complex:
        raise KernelDomainError("positive-definiteness check needs a real-valued kernel")
    g = build_gram(spec, points)
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((int(trials), g.shape[0]))
    quad = np.einsum("ki,ij,kj->k", a, g, a)
    return float(np.min(quad / np.einsum("ki,ki->k", a, a)))


def complexified_inner(kappa_r, p, q):
    """Inner product of two complexified feature maps, ``2 * kappa_r(q, p)``."""
    p, q = np.asarray(p, dtype=float), np.asarray(q, dtype=float)
    if p.shape != q.shape or p.ndim != 1 or p.size % 2:
        raise KernelDomainError(f"expected two real vectors of equal even length, got {p.shape} and {q.shape}")
    if kappa_r.is_complex:
        raise KernelDomainError("complexification needs a real kernel")
    return 2.0 * eval_kernel(kappa_r, q, p)


def kernel_to_dict(spec):
    if isinstance(spec, RealGaussian):
        return {"kind": "real_gaussian", "t": spec.t}
    if isinstance(spec, ComplexGaussian):
        return {"kind": "complex_gaussian", "t": spec.t}
    if isinstance(spec, InducedReal):
        return {"kind": "induced_real", "inner": kernel_to_dict(spec.inner)}
    if isinstance(spec, Scaled):
        return {"kind": "scaled", "factor": spec.factor, "inner": kernel_to_dict(spec.inner)}
    if isinstance(spec, Precomputed):
        return {"kind": "precomputed", "gram": spec.gram.tolist()}
    raise TypeError(f"not a kernel spec: {spec!r}")


def kernel_from_dict(obj):
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ValueError(f"kernel spec must be an object with a 'kind' field, got {obj!r}")
    kind = obj["kind"]
    if kind == "real_gaussian":
        return RealGaussian(obj["t"])
    if kind == "complex_gaussian":
        return ComplexGaussian(obj["t"])
    if kind == "induced_real":
        return InducedReal(kernel_from_dict(obj["inner"]))
    if kind == "scaled":
        return Scaled(obj["factor"], kernel_from_dict(obj["inner"]))
    if kind == "precomputed":
        return Precomputed(np.asarray(obj["gram"], dtype=float))
    raise ValueError(f"unknown kernel kind {kind!r}")
