"""Complex support vector regression.

Three estimators share one pattern: split the complex targets into real and
imaginary channels and solve one real SVR dual per channel over a shared Gram.

* :func:`fit_csvr` - pure complex kernel with widely linear estimation.  Both
  channel duals use ``2 * Re(k_C)`` (the induced real kernel, doubled).
* :func:`fit_drc_svr` - dual real channel baseline: a real kernel on the
  stacked inputs ``(x, y)``.
* :func:`fit_complexified_svr` - complexified real kernel, dual kernel
  ``2 * k_R``.  Equal to :func:`fit_drc_svr` run with ``2C``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernels import (
    InducedReal,
    KernelDomainError,
    Scaled,
    as_complex_points,
    build_gram,
    cross_gram,
    kernel_from_dict,
    kernel_to_dict,
    stack_real_imag,
)
from .qp import SvrModel, SvrParams, solve_svr_dual

__all__ = [
    "CsvrModel",
    "DrcModel",
    "fit_csvr",
    "predict_csvr",
    "fit_drc_svr",
    "fit_complexified_svr",
    "mse_db",
    "MSE_FLOOR",
]

MSE_FLOOR = 1e-300


def _complex_data(inputs, targets):
    z = as_complex_points(inputs)
    d = np.asarray(targets, dtype=complex).reshape(-1)
    if d.shape[0] != z.shape[0]:
        raise ValueError(f"{z.shape[0]} inputs but {d.shape[0]} targets")
    if not np.all(np.isfinite(d)):
        raise ValueError("targets must be finite")
    return z, d


def _check_query(z, train):
    z = as_complex_points(z)
    if z.shape[1] != train.shape[1]:
        raise KernelDomainError(f"input dimension mismatch: expected {train.shape[1]}, got {z.shape[1]}")
    return z


@dataclass(frozen=True, eq=False)
class CsvrModel:
    """Pure complex SVR: two real SVR solutions over ``2 * Re(kernel)``."""

    kernel: object
    real_task: SvrModel
    imag_task: SvrModel
    train_inputs: np.ndarray

    @property
    def dual_kernel(self):
        return Scaled(2.0, InducedReal(self.kernel))

    @property
    def converged(self):
        return self.real_task.converged and self.imag_task.converged

    def predict(self, z):
        z = _check_query(z, self.train_inputs)
        cross = cross_gram(self.dual_kernel, z, self.train_inputs)
        return self.real_task.decision(cross) + 1j * self.imag_task.decision(cross)

    def to_dict(self):
        return {
            "type": "csvr",
            "kernel": kernel_to_dict(self.kernel),
            "real_task": self.real_task.to_dict(),
            "imag_task": self.imag_task.to_dict(),
            "train_inputs": _encode_complex(self.train_inputs),
        }

    @classmethod
    def from_dict(cls, obj):
        return cls(
            kernel=kernel_from_dict(obj["kernel"]),
            real_task=SvrModel.from_dict(obj["real_task"]),
            imag_task=SvrModel.from_dict(obj["imag_task"]),
            train_inputs=_decode_complex(obj["train_inputs"]),
        )


@dataclass(frozen=True, eq=False)
class DrcModel:
    """Two real SVRs over stacked inputs; ``kernel`` is the dual kernel itself."""

    kernel: object
    real_task: SvrModel
    imag_task: SvrModel
    train_inputs: np.ndarray
    kind: str = "drc"

    @property
    def converged(self):
        return self.real_task.converged and self.imag_task.converged

    def predict(self, z):
        z = _check_query(z, self.train_inputs)
        cross = cross_gram(self.kernel, stack_real_imag(z), stack_real_imag(self.train_inputs))
        return self.real_task.decision(cross) + 1j * self.imag_task.decision(cross)

    def to_dict(self):
        return {
            "type": self.kind,
            "kernel": kernel_to_dict(self.kernel),
            "real_task": self.real_task.to_dict(),
            "imag_task": self.imag_task.to_dict(),
            "train_inputs": _encode_complex(self.train_inputs),
        }

    @classmethod
    def from_dict(cls, obj):
        return cls(
            kernel=kernel_from_dict(obj["kernel"]),
            real_task=SvrModel.from_dict(obj["real_task"]),
            imag_task=SvrModel.from_dict(obj["imag_task"]),
            train_inputs=_decode_complex(obj["train_inputs"]),
            kind=obj.get("type", "drc"),
        )


def _encode_complex(z):
    z = np.asarray(z, dtype=complex)
    return {"re": z.real.tolist(), "im": z.imag.tolist()}


def _decode_complex(obj):
    return np.asarray(obj["re"], dtype=float) + 1j * np.asarray(obj["im"], dtype=float)


def _solve_channels(gram, d, params, debug):
    real_task = solve_svr_dual(gram, d.real, params, debug=debug)
    imag_task = solve_svr_dual(gram, d.imag, params, debug=debug)
    return real_task, imag_task


def fit_csvr(inputs, targets, complex_kernel, params: SvrParams, *, debug=False) -> CsvrModel:
    """Fit a pure complex SVR.

    Parameters
    ----------
    inputs : array_like, shape (N, nu), complex
    targets : array_like, shape (N,), complex
    complex_kernel : kernel spec
        Must be complex valued (e.g. :class:`~complexsvm.kernels.ComplexGaussian`).
    params : SvrParams
        ``C`` and ``epsilon`` are shared by both channels.
    """
    if not complex_kernel.is_complex:
        raise KernelDomainError("fit_csvr requires a complex kernel")
    z, d = _complex_data(inputs, targets)
    gram = build_gram(Scaled(2.0, InducedReal(complex_kernel)), z)
    real_task, imag_task = _solve_channels(gram, d, params, debug)
    return CsvrModel(kernel=complex_kernel, real_task=real_task, imag_task=imag_task, train_inputs=z)


def predict_csvr(model: CsvrModel, z):
    """``2 sum beta^r k^r(z_n, z) + c^r + i (2 sum beta^i k^r(z_n, z) + c^i)``."""
    return model.predict(z)


def fit_drc_svr(inputs, targets, real_kernel, params: SvrParams, *, debug=False) -> DrcModel:
    """Dual real channel SVR with a real kernel on R^{2 nu}."""
    return _fit_real_pair(inputs, targets, real_kernel, params, debug, "drc")


def fit_complexified_svr(inputs, targets, real_kernel, params: SvrParams, *, debug=False) -> DrcModel:
    """Complexified SVR: both channel duals use ``2 * real_kernel``."""
    return _fit_real_pair(inputs, targets, Scaled(2.0, real_kernel), params, debug, "complexified")


def _fit_real_pair(inputs, targets, kernel, params, debug, kind):
    if kernel.is_complex or kernel.domain != "real":
        raise KernelDomainError(f"{kind} SVR requires a real kernel over stacked (x, y) inputs")
    z, d = _complex_data(inputs, targets)
    gram = build_gram(kernel, stack_real_imag(z))
    real_task, imag_task = _solve_channels(gram, d, params, debug)
    return DrcModel(kernel=kernel, real_task=real_task, imag_task=imag_task, train_inputs=z, kind=kind)


def mse_db(predictions, truth):
    """Mean squared error in dB, floored at ``10*log10(1e-300) = -3000``."""
    p = np.asarray(predictions, dtype=complex).reshape(-1)
    t = np.asarray(truth, dtype=complex).reshape(-1)
    if p.shape != t.shape:
        raise ValueError(f"length mismatch: {p.shape[0]} predictions, {t.shape[0]} targets")
    if p.size == 0:
        raise ValueError("empty input")
    mse = float(np.mean(np.abs(p - t) ** 2))
    return 10.0 * np.log10(max(mse, MSE_FLOOR))
