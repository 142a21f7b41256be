"""Quaternary classification with a complex couple of hyperplanes.

Labels are the complex numbers ``+-1 +- 1j``.  The real parts train one real
C-SVM and the imaginary parts another, both over the doubled induced kernel
``2 * Re(k_C)``; :func:`sign_i` of the combined decision value gives the class.
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
from .qp import SingleClassError, SvcModel, SvcParams, solve_svc_dual

__all__ = [
    "QUATERNARY_LABELS",
    "CsvmModel",
    "ComplexifiedSvc",
    "OneVsAllModel",
    "fit_csvm",
    "decision_function",
    "predict_csvm",
    "sign_i",
    "classify_binary_complexified",
    "fit_one_vs_all",
    "as_quaternary_labels",
    "label_to_str",
    "label_from_str",
]

# class order C++, C+-, C-+, C--
QUATERNARY_LABELS = (1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j)
_LABEL_STR = {1 + 1j: "++", 1 - 1j: "+-", -1 + 1j: "-+", -1 - 1j: "--"}
_STR_LABEL = {v: k for k, v in _LABEL_STR.items()}


def sign_i(v):
    """Componentwise sign ``sign(Re v) + 1j*sign(Im v)`` with ``sign(0) = +1``.

    Works on scalars and arrays.

    >>> sign_i(3 - 0.5j)
    (1-1j)
    >>> sign_i(0j)
    (1+1j)
    """
    v = np.asarray(v, dtype=complex)
    out = np.where(v.real >= 0, 1.0, -1.0) + 1j * np.where(v.imag >= 0, 1.0, -1.0)
    return complex(out) if out.ndim == 0 else out


def as_quaternary_labels(labels):
    d = np.asarray(labels, dtype=complex).reshape(-1)
    if not (np.all(np.isin(d.real, (-1.0, 1.0))) and np.all(np.isin(d.imag, (-1.0, 1.0)))):
        raise ValueError("quaternary labels must be one of +1+1j, +1-1j, -1+1j, -1-1j")
    return d


def label_to_str(label):
    return _LABEL_STR[complex(label)]


def label_from_str(text):
    try:
        return _STR_LABEL[text.strip()]
    except KeyError:
        raise ValueError(f"unknown quaternary label {text!r}; expected one of ++, +-, -+, --") from None


@dataclass(frozen=True, eq=False)
class CsvmModel:
    kernel: object
    real_task: SvcModel
    imag_task: SvcModel
    train_inputs: np.ndarray

    @property
    def dual_kernel(self):
        return Scaled(2.0, InducedReal(self.kernel))

    @property
    def converged(self):
        return self.real_task.converged and self.imag_task.converged

    def decision_function(self, z):
        z = as_complex_points(z)
        if z.shape[1] != self.train_inputs.shape[1]:
            raise KernelDomainError(
                f"input dimension mismatch: expected {self.train_inputs.shape[1]}, got {z.shape[1]}")
        cross = cross_gram(self.dual_kernel, z, self.train_inputs)
        return self.real_task.decision(cross) + 1j * self.imag_task.decision(cross)

    def predict(self, z):
        return sign_i(self.decision_function(z))

    def to_dict(self):
        return {
            "type": "csvm",
            "kernel": kernel_to_dict(self.kernel),
            "real_task": self.real_task.to_dict(),
            "imag_task": self.imag_task.to_dict(),
            "train_inputs": {"re": self.train_inputs.real.tolist(), "im": self.train_inputs.imag.tolist()},
        }

    @classmethod
    def from_dict(cls, obj):
        z = np.asarray(obj["train_inputs"]["re"], dtype=float) + 1j * np.asarray(obj["train_inputs"]["im"], dtype=float)
        return cls(
            kernel=kernel_from_dict(obj["kernel"]),
            real_task=SvcModel.from_dict(obj["real_task"]),
            imag_task=SvcModel.from_dict(obj["imag_task"]),
            train_inputs=z,
        )


def fit_csvm(inputs, labels, complex_kernel, params: SvcParams, *, debug=False) -> CsvmModel:
    """Fit the quaternary complex SVM (exactly two real dual solves)."""
    if not complex_kernel.is_complex:
        raise KernelDomainError("fit_csvm requires a complex kernel")
    z = as_complex_points(inputs)
    d = as_quaternary_labels(labels)
    if d.shape[0] != z.shape[0]:
        raise ValueError(f"{z.shape[0]} inputs but {d.shape[0]} labels")
    for name, part in (("real", d.real), ("imaginary", d.imag)):
        if np.all(part == part[0]):
            raise SingleClassError(f"single-class channel: {name}")
    gram = build_gram(Scaled(2.0, InducedReal(complex_kernel)), z)
    real_task = solve_svc_dual(gram, d.real, params, debug=debug)
    imag_task = solve_svc_dual(gram, d.imag, params, debug=debug)
    return CsvmModel(kernel=complex_kernel, real_task=real_task, imag_task=imag_task, train_inputs=z)


def decision_function(model: CsvmModel, z):
    return model.decision_function(z)


def predict_csvm(model: CsvmModel, z):
    return model.predict(z)


@dataclass(frozen=True, eq=False)
class ComplexifiedSvc:
    """Binary SVM on complex inputs with the complexified kernel ``2 * k_R``."""

    kernel: object
    task: SvcModel
    train_inputs: np.ndarray

    def decision_function(self, z):
        cross = cross_gram(self.kernel, stack_real_imag(z), stack_real_imag(self.train_inputs))
        return self.task.decision(cross)

    def predict(self, z):
        return np.where(self.decision_function(z) >= 0.0, 1.0, -1.0)


def classify_binary_complexified(inputs, labels, real_kernel, params: SvcParams) -> ComplexifiedSvc:
    if real_kernel.is_complex or real_kernel.domain != "real":
        raise KernelDomainError("complexified SVM requires a real kernel over stacked (x, y) inputs")
    z = as_complex_points(inputs)
    kernel = Scaled(2.0, real_kernel)
    task = solve_svc_dual(build_gram(kernel, stack_real_imag(z)), labels, params)
    return ComplexifiedSvc(kernel=kernel, task=task, train_inputs=z)


@dataclass(frozen=True, eq=False)
class OneVsAllModel:
    """Baseline: one binary SVM per quaternary class, argmax of decision values."""

    dual_kernel: object
    tasks: tuple
    train_inputs: np.ndarray

    def decision_function(self, z):
        cross = cross_gram(self.dual_kernel, as_complex_points(z), self.train_inputs)
        return np.stack([task.decision(cross) for task in self.tasks], axis=1)

    def predict(self, z):
        best = np.argmax(self.decision_function(z), axis=1)
        return np.asarray(QUATERNARY_LABELS)[best]


def fit_one_vs_all(inputs, labels, complex_kernel, params: SvcParams) -> OneVsAllModel:
    """Four class-versus-rest SVMs over the same doubled induced kernel."""
    z = as_complex_points(inputs)
    d = as_quaternary_labels(labels)
    dual_kernel = Scaled(2.0, InducedReal(complex_kernel))
    gram = build_gram(dual_kernel, z)
    tasks = tuple(solve_svc_dual(gram, np.where(d == lab, 1.0, -1.0), params) for lab in QUATERNARY_LABELS)
    return OneVsAllModel(dual_kernel=dual_kernel, tasks=tasks, train_inputs=z)
