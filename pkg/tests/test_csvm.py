import json

import numpy as np
import pytest

from complexsvm.csvm import (
    QUATERNARY_LABELS,
    CsvmModel,
    classify_binary_complexified,
    decision_function,
    fit_csvm,
    fit_one_vs_all,
    label_from_str,
    label_to_str,
    predict_csvm,
    sign_i,
)
from complexsvm.datasets import BlobConfig, gen_quaternary_blobs
from complexsvm.kernels import ComplexGaussian, InducedReal, Precomputed, RealGaussian, Scaled, build_gram
from complexsvm.qp import SingleClassError, SvcModel, SvcParams, count_solves, solve_dual_bruteforce, solve_svc_dual

CORNERS = np.array([[1 + 1j], [1 - 1j], [-1 + 1j], [-1 - 1j]])


def blobs(seed=0, spread=0.3, n=40):
    return gen_quaternary_blobs(BlobConfig(spread=spread, n_per_class=n, seed=seed))


def symmetric_blobs(n=10, seed=0):
    rng = np.random.default_rng(seed)
    base = 2 + 2j + 0.3 * (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2)
    z = np.concatenate([base, np.conj(base), -np.conj(base), -base])
    labels = np.repeat(QUATERNARY_LABELS, n)
    return z[:, None], labels


def constant_model(c):
    p = SvcParams(C=1.0)
    labels = np.array([1.0, -1.0])
    return CsvmModel(ComplexGaussian(1.0), SvcModel(np.zeros(2), labels, c.real, 0.0, p),
                     SvcModel(np.zeros(2), labels, c.imag, 0.0, p), np.zeros((2, 1), dtype=complex))


# -- sign_i

@pytest.mark.parametrize("v, expect", [(3 - 0.5j, 1 - 1j), (-2 + 2j, -1 + 1j), (0j, 1 + 1j), (-0.0 - 0.0j, 1 + 1j)])
def test_sign_i(v, expect):
    assert sign_i(v) == expect


def test_sign_i_array():
    np.testing.assert_array_equal(sign_i(np.array([1 + 1j, -1e-300 + 0j])), [1 + 1j, -1 + 1j])


def test_label_strings():
    for lab in QUATERNARY_LABELS:
        assert label_from_str(label_to_str(lab)) == lab
    with pytest.raises(ValueError):
        label_from_str("+0")


# -- fit_csvm

def test_blob_training_accuracy():
    data = blobs()
    m = fit_csvm(data.inputs, data.labels, ComplexGaussian(0.5), SvcParams(C=100.0))
    assert np.sum(m.predict(data.inputs) == data.labels) == 160


def test_single_class_channel_named():
    z = CORNERS
    with pytest.raises(SingleClassError, match="single-class channel: imaginary"):
        fit_csvm(z, [1 + 1j, -1 + 1j, 1 + 1j, -1 + 1j], ComplexGaussian(1.0), SvcParams(C=1.0))
    with pytest.raises(SingleClassError, match="single-class channel: real"):
        fit_csvm(z, [1 + 1j, 1 - 1j, 1 + 1j, 1 - 1j], ComplexGaussian(1.0), SvcParams(C=1.0))


def test_invalid_labels():
    with pytest.raises(ValueError):
        fit_csvm(CORNERS, [1, -1, 1j, 0], ComplexGaussian(1.0), SvcParams(C=1.0))


def test_four_point_oracle_and_margins():
    p = SvcParams(C=1000.0, kkt_tol=1e-6)
    labels = CORNERS[:, 0]
    m = fit_csvm(CORNERS, labels, ComplexGaussian(1.0), p)
    gram = build_gram(Precomputed(build_gram(Scaled(2.0, InducedReal(ComplexGaussian(1.0))), CORNERS)), np.arange(4))
    for task, y in ((m.real_task, labels.real), (m.imag_task, labels.imag)):
        oracle = solve_dual_bruteforce(gram, y, p)
        assert abs(task.objective - oracle.model.objective) <= max(1e-3, oracle.grid_bound)
    f = decision_function(m, CORNERS)
    assert f[0].real >= 1 - p.kkt_tol and f[0].imag >= 1 - p.kkt_tol
    np.testing.assert_array_equal(predict_csvm(m, CORNERS), labels)


def test_constant_models():
    m = constant_model(0.5 - 0.25j)
    np.testing.assert_array_equal(m.decision_function([[3j], [-1 + 0j]]), [0.5 - 0.25j] * 2)
    np.testing.assert_array_equal(constant_model(-1 - 1j).predict([[2 + 2j], [0j]]), [-1 - 1j] * 2)


def test_symmetric_centroid_margins_small():
    z, labels = symmetric_blobs()
    m = fit_csvm(z, labels, ComplexGaussian(0.5), SvcParams(C=100.0))
    f = m.decision_function([[np.mean(z)]])[0]
    assert abs(f.real) <= 0.5 and abs(f.imag) <= 0.5


def test_fresh_point_near_center():
    data = blobs()
    m = fit_csvm(data.inputs, data.labels, ComplexGaussian(0.5), SvcParams(C=100.0))
    assert m.predict([[2.05 + 1.95j]])[0] == 1 + 1j


def test_decision_dimension_mismatch():
    data = blobs()
    m = fit_csvm(data.inputs, data.labels, ComplexGaussian(0.5), SvcParams(C=10.0))
    with pytest.raises(ValueError, match="expected 1, got 2"):
        m.decision_function(np.zeros((1, 2), dtype=complex))


# -- invariants

@pytest.mark.parametrize("seed", range(3))
def test_channel_decoupling(seed):
    data = blobs(seed)
    p = SvcParams(C=10.0)
    a = fit_csvm(data.inputs, data.labels, ComplexGaussian(0.2), p)
    perm = np.random.default_rng(seed).permutation(len(data))
    b = fit_csvm(data.inputs, data.labels.real + 1j * data.labels.imag[perm], ComplexGaussian(0.2), p)
    np.testing.assert_array_equal(a.real_task.alpha, b.real_task.alpha)
    assert a.real_task.bias == b.real_task.bias


@pytest.mark.parametrize("seed", range(3))
def test_label_negation(seed):
    data = blobs(seed, spread=0.8)
    p = SvcParams(C=10.0)
    a = fit_csvm(data.inputs, data.labels, ComplexGaussian(0.2), p)
    b = fit_csvm(data.inputs, -data.labels.real + 1j * data.labels.imag, ComplexGaussian(0.2), p)
    q = blobs(seed + 100, spread=1.0).inputs
    fa, fb = a.decision_function(q), b.decision_function(q)
    np.testing.assert_array_equal(fb.real, -fa.real)
    np.testing.assert_array_equal(fb.imag, fa.imag)
    flipped = fb.real != 0
    np.testing.assert_array_equal(b.predict(q).real[flipped], -a.predict(q).real[flipped])


@pytest.mark.parametrize("seed", range(3))
def test_margin_complementarity(seed):
    data = blobs(seed, spread=1.0)
    p = SvcParams(C=5.0, kkt_tol=1e-4)
    m = fit_csvm(data.inputs, data.labels, ComplexGaussian(0.1), p)
    f = m.decision_function(data.inputs)
    for task, y, part in ((m.real_task, data.labels.real, f.real), (m.imag_task, data.labels.imag, f.imag)):
        free = (task.alpha > 0) & (task.alpha < task.upper)
        assert np.any(free)
        np.testing.assert_allclose(y[free] * part[free], 1.0, atol=p.kkt_tol * 10)


def test_linear_kernel_couple_of_hyperplanes():
    # induced linear kernel Re(conj(w) z) = x x' + y y' over C^1
    rng = np.random.default_rng(4)
    z = np.concatenate([c + 0.25 * (rng.standard_normal(15) + 1j * rng.standard_normal(15))
                        for c in (1.5 + 1.5j, 1.5 - 1.5j, -1.5 + 1.5j, -1.5 - 1.5j)])
    labels = np.repeat(QUATERNARY_LABELS, 15)
    lin = lambda a, b: np.real(np.conj(b)[None, :] * a[:, None])  # noqa: E731  [m, n] = Re(conj(b_n) a_m)
    gram = 2.0 * lin(z, z)
    p = SvcParams(C=100.0)
    re, im = solve_svc_dual(gram, labels.real, p), solve_svc_dual(gram, labels.imag, p)
    xs = np.linspace(-3, 3, 41)
    pts = (xs[:, None] + 1j * xs[None, :]).ravel()
    cross = 2.0 * lin(pts, z)
    f = re.decision(cross) + 1j * im.decision(cross)
    # both parts are affine in (x, y): second differences along a row vanish
    grid = f.reshape(41, 41)
    assert np.max(np.abs(np.diff(grid, 2, axis=0))) < 1e-9
    assert np.max(np.abs(np.diff(grid, 2, axis=1))) < 1e-9
    regions = sign_i(f)
    assert set(np.unique(regions)) == set(QUATERNARY_LABELS)
    train = 2.0 * lin(z, z)
    np.testing.assert_array_equal(sign_i(re.decision(train) + 1j * im.decision(train)), labels)


def test_equals_two_binary_fits():
    data = blobs(2, spread=0.8)
    p = SvcParams(C=10.0)
    m = fit_csvm(data.inputs, data.labels, ComplexGaussian(0.2), p)
    gram = build_gram(Scaled(2.0, InducedReal(ComplexGaussian(0.2))), data.inputs)
    for task, y in ((m.real_task, data.labels.real), (m.imag_task, data.labels.imag)):
        ref = solve_svc_dual(gram, y, p)
        np.testing.assert_array_equal(task.alpha, ref.alpha)
        assert task.bias == ref.bias


def test_two_solves_versus_four():
    data = blobs()
    p = SvcParams(C=100.0)
    with count_solves() as quaternary:
        fit_csvm(data.inputs, data.labels, ComplexGaussian(0.05), p)
    with count_solves() as ova:
        model = fit_one_vs_all(data.inputs, data.labels, ComplexGaussian(0.05), p)
    assert quaternary["svc"] == 2 and ova["svc"] == 4
    assert np.all(model.predict(data.inputs) == data.labels)


def test_model_dict_roundtrip():
    data = blobs()
    m = fit_csvm(data.inputs, data.labels, ComplexGaussian(0.05), SvcParams(C=100.0))
    back = CsvmModel.from_dict(json.loads(json.dumps(m.to_dict())))
    q = blobs(5, spread=1.0).inputs
    np.testing.assert_array_equal(back.decision_function(q), m.decision_function(q))


# -- complexified binary

def test_binary_complexified_separable():
    data = blobs(1)
    y = data.labels.real
    m = classify_binary_complexified(data.inputs, y, RealGaussian(1.0), SvcParams(C=100.0))
    np.testing.assert_array_equal(m.predict(data.inputs), y)


def test_binary_complexified_single_class():
    with pytest.raises(SingleClassError):
        classify_binary_complexified(CORNERS, np.ones(4), RealGaussian(1.0), SvcParams(C=1.0))


def test_binary_complexified_matches_quaternary_duplicated_channel():
    # on real-axis inputs 2 Re k_C and 2 k_R coincide, so the duals match exactly
    rng = np.random.default_rng(3)
    x = np.concatenate([rng.uniform(-3, -0.5, 12), rng.uniform(0.5, 3, 12)])
    z = x.astype(complex)[:, None]
    y = np.where(x > 0, 1.0, -1.0)
    p = SvcParams(C=50.0)
    quad = fit_csvm(z, y + 1j * y, ComplexGaussian(0.5), p)
    np.testing.assert_array_equal(quad.real_task.alpha, quad.imag_task.alpha)
    binary = classify_binary_complexified(z, y, RealGaussian(0.5), p)
    np.testing.assert_array_equal(binary.task.alpha, quad.real_task.alpha)
    q = rng.uniform(-3, 3, (30, 1)).astype(complex)
    np.testing.assert_array_equal(binary.predict(q), np.real(quad.predict(q)))
