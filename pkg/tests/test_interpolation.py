import numpy as np
import pytest

from mvk.interpolation import (
    ConditioningError,
    KernelMismatchError,
    NativeSpanFunction,
    fit,
    load_model,
    native_norm_sq,
    residual_norm_sq,
    save_model,
)
from mvk.kernels import PointSet, ScalarKernel, SeparableKernel


def gaussian_kernel(shapes=(1.0, 2.0)):
    Q1 = np.array([[2.0, 1.0], [1.0, 2.0]])
    Q2 = np.array([[1.0, 0.0], [0.0, 0.5]])
    return SeparableKernel.create(
        [
            (ScalarKernel.gaussian(shapes[0]), Q1),
            (ScalarKernel.gaussian(shapes[1]), Q2),
        ]
    )


def polynomial_kernel():
    return SeparableKernel.create(
        [
            (ScalarKernel.polynomial(1), np.eye(2)),
            (ScalarKernel.polynomial(2), np.eye(2)),
        ]
    )


def test_fit_exact_on_centers_cholesky():
    k = gaussian_kernel()
    X = PointSet(np.linspace(-1, 1, 8)[:, None])
    rng = np.random.default_rng(0)
    F = rng.standard_normal((8, 2))
    s = fit(k, X, F)
    assert s.solver_info["path"] == "cholesky"
    assert s.solver_info["rank_used"] == 16
    assert np.allclose(s.evaluate_many(X.points), F, atol=1e-10)
    # scalar evaluation agrees with the batch path
    assert np.allclose(s(X.points[3]), F[3], atol=1e-10)


def test_fit_pseudo_inverse_path():
    k = polynomial_kernel()
    X = PointSet(np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]))
    # target inside the native space: a kernel translate
    F = np.stack([k(x, np.array([0.5, 0.5]))[:, 0] for x in X.points])
    s = fit(k, X, F)
    assert s.solver_info["path"] == "pseudo_inverse"
    assert s.solver_info["rank_used"] <= 6
    assert np.allclose(s.evaluate_many(X.points), F, atol=1e-10)


def test_fit_shape_validation():
    k = gaussian_kernel()
    X = PointSet(np.array([[0.0], [1.0]]))
    with pytest.raises(ValueError):
        fit(k, X, np.zeros((3, 2)))
    with pytest.raises(ValueError):
        fit(k, X, np.zeros((2, 3)))


def test_fit_empty_centers():
    k = gaussian_kernel()
    s = fit(k, PointSet([], d=1), np.zeros((0, 2)))
    assert s.solver_info["path"] == "empty"
    assert np.array_equal(s(np.array([0.3])), np.zeros(2))
    assert s.evaluate_many(np.array([[0.3], [0.4]])).shape == (2, 2)


def ill_conditioned_problem():
    # wide Gaussian on many close 1-d points: Cholesky breaks down
    k = SeparableKernel.create([(ScalarKernel.gaussian(0.05), np.eye(2))])
    X = PointSet(np.linspace(-1, 1, 40)[:, None])
    rng = np.random.default_rng(1)
    return k, X, rng.standard_normal((40, 2))


def test_fit_conditioning_error_and_fallback():
    k, X, F = ill_conditioned_problem()
    with pytest.raises(ConditioningError) as exc:
        fit(k, X, F)
    assert exc.value.lam_min is not None
    s = fit(k, X, F, fallback_to_pinv=True)
    assert s.solver_info["path"] == "lu_fallback"
    assert s.coeffs.shape == (80,)


def test_native_norm_of_single_translate():
    k = gaussian_kernel()
    y = PointSet(np.array([[0.25]]))
    alpha = np.array([[1.0, -2.0]])
    f = NativeSpanFunction(k, y, alpha)
    # ||k(.,y) a||^2 = a^T k(y,y) a
    expected = alpha[0] @ k(y.points[0], y.points[0]) @ alpha[0]
    assert native_norm_sq(f) == pytest.approx(expected)


def test_native_span_evaluation():
    k = gaussian_kernel()
    sites = PointSet(np.array([[0.0], [0.6]]))
    w = np.array([[1.0, 0.0], [0.0, 1.0]])
    f = NativeSpanFunction(k, sites, w)
    x = np.array([0.3])
    expected = k(x, sites.points[0]) @ w[0] + k(x, sites.points[1]) @ w[1]
    assert np.allclose(f(x), expected)
    assert np.allclose(f.evaluate_many(x[None, :])[0], expected)


def test_residual_norm_pythagoras():
    # residual^2 == ||f||^2 - ||s||^2 for the interpolation projection
    k = gaussian_kernel()
    sites = PointSet(np.array([[0.0], [0.6], [-0.4]]))
    rng = np.random.default_rng(2)
    f = NativeSpanFunction(k, sites, rng.standard_normal((3, 2)))
    X = PointSet(np.array([[-0.5], [0.5]]))
    F = np.stack([f(x) for x in X.points])
    s = fit(k, X, F)
    r2 = residual_norm_sq(f, s)
    s2 = float(s.coeffs @ k.gramian(X) @ s.coeffs)
    assert r2 == pytest.approx(native_norm_sq(f) - s2, rel=1e-8)
    assert r2 >= 0.0


def test_residual_norm_zero_when_centers_contain_sites():
    k = gaussian_kernel()
    sites = PointSet(np.array([[0.0], [0.6]]))
    rng = np.random.default_rng(3)
    f = NativeSpanFunction(k, sites, rng.standard_normal((2, 2)))
    X = PointSet(np.array([[0.0], [0.6], [1.0]]))
    F = np.stack([f(x) for x in X.points])
    s = fit(k, X, F)
    assert residual_norm_sq(f, s) == pytest.approx(0.0, abs=1e-10)


def test_residual_norm_kernel_mismatch():
    k1, k2 = gaussian_kernel(), gaussian_kernel(shapes=(1.0, 3.0))
    sites = PointSet(np.array([[0.0]]))
    f = NativeSpanFunction(k1, sites, np.ones((1, 2)))
    s = fit(k2, sites, np.ones((1, 2)))
    with pytest.raises(KernelMismatchError):
        residual_norm_sq(f, s)


def test_model_roundtrip(tmp_path):
    k = gaussian_kernel()
    X = PointSet(np.linspace(-1, 1, 5)[:, None])
    rng = np.random.default_rng(4)
    s = fit(k, X, rng.standard_normal((5, 2)))
    path = tmp_path / "model.json"
    save_model(s, path)
    s2 = load_model(path)
    assert np.array_equal(s2.coeffs, s.coeffs)
    assert np.array_equal(s2.centers.points, s.centers.points)
    assert s2.solver_info["path"] == s.solver_info["path"]
    xq = np.array([[0.123]])
    assert np.array_equal(s2.evaluate_many(xq), s.evaluate_many(xq))


def test_load_model_rejects_other_files(tmp_path):
    path = tmp_path / "other.json"
    path.write_text('{"format": "something-else"}')
    with pytest.raises(ValueError):
        load_model(path)


def test_coeff_blocks_layout():
    k = gaussian_kernel()
    X = PointSet(np.array([[0.0], [1.0]]))
    s = fit(k, X, np.array([[1.0, 2.0], [3.0, 4.0]]))
    B = s.coeff_blocks()
    assert B.shape == (2, 2)
    assert np.array_equal(B.reshape(-1), s.coeffs)
