import os
import subprocess
import sys

import numpy as np
import pytest

from mvk import backends


def test_backend_name_valid():
    assert backends.backend_name() in ("numba", "numpy")


def test_gaussian_cross_agrees_with_numpy_reference():
    rng = np.random.default_rng(0)
    X = rng.standard_normal((30, 3))
    Y = rng.standard_normal((20, 3))
    K = backends.gaussian_cross(X, Y, 1.7)
    ref = backends._gaussian_cross_numpy(
        np.ascontiguousarray(X), np.ascontiguousarray(Y), 1.7
    )
    assert K.shape == (30, 20)
    assert np.allclose(K, ref, rtol=1e-12, atol=1e-14)


def test_polynomial_cross_agrees_with_numpy_reference():
    rng = np.random.default_rng(1)
    X = rng.standard_normal((12, 2))
    Y = rng.standard_normal((9, 2))
    K = backends.polynomial_cross(X, Y, 3)
    ref = backends._polynomial_cross_numpy(
        np.ascontiguousarray(X), np.ascontiguousarray(Y), 3
    )
    assert np.allclose(K, ref, rtol=1e-12, atol=1e-14)


def test_gaussian_cross_basic_values():
    X = np.array([[0.0], [1.0]])
    K = backends.gaussian_cross(X, X, 2.0)
    assert K[0, 0] == pytest.approx(1.0)
    assert K[0, 1] == pytest.approx(np.exp(-2.0))
    assert np.allclose(K, K.T)


def _run_with_backend(backend):
    code = (
        "import numpy as np\n"
        "from mvk import backends\n"
        "print(backends.backend_name())\n"
        "X = np.linspace(0, 1, 5)[:, None]\n"
        "K = backends.gaussian_cross(X, X, 1.0)\n"
        "print(repr(K.tolist()))\n"
    )
    env = dict(os.environ, MVK_BACKEND=backend)
    out = subprocess.run(
        [sys.executable, "-c", code], env=env, capture_output=True, text=True
    )
    assert out.returncode == 0, out.stderr
    name, values = out.stdout.strip().split("\n")
    return name, values


def test_env_flag_selects_backend():
    name, numpy_values = _run_with_backend("numpy")
    assert name == "numpy"
    name, numba_values = _run_with_backend("numba")
    assert name in ("numba", "numpy")  # numba may be absent
    a = np.array(eval(numpy_values))
    b = np.array(eval(numba_values))
    assert np.allclose(a, b, rtol=1e-14, atol=1e-15)


def test_invalid_backend_rejected():
    env = dict(os.environ, MVK_BACKEND="cuda")
    out = subprocess.run(
        [sys.executable, "-c", "import mvk.backends"],
        env=env,
        capture_output=True,
        text=True,
    )
    assert out.returncode != 0
    assert "MVK_BACKEND" in out.stderr
