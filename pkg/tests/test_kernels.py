"""Hot kernels: accuracy against mpmath and agreement between backends."""

import math

import mpmath
import numpy as np
import pytest

from bds import _kernels_py as py
from bds import kernels

BACKENDS = ["python"] + (["cython"] if kernels._c is not None else [])


def test_active_backend_is_compiled_when_built():
    assert kernels.BACKEND in ("cython", "python")


@pytest.mark.parametrize("m", [0.5, 1.0, 3.5, 15.0, 15.5, 40.0, 1e3, 1e7])
def test_stirlerr_matches_mpmath(m):
    mpmath.mp.dps = 40
    exact = mpmath.loggamma(m + 1) - ((m + 0.5) * mpmath.log(m) - m + 0.5 * mpmath.log(2 * mpmath.pi))
    assert float(py.stirlerr(np.array([m]))[0]) == pytest.approx(float(exact), rel=1e-12, abs=1e-17)


@pytest.mark.parametrize("name", BACKENDS)
@pytest.mark.parametrize("c,gx", [(0.5, 0.3), (4.0, 1.0), (64.0, 2.0), (2048.0, 0.5), (1.5, 40.0)])
def test_log_nb_terms_against_mpmath(name, c, gx):
    be = kernels.get_backend(name)
    ks = [0, 1, 7, 50, 400]
    vals = be.log_nb_terms(c, gx, 0, max(ks))
    mpmath.mp.dps = 40
    for k in ks:
        exact = (mpmath.loggamma(c + k) - mpmath.loggamma(k + 1) - mpmath.loggamma(c)
                 + k * mpmath.log(gx) - (c + k) * mpmath.log(1 + gx))
        assert vals[k] == pytest.approx(float(exact), rel=1e-13, abs=1e-12)


@pytest.mark.parametrize("name", BACKENDS)
def test_beta_rule_integrates_density_to_one(name):
    be = kernels.get_backend(name)
    ks = np.array([1.0, 2.0, 5.0, 40.0, 800.0])
    for c in (0.5, 3.0, 64.0, 700.0):
        t, w, owner = be.beta_rule(ks, c, 1.0, 1)
        mass = np.bincount(owner, weights=w, minlength=ks.size)
        assert np.max(np.abs(mass - 1)) < 1e-12
        assert np.all(t >= 0) and np.all(np.isfinite(t))


@pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled kernels not built")
def test_backends_agree():
    a, b = kernels.get_backend("python"), kernels.get_backend("cython")
    ks = np.arange(1, 300, dtype=float)
    for c, g, level in [(0.5, 2.0, 0), (8.0, 1.0, 1), (256.0, 0.5, 2)]:
        ta, wa, oa = a.beta_rule(ks, c, g, level)
        tb, wb, ob = b.beta_rule(ks, c, g, level)
        assert np.array_equal(oa, ob)
        np.testing.assert_allclose(tb, ta, rtol=1e-14, atol=0)
        np.testing.assert_allclose(wb, wa, rtol=1e-13, atol=1e-17)
    np.testing.assert_allclose(b.log_nb_terms(33.0, 1.5, 0, 500), a.log_nb_terms(33.0, 1.5, 0, 500),
                               rtol=1e-14, atol=1e-13)


def test_pure_python_switch():
    import subprocess
    import sys
    out = subprocess.run([sys.executable, "-c", "from bds import kernels; print(kernels.BACKEND)"],
                         capture_output=True, text=True, env={**__import__("os").environ, "BDS_PURE_PYTHON": "1"})
    assert out.stdout.strip() == "python"
