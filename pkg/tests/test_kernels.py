from __future__ import annotations

import numpy as np
import pytest

from wbflux import kernels

compiled = pytest.mark.skipif(kernels.compiled_advance is None, reason="compiled extension not built")


def inputs(scheme, flux_kind, n=60, steps=200, seed=0):
    rng = np.random.default_rng(seed)
    u = rng.uniform(-1.5, 1.5, n)
    z = np.concatenate([[0.0], rng.uniform(0, 1, n), [0.0]])
    z[0], z[-1] = z[1], z[-2]
    slopes = rng.normal(0, 2, n)
    gl = rng.uniform(-1, 1, steps)
    gr = rng.uniform(-1, 1, steps)
    return dict(
        u=u, ghost_left=gl, ghost_right=gr, z_ext=z, slopes=slopes, lam=0.2, dt=0.002,
        flux_kind=flux_kind, speed=-0.7, b0=0.3, b1=1.0, scheme=scheme, blowup=1e6,
        max_abs=np.zeros(steps),
    )


def call(fn, args):
    args = {k: (v.copy() if isinstance(v, np.ndarray) else v) for k, v in args.items()}
    done = fn(**args)
    return done, args["u"], args["max_abs"]


@compiled
@pytest.mark.parametrize("scheme", [kernels.SCHEME_WELL_BALANCED, kernels.SCHEME_STANDARD])
@pytest.mark.parametrize("flux_kind", [kernels.FLUX_BURGERS, kernels.FLUX_LINEAR])
def test_backends_bitwise_equal(scheme, flux_kind):
    args = inputs(scheme, flux_kind)
    d1, u1, m1 = call(kernels.compiled_advance, args)
    d2, u2, m2 = call(kernels.python_advance, args)
    assert d1 == d2 == 200
    np.testing.assert_array_equal(u1, u2)
    np.testing.assert_array_equal(m1, m2)


@pytest.mark.parametrize("fn_name", ["python_advance", "compiled_advance"])
def test_blowup_stops_early(fn_name):
    fn = getattr(kernels, fn_name)
    if fn is None:
        pytest.skip("compiled extension not built")
    args = inputs(kernels.SCHEME_STANDARD, kernels.FLUX_BURGERS)
    args["lam"] = 50.0
    args["blowup"] = 10.0
    done, u, _ = call(fn, args)
    assert done < 200
    assert np.max(np.abs(u)) <= 10.0


def test_backend_name():
    assert kernels.BACKEND in ("cython", "python")
    assert (kernels.BACKEND == "cython") == (kernels.advance is kernels.compiled_advance)
