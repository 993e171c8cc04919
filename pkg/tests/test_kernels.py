import os
import subprocess
import sys

import numpy as np
import pytest

from memsdelay import kernels
from memsdelay.ddesolve import integrate
from memsdelay.model import SqueezeFilm, VoltageProfile

from .reference import DELTA, table2_params

try:
    kernels.get_kernel("cython")
    HAVE_EXT = True
except ImportError:
    HAVE_EXT = False

needs_ext = pytest.mark.skipif(not HAVE_EXT, reason="compiled extension not built")

CASES = [
    ("forced, no delay", table2_params(delta=DELTA), (0.99, 0.01), 0.05),
    ("forced, delayed", table2_params(delta=DELTA, d=1.0, g1=0.0, g2=-8.0), (0.99, 0.01), 1 / 32),
    ("squeeze, delayed", table2_params(d=3.0, damping=SqueezeFilm(3e-4)), (0.98, 0.0), 0.1),
    (
        "multi-harmonic",
        table2_params(d=0.7).with_(voltage=VoltageProfile(20.0, 0.2, ((1, 1.0, 0.3), (3, -0.5, 0.2)))),
        (0.99, 0.0),
        0.05,
    ),
    ("pull-in", table2_params(delta=DELTA, d=1.0, g1=0.0, g2=-8.0), (0.0625, 0.0092), 1 / 32),
]


@needs_ext
@pytest.mark.parametrize("name,params,hist,step", CASES, ids=[c[0] for c in CASES])
def test_backends_bitwise_identical(name, params, hist, step):
    a = integrate(params, hist, 30.0, step, backend="python")
    b = integrate(params, hist, 30.0, step, backend="cython")
    assert np.array_equal(a.t, b.t)
    assert np.array_equal(a.y, b.y)
    assert np.array_equal(a.dense.f, b.dense.f)
    assert (a.pullin is None) == (b.pullin is None)
    if a.pullin is not None:
        assert a.pullin == b.pullin


def test_environment_variable_forces_fallback():
    code = "from memsdelay import kernels; print(kernels.BACKEND)"
    env = dict(os.environ, MEMSDELAY_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.get_kernel("fortran")


@needs_ext
def test_compiled_backend_selected_by_default():
    assert kernels.BACKEND == "cython"
