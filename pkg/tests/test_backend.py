from __future__ import annotations

import os
import subprocess
import sys

import pytest

from pfnormal import _kernels_py
from pfnormal._backend import BACKEND

compiled = pytest.importorskip("pfnormal._kernels")

CASES = [
    ("carlson_rf", (0.3 + 0.1j, 1.2, 2.5 - 0.4j, 1e-15, 200)),
    ("carlson_rf", (0.0, 1.0, 2.0, 1e-15, 200)),
    ("agm", (1.0, 0.37, 1e-15, 200)),
    ("hyp2f1_halves", (0.42 + 0.05j, 1e-16, 5000)),
    ("pvi_rhs", (0.5 + 0.01j, 1.3, 0.4, 0.125, -0.125, 0.125, 0.375)),
]


@pytest.mark.parametrize("name,args", CASES)
def test_compiled_matches_python(name, args):
    a = complex(getattr(compiled, name)(*args))
    b = complex(getattr(_kernels_py, name)(*args))
    assert abs(a - b) <= 4e-16 * max(1.0, abs(b))


@pytest.mark.parametrize("module", [compiled, _kernels_py])
def test_kernel_errors_share_a_type(module):
    with pytest.raises(_kernels_py.KernelError):
        module.carlson_rf(0.0, 0.0, 1.0, 1e-15, 200)
    with pytest.raises(_kernels_py.KernelError):
        module.pvi_rhs(0.5, 0.0, 0.5, 0, 0, 0, 0)


def test_compiled_is_default():
    assert BACKEND == "compiled"


def test_env_forces_python_fallback():
    code = "from pfnormal._backend import BACKEND; from pfnormal.specfun import carlson_rf; print(BACKEND, carlson_rf(0, 1, 2).real)"
    r = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True,
                       env={**os.environ, "PFNORMAL_BACKEND": "python"})
    backend, value = r.stdout.split()
    assert backend == "python" and abs(float(value) - 1.3110287771460600) < 1e-14
