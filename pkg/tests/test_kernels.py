import os
import subprocess
import sys

import numpy as np
import pytest

from spikemram import kernels
from spikemram.codec import InputVector
from spikemram.config import MacroConfig
from spikemram.device import program_array
from spikemram.engine import _spike_arrays

compiled = pytest.importorskip("spikemram._kernel", reason="compiled kernel not built")


@pytest.mark.parametrize("nonideal", [False, True])
def test_backends_agree(nonideal):
    cfg = MacroConfig()
    rng = np.random.default_rng(3)
    for _ in range(20):
        w = rng.integers(0, 4, (128, 128))
        d = rng.integers(0, 256, 128)
        t0 = rng.integers(0, 100, 128) * 1e-10
        arr = program_array(w, cfg)
        ev = _spike_arrays(InputVector.from_digital(d, cfg.timing, t0))
        a = compiled.accumulate(*ev, arr.conductances, nonideal, cfg.v_read, cfg.c_rt)
        b = kernels.accumulate_py(*ev, arr.conductances, nonideal, cfg.v_read, cfg.c_rt)
        if nonideal:
            np.testing.assert_allclose(a, b, rtol=1e-14, atol=0)
        else:
            assert np.array_equal(a, b)


def test_empty_event_list():
    G = np.ones((2, 3))
    e = np.zeros(0, np.int64)
    out = compiled.accumulate(e, np.zeros(0, np.int8), e, G, False, 0.1, 2e-13)
    assert not out.any() and out.shape == (3,)


@pytest.mark.skipif(os.environ.get("SPIKEMRAM_PURE_PYTHON", "") not in ("", "0"),
                    reason="fallback forced by environment")
def test_default_backend_is_compiled():
    assert kernels.BACKEND == "cython"


def test_env_forces_fallback():
    code = "from spikemram import kernels; print(kernels.BACKEND)"
    env = dict(os.environ, SPIKEMRAM_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True)
    assert out.stdout.strip() == "python"
