import json
import os
import subprocess
import sys

import numpy as np
import pytest

from shflab import _kernels as K

try:
    NB = dict(zip(("wedge", "contract", "compound", "hitchin", "derivation"), K._make_numba_kernels()))
except ImportError:  # pragma: no cover
    NB = None

needs_numba = pytest.mark.skipif(NB is None, reason="numba not installed")


def backend_in_subprocess(flag):
    env = dict(os.environ)
    env.pop("SHFLAB_DISABLE_NUMBA", None)
    if flag is not None:
        env["SHFLAB_DISABLE_NUMBA"] = flag
    out = subprocess.run([sys.executable, "-c", "import shflab; print(shflab.backend())"],
                         capture_output=True, text=True, env=env, check=True)
    return out.stdout.strip()


@pytest.mark.parametrize("flag", ["1", "true", "yes"])
def test_flag_selects_numpy(flag):
    assert backend_in_subprocess(flag) == "numpy"


@needs_numba
@pytest.mark.parametrize("flag", [None, "0", ""])
def test_numba_by_default(flag):
    assert backend_in_subprocess(flag) == "numba"


@needs_numba
@pytest.mark.parametrize("seed", range(5))
def test_kernels_agree(seed):
    rng = np.random.default_rng(seed)
    for (p, q), tab in K.WEDGE_TABLES.items():
        a, b = rng.normal(size=K.SIZES[p]), rng.normal(size=K.SIZES[q])
        n = K.SIZES[p + q]
        assert np.allclose(K.wedge_np(a, b, *tab, n), NB["wedge"](a, b, *tab, n), atol=1e-12)
    v = rng.normal(size=6)
    for k, tab in K.CONTRACT_TABLES.items():
        a = rng.normal(size=K.SIZES[k])
        n = K.SIZES[k - 1]
        assert np.allclose(K.contract_np(v, a, *tab, n), NB["contract"](v, a, *tab, n), atol=1e-12)
    E = rng.normal(size=(6, 6))
    for k in range(7):
        c = K.COMBO_ARRAYS[k]
        assert np.allclose(K.compound_np(E, c, c), NB["compound"](E, c, c), atol=1e-10)
    phi = rng.normal(size=20)
    assert np.allclose(K.hitchin_np(phi, *K.HITCHIN_TABLE), NB["hitchin"](phi, *K.HITCHIN_TABLE), atol=1e-10)
    for k, tab in K.DERIVATION_TABLES.items():
        n = K.SIZES[k]
        assert np.allclose(K.derivation_np(E, *tab, n), NB["derivation"](E, *tab, n), atol=1e-12)


def test_flow_agrees_across_backends():
    code = ("from shflab import catalog, flow;"
            "d = flow.FlowData.from_entry(catalog.get('g6_54'));"
            "tr = flow.integrate_rk4(d.omega, d.phi0, d.algebra, 0.01, 1e-3);"
            "import json; print(json.dumps(tr.coeffs[-1].tolist()))")
    outs = []
    for flag in ("1", "0"):
        env = dict(os.environ, SHFLAB_DISABLE_NUMBA=flag)
        r = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, env=env, check=True)
        outs.append(np.array(json.loads(r.stdout)))
    assert np.allclose(outs[0], outs[1], atol=1e-12)
