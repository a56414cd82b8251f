"""Pure-Python and compiled kernels must agree to near machine precision."""

import math
import os
import subprocess
import sys

import numpy as np
import pytest

from renewal_ldp import _core

IMPLS = _core.implementations()

pytestmark = pytest.mark.skipif(
    len(IMPLS) < 2, reason="compiled backend not built; nothing to compare"
)


def _rng():
    return np.random.default_rng(20260816)


def _ref_logsumexp(x):
    x = x[x != -math.inf]
    if x.size == 0:
        return -math.inf
    m = float(np.max(x))
    return m + math.log(np.sum(np.exp(x - m)))


def test_logsumexp_parity():
    gen = _rng()
    for size in (1, 2, 17, 1000):
        x = gen.normal(0.0, 30.0, size=size)
        x[gen.random(size) < 0.2] = -math.inf
        x = np.ascontiguousarray(x)
        vals = {name: impl.logsumexp_arr(x) for name, impl in IMPLS.items()}
        ref = _ref_logsumexp(x.copy())
        for name, v in vals.items():
            if ref == -math.inf:
                assert v == -math.inf, name
            else:
                assert v == pytest.approx(ref, abs=1e-12), name


def test_logsumexp_all_neg_inf():
    x = np.full(5, -math.inf)
    for name, impl in IMPLS.items():
        assert impl.logsumexp_arr(x.copy()) == -math.inf, name


def test_logsumexp_accepts_read_only_input():
    x = np.array([0.0, 1.0, -math.inf])
    x.setflags(write=False)
    for name, impl in IMPLS.items():
        assert impl.logsumexp_arr(x) == pytest.approx(math.log(1 + math.e), abs=1e-12)


def test_renewal_logrec_parity():
    gen = _rng()
    for trial in range(8):
        s0 = int(gen.integers(1, 5))
        head = gen.normal(-1.0, 1.5, size=s0)
        head[gen.random(s0) < 0.25] = -math.inf
        head = np.ascontiguousarray(head)
        has_tail = bool(gen.random() < 0.5)
        u, r = float(gen.normal(-1, 1)), float(gen.uniform(-2.0, 0.2))
        T = int(gen.integers(1, 400))
        outs = {
            name: impl.renewal_logrec(head.copy(), T, has_tail, u, r)
            for name, impl in IMPLS.items()
        }
        pure, native = outs["pure"], outs["native"]
        finite = np.isfinite(pure)
        assert np.array_equal(finite, np.isfinite(native))
        assert np.allclose(pure[finite], native[finite], atol=1e-11, rtol=1e-12)


def test_free_log_conv_parity_and_reference():
    gen = _rng()
    T = 120
    ln_zc = np.ascontiguousarray(gen.normal(-2.0, 1.0, size=T + 1))
    ln_surv = np.ascontiguousarray(gen.normal(-3.0, 1.0, size=T + 1))
    ln_surv[10:] = np.minimum.accumulate(ln_surv[10:])  # survival decreases
    outs = {name: impl.free_log_conv(ln_zc.copy(), ln_surv.copy()) for name, impl in IMPLS.items()}
    for t in (0, 1, 7, 60, T):
        terms = [ln_surv[t]] + [ln_zc[tau] + ln_surv[t - tau] for tau in range(1, t + 1)]
        ref = _ref_logsumexp(np.array(terms))
        for name, out in outs.items():
            assert out[t] == pytest.approx(ref, abs=1e-11), (name, t)


def test_shift_logaddexp_1d_parity():
    gen = _rng()
    n = 64
    src = np.ascontiguousarray(gen.normal(0, 2, size=n))
    src.setflags(write=False)
    for shift in (0, 1, 5):
        for const in (-0.7, -math.inf):
            accs = {}
            for name, impl in IMPLS.items():
                acc = np.full(n, -math.inf)
                acc[::3] = 1.0
                impl.shift_logaddexp_1d(acc, src, shift, const)
                accs[name] = acc
            assert np.allclose(accs["pure"], accs["native"], atol=1e-12, equal_nan=True)


def test_shift_logaddexp_2d_parity():
    gen = _rng()
    shape = (12, 9)
    src = np.ascontiguousarray(gen.normal(0, 2, size=shape))
    src.setflags(write=False)
    for si, sj in ((0, 0), (2, 1), (3, 4)):
        accs = {}
        for name, impl in IMPLS.items():
            acc = np.full(shape, -math.inf)
            acc[::2, ::2] = 0.5
            impl.shift_logaddexp_2d(acc, src, si, sj, -1.2)
            accs[name] = acc
        assert np.allclose(accs["pure"], accs["native"], atol=1e-12)


def test_env_var_forces_pure_backend():
    code = "import renewal_ldp._core as c; print(c.BACKEND)"
    env = dict(os.environ, RENEWAL_LDP_PURE="1")
    out = subprocess.run(
        [sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True
    )
    assert out.stdout.strip() == "pure"
    if not os.environ.get("RENEWAL_LDP_PURE"):
        assert _core.BACKEND == "native"
