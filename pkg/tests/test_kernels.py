"""Backend twins: the compiled kernels and the numpy fallbacks must agree."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fingertip import _backend, _kernels_py
from fingertip.signals import VibrationTrace, envelope
from fingertip.vibro import DetectConfig, cluster_events
from oracles import brute_force_cluster

try:
    from fingertip import _kernels as _kernels_c
except ImportError:
    _kernels_c = None

BACKENDS = [("python", _kernels_py)] + (
    [("compiled", _kernels_c)] if _kernels_c is not None else []
)


def test_compiled_backend_is_active_when_built():
    if _kernels_c is not None:
        assert _backend.BACKEND == "compiled"


@pytest.mark.parametrize("name,impl", BACKENDS)
class TestKernels:
    def test_moving_rms_matches_direct_window_mean(self, name, impl):
        rng = np.random.default_rng(0)
        x = rng.uniform(-1, 1, 400)
        out = impl.moving_rms(x, 32)
        for i in (0, 5, 31, 32, 100, 399):
            window = x[max(0, i - 31) : i + 1]
            expected = np.sqrt(np.sum(window**2) / 32)
            assert out[i] == pytest.approx(expected, rel=1e-12)

    def test_moving_rms_window_one(self, name, impl):
        x = np.array([0.5, -0.25, 0.0])
        assert np.allclose(impl.moving_rms(x, 1), [0.5, 0.25, 0.0])

    def test_moving_rms_rejects_bad_window(self, name, impl):
        with pytest.raises(ValueError):
            impl.moving_rms(np.zeros(4), 0)

    def test_binary_runs(self, name, impl):
        starts, ends = impl.binary_runs(np.array([0, 1, 1, 0, 1, 0, 0, 1], dtype=np.uint8))
        assert starts.tolist() == [1, 4, 7]
        assert ends.tolist() == [3, 5, 8]

    def test_binary_runs_empty_and_full(self, name, impl):
        starts, ends = impl.binary_runs(np.zeros(5, dtype=np.uint8))
        assert starts.size == 0 and ends.size == 0
        starts, ends = impl.binary_runs(np.ones(5, dtype=np.uint8))
        assert starts.tolist() == [0] and ends.tolist() == [5]

    def test_merge_runs(self, name, impl):
        starts = np.array([0, 5, 20], dtype=np.int64)
        ends = np.array([3, 8, 22], dtype=np.int64)
        ms, me = impl.merge_runs(starts, ends, max_gap=3, min_length=3)
        assert ms.tolist() == [0] and me.tolist() == [8]

    def test_merge_runs_drop_after_merge(self, name, impl):
        # Two 1-sample runs merge into a length-3 run, which survives a
        # min_length of 3; unmerged they would both be dropped.
        ms, me = impl.merge_runs(
            np.array([0, 2], dtype=np.int64),
            np.array([1, 3], dtype=np.int64),
            max_gap=2,
            min_length=3,
        )
        assert ms.tolist() == [0] and me.tolist() == [3]


@pytest.mark.skipif(_kernels_c is None, reason="compiled kernels not built")
class TestBackendAgreement:
    def test_moving_rms_long_stream(self):
        rng = np.random.default_rng(99)
        x = rng.uniform(-1, 1, 300_000)
        x[::97] = 0.0  # exercise the exact-zero paths
        a = _kernels_c.moving_rms(x, 256)
        b = _kernels_py.moving_rms(x, 256)
        np.testing.assert_allclose(a, b, rtol=1e-9, atol=1e-15)

    @given(
        bits=st.lists(st.integers(0, 1), max_size=200),
        gap=st.integers(0, 10),
        min_len=st.integers(0, 10),
    )
    @settings(deadline=None, max_examples=200)
    def test_run_pipeline_identical(self, bits, gap, min_len):
        mask = np.array(bits, dtype=np.uint8)
        sc, ec = _kernels_c.binary_runs(mask)
        sp, ep = _kernels_py.binary_runs(mask)
        assert sc.tolist() == sp.tolist() and ec.tolist() == ep.tolist()
        mc = _kernels_c.merge_runs(sc, ec, gap, min_len)
        mp = _kernels_py.merge_runs(sp, ep, gap, min_len)
        assert mc[0].tolist() == mp[0].tolist() and mc[1].tolist() == mp[1].tolist()


class TestClusterAgainstOracle:
    def check(self, bits, fs=10.0, gap_s=0.25, min_s=0.25):
        cfg = DetectConfig(tau=0.0, merge_gap_s=gap_s, min_duration_s=min_s)
        events = cluster_events(np.asarray(bits, dtype=np.uint8), fs, cfg)
        expected = brute_force_cluster(bits, fs, gap_s, min_s)
        assert [(e.onset, e.offset) for e in events] == expected

    def test_exhaustive_short_strings(self):
        for n in range(0, 13):
            for value in range(1 << n):
                bits = [(value >> i) & 1 for i in range(n)]
                self.check(bits)

    @given(st.lists(st.integers(0, 1), max_size=400))
    @settings(deadline=None, max_examples=300)
    def test_random_strings(self, bits):
        self.check(bits)
        self.check(bits, fs=44100.0, gap_s=0.0001, min_s=0.00005)

    def test_fractional_threshold_tie(self):
        # 441 samples at 44.1 kHz is exactly 10 ms; a 10 ms merge_gap must
        # not bridge it (the comparison is strict).
        bits = np.zeros(2000, dtype=np.uint8)
        bits[0:500] = 1
        bits[941:1500] = 1
        cfg = DetectConfig(tau=0.0, merge_gap_s=0.010, min_duration_s=0.0)
        events = cluster_events(bits, 44100.0, cfg)
        assert len(events) == 2
        cfg = DetectConfig(tau=0.0, merge_gap_s=0.0101, min_duration_s=0.0)
        assert len(cluster_events(bits, 44100.0, cfg)) == 1


def test_envelope_uses_selected_backend():
    rng = np.random.default_rng(5)
    trace = VibrationTrace(rng.uniform(-1, 1, 5000))
    env = envelope(trace, 128)
    direct = _backend.moving_rms(trace.samples, 128)
    assert np.array_equal(env, direct)
