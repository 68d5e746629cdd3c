"""Synthetic sensor models: strain response, rigs, and vibration synthesis."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fingertip.errors import ConfigurationError
from fingertip.signals import envelope
from fingertip.sim import (
    BAND_EDGES_HZ,
    CONTENT_CLASSES,
    FingertipModel,
    PlanarForce,
    RigTrajectory,
    default_fingertip_model,
    default_material_profiles,
    simulate_indentation,
    synthesize_cup_slide,
    synthesize_shaking,
    synthesize_sliding,
)
from fingertip.signals import VIBRATION_RATE_HZ, stft


def quiet_model(**overrides):
    params = dict(noise_sigma=0.0, hysteresis_ratio=0.0, gain_modulation=0.0)
    params.update(overrides)
    return default_fingertip_model(**params)


class TestPlanarForce:
    def test_magnitude(self):
        assert PlanarForce(3.0, 4.0).magnitude == pytest.approx(5.0)

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            PlanarForce(np.inf, 0.0)


class TestFingertipModel:
    def test_invariant_validation(self):
        with pytest.raises(ValueError):
            default_fingertip_model(stiffness=0.0)
        with pytest.raises(ValueError):
            default_fingertip_model(hysteresis_ratio=0.3)
        with pytest.raises(ValueError):
            FingertipModel(channel_gains=np.zeros((3, 2)))

    def test_response_is_linear_without_modulation(self):
        model = quiet_model()
        f = np.array([[1.0, 0.5], [2.0, 1.0]])
        r = model.response(f)
        assert np.allclose(r[1], 2 * r[0])

    def test_modulated_response_linear_at_fixed_angle(self):
        model = default_fingertip_model(noise_sigma=0.0)
        direction = np.array([np.cos(0.4), np.sin(0.4)])
        forces = np.outer([1.0, 2.0, 3.0], direction)
        r = model.response(forces)
        assert np.allclose(r[1], 2 * r[0], rtol=1e-12)
        assert np.allclose(r[2], 3 * r[0], rtol=1e-12)

    def test_modulation_changes_gain_across_angles(self):
        model = default_fingertip_model(noise_sigma=0.0)
        base = quiet_model(gain_modulation=0.0)
        forces = np.array([[np.cos(a), np.sin(a)] for a in (-0.6, 0.0, 0.6)])
        modulated = model.response(forces)
        plain = base.response(forces)
        assert not np.allclose(modulated, plain)


class TestSimulateIndentation:
    def test_initial_rest_is_noise_only(self):
        model = default_fingertip_model()
        run = simulate_indentation(model, RigTrajectory(angle_deg=20.0, dwell_s=1.0), seed=3)
        rest = run.strain.channels[run.branch == 0]
        assert np.all(run.forces[run.branch == 0] == 0.0)
        assert np.abs(rest).max() < 6 * model.noise_sigma

    def test_force_definition(self):
        model = quiet_model(stiffness=1.0)
        run = simulate_indentation(
            model, RigTrajectory(angle_deg=0.0, step_size_mm=3.0, max_displacement_mm=3.0, dwell_s=0.2), 0
        )
        loading = run.forces[run.branch == 1]
        assert np.allclose(loading[:, 0], 3.0)
        assert np.allclose(loading[:, 1], 0.0)

    def test_paper_grid_counts(self):
        traj = RigTrajectory(dwell_s=1.0)
        depths, branch = traj.depth_sequence()
        assert len(depths) == 41  # rest + 20 in + 20 out
        assert (branch == 1).sum() == 20 and (branch == -1).sum() == 20
        assert depths.max() == 30.0 and depths[-1] == 0.0

    def test_strain_exactly_linear_in_force_when_clean(self):
        model = quiet_model(gain_modulation=0.2)  # modulation alone keeps linearity per angle
        run = simulate_indentation(model, RigTrajectory(angle_deg=35.0, dwell_s=0.2), 0)
        magnitude = np.linalg.norm(run.forces, axis=1)
        for ch in range(4):
            coeffs = np.polyfit(magnitude, run.strain.channels[:, ch], 1)
            residual = run.strain.channels[:, ch] - np.polyval(coeffs, magnitude)
            assert np.abs(residual).max() < 1e-9

    def test_hysteresis_offset_is_exact(self):
        model = default_fingertip_model(noise_sigma=0.0, hysteresis_ratio=0.1)
        run = simulate_indentation(model, RigTrajectory(angle_deg=-10.0, dwell_s=0.2), 0)
        peak = model.response(
            run.forces[np.argmax(np.linalg.norm(run.forces, axis=1))][None, :]
        )[0]
        for depth in (1.5, 15.0, 28.5):
            loading = run.strain.channels[(run.depths_mm == depth) & (run.branch == 1)]
            unloading = run.strain.channels[(run.depths_mm == depth) & (run.branch == -1)]
            if len(loading) and len(unloading):
                gap = unloading[0] - loading[0]
                assert np.allclose(gap, 0.1 * peak, rtol=1e-12)

    def test_determinism(self):
        model = default_fingertip_model()
        a = simulate_indentation(model, RigTrajectory(dwell_s=0.5), seed=9)
        b = simulate_indentation(model, RigTrajectory(dwell_s=0.5), seed=9)
        assert np.array_equal(a.strain.channels, b.strain.channels)
        c = simulate_indentation(model, RigTrajectory(dwell_s=0.5), seed=10)
        assert not np.array_equal(a.strain.channels, c.strain.channels)


class TestSynthesizeSliding:
    def test_zero_profile_gives_silence(self):
        profiles = default_material_profiles()
        silent = profiles["tpu"].__class__(
            name="silent", band_gains=np.zeros(8), impulse_rate=0.0, impulse_jitter=0.0
        )
        trace = synthesize_sliding(silent, 0.2, 20.0, seed=1)
        assert np.all(trace.samples == 0.0)

    def test_deterministic(self):
        profile = default_material_profiles()["coarse_fabric"]
        a = synthesize_sliding(profile, 0.3, 20.0, seed=5)
        b = synthesize_sliding(profile, 0.3, 20.0, seed=5)
        assert np.array_equal(a.samples, b.samples)

    def test_profiles_separate_by_band_energy(self):
        """Every profile pair differs by >= 3 dB in some analysis band."""
        profiles = default_material_profiles()
        energies = {}
        for name, profile in profiles.items():
            trace = synthesize_sliding(profile, 0.8, 20.0, seed=21)
            spec = stft(trace, 256, 128)
            freqs = spec.bin_frequencies()
            band_power = []
            for lo, hi in zip(BAND_EDGES_HZ[:-1], BAND_EDGES_HZ[1:]):
                mask = (freqs >= lo) & (freqs < hi)
                band_power.append(np.mean(spec.magnitudes[:, mask] ** 2))
            energies[name] = np.asarray(band_power)
        names = sorted(profiles)
        for i, a in enumerate(names):
            for b in names[i + 1 :]:
                ratio_db = 10 * np.abs(np.log10(energies[a] / energies[b]))
                assert ratio_db.max() >= 3.0, (a, b, ratio_db)


class TestSynthesizeCupSlide:
    def test_edge_count_and_onsets(self):
        trace, z = synthesize_cup_slide([5.0, 10.0, 15.0], 5.0, 20.0, 0.01, seed=2)
        assert trace.duration == pytest.approx(4.0)
        assert z.z_mm[0] == pytest.approx(20.0)
        for onset_s in (1.0, 2.0, 3.0):
            k = round(onset_s * VIBRATION_RATE_HZ)
            # Burst onset within one sample of the crossing time.
            assert np.abs(trace.samples[k : k + 40]).max() > 0.3
            assert np.abs(trace.samples[k - 200 : k - 1]).max() < 0.05

    def test_no_edges_is_noise_floor(self):
        trace, _ = synthesize_cup_slide([], 5.0, 21.0, 0.01, seed=4)
        assert np.abs(trace.samples).max() <= 0.01

    def test_edge_outside_travel_rejected(self):
        with pytest.raises(ConfigurationError):
            synthesize_cup_slide([25.0], 5.0, 21.0, 0.01, seed=0)

    def test_non_increasing_edges_rejected(self):
        with pytest.raises(ConfigurationError):
            synthesize_cup_slide([10.0, 5.0], 5.0, 21.0, 0.01, seed=0)

    def test_z_spans_trace(self):
        trace, z = synthesize_cup_slide([7.0], 5.0, 21.0, 0.01, seed=0)
        assert z.times[0] <= trace.start_time
        assert z.times[-1] >= trace.start_time + trace.duration

    @given(
        edges=st.lists(
            st.floats(min_value=0.5, max_value=20.5), min_size=0, max_size=6, unique=True
        ),
        seed=st.integers(0, 10_000),
    )
    @settings(deadline=None, max_examples=25)
    def test_burst_count_equals_edge_count(self, edges, seed):
        from fingertip.vibro import DetectConfig, binarize, cluster_events

        edges = sorted(edges)
        if any(b - a < 1.0 for a, b in zip(edges, edges[1:])):
            return  # closer than the burst length; merging is legitimate there
        trace, _ = synthesize_cup_slide(edges, 5.0, 21.0, 0.01, seed=seed)
        env = envelope(trace, 256)
        cfg = DetectConfig(tau=0.06, merge_gap_s=0.02, min_duration_s=0.004)
        events = cluster_events(binarize(env, 0.06), trace.sample_rate, cfg)
        assert len(events) == len(edges)


class TestSynthesizeShaking:
    def test_unknown_content_rejected(self):
        with pytest.raises(ConfigurationError):
            synthesize_shaking("marbles", 1.0, 1.0, 0)

    def test_empty_stays_at_noise_floor(self):
        trace = synthesize_shaking("empty", 5.6, 0.67, seed=1)
        env = envelope(trace, 256)
        assert env.max() <= 2 * 0.004

    def test_screws_produce_expected_event_count(self):
        from fingertip.vibro import DetectConfig, binarize, cluster_events

        trace = synthesize_shaking("screws", 5.6, 0.67, seed=2)
        env = envelope(trace, 256)
        cfg = DetectConfig(tau=0.02, merge_gap_s=0.08, min_duration_s=0.0005)
        events = cluster_events(binarize(env, 0.02), trace.sample_rate, cfg)
        assert len(events) >= 7

    def test_deterministic_per_class(self):
        for content in CONTENT_CLASSES:
            a = synthesize_shaking(content, 2.0, 0.67, seed=6)
            b = synthesize_shaking(content, 2.0, 0.67, seed=6)
            assert np.array_equal(a.samples, b.samples)

    def test_classes_differ(self):
        a = synthesize_shaking("screws", 2.0, 0.67, seed=6)
        b = synthesize_shaking("rubber_bands", 2.0, 0.67, seed=6)
        assert not np.array_equal(a.samples, b.samples)
