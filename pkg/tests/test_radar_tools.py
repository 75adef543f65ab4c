import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_complex
from radcom.model import SystemConfig
from radcom.radar_tools import (
    WindowSpec,
    chirp_reference,
    mainlobe_mask,
    peak_sidelobe_db,
    pulse_compress,
    sidelobe_energy,
    taylor_window,
)

RECT = WindowSpec(kind="rect")


def taylor_reference(length, nbar, sll_db, dps=40):
    """Taylor taper from its cosine-series coefficients, in arbitrary precision."""
    with mp.workdps(dps):
        a = mp.acosh(mp.power(10, mp.mpf(-sll_db) / 20)) / mp.pi
        sigma2 = mp.mpf(nbar) ** 2 / (a**2 + (nbar - mp.mpf(1) / 2) ** 2)
        coeffs = []
        for m in range(1, nbar):
            num = mp.mpf(1)
            den = mp.mpf(1)
            for n in range(1, nbar):
                num *= 1 - mp.mpf(m) ** 2 / (sigma2 * (a**2 + (n - mp.mpf(1) / 2) ** 2))
                if n != m:
                    den *= 1 - mp.mpf(m) ** 2 / mp.mpf(n) ** 2
            coeffs.append((-1) ** (m + 1) * num / (2 * den))
        w = []
        for i in range(length):
            pos = (i - mp.mpf(length) / 2 + mp.mpf(1) / 2) / length
            w.append(1 + 2 * sum(f * mp.cos(2 * mp.pi * m * pos) for m, f in enumerate(coeffs, start=1)))
        peak = max(w)
        return np.array([float(v / peak) for v in w])


class TestChirp:
    def test_constant_modulus(self, cfg):
        np.testing.assert_allclose(np.abs(chirp_reference(cfg)), np.sqrt(cfg.element_power), atol=1e-15)

    @pytest.mark.parametrize("n,l", [(4, 8), (16, 32), (16, 20), (5, 5)])
    def test_orthogonal_rows(self, n, l):
        cfg = SystemConfig(n_antennas=n, n_users=1, frame_len=l)
        x = chirp_reference(cfg)
        np.testing.assert_allclose(x @ x.conj().T / l, cfg.element_power * np.eye(n), atol=1e-10)

    def test_single_antenna_autocorrelation(self):
        cfg = SystemConfig(n_antennas=1, n_users=1, frame_len=13, total_power=2.0)
        x = chirp_reference(cfg)[0]
        prof = pulse_compress(x, x, RECT)
        assert prof.peak_bin == 0
        assert abs(prof.output[0]) == pytest.approx(13 * 2.0)


class TestTaylor:
    def test_single_sample(self):
        np.testing.assert_allclose(taylor_window(1), [1.0])

    @given(st.integers(1, 200), st.integers(1, 8), st.floats(-60.0, -13.0))
    @settings(max_examples=50)
    def test_symmetric_peak_one(self, length, nbar, sll):
        w = taylor_window(length, nbar, sll)
        np.testing.assert_allclose(w, w[::-1], atol=1e-12)
        assert w.max() == pytest.approx(1.0)

    def test_high_precision_reference(self):
        np.testing.assert_allclose(taylor_window(64, 4, -30.0), taylor_reference(64, 4, -30.0), atol=1e-9)
        np.testing.assert_allclose(taylor_window(33, 5, -35.0), taylor_reference(33, 5, -35.0), atol=1e-9)

    @pytest.mark.parametrize("args", [(0, 4, -30), (8, 0, -30), (8, 4, 10), (2.5, 4, -30)])
    def test_invalid(self, args):
        with pytest.raises(ValueError):
            taylor_window(*args)


class TestPulseCompression:
    def test_matched_peak_is_energy(self, rng):
        x = random_complex(rng, 32)
        prof = pulse_compress(x, x, RECT)
        assert prof.peak_bin == 0
        assert prof.output[0] == pytest.approx(np.linalg.norm(x) ** 2)

    @pytest.mark.parametrize("length", [16, 20, 64, 100])
    def test_chirp_peak_to_rms(self, length):
        cfg = SystemConfig(n_antennas=1, n_users=1, frame_len=length)
        x = chirp_reference(cfg)[0]
        mag = np.abs(pulse_compress(x, x, RECT).output)
        assert mag.max() / np.sqrt(np.mean(mag**2)) >= np.sqrt(length) * (1 - 1e-12)

    @pytest.mark.parametrize("length", [15, 101])
    def test_peak_to_rms_never_exceeds_sqrt_length(self, length, rng):
        # by Parseval sqrt(L) is attained only by perfect sequences, such as the even-length chirp
        cfg = SystemConfig(n_antennas=1, n_users=1, frame_len=length)
        for x in (chirp_reference(cfg)[0], np.exp(1j * rng.uniform(0, 2 * np.pi, length))):
            mag = np.abs(pulse_compress(x, x, RECT).output)
            assert mag.max() / np.sqrt(np.mean(mag**2)) <= np.sqrt(length) * (1 + 1e-12)

    @pytest.mark.parametrize("delay", [0, 1, 5, 17])
    def test_delay(self, delay, cfg):
        x = chirp_reference(SystemConfig(n_antennas=4, n_users=1, frame_len=32))[1]
        assert pulse_compress(np.roll(x, delay), x).peak_bin == delay
        assert pulse_compress(np.roll(x, delay), x, RECT).peak_bin == delay

    def test_linear_mode_delay(self, rng):
        x = random_complex(rng, 16)
        delayed = np.concatenate([np.zeros(3), x[:-3]])
        prof = pulse_compress(delayed, x, RECT, linear=True)
        assert prof.output.size == 31
        assert prof.peak_bin == 3

    def test_taylor_sidelobes_on_chirp(self):
        cfg = SystemConfig(n_antennas=1, n_users=1, frame_len=64)
        x = chirp_reference(cfg)[0]
        prof = pulse_compress(x, x, WindowSpec(nbar=4, sll_db=-30.0))
        assert peak_sidelobe_db(prof) <= -25.0
        prof = pulse_compress(x, x, WindowSpec(nbar=4, sll_db=-30.0), linear=True)
        assert peak_sidelobe_db(prof) <= -25.0

    def test_linear_in_signal(self, rng):
        ref = random_complex(rng, 20)
        a, b = random_complex(rng, 20), random_complex(rng, 20)
        combo = pulse_compress(2 * a - 3j * b, ref).output
        np.testing.assert_allclose(combo, 2 * pulse_compress(a, ref).output - 3j * pulse_compress(b, ref).output, atol=1e-12)

    def test_length_mismatch(self, rng):
        with pytest.raises(ValueError):
            pulse_compress(random_complex(rng, 8), random_complex(rng, 9))

    def test_unknown_window(self, rng):
        x = random_complex(rng, 8)
        with pytest.raises(ValueError):
            pulse_compress(x, x, WindowSpec(kind="hann"))

    def test_sidelobe_metrics(self, rng):
        x = random_complex(rng, 64)
        prof = pulse_compress(x, x, RECT)
        mask = mainlobe_mask(prof)
        assert mask[0] and mask.sum() < 64
        energy = sidelobe_energy(prof)
        mag = np.abs(prof.output)
        assert energy == pytest.approx(np.sum(mag[~mask] ** 2) / mag.max() ** 2)
        assert peak_sidelobe_db(prof) == pytest.approx(20 * np.log10(mag[~mask].max() / mag.max()))

    def test_zero_signal(self):
        prof = pulse_compress(np.zeros(8), np.ones(8))
        assert sidelobe_energy(prof) == 0.0
