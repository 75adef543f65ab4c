"""Reference chirp waveforms and FFT-based pulse compression."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import windows

from .model import SystemConfig

__all__ = [
    "PulseProfile",
    "WindowSpec",
    "chirp_reference",
    "taylor_window",
    "pulse_compress",
    "mainlobe_mask",
    "sidelobe_energy",
    "peak_sidelobe_db",
]

_DB_FLOOR = -300.0


@dataclass(frozen=True)
class WindowSpec:
    """Spectral taper for pulse compression; ``kind`` is ``"taylor"`` or ``"rect"``."""

    kind: str = "taylor"
    nbar: int = 4
    sll_db: float = -30.0


@dataclass
class PulseProfile:
    delay_bins: np.ndarray
    magnitude_db: np.ndarray
    output: np.ndarray

    @property
    def peak_bin(self) -> int:
        return int(self.delay_bins[np.argmax(self.magnitude_db)])


def chirp_reference(cfg: SystemConfig) -> np.ndarray:
    """Orthogonal chirp block ``sqrt(P_T/N) exp(j 2 pi n l / L) exp(j pi l^2 / L)``.

    Each row is the common chirp shifted in frequency by ``n / L``; rows are
    mutually orthogonal whenever the shifts are distinct modulo ``L``.
    """
    n = np.arange(cfg.n_antennas)[:, None]
    l = np.arange(cfg.frame_len)[None, :]
    phase = 2.0 * np.pi * n * l / cfg.frame_len + np.pi * l**2 / cfg.frame_len
    return np.sqrt(cfg.element_power) * np.exp(1j * phase)


def taylor_window(length: int, nbar: int = 4, sll_db: float = -30.0) -> np.ndarray:
    """Symmetric Taylor taper with ``nbar`` near-constant sidelobes at ``sll_db``, peak 1."""
    if int(length) != length or length < 1:
        raise ValueError(f"length must be a positive integer, got {length!r}")
    if int(nbar) != nbar or nbar < 1:
        raise ValueError(f"nbar must be a positive integer, got {nbar!r}")
    if not sll_db < 0:
        raise ValueError(f"sll_db must be negative, got {sll_db!r}")
    w = windows.taylor(int(length), nbar=int(nbar), sll=-sll_db, norm=False)
    return w / np.max(w)


def pulse_compress(
    x: np.ndarray,
    reference: np.ndarray,
    window: WindowSpec | None = WindowSpec(),
    linear: bool = False,
) -> PulseProfile:
    """Matched-filter ``x`` against ``reference`` in the frequency domain.

    Computes ``IDFT(DFT(x) * conj(DFT(reference)) * w)`` with the taper ``w`` laid
    over the DFT bins in natural order. The default is circular correlation;
    ``linear=True`` zero-pads both signals to ``2L - 1`` samples first.
    """
    x = np.asarray(x, dtype=complex)
    reference = np.asarray(reference, dtype=complex)
    if x.shape != reference.shape or x.ndim != 1:
        raise ValueError(f"signal and reference must be equal-length vectors, got {x.shape} and {reference.shape}")
    nfft = 2 * x.size - 1 if linear else x.size
    spec = np.fft.fft(x, nfft) * np.conj(np.fft.fft(reference, nfft))
    if window is not None and window.kind != "rect":
        if window.kind != "taylor":
            raise ValueError(f"unknown window kind {window.kind!r}")
        spec = spec * taylor_window(nfft, window.nbar, window.sll_db)
    y = np.fft.ifft(spec)
    mag = np.abs(y)
    peak = mag.max()
    with np.errstate(divide="ignore"):
        db = 20.0 * np.log10(mag / peak) if peak > 0 else np.zeros_like(mag)
    db = np.maximum(db, _DB_FLOOR)
    if linear:
        bins = np.fft.fftfreq(nfft, 1.0 / nfft).astype(int)
    else:
        bins = np.arange(nfft)
    return PulseProfile(bins, db, y)


def mainlobe_mask(profile: PulseProfile) -> np.ndarray:
    """Bins of the mainlobe: from the peak outwards to the first local minimum each way."""
    mag = np.abs(profile.output)
    size = mag.size
    peak = int(np.argmax(mag))
    mask = np.zeros(size, dtype=bool)
    mask[peak] = True
    for direction in (1, -1):
        i = peak
        for _ in range(size - 1):
            j = (i + direction) % size
            if mag[j] >= mag[i] or mask[j]:
                break
            mask[j] = True
            i = j
    return mask


def sidelobe_energy(profile: PulseProfile) -> float:
    """Energy outside the mainlobe relative to the peak power."""
    mag = np.abs(profile.output)
    peak = mag.max()
    if peak == 0:
        return 0.0
    return float(np.sum((mag[~mainlobe_mask(profile)] / peak) ** 2))


def peak_sidelobe_db(profile: PulseProfile) -> float:
    side = profile.magnitude_db[~mainlobe_mask(profile)]
    return float(side.max()) if side.size else _DB_FLOOR
