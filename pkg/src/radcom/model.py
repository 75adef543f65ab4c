"""System model: scenario configuration, random instances and performance metrics.

Shapes used throughout the package:

* channel ``h``: complex ``(K, N)``, row ``i`` is the channel of user ``i``
* symbols ``s``: complex ``(K, L)``
* waveform ``x``: complex ``(N, L)``, column ``j`` is the snapshot sent at time ``j``
* covariance ``r``: complex Hermitian ``(N, N)``
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .exceptions import SingularChannelError

__all__ = [
    "SystemConfig",
    "steering_vector",
    "steering_matrix",
    "beampattern",
    "sample_covariance",
    "mui_energy",
    "per_user_sinr",
    "sum_rate",
    "generate_rayleigh_channel",
    "generate_qpsk_symbols",
    "zf_precode",
    "check_hermitian",
    "snr_db_to_noise_power",
]

HERMITIAN_TOL = 1e-10

# Independent RNG streams derived from one user seed.
_CHANNEL_STREAM = 0
_SYMBOL_STREAM = 1


@dataclass(frozen=True)
class SystemConfig:
    """Scenario constants of a dual-functional transmitter.

    Parameters
    ----------
    n_antennas : int
        Number of transmit antennas N of the uniform linear array.
    n_users : int
        Number of single-antenna downlink users K.
    frame_len : int
        Communication frame (radar pulse) length L, in snapshots.
    total_power : float
        Per-snapshot transmit power budget P_T.
    noise_power : float
        Receiver noise power N_0.
    element_spacing : float
        Antenna spacing in wavelengths.
    """

    n_antennas: int = 16
    n_users: int = 4
    frame_len: int = 20
    total_power: float = 1.0
    noise_power: float = 0.1
    element_spacing: float = 0.5

    def __post_init__(self):
        for name in ("n_antennas", "n_users", "frame_len"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ValueError(f"{name} must be a positive integer, got {value!r}")
        if not self.total_power > 0:
            raise ValueError(f"total_power must be > 0, got {self.total_power!r}")
        if not self.noise_power >= 0:
            raise ValueError(f"noise_power must be >= 0, got {self.noise_power!r}")
        if not self.element_spacing > 0:
            raise ValueError(f"element_spacing must be > 0, got {self.element_spacing!r}")
        if self.frame_len < self.n_antennas:
            raise ValueError(
                f"frame_len ({self.frame_len}) must be >= n_antennas ({self.n_antennas})"
            )

    @property
    def element_power(self) -> float:
        """Power per antenna per snapshot, P_T / N."""
        return self.total_power / self.n_antennas

    def with_snr_db(self, snr_db: float) -> "SystemConfig":
        """Copy of the config with N_0 set from SNR = P_T / N_0 in dB."""
        return replace(self, noise_power=snr_db_to_noise_power(snr_db, self.total_power))


def snr_db_to_noise_power(snr_db: float, total_power: float = 1.0) -> float:
    return total_power / 10.0 ** (snr_db / 10.0)


def steering_vector(cfg: SystemConfig, theta: float) -> np.ndarray:
    """Array response ``exp(j 2 pi n spacing sin(theta))`` for ``n = 0..N-1``."""
    n = np.arange(cfg.n_antennas)
    return np.exp(2j * np.pi * n * cfg.element_spacing * np.sin(theta))


def steering_matrix(cfg: SystemConfig, thetas) -> np.ndarray:
    """Steering vectors for every angle, stacked as rows: shape ``(G, N)``."""
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    n = np.arange(cfg.n_antennas)
    return np.exp(2j * np.pi * cfg.element_spacing * np.outer(np.sin(thetas), n))


def check_hermitian(r: np.ndarray, tol: float = HERMITIAN_TOL) -> np.ndarray:
    r = np.asarray(r)
    if r.ndim != 2 or r.shape[0] != r.shape[1]:
        raise ValueError(f"covariance must be square, got shape {r.shape}")
    scale = max(1.0, float(np.max(np.abs(r), initial=0.0)))
    if np.max(np.abs(r - r.conj().T), initial=0.0) > tol * scale:
        raise ValueError("covariance matrix is not Hermitian")
    return r


def beampattern(r: np.ndarray, cfg: SystemConfig, theta_grid) -> np.ndarray:
    """Transmit power ``a(theta)^H R a(theta)`` at every angle of ``theta_grid``."""
    r = check_hermitian(r)
    a = steering_matrix(cfg, theta_grid)
    # a^H R a with a stored as rows
    p = np.einsum("gn,nm,gm->g", a.conj(), r, a)
    return p.real


def sample_covariance(x: np.ndarray) -> np.ndarray:
    """``(1/L) X X^H``, symmetrized so the result is exactly Hermitian."""
    x = np.asarray(x)
    r = x @ x.conj().T / x.shape[1]
    return 0.5 * (r + r.conj().T)


def _check_dims(h, x, s):
    h, x, s = np.asarray(h), np.asarray(x), np.asarray(s)
    if h.ndim != 2 or x.ndim != 2 or s.ndim != 2:
        raise ValueError("h, x and s must be 2-D arrays")
    if h.shape[1] != x.shape[0] or h.shape[0] != s.shape[0] or x.shape[1] != s.shape[1]:
        raise ValueError(
            f"dimension mismatch: h {h.shape}, x {x.shape}, s {s.shape}"
        )
    return h, x, s


def mui_energy(h: np.ndarray, x: np.ndarray, s: np.ndarray) -> float:
    """Total multi-user interference energy ``||HX - S||_F^2``."""
    h, x, s = _check_dims(h, x, s)
    return float(np.linalg.norm(h @ x - s) ** 2)


def per_user_sinr(h: np.ndarray, x: np.ndarray, s: np.ndarray, cfg: SystemConfig) -> np.ndarray:
    """Per-user SINR with frame averages taken over the time index.

    The interference term of user ``i`` is ``mean_j |h_i^T x_j - s_ij|^2``. A user
    seeing neither interference nor noise gets ``inf``.
    """
    h, x, s = _check_dims(h, x, s)
    signal = np.mean(np.abs(s) ** 2, axis=1)
    interference = np.mean(np.abs(h @ x - s) ** 2, axis=1)
    with np.errstate(divide="ignore"):
        return signal / (interference + cfg.noise_power)


def sum_rate(sinr) -> float:
    """Achievable sum rate ``sum_i log2(1 + sinr_i)`` in bits/s/Hz."""
    sinr = np.asarray(sinr, dtype=float)
    if np.any(sinr < 0) or np.any(np.isnan(sinr)):
        raise ValueError("SINR values must be non-negative")
    return float(np.sum(np.log2(1.0 + sinr)))


def _rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), stream]))


def generate_rayleigh_channel(cfg: SystemConfig, seed: int) -> np.ndarray:
    """K x N flat Rayleigh channel with i.i.d. CN(0, 1) entries."""
    rng = _rng(seed, _CHANNEL_STREAM)
    shape = (cfg.n_users, cfg.n_antennas)
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def generate_qpsk_symbols(cfg: SystemConfig, seed: int) -> np.ndarray:
    """K x L block of unit-power QPSK symbols ``(+-1 +- j)/sqrt(2)``."""
    rng = _rng(seed, _SYMBOL_STREAM)
    bits = rng.integers(0, 2, size=(2, cfg.n_users, cfg.frame_len))
    return ((1 - 2 * bits[0]) + 1j * (1 - 2 * bits[1])) / np.sqrt(2.0)


def zf_precode(h: np.ndarray, s: np.ndarray, cfg: SystemConfig) -> np.ndarray:
    """Zero-forcing block ``c H^+ S`` scaled to the frame energy ``L P_T``."""
    h = np.asarray(h)
    s = np.asarray(s)
    k, n = h.shape
    if k > n:
        raise SingularChannelError(f"zero-forcing needs K <= N, got K={k}, N={n}")
    sv = np.linalg.svd(h, compute_uv=False)
    if sv[-1] <= max(h.shape) * np.finfo(float).eps * sv[0] or sv[0] == 0:
        raise SingularChannelError("channel matrix is rank deficient")
    x = np.linalg.pinv(h) @ s
    energy = np.linalg.norm(x) ** 2
    if energy == 0:
        return x
    return x * np.sqrt(s.shape[1] * cfg.total_power / energy)
