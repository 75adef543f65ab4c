import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_complex, random_psd
from radcom.closed_form import (
    DirectionalTarget,
    design_covariance_ls,
    desired_pattern,
    directional_design,
    omni_design,
    procrustes_factor,
    regularize_covariance,
)
from radcom.exceptions import NotPositiveDefiniteError
from radcom.model import (
    SystemConfig,
    beampattern,
    generate_qpsk_symbols,
    generate_rayleigh_channel,
    mui_energy,
    sample_covariance,
    steering_matrix,
)


def instance(cfg, seed):
    return generate_rayleigh_channel(cfg, seed), generate_qpsk_symbols(cfg, seed)


def omni_optimum(h, s, cfg):
    scale = np.sqrt(cfg.frame_len * cfg.total_power / cfg.n_antennas)
    sv = np.linalg.svd(h.conj().T @ s, compute_uv=False)
    return scale**2 * np.linalg.norm(h) ** 2 - 2 * scale * sv.sum() + np.linalg.norm(s) ** 2


def random_unitary(rng, n):
    q, r = np.linalg.qr(random_complex(rng, (n, n)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


@pytest.fixture(scope="module")
def three_target_rd():
    cfg = SystemConfig()
    design = design_covariance_ls(DirectionalTarget.three_targets(), cfg)
    return cfg, design


class TestProcrustes:
    def test_row_orthonormal(self, rng):
        y = procrustes_factor(random_complex(rng, (3, 7)))
        np.testing.assert_allclose(y @ y.conj().T, np.eye(3), atol=1e-12)

    def test_short_frame_rejected(self, rng):
        with pytest.raises(ValueError):
            procrustes_factor(random_complex(rng, (4, 3)))


class TestOmni:
    def test_scalar_case(self):
        cfg = SystemConfig(n_antennas=1, n_users=1, frame_len=1, total_power=2.0)
        h, s = np.array([[0.3 - 1.2j]]), np.array([[np.exp(0.4j)]])
        x = omni_design(h, s, cfg)
        expected = np.sqrt(2.0) * np.exp(1j * np.angle(np.conj(h[0, 0]) * s[0, 0]))
        assert x[0, 0] == pytest.approx(expected)
        obj = abs(h[0, 0]) ** 2 * 2.0 - 2 * np.sqrt(2.0) * abs(h[0, 0] * s[0, 0]) + 1.0
        assert mui_energy(h, x, s) == pytest.approx(obj)

    @pytest.mark.parametrize("seed", range(5))
    def test_constraint_and_optimum(self, cfg, seed):
        h, s = instance(cfg, seed)
        x = omni_design(h, s, cfg)
        resid = np.linalg.norm(sample_covariance(x) - cfg.element_power * np.eye(cfg.n_antennas))
        assert resid <= 1e-10
        assert mui_energy(h, x, s) == pytest.approx(omni_optimum(h, s, cfg), rel=1e-8)

    def test_trace_certificate(self, cfg):
        h, s = instance(cfg, 9)
        x = omni_design(h, s, cfg)
        value = np.real(np.trace(x.conj().T @ h.conj().T @ s))
        sv = np.linalg.svd(h.conj().T @ s, compute_uv=False)
        assert value == pytest.approx(np.sqrt(cfg.frame_len * cfg.element_power) * sv.sum(), abs=1e-8)

    @pytest.mark.parametrize("seed", range(3))
    def test_beats_random_feasible_points(self, cfg, seed):
        h, s = instance(cfg, seed)
        best = mui_energy(h, omni_design(h, s, cfg), s)
        rng = np.random.default_rng(seed)
        scale = np.sqrt(cfg.frame_len * cfg.element_power)
        for _ in range(1000):
            u = random_unitary(rng, cfg.n_antennas)
            v = random_unitary(rng, cfg.frame_len)
            x = scale * u @ v[: cfg.n_antennas]
            assert mui_energy(h, x, s) >= best - 1e-9

    def test_short_frame_rejected(self, rng):
        cfg = SystemConfig(n_antennas=4, n_users=2, frame_len=4)
        with pytest.raises(ValueError):
            omni_design(random_complex(rng, (2, 4)), random_complex(rng, (2, 3)), cfg)


class TestDirectional:
    def test_identity_covariance_matches_omni(self, cfg):
        h, s = instance(cfg, 4)
        x = directional_design(h, s, cfg.element_power * np.eye(cfg.n_antennas), cfg)
        np.testing.assert_allclose(x, omni_design(h, s, cfg), atol=1e-9)

    @pytest.mark.parametrize("seed", range(5))
    def test_constraint_and_optimum(self, cfg, seed):
        rng = np.random.default_rng(seed)
        rd = random_psd(rng, cfg.n_antennas, cfg.total_power)
        h, s = instance(cfg, seed)
        x = directional_design(h, s, rd, cfg)
        assert np.linalg.norm(sample_covariance(x) - rd) <= 1e-9
        f = np.linalg.cholesky(rd)
        sv = np.linalg.svd(f.conj().T @ h.conj().T @ s, compute_uv=False)
        expected = (
            cfg.frame_len * np.trace(h @ rd @ h.conj().T).real
            - 2 * np.sqrt(cfg.frame_len) * sv.sum()
            + np.linalg.norm(s) ** 2
        )
        assert mui_energy(h, x, s) == pytest.approx(expected, rel=1e-8)

    def test_semidefinite_rejected(self, cfg):
        h, s = instance(cfg, 0)
        a = steering_matrix(cfg, [0.2])[0]
        rd = np.outer(a, a.conj()) * cfg.element_power
        with pytest.raises(NotPositiveDefiniteError):
            directional_design(h, s, rd, cfg)
        x = directional_design(h, s, regularize_covariance(rd, cfg), cfg)
        assert np.linalg.norm(x) ** 2 == pytest.approx(cfg.frame_len * cfg.total_power)

    def test_trace_mismatch_rejected(self, cfg):
        h, s = instance(cfg, 0)
        with pytest.raises(ValueError):
            directional_design(h, s, 2 * cfg.element_power * np.eye(cfg.n_antennas), cfg)

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_pattern_reproduced(self, seed):
        cfg = SystemConfig(n_antennas=6, n_users=2, frame_len=8)
        rng = np.random.default_rng(seed)
        rd = random_psd(rng, 6, cfg.total_power)
        h, s = random_complex(rng, (2, 6)), generate_qpsk_symbols(cfg, seed % 1000)
        grid = np.sort(rng.uniform(-np.pi / 2, np.pi / 2, 50))
        x = directional_design(h, s, rd, cfg)
        np.testing.assert_allclose(beampattern(sample_covariance(x), cfg, grid), beampattern(rd, cfg, grid), atol=1e-8)


class TestRegularize:
    def test_trace_and_definiteness(self, cfg):
        r = regularize_covariance(np.zeros((cfg.n_antennas, cfg.n_antennas)) + np.diag([1.0] + [0.0] * 15), cfg)
        assert np.trace(r).real == pytest.approx(cfg.total_power)
        assert np.linalg.eigvalsh(r)[0] > 0


class TestTemplate:
    def test_flat_when_no_targets(self, cfg):
        target = DirectionalTarget()
        np.testing.assert_allclose(desired_pattern(target, cfg), cfg.total_power)

    def test_rectangular_mainlobes(self, cfg):
        target = DirectionalTarget.three_targets()
        p = desired_pattern(target, cfg)
        deg = np.rad2deg(target.grid)
        dist = np.min([np.abs(deg - t) for t in (-60, 0, 60)], axis=0)
        inside = dist < 4.5
        assert np.all(p[dist > 5.5] == 0)
        assert np.all(p[inside] == p[inside][0]) and p[inside][0] > cfg.total_power

    def test_invalid_target(self):
        with pytest.raises(ValueError):
            DirectionalTarget(angles=(np.pi / 2,))
        with pytest.raises(ValueError):
            DirectionalTarget(mainlobe_width=0.0)


class TestCovarianceFit:
    def test_flat_template_gives_scaled_identity(self, cfg):
        design = design_covariance_ls(DirectionalTarget(), cfg)
        assert design.converged
        assert design.objective <= 1e-6
        np.testing.assert_allclose(design.covariance, cfg.element_power * np.eye(cfg.n_antennas), atol=1e-6)

    def test_feasible(self, three_target_rd):
        cfg, design = three_target_rd
        assert abs(np.trace(design.covariance).real - cfg.total_power) <= 1e-8
        assert np.linalg.eigvalsh(design.covariance)[0] >= -1e-8
        assert design.converged

    def test_peaks_at_targets(self, three_target_rd):
        cfg, design = three_target_rd
        grid = np.linspace(-np.pi / 2, np.pi / 2, 181)
        p = beampattern(design.covariance, cfg, grid)
        at_targets = beampattern(design.covariance, cfg, [-np.pi / 3, 0.0, np.pi / 3])
        assert np.all(at_targets / p.mean() > 3)

    def test_best_iterate_when_capped(self, cfg):
        design = design_covariance_ls(DirectionalTarget.three_targets(), cfg, max_iters=5)
        assert not design.converged
        assert design.iterations == 5
        assert abs(np.trace(design.covariance).real - cfg.total_power) <= 1e-8

    def test_matches_semidefinite_oracle(self):
        cp = pytest.importorskip("cvxpy")
        cfg = SystemConfig()
        target = DirectionalTarget(
            angles=(-np.pi / 3, 0.0, np.pi / 3), grid=np.linspace(-np.pi / 2, np.pi / 2, 64)
        )
        design = design_covariance_ls(target, cfg, tol=1e-8, max_iters=50_000)
        a = steering_matrix(cfg, target.grid)
        p_des = desired_pattern(target, cfg)
        r = cp.Variable((cfg.n_antennas, cfg.n_antennas), hermitian=True)
        pattern = cp.hstack([cp.real(a[g].conj() @ r @ a[g]) for g in range(a.shape[0])])
        problem = cp.Problem(
            cp.Minimize(cp.sum_squares(pattern - p_des)), [r >> 0, cp.real(cp.trace(r)) == cfg.total_power]
        )
        problem.solve(solver=cp.CLARABEL)
        assert design.objective == pytest.approx(problem.value, rel=1e-4)
        oracle_pattern = beampattern(0.5 * (r.value + r.value.conj().T), cfg, target.grid)
        fitted = beampattern(design.covariance, cfg, target.grid)
        np.testing.assert_allclose(fitted, oracle_pattern, atol=1e-2 * p_des.max())
