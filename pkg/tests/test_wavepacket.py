import math

import numpy as np
import pytest

from oracles import p_k_limits
from remnant.density import CouplingState, reduced_density_matrix
from remnant.errors import ConfigurationError, DomainError
from remnant.wavepacket import (
    GridSpec,
    ModeCoupling,
    PacketParams,
    amplitude_field,
    amplitude_fields,
    brute_force_density,
    default_grid,
    export_raster_csv,
    normalization_audit,
    packet_density,
    simpson_weights,
)

W = 1e-5  # cm


def setup(q, kappa, **kw):
    return ModeCoupling.for_couplings(q, kappa, w=W, **kw)


def analytic(params, cp, t, window):
    return reduced_density_matrix(cp.coupling_state(params, t), window)


class TestParams:
    def test_tau_default_and_check(self):
        p = PacketParams(w=W)
        assert p.tau == pytest.approx(p.mass * W**2 / 1.054571817e-27, rel=1e-9)
        PacketParams(w=W, tau=p.tau)
        with pytest.raises(DomainError):
            PacketParams(w=W, tau=2 * p.tau)

    @pytest.mark.parametrize("kw", [dict(w=0.0), dict(w=W, p0=-1.0), dict(w=math.inf)])
    def test_validation(self, kw):
        with pytest.raises(DomainError):
            PacketParams(**kw)

    def test_for_couplings_round_trip(self):
        params, cp = setup(0.7, 1.3)
        state = cp.coupling_state(params)
        assert state.q == pytest.approx(0.7, rel=1e-13)
        assert state.kappa == pytest.approx(1.3, rel=1e-13)

    def test_kappa_needs_field(self):
        with pytest.raises(DomainError):
            setup(0.0, 1.0)

    def test_grid_must_be_odd(self):
        with pytest.raises(ConfigurationError):
            GridSpec((0.0, 0.0), 1.0, 10)


class TestAmplitudeField:
    def test_free_initial_gaussian(self):
        params, cp = setup(0.0, 0.0, r0=(2e-5, -1e-5))
        f = amplitude_field(params, cp, 0, 0.0)
        off = f.extent.offsets
        X, Y = np.meshgrid(off + f.extent.center[0], off + f.extent.center[1])
        r2 = (X - 2e-5) ** 2 + (Y + 1e-5) ** 2
        ref = np.exp(-r2 / (2 * W**2)) / (W * math.sqrt(math.pi))
        assert np.max(np.abs(f.grid - ref)) < 1e-14 * np.max(ref)
        assert normalization_audit([f]) == pytest.approx(1.0, abs=1e-12)
        assert f.metadata["global_phase"] == "omitted"

    def test_free_nonzero_k_vanishes(self):
        params, cp = setup(0.0, 0.0)
        for k in (-2, 1, 3):
            assert np.max(np.abs(amplitude_field(params, cp, k, 0.3 * params.tau).grid)) < 1e-14

    def test_single_bessel_form_without_drift(self):
        params, cp = setup(0.5, 0.0)
        assert params.p0 == 0.0
        f = amplitude_field(params, cp, 2, 0.0)
        assert f.metadata["bessel_sum_order"] == 0
        # at t = 0: |Psi_k| = exp(-(a - rho)^2 / 2) exp(-a rho) I_k(a rho) / (w sqrt(pi))
        from scipy.special import ive

        a = 1.0
        off = f.extent.offsets / W
        R = np.hypot(*np.meshgrid(off, off))
        ref = np.exp(-((a - R) ** 2) / 2) * ive(2, a * R) / (W * math.sqrt(math.pi))
        assert np.max(np.abs(np.abs(f.grid) - ref)) < 1e-13 * np.max(ref)

    def test_finite_everywhere(self):
        params, cp = setup(3.0, 2.0, chi0=0.4)
        fields = amplitude_fields(params, cp, range(-5, 6), 0.8 * params.tau)
        assert all(np.all(np.isfinite(f.grid)) for f in fields)

    def test_unresolved_grid(self):
        params, cp = setup(0.5, 0.0)
        with pytest.raises(ConfigurationError, match="resolve"):
            amplitude_field(params, cp, 0, 0.0, GridSpec((0.0, 0.0), 6 * W, 25))

    def test_default_grid_extent(self):
        params, cp = setup(8.0, 0.0)
        g = default_grid(params, cp, params.tau)
        assert g.half_width == pytest.approx(max(6 * W * math.sqrt(2), 6 * 4.0 * W))
        assert g.spacing <= W / 8
        assert g.n % 2 == 1

    def test_translation_covariance(self):
        a_params, cp = setup(0.4, 0.6, chi0=0.3)
        shift = (3.7e-5, -1.2e-5)
        b_params = PacketParams(w=W, p0=a_params.p0, chi0=0.3, r0=shift)
        t = 0.4 * a_params.tau
        ga = default_grid(a_params, cp, t)
        gb = GridSpec((ga.center[0] + shift[0], ga.center[1] + shift[1]), ga.half_width, ga.n)
        for k in (-1, 0, 2):
            fa = amplitude_field(a_params, cp, k, t, ga)
            fb = amplitude_field(b_params, cp, k, t, gb)
            assert np.max(np.abs(np.abs(fa.grid) - np.abs(fb.grid))) < 1e-14 * np.max(np.abs(fa.grid))

    @pytest.mark.parametrize("theta", [0.0, 0.5, 1.0, 2.5])
    def test_free_spreading(self, theta):
        params, cp = setup(0.0, 0.0)
        t = theta * params.tau
        f = amplitude_field(params, cp, 0, t)
        g = f.extent
        wts = simpson_weights(g.n, g.spacing)
        W2 = np.outer(wts, wts)
        X, Y = np.meshgrid(g.offsets, g.offsets)
        dens = np.abs(f.grid) ** 2
        rms = math.sqrt(np.sum(W2 * dens * (X**2 + Y**2)) / np.sum(W2 * dens))
        assert rms == pytest.approx(W * math.sqrt(1 + theta**2), rel=1e-6)

    def test_drift(self):
        params, cp = setup(0.2, 0.5, chi0=0.8)
        t = 1.5 * params.tau
        f = amplitude_field(params, cp, 0, t)
        assert f.extent.center == pytest.approx(params.center(t))
        vx, vy = params.velocity
        assert math.atan2(vy, vx) == pytest.approx(0.8)


class TestAudits:
    def test_normalization_free(self):
        params, cp = setup(0.0, 0.0)
        assert normalization_audit([amplitude_field(params, cp, 0, 0.0)]) == pytest.approx(1.0, abs=1e-12)

    def test_normalization_example(self):
        params, cp = setup(0.5, 0.0)
        fields = amplitude_fields(params, cp, range(-25, 26), 0.3 * params.tau)
        assert abs(normalization_audit(fields) - 1.0) < 1e-3

    def test_normalization_refinement(self):
        params, cp = setup(0.5, 0.0)
        t = 0.3 * params.tau
        base = default_grid(params, cp, t)
        coarse = GridSpec(base.center, base.half_width, 13)
        errs = []
        for g in (coarse, coarse.refined()):
            fields = amplitude_fields(params, cp, range(-25, 26), t, g, check_resolution=False)
            errs.append(abs(normalization_audit(fields) - 1.0))
        assert errs[1] * 4 <= errs[0]

    def test_free_density_is_point_mass(self):
        params, cp = setup(0.0, 0.0)
        P = brute_force_density(amplitude_fields(params, cp, range(-3, 4), 0.0))
        ref = np.zeros((7, 7))
        ref[3, 3] = 1.0
        assert np.max(np.abs(P.entries - ref)) < 1e-12

    def test_diagonal_against_bessel(self):
        params, cp = setup(0.5, 0.0)
        P = brute_force_density(amplitude_fields(params, cp, range(-25, 26), 0.0))
        p_ref, _ = p_k_limits(0.5, 0.0, range(-25, 26))
        assert abs(P[0, 0].real - p_ref[25]) / p_ref[25] < 1e-3
        assert P.hermiticity_deviation < 1e-10

    def test_global_phase_invariance(self):
        params, cp = setup(0.3, 0.8, chi0=1.1, eta=0.4)
        t = 0.37 * params.tau
        ks = range(-10, 11)
        plain = brute_force_density(amplitude_fields(params, cp, ks, t))
        phased = brute_force_density(amplitude_fields(params, cp, ks, t, include_global_phase=True))
        assert np.max(np.abs(plain.entries - phased.entries)) < 1e-13

    def test_fields_must_share_grid(self):
        params, cp = setup(0.2, 0.0)
        a = amplitude_field(params, cp, 0, 0.0)
        b = amplitude_field(params, cp, 1, 0.0, a.extent.refined())
        with pytest.raises(DomainError):
            brute_force_density([a, b])

    def test_streamed_equals_stored(self):
        params, cp = setup(0.2, 0.5, chi0=0.5)
        t = 0.5 * params.tau
        stored = brute_force_density(amplitude_fields(params, cp, range(-6, 7), t))
        streamed = packet_density(params, cp, t, (-6, 6), block_rows=17)
        assert np.max(np.abs(stored.entries - streamed.entries)) < 1e-15


class TestOracle:
    @pytest.mark.parametrize("q,kappa", [(0.2, 0.0), (0.5, 0.0), (0.2, 0.5)])
    @pytest.mark.parametrize("theta", [0.0, 0.5])
    def test_matches_analytic(self, q, kappa, theta):
        params, cp = setup(q, kappa, chi0=0.6, eta=-0.3)
        t = theta * params.tau
        window = (-20, 20)
        numeric = packet_density(params, cp, t, window)
        assert np.max(np.abs(numeric.entries - analytic(params, cp, t, window).entries)) < 1e-3

    def test_refinement_improves(self):
        params, cp = setup(0.2, 0.5, chi0=0.6)
        t = 0.5 * params.tau
        window = (-20, 20)
        ref = analytic(params, cp, t, window).entries
        base = default_grid(params, cp, t)
        g = GridSpec(base.center, base.half_width, 13)
        errs = []
        for _ in range(3):
            P = packet_density(params, cp, t, window, g, check_resolution=False)
            errs.append(np.max(np.abs(P.entries - ref)))
            g = g.refined()
        assert errs[0] > errs[1] > errs[2]


def test_raster_export(tmp_path):
    params, cp = setup(0.2, 0.0)
    f = amplitude_field(params, cp, 1, 0.0)
    path = export_raster_csv(f, tmp_path / "k1.csv")
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# k=1 ")
    assert f"nx={f.extent.n}" in lines[0]
    data = np.loadtxt(path, delimiter=",", comments="#")
    assert data.shape == (f.extent.n, f.extent.n)
    assert np.array_equal(data, np.abs(f.grid) ** 2)
