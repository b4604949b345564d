import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles as orc
from conftest import max_err
from moyalkit import builtins as bi
from moyalkit.grid import GridSpec, SampledField, fourier_shift, inner_product, sample, zeros
from moyalkit.symplectic import HbarContext, standard_j, symplectic_form
from moyalkit.transforms import (
    Chirp,
    Dilation,
    FourierJ,
    MetaplecticWord,
    Window,
    adjoint_defect,
    cross_wigner,
    heisenberg_weyl,
    hw_covariance_residual,
    metaplectic_apply,
    phase_translation,
    projector,
    stft,
    wave_packet,
    wave_packet_adjoint,
    wave_packet_norm_check,
    wigner_marginal_defect,
)

CTX = HbarContext(1.0, 1)
CFG = GridSpec.uniform(1, 64, 16.0)
PHASE = CFG.phase()
small = st.floats(-1.5, 1.5)
unit = st.floats(-1.0, 1.0)


def coherent(x0=0.0, p0=0.0, ctx=CTX, grid=CFG):
    return bi.gaussian(grid, ctx, center=[x0], momentum=[p0])


def mixture(seed: int, spread: float = 0.9):
    return bi.mixture(CFG, CTX, components=2, seed=seed, spread=spread, width_range=(0.9, 1.1))


PHI0 = Window(coherent())


class TestCrossWigner:
    def test_ground_state_closed_form(self):
        ref = sample(lambda x, p: np.exp(-(x * x + p * p)) / np.pi, PHASE)
        assert max_err(cross_wigner(coherent(), coherent(), CTX), ref) < 1e-9

    @pytest.mark.parametrize(
        "a, b",
        [((0.5, -0.3, None), (0.0, 0.0, None)), ((-0.7, 0.4, 1.2), (0.3, 0.6, 0.8)), ((1.0, 1.0, None), (-1.0, 0.5, None))],
    )
    def test_coherent_pairs_against_gaussian_integral(self, a, b):
        fa, pa = orc.coherent(a[0], a[1], 1.0, a[2])
        fb, pb = orc.coherent(b[0], b[1], 1.0, b[2])
        W = cross_wigner(sample(fa, CFG), sample(fb, CFG), CTX)
        x = CFG.axis(0)
        ref = np.array([[orc.cross_wigner_coherent(pa, pb, xi, pj, 1.0) for pj in x] for xi in x])
        assert max_err(W, ref) < 1e-9

    def test_moyal_identity_closed_value(self):
        W = cross_wigner(coherent(), coherent(), CTX)
        assert inner_product(W, W) == pytest.approx(1 / (2 * np.pi), abs=1e-12)

    @given(st.integers(0, 500))
    def test_moyal_identity_mixtures(self, seed):
        psi, phi, psi2, phi2 = (mixture(seed * 4 + k) for k in range(4))
        lhs = inner_product(cross_wigner(psi, phi, CTX), cross_wigner(psi2, phi2, CTX))
        rhs = inner_product(psi, psi2) * np.conj(inner_product(phi, phi2)) / (2 * np.pi)
        assert abs(lhs - rhs) <= 1e-8 * abs(rhs) + 1e-14

    @given(st.integers(0, 500))
    def test_auto_wigner_real(self, seed):
        W = cross_wigner(mixture(seed), mixture(seed), CTX)
        assert np.max(np.abs(W.values.imag)) < 1e-12

    @given(st.integers(0, 500))
    def test_marginal(self, seed):
        assert wigner_marginal_defect(mixture(seed), CTX) < 1e-8

    def test_grid_mismatch(self):
        with pytest.raises(ValueError):
            cross_wigner(coherent(), coherent(grid=GridSpec.uniform(1, 32, 16.0)), CTX)

    def test_duality_contract_enforced(self):
        G = GridSpec.uniform(1, 16, 16.0)
        with pytest.raises(ValueError):
            cross_wigner(coherent(grid=G), coherent(grid=G), CTX)


class TestWavePacket:
    def test_ground_state_closed_form(self):
        ref = sample(lambda x, p: np.sqrt(2 * np.pi) * np.exp(-(x * x + p * p)) / np.pi, PHASE)
        assert max_err(wave_packet(PHI0, coherent(), CTX), ref) < 1e-9

    @given(st.integers(0, 500))
    def test_isometry(self, seed):
        assert wave_packet_norm_check(PHI0, mixture(seed), CTX) < 1e-9

    def test_zero(self):
        assert max_err(wave_packet(PHI0, zeros(CFG), CTX), 0) == 0

    def test_window_must_be_normalized(self):
        with pytest.raises(ValueError):
            wave_packet(Window(coherent() * 2.0), coherent(), CTX)
        assert Window.normalized(coherent() * 2.0).phi.norm() == pytest.approx(1.0, abs=1e-14)

    @given(st.integers(0, 500))
    def test_reconstruction(self, seed):
        psi = mixture(seed)
        back = wave_packet_adjoint(PHI0, wave_packet(PHI0, psi, CTX), CTX)
        assert max_err(back, psi) < 1e-8

    @given(st.integers(0, 500))
    def test_adjoint_consistency(self, seed):
        psi = mixture(seed)
        Psi = bi.mixture(PHASE, CTX, components=2, seed=seed, spread=1.0, width_range=(0.8, 1.2))
        assert adjoint_defect(PHI0, psi, Psi, CTX) < 1e-8

    def test_adjoint_of_zero(self):
        assert max_err(wave_packet_adjoint(PHI0, zeros(PHASE), CTX), 0) == 0

    def test_projector_idempotent(self):
        Psi = bi.mixture(PHASE, CTX, components=3, seed=2, spread=1.0, width_range=(0.8, 1.2))
        P1 = projector(PHI0, Psi, CTX)
        assert max_err(projector(PHI0, P1, CTX), P1) < 1e-8

    def test_other_window(self):
        win = Window(coherent(0.2, -0.1))
        psi = mixture(3)
        assert wave_packet_norm_check(win, psi, CTX) < 1e-9
        assert max_err(wave_packet_adjoint(win, wave_packet(win, psi, CTX), CTX), psi) < 1e-8


class TestStft:
    def test_origin_is_inner_product(self):
        psi, phi = mixture(1), mixture(2)
        V = stft(phi, psi)
        assert abs(V.values[32, 32] - inner_product(psi, phi)) < 1e-12

    @given(st.integers(0, 500))
    def test_orthogonality(self, seed):
        psi, phi = mixture(seed), coherent()
        assert abs(stft(phi, psi).norm() - psi.norm() * phi.norm()) < 1e-9

    def test_relation_to_wave_packet(self):
        # at hbar = 1/(2 pi): W_phi psi(x, p) = 2 exp(2ipx/hbar) V_{phi reflected} psi(2x, 2p)
        ctx = HbarContext(1 / (2 * np.pi))
        G = GridSpec.uniform(1, 64, 8.0)
        psi = bi.gaussian(G, ctx, center=[0.3], momentum=[-0.2], width=0.45)
        phi = bi.gaussian(G, ctx, center=[-0.1], momentum=[0.15], width=0.4)
        phi_r = phi.with_values(phi.values[(-np.arange(64)) % 64])
        W = wave_packet(Window(phi), psi, ctx).values
        V = stft(phi_r, psi).values
        x = G.axis(0)
        w = G.frequency().axis(0)
        errs = []
        for i, xi in enumerate(x):
            for k, pk in enumerate(x):
                if abs(xi) < 1.9 and abs(pk) < 1.9:
                    a = int(np.argmin(np.abs(x - 2 * xi)))
                    b = int(np.argmin(np.abs(w - 2 * pk)))
                    assert abs(x[a] - 2 * xi) < 1e-12 and abs(w[b] - 2 * pk) < 1e-12
                    errs.append(abs(W[i, k] - 2 * np.exp(2j * pk * xi / ctx.hbar) * V[a, b]))
        assert len(errs) > 200 and max(errs) < 1e-8

    def test_grid_checks(self):
        with pytest.raises(ValueError):
            stft(coherent(), coherent(grid=GridSpec.uniform(1, 32, 16.0)))


class TestHeisenbergWeyl:
    def test_identity(self):
        psi = mixture(1)
        assert max_err(heisenberg_weyl([0, 0], psi, CTX), psi) == 0

    @given(small, small)
    def test_unitary(self, x0, p0):
        psi = mixture(1)
        assert abs(heisenberg_weyl([x0, p0], psi, CTX).norm() - psi.norm()) < 1e-12

    @given(unit, unit, unit, unit)
    def test_commutation(self, a, b, c, d):
        # narrow field: stays below 1e-14 at the cell edge after a shift by 2
        psi = bi.mixture(CFG, CTX, components=2, seed=5, spread=0.3, width_range=(0.6, 0.8))
        z0, z1 = [a, b], [c, d]
        lhs = heisenberg_weyl(z0, heisenberg_weyl(z1, psi, CTX), CTX)
        rhs = heisenberg_weyl(z1, heisenberg_weyl(z0, psi, CTX), CTX)
        assert max_err(lhs, rhs * np.exp(1j * symplectic_form(z0, z1))) < 1e-10

    def test_ground_state_to_coherent_state(self):
        # T(z0) phi0 = exp(-i x0 p0 / 2) coherent(x0, p0)
        out = heisenberg_weyl([0.7, -0.4], coherent(), CTX)
        assert max_err(out, coherent(0.7, -0.4) * np.exp(-0.5j * 0.7 * -0.4)) < 1e-10

    def test_rejects_large_shift(self):
        with pytest.raises(ValueError):
            heisenberg_weyl([9.0, 0.0], coherent(), CTX)


class TestPhaseTranslation:
    B = bi.mixture(PHASE, CTX, components=2, seed=4, spread=0.3, width_range=(0.6, 0.8))

    def test_identity(self):
        assert max_err(phase_translation([0, 0], self.B, CTX), self.B) == 0

    @given(small, small)
    def test_modulus_is_half_shift(self, x0, p0):
        out = phase_translation([x0, p0], self.B, CTX)
        ref = fourier_shift(self.B, [x0 / 2, p0 / 2])
        assert max_err(np.abs(out.values), np.abs(ref.values)) < 1e-12

    @given(unit, unit, unit, unit)
    def test_commutation_matches_heisenberg_weyl(self, a, b, c, d):
        z0, z1 = [a, b], [c, d]
        lhs = phase_translation(z0, phase_translation(z1, self.B, CTX), CTX)
        rhs = phase_translation(z1, phase_translation(z0, self.B, CTX), CTX)
        assert max_err(lhs, rhs * np.exp(1j * symplectic_form(z0, z1))) < 1e-10


class TestMetaplectic:
    def test_fourier_on_ground_state(self):
        out = metaplectic_apply(MetaplecticWord([FourierJ()]), coherent(), CTX)
        assert max_err(out, coherent() * 1j**-0.5) < 1e-10

    def test_fourier_inverse(self):
        psi = mixture(2, spread=0.3)
        w = MetaplecticWord([FourierJ(), FourierJ(inverse=True)])
        assert max_err(metaplectic_apply(w, psi, CTX), psi) < 1e-10

    def test_chirp_modulus(self):
        psi = mixture(2)
        out = metaplectic_apply(MetaplecticWord([Chirp([[0.3]])]), psi, CTX)
        assert max_err(np.abs(out.values), np.abs(psi.values)) < 1e-14

    def test_dilation_identity(self):
        psi = coherent(0.3, 0.2)
        assert max_err(metaplectic_apply(MetaplecticWord([Dilation([[1.0]])]), psi, CTX), psi) < 1e-12

    def test_dilation_of_gaussian(self):
        out = metaplectic_apply(MetaplecticWord([Dilation([[1.25]])]), coherent(), CTX)
        ref = sample(lambda x: np.sqrt(1.25) * np.pi**-0.25 * np.exp(-((1.25 * x) ** 2) / 2), CFG)
        assert max_err(out, ref) < 1e-10

    def test_dilation_guard(self):
        with pytest.raises(ValueError):
            metaplectic_apply(MetaplecticWord([Dilation([[0.5]])]), coherent(), CTX)

    def test_projection(self):
        J = standard_j(1)
        np.testing.assert_array_equal(MetaplecticWord([FourierJ()]).projection(), J)
        w = MetaplecticWord([Dilation([[2.0]]), Chirp([[0.5]])])
        np.testing.assert_allclose(w.projection(), [[0.5, 0], [0.5, 2.0]])

    def test_invalid_generators(self):
        with pytest.raises(ValueError):
            Chirp([[1.0, 2.0], [0.0, 1.0]])
        with pytest.raises(ValueError):
            Dilation([[0.0]])

    @pytest.mark.parametrize("z0", [(0.4, -0.3), (-0.8, 0.5)])
    def test_covariance_fourier(self, z0):
        assert hw_covariance_residual(MetaplecticWord([FourierJ()]), z0, coherent(), CTX) < 1e-8

    @pytest.mark.parametrize("z0", [(0.4, -0.3), (-0.8, 0.5)])
    def test_covariance_dilation(self, z0):
        assert hw_covariance_residual(MetaplecticWord([Dilation([[1.1]])]), z0, coherent(), CTX) < 1e-8

    def test_covariance_chirp(self):
        assert hw_covariance_residual(MetaplecticWord([Chirp([[0.2]])]), (0.3, 0.2), coherent(), CTX) < 1e-8
