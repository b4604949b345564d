import warnings

import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

import oracles as orc
from conftest import max_err
from moyalkit import builtins as bi
from moyalkit import star as star_mod
from moyalkit.grid import GridSpec, SampledField, sample
from moyalkit.propagation import QuadraticHamiltonian
from moyalkit.star import (
    BoppOperator,
    BoundaryDecayWarning,
    OperatorMatrix,
    Symbol,
    bopp_apply,
    bopp_covariance_residual,
    bopp_symbol,
    inverse_weyl_symbol,
    moyal_bracket,
    moyal_star,
    moyal_star_direct,
    moyal_star_translations,
    scaling_law_residual,
    tau_quantize,
    twisted_product,
    weyl_covariance_residual,
    weyl_quantize,
    wiener_inverse_symbol,
)
from moyalkit.symplectic import HbarContext, standard_j
from moyalkit.transforms import Dilation, FourierJ, MetaplecticWord, Window, cross_wigner, wave_packet

CTX = HbarContext(1.0, 1)
G = GridSpec.uniform(2, 64, 16.0)
CFG = G.config()
X, P = G.mesh()

# polynomial symbols: wide grid, flat-top envelope equal to 1 on |z| <= 4 to 1e-16
POLY = GridSpec.uniform(2, 128, 32.0)
PX, PP = POLY.mesh()
INNER = np.hypot(PX, PP) <= 4.0


def env(x, p):
    return bi.flat_top(np.hypot(x, p), 10.0, 1.1)


def poly(expr) -> Symbol:
    xs, ps = sp.symbols("x p", real=True)
    f = sp.lambdify((xs, ps), expr, "numpy")
    return Symbol.from_function(lambda x, p: f(x, p) * env(x, p) + 0 * x, POLY, CTX)


def gauss(P_, c, k=(0.0, 0.0), grid=G, ctx=CTX) -> Symbol:
    return Symbol(sample(orc.phase_gaussian(P_, c, k), grid), ctx)


def mixture(seed: int) -> Symbol:
    return Symbol(bi.mixture(G, CTX, components=2, seed=seed, spread=1.5, width_range=(0.6, 1.0)), CTX)


def coherent(x0=0.0, p0=0.0):
    return bi.gaussian(CFG, CTX, center=[x0], momentum=[p0])


W0 = Symbol(cross_wigner(coherent(), coherent(), CTX), CTX)
SKEWED = Symbol.from_function(lambda x, p: np.exp(-((x - 0.5) ** 2) / 1.5 - p**2 / 0.8 + 0.4 * x * p), G, CTX)
PAIRS = [
    (([[0.8, 0.15], [0.15, 0.6]], (0.4, -0.2), (0.5, -0.3)), ([[0.5, -0.1], [-0.1, 0.9]], (-0.3, 0.25), (-0.2, 0.4))),
    ((np.eye(2) * 0.5, (0.0, 0.0), (0.0, 0.0)), (np.eye(2) * 0.5, (0.0, 0.0), (0.0, 0.0))),
    (([[1.2, 0.0], [0.0, 0.4]], (0.7, 0.0), (0.0, 0.0)), ([[0.6, 0.2], [0.2, 0.6]], (0.0, -0.6), (0.3, 0.0))),
]


class TestSymbol:
    def test_axis_count(self):
        with pytest.raises(ValueError):
            Symbol(coherent(), CTX)

    def test_arithmetic(self):
        A, B = mixture(1), mixture(2)
        assert max_err((A + B) - B, A) < 1e-15
        assert max_err(2 * A, A.values * 2) == 0
        assert max_err(A.conj(), np.conj(A.values)) == 0

    def test_pair_checks(self):
        with pytest.raises(ValueError):
            moyal_star(mixture(1), mixture(2).with_ctx(HbarContext(0.5)))
        with pytest.raises(ValueError):
            moyal_star(mixture(1), gauss(np.eye(2), (0, 0), grid=GridSpec.uniform(2, 32, 16.0)))


class TestMoyalStar:
    def test_unit_left_is_exact(self):
        B = mixture(3)
        one = Symbol(bi.constant(G, CTX), CTX)
        assert np.array_equal(moyal_star(one, B).values, B.values)

    def test_unit_right(self):
        B = mixture(3)
        one = Symbol(bi.constant(G, CTX), CTX)
        assert max_err(moyal_star(B, one), B) < 1e-12

    def test_constant_factor(self):
        B = mixture(3)
        c = Symbol(bi.constant(G, CTX, 2 - 1j), CTX)
        assert max_err(moyal_star(c, B), B.values * (2 - 1j)) == 0

    @pytest.mark.parametrize("hbar", [1.0, 0.5, 0.25])
    @pytest.mark.parametrize("pair", range(len(PAIRS)))
    def test_gaussian_pairs_against_double_integral(self, hbar, pair):
        a, b = PAIRS[pair]
        ctx = HbarContext(hbar)
        C = moyal_star(gauss(*a, ctx=ctx), gauss(*b, ctx=ctx))
        x = G.axis(0)
        rows = range(16, 48, 3)
        ref = np.array([[orc.star_gaussians(a, b, (x[i], x[j]), hbar) for j in rows] for i in rows])
        assert max_err(C.values[np.ix_(rows, rows)], ref) < 1e-10

    @given(
        st.floats(0.35, 1.0), st.floats(0.35, 1.0), st.floats(-0.15, 0.15),
        st.floats(-0.5, 0.5), st.floats(-0.5, 0.5), st.floats(-0.5, 0.5), st.floats(-0.5, 0.5),
    )
    def test_random_gaussians(self, a, b, r, cx, cp, kx, kp):
        A = ([[a, r], [r, b]], (cx, cp), (kx, kp))
        B = ([[b, -r], [-r, a]], (-cp, cx), (kp, -kx))
        C = moyal_star(gauss(*A), gauss(*B))
        x = G.axis(0)
        for i, j in ((32, 32), (28, 35), (40, 30)):
            assert abs(C.values[i, j] - orc.star_gaussians(A, B, (x[i], x[j]), 1.0)) < 1e-9

    def test_ground_state_wigner_idempotent(self):
        assert max_err(moyal_star(W0, W0), W0.values / (2 * np.pi)) < 1e-7

    @given(st.integers(0, 300))
    def test_associativity(self, seed):
        A, B, C = (mixture(3 * seed + k) for k in range(3))
        assert max_err(moyal_star(moyal_star(A, B), C), moyal_star(A, moyal_star(B, C))) < 1e-6

    @given(st.integers(0, 300))
    def test_conjugation(self, seed):
        A, B = mixture(2 * seed), mixture(2 * seed + 1)
        assert max_err(moyal_star(A.conj(), B.conj()), np.conj(moyal_star(B, A).values)) < 1e-9

    def test_bilinear(self):
        A, B, C = mixture(1), mixture(2), mixture(3)
        lhs = moyal_star(A * 2.0 + B, C)
        rhs = moyal_star(A, C) * 2.0 + moyal_star(B, C)
        assert max_err(lhs, rhs) < 1e-12

    def test_translation_sum_reference(self):
        grid = GridSpec.uniform(2, 32, 12.0)
        a = (np.eye(2) / 2.0, (0.2, -0.1), (0.0, 0.0))
        b = (np.eye(2) / 2.4, (-0.1, 0.2), (0.0, 0.0))
        A, B = gauss(*a, grid=grid), gauss(*b, grid=grid)
        assert max_err(moyal_star_translations(A, B), moyal_star(A, B)) < 1e-9

    def test_direct_quadrature_small_grid(self):
        # 16 nodes per axis resolve these Gaussians to about 6e-6
        ctx = HbarContext(2.0)
        grid = GridSpec.uniform(2, 16, 10.0)
        a = (np.eye(2) / 2.0, (0.2, -0.1), (0.0, 0.0))
        b = (np.eye(2) / 2.4, (-0.1, 0.2), (0.0, 0.0))
        x = grid.axis(0)
        ref = np.array([[orc.star_gaussians(a, b, (u, v), 2.0) for v in x] for u in x])
        D = moyal_star_direct(gauss(*a, grid=grid, ctx=ctx), gauss(*b, grid=grid, ctx=ctx))
        assert max_err(D, ref) < 1e-5
        with pytest.raises(ValueError):
            moyal_star_direct(mixture(1), mixture(2))

    def test_boundary_warning(self):
        bump = Symbol.from_function(lambda x, p: np.exp(-(x * x + p * p) / 40), G, CTX)
        with pytest.warns(BoundaryDecayWarning):
            moyal_star(bump, mixture(1))

    def test_n2_rejected(self):
        ctx2 = HbarContext(1.0, 2)
        S = Symbol(SampledField(GridSpec.uniform(4, 8, 8.0), np.zeros(8**4)), ctx2)
        with pytest.raises(ValueError):
            moyal_star(S, S)


class TestPolynomialSymbols:
    xs, ps = sp.symbols("x p", real=True)

    @pytest.mark.parametrize(
        "a, b",
        [("x", "p"), ("p", "x"), ("x**2", "p**2"), ("x**3 - 2*x*p", "p**2*x + p"), ("x*p", "x*p")],
    )
    def test_against_groenewold_series(self, a, b):
        ea, eb = sp.sympify(a, locals={"x": self.xs, "p": self.ps}), sp.sympify(b, locals={"x": self.xs, "p": self.ps})
        ref = sp.lambdify((self.xs, self.ps), orc.groenewold_star(ea, eb, 1.0) + 0 * self.xs, "numpy")(PX, PP)
        C = moyal_star(poly(ea), poly(eb)).values
        scale = max(1.0, float(np.abs(ref[INNER]).max()))
        assert np.abs(C - ref)[INNER].max() < 1e-6 * scale

    def test_x_star_p(self):
        C = moyal_star(poly(self.xs), poly(self.ps)).values
        assert np.abs(C - (PX * PP + 0.5j))[INNER].max() < 1e-6

    def test_bracket_x_p(self):
        assert np.abs(moyal_bracket(poly(self.xs), poly(self.ps)).values - 1)[INNER].max() < 1e-6


class TestBracket:
    @given(st.integers(0, 300))
    def test_antisymmetric(self, seed):
        A = mixture(seed)
        assert max_err(moyal_bracket(A, A), 0) < 1e-10

    def test_poisson_limit(self):
        fa = lambda x, p: np.exp(-((x - 0.5) ** 2 + p**2) / 2)
        fb = lambda x, p: np.exp(-(x**2 / 1.5 + (p - 0.3) ** 2 / 2.5))
        a, b = fa(X, P), fb(X, P)
        pois = (-(X - 0.5) * a) * (-(2 * (P - 0.3) / 2.5) * b) - (-P * a) * (-(2 * X / 1.5) * b)
        errs = []
        for h in (0.2, 0.1):
            c = HbarContext(h)
            errs.append(max_err(moyal_bracket(Symbol(sample(fa, G), c), Symbol(sample(fb, G), c)), pois))
        # O(hbar^2): halving hbar divides the error by about 4
        assert errs[0] / errs[1] > 3.5


class TestTwisted:
    def test_is_moyal_at_reduced_hbar(self):
        A, B = mixture(1), mixture(2)
        c = CTX.with_hbar(1 / (2 * np.pi))
        assert np.array_equal(twisted_product(A, B).values, moyal_star(A.with_ctx(c), B.with_ctx(c)).values)

    def test_unit(self):
        B = mixture(2)
        assert max_err(twisted_product(Symbol(bi.constant(G, CTX), CTX), B), B) < 1e-9

    def test_conjugation(self):
        A, B = mixture(4), mixture(5)
        assert max_err(np.conj(twisted_product(A, B).values), twisted_product(B.conj(), A.conj())) < 1e-9

    @pytest.mark.parametrize("hbar", [1.0, 0.5])
    def test_scaling_law(self, hbar):
        ga = lambda x, p: np.exp(-(x * x + p * p) / 4)
        gb = lambda x, p: np.exp(-((x - 0.5) ** 2 + p * p / 1.5) / 3)
        assert scaling_law_residual(ga, gb, G, HbarContext(hbar)) < 1e-7

    @pytest.mark.parametrize("hbar, gap", [(1.0, 0.05), (0.5, 0.015)])
    def test_scaling_law_needs_2pi_in_dilation(self, hbar, gap):
        # with lambda = sqrt(hbar) the two sides differ by an O(1) amount
        ga = lambda x, p: np.exp(-(x * x + p * p) / 4)
        gb = lambda x, p: np.exp(-((x - 0.5) ** 2 + p * p / 1.5) / 3)
        assert scaling_law_residual(ga, gb, G, HbarContext(hbar), lam=np.sqrt(hbar)) > gap


class TestBopp:
    def test_unit(self):
        Psi = mixture(1).field
        assert bopp_apply(Symbol(bi.constant(G, CTX), CTX), Psi) is Psi

    def test_operator_reuse(self):
        A, Psi = mixture(1), mixture(2).field
        op = BoppOperator(A)
        assert max_err(op(Psi), bopp_apply(A, Psi)) == 0
        assert max_err(op(Psi), moyal_star(A, Symbol(Psi, CTX))) == 0

    def test_blocked_path_matches_cached(self, monkeypatch):
        A, Psi = mixture(1), mixture(2).field
        cached = BoppOperator(A)(Psi)
        monkeypatch.setattr(star_mod, "_PLAN_CACHE_LIMIT", 64 * 96 * 5)
        op = BoppOperator(A)
        assert op._Xf is None
        assert max_err(op(Psi), cached) < 1e-14

    @pytest.mark.parametrize(
        "M, m",
        [
            (np.eye(2), (0, 0)),
            ([[1, 0.3], [0.3, 0.5]], (0, 0)),
            ([[2, 0], [0, 0.5]], (0.3, 0)),
            ([[0.5, -0.2], [-0.2, 1]], (0, -0.2)),
            (np.eye(2), (0.4, 0.4)),
        ],
    )
    def test_intertwining(self, M, m):
        H = QuadraticHamiltonian(M, m).symbol(G, CTX, r0=5.0)
        phi, psi = Window(coherent()), coherent(0.5, 0.3)
        lhs = bopp_apply(H, wave_packet(phi, psi, CTX))
        rhs = wave_packet(phi, weyl_quantize(H).apply(psi), CTX)
        assert max_err(lhs, rhs) < 1e-7

    def test_oscillator_ground_state(self):
        H = QuadraticHamiltonian(np.eye(2)).symbol(G, CTX, r0=5.0)
        Psi = wave_packet(Window(coherent()), coherent(), CTX)
        assert max_err(bopp_apply(H, Psi), Psi.values * 0.5) < 1e-7

    def test_covariance(self):
        Psi = sample(lambda x, p: np.exp(-(x * x + p * p) / 2), G)
        assert bopp_covariance_residual(SKEWED, Psi, standard_j(1)) < 1e-6
        assert bopp_covariance_residual(SKEWED, Psi, np.diag([0.8, 1.25])) < 1e-6
        with pytest.raises(ValueError):
            bopp_covariance_residual(SKEWED, Psi, np.diag([2.0, 1.0]))


class TestBoppSymbol:
    def test_zero_zeta(self):
        f = bopp_symbol(SKEWED)
        pts = np.array([[0.3, -0.2], [1.0, 0.5]])
        ref = np.exp(-((pts[:, 0] - 0.5) ** 2) / 1.5 - pts[:, 1] ** 2 / 0.8 + 0.4 * pts[:, 0] * pts[:, 1])
        assert max_err(f(pts, np.zeros_like(pts)), ref) < 1e-10

    def test_radial_gaussian(self):
        A = Symbol.from_function(lambda x, p: np.exp(-(x * x + p * p) / 2), G, CTX)
        zeta = np.array([[0.4, -1.0], [2.0, 0.6], [-1.2, -0.8]])
        ref = np.exp(-np.sum(zeta**2, axis=1) / 8)
        assert max_err(bopp_symbol(A)(np.zeros_like(zeta), zeta), ref) < 1e-9

    def test_linear(self):
        A, B = mixture(1), mixture(2)
        z, zeta = np.array([[0.2, 0.1]]), np.array([[0.5, -0.4]])
        lhs = bopp_symbol(A * 2.0 + B)(z, zeta)
        rhs = 2.0 * bopp_symbol(A)(z, zeta) + bopp_symbol(B)(z, zeta)
        assert max_err(lhs, rhs) < 1e-12


class TestQuantization:
    def test_identity(self):
        K = weyl_quantize(Symbol(bi.constant(G, CTX), CTX))
        assert max_err(K.entries, np.eye(64)) < 1e-9

    @pytest.mark.parametrize("tau", [0.0, 0.3, 0.5, 1.0])
    def test_gaussian_kernel(self, tau):
        Pm, c = [[0.8, 0.15], [0.15, 0.6]], (0.4, -0.2)
        A = gauss(Pm, c)
        K = weyl_quantize(A) if tau == 0.5 else tau_quantize(A, tau)
        x = CFG.axis(0)
        dx = CFG.spacing[0]
        idx = range(20, 44, 2)
        ref = np.array([[orc.tau_kernel_gaussian(Pm, c, x[i], x[j], 1.0, tau) * dx for j in idx] for i in idx])
        assert max_err(K.entries[np.ix_(idx, idx)], ref) < 1e-10

    def test_tau_half_is_weyl(self):
        assert max_err(tau_quantize(SKEWED, 0.5).entries, weyl_quantize(SKEWED).entries) < 1e-8

    def test_real_symbol_hermitian(self):
        assert weyl_quantize(SKEWED).hermitian_defect() < 1e-12

    def test_position_symbol(self):
        # the p cut-off smooths the kernel, so test on band-limited vectors
        K = weyl_quantize(poly(sp.Symbol("x", real=True))).entries
        xc = POLY.config().axis(0)
        for c0, k0 in ((-1.0, 0.0), (0.5, 1.5), (1.5, -2.0)):
            v = np.exp(-((xc - c0) ** 2) / 2 + 1j * k0 * xc)
            assert np.max(np.abs(K @ v - xc * v)) < 1e-6

    def test_xp_ordering_commutator(self):
        xs, ps = sp.symbols("x p", real=True)
        XP = poly(xs * ps)
        D = tau_quantize(XP, 0.0).entries - tau_quantize(XP, 1.0).entries
        xc = POLY.config().axis(0)
        for c0 in (-1.0, 0.0, 1.0):
            v = np.exp(-((xc - c0) ** 2) / 2)
            assert np.max(np.abs(D @ v - 1j * v)) < 1e-5

    def test_oscillator_spectrum(self):
        grid = GridSpec.uniform(2, 128, 20.0)
        osc = Symbol(bi.oscillator(grid, CTX, r0=7.5), CTX)
        ev = np.linalg.eigvalsh(weyl_quantize(osc).entries)[:5]
        assert np.max(np.abs(ev - (np.arange(5) + 0.5))) < 1e-4

    def test_ground_state_projector(self):
        K = weyl_quantize(W0 * (2 * np.pi)).entries
        v = coherent().values * np.sqrt(CFG.cell)
        assert max_err(K, np.outer(v, v.conj())) < 1e-9
        assert max_err(K @ K, K) < 1e-9

    def test_homomorphism(self):
        lhs = weyl_quantize(moyal_star(SKEWED, W0)).entries
        rhs = (weyl_quantize(SKEWED) @ weyl_quantize(W0)).entries
        assert np.linalg.norm(lhs - rhs, 2) < 1e-6

    def test_covariance(self):
        J = MetaplecticWord([FourierJ()])
        assert weyl_covariance_residual(SKEWED, J) < 1e-6
        assert weyl_covariance_residual(SKEWED, MetaplecticWord([Dilation([[1.25]])])) < 1e-6
        assert weyl_covariance_residual(SKEWED, J, tau=0.5) < 1e-6
        assert weyl_covariance_residual(SKEWED, J, tau=0.0) > 1e-2

    def test_argument_checks(self):
        with pytest.raises(ValueError):
            tau_quantize(SKEWED, 1.5)
        big = GridSpec.uniform(2, 512, 16.0)
        with pytest.raises(ValueError):
            weyl_quantize(Symbol(SampledField(big, np.zeros((512, 512))), CTX))
        with pytest.raises(ValueError):
            OperatorMatrix(np.eye(3), CFG, CTX)


class TestInverseWeylSymbol:
    def test_identity(self):
        A = inverse_weyl_symbol(OperatorMatrix(np.eye(64, dtype=complex), CFG, CTX))
        assert max_err(A, 1.0) < 1e-8

    def test_round_trip(self):
        back = inverse_weyl_symbol(weyl_quantize(SKEWED))
        inner = np.hypot(X, P) <= 4
        assert np.abs(back.values - SKEWED.values)[inner].max() < 1e-7

    def test_wiener_inverse(self):
        A = Symbol.from_function(lambda x, p: 1 + 0.3 * np.exp(-(x * x + p * p)), G, CTX)
        B = wiener_inverse_symbol(A)
        # B is the symbol of the inverse: A * B = 1
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", BoundaryDecayWarning)
            prod = weyl_quantize(A).entries @ weyl_quantize(B).entries
        assert max_err(prod, np.eye(64)) < 1e-8
        # far from the bump the inverse symbol tends to 1
        assert abs(B.values[0, 0] - 1) < 1e-8
        assert abs(B.values[32, 32] - 1 / 1.3) < 0.05
