"""The invariant battery behind ``moyalkit verify``.

Each check measures one residual (or fitted constant) and compares it with
a fixed limit.  Checks run on the scenario's context and grid where that
makes sense and on fixed auxiliary grids otherwise (polynomial symbols,
oscillator spectrum).  All randomness is seeded, so the report is a pure
function of the scenario.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from . import builtins as bi
from .fieldio import decode_field, encode_field
from .grid import GridSpec, SampledField, fourier_shift, hbar_fourier, inner_product, pullback, sample, symplectic_fourier
from .norms import (
    Weight,
    fitted_constant,
    gaussian_window,
    msinf1_norm,
    msq_norm,
    scaling_norm_bound_check,
    submultiplicative_constant,
    weight_eval,
)
from .propagation import (
    QuadraticHamiltonian,
    admissibility_ratios,
    exp_covariance_residual,
    exp_intertwine_residual,
    star_exp_propagate,
    star_exp_series,
    symbol_sup,
)
from .scenario import Scenario
from .star import (
    BoundaryDecayWarning,
    Symbol,
    bopp_apply,
    bopp_covariance_residual,
    moyal_bracket,
    moyal_star,
    scaling_law_residual,
    tau_quantize,
    twisted_product,
    weyl_covariance_residual,
    weyl_quantize,
)
from .symplectic import (
    HbarContext,
    double_form,
    embed_double_phase,
    gaussian_admissible,
    hardy_pair_check,
    standard_j,
    symplectic_flow,
    symplectic_form,
)
from .transforms import (
    Dilation,
    FourierJ,
    MetaplecticWord,
    cross_wigner,
    heisenberg_weyl,
    hw_covariance_residual,
    metaplectic_apply,
    wave_packet,
    wave_packet_adjoint,
    wigner_marginal_defect,
)

REPORT_HEADER = ("check", "module", "value", "limit", "relation", "status")


@dataclass(frozen=True)
class CheckResult:
    name: str
    module: str
    value: float
    limit: float
    relation: str  # "<=", ">=" or "fitted" (finite positive constant)

    @property
    def passed(self) -> bool:
        v = self.value
        if not math.isfinite(v):
            return False
        if self.relation == "<=":
            return v <= self.limit
        if self.relation == ">=":
            return v >= self.limit
        return v > 0

    def row(self) -> list:
        limit = "" if self.relation == "fitted" else f"{self.limit:.6e}"
        return [self.name, self.module, f"{self.value:.6e}", limit, self.relation, "pass" if self.passed else "FAIL"]


def report_csv(results: Iterable[CheckResult]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REPORT_HEADER)
    for r in results:
        w.writerow(r.row())
    return buf.getvalue()


# -- shared inputs ----------------------------------------------------------


def _coherent(cfg: GridSpec, ctx: HbarContext, x0: float = 0.0, p0: float = 0.0) -> SampledField:
    return bi.gaussian(cfg, ctx, center=[x0], momentum=[p0])


def _config_corpus(cfg: GridSpec, ctx: HbarContext, size: int, reach: float) -> list:
    """Coherent states and width-1 mixtures within ``reach`` of the origin in x and p.

    A unit-width field must decay in both x and p before the cell edge, so
    the reach sets the attainable accuracy (about exp(-(L/2 - reach)^2 / 2)).
    """
    k = size // 2
    xs = np.linspace(-reach, reach, k)
    out = [_coherent(cfg, ctx, x0, p0) for x0, p0 in zip(xs, xs[::-1])]
    out += [
        bi.mixture(cfg, ctx, components=2, seed=100 + j, spread=0.75 * reach, width_range=(0.9, 1.1))
        for j in range(size - k)
    ]
    return out


def _phase_mixture(G: GridSpec, ctx: HbarContext, seed: int) -> Symbol:
    return Symbol(bi.mixture(G, ctx, components=2, seed=seed, spread=1.5, width_range=(0.6, 1.0)), ctx)


def _skewed(G: GridSpec, ctx: HbarContext) -> Symbol:
    return Symbol.from_function(lambda x, p: np.exp(-((x - 0.5) ** 2) / 1.5 - p**2 / 0.8 + 0.4 * x * p), G, ctx)


def _slope(hs, errs) -> float:
    return float(np.polyfit(np.log(hs), np.log(errs), 1)[0])


# -- symplectic_core --------------------------------------------------------


def check_symplectic(scen: Scenario) -> list:
    rng = np.random.default_rng(1)
    pairs = rng.normal(size=(1000, 2, 2))
    J = standard_j(1)
    anti = max(abs(symplectic_form(a, b) + symplectic_form(b, a)) for a, b in pairs)
    mat = max(abs(symplectic_form(a, b) - (J @ a) @ b) for a, b in pairs)
    D = double_form(1)
    emb = 0.0
    for _ in range(20):
        X = rng.normal(size=(2, 2))
        E = embed_double_phase(symplectic_flow(X + X.T, 0.3))
        emb = max(emb, float(np.max(np.abs(E.T @ D @ E - D))))
    scale = 0.0
    for _ in range(10):
        X = rng.normal(size=(2, 2))
        M = X @ X.T + 0.5 * np.eye(2)
        base = gaussian_admissible(M)[0]
        for lam in (0.5, 2.0, 3.0):
            scale = max(scale, float(np.max(np.abs(gaussian_admissible(lam * M)[0] - lam * base) / (lam * base))))
    verdicts = [
        gaussian_admissible(np.eye(2))[1] is True,
        gaussian_admissible(np.diag([3.0, 1 / 3.0]))[1] is True,
        gaussian_admissible(2 * np.eye(2))[1] is False,
        hardy_pair_check(np.eye(1), np.eye(1))[1] is True,
    ]
    return [
        CheckResult("sigma_antisymmetry", "symplectic_core", anti, 0.0, "<="),
        CheckResult("sigma_matrix_identity", "symplectic_core", mat, 1e-14, "<="),
        CheckResult("double_embedding_symplectic", "symplectic_core", emb, 1e-10, "<="),
        CheckResult("admissible_scale_covariance", "symplectic_core", scale, 1e-12, "<="),
        CheckResult("admissibility_verdict_errors", "symplectic_core", float(verdicts.count(False)), 0.0, "<="),
    ]


# -- grid_engine ------------------------------------------------------------


def check_grid(scen: Scenario) -> list:
    ctx, G = scen.ctx, scen.grid
    cfg = G.config()
    corpus = _config_corpus(cfg, ctx, 6, 0.3)
    pars = rnd = 0.0
    for a, b in zip(corpus, corpus[1:]):
        Fa, Fb = hbar_fourier(a, ctx), hbar_fourier(b, ctx)
        pars = max(pars, abs(abs(inner_product(a, b)) - abs(inner_product(Fa, Fb))))
        rnd = max(rnd, float(np.max(np.abs(hbar_fourier(Fa, ctx, inverse=True).values - a.values))))
    inv = 0.0
    for k in range(3):
        A = Symbol.from_function(lambda x, p, k=k: np.exp(-((x - 0.3 * k) ** 2 + (p + 0.2 * k) ** 2) / 2), G, ctx).field
        inv = max(inv, float(np.max(np.abs(symplectic_fourier(symplectic_fourier(A, ctx), ctx).values - A.values))))
    f = corpus[0]
    add = 0.0
    for d1, d2 in ((0.3, -0.7), (1.1, 0.45), (-0.25, -0.5)):
        two = fourier_shift(fourier_shift(f, [d1]), [d2])
        add = max(add, float(np.max(np.abs(two.values - fourier_shift(f, [d1 + d2]).values))))
    return [
        CheckResult("fourier_parseval", "grid_engine", pars, 1e-12, "<="),
        CheckResult("fourier_round_trip", "grid_engine", rnd, 1e-12, "<="),
        CheckResult("symplectic_fourier_involution", "grid_engine", inv, 1e-10, "<="),
        CheckResult("fourier_shift_additivity", "grid_engine", add, 1e-12, "<="),
    ]


# -- transforms -------------------------------------------------------------


def check_transforms(scen: Scenario) -> list:
    ctx, G = scen.ctx, scen.grid
    cfg = G.config()
    moyal = 0.0
    for k in range(10):
        a, b, a2, b2 = (bi.mixture(cfg, ctx, components=2, seed=4 * k + i) for i in range(4))
        lhs = inner_product(cross_wigner(a, b, ctx), cross_wigner(a2, b2, ctx))
        rhs = inner_product(a, a2) * np.conj(inner_product(b, b2)) / (2 * np.pi * ctx.hbar)
        moyal = max(moyal, abs(lhs - rhs) / abs(rhs))
    phi = _coherent(cfg, ctx)
    W = cross_wigner(phi, phi, ctx)
    coh = abs(inner_product(W, W) * 2 * np.pi * ctx.hbar - 1.0)
    corpus = _config_corpus(cfg, ctx, 20, 1.2)
    iso = rec = adj = 0.0
    rng = np.random.default_rng(7)
    for psi in corpus:
        Wp = wave_packet(phi, psi, ctx)
        iso = max(iso, abs(Wp.norm() - psi.norm()))
        rec = max(rec, float(np.max(np.abs(wave_packet_adjoint(phi, Wp, ctx).values - psi.values))))
        Psi = Symbol(bi.mixture(G, ctx, components=2, seed=int(rng.integers(1 << 30)), spread=1.5), ctx).field
        adj = max(adj, abs(inner_product(Wp, Psi) - inner_product(psi, wave_packet_adjoint(phi, Psi, ctx))))
    probe = _coherent(cfg, ctx, 0.3, 0.4)
    words = {"J": MetaplecticWord([FourierJ()]), "dilation": MetaplecticWord([Dilation([[1.1]])])}
    hw = {
        k: max(hw_covariance_residual(w, z, probe, ctx) for z in ([0.7, -0.4], [0.5, 1.0], [-0.6, 0.9]))
        for k, w in words.items()
    }
    marg = max(wigner_marginal_defect(psi, ctx) for psi in corpus[:4])
    return [
        CheckResult("moyal_identity_relative", "transforms", moyal, 1e-8, "<="),
        CheckResult("moyal_identity_coherent", "transforms", coh, 1e-8, "<="),
        CheckResult("wave_packet_isometry", "transforms", iso, 1e-8, "<="),
        CheckResult("wave_packet_reconstruction", "transforms", rec, 1e-8, "<="),
        CheckResult("wave_packet_adjoint", "transforms", adj, 1e-8, "<="),
        CheckResult("hw_covariance_J", "transforms", hw["J"], 1e-8, "<="),
        CheckResult("hw_covariance_dilation", "transforms", hw["dilation"], 1e-8, "<="),
        CheckResult("wigner_marginal", "transforms", marg, 1e-8, "<="),
    ]


# -- star_product -----------------------------------------------------------

POLY_GRID = GridSpec.uniform(2, 128, 32.0)
POLY_ENVELOPE = (10.0, 1.1)
POLY_INTERIOR = 4.0
OSC_GRID = GridSpec.uniform(2, 128, 20.0)


def check_star(scen: Scenario) -> list:
    ctx, G = scen.ctx, scen.grid
    cfg = G.config()
    out = []
    B = _phase_mixture(G, ctx, 3)
    one = Symbol(bi.constant(G, ctx), ctx)
    out.append(CheckResult("unit_left", "star_product", float(np.max(np.abs(moyal_star(one, B).values - B.values))), 1e-9, "<="))
    assoc = 0.0
    for k in range(3):
        A, Bk, C = (_phase_mixture(G, ctx, 10 * k + i) for i in range(3))
        assoc = max(assoc, float(np.max(np.abs(moyal_star(moyal_star(A, Bk), C).values - moyal_star(A, moyal_star(Bk, C)).values))))
    out.append(CheckResult("associativity", "star_product", assoc, 1e-6, "<="))
    A = _skewed(G, ctx)
    W0 = Symbol(cross_wigner(_coherent(cfg, ctx), _coherent(cfg, ctx), ctx), ctx)
    hom = np.linalg.norm(weyl_quantize(moyal_star(A, W0)).entries - (weyl_quantize(A) @ weyl_quantize(W0)).entries, 2)
    out.append(CheckResult("quantization_homomorphism", "star_product", float(hom), 1e-6, "<="))
    conj = float(np.max(np.abs(moyal_star(A.conj(), W0.conj()).values - np.conj(moyal_star(W0, A).values))))
    out.append(CheckResult("conjugation", "star_product", conj, 1e-9, "<="))

    # classical limits on the scenario grid
    fa = lambda x, p: np.exp(-((x - 0.5) ** 2 + p**2) / 2)
    fb = lambda x, p: np.exp(-(x**2 / 1.5 + (p - 0.3) ** 2 / 2.5))
    X, P = G.mesh()
    a, b = fa(X, P), fb(X, P)
    pois = (-(X - 0.5) * a) * (-(2 * (P - 0.3) / 2.5) * b) - (-P * a) * (-(2 * X / 1.5) * b)
    hs = [0.4, 0.2, 0.1, 0.05]
    e1, e2, e3 = [], [], []
    for h in hs:
        c = ctx.with_hbar(h)
        Ah, Bh = Symbol(sample(fa, G), c), Symbol(sample(fb, G), c)
        e1.append(np.max(np.abs(moyal_star(Ah, Bh).values - a * b)))
        e2.append(np.max(np.abs(moyal_bracket(Ah, Bh).values - pois)))
        e3.append(np.max(np.abs(moyal_star(Ah, Ah).values - a * a)))
    out.append(CheckResult("classical_limit_slope", "star_product", _slope(hs, e1), 0.9, ">="))
    out.append(CheckResult("bracket_poisson_slope", "star_product", _slope(hs, e2), 1.8, ">="))
    out.append(CheckResult("classical_limit_slope_commuting", "star_product", _slope(hs, e3), 1.8, ">="))

    Jw, Dw = MetaplecticWord([FourierJ()]), MetaplecticWord([Dilation([[1.25]])])
    out.append(CheckResult("weyl_covariance_J", "star_product", weyl_covariance_residual(A, Jw), 1e-6, "<="))
    out.append(CheckResult("weyl_covariance_dilation", "star_product", weyl_covariance_residual(A, Dw), 1e-6, "<="))
    out.append(CheckResult("tau0_covariance_breaks", "star_product", weyl_covariance_residual(A, Jw, tau=0.0), 1e-2, ">="))
    Psi = Symbol.from_function(lambda x, p: np.exp(-(x**2 + p**2) / 2), G, ctx).field
    out.append(CheckResult("bopp_covariance_J", "star_product", bopp_covariance_residual(A, Psi, standard_j(1)), 1e-6, "<="))
    out.append(CheckResult("bopp_covariance_dilation", "star_product", bopp_covariance_residual(A, Psi, np.diag([0.8, 1.25])), 1e-6, "<="))

    ga = lambda x, p: np.exp(-(x * x + p * p) / 4)
    gb = lambda x, p: np.exp(-((x - 0.5) ** 2 + p * p / 1.5) / 3)
    out.append(CheckResult("hbar_scaling_law", "star_product", scaling_law_residual(ga, gb, G, ctx), 1e-7, "<="))
    ctw = ctx.with_hbar(1 / (2 * np.pi))
    same = np.array_equal(twisted_product(A, W0).values, moyal_star(A.with_ctx(ctw), W0.with_ctx(ctw)).values)
    out.append(CheckResult("twisted_equals_moyal_2pi", "star_product", 0.0 if same else 1.0, 0.0, "<="))

    # intertwining with enveloped quadratics
    phi = _coherent(cfg, ctx)
    psi = _coherent(cfg, ctx, 0.5, 0.3)
    intw = 0.0
    for M, m in (
        (np.eye(2), (0, 0)),
        ([[1, 0.3], [0.3, 0.5]], (0, 0)),
        ([[2, 0], [0, 0.5]], (0.3, 0)),
        ([[0.5, -0.2], [-0.2, 1]], (0, -0.2)),
        (np.eye(2), (0.4, 0.4)),
    ):
        Hq = QuadraticHamiltonian(M, m).symbol(G, ctx, r0=5 * G.extent[0] / 16)
        lhs = bopp_apply(Hq, wave_packet(phi, psi, ctx)).values
        rhs = wave_packet(phi, weyl_quantize(Hq).apply(psi), ctx).values
        intw = max(intw, float(np.max(np.abs(lhs - rhs))))
    out.append(CheckResult("intertwining", "star_product", intw, 1e-7, "<="))
    Hs = QuadraticHamiltonian(np.eye(2)).symbol(G, ctx, r0=5 * G.extent[0] / 16)
    ground = float(np.max(np.abs(bopp_apply(Hs, W0.field).values - 0.5 * ctx.hbar * W0.values)))
    out.append(CheckResult("oscillator_star_eigenvalue", "star_product", ground, 1e-7, "<="))

    # polynomial symbols on the wide grid
    r0, w = POLY_ENVELOPE
    env = lambda x, p: bi.flat_top(np.hypot(x, p), r0, w)
    xs = Symbol.from_function(lambda x, p: x * env(x, p), POLY_GRID, ctx)
    ps = Symbol.from_function(lambda x, p: p * env(x, p), POLY_GRID, ctx)
    Xp, Pp = POLY_GRID.mesh()
    inner = np.hypot(Xp, Pp) <= POLY_INTERIOR
    xp, px = moyal_star(xs, ps).values, moyal_star(ps, xs).values
    out.append(CheckResult("x_star_p", "star_product", float(np.abs(xp - (Xp * Pp + 0.5j * ctx.hbar))[inner].max()), 1e-6, "<="))
    out.append(CheckResult("canonical_commutator", "star_product", float(np.abs(xp - px - 1j * ctx.hbar)[inner].max()), 1e-6, "<="))
    out.append(CheckResult("bracket_x_p", "star_product", float(np.abs(moyal_bracket(xs, ps).values - 1)[inner].max()), 1e-6, "<="))
    XP = Symbol.from_function(lambda x, p: x * p * env(x, p), POLY_GRID, ctx)
    D = tau_quantize(XP, 0.0).entries - tau_quantize(XP, 1.0).entries
    xc = POLY_GRID.config().axis(0)
    tau = max(float(np.max(np.abs(D @ v - 1j * ctx.hbar * v))) for v in (np.exp(-((xc - c0) ** 2) / 2) for c0 in (-1, 0, 1)))
    out.append(CheckResult("tau_commutator", "star_product", tau, 1e-6, "<="))

    # oscillator spectrum
    osc = Symbol(bi.oscillator(OSC_GRID, ctx, r0=7.5, w=0.5), ctx)
    ev = np.linalg.eigvalsh(weyl_quantize(osc).entries)[:5]
    ev_err = float(np.max(np.abs(ev - ctx.hbar * (np.arange(5) + 0.5))))
    out.append(CheckResult("oscillator_spectrum", "star_product", ev_err, 1e-4, "<="))
    return out


# -- modulation_norms -------------------------------------------------------


def check_norms(scen: Scenario) -> list:
    ctx, G = scen.ctx, scen.grid
    cfg = G.config()
    rng = np.random.default_rng(11)
    sub = 0.0
    for s in (0.5, 1.0, 2.0, 3.5):
        wgt = Weight(s)
        z, w = rng.normal(scale=1.0, size=(2, 2500, 2))
        ratio = weight_eval(wgt, z + w) / (weight_eval(wgt, z) * weight_eval(wgt, w))
        sub = max(sub, float(np.max(ratio)) / submultiplicative_constant(s))
    gauss = [
        Symbol.from_function(lambda x, p: np.exp(-(x * x + p * p) / 2), G, ctx),
        _skewed(G, ctx),
        Symbol.from_function(lambda x, p: np.exp(-((x + 0.7) ** 2 + (p - 0.4) ** 2) / 1.2 + 0.5j * x), G, ctx),
    ]
    norms1 = [msinf1_norm(A, s=1.0).value for A in gauss]
    c = 2.5 - 1.5j
    hom = abs(msinf1_norm(gauss[1] * c, s=1.0).value - abs(c) * norms1[1]) / (abs(c) * norms1[1])
    tri = max(
        (msinf1_norm(gauss[i] + gauss[j], s=1.0).value - norms1[i] - norms1[j]) / (norms1[i] + norms1[j])
        for i, j in ((0, 1), (1, 2), (0, 2))
    )
    psi = _coherent(cfg, ctx, 0.3, 0.4)
    base = msq_norm(psi, q=1, s=1).value
    zs = [(0, 0), (1, 0), (0, 2), (-2, 1), (3, -3), (1.5, 1.5)]
    lhs = [msq_norm(heisenberg_weyl(z, psi, ctx), q=1, s=1).value for z in zs]
    rhs = [np.sqrt(1 + z[0] ** 2 + z[1] ** 2) * base for z in zs]
    hw = fitted_constant(lhs, rhs)
    Jw = MetaplecticWord([FourierJ()])
    ratios = []
    for f in _config_corpus(cfg, ctx, 6, 1.2):
        ratios.append(msq_norm(metaplectic_apply(Jw, f, ctx), q=1, s=1).value / msq_norm(f, q=1, s=1).value)
    meta = float(max(max(ratios), 1 / min(ratios)))
    M = np.diag([2.0, 0.5])
    Phi = gaussian_window(G)
    PhiM = pullback(Phi, np.linalg.inv(M))
    lin = fitted_constant(
        [msinf1_norm(pullback(A.field, M), PhiM, s=1.0).value for A in gauss[:2]], norms1[:2]
    )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BoundaryDecayWarning)
        prods = [moyal_star(A, B) for A in gauss[:2] for B in gauss[:2]]
    alg = fitted_constant(
        [msinf1_norm(C, s=1.0, check_tail=False).value for C in prods],
        [norms1[i] * norms1[j] for i in range(2) for j in range(2)],
    )
    bump = lambda x, p: np.exp(-(x * x + p * p) / 2)
    scal = max(
        r.lhs / r.rhs for r in (scaling_norm_bound_check(bump, G, 2.0, s) for s in (0.0, 1.0))
    )
    return [
        CheckResult("weight_submultiplicative", "modulation_norms", sub, 1.0, "<="),
        CheckResult("msinf1_homogeneity", "modulation_norms", hom, 1e-10, "<="),
        CheckResult("msinf1_triangle_excess", "modulation_norms", tri, 1e-12, "<="),
        CheckResult("msq_hw_bound_constant", "modulation_norms", hw, math.nan, "fitted"),
        CheckResult("msq_metaplectic_ratio", "modulation_norms", meta, math.nan, "fitted"),
        CheckResult("msinf1_linear_change_constant", "modulation_norms", lin, math.nan, "fitted"),
        CheckResult("msinf1_algebra_constant", "modulation_norms", alg, math.nan, "fitted"),
        CheckResult("scaling_bound_ratio_lambda2", "modulation_norms", scal, 1.0 + 1e-6, "<="),
    ]


# -- star_exponential -------------------------------------------------------


def check_exponential(scen: Scenario) -> list:
    ctx, G = scen.ctx, scen.grid
    cfg = G.config()
    phi = _coherent(cfg, ctx)
    psi = _coherent(cfg, ctx, 0.6, 0.4)
    P0 = wave_packet(phi, psi, ctx)
    out = []
    bump = Symbol.from_function(lambda x, p: np.exp(-((x - 0.5) ** 2 + p * p) / 2), G, ctx)
    uni = star_exp_propagate(bump, P0, 2.0, 0.01 * ctx.hbar / symbol_sup(bump), record=False)
    out.append(CheckResult("exp_unitarity", "star_exponential", uni.norm_drift, 1e-6, "<="))
    r0 = 5 * G.extent[0] / 16
    Q = QuadraticHamiltonian([[1, 0.3], [0.3, 0.5]], [0.2, -0.1]).symbol(G, ctx, r0=r0)
    R = admissibility_ratios(Q, phi, psi, (0.25, 0.5, 0.75, 1.0))
    out.append(CheckResult("exp_admissibility_ratio", "star_exponential", float(max(R.max(), 1 / R.min())), 3.0, "<="))
    Ha = QuadraticHamiltonian(np.diag([1.0, 2.0])).symbol(G, ctx, r0=r0)
    out.append(CheckResult("exp_covariance_J", "star_exponential", exp_covariance_residual(Ha, P0, standard_j(1), 0.1), 1e-5, "<="))
    H = QuadraticHamiltonian(np.eye(2)).symbol(G, ctx, r0=r0)
    dt = 0.01 * ctx.hbar / symbol_sup(H)
    ser = star_exp_series(H, P0, 0.1, 20).Psi_t
    stp = star_exp_propagate(H, P0, 0.1, dt, record=False).Psi_t
    out.append(CheckResult("exp_series_vs_stepper", "star_exponential", float(np.max(np.abs(ser.values - stp.values))), 1e-6, "<="))
    out.append(CheckResult("exp_intertwining", "star_exponential", exp_intertwine_residual(H, phi, psi, 0.5), 1e-5, "<="))
    return out


# -- cli_runner -------------------------------------------------------------


def check_io(scen: Scenario) -> list:
    ctx, G = scen.ctx, scen.grid
    F = bi.mixture(G, ctx, seed=5)
    data = encode_field(F, ctx)
    back, _ = decode_field(data, ctx.hbar)
    same = encode_field(back, ctx) == data and np.array_equal(back.values, F.values)
    return [CheckResult("field_file_round_trip", "cli_runner", 0.0 if same else 1.0, 0.0, "<=")]


BATTERY: tuple[Callable[[Scenario], list], ...] = (
    check_symplectic,
    check_grid,
    check_transforms,
    check_star,
    check_norms,
    check_exponential,
    check_io,
)


def run_verify(scen: Scenario) -> list:
    results = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BoundaryDecayWarning)
        for check in BATTERY:
            results.extend(check(scen))
    return results
