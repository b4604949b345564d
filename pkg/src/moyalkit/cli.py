"""Command-line front end: ``moyalkit <command> --config <scenario.yaml> --out <dir>``.

Exit codes: 0 success, 1 verification failure, 2 malformed scenario or
arguments, 3 violated precondition, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np
from threadpoolctl import threadpool_limits

from .fieldio import write_field
from .grid import GridSpec, SampledField, set_workers
from .norms import msinf1_norm, msq_norm, reports_csv
from .propagation import (
    DEFAULT_CFL,
    PropagationError,
    default_dt,
    energy,
    star_exp_propagate,
    star_exp_series,
)
from .scenario import Scenario, ScenarioError, load_scenario
from .star import Symbol, moyal_bracket, moyal_star, tau_quantize, twisted_product, weyl_quantize
from .symplectic import gaussian_admissible, hardy_pair_check
from .transforms import Window, cross_wigner, wave_packet
from .verify import report_csv, run_verify

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_PRECONDITION, EXIT_NUMERICAL = 0, 1, 2, 3, 4
THREADS_ENV = "MOYALKIT_THREADS"


def _write_text(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, newline="")
    os.replace(tmp, path)


def _csv(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _symbol(scen: Scenario, name: str) -> Symbol:
    F = scen.input(name)
    if F.grid != scen.grid:
        raise ValueError(f"input {name!r} must be a phase-space field on the scenario grid")
    return Symbol(F, scen.ctx)


def _config(scen: Scenario, name: str) -> SampledField:
    F = scen.input(name)
    if F.grid != scen.config_grid:
        raise ValueError(f"input {name!r} must be a configuration-space field (space: config)")
    return F


def _matrix(scen: Scenario, key: str) -> Optional[np.ndarray]:
    if key not in scen.params:
        return None
    try:
        M = np.array(scen.params[key], dtype=float)
    except (TypeError, ValueError):
        raise ScenarioError(f"parameter {key!r} is not a numeric matrix") from None
    if M.ndim != 2:
        raise ScenarioError(f"parameter {key!r} must be a nested list (matrix)")
    return M


def _fmt(v: float) -> str:
    return f"{v:.6e}"


# -- commands ---------------------------------------------------------------


def cmd_wigner(scen: Scenario, out: Path) -> int:
    """cross_wigner(psi, phi) (mode: cross) or wave_packet(phi, psi) (mode: wave_packet) -> wigner.mkf."""
    mode = scen.param("mode", "cross", str)
    psi = _config(scen, "psi")
    phi = _config(scen, "phi") if scen.has("phi") else psi
    if mode == "cross":
        W = cross_wigner(psi, phi, scen.ctx)
    elif mode == "wave_packet":
        W = wave_packet(Window(phi), psi, scen.ctx)
    else:
        raise ScenarioError(f"mode must be 'cross' or 'wave_packet', got {mode!r}")
    write_field(W, out / "wigner.mkf", scen.ctx)
    return EXIT_OK


_PRODUCTS: dict[str, Callable[[Symbol, Symbol], Symbol]] = {
    "moyal": moyal_star,
    "twisted": twisted_product,
    "bracket": moyal_bracket,
}


def cmd_star(scen: Scenario, out: Path) -> int:
    """A * B (product: moyal | twisted | bracket) -> star.mkf."""
    kind = scen.param("product", "moyal", str)
    if kind not in _PRODUCTS:
        raise ScenarioError(f"product must be one of {sorted(_PRODUCTS)}, got {kind!r}")
    C = _PRODUCTS[kind](_symbol(scen, "A"), _symbol(scen, "B"))
    write_field(C.field, out / "star.mkf", scen.ctx)
    return EXIT_OK


def cmd_quantize(scen: Scenario, out: Path) -> int:
    """tau-quantization matrix of A -> operator.mkf (an N x N field); optional spectrum.csv."""
    tau = scen.param("tau", 0.5)
    A = _symbol(scen, "A")
    K = weyl_quantize(A) if tau == 0.5 else tau_quantize(A, tau)
    cfg = K.grid
    square = GridSpec((cfg.points[0], cfg.points[0]), (cfg.extent[0], cfg.extent[0]))
    write_field(SampledField(square, K.entries), out / "operator.mkf", scen.ctx)
    count = scen.param("eigenvalues", 0, int)
    if count > 0:
        if K.hermitian_defect() > 1e-10:
            raise ValueError("eigenvalues requested for a non-Hermitian operator")
        ev = np.linalg.eigvalsh(0.5 * (K.entries + K.entries.conj().T))[:count]
        _write_text(out / "spectrum.csv", _csv(("k", "eigenvalue"), [(k, _fmt(e)) for k, e in enumerate(ev)]))
    return EXIT_OK


def cmd_norm(scen: Scenario, out: Path) -> int:
    """Modulation-space norm estimate of one input -> norm.csv.

    Phase-space inputs get the M^{inf,1}_s estimate (q must be 1),
    configuration-space inputs the M^q_s estimate.  With ``refine: true``
    the scenario is rebuilt on a doubled grid and the relative drift is
    reported.
    """
    name = scen.param("input", "A", str)
    q, s = scen.param("q", 1.0), scen.param("s", 0.0)

    def estimate(sc: Scenario):
        F = sc.input(name)
        if F.grid == sc.grid:
            if q != 1:
                raise ValueError("phase-space inputs support q = 1 only")
            return msinf1_norm(Symbol(F, sc.ctx), s=s)
        return msq_norm(F, q=q, s=s)

    report = estimate(scen)
    if scen.param("refine", False, bool):
        report = report.with_drift(estimate(scen.refined(2)))
    if not math.isfinite(report.value):
        raise FloatingPointError("norm estimate is not finite")
    _write_text(out / "norm.csv", reports_csv([report]))
    return EXIT_OK


def cmd_propagate(scen: Scenario, out: Path) -> int:
    """Exp(Ht) applied to Psi0 -> propagated.mkf and diagnostics.csv.

    Psi0 is the phase-space input ``Psi0`` or, failing that, wave_packet(phi, psi)
    from configuration-space inputs.  method: stepper (default) or series.
    """
    H = _symbol(scen, "H")
    if scen.has("Psi0"):
        Psi0 = _symbol(scen, "Psi0").field
    else:
        psi = _config(scen, "psi")
        phi = _config(scen, "phi") if scen.has("phi") else psi
        Psi0 = wave_packet(Window.normalized(phi), psi, scen.ctx)
    t = scen.param("t", 1.0)
    method = scen.param("method", "stepper", str)
    if method == "stepper":
        cfl = scen.param("cfl", DEFAULT_CFL)
        dt = scen.param("dt", default_dt(H, cfl, t))
        res = star_exp_propagate(H, Psi0, t, dt, cfl=cfl)
    elif method == "series":
        res = star_exp_series(H, Psi0, t, scen.param("K", 20, int))
        res.diagnostics = [
            (0, 0.0, Psi0.norm(), energy(H, Psi0)),
            (res.steps, t, res.Psi_t.norm(), energy(H, res.Psi_t)),
        ]
    else:
        raise ScenarioError(f"method must be 'stepper' or 'series', got {method!r}")
    if not np.all(np.isfinite(res.Psi_t.values)):
        raise PropagationError("propagated field is not finite")
    write_field(res.Psi_t, out / "propagated.mkf", scen.ctx)
    _write_text(out / "diagnostics.csv", res.diagnostics_csv())
    return EXIT_OK


def cmd_admissible(scen: Scenario, out: Path) -> int:
    """gaussian_admissible(M) and/or hardy_pair_check(A, B) -> admissible.csv."""
    rows = []
    M = _matrix(scen, "M")
    if M is not None:
        moduli, ok = gaussian_admissible(M)
        rows.append(("gaussian", _fmt(moduli[-1]), " ".join(map(_fmt, moduli)), str(ok).lower()))
    A, B = _matrix(scen, "A"), _matrix(scen, "B")
    if (A is None) != (B is None):
        raise ScenarioError("hardy pair needs both A and B")
    if A is not None:
        eigs, ok = hardy_pair_check(A, B)
        rows.append(("hardy", _fmt(eigs[-1]), " ".join(map(_fmt, eigs)), str(ok).lower()))
    if not rows:
        raise ScenarioError("admissible needs parameter M or parameters A and B")
    _write_text(out / "admissible.csv", _csv(("check", "max", "values", "ok"), rows))
    return EXIT_OK


def cmd_verify(scen: Scenario, out: Path) -> int:
    """Run the invariant battery -> verify.csv; exit 1 if any check fails."""
    results = run_verify(scen)
    _write_text(out / "verify.csv", report_csv(results))
    failed = [r.name for r in results if not r.passed]
    for name in failed:
        print(f"FAIL {name}", file=sys.stderr)
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return EXIT_VERIFY if failed else EXIT_OK


COMMANDS: dict[str, Callable[[Scenario, Path], int]] = {
    "wigner": cmd_wigner,
    "star": cmd_star,
    "quantize": cmd_quantize,
    "norm": cmd_norm,
    "propagate": cmd_propagate,
    "admissible": cmd_admissible,
    "verify": cmd_verify,
}


def _threads(arg: Optional[int]) -> int:
    if arg is not None:
        k = arg
    else:
        raw = os.environ.get(THREADS_ENV, "1")
        try:
            k = int(raw)
        except ValueError:
            raise ScenarioError(f"{THREADS_ENV}={raw!r} is not an integer") from None
    if k < 1:
        raise ScenarioError(f"thread count must be >= 1, got {k}")
    return k


def run(command: str, config: Optional[str], out: str, threads: Optional[int] = None) -> int:
    """Run one command; returns the exit code and reports errors on stderr."""
    try:
        if command not in COMMANDS:
            raise ScenarioError(f"unknown command {command!r}")
        if config is None and command != "verify":
            raise ScenarioError(f"{command} needs --config")
        set_workers(_threads(threads))
        scen = load_scenario(config)
        outdir = Path(out)
        outdir.mkdir(parents=True, exist_ok=True)
        # FFT workers split whole transforms; BLAS stays single-threaded so sums keep one order
        with threadpool_limits(limits=1):
            return COMMANDS[command](scen, outdir)
    except ScenarioError as exc:
        print(f"moyalkit: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (PropagationError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"moyalkit: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, OSError) as exc:
        print(f"moyalkit: precondition violated: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    finally:
        set_workers(1)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="moyalkit", description="Moyal star-product and phase-space toolkit")
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", help="scenario YAML file (optional for verify)")
    ap.add_argument("--out", required=True, help="output directory")
    ap.add_argument("--threads", type=int, default=None, help=f"FFT worker threads (default ${THREADS_ENV} or 1)")
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return run(args.command, args.config, args.out, args.threads)


if __name__ == "__main__":
    sys.exit(main())
