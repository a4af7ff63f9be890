"""Command-line front end: verify, run, sweep, spectrum and mesh subcommands.

Exit codes: 0 success, 1 a check failed, 2 usage, config or mesh error.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import io as _io
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np
import scipy.sparse as sp

from . import operators as ops
from .cochain import Carrier, Cochain
from .complex import (
    DualGeometry,
    SimplicialComplex,
    compute_dual_geometry,
    generate_interval_mesh,
    generate_square_diagonal_mesh,
    generate_strip_mesh,
    generate_two_triangle_mesh,
    is_well_centered,
)
from .dirac import Variant, assemble_dirac, valid_degrees, verify_dirac
from .errors import ConfigError, DecError, NotWellCenterable, NotWellCentered
from .integrate import Constant, InputSignal, PiecewiseConstant, Sinusoid, Zero, simulate
from .io import load_json, load_mesh, mesh_from_dict, svg_line_plot, write_mesh
from .models import (
    Causality,
    analytic_spectrum_telegraph,
    build_telegraph,
    build_wave2d,
    closure_for,
    discrete_spectrum,
    lowest_frequency_error,
    observed_orders,
    smooth_initial_state,
)
from .phs import (
    Controller,
    MaterialField,
    PortHamiltonianSystem,
    close_loop,
    closed_loop_casimirs,
    conservation_laws,
    passivation_feedback,
    power_residual,
    with_output_feedback,
)

EXIT_OK, EXIT_CHECK, EXIT_CONFIG = 0, 1, 2
CHECK_TOL = 1e-12

MODELS = ("telegraph", "wave2d")


# ------------------------------------------------------------------ config


@dataclass
class RunConfig:
    model: str | None = None
    causality: Causality = Causality.VOLTAGE_INPUT
    mesh: dict = field(default_factory=lambda: {"generator": "interval", "n_edges": 16})
    materials: dict = field(default_factory=dict)
    method: str = "midpoint"
    dt: float = 1e-3
    T: float = 1.0
    initial_state: Any = "zero"
    signals: dict = field(default_factory=dict)
    controller: dict | None = None
    passivation: bool = False
    resolutions: tuple[int, ...] = (8, 16, 32, 64)
    n_modes: int = 5
    samples: int = 100
    flip_dirac_sign: bool = False
    seed: int = 0
    base_dir: Path = field(default_factory=Path.cwd)


_KNOWN_KEYS = {
    "model", "causality", "mesh", "materials", "integrator", "initial_state", "signals",
    "controller", "feedback", "sweep", "spectrum", "verify", "fault_injection", "seed",
}


def _positive(value, name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not (value > 0 and math.isfinite(value)):
        raise ConfigError(f"{name} must be a positive finite number")
    return float(value)


def parse_config(data: Mapping, base_dir: Path | None = None) -> RunConfig:
    unknown = set(data) - _KNOWN_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    cfg = RunConfig(base_dir=base_dir or Path.cwd())
    if "model" in data:
        if data["model"] not in MODELS:
            raise ConfigError(f"model must be one of {MODELS}")
        cfg.model = data["model"]
    if "causality" in data:
        try:
            cfg.causality = Causality(data["causality"])
        except ValueError:
            raise ConfigError("causality must be 'voltage' or 'current'") from None
    if "mesh" in data:
        if not isinstance(data["mesh"], dict):
            raise ConfigError("mesh must be an object")
        cfg.mesh = dict(data["mesh"])
        if "file" in cfg.mesh and not (cfg.base_dir / cfg.mesh["file"]).is_file():
            raise ConfigError(f"mesh file {cfg.mesh['file']!r} does not exist")
    mats = data.get("materials", {})
    if not isinstance(mats, dict):
        raise ConfigError("materials must be an object")
    cfg.materials = {k: _positive(v, f"materials.{k}") for k, v in mats.items()}
    integ = data.get("integrator", {})
    if integ:
        cfg.method = integ.get("method", cfg.method)
        if cfg.method not in ("midpoint", "leapfrog"):
            raise ConfigError("integrator.method must be 'midpoint' or 'leapfrog'")
        cfg.dt = _positive(integ.get("dt", cfg.dt), "integrator.dt")
        cfg.T = _positive(integ.get("T", cfg.T), "integrator.T")
    cfg.initial_state = data.get("initial_state", "zero")
    if isinstance(cfg.initial_state, str) and cfg.initial_state not in ("zero", "random", "smooth"):
        raise ConfigError("initial_state must be 'zero', 'random', 'smooth' or a list of numbers")
    sig = data.get("signals", {})
    if not isinstance(sig, dict):
        raise ConfigError("signals must map port indices to signal objects")
    cfg.signals = dict(sig)
    cfg.controller = data.get("controller")
    cfg.passivation = bool(data.get("feedback", {}).get("passivation", False))
    if cfg.controller is not None and cfg.passivation:
        raise ConfigError("choose either a controller or passivation feedback, not both")
    if "sweep" in data:
        res = data["sweep"].get("resolutions", list(cfg.resolutions))
        if not res or any(isinstance(r, bool) or not isinstance(r, int) or r < 1 for r in res):
            raise ConfigError("sweep.resolutions must be positive integers")
        cfg.resolutions = tuple(res)
    if "spectrum" in data:
        nm = data["spectrum"].get("n_modes", cfg.n_modes)
        if isinstance(nm, bool) or not isinstance(nm, int) or nm < 0:
            raise ConfigError("spectrum.n_modes must be a nonnegative integer")
        cfg.n_modes = nm
    if "verify" in data:
        cfg.samples = int(data["verify"].get("samples", cfg.samples))
    cfg.flip_dirac_sign = bool(data.get("fault_injection", {}).get("flip_dirac_sign", False))
    if "seed" in data:
        cfg.seed = _seed(data["seed"])
    return cfg


def _seed(value) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or not 0 <= value < 2**64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    return value


# -------------------------------------------------------------- assembly


def build_mesh(mesh_cfg: Mapping, base_dir: Path) -> tuple[SimplicialComplex, DualGeometry]:
    if "file" in mesh_cfg:
        K = load_mesh(base_dir / mesh_cfg["file"])
        return K, compute_dual_geometry(K)
    if "inline" in mesh_cfg:
        K = mesh_from_dict(mesh_cfg["inline"])
        return K, compute_dual_geometry(K)
    gen = mesh_cfg.get("generator")
    try:
        if gen == "interval":
            return generate_interval_mesh(int(mesh_cfg.get("n_edges", 16)), float(mesh_cfg.get("length", 1.0)))
        if gen == "strip":
            return generate_strip_mesh(
                int(mesh_cfg.get("rows", 4)), int(mesh_cfg.get("cols", 8)),
                float(mesh_cfg.get("width", 1.0)), float(mesh_cfg.get("height", 1.0)),
            )
        if gen == "two_triangle":
            return generate_two_triangle_mesh()
        if gen == "square_diagonal":
            return generate_square_diagonal_mesh(int(mesh_cfg.get("cells", 1)), float(mesh_cfg.get("side", 1.0)))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad mesh generator parameters: {exc}") from exc
    raise ConfigError("mesh needs 'file', 'inline' or generator in {interval, strip, two_triangle, square_diagonal}")


def build_model(cfg: RunConfig, K: SimplicialComplex, G: DualGeometry) -> PortHamiltonianSystem:
    mats = cfg.materials
    if cfg.model == "telegraph":
        return build_telegraph(
            K, G, MaterialField.uniform("C", mats.get("C", 1.0)), MaterialField.uniform("L", mats.get("L", 1.0)), cfg.causality
        )
    if cfg.model == "wave2d":
        return build_wave2d(K, G, MaterialField.uniform("mu", mats.get("mu", 1.0)), MaterialField.uniform("E", mats.get("E", 1.0)))
    raise ConfigError("this command needs a model ('telegraph' or 'wave2d')")


def _port_signal(sig_cfg) -> Any:
    if not isinstance(sig_cfg, dict):
        raise ConfigError("each signal must be an object with a 'type'")
    kind = sig_cfg.get("type")
    try:
        if kind == "zero":
            return Zero()
        if kind == "constant":
            return Constant(float(sig_cfg["value"]))
        if kind == "sinusoid":
            return Sinusoid(float(sig_cfg["amplitude"]), float(sig_cfg["frequency"]), float(sig_cfg.get("phase", 0.0)))
        if kind == "piecewise":
            return PiecewiseConstant(tuple(map(float, sig_cfg["times"])), tuple(map(float, sig_cfg["values"])))
    except KeyError as exc:
        raise ConfigError(f"signal of type {kind!r} is missing {exc}") from exc
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    raise ConfigError(f"unknown signal type {kind!r}")


def build_signal(cfg: RunConfig, nu: int) -> InputSignal:
    ports = {}
    for key, sig_cfg in cfg.signals.items():
        try:
            idx = int(key)
        except ValueError:
            raise ConfigError(f"signal key {key!r} is not a port index") from None
        if not 0 <= idx < nu:
            raise ConfigError(f"port {idx} does not exist; the model has {nu} ports")
        ports[idx] = _port_signal(sig_cfg)
    return InputSignal.from_ports(nu, ports)


def _initial_state(cfg: RunConfig, sys: PortHamiltonianSystem, rng: np.random.Generator) -> np.ndarray:
    init = cfg.initial_state
    if isinstance(init, list):
        x = np.array(init, dtype=float)
        if x.size != sys.nx or not np.all(np.isfinite(x)):
            raise ConfigError(f"initial_state needs {sys.nx} finite numbers")
        return x
    if init == "random":
        return rng.standard_normal(sys.nx)
    if init == "smooth":
        x = np.zeros(sys.nx)
        plant = sys.meta.get("plant", sys)
        x[: plant.nx] = smooth_initial_state(plant)
        return x
    return np.zeros(sys.nx)


def prepare_system(cfg: RunConfig):
    """Mesh, model and any feedback/controller, plus the tracked invariants."""
    K, G = build_mesh(cfg.mesh, cfg.base_dir)
    sys_ = build_model(cfg, K, G)
    if cfg.passivation:
        sys_ = with_output_feedback(sys_, passivation_feedback(sys_))
        return sys_, []
    if cfg.controller is not None:
        try:
            ctrl = Controller(cfg.controller["gc"], cfg.controller["Hc"])
        except KeyError as exc:
            raise ConfigError(f"controller is missing {exc}") from exc
        sys_ = close_loop(sys_, ctrl)
        return sys_, list(closed_loop_casimirs(sys_).T)
    return sys_, conservation_laws(sys_)


# ---------------------------------------------------------------- output


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow(["" if v is None else (repr(float(v)) if isinstance(v, (float, np.floating)) else v) for v in row])


def _wants(fmt: str, kind: str) -> bool:
    return fmt == "both" or fmt == kind


# ------------------------------------------------------------- commands


@dataclass
class Check:
    name: str
    value: float
    passed: bool

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name:<48} {self.value:.3e}"


def _flip_first_entry(m: sp.csr_matrix) -> sp.csr_matrix:
    m = m.copy()
    if m.nnz:
        m.data[0] = -m.data[0]
    return m


def _sbp_checks(K: SimplicialComplex, rng: np.random.Generator, samples: int) -> list[Check]:
    out = []
    n = K.n
    for k in range(1, n + 1):
        worst = 0.0
        for _ in range(samples):
            a = Cochain.random(K, Carrier.PRIMAL, k - 1, rng)
            bi = Cochain.random(K, Carrier.INTERIOR_DUAL, n - k, rng)
            bb = Cochain.random(K, Carrier.BOUNDARY_DUAL, n - k, rng)
            t = ops.summation_by_parts_terms(a, bi, bb, K)
            scale = max(sum(abs(v) for v in t), 1e-300)
            worst = max(worst, abs(t[0] + t[1] - t[2]) / scale)
        out.append(Check(f"summation_by_parts k={k}", worst, worst < CHECK_TOL))
    return out


def cmd_verify(cfg: RunConfig, out_dir: Path | None = None, fmt: str = "csv") -> tuple[int, str]:
    rng = np.random.default_rng(cfg.seed)
    K, G = build_mesh(cfg.mesh, cfg.base_dir)
    checks: list[Check] = []
    wc = is_well_centered(K, G)
    checks.append(Check("well_centered (min barycentric)", wc.min_barycentric, wc.ok))
    for name, value in ops.identity_residuals(K).items():
        checks.append(Check(name, value, value == 0))
    checks += _sbp_checks(K, rng, cfg.samples)
    for p, q in valid_degrees(K.n):
        for variant in Variant:
            D = assemble_dirac(K, G, p, q, variant)
            if cfg.flip_dirac_sign:
                D = dataclasses.replace(D, B=_flip_first_entry(D.B))
            rep = verify_dirac(D, samples=cfg.samples, seed=int(rng.integers(2**31)))
            tag = f"{variant.value} p={p} q={q}"
            checks.append(Check(f"skew {tag}", rep.skew_residual, rep.skew_residual == 0))
            checks.append(Check(f"isotropy {tag}", rep.isotropy_max, rep.isotropy_max < CHECK_TOL))
            checks.append(Check(f"graph rank - flow dim {tag}", rep.graph_rank - rep.flow_dim, rep.graph_rank == rep.flow_dim))
    if cfg.model is not None and wc.ok:
        sys_ = build_model(cfg, K, G)
        worst = 0.0
        for _ in range(cfg.samples):
            x, u = rng.standard_normal(sys_.nx), rng.standard_normal(sys_.nu)
            worst = max(worst, power_residual(sys_, x, u, relative=True))
        checks.append(Check(f"power balance {cfg.model}", worst, worst < CHECK_TOL))
    report = "\n".join(c.line() for c in checks)
    ok = all(c.passed for c in checks)
    report += f"\n{'all checks passed' if ok else 'some checks FAILED'}\n"
    if out_dir is not None and _wants(fmt, "csv"):
        _write_csv(out_dir / "verify.csv", ["check", "value", "passed"], [(c.name, float(c.value), int(c.passed)) for c in checks])
    return (EXIT_OK if ok else EXIT_CHECK), report


def cmd_run(cfg: RunConfig, out_dir: Path, fmt: str = "csv") -> tuple[int, str]:
    rng = np.random.default_rng(cfg.seed)
    sys_, invariants = prepare_system(cfg)
    signal = build_signal(cfg, sys_.nu)
    x0 = _initial_state(cfg, sys_, rng)
    traj = simulate(sys_, signal, cfg.T, cfg.dt, method=cfg.method, x0=x0, invariants=invariants)
    if _wants(fmt, "csv"):
        traj.write_csv(out_dir / "trajectory.csv")
    if _wants(fmt, "svg"):
        series = {"H": traj.H}
        series.update({f"u[{i}]": traj.inputs[:, i] for i in range(traj.inputs.shape[1])})
        series.update({f"y[{i}]": traj.outputs[:, i] for i in range(traj.outputs.shape[1])})
        series.update({f"C_{i + 1}": traj.invariants[:, i] for i in range(traj.invariants.shape[1])})
        (out_dir / "trajectory.svg").write_text(svg_line_plot(traj.times, series, f"{sys_.kind} run"))
    H0 = float(traj.H[0])
    lines = [
        f"steps {len(traj) - 1}  dt {cfg.dt:g}  method {cfg.method}",
        f"H initial {H0:.12e}  final {float(traj.H[-1]):.12e}",
        f"max |energy balance residual| {float(np.abs(traj.balance_residual).max()):.3e}",
        f"max stepwise H increase {float(np.diff(traj.H).max(initial=0.0)):.3e}",
    ]
    for i in range(traj.invariants.shape[1]):
        col = traj.invariants[:, i]
        lines.append(f"C_{i + 1} spread {float(col.max() - col.min()):.3e}")
    return EXIT_OK, "\n".join(lines) + "\n"


def _sweep_one(n: int, causality: Causality, length: float, out_dir: Path | None, fmt: str) -> float:
    err = lowest_frequency_error(n, causality, length)
    if out_dir is not None and _wants(fmt, "csv"):
        _write_csv(out_dir / f"sweep_n{n}.csv", ["n", "error"], [(n, err)])
    return err


def cmd_sweep(cfg: RunConfig, out_dir: Path | None = None, fmt: str = "csv") -> tuple[int, str]:
    if cfg.model not in (None, "telegraph"):
        raise ConfigError("sweep is defined for the telegraph model")
    length = float(cfg.mesh.get("length", 1.0))
    res = sorted(set(cfg.resolutions))
    with ThreadPoolExecutor() as pool:
        errors = list(pool.map(lambda n: _sweep_one(n, cfg.causality, length, out_dir, fmt), res))
    orders = observed_orders(res, errors)
    rows = list(zip(res, errors, orders))
    if out_dir is not None and _wants(fmt, "csv"):
        _write_csv(out_dir / "sweep.csv", ["n", "error", "observed_order"], rows)
    if out_dir is not None and _wants(fmt, "svg"):
        series = {"log10 error": np.log10(np.maximum(errors, 1e-300))}
        (out_dir / "sweep.svg").write_text(svg_line_plot(np.log2(res), series, "lowest-frequency error vs log2 n"))
    text = "n,error,observed_order\n" + "".join(
        f"{n},{e:.6e},{'' if o is None else f'{o:.4f}'}\n" for n, e, o in rows
    )
    return EXIT_OK, text


def cmd_spectrum(cfg: RunConfig, out_dir: Path | None = None, fmt: str = "csv") -> tuple[int, str]:
    K, G = build_mesh(cfg.mesh, cfg.base_dir)
    sys_ = build_model(cfg, K, G)
    disc = discrete_spectrum(sys_)[: cfg.n_modes]
    if cfg.model == "telegraph":
        length = float(K.vertices.max() - K.vertices.min())
        exact = analytic_spectrum_telegraph(
            len(disc), length, cfg.materials.get("L", 1.0), cfg.materials.get("C", 1.0), closure_for(sys_)
        )
    else:
        exact = [None] * len(disc)
    rows = [(i + 1, float(d), e) for i, (d, e) in enumerate(zip(disc, exact))]
    if out_dir is not None and _wants(fmt, "csv"):
        _write_csv(out_dir / "spectrum.csv", ["mode", "discrete", "analytic"], rows)
    if out_dir is not None and _wants(fmt, "svg") and rows:
        series = {"discrete": np.array([r[1] for r in rows])}
        if cfg.model == "telegraph":
            series["analytic"] = np.array([r[2] for r in rows])
        (out_dir / "spectrum.svg").write_text(svg_line_plot(np.arange(1, len(rows) + 1), series, "angular frequencies"))
    buf = _io.StringIO()
    buf.write("mode,discrete,analytic\n")
    for m, d, e in rows:
        buf.write(f"{m},{d:.10g},{'' if e is None else f'{e:.10g}'}\n")
    return EXIT_OK, buf.getvalue()


def cmd_mesh(cfg: RunConfig, out_dir: Path) -> tuple[int, str]:
    K, G = build_mesh(cfg.mesh, cfg.base_dir)
    write_mesh(out_dir / "mesh.json", K)
    counts = ", ".join(str(K.count(k)) for k in range(K.n + 1))
    wc = is_well_centered(K, G)
    return EXIT_OK, f"wrote mesh.json: n={K.n}, counts ({counts}), well-centered {wc.ok}\n"


# ------------------------------------------------------------------ main


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dec-phs", description="Discrete port-Hamiltonian models on simplicial meshes.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in [
        ("verify", "run the exact-identity and residual checks"),
        ("run", "simulate a model and write the trajectory"),
        ("sweep", "lowest-frequency error across resolutions"),
        ("spectrum", "discrete versus analytic eigenfrequencies"),
        ("mesh", "generate a mesh and write it as JSON"),
    ]:
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", type=Path, help="JSON config file")
        p.add_argument("--out", type=Path, default=Path("."), help="output directory")
        p.add_argument("--seed", type=int, help="overrides the config seed")
        p.add_argument("--format", choices=("csv", "svg", "both"), default="csv")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        if args.config is not None:
            cfg = parse_config(load_json(args.config), args.config.resolve().parent)
        else:
            cfg = parse_config({})
        if args.seed is not None:
            cfg.seed = _seed(args.seed)
        args.out.mkdir(parents=True, exist_ok=True)
        if args.command == "verify":
            code, text = cmd_verify(cfg, args.out, args.format)
        elif args.command == "run":
            code, text = cmd_run(cfg, args.out, args.format)
        elif args.command == "sweep":
            code, text = cmd_sweep(cfg, args.out, args.format)
        elif args.command == "spectrum":
            code, text = cmd_spectrum(cfg, args.out, args.format)
        else:
            code, text = cmd_mesh(cfg, args.out)
    except (NotWellCentered, NotWellCenterable) as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return EXIT_CHECK
    except (ConfigError, DecError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    sys.stdout.write(text)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
