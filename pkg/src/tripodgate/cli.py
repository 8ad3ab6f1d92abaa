"""Command-line front end.

Configuration files are JSON with frequencies as nu = Omega/2pi in MHz and
times in ns; angles are in radians.  Exit status: 0 success, 2 bad
configuration or input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from pathlib import Path
from typing import Optional

import jsonschema
import numpy as np

from . import darkstates, gate
from .hamiltonian import KAPPA_CONVENTIONS, hamiltonian_spec
from .hilbert import StateVector, build_space
from .propagator import DEFAULT_CADENCE, DEFAULT_TOL, PropagationError, write_trajectory_csv
from .pulses import GateConfig, build_gate_schedule, build_rotation_schedule, mhz, write_schedule_csv

log = logging.getLogger("tripodgate")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_nonneg = {"type": "number", "minimum": 0}

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "delta": _num, "theta": _num, "phi2": _num, "chi": _num, "phi1": _num,
        "xi": _num, "xi_prime": {"type": ["number", "null"]},
        "phi0_2": _num, "phi1_1": _num,
        "omega_max_mhz": _nonneg,
        "omega_sti_max_mhz": {"type": ["number", "null"], "minimum": 0},
        "sti_ratio": _nonneg,
        "g_mhz": _pos, "g1_mhz": _pos, "g2_mhz": _pos,
        "kappa_mhz": _nonneg, "gamma_mhz": _nonneg,
        "kappa_convention": {"enum": sorted(KAPPA_CONVENTIONS)},
        "t_p_ns": _pos, "delay_ns": _pos, "gap_ns": _pos, "split_ns": _nonneg,
        "n_max": {"type": "integer", "minimum": 2, "maximum": 12},
        "tol": {"type": "number", "exclusiveMinimum": 0, "maximum": 1e-3},
        "cadence_ns": _pos,
        "workers": {"type": "integer", "minimum": 1},
        "dark_samples": {"type": "integer", "minimum": 1},
        "theta_mod_amplitude": _num,
        "theta_mod_freq_mhz": _nonneg,
    },
}

_GATE_KEYS = ("delta", "theta", "phi2", "chi", "phi1", "xi", "xi_prime", "phi0_2", "phi1_1",
              "omega_max_mhz", "omega_sti_max_mhz", "sti_ratio", "g1_mhz", "g2_mhz", "kappa_mhz",
              "gamma_mhz", "kappa_convention", "t_p_ns", "delay_ns", "gap_ns", "split_ns")


class ConfigError(ValueError):
    """Invalid configuration, grid, or state specification."""


class RunConfig:
    """Validated configuration: a GateConfig plus run options."""

    def __init__(self, raw: Optional[dict] = None, kappa_mhz: Optional[float] = None):
        raw = dict(raw or {})
        try:
            jsonschema.validate(raw, CONFIG_SCHEMA)
        except jsonschema.ValidationError as exc:
            raise ConfigError(f"config: {exc.message}") from exc
        if "g_mhz" in raw:
            if "g1_mhz" in raw or "g2_mhz" in raw:
                raise ConfigError("config: give either g_mhz or g1_mhz/g2_mhz")
            raw["g1_mhz"] = raw["g2_mhz"] = raw.pop("g_mhz")
        if kappa_mhz is not None:
            if kappa_mhz < 0:
                raise ConfigError("--kappa must be >= 0")
            raw["kappa_mhz"] = kappa_mhz
        kw = {k: raw[k] for k in _GATE_KEYS if k in raw}
        try:
            self.gate = GateConfig.from_lab_units(**kw)
            build_gate_schedule(self.gate)
        except ValueError as exc:
            raise ConfigError(f"config: {exc}") from exc
        self.n_max = raw.get("n_max", 3)
        self.tol = raw.get("tol", DEFAULT_TOL)
        self.cadence = raw.get("cadence_ns", DEFAULT_CADENCE * 1e3) * 1e-3
        self.workers = raw.get("workers", 1)
        self.dark_samples = raw.get("dark_samples", 60)
        self.theta_mod_amplitude = raw.get("theta_mod_amplitude", 0.0)
        self.theta_mod_freq = mhz(raw.get("theta_mod_freq_mhz", 0.0))

    @classmethod
    def load(cls, path: Optional[str], kappa_mhz: Optional[float] = None) -> "RunConfig":
        if path is None:
            return cls({}, kappa_mhz)
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        return cls(raw, kappa_mhz)


_QUBIT = {
    "0": np.array([1, 0], dtype=complex),
    "1": np.array([0, 1], dtype=complex),
    "+": np.array([1, 1], dtype=complex) / math.sqrt(2.0),
    "-": np.array([1, -1], dtype=complex) / math.sqrt(2.0),
}


def parse_qubit(text: str) -> np.ndarray:
    """'0', '1', '+', '-' or two comma-separated complex amplitudes."""
    t = text.strip()
    if t in _QUBIT:
        return _QUBIT[t].copy()
    try:
        amps = np.array([complex(x.strip().replace(" ", "")) for x in t.split(",")])
    except ValueError as exc:
        raise ConfigError(f"cannot parse qubit state {text!r}") from exc
    if amps.shape != (2,):
        raise ConfigError(f"qubit state {text!r} needs two amplitudes")
    return _normalize(amps, text)


def parse_initial_state(text: str) -> np.ndarray:
    """Two-qubit amplitudes (00, 01, 10, 11) from '+0', '-1', '00', ... or four complex numbers."""
    t = text.strip()
    if len(t) == 2 and t[0] in _QUBIT and t[1] in _QUBIT:
        return np.kron(_QUBIT[t[0]], _QUBIT[t[1]])
    try:
        amps = np.array([complex(x.strip().replace(" ", "")) for x in t.split(",")])
    except ValueError as exc:
        raise ConfigError(f"cannot parse initial state {text!r}") from exc
    if amps.shape != (4,):
        raise ConfigError(f"initial state {text!r} needs four amplitudes (00, 01, 10, 11)")
    return _normalize(amps, text)


def _normalize(amps: np.ndarray, text: str) -> np.ndarray:
    nrm = np.linalg.norm(amps)
    if nrm == 0 or not np.isfinite(nrm):
        raise ConfigError(f"state {text!r} has zero or non-finite norm")
    return amps / nrm


def parse_observable(text: str) -> np.ndarray:
    """'x', 'y', 'z' or a unit axis 'nx,ny,nz' giving M = n.sigma."""
    t = text.strip().lower()
    axes = {"x": (1.0, 0.0, 0.0), "y": (0.0, 1.0, 0.0), "z": (0.0, 0.0, 1.0)}
    if t in axes:
        n = np.array(axes[t])
    else:
        try:
            n = np.array([float(x) for x in t.split(",")])
        except ValueError as exc:
            raise ConfigError(f"cannot parse observable {text!r}") from exc
        if n.shape != (3,) or abs(np.linalg.norm(n) - 1.0) > 1e-9:
            raise ConfigError("observable axis must be a unit 3-vector")
    return n[0] * gate.SIGMA_X + n[1] * gate.SIGMA_Y + n[2] * gate.SIGMA_Z


def read_grid(path: Optional[str]) -> list[tuple[float, float, float]]:
    """CSV with columns omega_max_mhz, g_mhz, kappa_mhz (header required)."""
    if path is None:
        return [row[0] for row in gate.TABLE_I]
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        raise ConfigError(f"cannot read grid {path}: {exc}") from exc
    out = []
    for i, row in enumerate(rows):
        try:
            entry = (float(row["omega_max_mhz"]), float(row["g_mhz"]), float(row["kappa_mhz"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"grid row {i + 1}: need numeric omega_max_mhz, g_mhz, kappa_mhz") from exc
        if entry[2] < 0 or entry[1] <= 0 or entry[0] < 0:
            raise ConfigError(f"grid row {i + 1}: invalid values {entry}")
        out.append(entry)
    if not out:
        raise ConfigError("grid is empty")
    return out


def _fmt(x: float) -> str:
    return repr(float(x))


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _cplx(z) -> list[float]:
    return [float(np.real(z)), float(np.imag(z))]


def cmd_simulate(rc: RunConfig, initial: str, out: Path) -> dict:
    space = build_space(rc.n_max)
    amps2 = parse_initial_state(initial)
    comp = [("0", "0"), ("0", "1"), ("1", "0"), ("1", "1")]
    vec = np.zeros(space.dim, dtype=complex)
    for c, (a1, a2) in zip(amps2, comp):
        vec[space.index(a1, a2, 0)] = c
    psi0 = StateVector(space, vec)
    run = gate.run_gate(rc.gate, psi0, tol=rc.tol, cadence=rc.cadence)
    traj = run.trajectory
    tracked = [space.index(a1, a2, 0) for a1, a2 in comp] + \
              [space.index("a", s, n) for s in ("0", "1") for n in (0, 1)] + \
              [space.index(s, "a", 1) for s in ("0", "1", "a")] + [space.index("a", "a", 2)]
    write_trajectory_csv(traj, out / "trajectory.csv", tracked)
    write_schedule_csv(build_gate_schedule(rc.gate), out / "schedule.csv")
    final = traj.states[-1]
    ideal = np.zeros(space.dim, dtype=complex)
    # linear combination of the analytic final states of the four product inputs
    for c, (a1, a2) in zip(amps2, comp):
        if c != 0:
            ideal += c * gate.ideal_final_state(rc.gate, space, _QUBIT[a1], _QUBIT[a2]).amplitudes
    photons = (np.abs(traj.states) ** 2) @ space.photon_numbers()
    summary = {
        "initial_state": initial,
        "final_amplitudes": {space.ket_name(i): _cplx(final[i]) for i in tracked[:4]},
        "final_populations": {space.ket_name(i): float(abs(final[i]) ** 2) for i in tracked[:4]},
        "ideal_fidelity": float(abs(np.vdot(ideal, final)) ** 2),
        "norm_final": float(traj.norms[-1]),
        "norm_loss": float(1.0 - traj.norms[-1] ** 2),
        "max_photon_number": float(photons.max()),
        "integrated_photon_number_us": float(np.trapezoid(photons, traj.times)),
        "n_steps": traj.n_steps,
        "n_rejected": traj.n_rejected,
    }
    _write_json(out / "summary.json", summary)
    return summary


def cmd_tomography(rc: RunConfig, out: Path) -> dict:
    gm = gate.extract_gate_matrix(rc.gate, build_space(rc.n_max), tol=rc.tol, workers=rc.workers)
    doc = gm.to_json()
    doc["computational_basis"] = ["00", "01", "10", "11"]
    doc["computational_matrix"] = [[_cplx(z) for z in row] for row in gm.computational()]
    doc["average_fidelity"] = gm.average_fidelity()
    doc["leakage"] = gm.leakage()
    doc["unitarity_error"] = gm.unitarity_error()
    _write_json(out / "gate_matrix.json", doc)
    return doc


def cmd_fidelity_table(rc: RunConfig, grid: list, out: Path, kappa_override: Optional[float]) -> list:
    if kappa_override is not None:
        grid = [(om, g, kappa_override) for om, g, _ in grid]
    recs = gate.fidelity_table(grid, rc.gate, tol=rc.tol, workers=rc.workers)
    with open(out / "fidelity_table.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(gate.FIDELITY_COLUMNS)
        for r in recs:
            w.writerow([_fmt(x) for x in r.row()])
    return recs


def cmd_dark_check(rc: RunConfig, out: Path) -> list:
    space = build_space(rc.n_max)
    cfg = rc.gate
    sch = build_rotation_schedule(cfg)
    spec = hamiltonian_spec(space, sch, cfg.replace(kappa=0.0, gamma=0.0))
    # interior of step 2, where all step-2 fields are appreciable
    c = [p.center for p in sch.pulses]
    times = np.linspace(c[0] - 0.5 * cfg.t_p, c[-1] + 0.5 * cfg.t_p, rc.dark_samples)
    amp, freq = rc.theta_mod_amplitude, rc.theta_mod_freq

    def theta(t):
        return cfg.theta + amp * math.sin(freq * t)

    theta_fn = theta if amp != 0 and freq != 0 else None
    dt = 1e-4 * sch.duration
    rows = []
    for t in times:
        dark = darkstates.dark_states_at(sch, t, cfg.g1, cfg.g2, space,
                                         theta=theta_fn(t) if theta_fn else None)
        res = darkstates.kernel_residuals(spec, t, dark) if theta_fn is None else [float("nan")] * 6
        chk = darkstates.kernel_check(spec, t) if theta_fn is None else {"max_angle": float("nan")}
        coup = [abs(darkstates.nonadiabatic_coupling(p, sch, t, dt, cfg.g1, cfg.g2, space, theta=theta_fn))
                for p in darkstates.COUPLING_PAIRS]
        rows.append([t * 1e3, *res, chk["max_angle"], *coup])
    with open(out / "dark_check.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["t_ns"] + [f"residual_{i}" for i in range(1, 7)] + ["max_principal_angle"]
                   + [f"coupling_{i}{j}" for i, j in darkstates.COUPLING_PAIRS])
        for r in rows:
            w.writerow([_fmt(x) for x in r])
    return rows


def cmd_demo_measure(rc: RunConfig, observable: str, qubit: str, out: Path) -> dict:
    m = parse_observable(observable)
    psi = parse_qubit(qubit)
    try:
        cfg = gate.measurement_config(m, rc.gate)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    gm = gate.extract_gate_matrix(cfg, build_space(rc.n_max), tol=rc.tol, workers=rc.workers)
    res = gate.measurement_demo(m, psi, gate=gm.computational(), base=rc.gate)
    doc = {
        "observable": [[_cplx(z) for z in row] for row in m],
        "input": [_cplx(z) for z in psi],
        "probabilities": list(res.probabilities),
        "post_states": [None if s is None else [_cplx(z) for z in s] for s in res.post_states],
        "eigenvector_fidelities": list(res.eigen_fidelities),
        "controlled_gate_average_fidelity": gm.average_fidelity(),
    }
    _write_json(out / "measurement.json", doc)
    return doc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON configuration (MHz / ns units)")
    common.add_argument("--out", default=".", help="output directory (created if missing)")
    common.add_argument("--kappa", type=float, help="cavity decay override, kappa/2pi in MHz")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="tripodgate", description="Adiabatic controlled-unitary gate simulator")
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("simulate", parents=[common], help="time evolution of one input state")
    s.add_argument("--initial-state", default="+0", help="'+0', '-1', '00', ... or four complex amplitudes")
    sub.add_parser("tomography", parents=[common], help="extract the 4x4 gate matrix")
    f = sub.add_parser("fidelity-table", parents=[common], help="F-/F+ over a parameter grid")
    f.add_argument("--grid", help="CSV with omega_max_mhz, g_mhz, kappa_mhz (default: reference grid)")
    sub.add_parser("dark-check", parents=[common], help="dark-state residuals and couplings over step 2")
    d = sub.add_parser("demo-measure", parents=[common], help="projective measurement via controlled-M")
    d.add_argument("--observable", default="x", help="'x', 'y', 'z' or unit axis 'nx,ny,nz'")
    d.add_argument("--input", default="0", help="target qubit: '0', '1', '+', '-' or 'a0,a1'")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        rc = RunConfig.load(args.config, None if args.command == "fidelity-table" else args.kappa)
        out = Path(args.out)
        try:
            out.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise ConfigError(f"cannot create output directory {out}: {exc}") from exc
        if args.command == "simulate":
            summary = cmd_simulate(rc, args.initial_state, out)
            log.info("ideal fidelity %.6f, norm loss %.3e", summary["ideal_fidelity"], summary["norm_loss"])
        elif args.command == "tomography":
            doc = cmd_tomography(rc, out)
            log.info("average gate fidelity %.6f", doc["average_fidelity"])
        elif args.command == "fidelity-table":
            cmd_fidelity_table(rc, read_grid(args.grid), out, args.kappa)
        elif args.command == "dark-check":
            cmd_dark_check(rc, out)
        elif args.command == "demo-measure":
            cmd_demo_measure(rc, args.observable, args.input, out)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PropagationError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
