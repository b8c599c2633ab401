"""Command-line entry point: ``jtwpa run|validate|list-examples``."""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, cluster, config, qubits
from .amplifier import (PumpConfig, beta_for_gain, loss_sweep, phase_mismatch, spectrum)
from .dispersion import scan_bandgaps, tune_operating_point, wavevector, wavevector_squared
from .errors import ConfigError, JtwpaError

log = logging.getLogger("jtwpa")

THREADS_ENV = "JTWPA_THREADS"
EXIT_OK, EXIT_CONFIG, EXIT_PHYSICS, EXIT_IO = 0, 2, 3, 4


def _clean(obj):
    """Replace non-finite floats by ``None`` and numpy scalars by Python ones."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps_json(obj):
    # repr-based float output is the shortest string that round-trips exactly
    return json.dumps(_clean(obj), sort_keys=True, indent=1, allow_nan=False) + "\n"


def _cell(x):
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    return "nan" if math.isnan(x) else format(x + 0.0, ".12g")


def dumps_csv(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(x) for x in row])
    return buf.getvalue()


class Output:
    """Collects files for one run and writes them with a hash manifest."""

    def __init__(self, root):
        self.root = Path(root)
        self.files = {}

    def add(self, name, text):
        self.files[name] = text

    def write(self, cfg):
        self.root.mkdir(parents=True, exist_ok=True)
        entries = []
        for name in sorted(self.files):
            data = self.files[name].encode()
            (self.root / name).write_bytes(data)
            entries.append({"path": name, "sha256": hashlib.sha256(data).hexdigest(), "bytes": len(data)})
        manifest = {"version": __version__, "task": cfg["task"],
                    "config_sha256": hashlib.sha256(dumps_json(cfg).encode()).hexdigest(),
                    "files": entries}
        (self.root / "manifest.json").write_text(dumps_json(manifest))
        return manifest


def _hz(omega):
    return omega / (2 * math.pi)


def task_dispersion(cfg, out):
    device = config.build_device(cfg["device"])
    grid = config.build_grid(cfg["grid"])
    k2 = wavevector_squared(device, grid)
    k = wavevector(device, grid)
    rows = zip(_hz(grid), k2, k.real, k.imag, k2 < 0)
    out.add("dispersion.csv", dumps_csv(("omega_hz", "k_squared", "k_re", "k_im", "evanescent"), rows))
    out.add("bandgaps.json", _gaps_json(device, grid))


def _gaps_json(device, grid):
    gaps = scan_bandgaps(device, grid)
    return dumps_json({"count": len(gaps), "gaps": [list(g) for g in gaps],
                       "gaps_hz": [[_hz(a), _hz(b)] for a, b in gaps]})


def _spectrum_files(out, device, pump, grid, loss, prefix="spectrum"):
    spec = spectrum(device, pump, grid, loss)
    out.add(f"{prefix}.csv", spec.to_csv())
    out.add(f"{prefix}.json", spec.to_json())
    return spec


def task_spectrum(cfg, out):
    device = config.build_device(cfg["device"])
    pump = config.build_pump(cfg["pump"], device)
    grid = config.build_grid(cfg["grid"])
    spec = _spectrum_files(out, device, pump, grid, config.build_loss(cfg.get("loss")))
    out.add("bandgaps.json", _gaps_json(device, grid))
    i = int(np.nanargmax(np.where(spec.gap_flag, np.nan, spec.gain)))
    out.add("summary.json", dumps_json({
        "peak_gain_db": spec.gain_db[i], "peak_omega_hz": _hz(spec.omega[i]),
        "max_squeezing_db": np.nanmax(spec.squeezing_db), "gap_points": int(spec.gap_flag.sum()),
        "pump_hz": _hz(pump.omega_pump), "beta": pump.beta}))


def task_tune(cfg, out):
    device = config.build_device(cfg["device"])
    pump = config.build_pump(cfg["pump"], device)
    grid = config.build_grid(cfg["grid"])
    t = cfg["tune"]
    target = 2 * math.pi * t["target_hz"]
    bracket = [2 * math.pi * f for f in t["bracket_hz"]]
    knob = t["knob"]
    idx = t.get("resonator_index", 0)
    value = tune_operating_point(device, pump.beta, target, knob, bracket,
                                 omega_pump=pump.omega_pump, resonator_index=idx)
    if knob == "pump_frequency":
        tuned_device, tuned_pump = device, PumpConfig(value, pump.beta)
    else:
        from .dispersion import ResonatorSpec
        base = device.resonators[idx]
        tuned_device = device.with_resonator(idx, ResonatorSpec.from_frequency(value, base.c_c, base.c_r))
        tuned_pump = pump
    residual = phase_mismatch(tuned_device, tuned_pump, target)
    out.add("tune.json", dumps_json({
        "knob": knob, "value": value, "value_hz": _hz(value), "target_hz": t["target_hz"],
        "residual_delta_k": residual, "k_target": abs(wavevector(tuned_device, target))}))
    _spectrum_files(out, tuned_device, tuned_pump, grid, config.build_loss(cfg.get("loss")))


def task_loss_sweep(cfg, out):
    device = config.build_device(cfg["device"])
    pump = config.build_pump(cfg["pump"], device)
    grid = config.build_grid(cfg["grid"])
    s = cfg["loss_sweep"]
    rows = loss_sweep(device, pump.omega_pump, config.build_range(s["betas"]), s["etas"], grid)
    keys = ("eta", "beta", "omega", "gain_db", "squeezing_db", "anti_squeezing_db")
    out.add("loss_sweep.csv", dumps_csv(
        ("eta", "beta", "omega_hz", "gain_db", "squeezing_db", "anti_squeezing_db"),
        [[r[k] if k != "omega" else _hz(r[k]) for k in keys] for r in rows]))
    if "target_gain_db" in s:
        points = []
        for eta in s["etas"]:
            beta = beta_for_gain(device, pump.omega_pump, s["target_gain_db"], grid, eta)
            point = loss_sweep(device, pump.omega_pump, [beta], [eta], grid)[0]
            point["floor_db"] = -10 * math.log10(1 - eta) if eta < 1 else None
            points.append(point)
        out.add("target_gain.json", dumps_json({"target_gain_db": s["target_gain_db"], "points": points}))


def task_two_qubit(cfg, out):
    device = config.build_device(cfg["device"])
    pump = config.build_pump(cfg["pump"], device)
    s = cfg["two_qubit"]
    omega1 = 2 * math.pi * s["qubit_hz"]
    gamma = s.get("gamma", 1.0)
    betas = config.build_range(s["betas"])
    rows = []
    for eta in s["etas"]:
        rows += qubits.concurrence_sweep(device, pump.omega_pump, omega1, betas, eta, gamma)
    keys = ("gain_db", "eta", "concurrence", "gap_over_gamma", "s_db")
    out.add("two_qubit.csv", dumps_csv(keys, [[r[k] for k in keys] for r in rows]))

    grid = np.array(sorted({omega1, 2 * pump.omega_pump - omega1}))
    spec = spectrum(device, pump, grid)
    bath = qubits.bath_from_spectrum(spec, omega1, 2 * pump.omega_pump - omega1, gamma, gamma)
    gen = qubits.build_liouvillian(bath)
    rho = qubits.steady_state_numeric(gen)
    out.add("steady_state.json", dumps_json({
        "beta": pump.beta, "n": bath.n1, "m_re": bath.m.real, "m_im": bath.m.imag,
        "rho_re": rho.real.tolist(), "rho_im": rho.imag.tolist(),
        "concurrence": qubits.concurrence(rho), "purity": qubits.purity(rho),
        "spectral_gap": qubits.spectral_gap(gen), "correlators": qubits.correlators(rho)}))


def task_cluster(cfg, out):
    s = cfg["cluster"]
    hadamard = s.get("hadamard", True)
    if "layout" in s:
        layout = cluster.graph_from_layout_name(s["layout"])
        pairs = cluster.build_pair_graph(layout)
        graph = cluster.hadamard_transform(pairs, layout) if hadamard else pairs
    else:
        layout = None
        graph = cluster.ClusterGraph.from_dict(s["graph"])
    report = cluster.validate_graph(graph)
    out.add("graph.json", dumps_json({
        **graph.to_dict(), "bicolorable": report.bicolorable, "self_inverse": report.self_inverse,
        "coloring": report.coloring, "layout": None if layout is None else layout.to_dict()}))
    results = []
    for r in s["r_values"]:
        if layout is not None:
            res = cluster.run_layout(layout, r, hadamard=hadamard)
        else:
            state = cluster.cluster_steady_state(graph, r=r)
            res = cluster.ClusterReport(graph, state, cluster.nullifier_variances(graph, state), report)
        entry = {"r": r, "nullifier_variances": res.nullifiers, "ideal": math.exp(-2 * r),
                 "uncertainty_margin": res.state.uncertainty_margin()}
        if s.get("flow_check", False):
            entry["flow_deviation"] = cluster.flow_agreement(graph, r)
        results.append(entry)
        out.add(f"state_r{r:g}.json", dumps_json(res.to_dict()))
    out.add("nullifiers.json", dumps_json({"results": results}))


TASK_RUNNERS = {
    "dispersion": task_dispersion,
    "spectrum": task_spectrum,
    "tune": task_tune,
    "loss_sweep": task_loss_sweep,
    "two_qubit": task_two_qubit,
    "cluster": task_cluster,
}


def run(cfg, out_dir):
    """Execute one configured task and write its files plus ``manifest.json``."""
    out = Output(out_dir)
    TASK_RUNNERS[cfg["task"]](cfg, out)
    return out.write(cfg)


def _limit_threads():
    value = os.environ.get(THREADS_ENV)
    if not value:
        return None
    try:
        n = int(value)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got {value!r}")
    from threadpoolctl import threadpool_limits
    return threadpool_limits(limits=max(1, n))


def build_parser():
    parser = argparse.ArgumentParser(prog="jtwpa", description="JTWPA squeezing and bath-engineering simulator")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", help="run a configuration and write data files")
    p.add_argument("--config", required=True, help="config file or shipped example name")
    p.add_argument("--out", required=True, help="output directory")
    p = sub.add_parser("validate", help="check a configuration without running it")
    p.add_argument("--config", required=True)
    sub.add_parser("list-examples", help="list shipped configurations")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    if args.command == "list-examples":
        for name in config.shipped_configs():
            print(name)
        return EXIT_OK
    cfg = None
    limiter = None
    try:
        limiter = _limit_threads()
        path = config.resolve(args.config)
        cfg = config.load(path)
        _build_all(cfg)
        if args.command == "validate":
            print(f"{path}: ok ({cfg['task']})")
            return EXIT_OK
        manifest = run(cfg, args.out)
        for entry in manifest["files"]:
            log.info("wrote %s", entry["path"])
        return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (JtwpaError, ValueError, ArithmeticError) as exc:
        print(f"physics error in task {cfg['task'] if cfg else '?'}: {exc}", file=sys.stderr)
        return EXIT_PHYSICS
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    finally:
        if limiter is not None:
            limiter.restore_original_limits()


def _build_all(cfg):
    """Construct every physics object the config describes (semantic checks)."""
    try:
        device = config.build_device(cfg["device"]) if "device" in cfg else None
        if "pump" in cfg and device is not None:
            config.build_pump(cfg["pump"], device)
        if "grid" in cfg:
            config.build_grid(cfg["grid"])
    except (ValueError, JtwpaError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc
    if "cluster" in cfg and "graph" in cfg["cluster"]:
        try:
            cluster.ClusterGraph.from_dict(cfg["cluster"]["graph"])
        except JtwpaError as exc:
            raise ConfigError(str(exc), "/cluster/graph") from exc


if __name__ == "__main__":
    sys.exit(main())
