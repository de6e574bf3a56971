"""Command-line experiment driver.

Configuration is an INI file with ``[model]``, ``[method]`` and ``[run]``
sections. ``--set key=value`` overrides a ``[method]`` key and
``--set section.key=value`` any other. Every run writes its data files and a
``manifest.json`` into the output directory.
"""

from __future__ import annotations

import argparse
import configparser
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import __version__
from . import io as rio
from .errors import NumericalError, ValidationError
from .lcu import lcu_apply, projector_plan
from .models import (
    HubbardModel,
    PairingModel,
    build_hubbard,
    build_pairing,
    exact_diagonalize,
    hubbard_double_occupancy_state,
    number_sector,
    pairing_hf_energy,
    pairing_hf_state,
    state_spectrum,
)
from .oracles import grover_hoyer_project, implicit_expectation, oracle_hadamard_project
from .phase_estimation import iqpe_project, qpe_project, rodeo, symmetry_rodeo_config
from .shadows import (
    NumberProjection,
    SpinProjection,
    exact_shadow_average,
    gaussian_register_state,
    number_profile,
    projected_energy,
    sample_snapshots,
    spin_profile,
    spin_sectors,
)
from .spectral import (
    compute_gf,
    cumulants,
    fdm_moments,
    fourier_peaks,
    imaginary_time_reference,
    krylov_from_moments,
    moments,
    quantum_krylov,
    survival_probability,
    exact_survival,
    t_expansion,
)
from .statevector import Circuit, Statevector, apply_circuit, h as hadamard_gate, x as x_gate
from .symmetry import Projector, symmetry_operator
from .variational import (
    BcsAnsatz,
    VqeConfig,
    energy_hierarchy,
    q_vap,
    relative_error,
    vqe_minimize,
)

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 2, 3
SUBCOMMANDS = ("diag", "vqe", "project", "shadow", "genfun", "spectrum")
PROJECTION_METHODS = ("qpe", "iqpe", "rodeo", "amplify", "oracle_hadamard", "implicit", "lcu")

MODEL_DEFAULTS = {
    "kind": "pairing",
    "n_levels": "8",
    "g": "1.0",
    "a_pairs": "4",
    "delta_e": "1.0",
    "m_sites": "2",
    "u": "1.0",
    "j": "1.0",
    "n_particles": "",
    "scheme": "jw",
}

METHOD_DEFAULTS: dict[str, dict[str, str]] = {
    "diag": {"sector": "", "count": "0"},
    "vqe": {"g_grid": "", "route": "projector", "eps_tol": "1e-4", "restarts": "3"},
    "project": {"method": "all", "symmetry": "number", "target": "", "state": "bcs", "mode": "exact"},
    "shadow": {"state": "gaussian", "projection": "number", "n_p": "10", "trials": "1", "n_qubits": "4"},
    "genfun": {"state": "hf", "t_max": "10.0", "dt": "0.01", "source": "exact", "trotter_steps": "10", "order": "2"},
    "spectrum": {
        "method": "krylov",
        "state": "hf",
        "t_max": "400.0",
        "dt": "0.05",
        "zero_pad": "4",
        "k_max": "20",
        "fdm_dt": "0.01",
        "fdm_accuracy": "8",
        "m_max": "9",
        "n_cumulants": "12",
        "pade": "3,7",
        "tau_max": "",
        "dtau": "0.3",
        "eps": "1e-6",
        "survival_t_max": "20.0",
        "survival_dt": "0.01",
    },
}


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


@dataclass
class RunConfig:
    subcommand: str
    model: dict[str, str]
    method: dict[str, str]
    seed: int | None
    shots: int | None
    out: Path
    seed_generated: bool = False

    def echo(self) -> dict[str, Any]:
        return {
            "subcommand": self.subcommand,
            "model": dict(self.model),
            "method": dict(self.method),
            "seed": self.seed,
            "seed_generated": self.seed_generated,
            "shots": self.shots,
            "out": str(self.out),
        }

    def get(self, key: str, cast: Callable = str, section: str = "method"):
        raw = (self.method if section == "method" else self.model)[key].strip()
        if raw == "":
            return None
        try:
            return cast(raw)
        except ValueError as exc:
            raise ValidationError(f"{section}.{key}: cannot parse {raw!r}") from exc


def floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def load_config(args: argparse.Namespace) -> RunConfig:
    parser = configparser.ConfigParser()
    if args.config:
        if not Path(args.config).is_file():
            raise ValidationError(f"config file not found: {args.config}")
        parser.read(args.config)
    unknown = set(parser.sections()) - {"model", "method", "run"}
    if unknown:
        raise ValidationError(f"unknown config sections: {sorted(unknown)}")
    model = dict(MODEL_DEFAULTS)
    method = dict(METHOD_DEFAULTS[args.command])
    run: dict[str, str] = {"seed": "", "shots": "", "out": ""}
    blocks = {"model": model, "method": method, "run": run}
    for name, block in blocks.items():
        if parser.has_section(name):
            for k, v in parser.items(name):
                _assign(block, name, k, v)
    for item in args.set or []:
        if "=" not in item:
            raise ValidationError(f"--set expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        section, _, name = key.rpartition(".")
        section = section or "method"
        if section not in blocks:
            raise ValidationError(f"--set: unknown section {section!r}")
        _assign(blocks[section], section, name.strip(), value.strip())
    seed = args.seed if args.seed is not None else _int_or_none(run, "seed")
    shots = args.shots if args.shots is not None else _int_or_none(run, "shots")
    out = Path(args.out or run["out"] or f"symrestore-out/{args.command}")
    generated = False
    if seed is None:
        seed = int(np.random.SeedSequence().entropy % (2**63))
        generated = True
    if shots is not None and shots < 1:
        raise ValidationError("shots must be positive")
    return RunConfig(args.command, model, method, seed, shots, out, generated)


def _int_or_none(run: dict[str, str], key: str) -> int | None:
    raw = run[key].strip()
    if not raw:
        return None
    try:
        return int(raw)
    except ValueError as exc:
        raise ValidationError(f"run.{key}: expected an integer, got {raw!r}") from exc


def _assign(block: dict[str, str], section: str, key: str, value: str) -> None:
    if key not in block:
        raise ValidationError(f"{section}.{key}: unknown key (allowed: {sorted(block)})")
    block[key] = value


# ---------------------------------------------------------------------------
# model and state construction
# ---------------------------------------------------------------------------


def build_model(cfg: RunConfig):
    kind = cfg.model["kind"].strip().lower()
    if kind == "pairing":
        m = PairingModel(
            cfg.get("n_levels", int, "model"),
            cfg.get("g", float, "model"),
            cfg.get("a_pairs", int, "model"),
            delta_e=cfg.get("delta_e", float, "model"),
        )
        if m.n_levels > 12:
            raise ValidationError("model.n_levels: at most 12 qubits are supported")
        return m, build_pairing(m)
    if kind == "hubbard":
        m = HubbardModel(
            cfg.get("m_sites", int, "model"),
            cfg.get("u", float, "model"),
            cfg.get("j", float, "model"),
            cfg.get("n_particles", int, "model"),
        )
        if m.n_qubits > 12:
            raise ValidationError("model.m_sites: at most 6 sites are supported")
        return m, build_hubbard(m, cfg.model["scheme"].strip())
    raise ValidationError(f"model.kind: expected 'pairing' or 'hubbard', got {kind!r}")


def _hubbard_particles(model: HubbardModel) -> int:
    return model.m_sites if model.n_particles is None else model.n_particles


def prepare_state(cfg: RunConfig, model, name: str) -> tuple[Statevector, Circuit | None]:
    """Named initial state plus a preparation circuit when one is available."""
    n = model.n_qubits
    if name == "uniform":
        circ = Circuit(n, [hadamard_gate(q) for q in range(n)])
        return apply_circuit(Statevector.zero(n), circ), circ
    if isinstance(model, PairingModel):
        if name == "hf":
            circ = Circuit(n, [x_gate(q) for q in np.argsort(model.shifted_levels)[: model.a_pairs]])
            return pairing_hf_state(model), circ
        if name in ("bcs", "pav", "vap"):
            res = vqe_minimize(model, VqeConfig(seed=cfg.seed))
            thetas = res.thetas
            if name == "vap":
                thetas, _e = q_vap(model, config=VqeConfig(seed=cfg.seed), start=res.thetas)
            ansatz = BcsAnsatz(tuple(thetas))
            state = Statevector(ansatz.amplitudes())
            if name == "bcs":
                return state, ansatz.circuit()
            proj = Projector(symmetry_operator("number", n), model.a_pairs)
            return Statevector(proj.apply(state.amplitudes), normalize=True), None
    else:
        if name == "hf":
            k = _hubbard_particles(model)
            up, down = (k + 1) // 2, k // 2
            qubits = list(range(up)) + [model.m_sites + i for i in range(down)]
            circ = Circuit(n, [x_gate(q) for q in qubits])
            return apply_circuit(Statevector.zero(n), circ), circ
        if name == "mixed":
            return hubbard_double_occupancy_state(model, _hubbard_particles(model) // 2), None
    raise ValidationError(f"method.state: {name!r} is not available for this model")


def model_sector(model) -> np.ndarray | None:
    if isinstance(model, PairingModel):
        return number_sector(model.n_levels, model.a_pairs)
    if model.n_particles is not None:
        return number_sector(model.n_qubits, model.n_particles)
    return None


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


@dataclass
class RunOutput:
    files: list[Path] = field(default_factory=list)
    results: dict[str, Any] = field(default_factory=dict)


def run_diag(cfg: RunConfig) -> RunOutput:
    model, h = build_model(cfg)
    raw = cfg.method["sector"].strip().lower()
    if raw == "all":
        sector_count = None
    elif raw:
        sector_count = cfg.get("sector", int)
    elif isinstance(model, PairingModel):
        sector_count = model.a_pairs
    else:
        sector_count = model.n_particles
    basis = number_sector(model.n_qubits, sector_count) if sector_count is not None else None
    vals, _vecs = exact_diagonalize(h, basis=basis)
    count = cfg.get("count", int) or len(vals)
    rows = [(i, e) for i, e in enumerate(vals[:count])]
    out = RunOutput()
    out.files.append(rio.write_csv(cfg.out / "eigenvalues.csv", ["index", "energy"], rows))
    out.results = {"ground_energy": float(vals[0]), "dimension": len(vals), "sector": sector_count}
    return out


def run_vqe(cfg: RunConfig) -> RunOutput:
    model, _h = build_model(cfg)
    if not isinstance(model, PairingModel):
        raise ValidationError("model.kind: vqe supports the pairing model only")
    grid = floats(cfg.method["g_grid"]) or [model.g]
    vcfg = VqeConfig(eps_tol=cfg.get("eps_tol", float), restarts=cfg.get("restarts", int), seed=cfg.seed)
    route = cfg.method["route"].strip()
    columns = ["g", "e_gs", "e_hf", "e_bcs", "e_pav", "e_vap", "lambda_f", "gap", "n_mean",
               "err_bcs", "err_pav", "err_vap"]
    rows, records = [], []
    for g in grid:
        m = model.with_g(g)
        res = energy_hierarchy(m, vcfg, route)
        e_gs = float(exact_diagonalize(build_pairing(m), basis=number_sector(m.n_levels, m.a_pairs))[0][0])
        e_hf = pairing_hf_energy(m)
        exact_corr = e_gs - e_hf

        def err(e):
            corr = e - e_hf
            return relative_error(corr, exact_corr) if abs(corr) > 1e-12 else None

        rows.append((g, e_gs, e_hf, res.e_bcs, res.e_pav, res.e_vap, res.lambda_f, res.gap, res.n_mean,
                     err(res.e_bcs), err(res.e_pav), err(res.e_vap)))
        rec = res.to_dict()
        rec.pop("trace")
        records.append({"g": g, "e_gs": e_gs, **rec})
    out = RunOutput()
    out.files.append(rio.write_csv(cfg.out / "energies.csv", columns, rows))
    out.files.append(rio.write_json(cfg.out / "vqe.json", records))
    out.results = {"points": len(rows), "max_err_vap": max((r[-1] or 0.0) for r in rows)}
    return out


def _target_value(cfg: RunConfig, model, kind: str) -> float:
    t = cfg.get("target", float)
    if t is not None:
        return t
    if kind == "number":
        return float(model.a_pairs if isinstance(model, PairingModel) else _hubbard_particles(model))
    if kind == "parity":
        return 1.0
    return 0.0


def run_project(cfg: RunConfig) -> RunOutput:
    model, h = build_model(cfg)
    kind = cfg.method["symmetry"].strip()
    sym = symmetry_operator(kind, model.n_qubits)
    target = _target_value(cfg, model, kind)
    projector = Projector(sym, target)
    state, prep = prepare_state(cfg, model, cfg.method["state"].strip())
    mode = cfg.method["mode"].strip()
    method = cfg.method["method"].strip()
    methods = PROJECTION_METHODS if method == "all" else (method,)
    for m in methods:
        if m not in PROJECTION_METHODS:
            raise ValidationError(f"method.method: {m!r} not in {PROJECTION_METHODS + ('all',)}")
    exact = projector.apply(state.amplitudes)
    p_good = float(np.vdot(exact, exact).real)
    if p_good < 1e-14:
        raise ValidationError("method.target: the state has no weight in the target sector")
    exact_state = exact / np.sqrt(p_good)
    h_sparse = h.to_sparse()
    e_exact = float(np.vdot(exact_state, h_sparse @ exact_state).real)
    rows = []
    seeds = np.random.SeedSequence(cfg.seed).spawn(len(methods))
    for m, ss in zip(methods, seeds):
        seed = int(ss.generate_state(1)[0])
        outcome = None
        energy, prob, rounds, accepted = None, None, None, True
        if m == "qpe":
            outcome = qpe_project(state, sym, target, mode=mode, rng_seed=seed)
        elif m == "iqpe":
            outcome = iqpe_project(state, sym, target, mode=mode, rng_seed=seed)
        elif m == "rodeo":
            outcome = rodeo(state, sym, symmetry_rodeo_config(sym, target), mode=mode, rng_seed=seed)
        elif m == "oracle_hadamard":
            outcome = oracle_hadamard_project(state, projector, mode=mode, rng_seed=seed)
        elif m == "lcu":
            outcome = lcu_apply(state, projector_plan(projector), mode=mode, rng_seed=seed)
        elif m == "amplify":
            if prep is None:
                raise ValidationError("method.state: amplification needs a state with a preparation circuit")
            final, info = grover_hoyer_project(prep, projector)
            fid = abs(np.vdot(exact_state, final.amplitudes)) ** 2
            energy = float(np.vdot(final.amplitudes, h_sparse @ final.amplitudes).real)
            rows.append((m, True, 1.0, info["iterations"], fid, energy))
            continue
        elif m == "implicit":
            energy = float(np.real(implicit_expectation(state, h, sym, target, via="projector",
                                                        shots=cfg.shots if mode == "sample" else None,
                                                        rng_seed=seed)))
            rows.append((m, True, p_good, 0, None, energy))
            continue
        prob = outcome.success_probability
        rounds = outcome.rounds
        accepted = outcome.accepted
        fid = None
        if accepted and outcome.state is not None:
            amps = outcome.state.amplitudes
            fid = abs(np.vdot(exact_state, amps)) ** 2
            energy = float(np.vdot(amps, h_sparse @ amps).real)
        rows.append((m, accepted, prob, rounds, fid, energy))
    out = RunOutput()
    out.files.append(rio.write_csv(
        cfg.out / "projection.csv",
        ["method", "accepted", "success_probability", "rounds", "fidelity", "energy"], rows))
    out.results = {"p_good": p_good, "projected_energy": e_exact, "methods": len(rows)}
    return out


def run_shadow(cfg: RunConfig) -> RunOutput:
    name = cfg.method["state"].strip()
    if name == "gaussian":
        n = cfg.get("n_qubits", int)
        state = gaussian_register_state(n)
        h = None
    else:
        model, h = build_model(cfg)
        n = model.n_qubits
        state, _prep = prepare_state(cfg, model, name)
    count = cfg.shots or 10_000
    trials = cfg.get("trials", int)
    if trials < 1:
        raise ValidationError("method.trials must be positive")
    projection = cfg.method["projection"].strip()
    n_p = cfg.get("n_p", int)
    seeds = [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(cfg.seed).spawn(trials)]
    out = RunOutput()
    if projection == "number":
        labels = [(k,) for k in range(n + 1)]
        exact = [exact_shadow_average(state, "I" * n, NumberProjection(k)).real for k in range(n + 1)]
    elif projection == "spin":
        labels = spin_sectors(n)
        exact = [exact_shadow_average(state, "I" * n, SpinProjection(s, m, n_p)).real for s, m in labels]
    else:
        raise ValidationError("method.projection must be 'number' or 'spin'")
    estimates = np.zeros((trials, len(labels)))
    energies = []
    for t, seed in enumerate(seeds):
        shadow = sample_snapshots(state, count, seed)
        if t == 0:
            shadow.save(cfg.out / "snapshots.txt")
            out.files.append(cfg.out / "snapshots.txt")
        if projection == "number":
            estimates[t] = number_profile(shadow).real
        else:
            prof = spin_profile(shadow, n_p)
            estimates[t] = [prof[lab].real for lab in labels]
        if h is not None and isinstance(model, PairingModel):
            energies.append(projected_energy(shadow, h, NumberProjection(model.a_pairs)))
    mean = estimates.mean(axis=0)
    std = estimates.std(axis=0, ddof=1) if trials > 1 else np.full(len(labels), np.nan)
    cols = ["n"] if projection == "number" else ["s", "m"]
    rows = [(*lab, mu, None if np.isnan(sd) else sd, ex) for lab, mu, sd, ex in zip(labels, mean, std, exact)]
    out.files.append(rio.write_csv(cfg.out / "sector_weights.csv", cols + ["estimate", "std", "exact"], rows))
    out.results = {"snapshots": count, "trials": trials, "max_abs_dev": float(np.max(np.abs(mean - exact)))}
    if energies:
        out.files.append(rio.write_csv(cfg.out / "projected_energy.csv", ["trial", "energy"], list(enumerate(energies))))
        out.results["projected_energy_mean"] = float(np.mean(energies))
    return out


def _time_grid(t_max: float, dt: float) -> np.ndarray:
    if dt <= 0 or t_max <= 0:
        raise ValidationError("time grid needs positive t_max and dt")
    return dt * np.arange(int(round(t_max / dt)) + 1)


def run_genfun(cfg: RunConfig) -> RunOutput:
    model, h = build_model(cfg)
    state, _prep = prepare_state(cfg, model, cfg.method["state"].strip())
    times = _time_grid(cfg.get("t_max", float), cfg.get("dt", float))
    series = compute_gf(state, h, times, source=cfg.method["source"].strip(),
                        trotter_steps=cfg.get("trotter_steps", int), order=cfg.get("order", int),
                        shots=cfg.shots, rng_seed=cfg.seed)
    rows = [(t, v.real, v.imag) for t, v in zip(series.times, series.values)]
    cols = ["t", "re", "im"]
    if series.stderr is not None:
        rows = [(*r, e) for r, e in zip(rows, series.stderr)]
        cols.append("stderr")
    out = RunOutput()
    out.files.append(rio.write_csv(cfg.out / "gf.csv", cols, rows))
    out.results = {"points": len(rows), "source": series.source}
    return out


def run_spectrum(cfg: RunConfig) -> RunOutput:
    model, h = build_model(cfg)
    state, _prep = prepare_state(cfg, model, cfg.method["state"].strip())
    method = cfg.method["method"].strip()
    sector = model_sector(model)
    e_gs = float(exact_diagonalize(h, basis=sector)[0][0])
    spec = state_spectrum(state, h)
    mean = float(spec.weights @ spec.energies)
    out = RunOutput()
    res: dict[str, Any] = {"e_gs": e_gs}
    if method == "fourier":
        series = compute_gf(state, h, _time_grid(cfg.get("t_max", float), cfg.get("dt", float)))
        est = fourier_peaks(series, cfg.get("zero_pad", int))
        out.files.append(rio.write_csv(cfg.out / "spectrum.csv", ["energy", "weight"],
                                       list(zip(est.energies, est.weights))))
        res.update(peaks=len(est.energies), resolution=est.resolution)
    elif method == "moments":
        k_max = cfg.get("k_max", int)
        exact = moments(spec, k_max).values
        series = compute_gf(state, h, _time_grid(cfg.get("fdm_dt", float) * 200, cfg.get("fdm_dt", float)))
        fdm = fdm_moments(series, k_max, cfg.get("fdm_accuracy", int))
        rows = [(k, exact[k], fdm.values[k], fdm.errors[k]) for k in range(k_max + 1)]
        out.files.append(rio.write_csv(cfg.out / "moments.csv", ["k", "spectrum", "fdm", "fdm_error"], rows))
        res["k_max"] = k_max
    elif method == "texp":
        n_cum = cfg.get("n_cumulants", int)
        kap = cumulants(moments(spec, n_cum, shift=mean))
        orders = tuple(int(v) for v in cfg.method["pade"].split(","))
        if len(orders) != 2:
            raise ValidationError("method.pade must be 'I,J'")
        r = t_expansion(kap, n_cum - 2, orders, cfg.get("tau_max", float))
        ref = imaginary_time_reference(state, h, r.taus)
        out.files.append(rio.write_csv(cfg.out / "texpansion.csv", ["tau", "energy", "exact"],
                                       list(zip(r.taus, r.energies, ref))))
        res.update(estimate=r.estimate, pade=list(r.pade_orders), rel_error=(r.estimate - e_gs) / abs(e_gs))
    elif method in ("krylov", "survival"):
        m_max = cfg.get("m_max", int)
        kr = krylov_from_moments(moments(spec, 2 * m_max - 1, shift=mean))
        if method == "krylov":
            rows = [(m, g, e) for m in sorted(kr.solutions) for g, e in enumerate(kr.eigenvalues(m))]
            out.files.append(rio.write_csv(cfg.out / "krylov.csv", ["M", "index", "energy"], rows))
            res["lowest"] = kr.lowest()[m_max]
        else:
            times = _time_grid(cfg.get("survival_t_max", float), cfg.get("survival_dt", float))
            cols = {"t": times, "exact": exact_survival(state, h, times)}
            for m in sorted(kr.solutions):
                cols[f"M{m}"] = survival_probability(kr, m, times)
            out.files.append(rio.write_csv(cfg.out / "survival.csv", list(cols), list(zip(*cols.values()))))
    elif method == "qkrylov":
        m_max = cfg.get("m_max", int)
        taus = cfg.get("dtau", float) / model_energy_unit(model) * np.arange(m_max)
        kr = quantum_krylov(state, h, taus, eps=cfg.get("eps", float), spectrum=spec)
        rows = [(m, g, e) for m in sorted(kr.solutions) for g, e in enumerate(kr.eigenvalues(m))]
        out.files.append(rio.write_csv(cfg.out / "qkrylov.csv", ["M", "index", "energy"], rows))
        res["lowest"] = kr.lowest()[m_max]
    else:
        raise ValidationError("method.method must be fourier, moments, texp, krylov, survival or qkrylov")
    out.results = res
    return out


def model_energy_unit(model) -> float:
    return model.delta_e if isinstance(model, PairingModel) else model.j


RUNNERS: dict[str, Callable[[RunConfig], RunOutput]] = {
    "diag": run_diag,
    "vqe": run_vqe,
    "project": run_project,
    "shadow": run_shadow,
    "genfun": run_genfun,
    "spectrum": run_spectrum,
}


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="symrestore", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="INI file with [model], [method] and [run] sections")
        p.add_argument("--seed", type=int)
        p.add_argument("--out", help="output directory")
        p.add_argument("--shots", type=int)
        p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config value")
    return parser


def run(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    cfg = load_config(args)
    cfg.out.mkdir(parents=True, exist_ok=True)
    output = RUNNERS[cfg.subcommand](cfg)
    manifest = {
        "config": cfg.echo(),
        "version": __version__,
        "wall_time_s": time.perf_counter() - started,
        "outputs": sorted(p.name for p in output.files),
        "results": output.results,
    }
    rio.write_json(cfg.out / "manifest.json", manifest)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return run(args)
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
