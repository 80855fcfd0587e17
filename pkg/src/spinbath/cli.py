"""Command-line experiment driver.

Every (N, coupling) pair is an independent task: its Hamiltonian is built and
diagonalized once (per temperature for the polaron picture) and all requested
temperatures and observables are evaluated from it. Tasks may run in a
thread pool; rows are sorted before the single-threaded writer runs, so the
output does not depend on scheduling.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import mapping, models, rcbench, spectral, thermo
from .config import ConfigError, ExperimentConfig, dump_config, parse_config, validate
from .spinops import DomainError, eigendecompose

log = logging.getLogger("spinbath")

HEADER = "n,temperature,coupling,observable,value"


def fmt(x: float) -> str:
    return format(float(x), ".12g")


@dataclass(frozen=True, order=True)
class SweepRow:
    n: int
    temperature: float
    coupling: float
    observable: str
    value: float

    def sort_key(self):
        return (self.n, -self.temperature, self.coupling, self.observable)

    def csv(self) -> str:
        return f"{self.n},{fmt(self.temperature)},{fmt(self.coupling)},{self.observable},{fmt(self.value)}"


class PointError(RuntimeError):
    """A single grid point failed; carries the point so the report can name it."""

    def __init__(self, n, coupling, cause):
        super().__init__(f"N={n}, coupling={fmt(coupling)}: {cause}")
        self.n, self.coupling, self.cause = n, coupling, cause


# ---------------------------------------------------------------------------
# building blocks


def spectral_density(cfg: ExperimentConfig, value: float, weight: float = 1.0):
    b = cfg.bath
    if b["spectral"] == "brownian":
        return spectral.Brownian(weight * value, b["omega0"], b["gamma"])
    return spectral.SuperOhmic(weight * value, b["omega_c"])


def bath_scheme(cfg: ExperimentConfig, scheme: str, n: int, value: float) -> models.BathScheme:
    nb = models.n_baths(scheme, n)
    weights = cfg.bath["weights"] or [1.0] * nb
    return models.BathScheme(scheme, tuple(spectral_density(cfg, value, w) for w in weights))


def chain_spec(cfg: ExperimentConfig, n: int) -> models.ChainSpec:
    c = cfg.chain
    deltas = tuple(c["delta"]) if isinstance(c["delta"], list) else (c["delta"],) * n
    return models.ChainSpec(n, deltas, c["jx"], c["jy"], c["jz"])


def system_hamiltonian(cfg: ExperimentConfig, n: int) -> np.ndarray:
    if cfg.model == "fully_connected":
        return models.fully_connected_ising(models.FullyConnectedSpec(n, cfg.chain["delta"], cfg.chain["j"]))
    spec = chain_spec(cfg, n)
    return models.ising_chain(spec) if cfg.model == "ising" else models.heisenberg_chain(spec)


def effective_hamiltonian(cfg: ExperimentConfig, scheme: str, n: int, value: float, beta=None) -> np.ndarray:
    """Spin-space Hamiltonian of the effh or polaron picture."""
    bs = bath_scheme(cfg, scheme, n, value)
    if cfg.model == "fully_connected":
        spec = models.FullyConnectedSpec(n, cfg.chain["delta"], cfg.chain["j"])
        if cfg.picture == "polaron":
            return mapping.polaron_fully_connected(spec, bs.baths[0], beta).h
        return mapping.effh_fully_connected(spec, spectral.rc_params(bs.baths[0])).h
    spec = chain_spec(cfg, n)
    if cfg.picture == "polaron":
        return mapping.polaron_hamiltonian(bs, spec, beta).h
    return mapping.effh_scheme(bs, spec).h


def observable_fns(names: Sequence[str], n: int) -> dict[str, Callable]:
    """Map each requested observable to one or more named scalar columns."""
    out: dict[str, Callable] = {}
    for name in names:
        axis = name[-1]
        if name.startswith("S_"):
            out[name] = lambda st, a=axis: thermo.structure_factor(st, a)
        else:
            for i in range(1, n + 1):
                for j in range(i + 1, n + 1):
                    out[f"{name}({i},{j})"] = lambda st, a=axis, i=i, j=j: thermo.pauli_expectation(
                        st, {i: a, j: a}
                    )
    return out


def reduced_states(cfg: ExperimentConfig, scheme: str, n: int, value: float, levels: int | None = None):
    """Yield (T, state) for every configured temperature, reusing diagonalizations."""
    temps = cfg.temperatures
    if cfg.picture == "polaron":
        for t in temps:
            yield t, thermo.gibbs_state(effective_hamiltonian(cfg, scheme, n, value, 1.0 / t), 1.0 / t)
        return
    if cfg.picture == "effh":
        evals, evecs = eigendecompose(effective_hamiltonian(cfg, scheme, n, value))
        for t in temps:
            yield t, thermo.gibbs_from_spectrum(evals, evecs, 1.0 / t)
        return
    levels = levels or cfg.rc["levels"]
    bs = bath_scheme(cfg, scheme, n, value)
    atts = mapping.attachments_for(bs, n, [spectral.rc_params(sd) for sd in bs.baths])
    trunc = rcbench.RCTruncation(levels, len(atts))
    h_rc = rcbench.rc_hamiltonian(system_hamiltonian(cfg, n), atts, trunc)
    evals, evecs = eigendecompose(h_rc)
    d = 2**n
    k = trunc.bath_dim
    for t in temps:
        st = thermo.gibbs_from_spectrum(evals, evecs, 1.0 / t)
        v = evecs.reshape(d, k, -1)
        rho = np.einsum("iak,jak,k->ij", v, v.conj(), st.populations)
        yield t, rcbench.ReducedState(0.5 * (rho + rho.conj().T), levels, 1.0 / t, {"rc": [a.rc for a in atts]})


def evaluate_point(cfg: ExperimentConfig, scheme: str, n: int, value: float) -> list[SweepRow]:
    fns = observable_fns(cfg.observables, n)
    rows = []
    try:
        for t, st in reduced_states(cfg, scheme, n, value):
            rows.extend(SweepRow(n, t, value, name, float(fn(st))) for name, fn in fns.items())
        if cfg.picture == "rc_bench" and cfg.rc["check_convergence"]:
            _convergence_check(cfg, scheme, n, value, rows, fns)
    except (DomainError, spectral.QuadratureError) as exc:
        raise PointError(n, value, exc) from exc
    return rows


def _convergence_check(cfg, scheme, n, value, rows, fns) -> None:
    m = cfg.rc["levels"] + 2
    base = {(r.temperature, r.observable): r.value for r in rows}
    try:
        states = list(reduced_states(cfg, scheme, n, value, levels=m))
    except DomainError as exc:
        log.warning("convergence check skipped at N=%d, coupling=%s: %s", n, fmt(value), exc)
        return
    for t, st in states:
        for name, fn in fns.items():
            diff = abs(float(fn(st)) - base[(t, name)])
            if diff >= rcbench.CONVERGENCE_TOL:
                log.warning(
                    "RC truncation not converged: N=%d T=%s coupling=%s %s changes by %.3e from M=%d to M=%d",
                    n, fmt(t), fmt(value), name, diff, m - 2, m,
                )


def _map(fn, items, threads: int):
    if threads <= 1:
        return [fn(*it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda it: fn(*it), items))


def collect(cfg: ExperimentConfig, scheme: str | None = None) -> list[SweepRow]:
    scheme = scheme or cfg.scheme
    items = [(cfg, scheme, n, v) for n in cfg.sizes for v in cfg.grid]
    rows = [r for chunk in _map(evaluate_point, items, cfg.threads) for r in chunk]
    return sorted(rows, key=SweepRow.sort_key)


def write_rows(path: Path, rows: Sequence[SweepRow]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as f:
        f.write(HEADER + "\n")
        for r in rows:
            f.write(r.csv() + "\n")
    return path


# ---------------------------------------------------------------------------
# commands


def run_sweep(cfg: ExperimentConfig, out_dir=".") -> Path:
    return write_rows(Path(out_dir) / cfg.output, collect(cfg))


def run_corr_map(cfg: ExperimentConfig, out_dir=".") -> list[Path]:
    """One long-form ``i,j,value`` file per (scheme, coupling, axis[, N, T])."""
    axes = [o[-1] for o in cfg.observables if o.startswith("corr_")] or ["x"]
    stem = Path(cfg.output).stem
    multi = len(cfg.sizes) > 1 or len(cfg.temperatures) > 1
    paths = []
    for scheme in cfg.schemes:
        items = [(scheme, n, v) for n in cfg.sizes for v in cfg.grid]

        def task(scheme, n, v):
            try:
                return [(t, {a: thermo.correlation_matrix(st, a).values for a in axes})
                        for t, st in reduced_states(cfg, scheme, n, v)]
            except (DomainError, spectral.QuadratureError) as exc:
                raise PointError(n, v, exc) from exc

        results = _map(task, items, cfg.threads)
        for (scheme_, n, v), per_t in zip(items, results):
            for t, mats in per_t:
                for a in axes:
                    name = f"{stem}_{scheme_}_{a}_c{fmt(v)}"
                    if multi:
                        name += f"_n{n}_T{fmt(t)}"
                    path = Path(out_dir) / f"{name}.csv"
                    path.parent.mkdir(parents=True, exist_ok=True)
                    with open(path, "w", newline="\n") as f:
                        f.write("i,j,value\n")
                        m = mats[a]
                        for i in range(n):
                            for j in range(n):
                                f.write(f"{i + 1},{j + 1},{fmt(m[i, j])}\n")
                    paths.append(path)
    return paths


@dataclass(frozen=True)
class Crossing:
    n: int
    temperature: float
    analytic: float
    empirical: float | None

    @property
    def bracketed(self) -> bool:
        return self.empirical is not None


def analytic_critical(cfg: ExperimentConfig) -> float:
    spec = models.FullyConnectedSpec(2, cfg.chain["delta"], cfg.chain["j"])
    w = (cfg.bath["weights"] or [1.0])[0]
    if w == 0:
        return float("nan")
    if cfg.bath["spectral"] == "brownian":
        return mapping.critical_coupling(spec, cfg.bath["omega0"]) / w
    return mapping.critical_alpha(spec, cfg.bath["omega_c"]) / w


def half_crossing(grid: Sequence[float], values: Sequence[float], level: float = 0.5) -> float | None:
    """First grid interval where ``values - level`` changes sign, linearly interpolated."""
    g = np.asarray(grid, dtype=float)
    y = np.asarray(values, dtype=float) - level
    for k in range(len(g) - 1):
        if y[k] == 0:
            return float(g[k])
        if y[k] * y[k + 1] < 0:
            return float(g[k] - y[k] * (g[k + 1] - g[k]) / (y[k + 1] - y[k]))
    if len(y) and y[-1] == 0:
        return float(g[-1])
    return None


def qpt_crossings(cfg: ExperimentConfig, rows: Sequence[SweepRow]) -> list[Crossing]:
    crit = analytic_critical(cfg)
    out = []
    for n in cfg.sizes:
        for t in sorted(cfg.temperatures, reverse=True):
            pts = sorted((r.coupling, r.value) for r in rows
                         if r.n == n and r.temperature == t and r.observable == "S_x")
            out.append(Crossing(n, t, crit, half_crossing([p[0] for p in pts], [p[1] for p in pts])))
    return out


def run_qpt(cfg: ExperimentConfig, out_dir=".") -> tuple[Path, Path, list[Crossing]]:
    if cfg.model != "fully_connected":
        raise ConfigError("qpt needs model = fully_connected", "model")
    if "S_x" not in cfg.observables:
        cfg = cfg.replace(observables=tuple(sorted(set(cfg.observables) | {"S_x"})))
    rows = collect(cfg)
    csv_path = write_rows(Path(out_dir) / cfg.output, rows)
    crossings = qpt_crossings(cfg, rows)
    rep = Path(out_dir) / f"{Path(cfg.output).stem}_crossings.csv"
    with open(rep, "w", newline="\n") as f:
        f.write("n,temperature,analytic,crossing\n")
        for c in crossings:
            emp = fmt(c.empirical) if c.bracketed else "not bracketed"
            f.write(f"{c.n},{fmt(c.temperature)},{fmt(c.analytic)},{emp}\n")
    return csv_path, rep, crossings


# ---------------------------------------------------------------------------
# entry point


def _error_line(kind: str, message: str, **extra) -> str:
    payload = {"error": kind, "message": message}
    payload.update({k: v for k, v in extra.items() if v is not None})
    return "spinbath-error " + json.dumps(payload, sort_keys=True)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="spinbath", description="Equilibrium spin chains under strong bath coupling.")
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in [
        ("sweep", "structure factors / correlators over a coupling grid"),
        ("corr-map", "N x N correlation maps, one file per scheme and coupling"),
        ("qpt", "fully-connected sweep plus S_x = 1/2 crossing report"),
        ("rc-bench", "sweep with picture = rc_bench"),
        ("print-config", "echo the fully populated configuration"),
    ]:
        s = sub.add_parser(name, help=help_)
        s.add_argument("--config", required=True, help="TOML experiment file")
        s.add_argument("--out", default=".", help="output directory")
        s.add_argument("--threads", type=int, default=None, help="parallel grid points")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = parse_config(args.config)
        if args.threads is not None:
            if args.threads < 1:
                raise ConfigError("--threads must be >= 1", "threads")
            cfg = cfg.replace(threads=args.threads)
        if args.command == "print-config":
            sys.stdout.write(dump_config(cfg))
            return 0
        if args.command == "rc-bench":
            raw = dict(cfg.raw)
            raw["picture"] = "rc_bench"
            raw["grid"] = {"values": list(cfg.grid)}
            cfg = validate(raw).replace(threads=cfg.threads)
        if args.command in ("sweep", "rc-bench"):
            print(run_sweep(cfg, args.out))
        elif args.command == "corr-map":
            for path in run_corr_map(cfg, args.out):
                print(path)
        elif args.command == "qpt":
            csv_path, rep, crossings = run_qpt(cfg, args.out)
            print(csv_path)
            print(rep)
            for c in crossings:
                emp = fmt(c.empirical) if c.bracketed else "not bracketed"
                print(f"N={c.n} T={fmt(c.temperature)} analytic={fmt(c.analytic)} crossing={emp}")
    except ConfigError as exc:
        print(_error_line("config", str(exc), field=exc.field, line=exc.line), file=sys.stderr)
        return 2
    except PointError as exc:
        print(_error_line("point", str(exc), n=exc.n, coupling=exc.coupling), file=sys.stderr)
        return 3
    except (DomainError, spectral.QuadratureError) as exc:
        print(_error_line("domain", str(exc)), file=sys.stderr)
        return 3
    except OSError as exc:
        print(_error_line("io", str(exc)), file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
