"""Command-line driver: ``duet-baths <command> [--config PATH] [--set key=value ...]``.

Configuration is a flat text file of dotted ``key = value`` lines; ``#``
starts a comment. Every run writes CSV tables (17 significant digits), a
``manifest.txt`` echoing the resolved parameters and a standalone
``plot.py`` that draws the tables with matplotlib.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .correlators import (
    coherence_noise_strong,
    effective_temperatures,
    initial_correlator_matrix,
    stationary_numeric,
    stationary_strong,
    stationary_weak,
)
from .errors import ConfigError, DomainError, DuetError, InstabilityError, NumericalError
from .greens import (
    Regime,
    check_stable,
    greens_kernel,
    laplace_matrix,
    slow_damping_rate,
    weak_rates,
)
from .model import BathSpec, Cutoff, SystemParams, diagonalize, renormalized_basis
from .oracle import (
    build_hamiltonian,
    discrete_counterterms,
    discretize,
    initial_state,
    log_negativity,
    system_covariances,
)

EXIT_OK, EXIT_CONFIG, EXIT_INSTABILITY, EXIT_NUMERICAL = 0, 2, 3, 4

_EVOLVE_KINDS = {"q++": (0, 0), "q--": (1, 1), "q+-": (0, 1)}
_STATIONARY_KINDS = ("q++", "q--", "q+-", "p++", "p--", "p+-")
_ORACLE_KINDS = {"q++": (0, 0), "q--": (1, 1), "q+-": (0, 1), "p++": (2, 2), "p--": (3, 3), "p+-": (2, 3)}

_KEYS = {
    "system.w", "system.delta", "system.psi",
    "system.omega_a", "system.omega_b", "system.omega_c", "system.theta",
    "regime", "outputs", "tol",
    "grid.t_min", "grid.t_max", "grid.n_points",
    "grid.tau_min", "grid.tau_max", "grid.tau_points",
    "oracle.n_modes", "oracle.omega_max",
    "sweep.param", "sweep.values", "sweep.start", "sweep.stop", "sweep.n",
}
for _j in (1, 2):
    _KEYS |= {f"bath{_j}.{k}" for k in ("gamma", "lambda", "temperature", "cutoff", "strict_ohmic")}

_DEFAULTS = {
    "system.w": "1.0",
    "system.delta": "0.0",
    "system.psi": repr(math.pi / 4),
    "bath1.gamma": "0.1",
    "bath2.gamma": "0.03",
    "bath1.lambda": "50.0",
    "bath2.lambda": "50.0",
    "bath1.temperature": "0.0",
    "bath2.temperature": "0.0",
    "bath1.cutoff": "sharp",
    "bath2.cutoff": "sharp",
    "bath1.strict_ohmic": "true",
    "bath2.strict_ohmic": "true",
    "regime": "auto",
    "grid.t_min": "0.0",
    "grid.t_max": "60.0",
    "grid.n_points": "241",
    "grid.tau_min": "0.0",
    "grid.tau_max": "20.0",
    "grid.tau_points": "81",
    "tol": "1e-10",
}

_REGIME_NAMES = {
    "auto": None,
    "strongdelta0": Regime.STRONG_DELTA0,
    "strong_delta0": Regime.STRONG_DELTA0,
    "onebath": Regime.ONE_BATH,
    "one_bath": Regime.ONE_BATH,
    "weak": Regime.WEAK,
    "weakcoupling": Regime.WEAK,
    "numeric": Regime.NUMERIC,
    "numericbromwich": Regime.NUMERIC,
}


# ---------------------------------------------------------------- configuration


def parse_config_text(text: str, source: str = "<config>") -> dict:
    """Parse ``key = value`` lines into a dict; errors carry the line number."""
    out = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{n}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _KEYS:
            raise ConfigError(f"{source}:{n}: unknown key {key!r}")
        out[key] = value
    return out


def _parse_override(item: str) -> tuple[str, str]:
    if "=" not in item:
        raise ConfigError(f"--set expects key=value, got {item!r}")
    key, value = (s.strip() for s in item.split("=", 1))
    if key not in _KEYS:
        raise ConfigError(f"--set: unknown key {key!r}")
    return key, value


def _float(raw: dict, key: str) -> float:
    try:
        v = float(raw[key])
    except KeyError:
        raise ConfigError(f"missing required key {key!r}") from None
    except ValueError:
        raise ConfigError(f"{key}: not a number: {raw[key]!r}") from None
    if not math.isfinite(v):
        raise ConfigError(f"{key}: must be finite")
    return v


def _int(raw: dict, key: str) -> int:
    v = _float(raw, key)
    if v != int(v):
        raise ConfigError(f"{key}: must be an integer")
    return int(v)


def _bool(raw: dict, key: str) -> bool:
    v = raw[key].lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{key}: expected true/false, got {raw[key]!r}")


@dataclass(frozen=True)
class RunConfig:
    w: float
    delta: float
    psi: float
    baths: tuple
    regime_requested: str
    regime: Regime
    t_grid: np.ndarray = field(compare=False)
    tau_grid: np.ndarray = field(compare=False)
    outputs: tuple
    tol: float
    oracle: dict | None
    system: SystemParams | None = None
    raw: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def basis(self):
        return renormalized_basis(self.w, self.delta, self.psi)


def resolve_regime(w: float, delta: float, gamma1: float, gamma2: float) -> Regime:
    """Auto rule: gamma2 = 0 and Delta = 0 -> OneBath; Delta = 0 -> StrongDelta0;
    max(gamma) / min(W - Delta/2, |Delta|) < 0.2 -> Weak; otherwise Numeric."""
    if delta == 0.0:
        return Regime.ONE_BATH if gamma2 == 0.0 else Regime.STRONG_DELTA0
    scale = min(w - abs(delta) / 2, abs(delta))
    if scale > 0 and max(gamma1, gamma2) / scale < 0.2:
        return Regime.WEAK
    return Regime.NUMERIC


def _bath(raw: dict, j: int) -> BathSpec:
    p = f"bath{j}."
    try:
        cutoff = Cutoff(raw[p + "cutoff"].lower())
    except ValueError:
        raise ConfigError(f"{p}cutoff: expected one of {[c.value for c in Cutoff]}") from None
    return BathSpec(_float(raw, p + "gamma"), _float(raw, p + "lambda"), _float(raw, p + "temperature"), cutoff,
                    _bool(raw, p + "strict_ohmic"))


def _grid(raw, lo, hi, n):
    a, b, k = _float(raw, lo), _float(raw, hi), _int(raw, n)
    if k < 1 or b < a:
        raise ConfigError(f"bad grid {lo}..{hi} with {k} points")
    return np.linspace(a, b, k)


def build_config(raw_in: dict) -> RunConfig:
    raw = dict(_DEFAULTS)
    raw.update(raw_in)
    system = None
    if any(k in raw_in for k in ("system.omega_a", "system.omega_b", "system.omega_c")):
        system = SystemParams(_float(raw, "system.omega_a"), _float(raw, "system.omega_b"),
                              _float(raw, "system.omega_c"), float(raw.get("system.theta", 0.0)))
        nm = diagonalize(system)
        w, delta, psi = nm.w_mean, nm.detuning, nm.psi_angle
    else:
        w, delta, psi = _float(raw, "system.w"), _float(raw, "system.delta"), _float(raw, "system.psi")
    b1, b2 = _bath(raw, 1), _bath(raw, 2)
    renormalized_basis(w, delta, psi)
    req = raw["regime"].lower()
    if req not in _REGIME_NAMES:
        raise ConfigError(f"regime: unknown value {raw['regime']!r}")
    regime = _REGIME_NAMES[req] or resolve_regime(w, delta, b1.gamma, b2.gamma)
    outputs = tuple(s.strip() for s in raw.get("outputs", "q+-").split(",") if s.strip())
    for o in outputs:
        if o not in _STATIONARY_KINDS:
            raise ConfigError(f"outputs: unknown correlator {o!r}; choose from {list(_STATIONARY_KINDS)}")
    tol = _float(raw, "tol")
    if tol <= 0:
        raise ConfigError("tol must be > 0")
    oracle = None
    if "oracle.n_modes" in raw or "oracle.omega_max" in raw:
        oracle = {"n_modes": _int(raw, "oracle.n_modes") if "oracle.n_modes" in raw else 400,
                  "omega_max": _float(raw, "oracle.omega_max") if "oracle.omega_max" in raw else None}
    return RunConfig(w, delta, psi, (b1, b2), req, regime,
                     _grid(raw, "grid.t_min", "grid.t_max", "grid.n_points"),
                     _grid(raw, "grid.tau_min", "grid.tau_max", "grid.tau_points"),
                     outputs, tol, oracle, system, raw)


def load_config(path: str | None, overrides=()) -> RunConfig:
    raw = {}
    if path:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        raw = parse_config_text(text, path)
    for item in overrides:
        k, v = _parse_override(item)
        raw[k] = v
    return build_config(raw)


# ---------------------------------------------------------------- computations


def _kernel(cfg: RunConfig):
    b1, b2 = cfg.baths
    lap = laplace_matrix(cfg.basis, b1, b2)
    check_stable(lap)
    if cfg.regime is Regime.NUMERIC:
        return greens_kernel(cfg.w, cfg.delta, cfg.psi, b1.gamma, b2.gamma, Regime.NUMERIC, laplace=lap)
    return greens_kernel(cfg.w, cfg.delta, cfg.psi, b1.gamma, b2.gamma, cfg.regime)


def evolve_tables(cfg: RunConfig, with_noise: bool = True) -> dict:
    """Time-dependent equal-time correlators <q_a(t) q_b(t)> per requested kind.

    Returns {kind: list of (t, complex value, source)} rows.
    """
    kernel = _kernel(cfg)
    t = cfg.t_grid
    g, gd = np.asarray(kernel(t)), np.asarray(kernel.derivative(t))
    if g.ndim == 2:
        g, gd = g[None], gd[None]
    mat = initial_correlator_matrix(g, gd, (cfg.w - cfg.delta / 2, cfg.w + cfg.delta / 2))
    tables = {}
    for kind in cfg.outputs:
        if kind not in _EVOLVE_KINDS:
            raise ConfigError(f"evolve supports {sorted(_EVOLVE_KINDS)}, not {kind!r}")
        a, b = _EVOLVE_KINDS[kind]
        init = mat[:, a, b]
        rows = [(tk, complex(v), "InitialCondition") for tk, v in zip(t, init)]
        if with_noise and kind == "q+-" and cfg.delta == 0.0:
            b1, b2 = cfg.baths
            noise = coherence_noise_strong(cfg.w, cfg.psi, b1, b2, t, epsabs=cfg.tol)
            rows += [(tk, complex(v), "Noise") for tk, v in zip(t, noise)]
            rows += [(tk, complex(i + n), "Total") for tk, i, n in zip(t, init, noise)]
        tables[kind] = rows
    return tables


def _clamp_tau(cfg: RunConfig, taus: np.ndarray, clamp: bool) -> np.ndarray:
    strict = [b for b in cfg.baths if b.strict_ohmic and b.gamma > 0]
    if not strict:
        return taus
    floor = 1.0 / min(b.lambda_cut for b in strict)
    small = np.abs(taus) < floor
    if not small.any():
        return taus
    if not clamp:
        raise DomainError(f"momentum correlators need |tau| >= 1/Lambda = {floor:g} for strict Ohmic baths; "
                          "pass --tau-min-lambda to evaluate at tau = 1/Lambda")
    out = taus.copy()
    out[small] = np.where(taus[small] < 0, -floor, floor)
    return out


def stationary_tables(cfg: RunConfig, tau_min_lambda: bool = False) -> dict:
    basis = cfg.basis
    tables = {}
    for obs in ("q", "p"):
        kinds = [k for k in cfg.outputs if k.startswith(obs)]
        if not kinds:
            continue
        taus = cfg.tau_grid if obs == "q" else _clamp_tau(cfg, cfg.tau_grid, tau_min_lambda)
        if cfg.regime in (Regime.STRONG_DELTA0, Regime.ONE_BATH):
            series = {s.kind.value: s.values for s in stationary_strong(basis, cfg.baths, taus, obs)}
            src = "Noise"
        elif cfg.regime is Regime.WEAK:
            series = {s.kind.value: s.values for s in stationary_weak(basis, cfg.baths, taus, obs)}
            src = "Noise"
        else:
            series = {}
            for k in kinds:
                el = {"++": (0, 0), "--": (1, 1), "+-": (0, 1)}[k[1:]]
                series[f"{obs.upper()*2}_{_suffix(k)}"] = stationary_numeric(
                    basis, cfg.baths, taus, obs, el, epsabs=cfg.tol, epsrel=max(cfg.tol, 1e-8))
            src = "NumericQuadrature"
        for k in kinds:
            vals = series[f"{obs.upper()*2}_{_suffix(k)}"]
            tables[k] = [(tk, complex(v), src) for tk, v in zip(taus, vals)]
    return tables


def _suffix(kind: str) -> str:
    return {"++": "pp", "--": "mm", "+-": "pm"}[kind[1:]]


def _oracle_setup(cfg: RunConfig):
    b1, b2 = cfg.baths
    opts = cfg.oracle or {"n_modes": 400, "omega_max": None}
    discrete = []
    for b in (b1, b2):
        wmax = opts.get("omega_max")
        if wmax is None:
            sharp = b.strict_ohmic or b.cutoff_family is Cutoff.SHARP
            wmax = b.lambda_cut if sharp else 20.0 * max(cfg.w, b.lambda_cut)
        discrete.append(discretize(b, opts["n_modes"], wmax))
    d1, d2 = discrete
    basis = cfg.basis
    H = build_hamiltonian(basis, discrete_counterterms(d1, d2, cfg.psi), d1, d2)
    return H, initial_state(basis, d1, d2)


def oracle_tables(cfg: RunConfig) -> tuple[dict, list]:
    H, s0 = _oracle_setup(cfg)
    covs = system_covariances(s0, H, cfg.t_grid)
    tables = {}
    for kind in cfg.outputs:
        a, b = _ORACLE_KINDS[kind]
        tables[kind] = [(tk, complex(c[a, b]), "Oracle") for tk, c in zip(cfg.t_grid, covs)]
    en = [(tk, complex(log_negativity(c)), "Oracle") for tk, c in zip(cfg.t_grid, covs)]
    return tables, en


# ---------------------------------------------------------------- sweep


_SWEEP_COLUMNS = ("index", "value", "coherence_re", "coherence_im", "t_eff_plus", "t_eff_minus",
                  "decay_plus", "decay_minus", "log_negativity", "error")


def _sweep_point(args):
    index, value, raw, key = args
    raw = dict(raw)
    raw[key] = repr(float(value))
    nan = float("nan")
    try:
        cfg = build_config(raw)
        b1, b2 = cfg.baths
        check_stable(laplace_matrix(cfg.basis, b1, b2))
        basis = cfg.basis
        if cfg.regime in (Regime.STRONG_DELTA0, Regime.ONE_BATH):
            coh = stationary_strong(basis, cfg.baths, 0.0)[2].values
        elif cfg.regime is Regime.WEAK:
            coh = stationary_weak(basis, cfg.baths, 0.0)[2].values
        else:
            coh = stationary_numeric(basis, cfg.baths, 0.0, "q", (0, 1))
        coh = complex(np.atleast_1d(coh)[0])
        tp, tm = effective_temperatures(cfg.psi, b1.temperature, b2.temperature)
        if cfg.delta != 0.0:
            _, (gp, gm) = weak_rates(cfg.w, cfg.delta, cfg.psi, b1.gamma, b2.gamma)
        else:
            gp, gm = b1.gamma, b2.gamma
        slow = slow_damping_rate(cfg.w, cfg.delta, cfg.psi, b1.gamma, b2.gamma)
        decay = (max(gp, gm), slow) if cfg.delta != 0.0 else (max(gp, gm) / 2, min(gp, gm) / 2)
        en = nan
        if cfg.oracle is not None:
            H, s0 = _oracle_setup(cfg)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                cov = system_covariances(s0, H, [cfg.t_grid[-1]])[0]
            en = log_negativity(cov)
        return (index, value, coh.real, coh.imag, tp, tm, decay[0], decay[1], en, "")
    except (DuetError, ValueError, ArithmeticError) as exc:
        msg = f"{type(exc).__name__}: {exc}".replace("\n", " ")
        return (index, value, nan, nan, nan, nan, nan, nan, nan, msg)


def sweep_values(raw: dict) -> tuple[str, np.ndarray]:
    merged = dict(_DEFAULTS)
    merged.update(raw)
    key = merged.get("sweep.param")
    if not key:
        raise ConfigError("sweep needs sweep.param")
    if key not in _KEYS or key.startswith("sweep.") or key in ("regime", "outputs"):
        raise ConfigError(f"sweep.param: cannot sweep {key!r}")
    if "sweep.values" in merged:
        try:
            vals = np.array([float(v) for v in merged["sweep.values"].split(",") if v.strip()])
        except ValueError:
            raise ConfigError("sweep.values: comma-separated numbers expected") from None
    else:
        vals = np.linspace(_float(merged, "sweep.start"), _float(merged, "sweep.stop"), _int(merged, "sweep.n"))
    if vals.size == 0:
        raise ConfigError("sweep has no points")
    return key, vals


def run_sweep(raw: dict, workers: int = 1) -> list[tuple]:
    """Evaluate every sweep point; rows come back in sweep order."""
    key, vals = sweep_values(raw)
    build_config(raw)  # validate the base point
    jobs = [(i, float(v), raw, key) for i, v in enumerate(vals)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            rows = list(ex.map(_sweep_point, jobs))
    else:
        rows = [_sweep_point(j) for j in jobs]
    return sorted(rows, key=lambda r: r[0])


# ---------------------------------------------------------------- output


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


def write_csv(path: Path, header, rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(x) for x in r])
    path.write_text(buf.getvalue())


def _table_rows(rows):
    return [(t, v.real, v.imag, src) for t, v, src in rows]


def _safe(kind: str) -> str:
    return kind.replace("+", "p").replace("-", "m")


def write_manifest(path: Path, cfg: RunConfig | None, command: str, files, extra=None) -> None:
    lines = [f"command = {command}", f"version = {__version__}"]
    if cfg is not None:
        b1, b2 = cfg.baths
        lines += [
            f"regime.requested = {cfg.regime_requested}",
            f"regime.resolved = {cfg.regime.value}",
            f"system.w = {_fmt(cfg.w)}",
            f"system.delta = {_fmt(cfg.delta)}",
            f"system.psi = {_fmt(cfg.psi)}",
        ]
        for j, b in ((1, b1), (2, b2)):
            lines += [
                f"bath{j}.gamma = {_fmt(b.gamma)}",
                f"bath{j}.lambda = {_fmt(b.lambda_cut)}",
                f"bath{j}.temperature = {_fmt(b.temperature)}",
                f"bath{j}.cutoff = {b.cutoff_family.value}",
                f"bath{j}.strict_ohmic = {str(b.strict_ohmic).lower()}",
            ]
        lines.append(f"tol = {_fmt(cfg.tol)}")
    for k, v in sorted((extra or {}).items()):
        lines.append(f"{k} = {v if isinstance(v, str) else _fmt(v)}")
    lines.append("files = " + ", ".join(sorted(files)))
    path.write_text("\n".join(lines) + "\n")


_PLOT_TEMPLATE = '''"""Plot the CSV tables written next to this script (requires matplotlib)."""
import csv
import os

import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(__file__))
FILES = {files!r}
XLABEL = {xlabel!r}

fig, ax = plt.subplots()
for name in FILES:
    series = {{}}
    with open(os.path.join(HERE, name)) as fh:
        for row in csv.DictReader(fh):
            series.setdefault(row.get("source", ""), []).append((float(row[XLABEL]), float(row["re"])))
    for src, pts in series.items():
        xs, ys = zip(*pts)
        ax.plot(xs, ys, label=f"{{name}} {{src}}".strip())
ax.set_xlabel(XLABEL)
ax.set_ylabel("Re")
ax.legend(fontsize="small")
fig.savefig(os.path.join(HERE, "plot.png"), dpi=150)
'''


def write_plot_script(path: Path, files, xlabel: str) -> None:
    path.write_text(_PLOT_TEMPLATE.format(files=sorted(files), xlabel=xlabel))


def _emit(out: Path, tables: dict, xlabel: str, prefix: str, scale: float = 1.0) -> list[str]:
    files = []
    for kind, rows in tables.items():
        name = f"{prefix}_{_safe(kind)}.csv"
        data = [(t * scale, v.real * scale, v.imag * scale, s) for t, v, s in rows] if scale != 1.0 \
            else _table_rows(rows)
        write_csv(out / name, (xlabel, "re", "im", "source"), data)
        files.append(name)
    return files


# ---------------------------------------------------------------- presets


FIG_PRESETS = {
    "fig1": [
        {"system.w": "1", "system.delta": "0", "system.psi": repr(math.pi / 4), "bath1.gamma": "0.1",
         "bath2.gamma": g, "grid.t_min": "0", "grid.t_max": "1000", "grid.n_points": "4001", "regime": "auto"}
        for g in ("0.01", "0.03")
    ],
    "fig2": [
        {"system.w": "1", "system.delta": "0", "system.psi": repr(math.pi / 4), "bath1.gamma": "0.1",
         "bath2.gamma": "0", "grid.t_min": "0", "grid.t_max": "200", "grid.n_points": "2001", "regime": "auto"}
    ],
    "fig3": [
        {"system.w": "1", "system.delta": "0.25", "system.psi": repr(math.pi / 4), "bath1.gamma": "0.05",
         "bath2.gamma": "0.005", "grid.t_min": "0", "grid.t_max": "300", "grid.n_points": "3001",
         # max(gamma)/|Delta| = 0.2 sits on the Auto boundary; the preset is the weak-coupling curve
         "regime": "weak"}
    ],
}


def preset_configs(name: str, overrides=()) -> list[RunConfig]:
    out = []
    for base in FIG_PRESETS[name]:
        raw = dict(base)
        raw["outputs"] = "q+-"
        for item in overrides:
            k, v = _parse_override(item)
            raw[k] = v
        out.append(build_config(raw))
    return out


# ---------------------------------------------------------------- entry point


def _default_out() -> str:
    return os.environ.get("DUET_BATHS_OUT", "duet_baths_out")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="duet-baths", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"duet-baths {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in (
        ("evolve", "initial-condition (+ noise) coherence on the t grid"),
        ("stationary", "stationary two-time correlators on the tau grid"),
        ("sweep", "summary statistics along one swept parameter"),
        ("oracle", "finite-bath Gaussian simulation on the t grid"),
        ("fig1", "strong coupling, two baths, Delta = 0"),
        ("fig2", "one bath, Delta = 0"),
        ("fig3", "weak coupling with detuning"),
    ):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", metavar="PATH")
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a config key")
        sp.add_argument("--out", metavar="DIR", default=None)
        sp.add_argument("--workers", type=int, default=1)
        sp.add_argument("--tol", type=float, default=None)
        sp.add_argument("--tau-min-lambda", action="store_true",
                        help="evaluate strict Ohmic momentum correlators at |tau| >= 1/Lambda")
        sp.add_argument("--no-noise", action="store_true", help="evolve: skip the finite-time noise part")
    return p


def _dispatch(args) -> None:
    out = Path(args.out or _default_out())
    out.mkdir(parents=True, exist_ok=True)
    overrides = list(args.set)
    if args.tol is not None:
        overrides.append(f"tol={args.tol!r}")
    if args.workers < 1:
        raise ConfigError("--workers must be >= 1")

    if args.command in FIG_PRESETS:
        files = []
        extra = {}
        cfgs = preset_configs(args.command, overrides)
        for cfg in cfgs:
            tables = evolve_tables(cfg, with_noise=False)
            tag = f"{args.command}_gamma2_{cfg.baths[1].gamma:g}"
            # reported as W t and W <q_+ q_->
            rows = [(t * cfg.w, v * cfg.w, s) for t, v, s in tables["q+-"]]
            write_csv(out / f"{tag}.csv", ("Wt", "re", "im", "source"), _table_rows(rows))
            files.append(f"{tag}.csv")
            extra[f"{tag}.regime"] = cfg.regime.value
        write_plot_script(out / "plot.py", files, "Wt")
        write_manifest(out / "manifest.txt", cfgs[0], args.command, files + ["plot.py"], extra)
        return

    if args.command == "sweep":
        raw = parse_config_text(Path(args.config).read_text(), args.config) if args.config else {}
        for item in overrides:
            k, v = _parse_override(item)
            raw[k] = v
        rows = run_sweep(raw, args.workers)
        write_csv(out / "sweep.csv", _SWEEP_COLUMNS, rows)
        cfg = build_config(raw)
        key, _ = sweep_values(raw)
        write_plot_script(out / "plot.py", [], "value")
        write_manifest(out / "manifest.txt", cfg, "sweep", ["sweep.csv", "plot.py"],
                       {"sweep.param": key, "sweep.points": str(len(rows)),
                        "sweep.failures": str(sum(1 for r in rows if r[-1]))})
        return

    cfg = load_config(args.config, overrides)
    if args.command == "evolve":
        tables = evolve_tables(cfg, with_noise=not args.no_noise)
        files = _emit(out, tables, "t", "evolve")
    elif args.command == "stationary":
        tables = stationary_tables(cfg, args.tau_min_lambda)
        files = _emit(out, tables, "tau", "stationary")
    else:
        tables, en = oracle_tables(cfg)
        files = _emit(out, tables, "t", "oracle")
        write_csv(out / "oracle_log_negativity.csv", ("t", "re", "im", "source"), _table_rows(en))
        files.append("oracle_log_negativity.csv")
    write_plot_script(out / "plot.py", files, "tau" if args.command == "stationary" else "t")
    write_manifest(out / "manifest.txt", cfg, args.command, files + ["plot.py"])


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_CONFIG
    try:
        _dispatch(args)
    except (ConfigError, DomainError) as exc:
        print(f"duet-baths: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InstabilityError as exc:
        print(f"duet-baths: unstable parameters (stability scan): {exc}", file=sys.stderr)
        return EXIT_INSTABILITY
    except NumericalError as exc:
        print(f"duet-baths: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"duet-baths: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
