"""Batch experiment harness.

Exit codes: 0 success, 2 usage error, 3 I/O error, 4 numerical failure.
"""
import argparse
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace
import io
import math
import os
import sys
import tempfile

import numpy as np
import yaml

from . import analytic, montecarlo, optimizer, prevalence
from .analytic import SystemConfig
from .errors import BracketError, ConvergenceError, DomainError

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_NUMERIC = 0, 2, 3, 4

MODES = ("analytic", "simulate", "compare", "optimal-l", "prevalence", "sweep")
AXES = ("L", "snr_m_db", "snr_e_db")
METRIC_CHOICES = ("ergodic", "outage", "eps_outage", "nzs")
DEFAULTS = {"trials": 10_000, "seed": 42, "step": 1.0, "metric": "ergodic", "grid_step": 0.25}

# flag name -> (spec field, type)
FLAGS = {
    "M": ("M", int), "L": ("L", int), "Nr": ("N_r", int), "Ne": ("N_e", int),
    "snr-m-db": ("snr_m_db", float), "snr-e-db": ("snr_e_db", float),
    "metric": ("metric", str), "R-o": ("R_o", float), "eps": ("eps", float),
    "trials": ("trials", int), "seed": ("seed", int), "axis": ("axis", str),
    "start": ("start", float), "stop": ("stop", float), "step": ("step", float),
    "out": ("out", str), "grid-step": ("grid_step", float), "backend": ("backend", str),
}


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class ExperimentSpec:
    mode: str
    M: int = None
    L: int = None
    N_r: int = None
    N_e: int = None
    snr_m_db: float = None
    snr_e_db: float = None
    metric: str = "ergodic"
    R_o: float = None
    eps: float = None
    trials: int = 10_000
    seed: int = 42
    axis: str = None
    start: float = None
    stop: float = None
    step: float = 1.0
    out: str = None
    grid_step: float = 0.25
    backend: str = None

    @property
    def rho_m(self):
        return db_to_linear(self.snr_m_db)

    @property
    def rho_e(self):
        return db_to_linear(self.snr_e_db)

    def axis_values(self):
        if self.axis is None:
            return [None]
        n = int(math.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        values = [self.start + i * self.step for i in range(n)]
        if self.axis == "L":
            return [int(round(v)) for v in values]
        return values

    def at(self, value):
        """Copy of this experiment with the swept quantity set to ``value``."""
        if value is None:
            return self
        field = {"L": "L", "snr_m_db": "snr_m_db", "snr_e_db": "snr_e_db"}[self.axis]
        return replace(self, **{field: value})

    def system_config(self):
        return SystemConfig(self.M, self.L, self.N_r, self.N_e, self.rho_m, self.rho_e)


def db_to_linear(db):
    return 10.0 ** (db / 10.0)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="mimome-tas",
        description="Secrecy metrics of MIMO wiretap channels under transmit antenna selection.")
    parser.add_argument("mode", choices=MODES)
    for flag, (dest, typ) in FLAGS.items():
        kwargs = {"dest": dest, "type": typ, "default": None}
        if flag == "metric":
            kwargs["choices"] = METRIC_CHOICES
        elif flag == "axis":
            kwargs["choices"] = AXES
        elif flag == "backend":
            kwargs["choices"] = ("numba", "numpy")
        parser.add_argument(f"--{flag}", **kwargs)
    parser.add_argument("--config", default=None,
                        help="YAML file with flat key: value pairs named like the flags")
    return parser


def _load_config(path):
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh) or {}
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise UsageError(f"malformed config file {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError(f"config file {path} must hold a flat mapping")
    values = {}
    lookup = {k.lower(): v for k, v in FLAGS.items()}
    lookup.update({k.lower().replace("-", "_"): v for k, v in FLAGS.items()})
    for key, raw in data.items():
        entry = lookup.get(str(key).lower())
        if entry is None:
            raise UsageError(f"unknown config key {key!r}")
        dest, typ = entry
        try:
            values[dest] = typ(raw)
        except (TypeError, ValueError) as exc:
            raise UsageError(f"config key {key!r}: {exc}") from exc
    return values


def parse_spec(argv=None):
    """Flags override config-file values, which override defaults."""
    ns = build_parser().parse_args(argv)
    merged = dict(DEFAULTS)
    if ns.config:
        merged.update(_load_config(ns.config))
    for dest, _ in FLAGS.values():
        value = getattr(ns, dest)
        if value is not None:
            merged[dest] = value
    spec = ExperimentSpec(mode=ns.mode, **merged)
    _validate(spec)
    return spec


def _validate(spec):
    missing = [flag for flag, dest in (("--M", "M"), ("--Nr", "N_r"), ("--Ne", "N_e"),
                                       ("--snr-m-db", "snr_m_db"), ("--snr-e-db", "snr_e_db"))
               if getattr(spec, dest) is None]
    if spec.mode == "sweep" and spec.axis is None:
        missing.append("--axis")
    if spec.axis is not None:
        missing += [f for f, d in (("--start", "start"), ("--stop", "stop"))
                    if getattr(spec, d) is None]
    needs_L = spec.mode in ("analytic", "simulate", "compare", "sweep") and spec.axis != "L"
    if needs_L and spec.L is None:
        missing.append("--L")
    if spec.metric == "outage" and spec.R_o is None:
        missing.append("--R-o (required by --metric outage)")
    if spec.metric == "eps_outage" and spec.eps is None:
        missing.append("--eps (required by --metric eps_outage)")
    if missing:
        raise UsageError("missing required: " + ", ".join(missing))

    for name in ("M", "N_r", "N_e"):
        if getattr(spec, name) < 1:
            raise UsageError(f"{name} must be positive")
    if spec.L is not None and not 1 <= spec.L <= spec.M:
        raise UsageError(f"L={spec.L} must lie in [1, M={spec.M}]")
    if spec.axis is not None:
        if spec.step <= 0 or spec.stop < spec.start:
            raise UsageError("sweep needs step > 0 and stop >= start")
        if spec.axis == "L" and not (1 <= spec.start and spec.stop <= spec.M):
            raise UsageError(f"L sweep must stay within [1, M={spec.M}]")
    if spec.R_o is not None and spec.R_o < 0:
        raise UsageError("--R-o must be non-negative")
    if spec.eps is not None and not 0 < spec.eps < 1:
        raise UsageError("--eps must lie in (0, 1)")
    if spec.trials < 100:
        raise UsageError("--trials must be at least 100")
    if not 0 < spec.grid_step <= 1:
        raise UsageError("--grid-step must lie in (0, 1]")
    if spec.mode == "optimal-l" and spec.metric not in ("ergodic", "eps_outage"):
        raise UsageError("optimal-l supports --metric ergodic or eps_outage")


def worker_count():
    raw = os.environ.get("MIMOME_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return os.cpu_count() or 1


def fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.12g}"


def _analytic_columns(spec, cfg):
    dist = analytic.secrecy_distribution(cfg)
    value = analytic.evaluate_metric(dist, spec.metric, R_o=spec.R_o, eps=spec.eps)
    return {"eta": dist.eta, "sigma": dist.sigma, "analytic": value}


def _mc_columns(spec, cfg, workers):
    if spec.metric == "eps_outage":
        batch = montecarlo.simulate_trials(cfg, spec.trials, spec.seed,
                                           backend=spec.backend, workers=workers)
        est = montecarlo.empirical_epsilon_outage(batch.R_s, spec.eps)
    else:
        est = montecarlo.estimate_metric(cfg, spec.metric, spec.trials, spec.seed,
                                         threshold=spec.R_o, backend=spec.backend,
                                         workers=workers)
    return {"mc_mean": est.mean, "mc_std_error": est.std_error, "mc_trials": est.n_trials}


def _row(spec, point, inner_workers):
    cfg = point.system_config()
    row = {}
    if spec.axis is not None:
        row[spec.axis] = getattr(point, spec.axis)
    for name, value in (("M", point.M), ("L", point.L), ("Nr", point.N_r), ("Ne", point.N_e),
                        ("snr_m_db", point.snr_m_db), ("snr_e_db", point.snr_e_db)):
        if name != spec.axis:
            row[name] = value
    if spec.mode in ("analytic", "sweep", "compare"):
        row.update(_analytic_columns(point, cfg))
    if spec.mode in ("simulate", "compare"):
        row.update(_mc_columns(point, cfg, inner_workers))
    row["beta_e"] = cfg.beta_e
    row["regime_warn"] = cfg.regime_warning
    return row


def table_rows(spec):
    """Rows (dicts) for the tabular modes, in sweep-axis order."""
    points = [spec.at(v) for v in spec.axis_values()]
    workers = worker_count()
    if len(points) == 1:
        return [_row(spec, points[0], workers)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda p: _row(spec, p, 1), points))


def render_csv(rows):
    buf = io.StringIO()
    header = list(rows[0])
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(fmt(row[h]) for h in header) + "\n")
    return buf.getvalue()


def write_atomic(path, text):
    """Write via a temporary file in the target directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".csv")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(spec, text, stdout):
    if spec.out:
        write_atomic(spec.out, text)
    else:
        stdout.write(text)


def _run_optimal(spec, stdout):
    M, Nr, Ne, rm, re_ = spec.M, spec.N_r, spec.N_e, spec.rho_m, spec.rho_e
    results = [optimizer.optimal_L_exhaustive(M, Nr, Ne, rm, re_, spec.metric, spec.eps)]
    if spec.metric == "ergodic" and Nr == 1 and rm > 0 and re_ > 0:
        if Ne == 1:
            results.append(optimizer.optimal_L_example1(rm, re_, M))
        else:
            results.append(optimizer.optimal_L_example2(rm, re_, Ne, M))
    if spec.metric == "eps_outage" and Nr == Ne == 1 and rm == re_ and rm > 0:
        results.append(optimizer.optimal_L_example3(rm, M, spec.eps))
    lines = [f"method={r.method} ell_star={fmt(r.ell_star)} L_star={r.L_star} "
             f"metric_value={fmt(r.metric_value)} metric={r.metric_kind} "
             f"saturated={int(r.saturated)}" for r in results]
    stdout.write("\n".join(lines) + "\n")
    if spec.out:
        rows = [{"method": r.method, "ell_star": r.ell_star, "L_star": r.L_star,
                 "metric_value": r.metric_value} for r in results]
        write_atomic(spec.out, render_csv(rows))


def _run_prevalence(spec, stdout):
    T = prevalence.PrevalenceTuple(spec.rho_m, spec.rho_e, spec.N_r, spec.N_e)
    report = prevalence.receiver_prevailing(T, spec.M, spec.grid_step)
    for key, value in asdict(report).items():
        if key == "boundary_points":
            value = ";".join(fmt(b) for b in value)
        else:
            value = fmt(value)
        stdout.write(f"{key}={value}\n")
    if spec.N_e == 1:
        threshold = prevalence.single_antenna_eavesdropper_threshold(spec.M)
        stdout.write(f"single_antenna_threshold_Nr={threshold}\n")
    if spec.out:
        rows = []
        for ell in prevalence.prevalence_grid(spec.M, spec.grid_step):
            t = prevalence.fixed_point_terms(ell, T, spec.M)
            rows.append({"ell": ell, "f": t.value, "F": t.F, "f_R": t.f_R, "f_E": t.f_E,
                         "boundary": t.at_boundary})
        write_atomic(spec.out, render_csv(rows))


def run(spec, stdout=None):
    stdout = stdout or sys.stdout
    if spec.mode == "optimal-l":
        _run_optimal(spec, stdout)
    elif spec.mode == "prevalence":
        _run_prevalence(spec, stdout)
    else:
        _emit(spec, render_csv(table_rows(spec)), stdout)
    return EXIT_OK


def main(argv=None):
    try:
        spec = parse_spec(argv)
    except UsageError as exc:
        print(f"mimome-tas: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return run(spec)
    except OSError as exc:
        print(f"mimome-tas: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ConvergenceError, BracketError, ArithmeticError) as exc:
        print(f"mimome-tas: numerical failure: {exc}", file=sys.stderr)
        print("parameters: " + " ".join(f"{k}={v}" for k, v in asdict(spec).items()
                                        if v is not None), file=sys.stderr)
        return EXIT_NUMERIC
    except DomainError as exc:
        print(f"mimome-tas: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
