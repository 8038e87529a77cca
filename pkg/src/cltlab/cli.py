"""Batch experiment runner: configs in, CSV tables and SVG plots out.

Subcommands: run (execute an experiment config), plot (render a CSV),
list-models (catalog), selftest (closed-form identity suites).
"""

from __future__ import annotations

import argparse
import configparser
import csv
import hashlib
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .numerics import QuadratureSpec, RngStream, gauss_cdf
from . import dist_zoo
from .mc_oracle import pooled_sums
from .edgeworth import BoundConstants, charfn_sup, edgeworth_cdf, nonuniform_bound
from . import relu_delta
from . import ridge_repr
from . import normball
from . import norm_moments

OUTPUT_DIR_ENV = "CLTLAB_OUTPUT_DIR"

EXPERIMENTS = (
    "edgeworth_sweep",
    "relu_delta_sweep",
    "zeta2",
    "ridge_reconstruct",
    "ridge_delta_bound",
    "normball_bound",
    "norm_gap",
    "appendix_identities",
)

PLOT_KINDS = ("convergence_loglog", "t_profile", "bound_vs_mc")

MC_EXPERIMENTS = {"edgeworth_sweep", "relu_delta_sweep", "zeta2", "norm_gap"}


class ConfigError(ValueError):
    """Bad configuration or unknown experiment/model (exit code 2)."""


class RunError(RuntimeError):
    """Computation failed mid-run (exit code 3)."""


@dataclass
class ExperimentConfig:
    experiment: str
    model: str
    n_values: list
    t_grid: list
    x_grid: list
    reps: int
    seed: int
    constants: BoundConstants
    output_dir: Path
    h_grid: list = field(default_factory=lambda: [1.0])

    @classmethod
    def load(cls, path: str) -> "ExperimentConfig":
        parser = configparser.ConfigParser()
        read = parser.read(path)
        if not read:
            raise ConfigError(f"config file not found: {path}")
        if "experiment" not in parser:
            raise ConfigError("config must have an [experiment] section")
        sec = parser["experiment"]
        experiment = sec.get("kind", "").strip()
        if experiment not in EXPERIMENTS:
            raise ConfigError(
                f"unknown experiment {experiment!r}; choose from {', '.join(EXPERIMENTS)}")
        model = sec.get("model", "gauss").strip()

        def floats(key, default=""):
            raw = sec.get(key, default).replace(",", " ").split()
            return [float(v) for v in raw]

        n_values = [int(v) for v in floats("n_values", "")]
        if n_values and n_values != sorted(n_values):
            raise ConfigError("n_values must be ascending")
        t_grid = floats("t_grid", "")
        x_grid = floats("x_grid", "")
        h_grid = floats("h_grid", "1.0")
        reps = int(sec.get("reps", "100000"))
        if experiment in MC_EXPERIMENTS and reps < 10_000:
            raise ConfigError("reps must be at least 10^4 for MC experiments")
        seed = int(sec.get("seed", "0"))
        constants = BoundConstants(C=float(sec.get("C", "1.0")),
                                   c=float(sec.get("c", "0.5")))
        out = sec.get("output_dir", "").strip() or os.environ.get(
            OUTPUT_DIR_ENV, "") or "."
        return cls(experiment=experiment, model=model, n_values=n_values,
                   t_grid=t_grid, x_grid=x_grid, reps=reps, seed=seed,
                   constants=constants, output_dir=Path(out), h_grid=h_grid)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return "%.12g" % float(v)


def _write_csv(path: Path, header: list, rows: list) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([c if isinstance(c, str) else _fmt(c) for c in row])


# ---------------------------------------------------------------------------
# experiment bodies: each returns (header, rows)

def _exp_edgeworth_sweep(cfg: ExperimentConfig):
    model = dist_zoo.get_model(cfg.model)
    cs = charfn_sup(model)
    xs = cfg.x_grid or [-3, -2, -1, 0, 1, 2, 3]
    rows = []
    for n in cfg.n_values or [100]:
        w = np.sort(pooled_sums(model, n, cfg.reps, RngStream(cfg.seed, n)))
        for x in xs:
            p = float(np.searchsorted(w, x, side="right")) / cfg.reps
            se = math.sqrt(max(p * (1 - p), 1e-300) / cfg.reps)
            pred = edgeworth_cdf(model.moments, n, x)
            b = nonuniform_bound(model, n, x, cfg.constants, char_sup=cs)
            rows.append([n, x, p, se, pred, b.value, b.vacuous])
    return ["n", "x", "mc", "se", "prediction", "bound", "vacuous"], rows


def _exp_relu_delta_sweep(cfg: ExperimentConfig):
    model = dist_zoo.get_model(cfg.model)
    cs = charfn_sup(model)
    ts = cfg.t_grid or [0.0, 0.5, 1.0, 2.0]
    rows = []
    for n in cfg.n_values or [100]:
        ests = relu_delta.delta_relu_profile(model, n, ts, cfg.reps,
                                             RngStream(cfg.seed, n))
        for t, est in zip(ts, ests):
            pred = relu_delta.edgeworth_relu_prediction(model.moments, n, t)
            b = relu_delta.relu_pointwise_bound(model, n, t, cfg.constants,
                                                char_sup=cs)
            rows.append([n, t, est.delta, est.se, pred, b.value, b.vacuous])
    return ["n", "t", "mc", "se", "prediction", "bound", "vacuous"], rows


def _exp_zeta2(cfg: ExperimentConfig):
    model = dist_zoo.get_model(cfg.model)
    cs = charfn_sup(model)
    rows = []
    for n in cfg.n_values or [100, 400]:
        mc, se = relu_delta.zeta2_mc(model, n, cfg.reps, RngStream(cfg.seed, n))
        pred, b = relu_delta.zeta2_bound(model, n, cfg.constants, char_sup=cs)
        rows.append([n, mc, se, pred, b.value, b.vacuous])
    return ["n", "mc", "se", "prediction", "bound", "vacuous"], rows


def _ridge_test_function(d: int):
    return ridge_repr.gaussian_fourier_function(d)


def _exp_ridge_reconstruct(cfg: ExperimentConfig):
    pts = cfg.x_grid or list(np.linspace(-3, 3, 13))
    d = 2 if cfg.model.strip().endswith("d=2") else 1
    fm = _ridge_test_function(d)
    act = ridge_repr.ActivationModel(
        h=lambda t: np.exp(-0.5 * np.asarray(t) ** 2),
        h_fourier=lambda a: complex(math.exp(-0.5 * a * a) / math.sqrt(2 * math.pi)),
        a=1.0, c_h=0.0, u_radius=12.0)
    rows = []
    for v in pts:
        x = np.full(d, float(v) / math.sqrt(d))
        ref = float(np.asarray(fm.f(x[None, :]))[0])
        rec = ridge_repr.reconstruct_ridge(fm, x)
        rec_act = ridge_repr.reconstruct_activation(fm, act, x)
        rows.append([v, ref, rec, rec_act,
                     max(abs(rec - ref), abs(rec_act - ref))])
    return ["x", "reference", "ridge", "activation", "abs_err"], rows


def _exp_ridge_delta_bound(cfg: ExperimentConfig):
    mv = dist_zoo.get_multivariate_model(cfg.model)
    fm = _ridge_test_function(mv.dimension)
    sups = {}

    def cb(model, n, t):
        if model.name not in sups:
            sups[model.name] = charfn_sup(model)
        return relu_delta.relu_pointwise_bound(model, n, t, cfg.constants,
                                               char_sup=sups[model.name])

    rows = []
    for n in cfg.n_values or [100]:
        b = ridge_repr.delta_bound_ridge(fm, cb, mv, n,
                                         rng=RngStream(cfg.seed, 313),
                                         n_omega=16)
        rows.append([n, b.value, b.vacuous])
    return ["n", "bound", "vacuous"], rows


def _exp_normball_bound(cfg: ExperimentConfig):
    mv = dist_zoo.get_multivariate_model(cfg.model)
    d = mv.dimension

    def f(y):
        y = np.atleast_2d(np.asarray(y, dtype=float))
        return np.exp(-0.5 * np.sum(y * y, axis=-1))

    probes = normball._default_probe_grid(d)
    rows = []
    for n in cfg.n_values or [10_000]:
        for h in cfg.h_grid:
            bias = normball.sup_approx_error(f, normball.MollifierSpec(h), probes)
            bound = normball.normball_delta_bound(
                f, mv, h, n, cfg.constants, rng=RngStream(cfg.seed, 777))
            rows.append([n, h, bias, bound, 2 * bias + bound])
    return ["n", "h", "sup_bias", "bound", "total"], rows


def _exp_norm_gap(cfg: ExperimentConfig):
    mv = dist_zoo.get_multivariate_model(cfg.model)
    rows = []
    for n in cfg.n_values or [50, 200, 800]:
        est = norm_moments.expected_norm_gap(mv, n, cfg.reps,
                                             RngStream(cfg.seed, n))
        b = norm_moments.norm_gap_bound(mv, n, cfg.constants,
                                        rng=RngStream(cfg.seed, 505))
        rows.append([n, est.delta, est.se, b.value, b.vacuous])
    return ["n", "mc", "se", "bound", "vacuous"], rows


def _exp_appendix_identities(cfg: ExperimentConfig):
    ts = cfg.t_grid or [-5, -2, -1, 0, 1, 2, 5]
    rows = []
    for t in ts:
        hermite_q, kappa_q = relu_delta.appendix_e_integrals(float(t))
        from .numerics import gauss_pdf
        hermite_cf = -t * gauss_pdf(float(t))
        kappa_cf = relu_delta.kappa(float(t))
        rows.append(["hermite_tail", t, hermite_cf, hermite_q,
                     abs(hermite_q - hermite_cf)])
        rows.append(["kappa_tail", t, kappa_cf, kappa_q,
                     abs(kappa_q - kappa_cf)])
    return ["identity", "t", "closed_form", "quadrature", "abs_err"], rows


_BODIES = {
    "edgeworth_sweep": _exp_edgeworth_sweep,
    "relu_delta_sweep": _exp_relu_delta_sweep,
    "zeta2": _exp_zeta2,
    "ridge_reconstruct": _exp_ridge_reconstruct,
    "ridge_delta_bound": _exp_ridge_delta_bound,
    "normball_bound": _exp_normball_bound,
    "norm_gap": _exp_norm_gap,
    "appendix_identities": _exp_appendix_identities,
}


def run(config_path: str) -> int:
    cfg = ExperimentConfig.load(config_path)
    t0 = time.time()
    try:
        header, rows = _BODIES[cfg.experiment](cfg)
    except ConfigError:
        raise
    except KeyError as exc:
        # model lookup failures are configuration errors
        raise ConfigError(str(exc).strip('"')) from exc
    except Exception as exc:
        raise RunError(str(exc)) from exc

    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    csv_path = cfg.output_dir / f"{cfg.experiment}.csv"
    _write_csv(csv_path, header, rows)
    digest = hashlib.sha256(Path(config_path).read_bytes()).hexdigest()
    manifest = {
        "experiment": cfg.experiment,
        "config_sha256": digest,
        "cltlab_version": __version__,
        "numpy_version": np.__version__,
        "wall_time_s": round(time.time() - t0, 3),
        "outputs": [csv_path.name],
    }
    with open(cfg.output_dir / f"{cfg.experiment}.manifest.json", "w",
              encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
    print(f"wrote {csv_path}")
    return 0


# ---------------------------------------------------------------------------
# plotting: hand-rolled SVG, verification aid only

_W, _H, _M = 640, 440, 60


def _svg_open(title: str) -> list:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W//2}" y="24" text-anchor="middle" font-size="15">{title}</text>',
        f'<rect x="{_M}" y="{_M}" width="{_W-2*_M}" height="{_H-2*_M}" '
        'fill="none" stroke="black"/>',
    ]


def _scale(vals, lo_px, hi_px, log=False):
    v = np.asarray(vals, dtype=float)
    if log:
        v = np.log10(np.clip(v, 1e-300, None))
    vmin, vmax = float(v.min()), float(v.max())
    if vmax - vmin < 1e-15:
        vmin, vmax = vmin - 1.0, vmax + 1.0
    return lambda u: lo_px + (
        (math.log10(max(u, 1e-300)) if log else u) - vmin) / (vmax - vmin) * (hi_px - lo_px)


def _polyline(xs, ys, sx, sy, color):
    pts = " ".join(f"{sx(x):.1f},{sy(y):.1f}" for x, y in zip(xs, ys))
    return f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>'


def _read_csv(path: str):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            rows = list(reader)
        except csv.Error as exc:
            raise ConfigError(f"malformed CSV: {exc}") from exc
    if not rows:
        raise ConfigError("malformed CSV: no header row")
    header, data = rows[0], rows[1:]
    cols = {name: [] for name in header}
    for row in data:
        if len(row) != len(header):
            raise ConfigError("malformed CSV: ragged row")
        for name, cell in zip(header, row):
            cols[name].append(cell)
    return header, cols


def _numeric(cols, name):
    out = []
    for cell in cols.get(name, []):
        try:
            out.append(float(cell))
        except ValueError:
            out.append(math.nan)
    return np.asarray(out)


def plot(csv_path: str, kind: str) -> int:
    if kind not in PLOT_KINDS:
        raise ConfigError(f"unknown plot kind {kind!r}")
    header, cols = _read_csv(csv_path)
    required = {"convergence_loglog": ("n", "mc"),
                "t_profile": ("t", "mc", "prediction"),
                "bound_vs_mc": ("n", "mc", "bound")}[kind]
    missing = [c for c in required if c not in header]
    if missing:
        raise ConfigError(f"malformed CSV: missing columns {missing}")
    out_path = Path(csv_path).with_suffix(f".{kind}.svg")
    parts = _svg_open(f"{Path(csv_path).stem}: {kind}")

    if kind == "convergence_loglog":
        n = _numeric(cols, "n")
        mc = _numeric(cols, "mc")
        pred = _numeric(cols, "prediction") if "prediction" in cols else np.full_like(mc, np.nan)
        resid = np.where(np.isnan(pred), np.abs(mc), np.abs(mc - pred))
        mask = np.isfinite(n) & np.isfinite(resid) & (resid > 0)
        n, resid = n[mask], resid[mask]
        if len(n) >= 2:
            uniq = sorted(set(n))
            ys = [float(np.mean(resid[n == u])) for u in uniq]
            sx = _scale(uniq, _M, _W - _M, log=True)
            sy = _scale(ys, _H - _M, _M, log=True)
            parts.append(_polyline(uniq, ys, sx, sy, "steelblue"))
            slope = float(np.polyfit(np.log(uniq), np.log(ys), 1)[0])
            parts.append(f'<text x="{_M+8}" y="{_M+18}" font-size="13">'
                         f'fitted slope = {slope:.3f}</text>')
    elif kind == "t_profile":
        t = _numeric(cols, "t")
        mc = _numeric(cols, "mc")
        pred = _numeric(cols, "prediction")
        mask = np.isfinite(t) & np.isfinite(mc)
        if mask.sum() >= 2:
            order = np.argsort(t[mask])
            tt, mm = t[mask][order], mc[mask][order]
            pp = pred[mask][order]
            sx = _scale(tt, _M, _W - _M)
            lo = min(float(np.nanmin(mm)), float(np.nanmin(pp)))
            hi = max(float(np.nanmax(mm)), float(np.nanmax(pp)))
            sy = _scale([lo, hi], _H - _M, _M)
            parts.append(_polyline(tt, mm, sx, sy, "steelblue"))
            if np.isfinite(pp).all():
                parts.append(_polyline(tt, pp, sx, sy, "firebrick"))
    else:  # bound_vs_mc
        n = _numeric(cols, "n")
        mc = np.abs(_numeric(cols, "mc"))
        bound = _numeric(cols, "bound")
        mask = np.isfinite(n) & np.isfinite(mc) & np.isfinite(bound)
        if mask.sum() >= 2:
            uniq = sorted(set(n[mask]))
            m_ys = [float(np.mean(mc[mask][n[mask] == u])) for u in uniq]
            b_ys = [float(np.mean(bound[mask][n[mask] == u])) for u in uniq]
            sx = _scale(uniq, _M, _W - _M, log=True)
            sy = _scale(m_ys + b_ys, _H - _M, _M, log=True)
            parts.append(_polyline(uniq, m_ys, sx, sy, "steelblue"))
            parts.append(_polyline(uniq, b_ys, sx, sy, "firebrick"))

    parts.append("</svg>")
    out_path.write_text("\n".join(parts), encoding="utf-8")
    print(f"wrote {out_path}")
    return 0


# ---------------------------------------------------------------------------

def selftest() -> int:
    """Closed-form identity suites; prints one line per suite."""
    ok = True
    spec = QuadratureSpec()

    worst = 0.0
    for t in (-5, -2, -1, 0, 1, 2, 5):
        h_q, k_q = relu_delta.appendix_e_integrals(float(t), spec)
        from .numerics import gauss_pdf
        worst = max(worst, abs(h_q + t * gauss_pdf(float(t))),
                    abs(k_q - relu_delta.kappa(float(t))))
    line_ok = worst < 1e-9
    ok &= line_ok
    print(f"tail-integral identities: max err {worst:.2e} "
          f"{'PASS' if line_ok else 'FAIL'}")

    worst = 0.0
    for z in np.linspace(-20, 20, 81):
        z = float(z)
        lhs = ridge_repr.relu_complex_identity(z, spec)
        rhs = complex(math.cos(z) - 1.0, math.sin(z) - z)
        worst = max(worst, abs(lhs - rhs))
        if abs(rhs) > min(2 * abs(z), z * z / 2) + 1e-12:
            worst = math.inf
    line_ok = worst < 1e-9
    ok &= line_ok
    print(f"complex ReLU identity: max err {worst:.2e} "
          f"{'PASS' if line_ok else 'FAIL'}")

    worst = 0.0
    for ny in (0.5, 1.0, 2.0):
        for h in (0.5, 1.0, 2.0):
            i1, i2, i3 = normball.holder_t_integrals(ny, h)
            q = normball.indicator_t_integral(ny, h, spec)
            worst = max(worst, abs(q - i2))
    line_ok = worst < 1e-10
    ok &= line_ok
    print(f"weighted t-integrals: max err {worst:.2e} "
          f"{'PASS' if line_ok else 'FAIL'}")
    return 0 if ok else 1


def list_models() -> int:
    for name in dist_zoo.list_models():
        print(name)
    return 0


def main(argv: Optional[list] = None) -> int:
    parser = argparse.ArgumentParser(prog="cltlab",
                                     description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="execute an experiment config")
    p_run.add_argument("config")
    p_plot = sub.add_parser("plot", help="render a result CSV to SVG")
    p_plot.add_argument("csv")
    p_plot.add_argument("--kind", required=True, choices=PLOT_KINDS)
    sub.add_parser("list-models", help="print the model catalog")
    sub.add_parser("selftest", help="run the closed-form identity suites")
    args = parser.parse_args(argv)

    try:
        if args.command == "run":
            return run(args.config)
        if args.command == "plot":
            return plot(args.csv, args.kind)
        if args.command == "list-models":
            return list_models()
        return selftest()
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except RunError as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
