"""Command-line interface: ``sgcca {gen,fit,project,grid,bench}``.

Every command accepts ``--config FILE`` holding ``key = value`` lines; keys
are flag names (dashes or underscores). Flags given on the command line
override the file. Errors print one line ``error: <code>: <message>`` to
stderr and exit nonzero.
"""
import argparse
import csv
import math
from pathlib import Path
import sys
import time

import numpy as np

from . import data_lab
from .data_lab import (GenSpec, design_preset, generate, load_blocks, reference_sparsity,
                       sensitivity, specificity, write_block_csv)
from .errors import ConfigError, DataFormatError, SGCCAError
from .model import DesignGraph
from .norm_geometry import Variant, project_omega, solve_lm
from .runner import ALGOS, check_algo, fit

FLOAT = "%.9g"


def fmt(x):
    if isinstance(x, (float, np.floating)):
        return FLOAT % x
    if isinstance(x, (list, tuple, np.ndarray)):
        return ",".join(fmt(v) for v in x)
    return str(x)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message.replace("\n", " "))


def read_config(path):
    cfg = {}
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from None
    for i, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{i}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        cfg[key.replace("-", "_")] = value
    return cfg


def resolve(args, defaults):
    """Merge built-in defaults, config file and explicit flags (in that order)."""
    out = dict(defaults)
    if getattr(args, "config", None):
        file_cfg = read_config(args.config)
        unknown = set(file_cfg) - set(defaults)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        out.update(file_cfg)
    for key in defaults:
        val = getattr(args, key, None)
        if val is not None:
            out[key] = val
    return out


def parse_floats(text, what):
    if isinstance(text, (list, tuple)):
        return [float(x) for x in text]
    try:
        return [float(x) for x in str(text).replace(";", ",").split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"{what}: expected comma-separated numbers, got {text!r}") from None


def parse_bool(value):
    if isinstance(value, bool):
        return value
    return str(value).strip().lower() in ("1", "true", "yes", "on")


def split_list(value):
    if isinstance(value, (list, tuple)):
        return list(value)
    return [s for s in str(value).replace(",", " ").split() if s]


def load_design(spec, J):
    if spec is None:
        raise ConfigError("missing --design")
    path = Path(str(spec))
    if path.is_file():
        rows = []
        for line in path.read_text(encoding="utf-8").splitlines():
            line = line.split("#", 1)[0].strip()
            if line:
                rows.append(parse_floats(line.replace(" ", ","), str(path)))
        dg = DesignGraph(rows)
    else:
        dg = design_preset(spec)
    if dg.J != J:
        raise ConfigError(f"design is {dg.J}x{dg.J} but there are {J} blocks")
    return dg


def read_ground_truth(path, dims):
    loadings = [np.zeros(p) for p in dims]
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise DataFormatError(f"{path}: cannot open ({exc.strerror})") from None
    with fh:
        reader = csv.DictReader(fh)
        for row in reader:
            try:
                j, i, w = int(row["block"]) - 1, int(row["index"]) - 1, float(row["loading"])
            except (KeyError, TypeError, ValueError):
                raise DataFormatError(f"{path}:{reader.line_num}: bad ground-truth row") from None
            if not (0 <= j < len(dims) and 0 <= i < dims[j]):
                raise DataFormatError(f"{path}:{reader.line_num}: index out of range")
            loadings[j][i] = w
    return loadings


def write_kv(path, items):
    text = "".join(f"{k} = {fmt(v)}\n" for k, v in items)
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def ensure_dir(path):
    path = Path(path)
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise SGCCAError(f"{path}: cannot create directory ({exc.strerror})") from None
    return path


# ---- gen --------------------------------------------------------------

GEN_DEFAULTS = dict(out=None, seed="0", n="50", dims="200,500,700", support_size="75",
                    noise_var="0.2", loading_range="0.2,0.3", u_cov=None)


def cmd_gen(args):
    cfg = resolve(args, GEN_DEFAULTS)
    if cfg["out"] is None:
        raise ConfigError("missing --out")
    dims = [int(p) for p in parse_floats(cfg["dims"], "dims")]
    kw = {}
    if cfg["u_cov"]:
        vals = parse_floats(cfg["u_cov"], "u-cov")
        J = len(dims)
        if len(vals) != J * J:
            raise ConfigError(f"u-cov needs {J * J} entries")
        kw["u_cov"] = np.reshape(vals, (J, J))
    spec = GenSpec(n=int(cfg["n"]), dims=tuple(dims), support_size=int(cfg["support_size"]),
                   loading_range=tuple(parse_floats(cfg["loading_range"], "loading-range")),
                   noise_var=float(cfg["noise_var"]), seed=int(cfg["seed"]), **kw)
    bs, gt = generate(spec)
    out = ensure_dir(cfg["out"])
    try:
        for j, X in enumerate(bs.blocks, 1):
            write_block_csv(out / f"X{j}.csv", X, [f"X{j}_V{i}" for i in range(1, X.shape[1] + 1)])
        with open(out / "ground_truth.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["block", "index", "loading"])
            for j, wj in enumerate(gt.loadings, 1):
                for i, x in enumerate(wj, 1):
                    w.writerow([j, i, "%.17g" % x])
        write_kv(out / "manifest.txt", [
            ("command", "gen"), ("seed", spec.seed), ("n", spec.n), ("dims", list(spec.dims)),
            ("support_size", spec.support_size), ("loading_range", [float(x) for x in spec.loading_range]),
            ("noise_var", float(spec.noise_var)), ("u_cov", [float(x) for x in spec.u_cov.ravel()]),
            ("blocks", [f"X{j}.csv" for j in range(1, bs.J + 1)]),
        ])
    except OSError as exc:
        raise SGCCAError(f"{exc.filename}: write failed ({exc.strerror})") from None
    print(f"wrote {bs.J} blocks to {out}")
    return 0


# ---- fit --------------------------------------------------------------

FIT_DEFAULTS = dict(blocks=None, design=None, algo="bcd3", scheme="horst", sparsity=None,
                    seed="0", tol=None, max_iters=None, out=None, ground_truth=None,
                    standardize="false")


def _blocks_and_design(cfg):
    if not cfg["blocks"]:
        raise ConfigError("missing --blocks")
    paths = split_list(cfg["blocks"])
    bs = load_blocks(paths, standardize=parse_bool(cfg["standardize"]))
    return paths, bs, load_design(cfg["design"], bs.J)


def _sparsity(cfg, J, algo, scheme):
    if cfg["sparsity"] is None:
        if J != 3:
            raise ConfigError("missing --sparsity")
        return list(reference_sparsity(algo, scheme))
    sp = parse_floats(cfg["sparsity"], "sparsity")
    if len(sp) != J:
        raise ConfigError(f"{len(sp)} sparsity values for {J} blocks")
    return sp


def _opt(value, cast):
    return None if value is None else cast(value)


def cmd_fit(args):
    cfg = resolve(args, FIT_DEFAULTS)
    algo, sch = check_algo(cfg["algo"], cfg["scheme"])
    if cfg["out"] is None:
        raise ConfigError("missing --out")
    paths, bs, dg = _blocks_and_design(cfg)
    sp = _sparsity(cfg, bs.J, algo, sch.kind)
    truth = read_ground_truth(cfg["ground_truth"], bs.dims) if cfg["ground_truth"] else None
    report = fit(bs, dg, algo, sch, sp, seed=int(cfg["seed"]),
                 tol=_opt(cfg["tol"], float), max_iters=_opt(cfg["max_iters"], int))
    out = ensure_dir(cfg["out"])
    items = [("command", "fit")]
    items += [(k, v) for k, v in cfg.items() if k != "out" and v is not None]
    items += [("resolved_sparsity", [float(s) for s in sp]), ("resolved_algo", algo),
              ("iterations", report.sweeps), ("wall_time", float(report.wall_time)),
              ("converged", str(report.converged).lower()),
              ("stationarity_residual", float(report.stationarity_residual)),
              ("objective", float(report.objective)),
              ("objective_trace", [float(h) for h in report.objective_trace])]
    if algo.startswith("gp"):
        items.append(("path_length", float(report.path_length)))
    else:
        items += [("degenerate_updates", report.degenerate_updates),
                  ("search_failures", report.search_failures)]
    for j, a in enumerate(report.final.a, 1):
        items.append((f"coefficients_X{j}", a))
        items.append((f"nonzeros_X{j}", int(np.count_nonzero(a))))
        if truth is not None:
            items.append((f"sensitivity_X{j}", sensitivity(a, truth[j - 1])))
            items.append((f"specificity_X{j}", specificity(a, truth[j - 1])))
    try:
        write_kv(out / "report.txt", items)
        for j, a in enumerate(report.final.a, 1):
            names = bs.names[j - 1] if bs.names else [f"V{i}" for i in range(1, a.size + 1)]
            with open(out / f"a{j}.csv", "w", newline="", encoding="utf-8") as fh:
                w = csv.writer(fh)
                w.writerow(["variable", "coefficient"])
                for name, x in zip(names, a):
                    w.writerow([name, FLOAT % x])
    except OSError as exc:
        raise SGCCAError(f"{exc.filename}: write failed ({exc.strerror})") from None
    print(f"{algo}: objective {FLOAT % report.objective} after {report.sweeps} iterations")
    return 0


# ---- project ----------------------------------------------------------

PROJECT_DEFAULTS = dict(vector=None, values=None, t=None, variant="P3", out=None)


def read_vector(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DataFormatError(f"{path}: cannot open ({exc.strerror})") from None
    vals = []
    for i, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0]
        for tok in line.replace(",", " ").split():
            try:
                vals.append(float(tok))
            except ValueError:
                raise DataFormatError(f"{path}:{i}: non-numeric value {tok!r}") from None
    if not vals:
        raise DataFormatError(f"{path}: no values")
    return np.array(vals)


def cmd_project(args):
    cfg = resolve(args, PROJECT_DEFAULTS)
    if cfg["vector"] is not None:
        v = read_vector(cfg["vector"])
    elif cfg["values"] is not None:
        v = np.array(parse_floats(cfg["values"], "values"))
    else:
        raise ConfigError("missing --vector or --values")
    if cfg["t"] is None:
        raise ConfigError("missing --t")
    t = float(cfg["t"])
    variant = Variant.parse(cfg["variant"])
    sol = solve_lm(v, t, variant)
    proj = project_omega(v, t, variant)
    items = [("command", "project"), ("variant", variant.value), ("t", t), ("v", v),
             ("branch", sol.branch),
             ("lambda_star", "none" if sol.lambda_star is None else float(sol.lambda_star)),
             ("mu_star", "none" if sol.mu_star is None else float(sol.mu_star)),
             ("lm_solution", sol.x), ("lm_objective", float(np.dot(v, sol.x))),
             ("projection", proj), ("projection_distance", float(np.linalg.norm(v - proj)))]
    write_kv(cfg["out"], items)
    return 0


# ---- grid -------------------------------------------------------------

GRID_DEFAULTS = dict(blocks=None, design=None, algo="bcd3", scheme="horst", grid=None,
                     seed="0", tol=None, max_iters=None, out=None, ground_truth=None,
                     standardize="false", cap="1000")


def cmd_grid(args):
    cfg = resolve(args, GRID_DEFAULTS)
    algo, sch = check_algo(cfg["algo"], cfg["scheme"])
    _, bs, dg = _blocks_and_design(cfg)
    if not cfg["grid"]:
        raise ConfigError("missing --grid (per-block lists separated by ';')")
    grids = [parse_floats(g, "grid") for g in str(cfg["grid"]).split(";")]
    if cfg["ground_truth"]:
        truth = read_ground_truth(cfg["ground_truth"], bs.dims)

        def score(r):
            return float(np.mean([sensitivity(a, w) + specificity(a, w)
                                  for a, w in zip(r.final.a, truth)]))
        label = "mean_sensitivity_plus_specificity"
    else:
        def score(r):
            return r.objective
        label = "objective"
    best = data_lab.grid_search(bs, dg, algo, sch, grids, score, cap=int(cfg["cap"]),
                                seed=int(cfg["seed"]), tol=_opt(cfg["tol"], float),
                                max_iters=_opt(cfg["max_iters"], int))
    report = fit(bs, dg, algo, sch, best, seed=int(cfg["seed"]),
                 tol=_opt(cfg["tol"], float), max_iters=_opt(cfg["max_iters"], int))
    items = [("command", "grid")] + [(k, v) for k, v in cfg.items() if v is not None]
    items += [("score", label), ("best_sparsity", [float(s) for s in best]),
              ("best_score", float(score(report)))]
    write_kv(cfg["out"], items)
    return 0


# ---- bench ------------------------------------------------------------

BENCH_DEFAULTS = dict(algo="baseline,bcd1,bcd2,bcd3", scheme="horst", sparsity=None,
                      design="hierarchical", repeats="10", seed="0", tol=None,
                      max_iters=None, out=None, blocks=None, ground_truth=None,
                      standardize="false")


def bench(algos, scheme, repeats, seed=0, sparsity=None, design="hierarchical",
          tol=None, max_iters=None, bs=None, truth=None):
    """Run every algorithm over the same seed sequence and summarize.

    Without ``bs`` each seed generates a fresh synthetic data set with the
    default generator; with ``bs`` the seed only changes the starting point.
    Returns one row dict per algorithm.
    """
    if repeats < 1:
        raise ConfigError("repeats must be at least 1")
    algos = [check_algo(a, scheme)[0] for a in algos]
    sch = check_algo(algos[0], scheme)[1]
    data = []
    for r in range(repeats):
        if bs is None:
            b, gt = generate(GenSpec(seed=seed + r))
            data.append((b, gt.loadings))
        else:
            data.append((bs, truth))
    J = data[0][0].J
    dg = design if isinstance(design, DesignGraph) else design_preset(design)
    rows = []
    for algo in algos:
        sp = sparsity if sparsity is not None else reference_sparsity(algo, sch.kind)
        sens, spec, times = [], [], []
        for r, (b, w) in enumerate(data):
            rep = fit(b, dg, algo, sch, sp, seed=seed + r, tol=tol, max_iters=max_iters)
            times.append(rep.wall_time)
            if w is not None:
                sens.append([sensitivity(a, x) for a, x in zip(rep.final.a, w)])
                spec.append([specificity(a, x) for a, x in zip(rep.final.a, w)])
        row = {"algo": algo, "scheme": sch.kind, "repeats": repeats,
               "sparsity": ";".join(FLOAT % s for s in sp)}
        for j in range(J):
            row[f"sensitivity_X{j + 1}"] = float(np.mean([s[j] for s in sens])) if sens else math.nan
        for j in range(J):
            row[f"specificity_X{j + 1}"] = float(np.mean([s[j] for s in spec])) if spec else math.nan
        row["total_time_min"] = sum(times) / 60.0
        row["average_time_s"] = sum(times) / repeats
        rows.append(row)
    base = next((r for r in rows if r["algo"] == "baseline"), None)
    for row in rows:
        if base is None or row is base:
            row["speedup_pct"] = math.nan
        else:
            row["speedup_pct"] = 100.0 * (base["average_time_s"] - row["average_time_s"]) / base["average_time_s"]
    return rows


def write_table(rows, path):
    fields = list(rows[0].keys())
    fh = open(path, "w", newline="", encoding="utf-8") if path else sys.stdout
    try:
        w = csv.writer(fh)
        w.writerow(fields)
        for row in rows:
            w.writerow(["" if isinstance(row[f], float) and math.isnan(row[f]) else fmt(row[f])
                        for f in fields])
    finally:
        if path:
            fh.close()


def cmd_bench(args):
    cfg = resolve(args, BENCH_DEFAULTS)
    algos = split_list(cfg["algo"])
    bs = truth = None
    if cfg["blocks"]:
        _, bs, _ = _blocks_and_design({**cfg, "design": cfg["design"]})
        if cfg["ground_truth"]:
            truth = read_ground_truth(cfg["ground_truth"], bs.dims)
    sp = parse_floats(cfg["sparsity"], "sparsity") if cfg["sparsity"] else None
    rows = bench(algos, cfg["scheme"], int(cfg["repeats"]), seed=int(cfg["seed"]),
                 sparsity=sp, design=cfg["design"] if bs is None else load_design(cfg["design"], bs.J),
                 tol=_opt(cfg["tol"], float), max_iters=_opt(cfg["max_iters"], int),
                 bs=bs, truth=truth)
    try:
        write_table(rows, cfg["out"])
    except OSError as exc:
        raise SGCCAError(f"{exc.filename}: write failed ({exc.strerror})") from None
    return 0


# ---- entry point ------------------------------------------------------

def build_parser():
    p = _Parser(prog="sgcca", description="Sparse generalized CCA solvers and synthetic benchmarks.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="generate synthetic blocks and ground truth")
    g.add_argument("--out")
    g.add_argument("--seed")
    g.add_argument("--n")
    g.add_argument("--dims", help="comma-separated block widths")
    g.add_argument("--support-size", dest="support_size")
    g.add_argument("--noise-var", dest="noise_var")
    g.add_argument("--loading-range", dest="loading_range")
    g.add_argument("--u-cov", dest="u_cov", help="row-major latent covariance entries")
    g.set_defaults(func=cmd_gen)

    def data_flags(q):
        q.add_argument("--blocks", nargs="+")
        q.add_argument("--design", help="complete|hierarchical|cascade or a matrix file")
        q.add_argument("--algo", help="|".join(ALGOS))
        q.add_argument("--scheme", help="horst|centroid|factorial")
        q.add_argument("--seed")
        q.add_argument("--tol")
        q.add_argument("--max-iters", dest="max_iters")
        q.add_argument("--out")
        q.add_argument("--ground-truth", dest="ground_truth")
        q.add_argument("--standardize", action="store_const", const="true")

    f = sub.add_parser("fit", help="fit one algorithm and write a report")
    data_flags(f)
    f.add_argument("--sparsity", help="comma-separated l1 budgets, one per block")
    f.set_defaults(func=cmd_fit)

    pr = sub.add_parser("project", help="linear maximizer and projection of a vector")
    pr.add_argument("--vector", help="file of numbers")
    pr.add_argument("--values", help="comma-separated numbers")
    pr.add_argument("--t")
    pr.add_argument("--variant", help="P1|P2|P3")
    pr.add_argument("--out")
    pr.set_defaults(func=cmd_project)

    gr = sub.add_parser("grid", help="grid search over sparsity budgets")
    data_flags(gr)
    gr.add_argument("--grid", help="per-block candidate lists, e.g. '7,7.6;8.3,8.7;8,8.05'")
    gr.add_argument("--cap")
    gr.set_defaults(func=cmd_grid)

    b = sub.add_parser("bench", help="repeat fits over seeds and tabulate quality and timing")
    data_flags(b)
    b.add_argument("--sparsity")
    b.add_argument("--repeats")
    b.set_defaults(func=cmd_bench)

    for q in (g, f, pr, gr, b):
        q.add_argument("--config", help="file of 'key = value' lines")
    return p


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except SGCCAError as exc:
        print(f"error: {exc.code}: {exc}", file=sys.stderr)
        return 2 if isinstance(exc, ConfigError) else 1
    except (ValueError, OSError) as exc:
        print(f"error: {type(exc).__name__.lower()}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
