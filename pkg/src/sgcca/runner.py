"""Dispatch from algorithm names to solvers."""
from .bcd import BcdConfig, fit_baseline, fit_bcd
from .errors import ConfigError
from .gp import GpConfig, fit_gp
from .model import Scheme

ALGOS = ("baseline", "bcd1", "bcd2", "bcd3", "gp1", "gp2", "gp3")


def check_algo(algo, scheme):
    algo = str(algo).lower()
    if algo not in ALGOS:
        raise ConfigError(f"unknown algorithm {algo!r}; expected one of {', '.join(ALGOS)}")
    sch = Scheme.parse(scheme)
    if algo.startswith("gp") and sch.kind != "horst":
        raise ConfigError(f"{algo} requires the horst scheme, got {sch.kind}")
    return algo, sch


def fit(bs, dg, algo, scheme, sparsity, seed=0, tol=None, max_iters=None, init=None):
    """Run ``algo`` and return its :class:`~sgcca.bcd.SolverReport`.

    ``tol`` is the relative objective tolerance for the BCD family and the
    stationarity tolerance for GP; ``max_iters`` caps sweeps or iterations.
    """
    algo, sch = check_algo(algo, scheme)
    if algo.startswith("gp"):
        kw = {}
        if tol is not None:
            kw["tol"] = tol
        if max_iters is not None:
            kw["max_iters"] = max_iters
        cfg = GpConfig("P" + algo[-1], sparsity, seed=seed, **kw)
        return fit_gp(bs, dg, cfg, init=init, scheme=sch)
    kw = {}
    if tol is not None:
        kw["epsilon"] = tol
    if max_iters is not None:
        kw["max_sweeps"] = max_iters
    variant = "P3" if algo == "baseline" else "P" + algo[-1]
    cfg = BcdConfig(variant, sch, sparsity, seed=seed, **kw)
    if algo == "baseline":
        return fit_baseline(bs, dg, cfg, init=init)
    return fit_bcd(bs, dg, cfg, init=init)
