"""Block coordinate ascent for SGCCA and the soft-threshold baseline.

Both solvers share one Gauss-Seidel sweep: for ``j = 1..J`` the inner
component ``z_j`` is formed from the freshest coefficients and the block is
replaced by a maximizer of ``<X_j' z_j, a_j>`` over its constraint set.
They differ only in how that maximizer is computed:

* ``fit_bcd`` uses the exact closed-form linear maximizer of each variant.
* ``fit_baseline`` uses the normalized soft-threshold ``S_lam(v)/||S_lam(v)||``
  with ``lam`` found by bisection on the l1 norm. This breaks down when the
  largest entries of ``v`` are tied (``I_1 > s**2``).
"""
from dataclasses import dataclass, field
import math
import time
from typing import Optional

import numpy as np

from .errors import DegenerateInputError, InvalidArgumentError
from .model import CoefState, Scheme, check_sparsity
from .norm_geometry import Variant, project_l1_ball, project_omega, soft_threshold, solve_lm


@dataclass
class BcdConfig:
    variant: Variant
    scheme: Scheme
    sparsity: tuple
    epsilon: float = 1e-8
    max_sweeps: int = 1000
    seed: int = 0

    def __post_init__(self):
        self.variant = Variant.parse(self.variant)
        self.scheme = Scheme.parse(self.scheme)
        self.sparsity = tuple(float(s) for s in self.sparsity)
        if not self.epsilon > 0:
            raise InvalidArgumentError("epsilon must be positive")
        if self.max_sweeps < 1:
            raise InvalidArgumentError("max_sweeps must be at least 1")


@dataclass
class SolverReport:
    final: CoefState
    objective_trace: list
    sweeps: int
    wall_time: float
    converged: bool
    stationarity_residual: float
    seed: int
    algo: str = ""
    degenerate_updates: int = 0
    search_failures: int = 0
    step_norms: list = field(default_factory=list)
    path_length: float = 0.0
    final_step: Optional[float] = None

    @property
    def objective(self):
        return self.objective_trace[-1]

    @property
    def stationary(self):
        return self.stationarity_residual <= 1e-6


def init_coefs(bs, cfg):
    """Seeded unit-norm starting point, feasible for ``cfg.variant``.

    P1 starts on the unit sphere as well (Omega3 lies inside Omega1), so P1
    and P3 runs with the same seed begin at the same point.
    """
    variant = Variant.parse(cfg.variant)
    if len(cfg.sparsity) != bs.J:
        raise InvalidArgumentError(f"{len(cfg.sparsity)} sparsity values for {bs.J} blocks")
    rng = np.random.default_rng(cfg.seed)
    target = Variant.P3 if variant is Variant.P1 else variant
    a = []
    for j, (p, s) in enumerate(zip(bs.dims, cfg.sparsity)):
        check_sparsity(s, p, j)
        a.append(project_omega(rng.standard_normal(p), s, target))
    return CoefState(a, variant, cfg.sparsity)


def baseline_outer_weight(v, s, max_iter=100, tol=1e-8):
    """Normalized soft-threshold with an l1 budget, found by bisection.

    Returns ``(x, lam, ok)``. If no threshold brings the normalized l1 norm
    to ``s`` (tied maxima), the unnormalized soft-threshold with l1 norm
    ``s`` is returned and ``ok`` is False.
    """
    v = np.asarray(v, dtype=float)
    nrm = math.sqrt(float(np.dot(v, v)))
    if nrm == 0:
        return None, 0.0, False
    x = v / nrm
    if np.abs(x).sum() <= s:
        return x, 0.0, True
    av = np.abs(v)
    lo, hi = 0.0, float(av.max())
    best = None
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        w = np.maximum(av - mid, 0.0)
        w2 = math.sqrt(float(np.dot(w, w)))
        if w2 == 0:
            hi = mid
            continue
        l1 = w.sum() / w2
        if l1 <= s:
            best = mid
        if abs(l1 - s) <= tol:
            return soft_threshold(v, mid) / w2, mid, True
        if l1 > s:
            lo = mid
        else:
            hi = mid
    if best is not None:
        w = soft_threshold(v, best)
        return w / math.sqrt(float(np.dot(w, w))), best, False
    w = project_l1_ball(v, s)
    lam = float(av.max() - np.abs(w).max())
    return w, lam, False


def _objective(c, sch, y, n):
    J = len(y)
    return float(sum(sch.g(float(np.dot(y[j], y[k])) / n)
                     for j in range(J) for k in range(J) if c[j, k]))


def _sweep(blocks, c, sch, a, y, sparsity, update):
    """One in-place Gauss-Seidel pass; returns (degenerate, failures)."""
    n = y[0].size
    degenerate = failures = 0
    for j, Xj in enumerate(blocks):
        z = np.zeros(n)
        for k in range(len(blocks)):
            if k != j and c[j, k]:
                z += sch.w(float(np.dot(y[j], y[k])) / n) * y[k]
        v = Xj.T @ z
        x, ok = update(v, sparsity[j])
        if x is None:
            degenerate += 1
            continue
        failures += not ok
        a[j] = x
        y[j] = Xj @ x
    return degenerate, failures


def _lm_update(variant):
    def update(v, s):
        if not np.any(v):
            return None, True
        try:
            return solve_lm(v, s, variant).x, True
        except DegenerateInputError:
            return None, True
    return update


def _baseline_update(v, s):
    if not np.any(v):
        return None, True
    x, _, ok = baseline_outer_weight(v, s)
    return x, ok


def bcd_sweep(bs, dg, cfg, st):
    """One sweep of the exact block update; blocks with ``X_j' z_j = 0`` are kept."""
    a = list(st.a)
    y = [X @ x for X, x in zip(bs.blocks, a)]
    _sweep(bs.blocks, dg.c, Scheme.parse(cfg.scheme), a, y, st.sparsity, _lm_update(st.variant))
    return st.replace(a)


def _run(bs, dg, cfg, update, variant, algo, init=None):
    sch = Scheme.parse(cfg.scheme)
    st0 = init if init is not None else init_coefs(bs, BcdConfig(variant, sch, cfg.sparsity, seed=cfg.seed))
    blocks, c, n = bs.blocks, dg.c, bs.n
    sparsity = st0.sparsity

    t0 = time.perf_counter()
    a = list(st0.a)
    y = [X @ x for X, x in zip(blocks, a)]
    h_old = _objective(c, sch, y, n)
    trace = [h_old]
    degenerate = failures = 0
    converged = False
    sweeps = 0
    while sweeps < cfg.max_sweeps:
        d, f = _sweep(blocks, c, sch, a, y, sparsity, update)
        degenerate += d
        failures += f
        sweeps += 1
        h_new = _objective(c, sch, y, n)
        trace.append(h_new)
        if h_new - h_old <= cfg.epsilon * max(1.0, abs(h_old)):
            converged = True
            break
        h_old = h_new
    wall = time.perf_counter() - t0

    # one more sweep, discarded, to measure how far the iterate still moves
    a2, y2 = list(a), list(y)
    _sweep(blocks, c, sch, a2, y2, sparsity, update)
    residual = math.sqrt(sum(float(np.dot(p - q, p - q)) for p, q in zip(a2, a)))

    return SolverReport(
        final=CoefState(a, variant, sparsity, check=False),
        objective_trace=trace, sweeps=sweeps, wall_time=wall, converged=converged,
        stationarity_residual=residual, seed=cfg.seed, algo=algo,
        degenerate_updates=degenerate, search_failures=failures)


def fit_bcd(bs, dg, cfg, init=None):
    """Exact block coordinate ascent (BCD1/2/3 for variants P1/P2/P3)."""
    variant = Variant.parse(cfg.variant)
    algo = "bcd" + variant.value[1]
    return _run(bs, dg, cfg, _lm_update(variant), variant, algo, init)


def fit_baseline(bs, dg, cfg, init=None):
    """Original SGCCA iteration with normalized soft-thresholding (P3 constraints)."""
    return _run(bs, dg, cfg, _baseline_update, Variant.P3, "baseline", init)
