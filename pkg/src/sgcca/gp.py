"""Projected gradient ascent with Barzilai-Borwein steps (Horst scheme only).

The Horst objective ``h(a) = (1/n) sum_{j != k} c_jk a_j' X_j' X_k a_k`` is a
quadratic form, so its gradient is linear and globally Lipschitz.  Each step
is ``a <- P_Omega(a + gamma * grad h(a))`` where the projection splits over
blocks.  BB ratios are clamped to ``[gamma_min, gamma_max]`` and then capped
at ``step_cap_factor / L_h``.
"""
from dataclasses import dataclass
import math
import time

import numpy as np

from .bcd import SolverReport, init_coefs
from .errors import DegenerateInputError, InvalidArgumentError, UnsupportedSchemeError
from .model import CoefState, Scheme, _check_conform, _coefs
from .norm_geometry import Variant, project_omega


@dataclass
class GpConfig:
    variant: Variant
    sparsity: tuple
    gamma_min: float = 1e-6
    gamma_max: float = 1e6
    step_cap_factor: float = 0.99
    tol: float = 1e-6
    max_iters: int = 10000
    seed: int = 0

    def __post_init__(self):
        self.variant = Variant.parse(self.variant)
        self.sparsity = tuple(float(s) for s in self.sparsity)
        if not 0 < self.gamma_min <= self.gamma_max:
            raise InvalidArgumentError("need 0 < gamma_min <= gamma_max")
        if not 0 < self.step_cap_factor < 1:
            raise InvalidArgumentError("step_cap_factor must lie in (0, 1)")
        if not self.tol > 0:
            raise InvalidArgumentError("tol must be positive")
        if self.max_iters < 0:
            raise InvalidArgumentError("max_iters must be nonnegative")


@dataclass
class BbState:
    s_vec: np.ndarray
    y_vec: np.ndarray
    a_s: float
    b_s: float


def _require_horst(scheme):
    if scheme is not None and Scheme.parse(scheme).kind != "horst":
        raise UnsupportedSchemeError(
            f"gradient projection supports the horst scheme only, got {Scheme.parse(scheme).kind}")


def gradient_h(bs, dg, st, scheme=None):
    """Blockwise gradient ``(2/n) sum_{k != l} c_lk X_l' X_k a_k``."""
    _require_horst(scheme)
    a = _coefs(st)
    _check_conform(bs, dg, a)
    y = [X @ x for X, x in zip(bs.blocks, a)]
    return _gradient(bs.blocks, dg.c, y, bs.n)


def _gradient(blocks, c, y, n):
    grad = []
    for l, Xl in enumerate(blocks):
        z = np.zeros(n)
        for k in range(len(blocks)):
            if k != l and c[l, k]:
                z += y[k]
        grad.append((2.0 / n) * (Xl.T @ z))
    return grad


def spectral_norm(M, rtol=1e-8, max_iter=10000):
    """Largest singular value by power iteration on ``M'M``."""
    M = np.asarray(M, dtype=float)
    if not np.any(M):
        return 0.0
    x = np.ones(M.shape[1]) / math.sqrt(M.shape[1])
    # a constant start can be orthogonal to the top singular vector
    x += np.random.default_rng(0).standard_normal(M.shape[1]) * 1e-3
    x /= np.linalg.norm(x)
    sigma = 0.0
    for _ in range(max_iter):
        y = M.T @ (M @ x)
        ny = np.linalg.norm(y)
        if ny == 0:
            return 0.0
        x = y / ny
        new = math.sqrt(ny)
        if abs(new - sigma) <= rtol * new:
            return new
        sigma = new
    return sigma


def lipschitz_bound(bs, dg):
    """``(2/n) (J-1)^{3/2} sqrt(J) max_{j != k} c_jk ||X_j' X_k||_2``."""
    J, n = bs.J, bs.n
    cmax = 0.0
    for j in range(J):
        for k in range(j + 1, J):
            if dg.c[j, k]:
                cmax = max(cmax, spectral_norm(bs.blocks[j].T @ bs.blocks[k]))
    return (2.0 / n) * (J - 1) ** 1.5 * math.sqrt(J) * cmax


def project_product(raw, sparsity, variant, previous=None):
    """Blockwise projection onto the product constraint set.

    A block equal to zero has no projection on the sphere variants; it
    keeps its ``previous`` value when one is given.
    """
    variant = Variant.parse(variant)
    raw = [np.asarray(x, dtype=float) for x in raw]
    if len(sparsity) != len(raw):
        raise InvalidArgumentError(f"{len(sparsity)} sparsity values for {len(raw)} blocks")
    out = []
    for j, (x, s) in enumerate(zip(raw, sparsity)):
        try:
            out.append(project_omega(x, s, variant))
        except DegenerateInputError:
            if previous is None:
                raise
            out.append(np.array(previous[j], dtype=float))
    return CoefState(out, variant, sparsity, check=False)


def _dist(a, b):
    return math.sqrt(sum(float(np.dot(p - q, p - q)) for p, q in zip(a, b)))


def fit_gp(bs, dg, cfg, init=None, scheme=None):
    """Projected gradient ascent (GP1/2/3 for variants P1/P2/P3)."""
    _require_horst(scheme)
    variant = Variant.parse(cfg.variant)
    st = init if init is not None else init_coefs(
        bs, _InitCfg(variant, cfg.sparsity, cfg.seed))
    blocks, c, n = bs.blocks, dg.c, bs.n
    sparsity = st.sparsity

    t0 = time.perf_counter()
    L = lipschitz_bound(bs, dg)
    cap = cfg.step_cap_factor / L if L > 0 else cfg.gamma_max
    gamma = min(cap, cfg.gamma_max)

    a = list(st.a)
    y = [X @ x for X, x in zip(blocks, a)]
    g = _gradient(blocks, c, y, n)
    trace = [_horst(c, y, n)]
    steps = []
    converged = False
    residual = math.inf
    it = 0
    while True:
        nxt = project_product([x + gamma * d for x, d in zip(a, g)], sparsity, variant, a).a
        residual = _dist(nxt, a)
        if residual <= cfg.tol:
            converged = True
            break
        if it >= cfg.max_iters:
            break
        it += 1
        y_new = [X @ x for X, x in zip(blocks, nxt)]
        g_new = _gradient(blocks, c, y_new, n)
        bb = bb_state(a, nxt, g, g_new)
        steps.append(residual)
        a, y, g = list(nxt), y_new, g_new
        trace.append(_horst(c, y, n))
        gamma = bb_step(bb, cfg.gamma_min, cfg.gamma_max, cap)
    wall = time.perf_counter() - t0

    return SolverReport(
        final=CoefState(a, variant, sparsity, check=False),
        objective_trace=trace, sweeps=it, wall_time=wall, converged=converged,
        stationarity_residual=residual, seed=cfg.seed, algo="gp" + variant.value[1],
        step_norms=steps, path_length=float(sum(steps)), final_step=gamma)


def bb_state(a_old, a_new, g_old, g_new):
    s = np.concatenate([p - q for p, q in zip(a_new, a_old)])
    yv = np.concatenate([p - q for p, q in zip(g_new, g_old)])
    return BbState(s, yv, float(np.dot(s, s)), float(np.dot(s, yv)))


def bb_step(bb, gamma_min, gamma_max, cap):
    if bb.b_s <= 0:
        gamma = gamma_max
    else:
        gamma = min(gamma_max, max(gamma_min, bb.a_s / bb.b_s))
    return min(gamma, cap)


def _horst(c, y, n):
    J = len(y)
    return float(sum(np.dot(y[j], y[k]) for j in range(J) for k in range(J) if c[j, k])) / n


@dataclass
class _InitCfg:
    variant: Variant
    sparsity: tuple
    seed: int
