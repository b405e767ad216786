"""Linear maximization and Euclidean projection on l1/l2 intersections.

The three constraint sets handled here are, for a budget ``t``::

    P1:  ||x||_1 <= t, ||x||_2 <= 1     (ball  ∩ ball)
    P2:  ||x||_1 == t, ||x||_2 == 1     (sphere ∩ sphere)
    P3:  ||x||_1 <= t, ||x||_2 == 1     (ball  ∩ sphere)

Every solver first works on ``|v|`` over the nonnegative orthant and then
restores the signs of ``v``.  The active threshold is the root of the
piecewise quadratic

    phi(lam) = ||(v - lam)^+||_1^2 - t^2 ||(v - lam)^+||_2^2

which is located exactly: the bracketing piece is found from the sorted
breakpoints and the quadratic on that piece is solved in closed form.
"""
from dataclasses import dataclass
from enum import Enum
import math
from typing import Optional

import numpy as np

from .errors import (BranchConditionError, DegenerateInputError,
                     InfeasibleBudgetError, InvalidArgumentError)


class Variant(str, Enum):
    P1 = "P1"
    P2 = "P2"
    P3 = "P3"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        key = str(value).strip().upper()
        if key in ("1", "2", "3"):
            key = "P" + key
        try:
            return cls(key)
        except ValueError:
            raise InvalidArgumentError(f"unknown constraint variant {value!r}") from None


UNIQUE_ROOT = "unique-root"
UNNORMALIZED = "unnormalized"
TIED_FACE = "tied-face"
ZERO_INPUT = "zero-input"


@dataclass(frozen=True)
class MaxLevelSet:
    v_max: float
    count: int
    indices: tuple


@dataclass
class LmSolution:
    x: np.ndarray
    lambda_star: Optional[float]
    mu_star: Optional[float]
    branch: str


def _as_vector(v):
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise InvalidArgumentError("expected a non-empty 1-d vector")
    if not np.all(np.isfinite(v)):
        raise InvalidArgumentError("vector has non-finite entries")
    return v


def _check_nonnegative(v):
    v = _as_vector(v)
    if np.any(v < 0):
        raise InvalidArgumentError("vector must be componentwise nonnegative")
    return v


def _check_budget(t):
    t = float(t)
    if not math.isfinite(t):
        raise InvalidArgumentError(f"budget t must be finite, got {t}")
    if t < 1:
        raise InfeasibleBudgetError(f"budget t={t:g} is below 1; the l1/l2 set is empty or degenerate")
    return t


def soft_threshold(v, lam):
    """Componentwise ``sign(v) * max(|v| - lam, 0)``."""
    if lam < 0:
        raise InvalidArgumentError(f"threshold must be nonnegative, got {lam}")
    v = np.asarray(v, dtype=float)
    return np.sign(v) * np.maximum(np.abs(v) - lam, 0.0)


def phi(v, t, lam):
    r = np.maximum(np.asarray(v, dtype=float) - lam, 0.0)
    return float(r.sum() ** 2 - t * t * np.dot(r, r))


def max_level_set(v):
    """Largest magnitude of ``v`` and the indices attaining it."""
    v = np.abs(_as_vector(v))
    v_max = float(v.max())
    idx = np.flatnonzero(v == v_max)
    return MaxLevelSet(v_max, int(idx.size), tuple(int(i) for i in idx))


def find_phi_root(v, t, allow_negative=False):
    """Root of ``phi`` on ``[0, v_max)`` or, with ``allow_negative``, on ``(-inf, v_max)``.

    The caller is responsible for the branch conditions: ``I_1 <= t**2``
    (``I_1 < t**2`` on the half-line) and, on ``[0, v_max)``,
    ``||v||_1 > t ||v||_2``.  A violated condition raises
    :class:`BranchConditionError`.
    """
    v = _check_nonnegative(v)
    t = float(t)
    tt = t * t
    u = np.sort(v)[::-1]
    n = u.size
    i1 = int(np.count_nonzero(u == u[0]))
    if u[0] <= 0 or i1 > tt:
        raise BranchConditionError("phi does not become nonpositive below v_max (I_1 > t^2 or v = 0)")
    if allow_negative:
        lower = -math.inf
        if n <= tt or (i1 == n):
            raise BranchConditionError("phi has no root on (-inf, v_max): need I_1 < t^2 < n")
        if i1 >= tt:
            raise BranchConditionError("phi vanishes identically near v_max (I_1 = t^2)")
    else:
        lower = 0.0
        if not u.sum() > t * math.sqrt(np.dot(u, u)):
            raise BranchConditionError("phi(0) <= 0, no root on [0, v_max): ||v||_1 <= t ||v||_2")

    csum = np.cumsum(u)
    csq = np.cumsum(u * u)
    ks = np.arange(1, n + 1, dtype=float)

    # breakpoint u[k] closes piece k (top-k entries active); keep those above the domain floor
    n_valid = int(np.count_nonzero(u[1:] > lower))
    if n_valid:
        kk = ks[:n_valid]
        b = u[1:n_valid + 1]
        s, q = csum[:n_valid], csq[:n_valid]
        f = (s - kk * b) ** 2 - tt * (q - 2.0 * b * s + kk * b * b)
        pos = np.flatnonzero(f > 0)
        k = int(pos[0]) + 1 if pos.size else n_valid + 1
    else:
        k = 1
    hi = u[k - 1]
    lo = u[k] if k <= n_valid else lower

    s, q = csum[k - 1], csq[k - 1]
    if k <= tt:
        # phi is identically zero on this piece (k == t^2); any level in it works
        lam = lo if math.isfinite(lo) else hi
    else:
        disc = max(k * q - s * s, 0.0) / (k - tt)
        lam = (s - t * math.sqrt(disc)) / k
        lam = min(max(lam, lo), hi)
    return float(lam)


def _tied_face(v, lvl, t):
    n = v.size
    i1 = lvl.count
    beta = math.sqrt((i1 - t * t) / (i1 - 1))
    alpha = (t - beta) / i1
    x = np.zeros(n)
    x[list(lvl.indices)] = alpha
    x[lvl.indices[0]] += beta
    return LmSolution(x, lvl.v_max, 0.0, TIED_FACE)


def _unit_at_max(v, lvl):
    x = np.zeros(v.size)
    x[lvl.indices[0]] = 1.0
    return LmSolution(x, None, None, TIED_FACE)


def _normalized(v):
    nrm = math.sqrt(float(np.dot(v, v)))
    return LmSolution(v / nrm, 0.0, nrm, UNNORMALIZED)


def _root_branch(v, t, allow_negative):
    lam = find_phi_root(v, t, allow_negative=allow_negative)
    r = np.maximum(v - lam, 0.0)
    mu = math.sqrt(float(np.dot(r, r)))
    return LmSolution(r / mu, lam, mu, UNIQUE_ROOT)


def _solve_ball_plus(v, t):
    # shared by P1+ and P3+, whose maximizers coincide
    n = v.size
    lvl = max_level_set(v)
    if t == 1:
        return _unit_at_max(v, lvl)
    if t >= math.sqrt(n):
        return _normalized(v)
    if lvl.count > t * t:
        return _tied_face(v, lvl, t)
    if v.sum() > t * math.sqrt(float(np.dot(v, v))):
        return _root_branch(v, t, allow_negative=False)
    return _normalized(v)


def solve_lm_p1_plus(v, t):
    """Maximize ``<v, x>`` over ``x >= 0, ||x||_1 <= t, ||x||_2 <= 1`` for ``v >= 0``."""
    v = _check_nonnegative(v)
    t = _check_budget(t)
    if not np.any(v):
        return LmSolution(np.zeros(v.size), None, None, ZERO_INPUT)
    return _solve_ball_plus(v, t)


def solve_lm_p3_plus(v, t):
    """Maximize ``<v, x>`` over ``x >= 0, ||x||_1 <= t, ||x||_2 == 1`` for ``v >= 0``."""
    v = _check_nonnegative(v)
    t = _check_budget(t)
    if not np.any(v):
        raise DegenerateInputError("v = 0: every point of the sphere constraint is optimal")
    return _solve_ball_plus(v, t)


def solve_lm_p2_plus(v, t):
    """Maximize ``<v, x>`` over ``x >= 0, ||x||_1 == t, ||x||_2 == 1`` for ``v >= 0``.

    When ``I_1 < t**2`` the threshold may be negative: an l1 sphere can force
    mass onto coordinates where ``v`` is small or zero.
    """
    v = _check_nonnegative(v)
    t = _check_budget(t)
    n = v.size
    if not np.any(v):
        raise DegenerateInputError("v = 0: every point of the sphere constraint is optimal")
    lvl = max_level_set(v)
    root_n = math.sqrt(n)
    if t == 1:
        return _unit_at_max(v, lvl)
    if t > root_n:
        raise InfeasibleBudgetError(f"budget t={t:g} exceeds sqrt(n)={root_n:g}; the l1 sphere misses the unit sphere")
    if t == root_n:
        return LmSolution(np.full(n, 1.0 / root_n), -math.inf, None, UNIQUE_ROOT)
    tt = t * t
    if lvl.count < tt:
        return _root_branch(v, t, allow_negative=True)
    if lvl.count == tt:
        x = np.zeros(n)
        x[list(lvl.indices)] = 1.0 / math.sqrt(lvl.count)
        return LmSolution(x, lvl.v_max, 0.0, TIED_FACE)
    return _tied_face(v, lvl, t)


_PLUS_SOLVERS = {
    Variant.P1: solve_lm_p1_plus,
    Variant.P2: solve_lm_p2_plus,
    Variant.P3: solve_lm_p3_plus,
}


def solve_lm(v, t, variant):
    """Maximize ``<v, x>`` over the signed constraint set of ``variant``.

    Coordinates with ``v_i == 0`` take the positive sign; any sign is optimal
    there, and keeping the magnitude preserves the norms of the solution.
    """
    v = _as_vector(v)
    sol = _PLUS_SOLVERS[Variant.parse(variant)](np.abs(v), t)
    sign = np.where(v < 0, -1.0, 1.0)
    sol.x = sign * sol.x
    return sol


def project_l1_ball(v, t):
    """Euclidean projection onto ``{x : ||x||_1 <= t}`` by sort-and-scan."""
    v = _as_vector(v)
    t = float(t)
    if not t > 0:
        raise InvalidArgumentError(f"l1 radius must be positive, got {t}")
    a = np.abs(v)
    if a.sum() <= t:
        return v.copy()
    u = np.sort(a)[::-1]
    css = np.cumsum(u) - t
    ks = np.arange(1, u.size + 1)
    rho = np.flatnonzero(u - css / ks > 0)[-1]
    theta = css[rho] / (rho + 1)
    return soft_threshold(v, theta)


def project_omega(v, t, variant):
    """Euclidean projection of ``v`` onto the ``variant`` constraint set.

    On the two sets containing the unit sphere the projection is the linear
    maximizer of ``<v, x>``. The convex ball-ball set goes through the four
    KKT regimes: interior, l2 active only, l1 active only, both active.
    """
    variant = Variant.parse(variant)
    v = _as_vector(v)
    if variant is not Variant.P1:
        return solve_lm(v, t, variant).x
    t = _check_budget(t)
    n1 = float(np.abs(v).sum())
    n2 = math.sqrt(float(np.dot(v, v)))
    if n1 <= t and n2 <= 1:
        return v.copy()
    if n2 > 1 and n1 <= t * n2:
        return v / n2
    w = project_l1_ball(v, t)
    if np.dot(w, w) <= 1:
        return w
    lam = find_phi_root(np.abs(v), t, allow_negative=False)
    w = soft_threshold(v, lam)
    return w / math.sqrt(float(np.dot(w, w)))


def is_feasible(x, t, variant, tol=1e-8):
    variant = Variant.parse(variant)
    n1 = float(np.abs(x).sum())
    n2 = math.sqrt(float(np.dot(x, x)))
    if variant is Variant.P1:
        return n1 <= t + tol and n2 <= 1 + tol
    if variant is Variant.P2:
        return abs(n1 - t) <= tol and abs(n2 - 1) <= tol
    return n1 <= t + tol and abs(n2 - 1) <= tol
