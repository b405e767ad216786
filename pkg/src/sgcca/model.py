"""Multiblock data model: blocks, design graph, schemes and the SGCCA objective.

Covariances use the 1/n normalization throughout (not 1/(n-1)); the
standardization helper follows the same convention so that a standardized
column has unit covariance with itself.
"""
from dataclasses import dataclass
import math
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DegenerateColumnError, InvalidArgumentError
from .norm_geometry import Variant, is_feasible


@dataclass(frozen=True)
class BlockSet:
    blocks: tuple
    names: Optional[tuple] = None

    def __init__(self, blocks, names=None):
        arrs = []
        for j, X in enumerate(blocks):
            X = np.asarray(X, dtype=float)
            if X.ndim != 2 or X.shape[1] < 1:
                raise InvalidArgumentError(f"block {j} must be an n x p matrix with p >= 1")
            arrs.append(X)
        if len(arrs) < 2:
            raise InvalidArgumentError("need at least two blocks")
        n = arrs[0].shape[0]
        for j, X in enumerate(arrs):
            if X.shape[0] != n:
                raise InvalidArgumentError(
                    f"block {j} has {X.shape[0]} rows, block 0 has {n}")
        object.__setattr__(self, "blocks", tuple(arrs))
        object.__setattr__(self, "names", tuple(names) if names is not None else None)

    @property
    def n(self):
        return self.blocks[0].shape[0]

    @property
    def J(self):
        return len(self.blocks)

    @property
    def dims(self):
        return tuple(X.shape[1] for X in self.blocks)

    def __getitem__(self, j):
        return self.blocks[j]

    def __len__(self):
        return len(self.blocks)


@dataclass(frozen=True)
class DesignGraph:
    c: np.ndarray

    def __init__(self, c):
        c = np.array(c, dtype=float)
        if c.ndim != 2 or c.shape[0] != c.shape[1]:
            raise InvalidArgumentError("design matrix must be square")
        if not np.all((c == 0) | (c == 1)):
            raise InvalidArgumentError("design matrix entries must be 0 or 1")
        if not np.array_equal(c, c.T):
            raise InvalidArgumentError("design matrix must be symmetric")
        if np.any(np.diag(c) != 0):
            raise InvalidArgumentError("design matrix must have a zero diagonal")
        if not np.any(c):
            raise InvalidArgumentError("design matrix has no connections")
        c.setflags(write=False)
        object.__setattr__(self, "c", c)

    @property
    def J(self):
        return self.c.shape[0]

    def pairs(self):
        """Ordered pairs ``(j, k)`` with ``c_jk == 1``."""
        return [(j, k) for j in range(self.J) for k in range(self.J) if self.c[j, k]]


@dataclass(frozen=True)
class Scheme:
    """Scheme function ``g`` with inner weight ``w = g' / phi_scheme``."""
    kind: str
    g: Callable[[float], float]
    w: Callable[[float], float]
    phi_scheme: float

    @classmethod
    def parse(cls, value):
        if isinstance(value, Scheme):
            return value
        try:
            return SCHEMES[str(value).strip().lower()]
        except KeyError:
            raise InvalidArgumentError(f"unknown scheme {value!r}") from None


HORST = Scheme("horst", lambda x: x, lambda x: 1.0, 1.0)
CENTROID = Scheme("centroid", abs, lambda x: float(np.sign(x)), 1.0)
FACTORIAL = Scheme("factorial", lambda x: x * x, lambda x: x, 2.0)
SCHEMES = {"horst": HORST, "centroid": CENTROID, "factorial": FACTORIAL}


@dataclass(frozen=True)
class CoefState:
    a: tuple
    variant: Variant
    sparsity: tuple

    def __init__(self, a, variant, sparsity, check=True, tol=1e-8):
        a = tuple(np.array(x, dtype=float) for x in a)
        variant = Variant.parse(variant)
        sparsity = tuple(float(s) for s in sparsity)
        if len(sparsity) != len(a):
            raise InvalidArgumentError(
                f"{len(sparsity)} sparsity values for {len(a)} blocks")
        if check:
            for j, (x, s) in enumerate(zip(a, sparsity)):
                check_sparsity(s, x.size, j)
                if not is_feasible(x, s, variant, tol=tol):
                    raise InvalidArgumentError(
                        f"a_{j} is not feasible for {variant.value} with s={s:g}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "variant", variant)
        object.__setattr__(self, "sparsity", sparsity)

    def __getitem__(self, j):
        return self.a[j]

    def __len__(self):
        return len(self.a)

    def replace(self, a, check=False):
        return CoefState(a, self.variant, self.sparsity, check=check)

    def flat(self):
        return np.concatenate(self.a)


def check_sparsity(s, p, j=None):
    where = "" if j is None else f" for block {j}"
    if not 1 < s < math.sqrt(p):
        raise InvalidArgumentError(
            f"sparsity {s:g}{where} must lie strictly between 1 and sqrt(p)={math.sqrt(p):.6g}")


def _coefs(st):
    return st.a if isinstance(st, CoefState) else tuple(np.asarray(x, float) for x in st)


def block_cov(Xj, aj, Xk, ak):
    """``(1/n) a_j' X_j' X_k a_k``."""
    Xj, Xk = np.asarray(Xj, float), np.asarray(Xk, float)
    aj, ak = np.asarray(aj, float), np.asarray(ak, float)
    if Xj.shape[0] != Xk.shape[0]:
        raise InvalidArgumentError("blocks have different sample counts")
    if Xj.shape[1] != aj.size or Xk.shape[1] != ak.size:
        raise InvalidArgumentError("coefficient length does not match block width")
    return float(np.dot(Xj @ aj, Xk @ ak)) / Xj.shape[0]


def _check_conform(bs, dg, a):
    if dg.J != bs.J or len(a) != bs.J:
        raise InvalidArgumentError(
            f"{bs.J} blocks, {dg.J}x{dg.J} design, {len(a)} coefficient vectors")
    for j, (X, x) in enumerate(zip(bs.blocks, a)):
        if X.shape[1] != x.size:
            raise InvalidArgumentError(
                f"a_{j} has length {x.size}, block {j} has {X.shape[1]} columns")


def scores(bs, a):
    return [X @ x for X, x in zip(bs.blocks, a)]


def objective_h(bs, dg, sch, st):
    """``sum_{j != k} c_jk g(cov(X_j a_j, X_k a_k))`` over ordered pairs."""
    a = _coefs(st)
    _check_conform(bs, dg, a)
    sch = Scheme.parse(sch)
    y = scores(bs, a)
    n = bs.n
    return float(sum(sch.g(float(np.dot(y[j], y[k])) / n) for j, k in dg.pairs()))


def inner_components(bs, dg, sch, st, j, new=None, split=0):
    """Inner component ``z_j`` of block ``j``.

    Blocks ``k < split`` are read from ``new`` (already updated in the
    current sweep), the rest from ``st``.  The weight of each neighbour is
    evaluated at the current ``a_j`` from ``st``.
    """
    a = list(_coefs(st))
    _check_conform(bs, dg, a)
    if not 0 <= split <= bs.J:
        raise InvalidArgumentError(f"split must lie in [0, {bs.J}]")
    if split:
        if new is None:
            raise InvalidArgumentError("split > 0 needs the updated prefix")
        a[:split] = _coefs(new)[:split]
    sch = Scheme.parse(sch)
    return _inner(bs.blocks, dg.c, sch, a, j, bs.blocks[j] @ a[j])


def _inner(blocks, c, sch, a, j, yj):
    n = yj.size
    z = np.zeros(n)
    for k in range(len(blocks)):
        if k == j or not c[j, k]:
            continue
        yk = blocks[k] @ a[k]
        z += sch.w(float(np.dot(yj, yk)) / n) * yk
    return z


def identity_22_check(bs, dg, sch, st):
    """Both sides of ``sum c_jk g(cov_jk) == sum_j cov(X_j a_j, z_j)``."""
    a = _coefs(st)
    sch = Scheme.parse(sch)
    lhs = objective_h(bs, dg, sch, a)
    n = bs.n
    rhs = 0.0
    for j in range(bs.J):
        yj = bs.blocks[j] @ a[j]
        rhs += float(np.dot(yj, _inner(bs.blocks, dg.c, sch, a, j, yj))) / n
    return lhs, rhs


def standardize_columns(X, names=None):
    """Center each column and scale it to unit 1/n variance."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] < 2:
        raise InvalidArgumentError("standardization needs a matrix with at least two rows")
    mu = X.mean(axis=0)
    sd = np.sqrt(((X - mu) ** 2).mean(axis=0))
    scale = np.maximum(np.abs(mu), 1.0)
    bad = np.flatnonzero(sd <= 1e-12 * scale)
    if bad.size:
        i = int(bad[0])
        label = names[i] if names is not None else f"#{i}"
        raise DegenerateColumnError(f"column {label} is constant and cannot be standardized")
    return (X - mu) / sd
