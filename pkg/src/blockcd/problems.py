"""Problem definitions: composite quadratics with block structure, smooth
convex oracles with Lipschitz metadata, proximal operators, and the named
instance generators used by the experiment battery.

The canonical composite objective is

    f(x) = 1/2 ||sum_k A_k x_k - b||^2 + sum_k h_k(x_k),

with K equal-size blocks x_k in R^N and per-block nonsmooth terms h_k
(none, l1, group-l2 norm, or a box constraint).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import RANK_RTOL, as_matrix, sym_eig_extremes
from .rng import SplitMix64, derive_seed

_FEAS_RTOL = 1e-12


class ProblemFormatError(ValueError):
    """Problem-file violation; message starts with the offending field path."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass(frozen=True)
class BlockPartition:
    """K blocks of uniform size N; total dimension K * N."""

    block_count: int
    block_size: int

    def __post_init__(self):
        if self.block_count < 1 or self.block_size < 1:
            raise ValueError("block_count and block_size must be >= 1")

    @property
    def dimension(self) -> int:
        return self.block_count * self.block_size


@dataclass(frozen=True)
class NonsmoothTerm:
    """Per-block nonsmooth term: zero, l1, group_l2, or box indicator."""

    kind: str
    weight: float = 0.0
    lo: float = 0.0
    hi: float = 0.0

    def __post_init__(self):
        if self.kind not in ("zero", "l1", "group_l2", "box"):
            raise ValueError(f"unknown nonsmooth kind {self.kind!r}")
        if self.kind in ("l1", "group_l2") and self.weight < 0:
            raise ValueError("weight must be nonnegative")
        if self.kind == "box" and self.lo > self.hi:
            raise ValueError("box requires lo <= hi")

    @staticmethod
    def zero() -> "NonsmoothTerm":
        return NonsmoothTerm("zero")

    @staticmethod
    def l1(weight: float) -> "NonsmoothTerm":
        return NonsmoothTerm("l1", weight=weight)

    @staticmethod
    def group_l2(weight: float) -> "NonsmoothTerm":
        return NonsmoothTerm("group_l2", weight=weight)

    @staticmethod
    def box(lo: float, hi: float) -> "NonsmoothTerm":
        return NonsmoothTerm("box", lo=lo, hi=hi)


def nonsmooth_value(term: NonsmoothTerm, v: np.ndarray) -> float:
    """h(v); +inf outside a box (with a tiny relative feasibility band)."""
    v = np.asarray(v, dtype=float)
    if term.kind == "zero":
        return 0.0
    if term.kind == "l1":
        return term.weight * float(np.abs(v).sum())
    if term.kind == "group_l2":
        return term.weight * float(np.linalg.norm(v))
    slack = _FEAS_RTOL * max(1.0, abs(term.lo), abs(term.hi))
    if np.all(v >= term.lo - slack) and np.all(v <= term.hi + slack):
        return 0.0
    return math.inf


def prox(term: NonsmoothTerm, v: np.ndarray, step: float) -> np.ndarray:
    """Exact minimizer of h(u) + ||u - v||^2 / (2 step)."""
    if step <= 0:
        raise ValueError("step must be positive")
    v = np.asarray(v, dtype=float)
    if term.kind == "zero":
        return v.copy()
    if term.kind == "l1":
        threshold = term.weight * step
        return np.sign(v) * np.maximum(np.abs(v) - threshold, 0.0)
    if term.kind == "group_l2":
        norm = float(np.linalg.norm(v))
        shrink = term.weight * step
        if norm <= shrink:
            return np.zeros_like(v)
        return (1.0 - shrink / norm) * v
    return np.clip(v, term.lo, term.hi)


def is_feasible(term: NonsmoothTerm, v: np.ndarray) -> bool:
    return nonsmooth_value(term, v) < math.inf


@dataclass(frozen=True)
class CompositeQuadraticProblem:
    """1/2 ||sum_k A_k x_k - b||^2 + sum_k h_k(x_k) over K blocks of size N."""

    partition: BlockPartition
    a_blocks: tuple
    b: np.ndarray
    h: tuple

    def __post_init__(self):
        k = self.partition.block_count
        n = self.partition.block_size
        if len(self.a_blocks) != k:
            raise ValueError(f"expected {k} blocks, got {len(self.a_blocks)}")
        blocks = []
        rows = None
        for i, a in enumerate(self.a_blocks):
            a = as_matrix(a, f"a_blocks[{i}]")
            if rows is None:
                rows = a.shape[0]
            if a.shape != (rows, n):
                raise ValueError(
                    f"a_blocks[{i}] has shape {a.shape}, expected ({rows}, {n})")
            a.flags.writeable = False
            blocks.append(a)
        b = np.asarray(self.b, dtype=float).reshape(-1)
        if b.shape[0] != rows:
            raise ValueError(f"b has length {b.shape[0]}, expected {rows}")
        if not np.isfinite(b).all():
            raise ValueError("b contains non-finite entries")
        b.flags.writeable = False
        if len(self.h) != k:
            raise ValueError(f"expected {k} nonsmooth terms, got {len(self.h)}")
        object.__setattr__(self, "a_blocks", tuple(blocks))
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "h", tuple(self.h))
        full = np.hstack(blocks)
        full.flags.writeable = False
        object.__setattr__(self, "_full", full)

    @property
    def rows(self) -> int:
        return self.b.shape[0]

    def full_matrix(self) -> np.ndarray:
        """Horizontal concatenation [A_1, ..., A_K]."""
        return self._full

    def block_slice(self, k: int) -> slice:
        n = self.partition.block_size
        return slice(k * n, (k + 1) * n)

    def block_of(self, x: np.ndarray, k: int) -> np.ndarray:
        return np.asarray(x, dtype=float)[self.block_slice(k)]

    def residual(self, x: np.ndarray) -> np.ndarray:
        return self._full @ np.asarray(x, dtype=float) - self.b

    def is_smooth(self) -> bool:
        return all(term.kind == "zero" for term in self.h)


def _check_dimension(p: CompositeQuadraticProblem, x) -> np.ndarray:
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != p.partition.dimension:
        raise ValueError(
            f"x has length {x.shape[0]}, expected {p.partition.dimension}")
    return x


def smooth_value(p: CompositeQuadraticProblem, x) -> float:
    x = _check_dimension(p, x)
    r = p.residual(x)
    return 0.5 * float(r @ r)


def nonsmooth_total(p: CompositeQuadraticProblem, x) -> float:
    x = _check_dimension(p, x)
    total = 0.0
    for k, term in enumerate(p.h):
        total += nonsmooth_value(term, p.block_of(x, k))
        if total == math.inf:
            return math.inf
    return total

def eval_objective(p: CompositeQuadraticProblem, x) -> float:
    """Composite value; +inf sentinel when x violates a box constraint."""
    ns = nonsmooth_total(p, x)
    if ns == math.inf:
        return math.inf
    return smooth_value(p, x) + ns


def block_gradient(p: CompositeQuadraticProblem, k: int, x) -> np.ndarray:
    """Gradient of the smooth part w.r.t. block k: A_k^T (A x - b)."""
    if not 0 <= k < p.partition.block_count:
        raise ValueError(f"block index {k} out of range")
    x = _check_dimension(p, x)
    return p.a_blocks[k].T @ p.residual(x)


@dataclass(frozen=True)
class SmoothProblemOracle:
    """Smooth convex objective over scalar coordinates with Lipschitz data.

    ``hessian`` is set when the Hessian is constant (quadratics); then
    ``hessian_entry_bounds`` holds exact |H_ij| bounds.
    """

    dimension: int
    value: "callable"
    gradient: "callable"
    lipschitz_global: float
    lipschitz_coordinate: np.ndarray
    hessian: np.ndarray | None = None
    hessian_entry_bounds: np.ndarray | None = None
    optimum: np.ndarray | None = None

    def __post_init__(self):
        lk = np.asarray(self.lipschitz_coordinate, dtype=float).reshape(-1)
        if lk.shape[0] != self.dimension:
            raise ValueError("lipschitz_coordinate length must equal dimension")
        if np.any(lk <= 0) or self.lipschitz_global <= 0:
            raise ValueError("Lipschitz constants must be positive")
        if np.any(lk > self.lipschitz_global * (1 + 1e-12)):
            raise ValueError("coordinate constants must not exceed the global one")
        lk.flags.writeable = False
        object.__setattr__(self, "lipschitz_coordinate", lk)
        if self.hessian_entry_bounds is not None:
            bounds = np.asarray(self.hessian_entry_bounds, dtype=float)
            cross = np.sqrt(np.outer(lk, lk))
            if np.any(bounds > cross * (1 + 1e-12)):
                raise ValueError(
                    "hessian_entry_bounds must satisfy L_ij <= sqrt(L_i L_j)")

    def coordinate_gradient(self, k: int, x: np.ndarray) -> float:
        return float(self.gradient(x)[k])


@dataclass(frozen=True)
class ProblemConstants:
    """Lipschitz and rank constants driving stepsizes and bound formulas."""

    block_count: int
    block_size: int
    L: float
    L_k: np.ndarray
    L_max: float
    L_min: float
    sigma_k: np.ndarray | None = None
    gamma_k: np.ndarray | None = None
    sigma_min: float = 0.0
    gamma_min: float = 0.0
    rank_case: str = "unknown"

    @property
    def total_dimension(self) -> int:
        return self.block_count * self.block_size


def compute_constants(p: CompositeQuadraticProblem) -> ProblemConstants:
    """Extreme-eigenvalue constants of the quadratic part.

    L = lambda_max(A^T A); per block L_k = lambda_max(A_k^T A_k),
    sigma_k^2 = lambda_min(A_k^T A_k), gamma_k^2 = lambda_min(A_k A_k^T).
    The rank case is classified with the relative threshold RANK_RTOL.
    """
    k_count = p.partition.block_count
    full = p.full_matrix()
    _, l_global = sym_eig_extremes(full.T @ full)
    l_k = np.empty(k_count)
    sigma_k = np.empty(k_count)
    gamma_k = np.empty(k_count)
    col_rank_ok = True
    row_rank_ok = True
    for k in range(k_count):
        a = p.a_blocks[k]
        low_c, high = sym_eig_extremes(a.T @ a)
        low_r, _ = sym_eig_extremes(a @ a.T)
        l_k[k] = high
        smax = math.sqrt(max(high, 0.0))
        sigma_k[k] = math.sqrt(max(low_c, 0.0))
        gamma_k[k] = math.sqrt(max(low_r, 0.0))
        col_rank_ok = col_rank_ok and sigma_k[k] > RANK_RTOL * smax and smax > 0
        row_rank_ok = row_rank_ok and gamma_k[k] > RANK_RTOL * smax and smax > 0
    if col_rank_ok:
        rank_case = "full_column"
    elif row_rank_ok:
        rank_case = "full_row"
    else:
        rank_case = "neither"
    l_max = float(l_k.max())
    l_min = float(l_k.min())
    return ProblemConstants(
        block_count=k_count,
        block_size=p.partition.block_size,
        L=max(float(l_global), l_max),
        L_k=l_k,
        L_max=l_max,
        L_min=l_min,
        sigma_k=sigma_k,
        gamma_k=gamma_k,
        sigma_min=float(sigma_k.min()),
        gamma_min=float(gamma_k.min()),
        rank_case=rank_case,
    )


def constants_from_oracle(o: SmoothProblemOracle) -> ProblemConstants:
    lk = np.asarray(o.lipschitz_coordinate, dtype=float)
    return ProblemConstants(
        block_count=o.dimension,
        block_size=1,
        L=float(o.lipschitz_global),
        L_k=lk,
        L_max=float(lk.max()),
        L_min=float(lk.min()),
    )


# ---------------------------------------------------------------------------
# Named instances

def make_table1_diagonal(block_count: int, lipschitz: float) -> SmoothProblemOracle:
    """Separable quadratic (L/2) sum_i x_i^2: block-diagonal Hessian, L_k = L."""
    if block_count < 1 or lipschitz <= 0:
        raise ValueError("need block_count >= 1 and lipschitz > 0")
    k, lip = block_count, float(lipschitz)
    return SmoothProblemOracle(
        dimension=k,
        value=lambda x: 0.5 * lip * float(np.asarray(x, dtype=float) @ np.asarray(x, dtype=float)),
        gradient=lambda x: lip * np.asarray(x, dtype=float),
        lipschitz_global=lip,
        lipschitz_coordinate=np.full(k, lip),
        hessian=lip * np.eye(k),
        hessian_entry_bounds=lip * np.eye(k),
        optimum=np.zeros(k),
    )


def make_table1_full(block_count: int, lipschitz: float) -> SmoothProblemOracle:
    """Fully coupled quadratic (L/(2K)) (sum_i x_i)^2: rank-one Hessian with
    spectral norm L and L_k = L/K."""
    if block_count < 1 or lipschitz <= 0:
        raise ValueError("need block_count >= 1 and lipschitz > 0")
    k, lip = block_count, float(lipschitz)
    coef = lip / k

    def value(x):
        s = float(np.asarray(x, dtype=float).sum())
        return 0.5 * coef * s * s

    def gradient(x):
        s = float(np.asarray(x, dtype=float).sum())
        return np.full(k, coef * s)

    hessian = np.full((k, k), coef)
    return SmoothProblemOracle(
        dimension=k,
        value=value,
        gradient=gradient,
        lipschitz_global=lip,
        lipschitz_coordinate=np.full(k, coef),
        hessian=hessian,
        hessian_entry_bounds=np.abs(hessian),
        optimum=np.zeros(k),
    )


def make_table1_diagonal_qp(block_count: int, lipschitz: float) -> CompositeQuadraticProblem:
    """Quadratic-problem twin of make_table1_diagonal: A = sqrt(L) I, b = 0."""
    k = block_count
    root = math.sqrt(lipschitz)
    eye = np.eye(k)
    return CompositeQuadraticProblem(
        partition=BlockPartition(k, 1),
        a_blocks=tuple(root * eye[:, [i]] for i in range(k)),
        b=np.zeros(k),
        h=tuple(NonsmoothTerm.zero() for _ in range(k)),
    )


def make_table1_full_qp(block_count: int, lipschitz: float) -> CompositeQuadraticProblem:
    """Quadratic-problem twin of make_table1_full: A = sqrt(L/K) * ones(1, K)."""
    k = block_count
    root = math.sqrt(lipschitz / k)
    return CompositeQuadraticProblem(
        partition=BlockPartition(k, 1),
        a_blocks=tuple(np.array([[root]]) for _ in range(k)),
        b=np.zeros(1),
        h=tuple(NonsmoothTerm.zero() for _ in range(k)),
    )


def toeplitz_matrix(block_count: int) -> np.ndarray:
    """Square tridiagonal all-ones pattern (1 on diagonal and both
    off-diagonals)."""
    k = block_count
    a = np.zeros((k, k))
    for i in range(k):
        a[i, i] = 1.0
        if i > 0:
            a[i, i - 1] = 1.0
        if i < k - 1:
            a[i, i + 1] = 1.0
    return a


def toeplitz_start(block_count: int) -> np.ndarray:
    """Adversarial starting point (1, 1/8, 3/4, 1, ..., 1)."""
    x0 = np.ones(block_count)
    x0[1] = 1.0 / 8.0
    x0[2] = 3.0 / 4.0
    return x0


def make_toeplitz_instance(block_count: int):
    """Scalar-block instance whose objective equals ||T x||^2 for the
    tridiagonal pattern T.

    The canonical smooth part is 1/2 ||A x||^2, so the stored blocks are the
    columns of T scaled by sqrt(2); block minimizers are unaffected by the
    scaling and f reproduces ||T x||^2 exactly.  Returns (problem, x0).
    """
    if block_count < 3:
        raise ValueError("toeplitz instance requires block_count >= 3")
    k = block_count
    pattern = toeplitz_matrix(k)
    scale = math.sqrt(2.0)
    problem = CompositeQuadraticProblem(
        partition=BlockPartition(k, 1),
        a_blocks=tuple(scale * pattern[:, [i]] for i in range(k)),
        b=np.zeros(k),
        h=tuple(NonsmoothTerm.zero() for _ in range(k)),
    )
    return problem, toeplitz_start(k)


def make_lasso_instance(rows: int, block_count: int, weight: float, seed: int):
    """Seeded Gaussian l1-regularized least squares with scalar blocks.

    Entries of A and b are standard normals from the package PRNG; with
    rows >= block_count the design is full column rank almost surely.
    Returns (problem, x0) with x0 = 0.
    """
    if rows < 1 or block_count < 1:
        raise ValueError("rows and block_count must be >= 1")
    gen = SplitMix64(derive_seed(seed, 0x1A550))
    a = gen.normal_matrix(rows, block_count)
    b = gen.normal_vector(rows)
    problem = CompositeQuadraticProblem(
        partition=BlockPartition(block_count, 1),
        a_blocks=tuple(a[:, [i]] for i in range(block_count)),
        b=b,
        h=tuple(NonsmoothTerm.l1(weight) for _ in range(block_count)),
    )
    return problem, np.zeros(block_count)


def oracle_from_quadratic(p: CompositeQuadraticProblem) -> SmoothProblemOracle:
    """Smooth-oracle view of a scalar-block problem with no nonsmooth terms."""
    if not p.is_smooth():
        raise ValueError("oracle view requires all nonsmooth terms to be zero")
    if p.partition.block_size != 1:
        raise ValueError("oracle view requires scalar blocks")
    full = p.full_matrix()
    constants = compute_constants(p)
    hessian = full.T @ full
    b = p.b

    def value(x):
        r = full @ np.asarray(x, dtype=float) - b
        return 0.5 * float(r @ r)

    def gradient(x):
        return full.T @ (full @ np.asarray(x, dtype=float) - b)

    return SmoothProblemOracle(
        dimension=p.partition.block_count,
        value=value,
        gradient=gradient,
        lipschitz_global=constants.L,
        lipschitz_coordinate=constants.L_k,
        hessian=hessian,
        hessian_entry_bounds=np.abs(hessian),
    )


# ---------------------------------------------------------------------------
# Problem files (JSON syntax)

@dataclass
class LoadedProblem:
    """Problem bundle produced by load_problem."""

    kind: str
    x0: np.ndarray
    problem: CompositeQuadraticProblem | None = None
    oracle: SmoothProblemOracle | None = None
    seed: int | None = None
    params: dict = field(default_factory=dict)


def _require(spec: dict, path: str, key: str, types, check=None, describe=""):
    if key not in spec:
        raise ProblemFormatError(f"{path}.{key}", "missing required field")
    value = spec[key]
    if isinstance(value, bool) or not isinstance(value, types):
        raise ProblemFormatError(f"{path}.{key}", f"expected {describe or types}")
    if check is not None and not check(value):
        raise ProblemFormatError(f"{path}.{key}", f"invalid value {value!r}")
    return value


def _load_terms(raw, block_count: int, block_size: int, path: str):
    if not isinstance(raw, list) or len(raw) != block_count:
        raise ProblemFormatError(path, f"expected a list of {block_count} term specs")
    terms = []
    for i, entry in enumerate(raw):
        where = f"{path}[{i}]"
        if not isinstance(entry, dict):
            raise ProblemFormatError(where, "expected an object")
        kind = _require(entry, where, "kind", str, describe="a string")
        try:
            if kind == "zero":
                terms.append(NonsmoothTerm.zero())
            elif kind in ("l1", "group_l2"):
                weight = _require(entry, where, "weight", (int, float),
                                  check=lambda v: v >= 0 and math.isfinite(v),
                                  describe="a nonnegative number")
                terms.append(NonsmoothTerm(kind, weight=float(weight)))
            elif kind == "box":
                lo = _require(entry, where, "lo", (int, float),
                              check=math.isfinite, describe="a finite number")
                hi = _require(entry, where, "hi", (int, float),
                              check=math.isfinite, describe="a finite number")
                terms.append(NonsmoothTerm.box(float(lo), float(hi)))
            else:
                raise ProblemFormatError(f"{where}.kind", f"unknown kind {kind!r}")
        except ValueError as exc:
            if isinstance(exc, ProblemFormatError):
                raise
            raise ProblemFormatError(where, str(exc)) from exc
    return tuple(terms)


def load_problem(source) -> LoadedProblem:
    """Build a problem from a JSON file path, JSON text, or a plain dict.

    Recognized kinds: "lasso", "toeplitz", "table1_diag", "table1_full",
    "explicit".  The first invariant violation is reported with the path of
    the offending field.
    """
    if isinstance(source, dict):
        spec = source
    else:
        text = source
        if hasattr(source, "read"):
            text = source.read()
        else:
            text = str(source)
            if not text.lstrip().startswith("{"):
                try:
                    with open(text, "r", encoding="utf-8") as fh:
                        text = fh.read()
                except OSError as exc:
                    raise ProblemFormatError("$", f"cannot read problem file: {exc}")
        try:
            spec = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ProblemFormatError("$", f"not valid JSON ({exc})") from exc
    if not isinstance(spec, dict):
        raise ProblemFormatError("$", "top level must be an object")
    kind = _require(spec, "$", "kind", str, describe="a string")
    seed = spec.get("seed")
    if seed is not None and (isinstance(seed, bool) or not isinstance(seed, int)):
        raise ProblemFormatError("$.seed", "expected an integer")

    if kind == "lasso":
        rows = _require(spec, "$", "rows", int, lambda v: v >= 1, "a positive integer")
        k = _require(spec, "$", "block_count", int, lambda v: v >= 1, "a positive integer")
        weight = _require(spec, "$", "weight", (int, float),
                          check=lambda v: v >= 0 and math.isfinite(v),
                          describe="a nonnegative number")
        problem, x0 = make_lasso_instance(rows, k, float(weight), seed or 0)
        return LoadedProblem(kind=kind, x0=x0, problem=problem, seed=seed,
                             params={"rows": rows, "block_count": k, "weight": weight})

    if kind == "toeplitz":
        k = _require(spec, "$", "block_count", int, lambda v: v >= 3,
                     "an integer >= 3")
        problem, x0 = make_toeplitz_instance(k)
        return LoadedProblem(kind=kind, x0=x0, problem=problem, seed=seed,
                             params={"block_count": k})

    if kind in ("table1_diag", "table1_full"):
        k = _require(spec, "$", "block_count", int, lambda v: v >= 1, "a positive integer")
        lip = _require(spec, "$", "lipschitz", (int, float),
                       check=lambda v: v > 0 and math.isfinite(v),
                       describe="a positive number")
        if kind == "table1_diag":
            oracle = make_table1_diagonal(k, float(lip))
            problem = make_table1_diagonal_qp(k, float(lip))
        else:
            oracle = make_table1_full(k, float(lip))
            problem = make_table1_full_qp(k, float(lip))
        x0 = np.ones(k)
        return LoadedProblem(kind=kind, x0=x0, problem=problem, oracle=oracle,
                             seed=seed, params={"block_count": k, "lipschitz": lip})

    if kind == "explicit":
        k = _require(spec, "$", "block_count", int, lambda v: v >= 1, "a positive integer")
        n = _require(spec, "$", "block_size", int, lambda v: v >= 1, "a positive integer")
        raw_blocks = _require(spec, "$", "a_blocks", list, describe="a list")
        if len(raw_blocks) != k:
            raise ProblemFormatError("$.a_blocks", f"expected {k} blocks, got {len(raw_blocks)}")
        blocks = []
        for i, rows in enumerate(raw_blocks):
            arr = np.asarray(rows, dtype=float)
            if arr.ndim != 2 or arr.shape[1] != n:
                raise ProblemFormatError(
                    f"$.a_blocks[{i}]", f"expected a matrix with {n} columns")
            if not np.isfinite(arr).all():
                raise ProblemFormatError(f"$.a_blocks[{i}]", "non-finite entry")
            blocks.append(arr)
        b = np.asarray(_require(spec, "$", "b", list, describe="a list"), dtype=float)
        if b.ndim != 1 or not np.isfinite(b).all():
            raise ProblemFormatError("$.b", "expected a flat list of finite numbers")
        terms = _load_terms(spec.get("h", [{"kind": "zero"}] * k), k, n, "$.h")
        try:
            problem = CompositeQuadraticProblem(
                partition=BlockPartition(k, n),
                a_blocks=tuple(blocks), b=b, h=terms)
        except ValueError as exc:
            raise ProblemFormatError("$", str(exc)) from exc
        x0_raw = spec.get("x0")
        if x0_raw is None:
            x0 = np.zeros(k * n)
        else:
            x0 = np.asarray(x0_raw, dtype=float)
            if x0.shape != (k * n,):
                raise ProblemFormatError("$.x0", f"expected length {k * n}")
        return LoadedProblem(kind=kind, x0=x0, problem=problem, seed=seed)

    raise ProblemFormatError("$.kind", f"unknown kind {kind!r}")
