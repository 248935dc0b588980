"""Built-in instance battery and the verification suites run over it.

Instances, reference optima and trajectories are cached per process, so
the lemma suite, the envelope suite and the acceptance tests share the
same runs.  Everything is keyed by plain strings/ints and derived from
fixed seeds, so repeated invocations are identical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cache

import numpy as np

from .bounds import BoundSpec, R0Estimate, beta_estimate, evaluate, r0_upper_estimate
from .problems import (
    BlockPartition,
    CompositeQuadraticProblem,
    NonsmoothTerm,
    ProblemConstants,
    SmoothProblemOracle,
    compute_constants,
    constants_from_oracle,
    eval_objective,
    make_lasso_instance,
    make_table1_diagonal,
    make_table1_diagonal_qp,
    make_table1_full,
    make_table1_full_qp,
    make_toeplitz_instance,
)
from .rng import SplitMix64, derive_seed
from .solvers import (
    BlockOrder,
    ReferenceOptimum,
    SolverRun,
    StepsizePolicy,
    Trajectory,
    reference_optimum,
    run_bcd_exact,
    run_bcpg,
    run_cgd,
    run_gd,
)
from .verify import (
    CheckReport,
    check_costtogo_bcd,
    check_costtogo_bcpg,
    check_descent_bcd,
    check_descent_bcpg,
    check_descent_cgd,
    check_envelope,
    check_truncation_constant,
    run_tightness_case,
)

LASSO_COUNT = 10
LASSO_ROWS = 30
LASSO_BLOCKS = 20
LASSO_WEIGHT = 0.1
LASSO_BASE_SEED = 7_000
TOEPLITZ_SIZES = (5, 10, 25, 50)
TABLE1_SIZES = (10, 100)
TRUNCATION_SIZES = (2, 4, 8, 16, 32, 64)
TRUNCATION_SAMPLES = 100


@dataclass(frozen=True)
class Instance:
    """A battery member: problem (and oracle view when smooth/scalar),
    start point, constants, reference optimum and level-set radius."""

    name: str
    x0: np.ndarray
    constants: ProblemConstants
    reference: ReferenceOptimum
    r0: R0Estimate
    problem: CompositeQuadraticProblem | None = None
    oracle: SmoothProblemOracle | None = None
    tags: tuple = ()

    @property
    def delta0(self) -> float:
        if self.problem is not None:
            f0 = eval_objective(self.problem, self.x0)
        else:
            f0 = float(self.oracle.value(self.x0))
        return max(0.0, f0 - self.reference.f_star)

    def gd_radius(self) -> float:
        """||x0 - x*||: a sound radius for the gradient-descent envelope."""
        return float(np.linalg.norm(self.x0 - self.reference.x_star))


def _finish(name, problem, oracle, x0, tags, trajectory_hint=None) -> Instance:
    constants = compute_constants(problem) if problem is not None \
        else constants_from_oracle(oracle)
    target = problem if problem is not None else oracle
    reference = reference_optimum(target, constants=constants if problem is not None else None)
    r0 = r0_upper_estimate(target, x0, reference.x_star,
                           f_star=reference.f_star, trajectory=trajectory_hint)
    return Instance(name=name, x0=x0, constants=constants, reference=reference,
                    r0=r0, problem=problem, oracle=oracle, tags=tuple(tags))


@cache
def get_instance(name: str) -> Instance:
    if name.startswith("lasso_"):
        index = int(name.split("_")[1])
        problem, x0 = make_lasso_instance(LASSO_ROWS, LASSO_BLOCKS, LASSO_WEIGHT,
                                          LASSO_BASE_SEED + index)
        return _finish(name, problem, None, x0, ("lasso", "scalar"))

    if name.startswith("toeplitz_K"):
        k = int(name.split("K")[1])
        problem, x0 = make_toeplitz_instance(k)
        return _finish(name, problem, None, x0, ("toeplitz", "smooth", "scalar"))

    if name.startswith("table1_"):
        _, flavor, ksuffix = name.split("_")
        k = int(ksuffix[1:])
        if flavor == "diag":
            oracle = make_table1_diagonal(k, 2.0)
            problem = make_table1_diagonal_qp(k, 2.0)
        else:
            oracle = make_table1_full(k, 2.0)
            problem = make_table1_full_qp(k, 2.0)
        x0 = np.ones(k)
        instance = _finish(name, problem, None, x0, ("table1", flavor, "smooth", "scalar"))
        return Instance(name=instance.name, x0=instance.x0,
                        constants=instance.constants, reference=instance.reference,
                        r0=instance.r0, problem=problem, oracle=oracle,
                        tags=instance.tags)

    if name == "thm2_case1":
        gen = SplitMix64(derive_seed(0xCA5E, 1))
        k, n, m = 5, 2, 16
        blocks = tuple(gen.normal_matrix(m, n) for _ in range(k))
        problem = CompositeQuadraticProblem(
            partition=BlockPartition(k, n), a_blocks=blocks,
            b=gen.normal_vector(m),
            h=tuple(NonsmoothTerm.zero() for _ in range(k)))
        x0 = gen.normal_vector(k * n)
        instance = _finish(name, problem, None, x0, ("thm2", "case1", "smooth"))
        if instance.constants.rank_case != "full_column":
            raise RuntimeError("case1 seed failed to produce full column rank")
        return instance

    if name == "thm2_case2":
        gen = SplitMix64(derive_seed(0xCA5E, 2))
        k, n, m = 5, 3, 2
        blocks = tuple(gen.normal_matrix(m, n) for _ in range(k))
        problem = CompositeQuadraticProblem(
            partition=BlockPartition(k, n), a_blocks=blocks,
            b=gen.normal_vector(m),
            h=tuple(NonsmoothTerm.box(-1.0, 1.0) for _ in range(k)))
        x0 = np.zeros(k * n)
        instance = _finish(name, problem, None, x0, ("thm2", "case2"))
        if instance.constants.rank_case != "full_row":
            raise RuntimeError("case2 seed failed to produce full row rank")
        return instance

    if name in ("thm2_case3_box", "thm2_case3_free"):
        gen = SplitMix64(derive_seed(0xCA5E, 3))
        k, n, m = 5, 2, 3
        blocks = tuple(np.outer(gen.normal_vector(m), gen.normal_vector(n))
                       for _ in range(k))
        b = gen.normal_vector(m)
        free_x0 = gen.normal_vector(k * n)
        if name.endswith("box"):
            problem = CompositeQuadraticProblem(
                partition=BlockPartition(k, n), a_blocks=blocks, b=b,
                h=tuple(NonsmoothTerm.box(-1.0, 1.0) for _ in range(k)))
            x0 = np.zeros(k * n)
            tags = ("thm2", "case3", "certified")
        else:
            problem = CompositeQuadraticProblem(
                partition=BlockPartition(k, n), a_blocks=blocks, b=b,
                h=tuple(NonsmoothTerm.zero() for _ in range(k)))
            x0 = free_x0
            tags = ("thm2", "case3", "heuristic", "smooth")
        instance = _finish(name, problem, None, x0, tags)
        if instance.constants.rank_case != "neither":
            raise RuntimeError("case3 seed failed to produce rank deficiency")
        return instance

    raise KeyError(f"unknown battery instance {name!r}")


def lasso_names() -> list[str]:
    return [f"lasso_{i:02d}" for i in range(LASSO_COUNT)]


def toeplitz_names() -> list[str]:
    return [f"toeplitz_K{k}" for k in TOEPLITZ_SIZES]


def table1_names() -> list[str]:
    return [f"table1_{flavor}_K{k}" for flavor in ("diag", "full")
            for k in TABLE1_SIZES]


def thm2_names() -> list[str]:
    return ["thm2_case1", "thm2_case2", "thm2_case3_box", "thm2_case3_free"]


def qp_battery_names() -> list[str]:
    """Instances exercised by the block solvers (composite problems)."""
    return (lasso_names() + toeplitz_names() + thm2_names()
            + ["table1_diag_K10", "table1_full_K10"])


def smooth_battery_names() -> list[str]:
    """Instances with a smooth objective (gradient-descent targets)."""
    return (toeplitz_names() + table1_names()
            + ["thm2_case1", "thm2_case3_free"])


def _order(order_kind: str, order_seed: int) -> BlockOrder:
    if order_kind == "cyclic":
        return BlockOrder.cyclic()
    if order_kind == "random_permutation":
        return BlockOrder.random_permutation(order_seed)
    return BlockOrder.sampled_with_replacement(order_seed)


@cache
def get_trajectory(name: str, algorithm: str, policy_kind: str,
                   order_kind: str = "cyclic", order_seed: int = 0,
                   cycles: int = 100) -> Trajectory:
    instance = get_instance(name)
    policy = StepsizePolicy(policy_kind)
    run = SolverRun(algorithm=algorithm, order=_order(order_kind, order_seed),
                    stepsizes=policy, max_cycles=cycles)
    if algorithm == "bcpg":
        t = run_bcpg(instance.problem, run, instance.x0,
                     constants=instance.constants)
    elif algorithm == "exact_bcd":
        t = run_bcd_exact(instance.problem, run, instance.x0,
                          constants=instance.constants)
    elif algorithm == "cgd":
        t = run_cgd(instance.oracle, run, instance.x0)
    elif algorithm == "gd":
        target = instance.oracle if instance.oracle is not None else instance.problem
        t = run_gd(target, run, instance.x0)
    else:
        raise ValueError(algorithm)
    return t.with_gap(instance.reference.f_star)


def _certified(instance: Instance) -> bool:
    return instance.r0.certified and instance.reference.certified


def _bound_spec(instance: Instance, kind: str, traj: Trajectory,
                beta: float | None = None, r0_value: float | None = None) -> BoundSpec:
    return BoundSpec(
        kind=kind,
        constants=instance.constants,
        r0_upper=instance.r0.value if r0_value is None else r0_value,
        delta0=instance.delta0,
        beta=beta,
        p_max=float(traj.stepsizes.max()),
        p_min=float(traj.stepsizes.min()),
    )


# ---------------------------------------------------------------------------
# Suites

def suite_lemmas(order_kind: str = "cyclic", order_seed: int = 0) -> list[CheckReport]:
    """Per-cycle descent and cost-to-go inequalities over the battery."""
    reports = []
    suffix = "" if order_kind == "cyclic" else f"[{order_kind}:{order_seed}]"
    for name in qp_battery_names():
        instance = get_instance(name)
        cycles = 300 if name.startswith(("lasso", "thm2")) else 100
        advisory = not _certified(instance)
        for policy in ("block_lk", "global_l"):
            t_bcpg = get_trajectory(name, "bcpg", policy, order_kind, order_seed, cycles)
            reports.append(check_descent_bcpg(
                t_bcpg, instance.problem,
                name=f"descent_bcpg:{name}:{policy}{suffix}"))
            reports.append(check_costtogo_bcpg(
                t_bcpg, instance.problem, instance.r0.value,
                constants=instance.constants, advisory=advisory,
                name=f"costtogo_bcpg:{name}:{policy}{suffix}"))
        t_bcd = get_trajectory(name, "exact_bcd", "block_lk", order_kind, order_seed, cycles)
        reports.append(check_descent_bcd(t_bcd, instance.problem,
                                         name=f"descent_bcd:{name}{suffix}"))
        reports.append(check_costtogo_bcd(
            t_bcd, instance.problem, instance.r0.value,
            constants=instance.constants, advisory=advisory,
            name=f"costtogo_bcd:{name}{suffix}"))
    for name in table1_names():
        instance = get_instance(name)
        cycles = 200 if instance.constants.block_count <= 10 else 100
        beta = beta_estimate(instance.oracle).estimate
        for policy in ("global_l", "block_lk"):
            t = get_trajectory(name, "cgd", policy, order_kind, order_seed, cycles)
            reports.extend(check_descent_cgd(
                t, instance.oracle, beta,
                name=f"descent_cgd:{name}:{policy}{suffix}"))
    return reports


def suite_envelopes(order_kind: str = "cyclic", order_seed: int = 0) -> list[CheckReport]:
    """Gap-versus-bound envelope checks for every theorem-backed pairing."""
    reports = []
    suffix = "" if order_kind == "cyclic" else f"[{order_kind}:{order_seed}]"
    for name in lasso_names():
        instance = get_instance(name)
        certified = _certified(instance)
        for policy, kind in (("global_l", "thm1_uniform"),
                             ("block_lk", "thm1_blockwise")):
            t = get_trajectory(name, "bcpg", policy, order_kind, order_seed, 300)
            reports.append(check_envelope(
                t, _bound_spec(instance, kind, t),
                name=f"envelope_{kind}:{name}:{policy}{suffix}",
                r0_certified=certified))
            reports.append(check_envelope(
                t, _bound_spec(instance, "prior_cyclic", t),
                name=f"envelope_prior_cyclic:{name}:{policy}{suffix}",
                r0_certified=False))
        t_bcd = get_trajectory(name, "exact_bcd", "block_lk", order_kind, order_seed, 300)
        reports.append(check_envelope(
            t_bcd, _bound_spec(instance, "thm2_scalar", t_bcd),
            name=f"envelope_thm2_scalar:{name}{suffix}",
            r0_certified=certified))

    case_bound = {"thm2_case1": "thm2_case1", "thm2_case2": "thm2_case2",
                  "thm2_case3_box": "thm2_case3", "thm2_case3_free": "thm2_case3"}
    for name, kind in case_bound.items():
        instance = get_instance(name)
        t = get_trajectory(name, "exact_bcd", "block_lk", order_kind, order_seed, 300)
        reports.append(check_envelope(
            t, _bound_spec(instance, kind, t),
            name=f"envelope_{kind}:{name}{suffix}",
            r0_certified=_certified(instance)))

    for name in ("toeplitz_K10", "toeplitz_K25"):
        instance = get_instance(name)
        t = get_trajectory(name, "bcpg", "block_lk", order_kind, order_seed, 100)
        reports.append(check_envelope(
            t, _bound_spec(instance, "thm1_smooth", t),
            name=f"envelope_thm1_smooth:{name}{suffix}",
            r0_certified=_certified(instance)))

    for name in table1_names():
        instance = get_instance(name)
        beta = beta_estimate(instance.oracle).estimate
        cycles = 200 if instance.constants.block_count <= 10 else 100
        certified = _certified(instance)
        for policy in ("global_l", "block_lk"):
            t = get_trajectory(name, "cgd", policy, order_kind, order_seed, cycles)
            for kind in ("thm3", "coro1"):
                reports.append(check_envelope(
                    t, _bound_spec(instance, kind, t, beta=beta),
                    name=f"envelope_{kind}:{name}:{policy}{suffix}",
                    r0_certified=certified))

    reports.extend(suite_gd())
    reports.append(prior_ratio_report())
    return reports


def suite_gd() -> list[CheckReport]:
    """Gradient-descent baseline envelope on every smooth battery member.

    The radius is the exact initial distance ||x0 - x*||, which the descent
    argument certifies for gradient descent on its own.
    """
    reports = []
    for name in smooth_battery_names():
        instance = get_instance(name)
        t = get_trajectory(name, "gd", "block_lk", "cyclic", 0, 200)
        spec = _bound_spec(instance, "gd", t, r0_value=instance.gd_radius())
        reports.append(check_envelope(t, spec, name=f"envelope_gd:{name}"))
    return reports


def prior_ratio_report() -> CheckReport:
    """Informational ratio of the prior cyclic bound (leading constant 1)
    to the blockwise bound on the fully coupled scenario."""
    instance = get_instance("table1_full_K100")
    t = get_trajectory(instance.name, "bcpg", "block_lk", "cyclic", 0, 100)
    prior = _bound_spec(instance, "prior_cyclic", t)
    blockwise = _bound_spec(instance, "thm1_blockwise", t)
    r = 50
    ratio = evaluate(prior, r) / evaluate(blockwise, r)
    c = instance.constants
    log_sq = math.log(2.0 * c.block_size * c.block_count) ** 2
    factor = c.block_count / (6.0 * log_sq)
    return CheckReport(
        check_name="prior_vs_blockwise_ratio",
        cycles_checked=1,
        worst_violation=0.0,
        passed=True,
        advisory=True,
        notes=(f"at r={r}: prior/blockwise = {ratio:.3f}; "
               f"K/(6 log^2(2NK)) = {factor:.3f} "
               "(informational; prior constant unspecified)"),
    )


def suite_tightness(sizes=(5, 10, 25, 50)) -> list[CheckReport]:
    reports = []
    for k in sizes:
        reports.extend(run_tightness_case(k))
    return reports


def suite_truncation(seed: int = 7) -> list[CheckReport]:
    return [check_truncation_constant(TRUNCATION_SIZES, TRUNCATION_SAMPLES, seed)]


def suite_all(seed: int = 7) -> list[CheckReport]:
    reports = []
    reports.extend(suite_lemmas())
    reports.extend(suite_envelopes())
    reports.extend(suite_tightness())
    reports.extend(suite_truncation(seed))
    return reports


SUITES = {
    "all": lambda seed: suite_all(seed),
    "lemmas": lambda seed: suite_lemmas(),
    "envelopes": lambda seed: suite_envelopes(),
    "tightness": lambda seed: suite_tightness(),
    "truncation": suite_truncation,
}
