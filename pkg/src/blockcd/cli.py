"""Command-line harness.

Subcommands:

* ``run`` — execute the solver runs of a plan file, writing one trajectory
  CSV per run, a bound-curve CSV, and a summary of final gaps;
* ``verify`` — run a named verification suite over the built-in battery;
* ``bounds`` — compute problem constants and all applicable bound curves
  for a problem file;
* ``tightness`` — alias for ``verify --suite tightness``.

Plan files are JSON; the shape is documented in plan_schema.json shipped
next to this module.  Identical plan and seed produce byte-identical
output files.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .battery import SUITES
from .bounds import (
    BOUND_KINDS,
    BOUND_PAIRINGS,
    BoundSpec,
    InapplicableBound,
    beta_estimate,
    bound_report_csv,
    evaluate,
    r0_upper_estimate,
)
from .problems import (
    ProblemFormatError,
    compute_constants,
    constants_from_oracle,
    eval_objective,
    load_problem,
    oracle_from_quadratic,
)
from .rng import derive_seed
from .solvers import (
    BlockOrder,
    SolverRun,
    StepsizePolicy,
    reference_optimum,
    run_bcd_exact,
    run_bcpg,
    run_cgd,
    run_gd,
    trajectory_to_csv,
)
from .verify import all_asserted_pass, report_lines, reports_to_csv


class PlanError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")


def _load_plan(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            plan = json.load(fh)
    except OSError as exc:
        raise PlanError("$", f"cannot read plan: {exc}")
    except json.JSONDecodeError as exc:
        raise PlanError("$", f"not valid JSON ({exc})")
    if not isinstance(plan, dict):
        raise PlanError("$", "top level must be an object")
    return plan


def _parse_order(raw, path: str, global_seed: int) -> BlockOrder:
    if raw is None:
        return BlockOrder.cyclic()
    if not isinstance(raw, dict) or "kind" not in raw:
        raise PlanError(path, "expected an object with a 'kind' field")
    kind = raw["kind"]
    if kind == "cyclic":
        return BlockOrder.cyclic()
    if kind in ("random_permutation", "sampled_with_replacement"):
        seed = raw.get("seed")
        if seed is None:
            label = 1 if kind == "random_permutation" else 2
            seed = derive_seed(global_seed, label)
        elif isinstance(seed, bool) or not isinstance(seed, int):
            raise PlanError(f"{path}.seed", "expected an integer")
        return BlockOrder(kind, seed=seed)
    raise PlanError(f"{path}.kind", f"unknown order kind {kind!r}")


def _parse_stepsizes(raw, path: str) -> StepsizePolicy:
    if raw is None:
        return StepsizePolicy.block_lk()
    if not isinstance(raw, dict) or "kind" not in raw:
        raise PlanError(path, "expected an object with a 'kind' field")
    kind = raw["kind"]
    if kind in ("global_l", "block_lk"):
        return StepsizePolicy(kind)
    if kind == "fixed":
        values = raw.get("values")
        if not isinstance(values, list) or not values:
            raise PlanError(f"{path}.values", "fixed policy needs a value list")
        return StepsizePolicy.fixed(values)
    raise PlanError(f"{path}.kind", f"unknown stepsize kind {kind!r}")


def _parse_runs(plan: dict, global_seed: int) -> list[tuple[str, SolverRun]]:
    raw_runs = plan.get("runs")
    if not isinstance(raw_runs, list) or not raw_runs:
        raise PlanError("$.runs", "expected a nonempty list of run objects")
    runs = []
    labels = set()
    for i, raw in enumerate(raw_runs):
        path = f"$.runs[{i}]"
        if not isinstance(raw, dict):
            raise PlanError(path, "expected an object")
        algorithm = raw.get("algorithm")
        if algorithm not in ("exact_bcd", "bcpg", "cgd", "gd"):
            raise PlanError(f"{path}.algorithm",
                            f"expected one of exact_bcd/bcpg/cgd/gd, got {algorithm!r}")
        max_cycles = raw.get("max_cycles", 100)
        if isinstance(max_cycles, bool) or not isinstance(max_cycles, int) or max_cycles < 1:
            raise PlanError(f"{path}.max_cycles", "expected a positive integer")
        gap_tolerance = raw.get("gap_tolerance", 0.0)
        if not isinstance(gap_tolerance, (int, float)) or gap_tolerance < 0:
            raise PlanError(f"{path}.gap_tolerance", "expected a nonnegative number")
        label = raw.get("label", f"run{i}_{algorithm}")
        if not isinstance(label, str) or not label:
            raise PlanError(f"{path}.label", "expected a nonempty string")
        if label in labels:
            raise PlanError(f"{path}.label", f"duplicate label {label!r}")
        labels.add(label)
        run = SolverRun(
            algorithm=algorithm,
            order=_parse_order(raw.get("order"), f"{path}.order", global_seed),
            stepsizes=_parse_stepsizes(raw.get("stepsizes"), f"{path}.stepsizes"),
            max_cycles=max_cycles,
            gap_tolerance=float(gap_tolerance),
            record_intermediates=bool(raw.get("record_intermediates", False)),
        )
        runs.append((label, run))
    return runs


def _parse_bounds(plan: dict, runs) -> list[tuple[str, str, str | None, float]]:
    """(label, kind, against, c_prior) tuples with pairing validation."""
    raw_bounds = plan.get("bounds", [])
    if not isinstance(raw_bounds, list):
        raise PlanError("$.bounds", "expected a list")
    run_algorithms = dict(runs)
    out = []
    for i, raw in enumerate(raw_bounds):
        path = f"$.bounds[{i}]"
        if isinstance(raw, str):
            kind, against, c_prior = raw, None, 1.0
        elif isinstance(raw, dict):
            kind = raw.get("kind")
            against = raw.get("against")
            c_prior = raw.get("c_prior", 1.0)
        else:
            raise PlanError(path, "expected a kind string or an object")
        if kind not in BOUND_KINDS:
            raise PlanError(f"{path}.kind", f"unknown bound kind {kind!r}")
        if against is not None:
            if against not in run_algorithms:
                raise PlanError(f"{path}.against", f"no run labeled {against!r}")
            algorithm = run_algorithms[against].algorithm
            if algorithm not in BOUND_PAIRINGS[kind]:
                raise PlanError(
                    f"{path}.against",
                    f"bound {kind!r} applies to {BOUND_PAIRINGS[kind]}, but run "
                    f"{against!r} uses {algorithm!r}")
        label = kind if against is None else f"{kind}@{against}"
        if any(label == existing for existing, *_ in out):
            raise PlanError(path, f"duplicate bound entry {label!r}")
        out.append((label, kind, against, float(c_prior)))
    return out


def _execute_run(loaded, label: str, run: SolverRun, constants, reference):
    problem = loaded.problem
    if run.algorithm == "bcpg":
        t = run_bcpg(problem, run, loaded.x0, constants=constants,
                     f_star=reference.f_star)
    elif run.algorithm == "exact_bcd":
        t = run_bcd_exact(problem, run, loaded.x0, constants=constants,
                          f_star=reference.f_star)
    elif run.algorithm == "cgd":
        oracle = loaded.oracle
        if oracle is None:
            if problem is None or not problem.is_smooth() \
                    or problem.partition.block_size != 1:
                raise PlanError(f"$.runs[{label}]",
                                "cgd needs a smooth scalar-block problem")
            oracle = oracle_from_quadratic(problem)
        t = run_cgd(oracle, run, loaded.x0, f_star=reference.f_star)
    else:
        target = loaded.oracle if loaded.oracle is not None else problem
        t = run_gd(target, run, loaded.x0, f_star=reference.f_star)
    return t.with_gap(reference.f_star)


def cmd_run(plan_path: str, out_dir: str | None, seed: int | None) -> int:
    plan = _load_plan(plan_path)
    global_seed = seed if seed is not None else plan.get("seed", 0)
    if isinstance(global_seed, bool) or not isinstance(global_seed, int):
        raise PlanError("$.seed", "expected an integer")
    if "problem" not in plan:
        raise PlanError("$.problem", "missing required field")
    problem_spec = plan["problem"]
    if not isinstance(problem_spec, (dict, str)):
        raise PlanError("$.problem", "expected an object or a problem-file path")
    try:
        loaded = load_problem(problem_spec)
    except ProblemFormatError as exc:
        raise PlanError("$.problem", str(exc))
    runs = _parse_runs(plan, global_seed)
    bound_requests = _parse_bounds(plan, runs)

    out = Path(out_dir if out_dir is not None else plan.get("output", "out"))
    out.mkdir(parents=True, exist_ok=True)

    target = loaded.oracle if loaded.problem is None else loaded.problem
    constants = compute_constants(loaded.problem) if loaded.problem is not None \
        else constants_from_oracle(loaded.oracle)
    reference = reference_optimum(target,
                                  constants=constants if loaded.problem is not None else None)
    r0 = r0_upper_estimate(target, loaded.x0, reference.x_star,
                           f_star=reference.f_star)
    if loaded.problem is not None:
        delta0 = eval_objective(loaded.problem, loaded.x0) - reference.f_star
    else:
        delta0 = float(loaded.oracle.value(loaded.x0)) - reference.f_star
    delta0 = max(0.0, delta0)

    beta = None
    oracle = loaded.oracle
    if oracle is None and loaded.problem is not None \
            and loaded.problem.is_smooth() and loaded.problem.partition.block_size == 1:
        oracle = oracle_from_quadratic(loaded.problem)
    if oracle is not None:
        beta = beta_estimate(oracle).estimate

    trajectories = {}
    for label, run in runs:
        t = _execute_run(loaded, label, run, constants, reference)
        trajectories[label] = t
        trajectory_to_csv(t, str(out / f"{label}.csv"))

    max_cycles = max(t.cycles for t in trajectories.values())
    specs = []
    for label, kind, against, c_prior in bound_requests:
        if against is not None:
            t = trajectories[against]
            p_max, p_min = float(t.stepsizes.max()), float(t.stepsizes.min())
        else:
            p_max, p_min = constants.L_max, constants.L_min
        specs.append((label, BoundSpec(kind=kind, constants=constants,
                                       r0_upper=r0.value, delta0=delta0,
                                       beta=beta, c_prior=c_prior,
                                       p_max=p_max, p_min=p_min)))
    if specs:
        bound_report_csv(specs, max_cycles, str(out / "bounds.csv"))

    lines = [f"problem: kind={loaded.kind} K={constants.block_count} "
             f"N={constants.block_size} L={constants.L:.17g}",
             f"reference: f*={reference.f_star:.17g} certified={reference.certified} "
             f"({reference.note})",
             f"radius: R0<={r0.value:.17g} certified={r0.certified} ({r0.method})"]
    for label, run in runs:
        t = trajectories[label]
        lines.append(f"run {label}: algorithm={t.algorithm} cycles={t.cycles} "
                     f"final_gap={t.gap[-1]:.17g}")
    for label, spec in specs:
        kind = spec.kind
        compatible = [run_label for run_label, run in runs
                      if run.algorithm in BOUND_PAIRINGS[kind]]
        for run_label in compatible:
            t = trajectories[run_label]
            first = "-"
            try:
                for r in range(1, t.cycles + 1):
                    if evaluate(spec, r) <= 2.0 * t.gap[r]:
                        first = str(r)
                        break
            except InapplicableBound as exc:
                first = f"inapplicable ({exc})"
            lines.append(f"bound {label} vs {run_label}: first cycle within 2x "
                         f"of observed gap: {first}")
    (out / "summary.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {len(trajectories)} trajectory file(s) to {out}")
    return 0


def cmd_verify(suite: str, seed: int, out_dir: str | None = None) -> int:
    if suite not in SUITES:
        print(f"unknown suite {suite!r}; choose from {sorted(SUITES)}",
              file=sys.stderr)
        return 2
    reports = SUITES[suite](seed)
    for line in report_lines(reports):
        print(line)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        reports_to_csv(reports, str(out / f"verify_{suite}.csv"))
    ok = all_asserted_pass(reports)
    failed = sum(1 for rep in reports if not rep.passed and not rep.advisory)
    print(f"{suite}: {len(reports)} checks, "
          f"{failed} asserted failure(s)")
    return 0 if ok else 1


def cmd_bounds(problem_path: str, r_max: int, out_dir: str | None) -> int:
    loaded = load_problem(problem_path)
    out = Path(out_dir if out_dir is not None else "out")
    out.mkdir(parents=True, exist_ok=True)
    if loaded.problem is not None:
        constants = compute_constants(loaded.problem)
        target = loaded.problem
    else:
        constants = constants_from_oracle(loaded.oracle)
        target = loaded.oracle
    reference = reference_optimum(target)
    r0 = r0_upper_estimate(target, loaded.x0, reference.x_star,
                           f_star=reference.f_star)
    if loaded.problem is not None:
        delta0 = max(0.0, eval_objective(loaded.problem, loaded.x0) - reference.f_star)
    else:
        delta0 = max(0.0, float(loaded.oracle.value(loaded.x0)) - reference.f_star)

    beta = None
    oracle = loaded.oracle
    if oracle is None and loaded.problem.is_smooth() \
            and loaded.problem.partition.block_size == 1:
        oracle = oracle_from_quadratic(loaded.problem)
    if oracle is not None:
        beta = beta_estimate(oracle).estimate

    specs = []
    for kind in BOUND_KINDS:
        specs.append((kind, BoundSpec(kind=kind, constants=constants,
                                      r0_upper=r0.value, delta0=delta0, beta=beta,
                                      p_max=constants.L_max, p_min=constants.L_min)))
    bound_report_csv(specs, r_max, str(out / "bounds.csv"))

    lines = [
        f"kind={loaded.kind} K={constants.block_count} N={constants.block_size}",
        f"L={constants.L:.17g} L_max={constants.L_max:.17g} L_min={constants.L_min:.17g}",
        f"rank_case={constants.rank_case} sigma_min={constants.sigma_min:.17g} "
        f"gamma_min={constants.gamma_min:.17g}",
        f"delta0={delta0:.17g} R0<={r0.value:.17g} ({r0.method}, certified={r0.certified})",
    ]
    if loaded.kind == "toeplitz":
        ok = constants.L <= 18.0
        lines.append(f"check L <= 18: {'PASS' if ok else 'FAIL'} (L={constants.L:.12g}, "
                     "holds for every dimension)")
        lines.append(
            "note: derived block constants are "
            f"L_min={constants.L_min:.12g}, L_max={constants.L_max:.12g}; the "
            "commonly stated values 4 and 9 overestimate the largest one "
            "(computed directly from the scaled column norms)")
    if constants.block_count * constants.block_size < 3:
        lines.append("notice: K*N < 3, log^2(2NK) bound columns are empty "
                     "(outside the truncation-estimate regime)")
    (out / "constants.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    print("\n".join(lines))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="blockcd",
        description="block coordinate descent solvers and bound verification")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute an experiment plan")
    p_run.add_argument("--plan", required=True, help="plan JSON file")
    p_run.add_argument("--out", default=None, help="output directory")
    p_run.add_argument("--seed", type=int, default=None, help="override plan seed")

    p_verify = sub.add_parser("verify", help="run a verification suite")
    p_verify.add_argument("--suite", default="all",
                          choices=["all", "lemmas", "envelopes", "tightness", "truncation"])
    p_verify.add_argument("--seed", type=int, default=7)
    p_verify.add_argument("--out", default=None, help="also write a CSV report here")

    p_bounds = sub.add_parser("bounds", help="bound curves for a problem file")
    p_bounds.add_argument("--plan", required=True, help="problem JSON file")
    p_bounds.add_argument("--rmax", type=int, default=100)
    p_bounds.add_argument("--out", default=None)

    p_tight = sub.add_parser("tightness", help="alias for verify --suite tightness")
    p_tight.add_argument("--seed", type=int, default=7)
    p_tight.add_argument("--out", default=None)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(args.plan, args.out, args.seed)
        if args.command == "verify":
            return cmd_verify(args.suite, args.seed, args.out)
        if args.command == "bounds":
            return cmd_bounds(args.plan, args.rmax, args.out)
        if args.command == "tightness":
            return cmd_verify("tightness", args.seed, args.out)
    except (PlanError, ProblemFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
