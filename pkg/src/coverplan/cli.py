"""Command line interface.

Exit codes: 0 success, 1 scenario/planning failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import report
from .algorithms import (multistep_planning, multistep_planning_with_advice,
                         retrospective_compare)
from .kernels import backend
from .model import PlanningError, type_counts
from .proportion import ratio_min
from .scenario import (POLICY_MODES, ScenarioFormatError, _fmt_num, advice_ids,
                       build_instance, derive_policy_proportions, dumps_scenario,
                       generate_synthetic_region, load_scenario, save_scenario)


def _write_out(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _parse_budget_list(raw: str) -> list[int]:
    vals = [int(v) for v in raw.replace(",", " ").split()]
    if not vals or any(v < 0 for v in vals):
        raise ValueError(f"budgets must be non-negative integers, got {raw!r}")
    return vals


def _fmt_ratio(a) -> str:
    if a is None:
        return "-"
    if a == float("inf"):
        return "inf"
    return f"{float(a):.4f}"


def cmd_plan(args) -> int:
    sf = load_scenario(args.scenario)
    budgets = _parse_budget_list(args.budgets) if args.budgets else None
    if budgets is not None and len(budgets) == 1:
        budgets = budgets * sf.years
    built = build_instance(sf, policy_mode=args.policy, budgets=budgets)
    if args.use_advice:
        if not sf.advice:
            raise PlanningError("scenario carries no advice; drop --use-advice")
        result = multistep_planning_with_advice(built.instance, advice_ids(built),
                                                lazy=not args.naive)
    else:
        result = multistep_planning(built.instance, lazy=not args.naive)
    text = report.format_plan_result(result, built)
    _write_out(text, args.out)
    if args.out:
        print(f"plan written to {args.out}")
        print(f"objective gain {result.value:g} over baseline {built.model.baseline:g} "
              f"({result.gain_evals} gain evaluations, {backend()} backend)")
        for d in result.diagnostics:
            print(f"note: {d}")
    return 0


def cmd_budget_sweep(args) -> int:
    sf = load_scenario(args.scenario)
    budgets = _parse_budget_list(args.budgets)
    policies = args.policies.split(",")
    for p in policies:
        if p not in POLICY_MODES:
            raise ValueError(f"unknown policy {p!r}")
    if "dp0" not in policies:
        policies = ["dp0"] + policies
    rows = []
    gains: dict[str, dict[int, float]] = {p: {} for p in policies}
    for b in budgets:
        for pol in policies:
            built = build_instance(sf, policy_mode=pol, budgets=[b] * sf.years)
            res = multistep_planning(built.instance)
            gains[pol][b] = res.value
            rows.append((b, pol, res.value, res.value + built.model.baseline,
                         res.alpha[-1]))
    lines = ["budget\tpolicy\tgain\ttotal\tratio_vs_dp0\talpha_min"]
    for b, pol, gain, total, alpha in rows:
        base = gains["dp0"][b]
        ratio = base / gain if gain else float("inf")
        lines.append(f"{b}\t{pol}\t{_fmt_num(gain)}\t{_fmt_num(total)}\t"
                     f"{ratio:.6f}\t{_fmt_ratio(alpha)}")
    table = "\n".join(lines) + "\n"
    _write_out(table, args.out)
    if args.out:
        print(f"sweep written to {args.out}")
    for pol in policies:
        if pol == "dp0":
            continue
        seq = [gains["dp0"][b] / gains[pol][b] if gains[pol][b] else float("inf")
               for b in sorted(set(budgets))]
        trend = "non-increasing" if all(a >= b_ for a, b_ in zip(seq, seq[1:])) else "mixed"
        print(f"{pol}: efficiency-loss ratio trend over budgets is {trend} "
              f"({', '.join(f'{v:.4f}' for v in seq)})")
    return 0


def cmd_equity(args) -> int:
    sf = load_scenario(args.scenario)
    plan_policies = args.policies.split(",")
    score_modes = [m for m in ("dp1", "dp2")
                   if (m == "dp1" and sf.rates_need is not None)
                   or (m == "dp2" and sf.rates_coverage is not None)]
    if not score_modes:
        raise PlanningError("scenario has no indicator rates to score against")
    lines = ["plan_policy\tscore_policy\talpha_final\talpha_worst_year"]
    for pol in plan_policies:
        if pol not in POLICY_MODES:
            raise ValueError(f"unknown policy {pol!r}")
        built = build_instance(sf, policy_mode=pol)
        res = multistep_planning(built.instance)
        for mode in score_modes:
            scoring = derive_policy_proportions(sf, mode)
            per_year = []
            for t in range(1, built.instance.horizon + 1):
                prefix = res.selection.prefix(t)
                if prefix:
                    counts = type_counts(prefix, built.instance)
                    per_year.append(ratio_min(counts, scoring))
            final = per_year[-1] if per_year else None
            worst = min(per_year) if per_year else None
            lines.append(f"{pol}\t{mode}\t{_fmt_ratio(final)}\t{_fmt_ratio(worst)}")
    table = "\n".join(lines) + "\n"
    _write_out(table, args.out)
    if args.out:
        print(f"equity table written to {args.out}")
    return 0


def cmd_retrospective(args) -> int:
    sf = load_scenario(args.scenario)
    if args.year not in sf.advice:
        raise PlanningError(f"scenario has no advice for year {args.year}")
    built = build_instance(sf, policy_mode="dp0")
    ids = advice_ids(built)[args.year]
    cands = [e.id for e in built.instance.by_round[args.year - 1]]
    rep = retrospective_compare(cands, len(ids), built.instance.objective, ids,
                                permutations=args.permutations, seed=args.seed)
    text = report.format_retro_report(rep, built, args.year)
    _write_out(text, args.out)
    order = "refined > greedy > advice" if rep.strictly_ordered else "no strict ordering"
    print(f"advice {rep.advice_value:g}  greedy {rep.greedy_value:g}  "
          f"refined {rep.refined_value:g}  ({order})")
    return 0


def cmd_generate(args) -> int:
    try:
        rows, cols = (int(v) for v in args.dims.lower().split("x"))
    except ValueError:
        raise ValueError(f"--dims must look like 16x16, got {args.dims!r}")
    sf = generate_synthetic_region(seed=args.seed, rows=rows, cols=cols,
                                   districts=args.districts, years=args.years,
                                   budget=args.budget,
                                   existing_count=args.existing, tau=args.tau)
    if args.out:
        save_scenario(sf, args.out)
        print(f"scenario {sf.name} written to {args.out}")
    else:
        sys.stdout.write(dumps_scenario(sf))
    return 0


def cmd_serve(args) -> int:
    from .service import run

    run(host=args.host, port=args.port, workers=args.workers)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="coverplan",
                                     description="sequential facility coverage planning")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="plan facility openings for a scenario")
    p.add_argument("scenario")
    p.add_argument("--policy", default=None, choices=POLICY_MODES,
                   help="proportionality policy (default: the scenario's)")
    p.add_argument("--budgets", default=None,
                   help="override per-year budgets, e.g. '3 3 4' or a single value")
    p.add_argument("--use-advice", action="store_true",
                   help="fold the scenario's advice blocks into each year")
    p.add_argument("--naive", action="store_true",
                   help="full greedy re-scan instead of the lazy queue (slow)")
    p.add_argument("--out", help="write the result file here instead of stdout")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("budget-sweep", help="compare policies across budgets")
    p.add_argument("scenario")
    p.add_argument("--budgets", required=True, help="per-year budget values to sweep")
    p.add_argument("--policies", default="dp0,dp1,dp2")
    p.add_argument("--out", help="write the TSV here instead of stdout")
    p.set_defaults(func=cmd_budget_sweep)

    p = sub.add_parser("equity", help="score each policy's plan under the others' shares")
    p.add_argument("scenario")
    p.add_argument("--policies", default="dp0,dp1,dp2")
    p.add_argument("--out", help="write the TSV here instead of stdout")
    p.set_defaults(func=cmd_equity)

    p = sub.add_parser("retrospective", help="replay recorded advice against greedy and refinement")
    p.add_argument("scenario")
    p.add_argument("--year", type=int, default=1)
    p.add_argument("--permutations", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="write the report here instead of stdout")
    p.set_defaults(func=cmd_retrospective)

    p = sub.add_parser("generate", help="emit a deterministic synthetic scenario")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dims", default="16x16")
    p.add_argument("--districts", type=int, default=3)
    p.add_argument("--years", type=int, default=5)
    p.add_argument("--budget", type=int, default=3)
    p.add_argument("--existing", type=int, default=None,
                   help="number of pre-existing facilities (default: districts // 2)")
    p.add_argument("--tau", type=float, default=120.0)
    p.add_argument("--out", help="write the scenario here instead of stdout")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--workers", type=int, default=2)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioFormatError, PlanningError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
