"""Command-line entry point: deterministic orchestration and report emission.

Subcommands mirror the library modules: `group info` / `group crt`,
`expansion`, `mixing`, `wstat`, and `steplab report`.  Every JSON output embeds
the fully resolved run configuration and the artifact version; identical
inputs and seed produce byte-identical JSON.  Exit codes: 0 success, 1 budget
exhaustion (partial results written and flagged), 2 configuration errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .action import action_from_json, toy_action, translation_action
from .expansion import EXHAUSTIVE_CHEEGER_LIMIT, bv_scan
from .group import (
    DEFAULT_ENUMERATION_BUDGET,
    BudgetExceededError,
    GeneratorSet,
    crt_check,
    enumerate_group,
    parse_generators,
)
from .quasirandom import mixing_check, quasirandomness_bound, triple_mixing_check
from .serialize import dump_json, envelope, fraction_json, write_csv, wvector_csv_rows
from .steplab import discontinuity_report
from .wstat import sample_wset

EXIT_OK = 0
EXIT_BUDGET = 1
EXIT_CONFIG = 2


class ConfigError(ValueError):
    """Invalid run configuration; reported with exit code 2."""


def _parse_int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip() != ""]
    except ValueError as exc:
        raise ConfigError(f"expected a comma-separated integer list, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="weqlab",
        description="Finite laboratory for congruence-quotient actions.",
    )
    parser.add_argument("--config", help="JSON file supplying defaults for flags")
    parser.add_argument(
        "--format",
        choices=("json", "csv", "both"),
        default=None,
        help="which requested output files to write (default: both)",
    )
    parser.add_argument(
        "--threads",
        type=int,
        default=None,
        help="worker count recorded in the run config; results are "
        "deterministic and independent of it",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    group = sub.add_parser("group", help="quotient construction and checks")
    group_sub = group.add_subparsers(dest="subcommand", required=True)
    info = group_sub.add_parser("info", help="enumerate one quotient")
    info.add_argument("--d", type=int, default=None)
    info.add_argument("--n", type=int, default=None)
    info.add_argument("--gens", default=None)
    info.add_argument("--budget", type=int, default=None)
    info.add_argument("--dump-elements", action="store_true", default=None)
    info.add_argument("--out", default=None)
    crt = group_sub.add_parser("crt", help="factor-consistency check")
    crt.add_argument("--d", type=int, default=None)
    crt.add_argument("--n", type=int, default=None)
    crt.add_argument("--budget", type=int, default=None)
    crt.add_argument("--out", default=None)

    expansion = sub.add_parser("expansion", help="Cheeger and spectral survey")
    expansion.add_argument("--dims", type=int, default=None)
    expansion.add_argument("--moduli", default=None)
    expansion.add_argument("--gens", default=None)
    expansion.add_argument("--seed", type=int, default=None)
    expansion.add_argument("--exact-limit", type=int, default=None)
    expansion.add_argument("--search-budget", type=int, default=None)
    expansion.add_argument("--budget", type=int, default=None)
    expansion.add_argument("--out", default=None)
    expansion.add_argument("--csv", default=None)
    expansion.add_argument("--figures", action=argparse.BooleanOptionalAction, default=None)

    mixing = sub.add_parser("mixing", help="convolution mixing checks")
    mixing.add_argument("--d", type=int, default=None)
    mixing.add_argument("--n", type=int, default=None)
    mixing.add_argument("--m", type=int, default=None)
    mixing.add_argument("--trials", type=int, default=None)
    mixing.add_argument("--seed", type=int, default=None)
    mixing.add_argument("--gens", default=None)
    mixing.add_argument("--adversarial-rounds", type=int, default=None)
    mixing.add_argument("--budget", type=int, default=None)
    mixing.add_argument("--out", default=None)
    mixing.add_argument("--figures", action=argparse.BooleanOptionalAction, default=None)

    wstat = sub.add_parser("wstat", help="sample the statistic set of an action")
    wstat.add_argument("--action", dest="action_spec", default=None)
    wstat.add_argument("--k", type=int, default=None)
    wstat.add_argument("--exhaustive", action="store_true", default=None)
    wstat.add_argument("--budget", type=int, default=None)
    wstat.add_argument("--max-size", type=int, default=None)
    wstat.add_argument("--seed", type=int, default=None)
    wstat.add_argument("--gens", default=None)
    wstat.add_argument("--out", default=None)
    wstat.add_argument("--csv", default=None)

    steplab = sub.add_parser("steplab", help="coupled-quotient experiments")
    steplab_sub = steplab.add_subparsers(dest="subcommand", required=True)
    report = steplab_sub.add_parser("report", help="per-prime survey")
    report.add_argument("--primes", default=None)
    report.add_argument("--step-N", dest="step_n", type=int, default=None)
    report.add_argument("--seed", type=int, default=None)
    report.add_argument("--gens", default=None)
    report.add_argument("--restarts", type=int, default=None)
    report.add_argument("--moves", type=int, default=None)
    report.add_argument("--plateau", type=int, default=None)
    report.add_argument("--budget", type=int, default=None)
    report.add_argument("--cheeger-budget", type=int, default=None)
    report.add_argument("--out", default=None)
    report.add_argument("--csv", default=None)
    report.add_argument("--figures", action=argparse.BooleanOptionalAction, default=None)

    return parser


_DEFAULTS: dict[str, dict] = {
    "group info": {
        "d": 2, "n": 3, "gens": "sanov", "budget": DEFAULT_ENUMERATION_BUDGET,
        "dump_elements": False, "out": None,
    },
    "group crt": {"d": 2, "n": 6, "budget": DEFAULT_ENUMERATION_BUDGET, "out": None},
    "expansion": {
        "dims": 2, "moduli": "3,5,7", "gens": "sanov", "seed": 0,
        "exact_limit": EXHAUSTIVE_CHEEGER_LIMIT, "search_budget": 50_000,
        "budget": DEFAULT_ENUMERATION_BUDGET, "out": None, "csv": None, "figures": None,
    },
    "mixing": {
        "d": 2, "n": 5, "m": 5, "trials": 200, "seed": 0, "gens": "sanov",
        "adversarial_rounds": 0, "budget": DEFAULT_ENUMERATION_BUDGET,
        "out": None, "figures": None,
    },
    "wstat": {
        "action_spec": "a3", "k": 2, "exhaustive": False, "budget": 2048,
        "max_size": 64, "seed": 0, "gens": "sanov", "out": None, "csv": None,
    },
    "steplab report": {
        "primes": "3,5,7,11,13", "step_n": 2, "seed": 0, "gens": "sanov",
        "restarts": 32, "moves": 100_000, "plateau": 40,
        "budget": DEFAULT_ENUMERATION_BUDGET, "cheeger_budget": 50_000,
        "out": None, "csv": None, "figures": None,
    },
}


def _command_key(ns: argparse.Namespace) -> str:
    if getattr(ns, "subcommand", None):
        return f"{ns.command} {ns.subcommand}"
    return ns.command


_GLOBAL_DEFAULTS = {"format": "both", "threads": 1}


def _resolve(ns: argparse.Namespace, config_file: dict) -> dict:
    key = _command_key(ns)
    defaults = dict(_DEFAULTS[key], **_GLOBAL_DEFAULTS)
    resolved = {}
    for name, fallback in defaults.items():
        cli_value = getattr(ns, name, None)
        if cli_value is not None:
            resolved[name] = cli_value
        elif name in config_file:
            resolved[name] = config_file[name]
        else:
            resolved[name] = fallback
    if resolved["threads"] < 1:
        raise ConfigError("--threads must be positive")
    return resolved


def _want(cfg: dict, kind: str) -> bool:
    return cfg["format"] in (kind, "both")


def _public_config(cfg: dict) -> dict:
    # Worker count is an execution detail: results must be byte-identical
    # across it, so it stays out of the serialized run configuration.
    return {k: v for k, v in cfg.items() if k != "threads"}


def _gens_from(cfg: dict) -> GeneratorSet:
    return parse_generators(cfg["gens"])


def _figures_enabled(cfg: dict) -> bool:
    # Default: render figures whenever a delimited/JSON output path is given.
    if cfg.get("figures") is not None:
        return bool(cfg["figures"])
    return bool(cfg.get("out") or cfg.get("csv"))


def _figure_base(cfg: dict) -> Path:
    anchor = cfg.get("csv") or cfg.get("out")
    path = Path(anchor)
    return path.parent / path.stem


def cmd_group_info(cfg: dict) -> int:
    if cfg["d"] < 2 or cfg["n"] < 2:
        raise ConfigError("require --d >= 2 and --n >= 2")
    gens = _gens_from(cfg)
    group = enumerate_group(cfg["d"], cfg["n"], cfg["budget"])
    act = translation_action(group, gens)
    print(f"SL_{cfg['d']}(Z/{cfg['n']}): order {group.order}")
    print(f"generators {','.join(gens.labels)}: generates = {act.transitive}")
    result: dict = {
        "d": cfg["d"],
        "n": cfg["n"],
        "order": group.order,
        "generates": bool(act.transitive),
        "generators": gens.describe(),
    }
    if cfg["dump_elements"]:
        if group.order > 100_000:
            raise ConfigError("element dump gated to orders at most 100000")
        result["elements"] = [
            [v for row in mat.entries for v in row] for mat in group.elements
        ]
    if cfg["out"] and _want(cfg, "json"):
        dump_json(cfg["out"], envelope("group info", _public_config(cfg), result))
    return EXIT_OK


def cmd_group_crt(cfg: dict) -> int:
    if cfg["d"] < 2 or cfg["n"] < 2:
        raise ConfigError("require --d >= 2 and --n >= 2")
    group = enumerate_group(cfg["d"], cfg["n"], cfg["budget"])
    report = crt_check(group, cfg["budget"])
    print(
        f"SL_{cfg['d']}(Z/{cfg['n']}): order {report.order} = "
        + " * ".join(str(o) for o in report.factor_orders)
        + f" -> product match {report.order_matches_product}, "
        + f"injective {report.reduction_injective}"
    )
    if cfg["out"] and _want(cfg, "json"):
        dump_json(cfg["out"], envelope("group crt", _public_config(cfg), report))
    return EXIT_OK


def cmd_expansion(cfg: dict) -> int:
    moduli = _parse_int_list(cfg["moduli"]) if isinstance(cfg["moduli"], str) else list(cfg["moduli"])
    if any(n < 2 for n in moduli):
        raise ConfigError("moduli must be at least 2")
    if cfg["dims"] < 2:
        raise ConfigError("--dims must be at least 2")
    gens = _gens_from(cfg)
    rows = bv_scan(
        gens,
        moduli,
        d=cfg["dims"],
        exact_limit=cfg["exact_limit"],
        search_budget=cfg["search_budget"],
        seed=cfg["seed"],
        enumeration_budget=cfg["budget"],
    )
    print("n      order  generates  cheeger            lambda2")
    for row in rows:
        ch = f"{row.cheeger} ({row.cheeger_kind})"
        print(f"{row.n:<6d} {row.order:<6d} {str(row.generates):<10s} {ch:<18s} {row.lambda2:.6f}")
    result = {
        "rows": [
            {
                "n": row.n,
                "order": row.order,
                "generates": row.generates,
                "cheeger": {"kind": row.cheeger_kind, **fraction_json(row.cheeger)},
                "lambda2": row.lambda2,
                "spectral_converged": row.spectral_converged,
                "spectral_method": row.spectral_method,
            }
            for row in rows
        ]
    }
    if cfg["out"] and _want(cfg, "json"):
        dump_json(cfg["out"], envelope("expansion", _public_config(cfg), result))
    if cfg["csv"] and _want(cfg, "csv"):
        write_csv(
            cfg["csv"],
            ["n", "order", "generates", "cheeger_kind", "cheeger_num", "cheeger_den", "lambda2"],
            [
                [r.n, r.order, r.generates, r.cheeger_kind,
                 r.cheeger.numerator, r.cheeger.denominator, repr(r.lambda2)]
                for r in rows
            ],
        )
    if rows and _figures_enabled(cfg) and (cfg["out"] or cfg["csv"]):
        from . import figures

        for path in figures.expansion_figures(rows, _figure_base(cfg)):
            print(f"figure: {path}")
    return EXIT_OK


def cmd_mixing(cfg: dict) -> int:
    if cfg["n"] < 2 or cfg["m"] < 2:
        raise ConfigError("moduli must be at least 2")
    if cfg["m"] % cfg["n"] != 0:
        raise ConfigError(f"{cfg['n']} does not divide {cfg['m']}")
    if cfg["trials"] < 1:
        raise ConfigError("--trials must be positive")
    group_n = enumerate_group(cfg["d"], cfg["n"], cfg["budget"])
    group_m = (
        group_n if cfg["m"] == cfg["n"] else enumerate_group(cfg["d"], cfg["m"], cfg["budget"])
    )
    d_bound = quasirandomness_bound(cfg["n"])
    pair_report = mixing_check(
        group_n,
        d_bound,
        trials=cfg["trials"],
        seed=cfg["seed"],
        adversarial_rounds=cfg["adversarial_rounds"],
    )
    triple_report = triple_mixing_check(
        group_n, group_m, trials=cfg["trials"], seed=cfg["seed"]
    )
    print(
        f"pair mixing on order {group_n.order} with bound {d_bound}: "
        f"max ratio {pair_report.max_ratio:.6f} pass={pair_report.passed}"
    )
    print(
        f"coupled triple ({cfg['n']},{cfg['m']}): max ratio "
        f"{triple_report.max_ratio:.6f} pass={triple_report.passed}"
    )
    result = {"pair": pair_report, "triple": triple_report}
    if cfg["out"] and _want(cfg, "json"):
        dump_json(cfg["out"], envelope("mixing", _public_config(cfg), result))
    if _figures_enabled(cfg) and cfg["out"]:
        from . import figures

        for path in figures.mixing_figures(
            pair_report.ratios, triple_report.ratios, _figure_base(cfg)
        ):
            print(f"figure: {path}")
    return EXIT_OK


def _action_from_spec(spec: str, cfg: dict):
    # the wstat --budget flag governs partition sampling, not enumeration
    if spec.startswith("a") and spec[1:].isdigit():
        n = int(spec[1:])
        group = enumerate_group(2, n, DEFAULT_ENUMERATION_BUDGET)
        return translation_action(group, _gens_from(cfg))
    if spec.startswith("toy:"):
        return toy_action(spec[4:])
    if spec.startswith("file:"):
        return action_from_json(spec[5:])
    raise ConfigError(
        f"unknown action spec {spec!r}; use a<n>, toy:<name>, or file:<path>"
    )


def cmd_wstat(cfg: dict) -> int:
    if cfg["k"] < 1:
        raise ConfigError("--k must be positive")
    action = _action_from_spec(cfg["action_spec"], cfg)
    strategy = "exhaustive" if cfg["exhaustive"] else "auto"
    sample = sample_wset(
        action,
        cfg["k"],
        strategy=strategy,
        budget=cfg["budget"],
        max_size=cfg["max_size"],
        seed=cfg["seed"],
    )
    print(
        f"action {cfg['action_spec']} ({action.size} points), k={cfg['k']}: "
        f"{len(sample.vectors)} distinct vectors "
        f"[{sample.strategy}{', exhaustive' if sample.exhaustive else ''}]"
    )
    result = {
        "action": cfg["action_spec"],
        "size": action.size,
        "k": cfg["k"],
        "strategy": sample.strategy,
        "exhaustive": sample.exhaustive,
        "pool_size": sample.pool_size,
        "vectors": [
            {
                "den": vec.den,
                "entries": [
                    {"symbol": lab, "i": i, "j": j, "count": vec.counts[s][i][j]}
                    for s, lab in enumerate(vec.labels)
                    for i in range(vec.k)
                    for j in range(vec.k)
                ],
            }
            for vec in sample.vectors
        ],
    }
    if cfg["out"] and _want(cfg, "json"):
        dump_json(cfg["out"], envelope("wstat", _public_config(cfg), result))
    if cfg["csv"] and _want(cfg, "csv"):
        rows = [
            [idx, *row]
            for idx, vec in enumerate(sample.vectors)
            for row in wvector_csv_rows(vec)
        ]
        write_csv(cfg["csv"], ["vector", "symbol", "i", "j", "num", "den"], rows)
    return EXIT_OK


def cmd_steplab_report(cfg: dict) -> int:
    primes = _parse_int_list(cfg["primes"]) if isinstance(cfg["primes"], str) else list(cfg["primes"])
    if not primes:
        print("empty prime list: nothing to do")
    if cfg["step_n"] < 1:
        raise ConfigError("--step-N must be at least 1")
    gens = _gens_from(cfg)
    report = discontinuity_report(
        primes,
        cfg["step_n"],
        gens=gens,
        seed=cfg["seed"],
        restarts=cfg["restarts"],
        moves_per_restart=cfg["moves"],
        plateau_moves=cfg["plateau"],
        enumeration_budget=cfg["budget"],
        cheeger_budget=cfg["cheeger_budget"],
    )
    print("p      order   u_member  best_step_dist     claim_status  lambda2")
    for row in report.rows:
        if row.error is not None:
            print(f"{row.p:<6d} error: {row.error}")
            continue
        print(
            f"{row.p:<6d} {row.order_n:<7d} {str(row.u_member):<9s} "
            f"{str(row.best_step_dist):<18s} {row.claim_bound_status:<13s} {row.lambda2:.6f}"
        )
    if cfg["out"] and _want(cfg, "json"):
        dump_json(cfg["out"], envelope("steplab report", _public_config(cfg), report))
    if cfg["csv"] and _want(cfg, "csv"):
        header = [
            "p", "order_n", "order_m", "u_member",
            "best_step_dist_num", "best_step_dist_den", "claim3_status", "lambda2",
        ]
        rows = []
        for row in report.rows:
            if row.error is not None:
                rows.append([row.p, "", "", "", "", "", "error", ""])
                continue
            rows.append(
                [
                    row.p, row.order_n, row.order_m, row.u_member,
                    row.best_step_dist.numerator, row.best_step_dist.denominator,
                    row.claim_bound_status, repr(row.lambda2),
                ]
            )
        write_csv(cfg["csv"], header, rows)
    if _figures_enabled(cfg) and (cfg["out"] or cfg["csv"]):
        from . import figures

        for path in figures.discontinuity_figures(report, _figure_base(cfg)):
            print(f"figure: {path}")
    return EXIT_OK


_HANDLERS = {
    "group info": cmd_group_info,
    "group crt": cmd_group_crt,
    "expansion": cmd_expansion,
    "mixing": cmd_mixing,
    "wstat": cmd_wstat,
    "steplab report": cmd_steplab_report,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    config_file: dict = {}
    if ns.config:
        try:
            config_file = json.loads(Path(ns.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            print(f"error: cannot read config file: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        if not isinstance(config_file, dict):
            print("error: config file must hold a JSON object", file=sys.stderr)
            return EXIT_CONFIG
    key = _command_key(ns)
    try:
        cfg = _resolve(ns, config_file)
        return _HANDLERS[key](cfg)
    except (ConfigError, ValueError) as exc:
        # precondition violations surfacing from the library are config errors
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BudgetExceededError as exc:
        print(f"budget exhausted: {exc}", file=sys.stderr)
        out = getattr(ns, "out", None)
        if out:
            dump_json(
                out,
                envelope(key, _public_config(cfg), {"budget_exhausted": True, "detail": str(exc)}),
            )
        return EXIT_BUDGET


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
