"""
Workbench CLI
=============
Command-line front end: ``bound``, ``construct``, ``verify``, ``table`` and
``search-disjoint``.

Every run echoes its seed and budget (``# seed=... budget=...`` in text
output, a ``"run"`` object in JSON output) so that it can be repeated.
Exit status: 0 success, 1 verification failure, 2 bad parameters or
malformed input, 3 search budget exhausted, 4 internal inconsistency.
"""

import argparse
import json
import logging
import sys
from dataclasses import asdict, dataclass
from math import comb
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from . import bounds, lifting
from .config import configure_logging, load_config
from .core_codes import Code, SetSystem, format_code, read_code, verify_code, write_code
from .designs import (
    design_13_4,
    disjointify_search,
    greedy_packing,
    maximum_packing_5_mod_6,
    steiner_triple_system,
    write_design,
)
from .errors import ParameterError, SearchBudgetExhausted, WorkbenchError, exit_code_for

logger = logging.getLogger(__name__)

COMMANDS = ('bound', 'construct', 'verify', 'table', 'search-disjoint')
TABLE_KINDS = ('exact', 'n43', 'n32', '13-6-4', 'u-correction')
FAMILIES = ('sts', 'design-13-4', 'packing-5-mod-6', 'greedy')


@dataclass
class RunConfig:
    """Everything that determines the output of one CLI run"""
    command: str
    n: Optional[int] = None
    d: Optional[int] = None
    w: Optional[int] = None
    q: Optional[int] = None
    seed: int = 0
    budget: int = 1_000_000
    workers: int = 1
    fmt: str = "text"
    out: Optional[str] = None
    path: Optional[str] = None
    lam: Optional[int] = None
    t: Optional[int] = None
    construct: bool = False
    kind: str = "exact"
    n_range: Sequence[int] = (3, 25)
    q_range: Sequence[int] = (2, 10)
    family: str = "sts"
    s: Optional[int] = None
    separation: Optional[int] = None

    def header(self) -> Dict[str, Any]:
        return {"command": self.command, "seed": self.seed, "budget": self.budget,
                "workers": self.workers}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cwcodes", description="q-ary constant-weight code workbench")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--seed', type=int, help='Random seed (default from config)')
    common.add_argument('--budget', type=int, help='Search move / node budget')
    common.add_argument('--workers', type=int, help='Parallel search workers')
    common.add_argument('--format', dest='fmt', choices=['text', 'json'], default='text')
    common.add_argument('--out', help='Output file (directory for search-disjoint)')
    common.add_argument('--log-level', help='Logging level (default from config)')

    sub = parser.add_subparsers(dest='command', required=True)

    p_bound = sub.add_parser('bound', parents=[common], help='Report bounds on A_q(n,d,w)')
    for name in ('n', 'd', 'w', 'q'):
        p_bound.add_argument(name, type=int)
    p_bound.add_argument('--construct', action='store_true',
                         help='Also build a code and add its size as a lower bound')

    p_construct = sub.add_parser('construct', parents=[common], help='Build and verify a code')
    for name in ('n', 'd', 'w', 'q'):
        p_construct.add_argument(name, type=int)
    p_construct.add_argument('--lambda', dest='lam', type=int, help='Packing index for random symbols')
    p_construct.add_argument('--t', type=int, help='Packing strength for distance w+1')

    p_verify = sub.add_parser('verify', parents=[common], help='Re-verify a code file')
    p_verify.add_argument('path')

    config = load_config()
    p_table = sub.add_parser('table', parents=[common], help='Grid of exact values and bounds')
    p_table.add_argument('--kind', choices=TABLE_KINDS, default='exact')
    p_table.add_argument('--d', type=int, default=4)
    p_table.add_argument('--w', type=int, default=3)
    p_table.add_argument('--n-min', type=int, default=config.TABLE_N_RANGE[0])
    p_table.add_argument('--n-max', type=int, default=config.TABLE_N_RANGE[1])
    p_table.add_argument('--q-min', type=int, default=config.TABLE_Q_RANGE[0])
    p_table.add_argument('--q-max', type=int, default=config.TABLE_Q_RANGE[1])

    p_search = sub.add_parser('search-disjoint', parents=[common],
                              help='Search for pairwise disjoint copies of a design')
    p_search.add_argument('--family', choices=FAMILIES, default='sts')
    p_search.add_argument('--n', type=int, default=None)
    p_search.add_argument('--s', type=int, required=True, help='Number of copies')
    p_search.add_argument('--w', type=int, default=4, help='Block size for the greedy family')
    p_search.add_argument('--t', type=int, default=2, help='Strength for the greedy family')
    p_search.add_argument('--separation', type=int, help='Forbid copies sharing this many points')
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    defaults = load_config()
    run = RunConfig(
        command=args.command,
        seed=defaults.DEFAULT_SEED if args.seed is None else args.seed,
        budget=defaults.DEFAULT_BUDGET if args.budget is None else args.budget,
        workers=defaults.WORKERS if args.workers is None else args.workers,
        fmt=args.fmt,
        out=args.out,
    )
    if run.seed < 0 or run.budget < 1 or run.workers < 1:
        raise ParameterError("--seed must be >= 0, --budget and --workers >= 1")
    if args.command in ('bound', 'construct'):
        run.n, run.d, run.w, run.q = args.n, args.d, args.w, args.q
        run.construct = getattr(args, 'construct', False)
        run.lam = getattr(args, 'lam', None)
        run.t = getattr(args, 't', None)
    elif args.command == 'verify':
        run.path = args.path
    elif args.command == 'table':
        run.kind, run.d, run.w = args.kind, args.d, args.w
        run.n_range = (args.n_min, args.n_max)
        run.q_range = (args.q_min, args.q_max)
    elif args.command == 'search-disjoint':
        run.family, run.n, run.s = args.family, args.n, args.s
        run.w, run.t, run.separation = args.w, args.t, args.separation
    return run


# Output helpers -------------------------------------------------------------------

def _emit(config: RunConfig, document: Dict[str, Any], text_lines: List[str]) -> None:
    if config.fmt == 'json':
        print(json.dumps({"run": config.header(), **document}, indent=2, default=str))
    else:
        print(f"# seed={config.seed} budget={config.budget} workers={config.workers}")
        for line in text_lines:
            print(line)


def _write_code_artifact(config: RunConfig, code: Code) -> Optional[str]:
    if not config.out:
        return None
    write_code(code, config.out)
    logger.info(f"Wrote {len(code)} words to {config.out}")
    return config.out


# Commands --------------------------------------------------------------------------

def cmd_bound(config: RunConfig) -> int:
    constructed = None
    provenance = "construction"
    if config.construct:
        code = lifting.construct(config.n, config.d, config.w, config.q, seed=config.seed,
                                 budget=config.budget, workers=config.workers,
                                 lam=config.lam, t=config.t)
        constructed, provenance = len(code), code.provenance
    report = bounds.bound_report(config.n, config.d, config.w, config.q,
                                 constructed=constructed, constructed_provenance=provenance)
    lines = [f"A_{config.q}({config.n},{config.d},{config.w})"]
    for v in report.values:
        note = f" [{v.assumptions}]" if v.assumptions else ""
        flag = " (non-rigorous)" if not v.rigorous else ""
        lines.append(f"  {v.kind:5} {v.value:>10}  {v.provenance}{note}{flag}")
    lines.append(f"  best: {report.best_lower} <= A <= {report.best_upper}")
    if report.exact is not None:
        lines.append(f"  exact: {report.exact.value} ({report.exact.provenance})")
    _emit(config, report.to_dict(), lines)
    return 0


def _construct_document(config: RunConfig, code: Code, report) -> Dict[str, Any]:
    exact = bounds.exact_value(code.params.n, code.params.d, code.params.w, code.params.q)
    return {
        "params": asdict(code.params),
        "provenance": code.provenance,
        "size": len(code),
        "exact": exact.to_dict() if exact else None,
        "optimal": bool(exact and exact.value == len(code)),
        "report": report.to_dict(),
        "out": config.out,
    }


def _construct_lines(config: RunConfig, code: Code, document: Dict[str, Any]) -> List[str]:
    lines = [f"# {code.params}: {len(code)} words, provenance: {code.provenance}"]
    exact = document["exact"]
    if exact:
        status = "exact" if document["optimal"] else f"below exact value {exact['value']}"
        lines.append(f"# {status}, {exact['provenance']}")
    report = document["report"]
    lines.append(f"# valid={report['valid']} min_distance={report['actual_min_distance']}")
    if not config.out:
        lines.append(format_code(code).rstrip('\n'))
    return lines


def cmd_construct(config: RunConfig) -> int:
    try:
        code = lifting.construct(config.n, config.d, config.w, config.q, seed=config.seed,
                                 budget=config.budget, workers=config.workers,
                                 lam=config.lam, t=config.t)
    except SearchBudgetExhausted as e:
        if isinstance(e.partial, Code):
            _write_code_artifact(config, e.partial)
            logger.warning(f"Budget exhausted; partial code with {len(e.partial)} words written")
        raise
    report = verify_code(code, workers=config.workers)
    _write_code_artifact(config, code)
    document = _construct_document(config, code, report)
    if config.fmt == 'json' and not config.out:
        document["words"] = [str(w) for w in code]
    _emit(config, document, _construct_lines(config, code, document))
    return 0 if report.valid else 1


def cmd_verify(config: RunConfig) -> int:
    code = read_code(config.path)
    report = verify_code(code, workers=config.workers)
    lines = [f"{config.path}: {code.params}, {len(code)} words",
             f"valid={report.valid} min_distance={report.actual_min_distance}"]
    for word in report.weight_violations:
        lines.append(f"  weight violation: {word} has weight {word.weight}")
    for u, v, dist in report.distance_violations:
        lines.append(f"  distance violation: {u} {v} at distance {dist}")
    _emit(config, {"path": config.path, "params": asdict(code.params), "size": len(code),
                   "report": report.to_dict()}, lines)
    if not report.valid:
        logger.error(f"{config.path}: {report.weight_violation_count} weight and "
                     f"{report.distance_violation_count} distance violations")
    return 0 if report.valid else 1


def _table_rows(config: RunConfig) -> List[Dict[str, Any]]:
    n_lo, n_hi = config.n_range
    q_lo, q_hi = config.q_range
    if n_lo > n_hi or q_lo > q_hi or q_lo < 2 or n_lo < 1:
        raise ParameterError(f"bad table ranges n={config.n_range}, q={config.q_range}")
    rows = []
    if config.kind == 'u-correction':
        for n in range(max(n_lo, 3), n_hi + 1):
            for q in range(q_lo, q_hi + 1):
                correction = bounds.u_correction(n, q)
                rows.append({"n": n, "q": q, "n_mod_6": n % 6, "q_mod_3": q % 3,
                             "B": str(bounds.b_value(n, q)), "U": bounds.u_value(n, q),
                             "correction": str(correction)})
        return rows
    if config.kind == '13-6-4':
        cells = [(13, 6, 4, q) for q in range(q_lo, q_hi + 1)]
    else:
        d, w = {'n43': (4, 3), 'n32': (3, 2)}.get(config.kind, (config.d, config.w))
        cells = [(n, d, w, q) for n in range(max(n_lo, w), n_hi + 1) for q in range(q_lo, q_hi + 1)]
    for n, d, w, q in cells:
        report = bounds.bound_report(n, d, w, q)
        rows.append({"n": n, "d": d, "w": w, "q": q, "lower": report.best_lower,
                     "upper": report.best_upper,
                     "exact": report.exact.value if report.exact else None,
                     "provenance": report.exact.provenance if report.exact else ""})
    return rows


def cmd_table(config: RunConfig) -> int:
    rows = _table_rows(config)
    lines = []
    if rows:
        columns = [c for c in rows[0] if c != "provenance"]
        lines.append('\t'.join(columns))
        for row in rows:
            cells = ['-' if row[c] is None else str(row[c]) for c in columns]
            if row.get("exact") is None and "lower" in row:
                cells[columns.index("exact")] = f"[{row['lower']},{row['upper']}]"
            lines.append('\t'.join(cells))
    _emit(config, {"kind": config.kind, "rows": rows}, lines)
    return 0


def _family_system(config: RunConfig) -> SetSystem:
    family, n = config.family, config.n
    if family == 'design-13-4':
        return design_13_4()
    if n is None:
        raise ParameterError(f"family '{family}' needs --n")
    if family == 'sts':
        return steiner_triple_system(n)
    if family == 'packing-5-mod-6':
        return maximum_packing_5_mod_6(n, seed=config.seed, budget=config.budget).as_system()
    return greedy_packing(n, config.w, config.t).as_system()


def _write_copies(config: RunConfig, systems: Sequence[SetSystem]) -> None:
    if not config.out:
        return
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    for i, system in enumerate(systems):
        write_design(out / f"copy_{i}.design", system)
    logger.info(f"Wrote {len(systems)} designs to {out}")


def cmd_search_disjoint(config: RunConfig) -> int:
    system = _family_system(config)
    if config.s is None or config.s < 1:
        raise ParameterError("--s must be >= 1")
    k = max(system.block_sizes) if len(system) else 0
    if config.s > 1 and len(system) * config.s > comb(system.point_count, k):
        raise ParameterError(f"{config.s} disjoint copies of {len(system)} blocks exceed "
                             f"C({system.point_count},{k}) = {comb(system.point_count, k)}")
    try:
        result = disjointify_search(system, config.s, seed=config.seed, budget=config.budget,
                                    workers=config.workers, separation=config.separation)
    except SearchBudgetExhausted as e:
        _write_copies(config, e.partial or [])
        raise
    _write_copies(config, result.systems)
    lines = [f"{config.family}: {config.s} copies of {len(system)} blocks on {system.point_count} points",
             f"moves={result.moves_used} restarts={result.restarts} "
             f"guaranteed_by_count={result.guaranteed_by_count}"]
    if not config.out:
        for i, copy in enumerate(result.systems):
            lines.append(f"copy {i}: " + ' '.join('{' + ','.join(map(str, b)) + '}' for b in copy.blocks))
    _emit(config, {"family": config.family, "result": result.to_dict(),
                   "systems": [[list(b) for b in c.blocks] for c in result.systems]}, lines)
    return 0


HANDLERS = {
    'bound': cmd_bound,
    'construct': cmd_construct,
    'verify': cmd_verify,
    'table': cmd_table,
    'search-disjoint': cmd_search_disjoint,
}


def run(config: RunConfig) -> int:
    """Execute one command and return its exit status"""
    try:
        return HANDLERS[config.command](config)
    except WorkbenchError as e:
        status = exit_code_for(e)
        logger.error(f"{config.command} failed ({type(e).__name__}): {e}")
        return status


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        configure_logging(args.log_level)
        config = config_from_args(args)
    except WorkbenchError as e:
        print(f"error: {e}", file=sys.stderr)
        return exit_code_for(e)
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
