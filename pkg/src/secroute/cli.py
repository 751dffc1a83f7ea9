"""Command-line entry point: ``secroute {simulate,sweep,validate,topo}``."""
from __future__ import annotations

import argparse
import json
import sys

from .errors import ConfigError, ContractError, DomainError, GenerationError
from .harness import ExperimentConfig, db_to_linear, records_to_csv, run_sweep, summarize, summary_table
from .routing import DbrRule, Scheme, run_scheme
from .secrecy import Channel
from .topology import NetworkTopology, generate
from . import validation

EXIT_OK, EXIT_CONFIG, EXIT_VALIDATION = 0, 1, 2


def _config(path) -> ExperimentConfig:
    return ExperimentConfig.load(path) if path else ExperimentConfig()


def _topology(args, cfg: ExperimentConfig) -> NetworkTopology:
    if args.topology:
        try:
            with open(args.topology) as fh:
                return NetworkTopology.from_json(fh.read())
        except (OSError, ValueError, KeyError) as exc:
            raise ConfigError(f"cannot load topology {args.topology}: {exc}") from exc
    m = args.m_plus_1 if args.m_plus_1 is not None else cfg.m_plus_1[0]
    return generate(m, cfg.region_m, args.seed, cfg.eve_exclusion_m, cfg.sink_x_m)


def cmd_topo(args) -> int:
    cfg = _config(args.config)
    text = _topology(args, cfg).to_json(indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = _config(args.config)
    topo = _topology(args, cfg)
    band = cfg.band()
    pt = args.pt_db if args.pt_db is not None else cfg.pt_db[0]
    route = run_scheme(Scheme(args.scheme), topo, band, db_to_linear(pt), cfg.solver,
                       cfg.max_range_m, DbrRule(cfg.dbr_rule), Channel(topo, band))
    doc = route.to_dict()
    doc.update(pt_db=pt, seed=topo.seed)
    if args.diagnostics:
        doc["allocations"] = [a.diagnostics() for a in route.allocations]
    print(json.dumps(doc, indent=2))
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _config(args.config)
    records = run_sweep(cfg, workers=args.workers)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            records_to_csv(records, fh)
    else:
        sys.stdout.write(records_to_csv(records))
    if args.summary:
        print(summary_table(summarize(records)), file=sys.stderr)
    return EXIT_OK


def cmd_validate(args) -> int:
    results = validation.run_all(args.instances)
    for r in results:
        print(r.line())
    return EXIT_OK if all(r.passed for r in results) else EXIT_VALIDATION


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="secroute", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def geometry(sp):
        sp.add_argument("--config", help="experiment config JSON")
        sp.add_argument("--topology", help="topology JSON (overrides --m-plus-1/--seed)")
        sp.add_argument("--m-plus-1", type=int, dest="m_plus_1")
        sp.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("topo", help="generate a topology and dump it as JSON")
    geometry(sp)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_topo)

    sp = sub.add_parser("simulate", help="route one topology with one scheme")
    geometry(sp)
    sp.add_argument("--scheme", default=Scheme.SECURE_OPTIMAL.value,
                    choices=[s.value for s in Scheme])
    sp.add_argument("--pt-db", type=float, dest="pt_db")
    sp.add_argument("--diagnostics", action="store_true", help="include per-hop solver traces")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("sweep", help="run a Monte Carlo experiment and write CSV")
    sp.add_argument("--config")
    sp.add_argument("--out")
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--summary", action="store_true", help="print aggregates to stderr")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("validate", help="oracle, KKT and zero-secrecy self-checks")
    sp.add_argument("--instances", type=int, default=20)
    sp.set_defaults(func=cmd_validate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ContractError, DomainError, GenerationError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
