"""Monte Carlo experiment driver.

Every scheme at a sweep point sees the same topology. Topologies depend only
on ``(base_seed, m_plus_1, trial)``, so a power sweep reuses one geometry per
trial across all budgets.
"""
from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .acoustics import PropagationParams, make_band_profile
from .errors import ConfigError, ContractError
from .optimizer import SolverConfig
from .routing import DbrRule, RouteResult, RouteStatus, Scheme, run_scheme
from .secrecy import Channel
from .topology import generate

CSV_COLUMNS = ("scheme", "m_plus_1", "pt_db", "trial", "seed", "sc", "hops", "status")
_SEED_MASK = (1 << 63) - 1


def db_to_linear(p_db: float) -> float:
    if not math.isfinite(p_db):
        raise ContractError("dB value must be finite")
    return 10.0 ** (p_db / 10.0)


def trial_seed(base_seed: int, m_plus_1: int, trial: int) -> int:
    """``base_seed`` XOR a BLAKE2b digest of ``"m_plus_1:trial"``, kept to 63 bits."""
    digest = hashlib.blake2b(f"{m_plus_1}:{trial}".encode(), digest_size=8).digest()
    return (int(base_seed) ^ int.from_bytes(digest, "big")) & _SEED_MASK


@dataclass(frozen=True)
class ExperimentConfig:
    schemes: tuple = tuple(s.value for s in Scheme)
    m_plus_1: tuple = (10,)
    pt_db: tuple = tuple(float(v) for v in range(100, 141, 5))
    n_subcarriers: int = 1024
    f_low_khz: float = 9.0
    f_high_khz: float = 15.0
    region_m: tuple = (5000.0, 5000.0)
    spreading_factor: float = 1.5
    noise_level_db: float = 50.0
    noise_decay_db: float = 18.0
    quad_panels: int = 4
    max_range_m: float = 2000.0
    eve_exclusion_m: float = 500.0
    sink_x_m: float | None = None
    dbr_rule: str = DbrRule.MIN_DEPTH.value
    trials: int = 200
    base_seed: int = 20240101
    solver: SolverConfig = field(default_factory=SolverConfig)

    def __post_init__(self):
        try:
            object.__setattr__(self, "schemes", tuple(Scheme(s).value for s in self.schemes))
            object.__setattr__(self, "m_plus_1", tuple(int(m) for m in self.m_plus_1))
            object.__setattr__(self, "pt_db", tuple(float(p) for p in self.pt_db))
            object.__setattr__(self, "region_m", tuple(float(r) for r in self.region_m))
            DbrRule(self.dbr_rule)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
        if not (self.schemes and self.m_plus_1 and self.pt_db):
            raise ConfigError("schemes, m_plus_1 and pt_db must be non-empty")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if min(self.m_plus_1) < 2:
            raise ConfigError("m_plus_1 values must be >= 2")
        if len(self.region_m) != 2:
            raise ConfigError("region_m is [width, height]")
        if not all(math.isfinite(p) for p in self.pt_db):
            raise ConfigError("pt_db values must be finite")

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        doc = dict(doc)
        if "solver" in doc:
            solver = doc["solver"]
            sknown = {f.name for f in dataclasses.fields(SolverConfig)}
            if not isinstance(solver, dict) or set(solver) - sknown:
                raise ConfigError(f"solver accepts only {sorted(sknown)}")
            try:
                doc["solver"] = SolverConfig(**solver)
            except (TypeError, ValueError) as exc:
                raise ConfigError(str(exc)) from exc
        try:
            return cls(**doc)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(doc)

    def to_dict(self) -> dict:
        doc = dataclasses.asdict(self)
        doc["schemes"], doc["m_plus_1"] = list(self.schemes), list(self.m_plus_1)
        doc["pt_db"], doc["region_m"] = list(self.pt_db), list(self.region_m)
        return doc

    @property
    def params(self) -> PropagationParams:
        return PropagationParams(self.spreading_factor, self.noise_level_db, self.noise_decay_db)

    def band(self):
        return make_band_profile(self.n_subcarriers, self.f_low_khz, self.f_high_khz,
                                 self.params, self.quad_panels)

    def topology(self, m_plus_1: int, trial: int):
        seed = trial_seed(self.base_seed, m_plus_1, trial)
        return generate(m_plus_1, self.region_m, seed, self.eve_exclusion_m, self.sink_x_m)


@dataclass(frozen=True)
class TrialRecord:
    scheme: str
    m_plus_1: int
    pt_db: float
    trial: int
    seed: int
    sc: float
    hops: int
    status: str
    route: RouteResult | None = field(default=None, repr=False, compare=False)

    def row(self) -> list:
        return [self.scheme, self.m_plus_1, repr(self.pt_db), self.trial, self.seed,
                repr(float(self.sc)), self.hops, self.status]


def _run_unit(args):
    cfg, m, trial, keep_routes = args
    band = cfg.band()
    topo = cfg.topology(m, trial)
    channel = Channel(topo, band)
    out = []
    for pt in cfg.pt_db:
        p_lin = db_to_linear(pt)
        for scheme in cfg.schemes:
            try:
                route = run_scheme(Scheme(scheme), topo, band, p_lin, cfg.solver,
                                   cfg.max_range_m, DbrRule(cfg.dbr_rule), channel)
            except Exception as exc:  # one bad trial must not sink the sweep
                out.append(TrialRecord(scheme, m, pt, trial, topo.seed, 0.0, 0,
                                       f"Error:{type(exc).__name__}"))
                continue
            delivered = route.status is RouteStatus.DELIVERED
            out.append(TrialRecord(scheme, m, pt, trial, topo.seed,
                                   route.end_to_end_sc if delivered else 0.0,
                                   route.n_hops, route.status.value,
                                   route if keep_routes else None))
    return out


def run_sweep(cfg: ExperimentConfig, workers: int = 1, keep_routes: bool = False) -> list:
    """Run every scheme on every (M+1, P_T, trial) point.

    Records are sorted by (M+1, P_T, trial, scheme order) whatever ``workers`` is.
    Void routes are recorded with SC = 0.
    """
    units = [(cfg, m, t, keep_routes) for m in cfg.m_plus_1 for t in range(cfg.trials)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_run_unit, units, chunksize=max(1, len(units) // (4 * workers))))
    else:
        chunks = [_run_unit(u) for u in units]
    order = {s: i for i, s in enumerate(cfg.schemes)}
    pts = {p: i for i, p in enumerate(cfg.pt_db)}
    ms = {m: i for i, m in enumerate(cfg.m_plus_1)}
    records = [r for chunk in chunks for r in chunk]
    records.sort(key=lambda r: (ms[r.m_plus_1], pts[r.pt_db], r.trial, order[r.scheme]))
    return records


def records_to_csv(records, fh=None) -> str | None:
    buf = fh if fh is not None else io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in records:
        writer.writerow(r.row())
    return buf.getvalue() if fh is None else None


@dataclass(frozen=True)
class Aggregate:
    scheme: str
    m_plus_1: int
    pt_db: float
    n: int
    mean_sc: float
    median_sc: float
    zero_sc_fraction: float
    void_fraction: float


def summarize(records) -> dict:
    """Aggregates keyed by ``(scheme, m_plus_1, pt_db)``.

    ``zero_sc_fraction`` counts every trial that delivered no secret bits,
    Void routes included; ``void_fraction`` isolates the routing holes.
    """
    records = list(records)
    if not records:
        raise ContractError("cannot summarize an empty record set")
    groups: dict = {}
    for r in records:
        groups.setdefault((r.scheme, r.m_plus_1, r.pt_db), []).append(r)
    out = {}
    for key, rs in groups.items():
        scs = [r.sc for r in rs]
        out[key] = Aggregate(
            *key, n=len(rs), mean_sc=statistics.fmean(scs), median_sc=statistics.median(scs),
            zero_sc_fraction=sum(v == 0.0 for v in scs) / len(rs),
            void_fraction=sum(r.status == RouteStatus.VOID.value for r in rs) / len(rs),
        )
    return out


def summary_table(summary: dict) -> str:
    lines = ["scheme,m_plus_1,pt_db,n,mean_sc,median_sc,zero_sc_fraction,void_fraction"]
    for a in summary.values():
        lines.append(f"{a.scheme},{a.m_plus_1},{a.pt_db:g},{a.n},{a.mean_sc:.6g},"
                     f"{a.median_sc:.6g},{a.zero_sc_fraction:.4f},{a.void_fraction:.4f}")
    return "\n".join(lines)
