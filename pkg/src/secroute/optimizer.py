"""Per-hop joint relay selection and subcarrier power allocation.

The hop problem is a binary relay choice coupled with a power budget. It is
handled by dual decomposition: for a fixed power price ``lam`` each
candidate's allocation has a closed form, the candidate with the largest
Lagrangian is selected, and ``lam`` follows the budget subgradient
``lam += step * (P_alloc - P_T)``.
"""
from __future__ import annotations

import enum
import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError, DomainError
from .secrecy import Channel, LinkNoiseProfile, secrecy_capacity, secrecy_terms
from .topology import NodeId

LN2 = math.log(2.0)
ORACLE_MAX_SUBCARRIERS = 6
_BRACKET_COLLAPSE = 1e-12
_RECOVERY_TAIL = 50


class Status(str, enum.Enum):
    CONVERGED = "Converged"
    ZERO_SECRECY = "ZeroSecrecy"
    NO_CANDIDATE = "NoCandidate"
    MAX_ITERATIONS = "MaxIterations"


@dataclass(frozen=True)
class SolverConfig:
    """Dual-loop settings.

    ``lambda0=None`` warm-starts the price from the marginal secrecy under
    equal power loading. The step is applied to ``log(lam)`` with the budget
    error normalised by ``P_T``; ``schedule`` is ``"diminishing"``
    (``step0/sqrt(m)``) or ``"constant"``.
    """

    lambda0: float | None = None
    step0: float = 1.0
    schedule: str = "diminishing"
    budget_tol: float = 1e-3
    max_iter: int = 10_000
    lambda_min: float = 1e-300

    def __post_init__(self):
        if self.lambda0 is not None and not self.lambda0 > 0:
            raise ContractError("lambda0 must be positive")
        if not (self.step0 > 0 and self.budget_tol > 0 and self.lambda_min > 0):
            raise ContractError("step0, budget_tol and lambda_min must be positive")
        if self.max_iter < 1:
            raise ContractError("max_iter must be >= 1")
        if self.schedule not in ("diminishing", "constant"):
            raise ContractError(f"unknown step schedule {self.schedule!r}")

    def step(self, m: int) -> float:
        return self.step0 / math.sqrt(m) if self.schedule == "diminishing" else self.step0


@dataclass
class AllocationResult:
    selected: NodeId | None
    power: np.ndarray
    lam: float
    secrecy: float
    iterations: int
    status: Status
    lambda_history: list = field(default_factory=list, repr=False)
    palloc_history: list = field(default_factory=list, repr=False)
    candidate_lagrangians: dict = field(default_factory=dict, repr=False)

    @property
    def allocated(self) -> float:
        return float(np.sum(self.power))

    def diagnostics(self) -> dict:
        return {
            "selected": None if self.selected is None else str(self.selected),
            "status": self.status.value,
            "lambda": self.lam,
            "secrecy": self.secrecy,
            "allocated": self.allocated,
            "iterations": self.iterations,
            "lambda_history": [float(v) for v in self.lambda_history],
            "palloc_history": [float(v) for v in self.palloc_history],
            "candidate_lagrangians": {k: float(v) for k, v in self.candidate_lagrangians.items()},
        }

    def diagnostics_json(self, **kw) -> str:
        return json.dumps(self.diagnostics(), **kw)


def _kkt_power(omega_rx, omega_eve, lam):
    """Closed-form stationary power, broadcasting over candidates and subcarriers.

    Dividing the quadratic ``a p^2 + b p + c`` by ``a = omega_rx*omega_eve``
    gives ``p^2 + (omega_rx + omega_eve) p + omega_rx*omega_eve - g/(lam ln2)``
    with ``g = omega_eve - omega_rx``. The positive root is taken in the
    cancellation-free form ``-2q / (s + sqrt(s^2 - 4q))``.
    """
    gain = omega_eve - omega_rx
    s = omega_rx + omega_eve
    q = omega_rx * omega_eve - gain / (lam * LN2)
    active = (gain > 0) & (q < 0)
    qa = np.where(active, q, 0.0)
    disc = s * s - 4.0 * qa
    with np.errstate(invalid="ignore", divide="ignore"):
        root = -2.0 * qa / (s + np.sqrt(np.maximum(disc, 0.0)))
    return np.where(active & (disc >= 0), root, 0.0)


def inner_power_allocation(profile: LinkNoiseProfile, lam: float) -> np.ndarray:
    if not (lam > 0 and math.isfinite(lam)):
        raise DomainError(f"power price must be positive and finite, got {lam}")
    return _kkt_power(profile.omega_rx, profile.omega_eve, lam)


def marginal_secrecy(omega_rx, omega_eve, p):
    """d/dp of the per-subcarrier secrecy term."""
    return (omega_eve - omega_rx) / ((omega_rx + p) * (omega_eve + p) * LN2)


def evaluate_lagrangian(profile: LinkNoiseProfile, p, lam: float, p_total: float) -> float:
    p = np.asarray(p, dtype=float)
    if p.shape != profile.omega_rx.shape:
        raise ContractError(f"power vector shape {p.shape} != {profile.omega_rx.shape}")
    return _lagrangian_rows(profile.omega_rx[None, :], profile.omega_eve, p[None, :],
                            lam, p_total)[0]


def _lagrangian_rows(w_rx, w_eve, p, lam, p_total):
    n = w_rx.shape[-1]
    sec = np.sum(secrecy_terms(w_rx, w_eve, p), axis=-1)
    return sec + n * lam * p_total - lam * np.sum(p, axis=-1)


def _stack(profiles):
    w_rx = np.stack([pr.omega_rx for pr in profiles])
    w_eve = profiles[0].omega_eve
    for pr in profiles[1:]:
        if pr.omega_eve.shape != w_eve.shape or not np.array_equal(pr.omega_eve, w_eve):
            raise ContractError("all candidates of one hop share the sender's Eve channel")
    return w_rx, w_eve


def _argmax_lagrangian(w_rx, w_eve, lam, p_total):
    p = _kkt_power(w_rx, w_eve, lam)
    lag = _lagrangian_rows(w_rx, w_eve, p, lam, p_total)
    return int(np.argmax(lag)), p, lag


def select_node(channel: Channel, sender, candidates, lam: float, p_total: float):
    """Pick the candidate maximising the Lagrangian at price ``lam``.

    Returns ``(node or None, {str(node): L})``. Ties go to the lowest index.
    """
    cands = sorted(candidates)
    if not cands:
        return None, {}
    if not (lam > 0 and math.isfinite(lam)):
        raise DomainError(f"power price must be positive and finite, got {lam}")
    w_rx, w_eve = _stack([channel.profile(sender, c) for c in cands])
    best, _, lag = _argmax_lagrangian(w_rx, w_eve, lam, p_total)
    return cands[best], {str(c): float(v) for c, v in zip(cands, lag)}


def _warm_start(w_rx, w_eve, p_total):
    pe = p_total / w_rx.shape[-1]
    m = marginal_secrecy(w_rx, w_eve, pe)
    pos = m > 0
    count = pos.sum(axis=-1)
    per_cand = np.where(pos, m, 0.0).sum(axis=-1)[count > 0] / count[count > 0]
    if per_cand.size == 0:
        return 1.0
    return float(np.exp(np.mean(np.log(per_cand))))


def price_update(lam: float, p_alloc: float, p_total: float, step: float) -> float:
    """One subgradient step on the power price, taken on ``log(lam)``.

    The budget error is normalised by ``P_T`` and clipped to [-1, 1], so the
    price moves by at most a factor ``e**step``; sign and fixed point match
    ``lam + step * (P_alloc - P_T)``.
    """
    err = (p_alloc - p_total) / p_total
    return lam * math.exp(step * max(-1.0, min(1.0, err)))


@dataclass
class _DualTrace:
    index: int
    power: np.ndarray
    lam: float
    iterations: int
    converged: bool
    lam_hist: list
    palloc_hist: list
    selected_hist: list
    lagrangians: np.ndarray


def _dual_search(w_rx, w_eve, p_total, cfg: SolverConfig) -> _DualTrace:
    """Subgradient search on the power price, safeguarded by a bracket.

    Prices known to overspend form a lower bound and prices known to
    underspend an upper bound; a step that would leave the bracket is
    replaced by its geometric midpoint.
    """
    lam0 = cfg.lambda0 if cfg.lambda0 is not None else _warm_start(w_rx, w_eve, p_total)
    log_min = math.log(cfg.lambda_min)
    log_lam = max(math.log(lam0), log_min)
    lo, hi = -math.inf, math.inf
    lam_hist, palloc_hist, sel_hist = [], [], []
    for m in range(1, cfg.max_iter + 1):
        lam = math.exp(log_lam)
        i, p, lag = _argmax_lagrangian(w_rx, w_eve, lam, p_total)
        alloc = float(np.sum(p[i]))
        lam_hist.append(lam)
        palloc_hist.append(alloc)
        sel_hist.append(i)
        err = (alloc - p_total) / p_total
        if abs(err) <= cfg.budget_tol:
            return _DualTrace(i, p[i], lam, m, True, lam_hist, palloc_hist, sel_hist, lag)
        if err > 0:
            lo = max(lo, log_lam)
        else:
            hi = min(hi, log_lam)
        if hi - lo < _BRACKET_COLLAPSE or (err < 0 and log_lam <= log_min):
            break
        nxt = math.log(price_update(lam, alloc, p_total, cfg.step(m)))
        if not lo < nxt < hi:
            nxt = 0.5 * (lo + hi) if math.isfinite(lo) and math.isfinite(hi) else nxt
        log_lam = max(nxt, log_min)
    return _DualTrace(i, p[i], lam, m, False, lam_hist, palloc_hist, sel_hist, lag)


def _zero_result(selected, n, iterations=0, status=Status.ZERO_SECRECY):
    return AllocationResult(selected, np.zeros(n), math.nan, 0.0, iterations, status)


def allocate_fixed_relay(profile: LinkNoiseProfile, p_total: float,
                         cfg: SolverConfig = SolverConfig()) -> AllocationResult:
    """Optimal power loading towards a single, already chosen receiver."""
    if not (p_total > 0 and math.isfinite(p_total)):
        raise DomainError(f"power budget must be positive, got {p_total}")
    if not profile.has_secrecy:
        return _zero_result(profile.rx, profile.n)
    tr = _dual_search(profile.omega_rx[None, :], profile.omega_eve, p_total, cfg)
    return AllocationResult(
        profile.rx, tr.power, tr.lam, secrecy_capacity(profile, tr.power), tr.iterations,
        Status.CONVERGED if tr.converged else Status.MAX_ITERATIONS,
        tr.lam_hist, tr.palloc_hist,
    )


def _nearest_to_sink(channel: Channel, cands):
    topo = channel.topo
    return min(cands, key=lambda c: (topo.distance(c, topo.sink), c.index))


def solve_candidates(profiles, p_total: float, cfg: SolverConfig = SolverConfig(),
                     fallback=None) -> AllocationResult:
    """Dual decomposition over pre-computed candidate links of one sender.

    ``profiles`` must be ordered by receiver index. ``fallback`` picks the
    relay when no candidate offers any secrecy (default: the first one).

    If the selected candidate flips back and forth at one price (a kink of
    the dual function), the relays seen in the tail of the loop are each
    solved to budget and the best secrecy capacity wins.
    """
    if not (p_total > 0 and math.isfinite(p_total)):
        raise DomainError(f"power budget must be positive, got {p_total}")
    profiles = list(profiles)
    if not profiles:
        return _zero_result(None, 0, status=Status.NO_CANDIDATE)
    n = profiles[0].n
    if not any(pr.has_secrecy for pr in profiles):
        sel = fallback([pr.rx for pr in profiles]) if fallback else profiles[0].rx
        return _zero_result(sel, n)

    w_rx, w_eve = _stack(profiles)
    tr = _dual_search(w_rx, w_eve, p_total, cfg)
    lags = {str(pr.rx): float(v) for pr, v in zip(profiles, tr.lagrangians)}
    if tr.converged:
        pr = profiles[tr.index]
        return AllocationResult(pr.rx, tr.power, tr.lam, secrecy_capacity(pr, tr.power),
                                tr.iterations, Status.CONVERGED, tr.lam_hist, tr.palloc_hist, lags)

    best = None
    for i in sorted(set(tr.selected_hist[-_RECOVERY_TAIL:])):
        res = allocate_fixed_relay(profiles[i], p_total, cfg)
        if best is None or res.secrecy > best.secrecy:
            best = res
    status = best.status
    if status is Status.ZERO_SECRECY:
        status = Status.MAX_ITERATIONS
    return AllocationResult(best.selected, best.power, best.lam, best.secrecy,
                            tr.iterations + best.iterations, status,
                            tr.lam_hist + best.lambda_history,
                            tr.palloc_hist + best.palloc_history, lags)


def solve_hop(channel: Channel, sender, p_total: float, cfg: SolverConfig = SolverConfig(),
              candidates=None, max_range: float | None = None, visited=()) -> AllocationResult:
    """Joint relay choice and power loading for one hop.

    ``candidates`` defaults to ``topo.candidates(sender, max_range, visited)``.
    When every candidate is at least as exposed to Eve as to the sender the
    loop cannot meet the budget, so the hop returns ``ZeroSecrecy`` with no
    power and the candidate nearest the sink as relay.
    """
    if not (p_total > 0 and math.isfinite(p_total)):
        raise DomainError(f"power budget must be positive, got {p_total}")
    topo = channel.topo
    if candidates is None:
        kw = {} if max_range is None else {"max_range": max_range}
        candidates = topo.candidates(sender, visited=visited, **kw)
    cands = sorted(candidates)
    if not cands:
        return _zero_result(None, channel.band.n_subcarriers, status=Status.NO_CANDIDATE)
    profiles = [channel.profile(sender, c) for c in cands]
    return solve_candidates(profiles, p_total, cfg, lambda cs: _nearest_to_sink(channel, cs))


def _simplex_grid(n, resolution):
    """All integer vectors of length ``n`` with entries >= 0 summing to <= resolution."""
    bars = np.array(list(itertools.combinations(range(resolution + n), n)), dtype=np.int64)
    prev = np.concatenate([np.full((bars.shape[0], 1), -1), bars[:, :-1]], axis=1)
    return bars - prev - 1


def grid_resolution_bound(profile: LinkNoiseProfile, p_total: float, resolution: int) -> float:
    """Upper bound on how far the grid optimum may sit below the true optimum."""
    slope0 = np.maximum(marginal_secrecy(profile.omega_rx, profile.omega_eve, 0.0), 0.0)
    return float(np.sum(slope0) * p_total / resolution)


def oracle_allocation(profile: LinkNoiseProfile, p_total: float, resolution: int = 40):
    """Exhaustive grid search of the secrecy capacity over ``{p >= 0, sum p <= P_T}``.

    Returns ``(best power vector, best secrecy capacity)``.
    """
    n = profile.n
    if n > ORACLE_MAX_SUBCARRIERS:
        raise ContractError(f"grid oracle supports at most {ORACLE_MAX_SUBCARRIERS} subcarriers")
    if resolution < 1 or not p_total > 0:
        raise ContractError("need resolution >= 1 and a positive budget")
    grid = _simplex_grid(n, resolution)
    step = p_total / resolution
    best_val, best_p = -1.0, None
    for chunk in np.array_split(grid, max(1, grid.shape[0] // 200_000)):
        p = chunk * step
        val = np.maximum(np.sum(secrecy_terms(profile.omega_rx, profile.omega_eve, p), axis=1), 0.0)
        k = int(np.argmax(val))
        if val[k] > best_val:
            best_val, best_p = float(val[k]), p[k].copy()
    return best_p, best_val
