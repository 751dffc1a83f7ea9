"""Self-checks of the hop solver against independent references.

Used by ``secroute validate``; the acceptance tests run the same checks at
full size.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .acoustics import make_band_profile
from .optimizer import (SolverConfig, Status, allocate_fixed_relay, grid_resolution_bound,
                        solve_candidates,
                        marginal_secrecy, oracle_allocation, solve_hop)
from .secrecy import Channel, LinkNoiseProfile, secrecy_capacity, secrecy_terms
from .topology import NetworkTopology


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail}"


def random_profile(rng, n, min_ratio=1.2, max_ratio=5.0) -> LinkNoiseProfile:
    """Moderate-scale link with Eve strictly noisier on every subcarrier."""
    w_rx = rng.uniform(0.2, 2.0, n)
    return LinkNoiseProfile(w_rx, w_rx * rng.uniform(min_ratio, max_ratio, n))


def check_oracle(n_instances=50, n_sub=4, resolution=40, seed=1,
                 cfg: SolverConfig = SolverConfig()) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst, budget_worst, fails = 0.0, 0.0, 0
    for _ in range(n_instances):
        prof = random_profile(rng, n_sub)
        p_total = rng.uniform(0.5, 20.0)
        res = solve_candidates([prof], p_total, cfg)
        _, oracle_val = oracle_allocation(prof, p_total, resolution)
        allowed = max(0.01 * oracle_val, grid_resolution_bound(prof, p_total, resolution))
        gap = abs(res.secrecy - oracle_val)
        budget = abs(res.allocated - p_total) / p_total
        worst = max(worst, gap / max(allowed, 1e-300))
        budget_worst = max(budget_worst, budget)
        if gap > allowed or budget > 1e-3 or res.status is not Status.CONVERGED:
            fails += 1
    return CheckResult(
        f"oracle equivalence (N={n_sub}, {n_instances} instances)", fails == 0,
        f"{fails} failures; worst gap/allowed={worst:.3g}; worst budget error={budget_worst:.2e}")


def kkt_residuals(prof: LinkNoiseProfile, p, lam):
    """Relative stationarity error on active subcarriers and slackness excess on inactive ones."""
    active = p > 0
    h = 1e-6 * np.maximum(p, 1e-3)
    up = secrecy_terms(prof.omega_rx, prof.omega_eve, p + h)
    down = secrecy_terms(prof.omega_rx, prof.omega_eve, np.maximum(p - h, 0.0))
    fd = (up - down) / (p + h - np.maximum(p - h, 0.0))
    stat = np.abs(fd[active] - lam) / lam
    slack = marginal_secrecy(prof.omega_rx, prof.omega_eve, 0.0)[~active] - lam
    return stat, slack


def check_kkt(n_instances=100, n_sub=64, seed=2, cfg: SolverConfig = SolverConfig()) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst_stat, worst_slack, fails = 0.0, -np.inf, 0
    for _ in range(n_instances):
        prof = random_profile(rng, n_sub, 1.01, 3.0)
        p_total = rng.uniform(1.0, 100.0)
        res = allocate_fixed_relay(prof, p_total, cfg)
        stat, slack = kkt_residuals(prof, res.power, res.lam)
        s = float(stat.max()) if stat.size else 0.0
        k = float((slack / res.lam).max()) if slack.size else -np.inf
        worst_stat, worst_slack = max(worst_stat, s), max(worst_slack, k)
        if res.status is not Status.CONVERGED or s > 1e-5 or k > 1e-12:
            fails += 1
    return CheckResult(
        f"KKT conditions (N={n_sub}, {n_instances} instances)", fails == 0,
        f"{fails} failures; worst stationarity={worst_stat:.2e}; worst slackness excess={worst_slack:.2e}")


def exposed_topology(rng, n_candidates=4) -> NetworkTopology:
    """A sender with Eve strictly closer than every shallower candidate."""
    sender = np.array([2500.0, 3000.0])
    eve_r = rng.uniform(50.0, 400.0)
    ang = rng.uniform(0, 2 * np.pi)
    eve = sender + eve_r * np.array([np.cos(ang), np.sin(ang)])
    pts = []
    while len(pts) < n_candidates:
        r = rng.uniform(eve_r + 10.0, 1900.0)
        a = rng.uniform(np.pi, 2 * np.pi)  # upper half-plane: shallower than the sender
        q = sender + r * np.array([np.cos(a), np.sin(a)])
        if 0 < q[1] < sender[1] and 0 <= q[0] <= 5000:
            pts.append(q)
    xs = [sender[0]] + [q[0] for q in pts] + [2500.0, eve[0]]
    ds = [sender[1]] + [q[1] for q in pts] + [0.0, eve[1]]
    return NetworkTopology(np.array(xs), np.array(ds), (5000.0, 5000.0))


def check_zero_secrecy(n_cases=100, seed=3, n_sub=64, cfg: SolverConfig = SolverConfig()) -> CheckResult:
    rng = np.random.default_rng(seed)
    band = make_band_profile(n_sub)
    fails = 0
    for _ in range(n_cases):
        topo = exposed_topology(rng)
        ch = Channel(topo, band)
        res = solve_hop(ch, topo.source_id, 1e11, cfg, max_range=2000.0)
        ok = (res.status is Status.ZERO_SECRECY and res.secrecy == 0.0 and res.iterations == 0
              and not np.any(res.power) and res.selected is not None)
        fails += not ok
    return CheckResult(f"zero-secrecy short-circuit ({n_cases} cases)", fails == 0,
                       f"{fails} failures")


def run_all(n_instances=20, cfg: SolverConfig = SolverConfig()) -> list:
    return [
        check_oracle(n_instances, cfg=cfg),
        check_kkt(n_instances, n_sub=16, cfg=cfg),
        check_zero_secrecy(n_instances, cfg=cfg),
    ]
