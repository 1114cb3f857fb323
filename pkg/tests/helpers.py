"""Shared random instances and their (expensive) solver results, computed once per run."""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from functools import lru_cache

from prtower.dieudonne import random_module
from prtower.padic import PadicContext
from prtower.solver import (ModuleSeries, ceil_log, solve, theta_direct, theta_levels_via_solver,
                            trace_identity_defect, valuation_bound_check)

N, D = 64, 100
PRIMES = (3, 5, 7)
SEED = 20240611
COUNT = 21


@dataclass
class Instance:
    p: int
    d: int
    g: ModuleSeries
    support: list
    results: dict = field(default_factory=dict)


def _random_g(ctx, module, rng) -> tuple[ModuleSeries, list]:
    p = ctx.p
    allowed = [i for i in range(1, 13) if i % p]
    support = sorted(rng.sample(allowed, rng.randint(1, 4)))
    parts = []
    for _ in range(module.rank):
        parts.append({e: rng.randrange(-40, 41) or 1 for e in support if rng.random() < 0.8})
    if not any(parts):
        parts[0] = {support[0]: 1}
    return ModuleSeries.from_psi_zero(module, parts, ctx), support


@lru_cache(maxsize=1)
def instances() -> tuple[Instance, ...]:
    rng = random.Random(SEED)
    out = []
    for k in range(COUNT):
        p = PRIMES[k % 3]
        d = 1 + (k // 3) % 3
        ctx = PadicContext(p, N, degree_cap=D)
        module = random_module(ctx, d, rng)
        g, support = _random_g(ctx, module, rng)
        out.append(Instance(p, d, g, support))
    return tuple(out)


def solved(inst: Instance) -> dict:
    """Solve, the three theta levels both ways, trace defects and the valuation bound."""
    r = inst.results
    if r:
        return r
    t0 = time.perf_counter()
    G, rep = solve(inst.g)
    r["solve_seconds"] = time.perf_counter() - t0
    r["G"], r["report"] = G, rep
    r["loss_allowed"] = rep.s + rep.r * ceil_log(inst.g.D, inst.p)
    r["via"] = theta_levels_via_solver(inst.g, 3)
    r["direct"] = [theta_direct(inst.g, n) for n in (1, 2, 3)]
    r["trace_defect"] = {n: trace_identity_defect(inst.g, n) for n in (1, 2)}
    r["valuation_bound"] = valuation_bound_check(inst.g, 3)
    return r
