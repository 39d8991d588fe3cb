"""(mu/mu_w, lambda)-CMA-ES for derivative-free maximization.

Follows the standard update equations (rank-one plus rank-mu covariance
update, cumulative step-size adaptation). Search happens in unbounded
coordinates; optional per-coordinate smooth maps send them into the
feasible box before the objective is called.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ObjectiveNonFinite

StopReason = str  # "tol_fun" | "tol_x" | "max_evals" | "stagnation"


@dataclass
class CmaesConfig:
    dim: int
    population: int | None = None
    sigma0: float = 0.3
    max_evals: int = 20000
    tol_fun: float = 1e-8
    tol_x: float = 1e-9
    seed: int = 0
    restarts: int = 12
    stagnation_gens: int = 60
    stagnation_tol: float = 1e-6
    init_spread: float = 1.0

    def __post_init__(self):
        if self.population is None:
            self.population = 4 + int(3 * math.log(self.dim))
        if self.population < 4:
            raise ValueError("population must be >= 4")
        if min(self.sigma0, self.tol_fun, self.tol_x, self.stagnation_tol) <= 0:
            raise ValueError("sigma0 and tolerances must be positive")
        if self.restarts < 1 or self.max_evals < 1:
            raise ValueError("restarts and max_evals must be >= 1")


@dataclass
class OptRun:
    best_x: np.ndarray
    best_f: float
    evals: int
    stop_reason: StopReason
    best_z: np.ndarray | None = None
    history: list = field(default_factory=list)
    runs: list = field(default_factory=list)


def _mapper(bounds: Sequence[Callable | None] | None, dim: int):
    if bounds is None:
        return lambda z: z
    if len(bounds) != dim:
        raise ValueError(f"need {dim} coordinate maps, got {len(bounds)}")

    def to_x(z):
        x = np.array(z, dtype=float, copy=True)
        for i, f in enumerate(bounds):
            if f is not None:
                x[..., i] = f(z[..., i])
        return x

    return to_x


def _single_run(objective, config: CmaesConfig, to_x, mean0: np.ndarray, rng: np.random.Generator,
                batch: bool) -> OptRun:
    n = config.dim
    lam = config.population
    mu = lam // 2
    w = math.log(mu + 0.5) - np.log(np.arange(1, mu + 1))
    w /= w.sum()
    mueff = 1.0 / np.sum(w**2)

    cc = (4 + mueff / n) / (n + 4 + 2 * mueff / n)
    cs = (mueff + 2) / (n + mueff + 5)
    c1 = 2 / ((n + 1.3) ** 2 + mueff)
    cmu = min(1 - c1, 2 * (mueff - 2 + 1 / mueff) / ((n + 2) ** 2 + mueff))
    damps = 1 + 2 * max(0.0, math.sqrt((mueff - 1) / (n + 1)) - 1) + cs
    chin = math.sqrt(n) * (1 - 1 / (4 * n) + 1 / (21 * n * n))

    mean = np.array(mean0, dtype=float)
    sigma = config.sigma0
    cov = np.eye(n)
    pc = np.zeros(n)
    ps = np.zeros(n)
    basis, diag = np.eye(n), np.ones(n)

    best_f, best_z = -np.inf, mean.copy()
    evals, gen = 0, 0
    history: list[float] = []
    gen_best: list[float] = []
    hist_len = 10 + int(math.ceil(30 * n / lam))
    last_improve_f, last_improve_gen = -np.inf, 0
    stop = "max_evals"

    while evals + lam <= config.max_evals:
        z = rng.standard_normal((lam, n))
        y = (z * diag) @ basis.T
        cand = mean + sigma * y
        xs = to_x(cand)
        if batch:
            f = np.asarray(objective(xs), dtype=float).reshape(lam)
        else:
            f = np.array([float(objective(x)) for x in xs])
        evals += lam
        if not np.all(np.isfinite(f)):
            raise ObjectiveNonFinite(f"objective returned {f[~np.isfinite(f)][0]!r}")
        order = np.argsort(-f, kind="stable")
        if f[order[0]] > best_f:
            best_f, best_z = float(f[order[0]]), cand[order[0]].copy()
        history.append(best_f)
        gen_best.append(float(f[order[0]]))
        gen += 1

        sel = y[order[:mu]]
        step = w @ sel
        mean = mean + sigma * step

        inv_sqrt = (basis / diag) @ basis.T
        ps = (1 - cs) * ps + math.sqrt(cs * (2 - cs) * mueff) * (inv_sqrt @ step)
        norm_ps = np.linalg.norm(ps)
        hsig = norm_ps / math.sqrt(1 - (1 - cs) ** (2 * gen)) / chin < 1.4 + 2 / (n + 1)
        pc = (1 - cc) * pc + hsig * math.sqrt(cc * (2 - cc) * mueff) * step
        rank_mu = (sel.T * w) @ sel
        cov = ((1 - c1 - cmu) * cov + c1 * (np.outer(pc, pc) + (1 - hsig) * cc * (2 - cc) * cov)
               + cmu * rank_mu)
        sigma *= math.exp((cs / damps) * (norm_ps / chin - 1))

        cov = 0.5 * (cov + cov.T)
        evals_c, basis = np.linalg.eigh(cov)
        floor = 1e-14 * float(np.trace(cov))
        if evals_c.min() < floor:
            evals_c = np.maximum(evals_c, floor)
            cov = (basis * evals_c) @ basis.T
        diag = np.sqrt(evals_c)

        if gen == 1 or best_f > last_improve_f + config.stagnation_tol * abs(last_improve_f):
            last_improve_f, last_improve_gen = best_f, gen
        recent = gen_best[-hist_len:]
        if gen >= hist_len and max(recent) - min(recent) < config.tol_fun and np.ptp(f) < config.tol_fun:
            stop = "tol_fun"
            break
        if sigma * max(diag.max(), np.abs(pc).max()) < config.tol_x:
            stop = "tol_x"
            break
        if gen - last_improve_gen >= config.stagnation_gens:
            stop = "stagnation"
            break

    return OptRun(to_x(best_z[None])[0], best_f, evals, stop, best_z, history)


def maximize(objective: Callable, config: CmaesConfig, bounds: Sequence[Callable | None] | None = None,
             x0=None, batch: bool = False) -> OptRun:
    """Maximize ``objective`` with ``config.restarts`` independently seeded CMA-ES runs.

    Args:
        objective: maps a point (or, with ``batch=True``, an array of
            points of shape ``(population, dim)``) to a real value.
        config: strategy parameters; ``seed`` fixes every run.
        bounds: one map per coordinate from the unbounded search space into
            the feasible set, or None for the identity.
        x0: initial mean in search coordinates for the first run. Later
            runs (and the first, when None) start from uniform draws in
            ``[-init_spread, init_spread]^dim``.

    Returns:
        The best run; ``runs`` lists every run in order.

    Raises:
        ObjectiveNonFinite: the objective returned NaN or inf.
    """
    to_x = _mapper(bounds, config.dim)
    seeds = np.random.SeedSequence(config.seed).spawn(config.restarts)
    runs = []
    for i, ss in enumerate(seeds):
        rng = np.random.default_rng(ss)
        start = rng.uniform(-config.init_spread, config.init_spread, config.dim)
        if i == 0 and x0 is not None:
            start = np.asarray(x0, dtype=float)
        runs.append(_single_run(objective, config, to_x, start, rng, batch))
    best = max(runs, key=lambda r: r.best_f)
    return OptRun(best.best_x, best.best_f, sum(r.evals for r in runs), best.stop_reason, best.best_z,
                  best.history, runs)
