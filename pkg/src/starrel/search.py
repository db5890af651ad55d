"""
Numerical representation search
~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~
Multi-restart finite-difference gradient descent over tuples of complex
``n x n`` matrices, minimising the smooth relation residual. A second
entry point pushes one generator's norm up to a target while keeping the
relations satisfied, which is how unboundedness evidence is produced.

Each restart ``r`` draws its starting point from the RNG stream
``(seed, r)``, so a run is reproducible bit for bit and independent of the
order in which restarts are executed.
"""
from __future__ import annotations

import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import ncexpr as nc
from .errors import UnboundGenerator, UnknownName
from .matrep import RepTuple, op_norm
from .relations import Block, EqZero, OrderChain, RelationSet, check, residual, smooth_objective

ARMIJO = 1e-4
MAX_HALVINGS = 60
STALL_ITERS = 25


@dataclass(frozen=True)
class SearchConfig:
    dim: int = 2
    restarts: int = 8
    max_iters: int = 2000
    init_scale: float = 1.0
    seed: int = 0
    success_tol: float = 1e-7
    penalty_weight: float = 1.0
    workers: int = 1

    def __post_init__(self):
        if self.dim < 1 or self.restarts < 1 or self.max_iters < 0:
            raise ValueError("dim and restarts must be positive, max_iters non-negative")
        if not self.init_scale > 0 or not self.success_tol > 0 or self.penalty_weight < 0:
            raise ValueError("init_scale and success_tol must be positive, penalty_weight non-negative")


@dataclass(frozen=True)
class RestartOutcome:
    index: int
    rep: RepTuple
    residual: float
    converged: bool
    iterations: int
    history: tuple


@dataclass(frozen=True)
class SearchResult:
    best: RepTuple
    residual: float
    iterations: int
    converged: bool
    history: tuple = ()
    restart_results: tuple = field(default=(), repr=False)

    def to_json(self) -> dict:
        from .matrep import rep_to_json

        return {"converged": self.converged, "residual": self.residual, "iterations": self.iterations,
                "best": rep_to_json(self.best),
                "history": [[i, v] for i, v in self.history],
                "restarts": [{"index": o.index, "residual": o.residual, "converged": o.converged,
                              "iterations": o.iterations} for o in self.restart_results]}


class _Problem:
    """Real parameterisation: per generator, n*n real parts then n*n imaginary parts."""

    def __init__(self, R: RelationSet, dim: int):
        self.R = R
        self.dim = dim
        self.gens = R.generators
        self.block = 2 * dim * dim
        self.size = self.block * len(self.gens)

    def arrays(self, theta: np.ndarray) -> dict:
        n = self.dim
        batch = theta.shape[:-1]
        out = {}
        for k, g in enumerate(self.gens):
            chunk = theta[..., k * self.block:(k + 1) * self.block]
            re, im = chunk[..., :n * n], chunk[..., n * n:]
            out[g] = (re + 1j * im).reshape(batch + (n, n))
        return out

    def rep(self, theta: np.ndarray) -> RepTuple:
        return RepTuple(self.dim, self.arrays(theta))

    def objective(self, thetas: np.ndarray) -> np.ndarray:
        return smooth_objective(self.R, self.arrays(thetas), self.dim, thetas.shape[:-1])


def _gradient(f, theta: np.ndarray) -> np.ndarray:
    p = theta.size
    h = 1e-6 * (1 + np.linalg.norm(theta))
    steps = np.eye(p) * h
    vals = f(np.concatenate([theta + steps, theta - steps]))
    return (vals[:p] - vals[p:]) / (2 * h)


def _descend(f, theta, max_iters, done):
    """Gradient descent with Barzilai-Borwein trial steps and Armijo backtracking.

    Returns ``(theta, iterations, history)``; ``history`` holds the accepted
    objective values and is strictly decreasing.
    """
    fval = float(f(theta[None])[0])
    history = [(0, fval)]
    t = 1.0
    prev = None
    stalls = 0
    it = 0
    for it in range(1, max_iters + 1):
        if done(theta):
            return theta, it - 1, history
        g = _gradient(f, theta)
        gn2 = float(g @ g)
        if gn2 == 0.0 or not np.isfinite(gn2):
            break
        if prev is not None:
            s, y = theta - prev[0], g - prev[1]
            sy = float(s @ y)
            t = float(s @ s) / sy if sy > 0 else 2 * t
        t = min(t, 1e6)
        for _ in range(MAX_HALVINGS):
            cand = theta - t * g
            fc = float(f(cand[None])[0])
            if fc <= fval - ARMIJO * t * gn2:
                break
            t *= 0.5
        else:
            break
        prev = (theta, g)
        stalls = stalls + 1 if fval - fc <= 1e-15 * (1 + abs(fval)) else 0
        theta, fval = cand, fc
        history.append((it, fval))
        if stalls >= STALL_ITERS:
            break
    return theta, it, history


def _initial(problem: _Problem, cfg: SearchConfig, restart: int) -> np.ndarray:
    rng = np.random.default_rng([cfg.seed, restart])
    return rng.standard_normal(problem.size) * (cfg.init_scale / np.sqrt(2))


def _run_restarts(cfg: SearchConfig, job):
    if cfg.workers > 1:
        with ThreadPoolExecutor(cfg.workers) as pool:
            return list(pool.map(job, range(cfg.restarts)))
    return [job(r) for r in range(cfg.restarts)]


def find_representation(R: RelationSet, cfg: SearchConfig = SearchConfig()) -> SearchResult:
    """Search for a ``cfg.dim``-dimensional representation of ``R``.

    Converged means the total check residual is at most ``cfg.success_tol``;
    non-convergence is a result, not an error.
    """
    problem = _Problem(R, cfg.dim)

    def done(theta):
        return residual(R, problem.rep(theta)) <= cfg.success_tol

    def job(r):
        theta, iters, hist = _descend(problem.objective, _initial(problem, cfg, r), cfg.max_iters, done)
        rep = problem.rep(theta)
        res = residual(R, rep)
        return RestartOutcome(r, rep, res, res <= cfg.success_tol, iters, tuple(hist))

    outcomes = _run_restarts(cfg, job)
    best = min(outcomes, key=lambda o: (o.residual, o.index))
    return SearchResult(best.rep, best.residual, best.iterations, best.converged, best.history, tuple(outcomes))


def probe_norm_bound(R: RelationSet, g: str, target: float, cfg: SearchConfig = SearchConfig()) -> RepTuple | None:
    """Look for a representation with ``norm(g) >= target``.

    Minimises ``residual - mu * min(frob(g) / sqrt(n), 1.01 * target)``; the
    Frobenius proxy never exceeds the operator norm. A candidate is
    accepted only after re-checking the true operator norm and the
    relations at ``cfg.success_tol``.
    """
    if g not in R.generators:
        raise UnboundGenerator(f"{g!r} is not a generator of the relation set")
    if not target > 0:
        raise ValueError("target norm must be positive")
    problem = _Problem(R, cfg.dim)
    k = R.generators.index(g)
    cap = 1.01 * target
    mu = cfg.penalty_weight

    def f(thetas):
        chunk = thetas[..., k * problem.block:(k + 1) * problem.block]
        proxy = np.linalg.norm(chunk, axis=-1) / np.sqrt(cfg.dim)
        return problem.objective(thetas) - mu * np.minimum(proxy, cap)

    def accept(theta):
        rep = problem.rep(theta)
        return op_norm(rep.gens[g]) >= target and check(R, rep, cfg.success_tol).satisfied

    def job(r):
        theta, _, _ = _descend(f, _initial(problem, cfg, r), cfg.max_iters, accept)
        return problem.rep(theta) if accept(theta) else None

    if cfg.workers > 1:
        found = _run_restarts(cfg, job)
        return next((w for w in found if w is not None), None)
    for r in range(cfg.restarts):
        w = job(r)
        if w is not None:
            return w
    return None


# --------------------------------------------------------------------------
# closed-form witnesses

_IDEMPOTENT = re.compile(r"idempotent(?:\(([^)]*)\))?\Z")


def seeded_witness(name: str, t: float = 1.0) -> RepTuple:
    """Closed-form tuples: ``idempotent`` (or ``idempotent(t)``), ``projection_rank1``, ``half_block_P``."""
    m = _IDEMPOTENT.match(name)
    if m:
        if m.group(1) is not None:
            t = float(m.group(1))
        return RepTuple.of(x=[[1, t], [0, 0]])
    if name == "projection_rank1":
        return RepTuple.of(x=[[1, 0], [0, 0]])
    if name == "half_block_P":
        return RepTuple.of(h=[[0.5]], k=[[0.5]], x=[[0.5]])
    raise UnknownName(f"no witness named {name!r}")


def witness_relations(name: str) -> RelationSet:
    """The relation set each library witness satisfies."""
    x, h, k = nc.gens("x", "h", "k")
    if _IDEMPOTENT.match(name):
        return RelationSet(("x",), (EqZero(x * x - x),))
    if name == "projection_rank1":
        return RelationSet(("x",), (EqZero(x.adj * x - x),))
    if name == "half_block_P":
        P = Block(((1 - h, x.adj), (x, k)))
        return RelationSet(("h", "k", "x"), (OrderChain((0, nc.Gen("P"), 1)),), {"P": P})
    raise UnknownName(f"no witness named {name!r}")
