"""Seeded random search for violations of the refinement chain.

Every trial draws from its own PCG64 stream seeded by ``SeedSequence(seed,
spawn_key=(trial,))``, so a trial's instance depends only on the config seed
and its index. Positive values are drawn log-uniformly from ``value_range``.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import NamedTuple

import numpy as np

from .core import IndexGrid2D, IndexRange1D, Interval, PiecewiseLinear, Rectangle, Samples
from .functional import Functional, Partition, make_partition
from .hh import classical_corner_bound, improved_corner_bound
from .holder import CHAIN_RTOL, ConjugateExponents, reversed_holder, verify_chain
from .quadrature import QuadratureRule, integrate_1d

CASES = ("discrete-1d", "discrete-2d", "integral-1d", "integral-2d", "corner-bounds", "reversed-discrete")

# cheap rule for random piecewise-linear instances; knots sit on panel edges
FUZZ_RULE = QuadratureRule("gauss-legendre-composite", panels=8, nodes_per_panel=3)
ORACLE_RTOL = 1e-10


@dataclass(frozen=True)
class FuzzConfig:
    seed: int = 0
    trials: int = 1000
    case: str = "discrete-1d"
    n_range: tuple[int, int] = (1, 8)
    m_range: tuple[int, int] = (1, 8)
    p_range: tuple[float, float] | None = None
    value_range: tuple[float, float] = (1e-3, 10.0)
    max_members: int = 5

    def __post_init__(self):
        if self.case not in CASES:
            raise ValueError(f"unknown case {self.case!r}; choose from {CASES}")
        if int(self.trials) != self.trials or self.trials < 0:
            raise ValueError("trials must be a nonnegative integer")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in 64 bits")
        if self.p_range is None:
            default = (0.1, 0.9) if self.case == "reversed-discrete" else (1.1, 10.0)
            object.__setattr__(self, "p_range", default)
        for name in ("n_range", "m_range", "p_range", "value_range"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ValueError(f"{name} is empty: {lo} > {hi}")
            object.__setattr__(self, name, (lo, hi))
        if self.n_range[0] < 1 or self.m_range[0] < 1:
            raise ValueError("sizes must be at least 1")
        if self.value_range[0] <= 0:
            raise ValueError("value_range must be positive")
        lo, hi = self.p_range
        if self.case == "reversed-discrete":
            if not (0 < lo and hi < 1):
                raise ValueError("reversed case needs p_range inside (0, 1)")
        elif lo < 1 + 1e-6:
            raise ValueError("p_range must lie in the standard regime p > 1")
        if self.max_members < 1:
            raise ValueError("max_members must be positive")


@dataclass(frozen=True)
class FuzzSummary:
    case: str
    seed: int
    trials_run: int
    violations: int
    errors: int
    min_relative_slack: float | None
    worst_instance: str | None
    tightness_min: float | None
    tightness_mean: float | None
    tightness_max: float | None
    oracle_max_rel_error: float | None = None

    @property
    def tightness(self) -> dict:
        return {"min": self.tightness_min, "mean": self.tightness_mean, "max": self.tightness_max}

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


class TrialOutcome(NamedTuple):
    slack: float
    tolerance: float
    tightness: float | None
    instance: dict
    oracle_error: float | None = None


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(trial,))))


def _loguniform(rng, lo, hi, size=None):
    return np.exp(rng.uniform(math.log(lo), math.log(hi), size))


def _size(rng, r):
    return int(rng.integers(r[0], r[1] + 1))


def _random_partition(rng, domain, kinds, cfg: FuzzConfig) -> tuple[Partition, dict]:
    kind = kinds[int(rng.integers(len(kinds)))]
    if kind == "uniform":
        m = int(rng.integers(1, cfg.max_members + 1))
        return make_partition("uniform", domain, m), {"kind": kind, "m": m}
    if kind == "samples":
        m = int(rng.integers(1, cfg.max_members + 1))
        rows = rng.dirichlet(np.ones(m), size=int(np.prod(domain.shape))).T
        return Partition.from_samples(domain, rows), {"kind": kind, "rows": rows.tolist()}
    return make_partition(kind, domain), {"kind": kind}


def _tolist(x):
    return np.asarray(x).tolist()


def _discrete(cfg: FuzzConfig, rng, two_d: bool) -> TrialOutcome:
    if two_d:
        domain = IndexGrid2D(_size(rng, cfg.n_range), _size(rng, cfg.m_range))
        kinds = ("discrete-bilinear-quad", "uniform", "samples")
    else:
        domain = IndexRange1D(_size(rng, cfg.n_range))
        kinds = ("discrete-pair", "uniform", "samples")
    size = int(np.prod(domain.shape))
    p = float(rng.uniform(*cfg.p_range))
    a = _loguniform(rng, *cfg.value_range, size)
    b = _loguniform(rng, *cfg.value_range, size)
    w = _loguniform(rng, *cfg.value_range, size) if rng.random() < 0.5 else np.ones(size)
    weights = _loguniform(rng, *cfg.value_range, size) if rng.random() < 0.5 else None
    part, pdesc = _random_partition(rng, domain, kinds, cfg)
    A = Functional.sum(domain, weights)
    chain = verify_chain(A, Samples(w), Samples(a), Samples(b), p, part)
    inst = {
        "shape": list(domain.shape),
        "p": p,
        "a": _tolist(a),
        "b": _tolist(b),
        "w": _tolist(w),
        "weights": None if weights is None else _tolist(weights),
        "partition": pdesc,
    }
    return TrialOutcome(chain.min_slack, chain.tolerance, chain.report.tightness, inst)


def _knots(rng, lo, hi, panels):
    segs = [s for s in (1, 2, 4, 8) if panels % s == 0]
    k = segs[int(rng.integers(len(segs)))]
    return np.linspace(lo, hi, k + 1)


def _integral(cfg: FuzzConfig, rng, two_d: bool) -> TrialOutcome:
    p = float(rng.uniform(*cfg.p_range))
    lo = float(rng.uniform(-5.0, 5.0))
    length = float(_loguniform(rng, 0.1, 10.0))
    xk = _knots(rng, lo, lo + length, FUZZ_RULE.panels)
    if two_d:
        lo2 = float(rng.uniform(-5.0, 5.0))
        length2 = float(_loguniform(rng, 0.1, 10.0))
        yk = _knots(rng, lo2, lo2 + length2, FUZZ_RULE.panels)
        domain = Rectangle(xk[0], xk[-1], yk[0], yk[-1])
        shape = (len(xk), len(yk))
        kinds = ("bilinear-quad", "uniform")
    else:
        yk = None
        domain = Interval(xk[0], xk[-1])
        shape = (len(xk),)
        kinds = ("linear-pair", "uniform")
    f, g, w = (PiecewiseLinear(xk, _loguniform(rng, *cfg.value_range, shape), yk) for _ in range(3))
    part, pdesc = _random_partition(rng, domain, kinds, cfg)
    A = Functional.integral(domain, FUZZ_RULE)
    # the quadrature sum is itself a positive functional, so the chain holds to rounding
    chain = verify_chain(A, w, f, g, p, part, estimate_error=False)

    # w*f*g is cubic per knot cell; Simpson on the knot grid integrates it exactly
    def prod(*c):
        return w(*c) * f(*c) * g(*c)

    if two_d:
        exact = _simpson_2d(prod, xk, yk)
    else:
        exact = integrate_1d(prod, domain, QuadratureRule("composite-simpson", panels=len(xk) - 1), False).value
    oracle_err = abs(chain.lhs - exact) / abs(exact)
    inst = {
        "domain": [float(v) for v in (xk[0], xk[-1])] + ([float(yk[0]), float(yk[-1])] if two_d else []),
        "p": p,
        "knots": [len(xk)] + ([len(yk)] if two_d else []),
        "f": _tolist(f.values),
        "g": _tolist(g.values),
        "w": _tolist(w.values),
        "partition": pdesc,
    }
    return TrialOutcome(chain.min_slack, chain.tolerance, chain.report.tightness, inst, oracle_err)


def _simpson_2d(fn, xk, yk) -> float:
    rx = QuadratureRule("composite-simpson", panels=len(xk) - 1)
    ry = QuadratureRule("composite-simpson", panels=len(yk) - 1)
    x, wx = rx.nodes_weights(xk[0], xk[-1])
    y, wy = ry.nodes_weights(yk[0], yk[-1])
    X, Y = np.meshgrid(x, y, indexing="ij")
    return float(np.sum(np.outer(wx, wy) * fn(X, Y)))


def _corners(cfg: FuzzConfig, rng) -> TrialOutcome:
    p = float(rng.uniform(*cfg.p_range))
    q = ConjugateExponents.from_p(p).q
    corners = rng.uniform(0.0, 10.0, 4)
    cq = corners**q
    classical = classical_corner_bound(cq, p)
    improved, _ = improved_corner_bound(cq, p)
    slack = (classical - improved) / classical if classical > 0 else 0.0
    ratio = improved / classical if classical > 0 else None
    return TrialOutcome(slack, CHAIN_RTOL, ratio, {"p": p, "corners": _tolist(corners)})


def _reversed(cfg: FuzzConfig, rng) -> TrialOutcome:
    domain = IndexRange1D(_size(rng, cfg.n_range))
    n = domain.n
    p = float(rng.uniform(*cfg.p_range))
    f = _loguniform(rng, *cfg.value_range, n)
    g = _loguniform(rng, *cfg.value_range, n)
    w = _loguniform(rng, *cfg.value_range, n) if rng.random() < 0.5 else np.ones(n)
    rep = reversed_holder(Functional.sum(domain), Samples(w), Samples(f), Samples(g), p)
    scale = max(rep.lhs, rep.classical)
    slack = (rep.lhs - rep.classical) / scale if scale > 0 else 0.0
    ratio = rep.classical / rep.lhs if rep.lhs > 0 else None
    inst = {"p": p, "f": _tolist(f), "g": _tolist(g), "w": _tolist(w)}
    return TrialOutcome(slack, CHAIN_RTOL, ratio, inst)


def run_trial(cfg: FuzzConfig, trial: int) -> TrialOutcome:
    rng = trial_rng(cfg.seed, trial)
    if cfg.case == "discrete-1d":
        return _discrete(cfg, rng, False)
    if cfg.case == "discrete-2d":
        return _discrete(cfg, rng, True)
    if cfg.case == "integral-1d":
        return _integral(cfg, rng, False)
    if cfg.case == "integral-2d":
        return _integral(cfg, rng, True)
    if cfg.case == "corner-bounds":
        return _corners(cfg, rng)
    return _reversed(cfg, rng)


def _guarded(cfg: FuzzConfig, i: int):
    try:
        return run_trial(cfg, i)
    except (ArithmeticError, ValueError) as exc:
        return exc


def _chunk(args):
    cfg, lo, hi = args
    return [_guarded(cfg, i) for i in range(lo, hi)]


def _outcomes(cfg: FuzzConfig, workers: int = 1):
    """(trial index, outcome or exception) pairs in trial order."""
    if workers <= 1 or cfg.trials < 2:
        for i in range(cfg.trials):
            yield i, _guarded(cfg, i)
        return
    step = max(1, -(-cfg.trials // (4 * workers)))
    chunks = [(cfg, lo, min(lo + step, cfg.trials)) for lo in range(0, cfg.trials, step)]
    with ProcessPoolExecutor(workers) as pool:
        i = 0
        for block in pool.map(_chunk, chunks):
            for out in block:
                yield i, out
                i += 1


def fuzz_chain(cfg: FuzzConfig, workers: int = 1) -> FuzzSummary:
    """Run ``cfg.trials`` random instances and summarise chain slack and tightness.

    ``workers > 1`` spreads trials over processes; the summary is unchanged.
    """
    violations = errors = 0
    min_slack = None
    worst = None
    ratios = []
    oracle = None
    for i, out in _outcomes(cfg, workers):
        if isinstance(out, Exception):
            errors += 1
            continue
        if out.slack < -out.tolerance:
            violations += 1
        elif out.oracle_error is not None and out.oracle_error > ORACLE_RTOL:
            violations += 1
        if min_slack is None or out.slack < min_slack:
            min_slack = out.slack
            worst = json.dumps({"trial": i, **out.instance}, sort_keys=True)
        if out.tightness is not None:
            ratios.append(out.tightness)
        if out.oracle_error is not None:
            oracle = out.oracle_error if oracle is None else max(oracle, out.oracle_error)
    return FuzzSummary(
        case=cfg.case,
        seed=int(cfg.seed),
        trials_run=int(cfg.trials),
        violations=violations,
        errors=errors,
        min_relative_slack=min_slack,
        worst_instance=worst,
        tightness_min=min(ratios) if ratios else None,
        tightness_mean=math.fsum(ratios) / len(ratios) if ratios else None,
        tightness_max=max(ratios) if ratios else None,
        oracle_max_rel_error=oracle,
    )


@dataclass(frozen=True)
class TightnessStats:
    count: int
    minimum: float | None
    mean: float | None
    maximum: float | None
    quantiles: dict = field(default_factory=dict)
    out_of_range: int = 0


def tightness_stats(cfg: FuzzConfig, tol: float = CHAIN_RTOL, workers: int = 1) -> TightnessStats:
    """Distribution of refined/classical over the configured instances.

    Ratios outside (0, 1 + tol] are counted in ``out_of_range``.
    """
    ratios = np.array(
        [out.tightness for _, out in _outcomes(cfg, workers) if not isinstance(out, Exception) and out.tightness is not None]
    )
    if ratios.size == 0:
        return TightnessStats(0, None, None, None)
    qs = {str(k): float(np.quantile(ratios, k / 100)) for k in (10, 50, 90)}
    bad = int(np.sum((ratios <= 0) | (ratios > 1 + tol)))
    return TightnessStats(
        int(ratios.size), float(ratios.min()), math.fsum(ratios) / ratios.size, float(ratios.max()), qs, bad
    )


__all__ = [
    "CASES",
    "FUZZ_RULE",
    "FuzzConfig",
    "FuzzSummary",
    "TightnessStats",
    "TrialOutcome",
    "fuzz_chain",
    "tightness_stats",
    "run_trial",
    "trial_rng",
]
