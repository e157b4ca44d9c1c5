"""Empirical equivalence suites over a deterministic corpus of step functions.

Each suite evaluates a claimed identity or two-sided bound on every corpus
function (and a log-spaced sweep of parameters t), records both sides and
their ratio, and summarizes the observed equivalence band.  The reported
constant is max(band_max, 1/band_min), so 1.0 means the identity held
exactly on the corpus.  Output is deterministic for a fixed seed: no
timestamps, ordered records, repr-formatted floats.

Suites
------
* identity suite: rearrangement idempotence, the s-norm as a reciprocal
  lambda-norm of the oscillation transform (exact sums against independent
  quadrature), and reconstruction of f** from the oscillation tail integral;
* ``t11``: the s-couple K-functional computed directly versus through the
  oscillation transform on the reciprocal couple (independent grids);
* ``t2``: the explicit head/tail s-couple formula at split t versus the
  oracle at the matched parameter theta(t);
* ``cor1``: the same with w_0 = 1, w_1 = s^{-alpha};
* ``generalk``: the explicit lambda-couple formula at split t versus the
  oracle at the matched parameter sigma(t);
* ``gammaeqs``: the gamma-norm against the s-norm (ratio >= 1 always;
  bounded when the reverse balance condition holds).
"""

import csv
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from statistics import median

import numpy as np

from .kfunctional import (
    KQuery,
    corollary_couple,
    k_explicit_general,
    k_explicit_s,
    k_oracle,
    k_oracle_s_couple,
)
from .norms import LorentzSpace, gamma_equals_s_check, s_lambda_identity_check
from .stepfn import StepFunction, add, rearrange
from .weights import CoupleConfig, PowerWeight, check_rbp, fundamental_ratio

__all__ = [
    "CorpusEntry",
    "make_corpus",
    "EquivalenceRecord",
    "EquivalenceReport",
    "run_identity_suite",
    "run_theorem_suite",
    "report_to_json",
    "records_to_csv",
    "SUITE_TAGS",
]

SUITE_TAGS = ("identity", "t11", "t2", "cor1", "generalk", "gammaeqs")


@dataclass(frozen=True)
class CorpusEntry:
    f_id: str
    fn: StepFunction


def _random_monotone(rng: np.random.Generator, cells: int) -> StepFunction:
    bps = np.sort(np.exp(rng.uniform(math.log(0.05), math.log(50.0), size=cells)))
    vals = np.sort(rng.uniform(0.1, 8.0, size=cells))[::-1]
    return StepFunction(tuple(float(b) for b in bps), tuple(float(v) for v in vals))


def make_corpus(seed: int = 7, size: int = 20) -> tuple[CorpusEntry, ...]:
    """Deterministic mix of indicators, staircases, and seeded random shapes.

    Entries are not all non-increasing: shifted and gapped shapes exercise
    the rearrangement path of every consumer.
    """
    rng = np.random.default_rng(seed)
    entries: list[CorpusEntry] = []

    def put(f_id: str, fn: StepFunction) -> None:
        entries.append(CorpusEntry(f_id, fn))

    for length in (0.5, 1.0, 4.0, 10.0, 32.0):
        put(f"indicator-{length}", StepFunction.indicator(length))
    put(
        "staircase-geometric-4",
        StepFunction((1.0, 2.0, 4.0, 8.0), (8.0, 4.0, 2.0, 1.0)),
    )
    put(
        "staircase-geometric-6",
        StepFunction(
            (0.25, 0.5, 1.0, 2.0, 4.0, 8.0), (6.4, 3.2, 1.6, 0.8, 0.4, 0.2)
        ),
    )
    put("staircase-arith-3", StepFunction((1.0, 2.0, 3.0), (3.0, 2.0, 1.0)))
    put(
        "staircase-arith-5",
        StepFunction((2.0, 4.0, 6.0, 8.0, 10.0), (5.0, 4.0, 3.0, 2.0, 1.0)),
    )
    put("shifted-indicator", StepFunction((1.0, 3.0), (0.0, 2.0)))
    put("gapped", StepFunction((0.5, 1.0, 2.0, 3.0), (1.0, 0.0, 3.0, 0.5)))
    put(
        "two-scale",
        StepFunction((0.01, 20.0), (50.0, 0.02)),
    )
    put(
        "tall-thin-plus-long-low",
        add(StepFunction.indicator(0.1, 9.0), StepFunction.indicator(25.0, 0.3)),
    )
    n_random = max(size - len(entries), 0)
    for i in range(n_random):
        cells = int(rng.integers(2, 9))
        put(f"random-monotone-{i}", _random_monotone(rng, cells))
    return tuple(entries[:size])


def t_sweep(fn: StepFunction, count: int = 15) -> tuple[float, ...]:
    """Log-spaced parameters from below the support to beyond it."""
    fstar = rearrange(fn)
    lo = fstar.first_breakpoint / 10.0
    hi = fstar.support_end * 10.0
    ts = np.geomspace(lo, hi, count)
    bset = set(fstar.breakpoints)
    return tuple(float(t * (1.0 + 1e-7)) if float(t) in bset else float(t) for t in ts)


@dataclass(frozen=True)
class EquivalenceRecord:
    f_id: str
    t: float
    lhs: float
    rhs: float
    ratio: float
    flags: tuple[str, ...] = ()


@dataclass(frozen=True)
class EquivalenceReport:
    theorem: str
    config: dict
    hypotheses: dict | None
    records: tuple[EquivalenceRecord, ...]
    refined_records: tuple[EquivalenceRecord, ...] | None = None

    def band(self) -> tuple[float, float]:
        ratios = [r.ratio for r in self.records if math.isfinite(r.ratio)]
        if not ratios:
            return (math.inf, 0.0)
        return (min(ratios), max(ratios))

    def median_ratio(self) -> float:
        ratios = [r.ratio for r in self.records if math.isfinite(r.ratio)]
        return median(ratios) if ratios else math.nan

    def equivalence_constant(self) -> float:
        lo, hi = self.band()
        if lo <= 0.0:
            return math.inf
        return max(hi, 1.0 / lo)

    def refined_constant(self) -> float | None:
        if self.refined_records is None:
            return None
        return EquivalenceReport(
            self.theorem, self.config, None, self.refined_records
        ).equivalence_constant()

    def drift(self) -> float | None:
        refined = self.refined_constant()
        if refined is None:
            return None
        base = self.equivalence_constant()
        if not (math.isfinite(base) and math.isfinite(refined)) or base == 0.0:
            return math.inf
        return abs(refined - base) / base

    def hypothesis_failures(self) -> tuple[str, ...]:
        if not self.hypotheses:
            return ()
        return tuple(
            name for name, v in sorted(self.hypotheses.items()) if not v.get("holds", True)
        )


def _jsonable(x):
    if isinstance(x, float):
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if math.isnan(x):
            return "nan"
        return x
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def report_to_json(report: EquivalenceReport) -> str:
    lo, hi = report.band()
    payload = {
        "theorem": report.theorem,
        "config": report.config,
        "hypotheses": report.hypotheses,
        "band_min": lo,
        "band_max": hi,
        "median_ratio": report.median_ratio(),
        "equivalence_constant": report.equivalence_constant(),
        "refined_constant": report.refined_constant(),
        "drift": report.drift(),
        "records": [
            {
                "f_id": r.f_id,
                "t": r.t,
                "lhs": r.lhs,
                "rhs": r.rhs,
                "ratio": r.ratio,
                "flags": list(r.flags),
            }
            for r in report.records
        ],
    }
    return json.dumps(_jsonable(payload), sort_keys=True, indent=2)


def records_to_csv(reports: list[EquivalenceReport]) -> str:
    """One row per record across reports, stable order, no timestamps."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["theorem", "f_id", "t", "lhs", "rhs", "ratio", "flags"])
    for report in reports:
        for r in report.records:
            writer.writerow(
                [report.theorem, r.f_id, repr(r.t), repr(r.lhs), repr(r.rhs), repr(r.ratio), "|".join(r.flags)]
            )
    return out.getvalue()


def _ratio(lhs: float, rhs: float) -> float:
    if rhs == 0.0:
        return 1.0 if lhs == 0.0 else math.inf
    return lhs / rhs


def _thread_map(fn, items, threads: int | None):
    if threads is None:
        threads = int(os.environ.get("LORENTZK_THREADS", "1"))
    if threads <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# identity suite


def _reconstruction_rhs(fstar: StepFunction, t: float) -> float:
    """integral_t^inf (f** - f*)(s) ds / s, evaluated exactly on cells."""
    total = 0.0
    prefix = 0.0
    prev = 0.0
    for a, b, v in fstar.cells():
        c = prefix - v * a
        lo = max(a, t)
        if b > lo:
            total += c * (1.0 / lo - 1.0 / b)
        prefix += v * (b - a)
        prev = b
    mass = fstar.total_integral
    if mass > 0.0:
        total += mass / max(prev, t)
    return total


def run_identity_suite(
    corpus: tuple[CorpusEntry, ...] | None = None,
    p: float = 2.0,
    weight_beta: float = 0.0,
    t_count: int = 15,
    seed: int = 7,
    threads: int | None = None,
) -> EquivalenceReport:
    """Exact structural identities: idempotence, transform norm, reconstruction."""
    corpus = corpus if corpus is not None else make_corpus(seed)
    w = PowerWeight(weight_beta)

    def one(entry: CorpusEntry) -> list[EquivalenceRecord]:
        recs: list[EquivalenceRecord] = []
        fstar = rearrange(entry.fn)
        fstar2 = rearrange(fstar)
        for t in t_sweep(entry.fn, t_count):
            lhs, rhs = fstar2(t), fstar(t)
            recs.append(
                EquivalenceRecord(entry.f_id, t, lhs, rhs, _ratio(lhs, rhs), ("idempotence",))
            )
            lhs_r = fstar.prefix_integral(t) / t
            rhs_r = _reconstruction_rhs(fstar, t)
            recs.append(
                EquivalenceRecord(entry.f_id, t, lhs_r, rhs_r, _ratio(lhs_r, rhs_r), ("reconstruction",))
            )
        lhs_n, rhs_n = s_lambda_identity_check(entry.fn, p, w)
        recs.append(
            EquivalenceRecord(entry.f_id, math.inf, lhs_n, rhs_n, _ratio(lhs_n, rhs_n), ("s-as-transform-norm",))
        )
        return recs

    all_recs = [r for chunk in _thread_map(one, corpus, threads) for r in chunk]
    return EquivalenceReport(
        "identity",
        {"p": p, "weight": f"power:{weight_beta}", "seed": seed},
        None,
        tuple(all_recs),
    )


# ---------------------------------------------------------------------------
# theorem suites


def _default_couple(tag: str, p: float, alpha: float) -> CoupleConfig:
    if tag == "cor1":
        return corollary_couple(p, alpha)
    if tag == "t2":
        return CoupleConfig(p, PowerWeight(0.5), p, PowerWeight(-alpha))
    if tag in ("t11", "gammaeqs"):
        return corollary_couple(p, alpha)
    if tag == "generalk":
        return CoupleConfig(p, PowerWeight(1.0), p, PowerWeight(0.0))
    raise ValueError(f"unknown suite tag {tag!r}")


def _hypotheses_json(cfg: CoupleConfig, tag: str) -> dict | None:
    if tag in ("t2", "cor1", "t11"):
        probe = k_explicit_s(StepFunction.indicator(1.0), 1.0, cfg)
        assert probe.hypotheses is not None
        return {name: v.to_json_dict() for name, v in probe.hypotheses.items()}
    if tag == "gammaeqs":
        verdict = check_rbp(cfg.w0, cfg.p0)
        return {"reverse-balance": verdict.to_json_dict()}
    return None


def run_theorem_suite(
    tag: str,
    corpus: tuple[CorpusEntry, ...] | None = None,
    p: float = 2.0,
    alpha: float = 1.0,
    couple: CoupleConfig | None = None,
    m: int = 64,
    t_count: int = 15,
    seed: int = 7,
    refine: bool = False,
    threads: int | None = None,
) -> EquivalenceReport:
    """Run one empirical theorem suite; see the module docstring for tags."""
    if tag == "identity":
        return run_identity_suite(corpus, p=p, t_count=t_count, seed=seed, threads=threads)
    if tag not in SUITE_TAGS:
        raise ValueError(f"unknown suite tag {tag!r}; expected one of {SUITE_TAGS}")
    corpus = corpus if corpus is not None else make_corpus(seed)
    cfg = couple if couple is not None else _default_couple(tag, p, alpha)
    config = {
        "tag": tag,
        "couple": cfg.to_json_dict(),
        "m": m,
        "t_count": t_count,
        "seed": seed,
    }

    def records_at(m_run: int) -> tuple[EquivalenceRecord, ...]:
        space_s0 = LorentzSpace("s", cfg.p0, cfg.w0)
        space_s1 = LorentzSpace("s", cfg.p1, cfg.w1)

        def one(entry: CorpusEntry) -> list[EquivalenceRecord]:
            recs: list[EquivalenceRecord] = []
            if tag == "gammaeqs":
                gam_pow, s_pow = gamma_equals_s_check(entry.fn, cfg.p0, cfg.w0)
                lhs = gam_pow ** (1.0 / cfg.p0)
                rhs = s_pow ** (1.0 / cfg.p0)
                recs.append(
                    EquivalenceRecord(entry.f_id, math.inf, lhs, rhs, _ratio(lhs, rhs))
                )
                return recs
            for t in t_sweep(entry.fn, t_count):
                flags: tuple[str, ...] = ()
                if tag == "t11":
                    q = KQuery(entry.fn, t, space_s0, space_s1)
                    res = k_oracle_s_couple(q, m=m_run, seed=seed)
                    lhs, rhs = res.direct.value, res.transformed.value
                    if not (res.direct.converged and res.transformed.converged):
                        flags = ("oracle-unconverged",)
                elif tag in ("t2", "cor1"):
                    explicit = k_explicit_s(entry.fn, t, cfg, check_hypotheses=False)
                    theta_t = explicit.param
                    q = KQuery(entry.fn, theta_t, space_s0, space_s1)
                    res_o = k_oracle(q, m=m_run, seed=seed)
                    lhs, rhs = explicit.value, res_o.value
                    if not res_o.converged:
                        flags = ("oracle-unconverged",)
                else:  # generalk
                    fstar = rearrange(entry.fn)
                    explicit = k_explicit_general(fstar, t, cfg)
                    sigma_t = fundamental_ratio(cfg)(t)
                    q = KQuery(
                        fstar,
                        sigma_t,
                        LorentzSpace("lambda", cfg.p0, cfg.w0),
                        LorentzSpace("lambda", cfg.p1, cfg.w1),
                    )
                    res_o = k_oracle(q, m=m_run, seed=seed)
                    lhs, rhs = explicit.value, res_o.value
                    if not res_o.converged:
                        flags = ("oracle-unconverged",)
                recs.append(EquivalenceRecord(entry.f_id, t, lhs, rhs, _ratio(lhs, rhs), flags))
            return recs

        return tuple(r for chunk in _thread_map(one, corpus, threads) for r in chunk)

    records = records_at(m)
    refined = records_at(2 * m) if (refine and tag != "gammaeqs") else None
    return EquivalenceReport(tag, config, _hypotheses_json(cfg, tag), records, refined)
