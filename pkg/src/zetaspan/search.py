"""Search the (M, delta) parameter space for large dimension constants C.

C depends only on M and the delta multiset, and is invariant under
replicating the delta list, so candidates are canonicalised first (counts
divided by their gcd).  Strategies: exhaustive enumeration over small boxes,
seeded random sampling, and seeded random sampling followed by local moves
(change one delta by one, add or drop a delta, change M by one).  Candidates
are screened at a low precision and finalists re-evaluated at a high one;
enclosures nest, so the ranking by lower endpoints never degrades when
precision grows.  Everything is deterministic given the config.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from math import gcd
from pathlib import Path

import random

import mpmath

from .errors import InvalidParams
from .exact import ApproxReal, GUARD_BITS, _iv, _workprec
from .params import ParamSet, constant_C, validate
from .stepphi import varpi_for_params


@dataclass(frozen=True)
class Candidate:
    params: ParamSet
    C: ApproxReal
    varpi: ApproxReal
    eval_time: float

    @property
    def sort_key(self):
        # descending C lower endpoint, deterministic tie-break
        return (-float(self.C.lo), self.params.M, self.params.J, self.params.deltas)


@dataclass(frozen=True)
class SearchConfig:
    M_max: int = 6
    delta_max: int = 2
    J_max: int = 2
    strategy: str = "exhaustive"        # exhaustive | random | local
    seed: int = 0
    iterations: int = 200
    moves: int = 50
    precision_bits: int = 256
    screen_bits: int = 64
    top: int = 10                       # finalists re-evaluated at full precision


def canonical_key(p: ParamSet) -> tuple:
    """(M, delta multiset reduced by the replication quotient)."""
    counts: dict[int, int] = {}
    for d in p.deltas:
        counts[d] = counts.get(d, 0) + 1
    g = 0
    for c in counts.values():
        g = gcd(g, c)
    reduced = []
    for d in sorted(counts):
        reduced.extend([d] * (counts[d] // g))
    return (p.M, tuple(reduced))


def canonicalize(p: ParamSet) -> ParamSet:
    M, deltas = canonical_key(p)
    return ParamSet(M, deltas)


_cache: dict[tuple, Candidate] = {}


def _ar_to_doc(x: ApproxReal) -> dict:
    def one(raw):
        sign, man, exp, _ = raw
        return [int(sign), str(int(man)), int(exp)]
    lo_raw, hi_raw = x.ival._mpi_
    return {"lo": one(lo_raw), "hi": one(hi_raw), "prec": x.precision_bits}


def _ar_from_doc(doc: dict) -> ApproxReal:
    def one(entry):
        sign, man, exp = entry
        v = int(man) * (-1 if sign else 1)
        with mpmath.workprec(max(64, abs(int(man)).bit_length() + 8)):
            return mpmath.mpf(v) * mpmath.mpf(2) ** exp
    prec = int(doc["prec"])
    with _workprec(prec + GUARD_BITS + 64):
        lo = _iv.mpf(one(doc["lo"]))
        hi = _iv.mpf(one(doc["hi"]))
        return ApproxReal(lo + (hi - lo) * _iv.mpf([0, 1]), prec)


def load_disk_cache(path: str | Path) -> int:
    """Merge a previously saved cache file into the in-process cache."""
    path = Path(path)
    if not path.exists():
        return 0
    doc = json.loads(path.read_text())
    count = 0
    for entry in doc.get("candidates", []):
        p = ParamSet(entry["M"], tuple(entry["deltas"]))
        key = (canonical_key(p), entry["precision"])
        if key not in _cache:
            _cache[key] = Candidate(params=p, C=_ar_from_doc(entry["C"]),
                                    varpi=_ar_from_doc(entry["varpi"]),
                                    eval_time=entry["eval_time"])
            count += 1
    return count


def save_disk_cache(path: str | Path) -> None:
    entries = []
    for (key, precision), cand in sorted(_cache.items(),
                                         key=lambda kv: (kv[0][1], kv[0][0])):
        entries.append({"M": cand.params.M, "deltas": list(cand.params.deltas),
                        "precision": precision, "eval_time": cand.eval_time,
                        "C": _ar_to_doc(cand.C), "varpi": _ar_to_doc(cand.varpi)})
    Path(path).write_text(json.dumps({"candidates": entries}, indent=1) + "\n")


def evaluate_candidate(p: ParamSet, precision: int = 256) -> Candidate:
    """C and varpi for the canonical form of p; cached by parameter key."""
    p = canonicalize(p)
    bad = [v for v in validate(p)]
    if bad:
        raise InvalidParams("; ".join(bad))
    key = (canonical_key(p), precision)
    hit = _cache.get(key)
    if hit is not None:
        return hit
    t0 = time.perf_counter()
    w = varpi_for_params(p, precision)
    c = constant_C(p, w, precision)
    cand = Candidate(params=p, C=c, varpi=w, eval_time=time.perf_counter() - t0)
    _cache[key] = cand
    return cand


def _all_delta_lists(J: int, delta_max: int, M: int):
    """Non-decreasing delta lists of length J with entries <= min(delta_max,
    ceil(M/2)-1)."""
    top = min(delta_max, (M - 1) // 2)
    lst = [0] * J

    def rec(pos: int, lo: int):
        if pos == J:
            yield tuple(lst)
            return
        for v in range(lo, top + 1):
            lst[pos] = v
            yield from rec(pos + 1, v)

    yield from rec(0, 0)


def _exhaustive_candidates(cfg: SearchConfig):
    seen = set()
    for M in range(1, cfg.M_max + 1):
        for J in range(1, cfg.J_max + 1):
            for deltas in _all_delta_lists(J, cfg.delta_max, M):
                p = ParamSet(M, deltas)
                key = canonical_key(p)
                if key in seen or validate(canonicalize(p)):
                    continue
                seen.add(key)
                yield canonicalize(p)


def _random_candidates(cfg: SearchConfig):
    rng = random.Random(cfg.seed)
    seen = set()
    for _ in range(cfg.iterations):
        M = rng.randint(1, cfg.M_max)
        J = rng.randint(1, cfg.J_max)
        top = min(cfg.delta_max, (M - 1) // 2)
        deltas = tuple(sorted(rng.randint(0, top) for _ in range(J))) if top >= 0 else None
        if deltas is None:
            continue
        p = ParamSet(M, deltas)
        if validate(canonicalize(p)):
            continue
        key = canonical_key(p)
        if key not in seen:
            seen.add(key)
            yield canonicalize(p)


def _neighbors(p: ParamSet, cfg: SearchConfig):
    """Local moves, re-validated: tweak one delta, add/remove a delta,
    tweak M."""
    M, deltas = p.M, list(p.deltas)
    out = []
    for i in range(len(deltas)):
        for step in (-1, +1):
            d2 = sorted(deltas[:i] + [deltas[i] + step] + deltas[i + 1:])
            out.append(ParamSet(M, tuple(d2)))
    for v in sorted(set(deltas + [0])):
        out.append(ParamSet(M, tuple(sorted(deltas + [v]))))
    if len(deltas) > 1:
        for i in range(len(deltas)):
            out.append(ParamSet(M, tuple(deltas[:i] + deltas[i + 1:])))
    for step in (-1, +1):
        if 1 <= M + step <= cfg.M_max:
            out.append(ParamSet(M + step, tuple(deltas)))
    good = []
    for q in out:
        if (q.M <= cfg.M_max and q.J <= cfg.J_max
                and all(d <= cfg.delta_max for d in q.deltas)
                and not validate(canonicalize(q))):
            good.append(canonicalize(q))
    return good


def search(cfg: SearchConfig, candidates: list[ParamSet] | None = None,
           jobs: int = 1) -> list[Candidate]:
    """Ranked candidate list (best first), deterministic given cfg.

    An explicit candidate list overrides the strategy.  Screening runs at
    cfg.screen_bits; the cfg.top best are re-evaluated at
    cfg.precision_bits and the final ranking uses the lower endpoints of
    the C enclosures, ties broken by (M, J, deltas).
    """
    if candidates is None:
        if cfg.strategy == "exhaustive":
            pool = list(_exhaustive_candidates(cfg))
        elif cfg.strategy == "random":
            pool = list(_random_candidates(cfg))
        elif cfg.strategy == "local":
            pool = list(_random_candidates(cfg))
            ranked = sorted((evaluate_candidate(p, cfg.screen_bits) for p in pool),
                            key=lambda c: c.sort_key)
            frontier = [c.params for c in ranked[: max(1, cfg.top // 2)]]
            seen = {canonical_key(p) for p in pool}
            for _ in range(cfg.moves):
                nxt = []
                for p in frontier:
                    for q in _neighbors(p, cfg):
                        key = canonical_key(q)
                        if key not in seen:
                            seen.add(key)
                            pool.append(q)
                            nxt.append(q)
                if not nxt:
                    break
                scored = sorted((evaluate_candidate(q, cfg.screen_bits) for q in nxt),
                                key=lambda c: c.sort_key)
                frontier = [c.params for c in scored[: max(1, cfg.top // 2)]]
        else:
            raise InvalidParams(f"unknown strategy {cfg.strategy!r}")
    else:
        pool = [canonicalize(p) for p in candidates]
        dedup, seen = [], set()
        for p in pool:
            key = canonical_key(p)
            if key not in seen:
                seen.add(key)
                dedup.append(p)
        pool = dedup

    if jobs > 1:
        from multiprocessing import Pool
        with Pool(jobs) as mp_pool:
            screened = mp_pool.starmap(evaluate_candidate,
                                       [(p, cfg.screen_bits) for p in pool])
    else:
        screened = [evaluate_candidate(p, cfg.screen_bits) for p in pool]
    screened.sort(key=lambda c: c.sort_key)

    finalists = screened[: cfg.top]
    rest = screened[cfg.top:]
    refined = [evaluate_candidate(c.params, cfg.precision_bits) for c in finalists]
    refined.sort(key=lambda c: c.sort_key)
    return refined + rest
