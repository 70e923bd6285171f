"""Falsification verdicts, replayable witnesses and the seeded trial runner.

A property is a *margin function*: it maps concrete inputs to
``(margin, tol)`` and the property is violated when ``margin < -tol``.
Trials only sample inputs and call the margin function, so replaying a
witness runs the identical computation and reproduces its margin exactly.

Trial ``i`` of a run with master seed ``s`` draws from
``numpy.random.default_rng([s, i])``. Runs stop at the violation with the
lowest trial index, so the verdict does not depend on how trials are split
across workers.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import _defaults
from .scalarfn import DomainError, ScalarFunction, parse

HOLDS = "holds-within-budget"
VIOLATED = "violated"
DOMAIN_ERROR = "domain-error"

_MARGIN_FNS: dict[str, Callable] = {}


def margin_function(property_id: str):
    """Register a margin function under ``property_id`` for replay."""

    def deco(fn):
        _MARGIN_FNS[property_id] = fn
        fn.property_id = property_id
        return fn

    return deco


@dataclass
class Witness:
    """Concrete inputs demonstrating a violation; replayable without an RNG."""

    property_id: str
    inputs: dict
    margin: float
    tol: float
    trial: int | None = None
    extra: dict = field(default_factory=dict)

    def replay(self) -> float:
        return replay(self)

    def to_json(self) -> dict:
        return {
            "property": self.property_id,
            "margin": self.margin,
            "tol": self.tol,
            "trial": self.trial,
            "inputs": {k: _jsonable(v) for k, v in self.inputs.items()},
            "extra": {k: _jsonable(v) for k, v in self.extra.items()},
        }


def replay(witness: Witness) -> float:
    """Recompute a witness's margin from its stored inputs."""
    margin, _ = _MARGIN_FNS[witness.property_id](**witness.inputs)
    return margin


@dataclass
class Verdict:
    status: str
    trials_run: int
    min_margin: float
    witness: Witness | None = None
    error: str | None = None
    error_point: float | None = None
    margins: np.ndarray = field(default_factory=lambda: np.empty(0), repr=False)

    @property
    def holds(self) -> bool:
        return self.status == HOLDS

    @property
    def violated(self) -> bool:
        return self.status == VIOLATED

    def histogram(self, bins: int = 20) -> dict:
        m = self.margins[np.isfinite(self.margins)]
        if m.size == 0:
            return {"counts": [], "edges": []}
        counts, edges = np.histogram(m, bins=bins)
        return {"counts": counts.tolist(), "edges": edges.tolist()}

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "trials_run": self.trials_run,
            "min_margin": _jsonable(self.min_margin),
            "witness": None if self.witness is None else self.witness.to_json(),
            "error": self.error,
            "error_point": self.error_point,
            "margin_histogram": self.histogram(),
        }


def _jsonable(v):
    if isinstance(v, ScalarFunction):
        return v.source_text
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else repr(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if hasattr(v, "to_json"):
        return v.to_json()
    return v


def as_function(fn) -> ScalarFunction:
    return fn if isinstance(fn, ScalarFunction) else parse(fn)


def resolve_seed(seed) -> int:
    """Master seed from an int, a Generator, or None (fresh entropy)."""
    if seed is None:
        return int(np.random.SeedSequence().entropy)
    if isinstance(seed, np.random.Generator):
        return int(seed.integers(0, 2**63))
    seed = int(seed)
    if seed < 0:
        raise ValueError("seed must be non-negative")
    return seed


def trial_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng([seed, index])


# --------------------------------------------------------------------------
# Runner


def _run_chunk(sampler, seed, start, stop):
    """Run trials ``start..stop-1``; stop early at the first failure.

    ``sampler(index, rng)`` returns a list of ``(property_id, inputs)``
    candidates; each is scored by its margin function.
    """
    out = []
    for i in range(start, stop):
        rng = trial_rng(seed, i)
        try:
            worst = None
            for property_id, inputs in sampler(i, rng):
                margin, tol = _MARGIN_FNS[property_id](**inputs)
                if margin < -tol:
                    worst = (margin, tol, property_id, inputs)
                    break
                if worst is None or margin < worst[0]:
                    worst = (margin, tol, None, None)
        except DomainError as exc:
            out.append((i, "error", str(exc), exc.point))
            return out
        margin, tol, property_id, inputs = worst
        if property_id is not None:
            out.append((i, "violated", margin, Witness(property_id, inputs, margin, tol, trial=i)))
            return out
        out.append((i, "ok", margin, None))
    return out


def run_trials(sampler, trials: int, seed: int, jobs: int = 1, chunk: int = _defaults.CHUNK_SIZE) -> Verdict:
    """Run ``trials`` seeded trials of ``sampler`` and merge into a Verdict.

    ``sampler`` must be picklable when ``jobs > 1`` (a module-level function
    or a ``functools.partial`` of one).
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    bounds = [(s, min(s + chunk, trials)) for s in range(0, trials, chunk)]
    records = []
    if jobs <= 1 or len(bounds) == 1:
        for start, stop in bounds:
            part = _run_chunk(sampler, seed, start, stop)
            records.extend(part)
            if part and part[-1][1] != "ok":
                break
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            pending = {}
            next_chunk = 0
            done = False
            for k in range(len(bounds)):
                while next_chunk < len(bounds) and len(pending) < 2 * jobs:
                    start, stop = bounds[next_chunk]
                    pending[next_chunk] = pool.submit(_run_chunk, sampler, seed, start, stop)
                    next_chunk += 1
                part = pending.pop(k).result()
                records.extend(part)
                if part and part[-1][1] != "ok":
                    done = True
                    break
            if done:
                for fut in pending.values():
                    fut.cancel()
    return _merge(records)


def _merge(records) -> Verdict:
    margins = np.array([r[2] for r in records if r[1] != "error"], dtype=np.float64)
    min_margin = float(margins.min()) if margins.size else math.nan
    last = records[-1]
    if last[1] == "error":
        return Verdict(DOMAIN_ERROR, len(records), min_margin, error=last[2],
                       error_point=last[3], margins=margins)
    if last[1] == "violated":
        return Verdict(VIOLATED, len(records), min_margin, witness=last[3], margins=margins)
    return Verdict(HOLDS, len(records), min_margin, margins=margins)
