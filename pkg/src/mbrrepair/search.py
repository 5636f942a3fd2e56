"""Exhaustive search for repair-by-transfer schedules on concrete linear codes.

For a failed node and a helper set, a transfer schedule picks, for every
helper, ``beta`` of its stored symbols to pass verbatim.  The schedule works
iff the failed node's stored linear forms lie in the span of the passed
forms.  Searching all schedules of one code instance says nothing about other
codes: this is a finite witness, not a proof over all codes.
"""

from __future__ import annotations

import itertools
import math
import os
from collections import Counter
from dataclasses import dataclass, field as dc_field
from typing import Mapping

import numpy as np

from .codes import Variant, node_forms
from .field import Field, Matrix, mat_rank
from .params import EncodingVectors, SystemParams, build_encoding_vectors

DEFAULT_BUDGET = 10**6
BUDGET_ENV = "MBRREPAIR_BUDGET"


class BudgetExceededError(RuntimeError):
    pass


class NoFeasibleScheduleError(RuntimeError):
    pass


def default_budget() -> int:
    return int(os.environ.get(BUDGET_ENV, DEFAULT_BUDGET))


@dataclass(frozen=True)
class TransferSchedule:
    failed: int
    helpers: tuple[int, ...]
    indices: tuple[tuple[int, ...], ...]  # 1-based stored positions, one tuple per helper

    def __post_init__(self):
        if len(self.indices) != len(self.helpers):
            raise ValueError("one index set per helper")
        sizes = {len(ix) for ix in self.indices}
        if len(sizes) > 1 or any(len(set(ix)) != len(ix) for ix in self.indices):
            raise ValueError("every helper passes the same number of distinct symbols")

    @property
    def beta(self) -> int:
        return len(self.indices[0]) if self.indices else 0

    def passed(self, helper: int) -> tuple[int, ...]:
        return self.indices[self.helpers.index(helper)]

    def to_dict(self) -> dict:
        return {"failed": self.failed, "helpers": list(self.helpers), "indices": [list(ix) for ix in self.indices]}


class _Basis:
    """Incremental reduced row basis over a field."""

    def __init__(self, field: Field, width: int):
        self.field = field
        self.rows: list[np.ndarray] = []
        self.pivots: list[int] = []

    def reduce(self, v: np.ndarray) -> np.ndarray:
        f = self.field
        v = np.array(v, dtype=np.int64)
        for row, p in zip(self.rows, self.pivots):
            if v[p]:
                v = f.sub(v, f.mul(v[p], row))
        return v

    def add(self, v: np.ndarray) -> bool:
        v = self.reduce(v)
        nz = np.nonzero(v)[0]
        if nz.size == 0:
            return False
        p = int(nz[0])
        v = self.field.mul(v, self.field.inv(v[p]))
        f = self.field
        self.rows = [f.sub(r, f.mul(r[p], v)) if r[p] else r for r in self.rows]
        self.rows.append(v)
        self.pivots.append(p)
        return True

    def copy(self) -> "_Basis":
        b = _Basis(self.field, 0)
        b.rows = list(self.rows)
        b.pivots = list(self.pivots)
        return b

    def contains(self, v: np.ndarray) -> bool:
        return not np.any(self.reduce(v))


def enumeration_size(params: SystemParams, beta: int = 1, alpha: int | None = None) -> int:
    """Schedules per (failed, helper set): C(alpha, beta) ** d."""
    alpha = params.d if alpha is None else alpha
    return math.comb(alpha, beta) ** params.d


def schedule_feasible(forms: Mapping[int, Matrix], failed: int, helpers, beta: int = 1,
                      counter: list | None = None) -> TransferSchedule | None:
    """First transfer schedule (lexicographic) that determines ``failed``.

    ``forms[i]`` holds node i's stored symbols as rows of linear forms.  The
    search is complete over all C(alpha, beta)^d choices.  When the failed
    node's forms are independent and as many as the passed symbols, every
    passed form must lie in their span, which prunes the search without
    losing completeness.  ``counter[0]`` is incremented per leaf checked.
    """
    helpers = tuple(helpers)
    target = forms[failed]
    field = target.field
    target_rank = mat_rank(target)
    n_passed = beta * len(helpers)
    span = _Basis(field, target.cols)
    for row in target.a:
        span.add(row)
    tight = target_rank == n_passed

    choices = []
    for h in helpers:
        alpha = forms[h].rows
        opts = []
        for ix in itertools.combinations(range(alpha), beta):
            if tight and not all(span.contains(forms[h].a[i]) for i in ix):
                continue
            opts.append(ix)
        if not opts:
            return None
        choices.append(opts)

    def dfs(level: int, basis: _Basis, picked: list):
        if level == len(helpers):
            if counter is not None:
                counter[0] += 1
            if all(basis.contains(r) for r in target.a):
                return list(picked)
            return None
        # remaining helpers cannot lift the rank enough
        if len(basis.rows) + beta * (len(helpers) - level) < target_rank:
            return None
        for ix in choices[level]:
            b = basis.copy()
            for i in ix:
                b.add(forms[helpers[level]].a[i])
            picked.append(ix)
            found = dfs(level + 1, b, picked)
            if found is not None:
                return found
            picked.pop()
        return None

    found = dfs(0, _Basis(field, target.cols), [])
    if found is None:
        return None
    return TransferSchedule(failed, helpers, tuple(tuple(i + 1 for i in ix) for ix in found))


def check_schedule(forms: Mapping[int, Matrix], schedule: TransferSchedule) -> bool:
    """Independent rank re-check of a schedule."""
    passed = [forms[h].a[i - 1] for h, ix in zip(schedule.helpers, schedule.indices) for i in ix]
    target = forms[schedule.failed]
    p = Matrix(target.field, np.array(passed))
    both = Matrix(target.field, np.concatenate([p.a, target.a]))
    return mat_rank(both) == mat_rank(p)


@dataclass(frozen=True)
class PairResult:
    failed: int
    helpers: tuple[int, ...]
    schedule: TransferSchedule | None

    @property
    def feasible(self) -> bool:
        return self.schedule is not None


@dataclass
class FeasibilityReport:
    params: SystemParams
    variant: Variant
    pairs: list[PairResult] = dc_field(default_factory=list)
    leaves_checked: int = 0

    @property
    def overall(self) -> bool:
        return all(p.feasible for p in self.pairs)

    @property
    def feasible_count(self) -> int:
        return sum(p.feasible for p in self.pairs)

    def infeasible_pairs(self) -> list[PairResult]:
        return [p for p in self.pairs if not p.feasible]

    def to_dict(self) -> dict:
        p = self.params
        return {
            "n": p.n, "k": p.k, "d": p.d, "field": p.field.name, "beta": 1,
            "variant": str(self.variant),
            "overall_feasible": self.overall,
            "pairs_total": len(self.pairs),
            "pairs_feasible": self.feasible_count,
            "leaves_checked": self.leaves_checked,
            "pairs": [
                {"failed": r.failed, "helpers": list(r.helpers), "feasible": r.feasible,
                 "schedule": r.schedule.to_dict()["indices"] if r.schedule else None}
                for r in self.pairs
            ],
        }


def all_pairs(params: SystemParams):
    for failed in range(1, params.n + 1):
        others = [j for j in range(1, params.n + 1) if j != failed]
        for helpers in itertools.combinations(others, params.d):
            yield failed, helpers


def verify_theorem_witness(params: SystemParams, variant, vectors: EncodingVectors | None = None,
                           budget: int | None = None, systematic: bool = False) -> FeasibilityReport:
    """Search every (failed node, helper set) of the unit code of ``variant``.

    Raises :class:`BudgetExceededError` before searching when the nominal
    enumeration exceeds ``budget`` leaf checks.
    """
    variant = Variant(variant)
    unit = params.unit()
    budget = default_budget() if budget is None else budget
    npairs = params.n * math.comb(params.n - 1, params.d)
    nominal = npairs * enumeration_size(unit)
    if nominal > budget:
        raise BudgetExceededError(
            f"{npairs} pairs x {enumeration_size(unit)} schedules = {nominal} exceeds the budget of {budget}"
        )
    if vectors is None and variant is not Variant.COMPLETE_GRAPH:
        vectors = build_encoding_vectors(unit)
    forms = node_forms(variant, vectors, unit, systematic=systematic)
    report = FeasibilityReport(unit, variant)
    counter = [0]
    for failed, helpers in all_pairs(unit):
        sched = schedule_feasible(forms, failed, helpers, 1, counter)
        report.pairs.append(PairResult(failed, helpers, sched))
    report.leaves_checked = counter[0]
    return report


@dataclass(frozen=True)
class CensusEntry:
    failed: int
    helpers: tuple[int, ...]
    index: int  # stored position passed by the census node


@dataclass
class Census:
    node: int
    variant: Variant
    entries: list[CensusEntry]
    alpha: int

    @property
    def repairs(self) -> int:
        return len(self.entries)

    @property
    def indices(self) -> Counter:
        return Counter(e.index for e in self.entries)

    @property
    def repeated(self) -> dict[int, int]:
        return {i: c for i, c in sorted(self.indices.items()) if c > 1}

    @property
    def distinct_failed(self) -> int:
        return len({e.failed for e in self.entries})

    @property
    def cross_node_repeats(self) -> dict[int, list[int]]:
        """Indices passed for two or more different failed nodes."""
        by_index: dict[int, set[int]] = {}
        for e in self.entries:
            by_index.setdefault(e.index, set()).add(e.failed)
        return {i: sorted(f) for i, f in sorted(by_index.items()) if len(f) > 1}

    @property
    def pigeonhole_forced(self) -> bool:
        return self.repairs > self.alpha

    def to_dict(self) -> dict:
        return {
            "node": self.node,
            "variant": str(self.variant),
            "alpha": self.alpha,
            "repairs": [{"failed": e.failed, "helpers": list(e.helpers), "index": e.index} for e in self.entries],
            "distinct_failed": self.distinct_failed,
            "repeated": {str(i): c for i, c in self.repeated.items()},
            "cross_node_repeats": {str(i): f for i, f in self.cross_node_repeats.items()},
            "pigeonhole_forced": self.pigeonhole_forced,
        }


def shared_symbol_census(variant, node: int, vectors: EncodingVectors | None, params: SystemParams,
                         systematic: bool = False) -> Census:
    """Stored positions ``node`` passes while helping in up to d+1 transfer repairs.

    Repairs are taken one per distinct failed node first (the first helper
    set containing ``node``, in lexicographic order, that admits a transfer
    schedule), then topped up with further feasible helper sets until d+1
    repairs are collected or none remain.  With beta = 1 and more than
    ``alpha`` repairs some position must repeat; ``cross_node_repeats``
    shows whether one stored symbol serves two different failed nodes.
    """
    variant = Variant(variant)
    unit = params.unit()
    if vectors is None and variant is not Variant.COMPLETE_GRAPH:
        vectors = build_encoding_vectors(unit)
    forms = node_forms(variant, vectors, unit, systematic=systematic)
    others = [j for j in range(1, unit.n + 1) if j != node]
    want = unit.d + 1

    def feasible_sets(failed):
        pool = [j for j in others if j != failed]
        for rest in itertools.combinations(pool, unit.d - 1):
            helpers = tuple(sorted((node,) + rest))
            sched = schedule_feasible(forms, failed, helpers)
            if sched is not None:
                yield CensusEntry(failed, helpers, sched.passed(node)[0])

    streams = {f: feasible_sets(f) for f in others}
    entries: list[CensusEntry] = []
    for f in others:
        if len(entries) == want:
            break
        first = next(streams[f], None)
        if first is not None:
            entries.append(first)
    for f in others:
        while len(entries) < want:
            extra = next(streams[f], None)
            if extra is None:
                break
            entries.append(extra)
    if not entries:
        raise NoFeasibleScheduleError(f"node {node} has no feasible transfer schedule under {variant}")
    return Census(node, variant, entries, unit.alpha)
