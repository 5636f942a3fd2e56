"""Deterministic replay of failure / degraded-read workloads.

A workload is a seeded sequence of events::

    seed 7
    policy random-admissible
    fail 3      # node 3 is lost and regenerated from d helpers
    read 5      # node 5 is busy; its content is served from d helpers
    full        # the whole object is decoded from k nodes

A failed node is regenerated within its own event, so at most one node is
ever down.  Random choices use numpy's PCG64 generator seeded from the
workload, so a summary is reproducible bit for bit.
"""

from __future__ import annotations

import csv
import io
import itertools
from dataclasses import dataclass, field as dc_field

import numpy as np

from .codec import Codec
from .codes import VARIANT_ORDER, Variant, admissible_variants
from .params import SystemParams
from .recovery import designated_helpers

POLICIES = ("designated", "random-admissible", "adversarial-worst-read")
SUMMARY_FIELDS = ("variant", "events", "read", "download", "read_ratio", "download_ratio", "pure_transfer_frac")


class WorkloadError(ValueError):
    pass


@dataclass(frozen=True)
class Event:
    kind: str  # "fail", "read" or "full"
    node: int | None = None

    def __str__(self):
        return self.kind if self.node is None else f"{self.kind} {self.node}"


@dataclass
class Workload:
    seed: int = 0
    policy: str = "designated"
    events: list[Event] = dc_field(default_factory=list)

    def __post_init__(self):
        if self.policy not in POLICIES:
            raise WorkloadError(f"unknown helper policy {self.policy!r}; choose from {', '.join(POLICIES)}")

    def validate(self, params: SystemParams) -> None:
        for i, ev in enumerate(self.events, 1):
            if ev.kind in ("fail", "read"):
                if ev.node is None or not 1 <= ev.node <= params.n:
                    raise WorkloadError(f"event {i} ({ev}): node must be in 1..{params.n}")
            elif ev.kind != "full":
                raise WorkloadError(f"event {i}: unknown kind {ev.kind!r}")

    def dumps(self) -> str:
        lines = [f"seed {self.seed}", f"policy {self.policy}"]
        lines += [str(e) for e in self.events]
        return "\n".join(lines) + "\n"


def parse_workload(text: str) -> Workload:
    seed, policy, events = 0, "designated", []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        head = parts[0].lower()
        try:
            if head == "seed" and len(parts) == 2:
                seed = int(parts[1])
            elif head == "policy" and len(parts) == 2:
                policy = parts[1]
            elif head in ("fail", "read") and len(parts) == 2:
                events.append(Event(head, int(parts[1])))
            elif head == "full" and len(parts) == 1:
                events.append(Event("full"))
            else:
                raise ValueError
        except ValueError:
            raise WorkloadError(f"line {lineno}: cannot parse {raw.strip()!r}") from None
    return Workload(seed, policy, events)


@dataclass(frozen=True)
class EventRecord:
    kind: str
    node: int | None
    nodes: tuple[int, ...]  # helpers, or the k nodes used for a full read
    read: int
    download: int
    pure_transfer: bool
    path: str  # "transfer", "compute" or "decode"


@dataclass
class TrafficSummary:
    variant: Variant
    params: SystemParams
    records: list[EventRecord] = dc_field(default_factory=list)

    @property
    def repair_records(self) -> list[EventRecord]:
        return [r for r in self.records if r.kind != "full"]

    @property
    def repairs(self) -> int:
        return len(self.repair_records)

    @property
    def read(self) -> int:
        return sum(r.read for r in self.repair_records)

    @property
    def download(self) -> int:
        return sum(r.download for r in self.repair_records)

    @property
    def decode_download(self) -> int:
        return sum(r.download for r in self.records if r.kind == "full")

    def _bound(self) -> int:
        return self.repairs * self.params.d * self.params.beta

    @property
    def read_ratio(self) -> float:
        return self.read / self._bound() if self.repairs else 0.0

    @property
    def download_ratio(self) -> float:
        return self.download / self._bound() if self.repairs else 0.0

    @property
    def pure_transfer_frac(self) -> float:
        return sum(r.pure_transfer for r in self.repair_records) / self.repairs if self.repairs else 0.0

    def row(self) -> dict:
        return {
            "variant": str(self.variant),
            "events": len(self.records),
            "read": self.read,
            "download": self.download,
            "read_ratio": f"{self.read_ratio:.6f}",
            "download_ratio": f"{self.download_ratio:.6f}",
            "pure_transfer_frac": f"{self.pure_transfer_frac:.6f}",
        }

    def to_dict(self) -> dict:
        out = self.row()
        out.update(
            repairs=self.repairs,
            decode_download=self.decode_download,
            records=[
                {"kind": r.kind, "node": r.node, "nodes": list(r.nodes), "read": r.read,
                 "download": r.download, "pure_transfer": r.pure_transfer, "path": r.path}
                for r in self.records
            ],
        )
        return out


def _choose_helpers(codec: Codec, failed: int, policy: str, rng: np.random.Generator) -> tuple[int, ...]:
    p = codec.params
    others = [j for j in range(1, p.n + 1) if j != failed]
    if codec.variant is Variant.COMPLETE_GRAPH:
        return tuple(others)
    if policy == "designated":
        if codec.variant is Variant.C2:
            return tuple(sorted(designated_helpers(failed, p)))
        return tuple(others[: p.d])
    if policy == "random-admissible":
        return tuple(sorted(rng.choice(others, size=p.d, replace=False).tolist()))
    best, best_read = None, -1
    for helpers in itertools.combinations(others, p.d):
        per = p.beta if codec.transfer_admissible(failed, helpers) else p.alpha
        if per * p.d > best_read:
            best, best_read = helpers, per * p.d
    return best


def _choose_collectors(codec: Codec, policy: str, rng: np.random.Generator) -> tuple[int, ...]:
    p = codec.params
    if policy == "random-admissible":
        return tuple(sorted((rng.choice(p.n, size=p.k, replace=False) + 1).tolist()))
    return tuple(range(1, p.k + 1))


def run_workload(variant, params: SystemParams, message, workload: Workload,
                 systematic: bool = False) -> TrafficSummary:
    """Replay ``workload`` against ``variant`` and meter the traffic.

    Every regenerated or served node is compared symbol for symbol with the
    original, and every failure is followed by a decode through the
    regenerated node; a mismatch raises ``AssertionError``.
    """
    workload.validate(params)
    codec = Codec(params, variant, systematic=systematic and Variant(variant) is Variant.C1)
    message = np.asarray(message, dtype=np.int64).reshape(-1, params.B)
    contents = {c.node_id: c for c in codec.encode(message)}
    original = dict(contents)
    rng = np.random.Generator(np.random.PCG64(workload.seed))
    summary = TrafficSummary(codec.variant, params)
    for ev in workload.events:
        if ev.kind == "full":
            nodes = _choose_collectors(codec, workload.policy, rng)
            decoded = codec.decode({i: contents[i] for i in nodes})
            if not np.array_equal(decoded, message):
                raise AssertionError(f"decode from {nodes} did not reproduce the message")
            moved = len(nodes) * params.alpha
            summary.records.append(EventRecord("full", None, nodes, moved, moved, True, "decode"))
            continue
        helpers = _choose_helpers(codec, ev.node, workload.policy, rng)
        available = {h: contents[h] for h in helpers}
        content, metrics = codec.repair(ev.node, helpers, available)
        if content != original[ev.node]:
            raise AssertionError(f"{ev} under {codec.variant} did not reproduce the node content")
        if ev.kind == "fail":
            contents[ev.node] = content
            others = [j for j in range(1, params.n + 1) if j != ev.node][: params.k - 1]
            check = codec.decode({i: contents[i] for i in [ev.node] + others})
            if not np.array_equal(check, message):
                raise AssertionError(f"decode through regenerated node {ev.node} failed")
        summary.records.append(
            EventRecord(ev.kind, ev.node, metrics.helpers, metrics.total_read, metrics.total_download,
                        metrics.pure_transfer, "transfer" if metrics.pure_transfer else "compute")
        )
    return summary


def compare_variants(params: SystemParams, message, workload: Workload, systematic: bool = False,
                     variants=None) -> list[TrafficSummary]:
    """Replay the same workload against each admissible variant, in fixed order."""
    allowed = admissible_variants(params)
    chosen = [v for v in VARIANT_ORDER if v in allowed and (variants is None or v in variants)]
    return [run_workload(v, params, message, workload, systematic=systematic) for v in chosen]


def summaries_to_csv(summaries) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=SUMMARY_FIELDS, lineterminator="\n")
    w.writeheader()
    for s in summaries:
        w.writerow(s.row())
    return buf.getvalue()


def random_message(params: SystemParams, stripes: int, seed: int) -> np.ndarray:
    rng = np.random.Generator(np.random.PCG64(seed))
    return rng.integers(0, params.q, size=(stripes, params.B), dtype=np.int64)
