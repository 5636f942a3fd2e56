import numpy as np
import pytest

from mbrrepair.codes import Variant
from mbrrepair.field import GF256, Field
from mbrrepair.harness import (
    SUMMARY_FIELDS,
    Event,
    Workload,
    WorkloadError,
    compare_variants,
    parse_workload,
    random_message,
    run_workload,
    summaries_to_csv,
)
from mbrrepair.params import make_params


def one_fail_per_node(n, policy="designated", seed=1):
    return Workload(seed, policy, [Event("fail", i) for i in range(1, n + 1)])


def test_c2_designated_pure_transfer():
    p = make_params(6, 3, 4, GF256, beta=2)
    s = run_workload("c2", p, random_message(p, 3, 0), one_fail_per_node(6))
    assert s.pure_transfer_frac == 1.0
    assert s.read_ratio == 1.0 and s.download_ratio == 1.0
    assert s.read == 6 * p.d * p.beta


def test_baseline_reads_d_times_bound():
    p = make_params(6, 3, 4, GF256, beta=2)
    s = run_workload("baseline", p, random_message(p, 3, 0), one_fail_per_node(6))
    assert s.read_ratio == p.d
    assert s.download_ratio == 1.0
    assert s.pure_transfer_frac == 0.0


def test_empty_workload():
    p = make_params(4, 2, 2, Field.prime(7))
    s = run_workload("c1", p, random_message(p, 1, 0), Workload())
    assert (s.read, s.download, s.read_ratio, s.download_ratio, s.pure_transfer_frac) == (0, 0, 0, 0, 0)
    assert s.row()["events"] == 0


def test_c1_mixed_paths():
    p = make_params(5, 2, 3, GF256)
    s = run_workload("c1", p, random_message(p, 2, 3), one_fail_per_node(5))
    paths = [r.path for r in s.records]
    assert paths == ["transfer"] * 3 + ["compute"] * 2
    assert s.read_ratio == pytest.approx((3 * 1 + 2 * 3) / 5)


def test_adversarial_policy_avoids_transfer():
    p = make_params(5, 2, 2, GF256)
    s = run_workload("c2", p, random_message(p, 1, 0), one_fail_per_node(5, "adversarial-worst-read"))
    assert s.pure_transfer_frac == 0.0 and s.read_ratio == p.d


def test_complete_graph_always_transfer():
    p = make_params(5, 3, 4, GF256)
    w = Workload(2, "random-admissible", [Event("fail", 2), Event("read", 4), Event("full")])
    s = run_workload("complete-graph", p, random_message(p, 2, 1), w)
    assert s.pure_transfer_frac == 1.0 and s.read_ratio == 1.0
    assert s.decode_download == p.k * p.alpha


def test_determinism():
    p = make_params(6, 3, 4, GF256)
    text = "seed 11\npolicy random-admissible\nfail 2\nread 5\nfull\nfail 6\nfull\n"
    w = parse_workload(text)
    msg = random_message(p, 4, w.seed)
    a = summaries_to_csv(compare_variants(p, msg, w, systematic=True))
    b = summaries_to_csv(compare_variants(p, msg, parse_workload(text), systematic=True))
    assert a == b
    assert a.splitlines()[0] == ",".join(SUMMARY_FIELDS)
    assert len(a.splitlines()) == 4
    assert np.array_equal(random_message(p, 2, 5), random_message(p, 2, 5))


def test_parse_workload_roundtrip():
    w = parse_workload("# comment\nseed 3\npolicy designated\nfail 1  # trailing\n\nread 2\nfull\n")
    assert w.seed == 3 and [str(e) for e in w.events] == ["fail 1", "read 2", "full"]
    assert parse_workload(w.dumps()) == w


@pytest.mark.parametrize("text", ["fail", "fail x", "explode 1", "full 2", "policy lazy"])
def test_parse_workload_errors(text):
    with pytest.raises(WorkloadError):
        parse_workload(text)


def test_out_of_range_event():
    p = make_params(4, 2, 2, Field.prime(7))
    with pytest.raises(WorkloadError):
        run_workload("c1", p, random_message(p, 1, 0), Workload(0, "designated", [Event("fail", 9)]))


def test_compare_variants_order():
    p = make_params(5, 2, 4, GF256)
    out = compare_variants(p, random_message(p, 1, 0), one_fail_per_node(5))
    assert [s.variant for s in out] == [Variant.BASELINE, Variant.C1, Variant.C2, Variant.COMPLETE_GRAPH]
