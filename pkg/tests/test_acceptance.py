"""End-to-end acceptance checks, one test per criterion.

Each check prints a PASS/FAIL line (collected again in the terminal summary)
and fails if it runs past its time limit.
"""

import csv
import io
import itertools
import time
from contextlib import contextmanager

import numpy as np

from conftest import ACCEPTANCE_LINES, grid, random_message
from mbrrepair.cli import main
from mbrrepair.codes import Variant, encode_message, systematic_positions
from mbrrepair.params import build_encoding_vectors
from mbrrepair.recovery import check_metrics_bounds, decode_all, designated_helpers, repair, repair_compute
from mbrrepair.search import NoFeasibleScheduleError, shared_symbol_census, verify_theorem_witness


@contextmanager
def criterion(number, name, limit=None):
    start = time.perf_counter()
    ok = False
    try:
        yield
        elapsed = time.perf_counter() - start
        assert limit is None or elapsed <= limit, f"took {elapsed:.1f}s, limit {limit}s"
        ok = True
    finally:
        elapsed = time.perf_counter() - start
        line = f"criterion {number} ({name}): {'PASS' if ok else 'FAIL'} in {elapsed:.1f}s"
        print(line)
        ACCEPTANCE_LINES.append(line)


def vectors_for(variant, params):
    return None if variant is Variant.COMPLETE_GRAPH else build_encoding_vectors(params.unit())


def test_criterion_1_roundtrip(rng):
    with criterion(1, "roundtrip from every k-subset", 60):
        points = 0
        for params, variants in grid():
            msg = random_message(params, 2, rng)
            for variant in variants:
                v = vectors_for(variant, params)
                nodes = encode_message(variant, msg, v, params)
                for subset in itertools.combinations(nodes, params.k):
                    assert np.array_equal(decode_all(variant, subset, v, params), msg), (params, variant)
                points += 1
        assert points > 0


def test_criterion_2_compute_repair_and_download(rng):
    with criterion(2, "repair correctness, download = beta per helper", 300):
        for params, variants in grid():
            msg = random_message(params, 2, rng)
            for variant in variants:
                v = vectors_for(variant, params)
                nodes = encode_message(variant, msg, v, params)
                for f in range(1, params.n + 1):
                    others = [j for j in range(1, params.n + 1) if j != f]
                    for helpers in itertools.combinations(others, params.d):
                        if variant is Variant.COMPLETE_GRAPH:
                            # no inner-product path; its only helper set repairs by transfer
                            content, m = repair(variant, f, helpers, nodes, v, params)
                        else:
                            content, m = repair_compute(variant, f, helpers, nodes, v, params)
                        assert content == nodes[f - 1], (params, variant, f, helpers)
                        assert m.symbols_downloaded == (params.beta,) * params.d
                        assert all(dl <= r for dl, r in zip(m.symbols_downloaded, m.symbols_read))
                        check_metrics_bounds(m, params)


def test_criterion_3_transfer_read_bound(rng):
    with criterion(3, "read = beta per helper on transfer paths", 60):
        counted = {Variant.C1: 0, Variant.C2: 0, Variant.COMPLETE_GRAPH: 0}
        for params, variants in grid():
            msg = random_message(params, 2, rng)
            for variant in variants:
                if variant is Variant.BASELINE:
                    continue
                v = vectors_for(variant, params)
                nodes = encode_message(variant, msg, v, params)
                for f in range(1, params.n + 1):
                    others = [j for j in range(1, params.n + 1) if j != f]
                    if variant is Variant.C1:
                        if f > params.d:
                            continue
                        sets = itertools.combinations(others, params.d)
                    elif variant is Variant.C2:
                        sets = [designated_helpers(f, params)]
                    else:
                        sets = [tuple(others)]
                    for helpers in sets:
                        content, m = repair(variant, f, helpers, nodes, v, params, mode="transfer")
                        assert content == nodes[f - 1]
                        assert m.pure_transfer
                        assert m.symbols_read == m.symbols_downloaded == (params.beta,) * params.d
                        check_metrics_bounds(m, params)
                        counted[variant] += 1
        assert all(counted.values())


def test_criterion_4_transfer_witness():
    with criterion(4, "transfer-schedule witness, n <= 6", 600):
        complete_points = 0
        for params, variants in grid(max_n=6, betas=(1,)):
            for variant in variants:
                report = verify_theorem_witness(params, variant, vectors=vectors_for(variant, params))
                if params.d != params.n - 1:
                    assert not report.overall, f"full transfer schedule found at {params} for {variant}"
                elif variant is Variant.COMPLETE_GRAPH:
                    assert report.overall, (params, variant)
                    complete_points += 1
        assert complete_points > 0


def test_criterion_5_systematic(rng):
    with criterion(5, "systematic positions under c1", 60):
        for params, _ in grid():
            v = build_encoding_vectors(params.unit())
            msg = random_message(params, 1000, rng)
            nodes = encode_message(Variant.C1, msg, v, params, systematic=True)
            units = msg.reshape(-1, params.unit_size)
            for t, (i, j) in enumerate(systematic_positions(params)):
                assert np.array_equal(nodes[i - 1].units(params)[:, j - 1], units[:, t]), (params, i, j)
            assert np.array_equal(decode_all(Variant.C1, nodes[-params.k:], v, params, systematic=True), msg)


def test_criterion_6_pigeonhole():
    with criterion(6, "repeated index whenever d+1 > alpha repairs are censused", 60):
        forced = 0
        for params, variants in grid(max_n=6, betas=(1,)):
            for variant in variants:
                v = vectors_for(variant, params)
                report = verify_theorem_witness(params, variant, vectors=v)
                for node in range(1, params.n + 1):
                    reachable = sum(r.feasible and node in r.helpers for r in report.pairs)
                    try:
                        c = shared_symbol_census(variant, node, v, params)
                    except NoFeasibleScheduleError:
                        assert reachable == 0
                        continue
                    assert c.repairs == min(reachable, params.d + 1)
                    if c.pigeonhole_forced:
                        forced += 1
                        assert c.repeated, (params, variant, node)
        assert forced > 0


def _simulate_csv(tmp_path, capsys, tag):
    wl = tmp_path / "workload.txt"
    wl.write_text("seed 2024\npolicy random-admissible\nfail 1\nread 4\nfull\nfail 6\nfail 3\nfull\n")
    out = tmp_path / tag
    assert main(["simulate", str(wl), "--n", "6", "--k", "3", "--d", "4", "--out-dir", str(out)]) == 0
    return capsys.readouterr().out.encode(), (out / "summary.csv").read_bytes()


def test_criterion_7_determinism(tmp_path, capsys):
    with criterion(7, "simulate is byte-identical across runs"):
        a = _simulate_csv(tmp_path, capsys, "a")
        b = _simulate_csv(tmp_path, capsys, "b")
        assert a == b and a[0] == a[1]


def test_criterion_8_cli_end_to_end(tmp_path, capsys):
    with criterion(8, "1 MiB encode, transfer repair, decode", 30):
        rng = np.random.Generator(np.random.PCG64(8))
        src = tmp_path / "data.bin"
        src.write_bytes(rng.integers(0, 256, size=1 << 20, dtype=np.uint8).tobytes())
        out = tmp_path / "blocks"
        assert main(["encode", str(src), "-o", str(out), "--n", "6", "--k", "3", "--d", "4"]) == 0
        (out / "node02.blk").unlink()
        capsys.readouterr()
        assert main(["repair", str(out / "manifest.json"), "--failed", "2", "--designated", "--mode", "transfer"]) == 0
        row = next(csv.DictReader(io.StringIO(capsys.readouterr().out)))
        assert row["pure_transfer"] == "true"
        assert float(row["read_ratio"]) == 1.0 and float(row["download_ratio"]) == 1.0
        dest = tmp_path / "restored.bin"
        blocks = [str(out / f"node0{i}.blk") for i in (2, 5, 6)]
        assert main(["decode", str(out / "manifest.json"), *blocks, "-o", str(dest)]) == 0
        assert dest.read_bytes() == src.read_bytes()
