import pytest

import hashmem


def test_dram_formulas():
    t = hashmem.DramTiming()
    g = hashmem.DramGeometry()
    assert hashmem.column_access(0, t) == 0.0
    assert hashmem.column_access(8192, t) == pytest.approx(333.75)
    assert hashmem.map_page_to_row(8, g).as_tuple() == (0, 0, 0, 1, 0)
    s = hashmem.SubarrayState()
    addr = hashmem.map_page_to_row(0, g)
    assert hashmem.activate(addr, s, t) == pytest.approx(13.75)
    assert hashmem.activate(addr, s, t) == 0.0
    with pytest.raises(IndexError):
        hashmem.map_page_to_row(g.total_pages(), g)


def test_scans():
    row = hashmem.encode_row([(5, 50), (7, 70)], 1024)
    hit = hashmem.area_scan(row, 7)
    assert (hit.found, hit.value, hit.column_index, hit.pe_ticks) == (True, 70, 1, 2)
    assert hashmem.area_scan(row, 9).pe_ticks == 3
    cfg = hashmem.PeConfig()
    cfg.variant = hashmem.PeVariant.PerfOptimized
    perf = hashmem.perf_scan(row, 7, cfg)
    assert (perf.found, perf.value, perf.pe_ticks) == (True, 70, 64)
    assert hashmem.decode_row(row) == [(5, 50), (7, 70)]
    assert len(row.serialize()) == 8192
    with pytest.raises(ValueError):
        hashmem.encode_row([(0xFFFFFFFE, 1)], 4)


def test_cache_line_padding():
    assert hashmem.pad_to_cache_line(70) == b"\x46" + bytes(63)
    assert hashmem.pad_to_cache_line() == bytes(64)


def test_map_and_backends():
    g = hashmem.DramGeometry()
    g.row_size_bytes = 32
    m = hashmem.HashMemMap(g, hashmem.HashConfig())
    for k in range(1, 6):
        assert m.insert(k, k * 10) == hashmem.InsertStatus.Inserted
    assert m.chain_length(1) == 2
    assert m.find(5) == 50
    assert m.erase(5) == hashmem.DeleteStatus.Deleted
    assert m.find(5) is None
    assert len(m) == 4
    assert m.sidecar().startswith("0: ")

    opts = hashmem.BackendOptions()
    opts.hash.bucket_count = 4
    for name in ("pim-area", "pim-perf", "conventional", "chained", "tree", "hopscotch"):
        b = hashmem.make_backend(hashmem.parse_backend(name), opts)
        assert b.name == name
        assert b.insert(5, 50) == "inserted"
        assert b.insert(5, 51) == "updated"
        assert b.probe(5)[0] == 51
        assert b.probe(6)[0] is None
        assert b.erase(5) == "deleted"
    assert hashmem.conventional_probe_cost(8192, hashmem.DramTiming()) == pytest.approx(489.25)
    with pytest.raises(RuntimeError):
        hashmem.parse_backend("btree")


def test_benchmark_and_speedup():
    opts = hashmem.BackendOptions()
    opts.hash.bucket_count = hashmem.default_bucket_count(20000, 1024)
    conv = hashmem.run_benchmark(hashmem.BackendKind.ConventionalSim, opts, 20000)
    perf = hashmem.run_benchmark(hashmem.BackendKind.PimPerf, opts, 20000)
    assert perf.n_probes == 2000
    assert perf.mean_ns == pytest.approx(203.75)
    assert hashmem.compute_speedup(conv, perf) == pytest.approx(conv.mean_ns / 203.75)
    assert hashmem.reports_to_csv([conv, perf]).splitlines()[0].startswith("backend,n_probes")
    tree = hashmem.run_benchmark(hashmem.BackendKind.SoftTree, opts, 20000)
    with pytest.raises(RuntimeError):
        hashmem.compute_speedup(tree, perf)


def test_hopscotch():
    t = hashmem.HopscotchTable(64)
    for k in range(40):
        assert t.insert(k, k + 1)
    assert t.check_invariant() == ""
    assert t.lookup(7) == 8
    assert t.remove(7)
    assert t.lookup(7) is None
    assert len(t) == 39
