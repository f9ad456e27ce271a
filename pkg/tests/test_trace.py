import io

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from interplay.cache import Cache, CacheGeometry
from interplay.trace import (
    Kind,
    Region,
    RegionKind,
    TraceArrays,
    TraceParseError,
    TraceRecord,
    WorkloadSpec,
    WorkloadSpecError,
    format_record,
    generate_arrays,
    generate_trace,
    parse_record,
    read_trace,
    write_trace,
)

from conftest import mixed_spec


def test_parse_fetch():
    assert parse_record("I 0x400104") == TraceRecord(Kind.FETCH, 0x400104)


def test_parse_load():
    assert parse_record("L 0x400100 0x7fff0010") == TraceRecord(Kind.LOAD, 0x400100, 0x7FFF0010)


def test_parse_store():
    assert parse_record("S 0x8 0x10") == TraceRecord(Kind.STORE, 0x8, 0x10)


@pytest.mark.parametrize(
    "line",
    ["X 0x1 0x2", "L 0x1", "I", "I 0x1 0x2", "L 0x1 12", "L 0xzz 0x1", "S 0x1 0x2 0x3", ""],
)
def test_parse_errors_name_the_line(line):
    with pytest.raises(TraceParseError) as exc:
        parse_record(line)
    assert repr(line) in str(exc.value)


def test_record_invariant():
    with pytest.raises(ValueError):
        TraceRecord(Kind.FETCH, 4, 8)
    with pytest.raises(ValueError):
        TraceRecord(Kind.LOAD, 4)


def test_canonical_form():
    assert format_record(parse_record("L   0X400100   0x7FFF0010")) == "L 0x400100 0x7fff0010"


def test_read_empty():
    assert list(read_trace(io.StringIO(""))) == []


def test_read_skips_comments_and_blanks():
    recs = list(read_trace(io.StringIO("# hdr\nI 0x4\n")))
    assert recs == [TraceRecord(Kind.FETCH, 4)]
    recs = list(read_trace(io.StringIO("\n  # x\nI 0x4\n\nL 0x8 0x40\n")))
    assert len(recs) == 2


def test_read_error_cites_line_number():
    src = io.StringIO("I 0x4\nL 0x8 0x40\nQ 0x1\nI 0x8\n")
    with pytest.raises(TraceParseError) as exc:
        list(read_trace(src))
    assert exc.value.lineno == 3
    assert "line 3" in str(exc.value)


def test_read_bytes_stream():
    recs = list(read_trace(io.BytesIO(b"I 0x4\nS 0x8 0x80\n")))
    assert recs[1] == TraceRecord(Kind.STORE, 8, 0x80)


def test_read_is_streaming():
    def lines():
        yield "I 0x4\n"
        raise RuntimeError("consumed too far")

    it = read_trace(lines())
    assert next(it).pc == 4


_records = st.one_of(
    st.builds(TraceRecord, st.just(Kind.FETCH), st.integers(0, 2**64 - 1)),
    st.builds(
        TraceRecord,
        st.sampled_from([Kind.LOAD, Kind.STORE]),
        st.integers(0, 2**64 - 1),
        st.integers(0, 2**64 - 1),
    ),
)


@given(st.lists(_records, max_size=50))
def test_round_trip(records):
    buf = io.StringIO()
    write_trace(records, buf)
    text = buf.getvalue()
    back = list(read_trace(io.StringIO(text)))
    assert back == records
    buf2 = io.StringIO()
    write_trace(back, buf2)
    assert buf2.getvalue() == text


@given(st.lists(_records, max_size=50))
def test_arrays_round_trip(records):
    arr = TraceArrays.from_records(records)
    assert list(arr.records()) == records


def test_generate_count():
    spec = mixed_spec(seed=3, n=1000)
    assert sum(1 for _ in generate_trace(spec)) == 1000


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**64 - 1), st.integers(0, 3000))
def test_generate_deterministic(seed, n):
    spec = mixed_spec(seed=seed, n=n)
    a = generate_arrays(spec).to_text()
    b = generate_arrays(spec).to_text()
    assert a == b
    assert a.count("\n") == n


def test_different_seeds_differ():
    assert generate_arrays(mixed_spec(1)).to_text() != generate_arrays(mixed_spec(2)).to_text()


def test_pc_stream_walks_code_footprint():
    spec = WorkloadSpec(100, (), code_footprint_bytes=64, mem_fraction=0.0)
    arr = generate_arrays(spec)
    pcs = arr.pcs.tolist()
    assert pcs[:17] == [0x400000 + 4 * (i % 16) for i in range(17)]
    assert set(arr.kinds.tolist()) == {Kind.FETCH}


def test_store_fraction_extremes():
    spec = WorkloadSpec(2000, (Region(RegionKind.HOT_SET, 4096, 8, 1.0),), seed=1, mem_fraction=1.0)
    assert set(generate_arrays(spec).kinds.tolist()) == {Kind.STORE}
    spec = WorkloadSpec(2000, (Region(RegionKind.HOT_SET, 4096, 8, 0.0),), seed=1, mem_fraction=1.0)
    assert set(generate_arrays(spec).kinds.tolist()) == {Kind.LOAD}


def test_region_addresses_stay_in_working_set():
    spec = mixed_spec(seed=5, n=20000)
    arr = generate_arrays(spec)
    data = arr.addrs[arr.kinds != Kind.FETCH]
    base = 0x10000000
    for i, region in enumerate(spec.regions):
        lo = base + i * (1 << 32)
        sel = data[(data >= lo) & (data < lo + (1 << 32))]
        assert len(sel) > 0
        assert int(sel.max()) - lo < region.working_set_bytes


@pytest.mark.parametrize(
    "bad, field",
    [
        (dict(store_fraction=1.5), "store_fraction"),
        (dict(working_set_bytes=0), "working_set_bytes"),
        (dict(stride_bytes=0), "stride_bytes"),
        (dict(weight=-1.0), "weight"),
    ],
)
def test_spec_validation_lists_fields(bad, field):
    kw = dict(kind=RegionKind.HOT_SET, working_set_bytes=1024, stride_bytes=64, store_fraction=0.1, weight=1.0)
    kw.update(bad)
    spec = WorkloadSpec(10, (Region(**kw),))
    with pytest.raises(WorkloadSpecError) as exc:
        list(generate_trace(spec))
    assert field in str(exc.value)


def test_spec_zero_weights_rejected():
    spec = WorkloadSpec(10, (Region(RegionKind.HOT_SET, 1024, weight=0.0),))
    with pytest.raises(WorkloadSpecError, match="weights"):
        generate_arrays(spec)


def test_stream_twice_dl1_capacity_thrashes():
    """A stream over 2x the DL1 capacity misses on every data access.

    Checked with the object-model reference cache, independent of the kernels.
    """
    dl1 = CacheGeometry(32 * 1024, 4, 64)
    spec = WorkloadSpec(
        n_instructions=30000,
        regions=(Region(RegionKind.SEQUENTIAL_STREAM, 2 * dl1.size_bytes, dl1.block_bytes, 0.2),),
        code_footprint_bytes=1024,
        seed=11,
        mem_fraction=0.5,
    )
    cache = Cache(dl1, dl1.assoc)
    n_data = 0
    for rec in generate_trace(spec):
        if rec.kind != Kind.FETCH:
            n_data += 1
            cache.access(rec.mem_addr & ~63, rec.kind == Kind.STORE)
    # warm-up is one pass over the stream; it misses too (cold)
    assert n_data > 2 * (2 * dl1.size_bytes // 64)
    assert cache.misses == n_data
    assert cache.hits == 0
