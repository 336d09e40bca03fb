import struct

import numpy as np
import pytest

from data.trace_store import (
    TraceStore, ingest, read_binary, read_grizzly, read_text, write_binary, write_grizzly, write_text,
)
from data.traces import Dataset, TraceSet
from utils.errors import DomainError, TraceFormatError


@pytest.fixture
def dataset(small_leakage, rng):
    profiling = small_leakage.generate(range(16), 4, rng)
    attack = small_leakage.generate(range(16), 2, rng, role="attack")
    return Dataset(profiling, attack)


def test_text_format_is_lossless(dataset, tmp_path):
    path = tmp_path / "traces.txt"
    write_text(path, [dataset.profiling, dataset.attack])
    profiling, attack = read_text(path)
    assert profiling.role == "profiling"
    assert attack.role == "attack"
    for key in dataset.profiling.keys:
        np.testing.assert_array_equal(profiling.get(key), dataset.profiling.get(key))
    assert attack.counts == dataset.attack.counts


def test_text_header_line(dataset, tmp_path):
    path = tmp_path / "traces.txt"
    write_text(path, [dataset.attack.restrict([0, 1])])
    header = path.read_text().splitlines()[0]
    assert header == "TRACESET v1 m=20 B=4 role=attack counts=0:2,1:2"


def test_truncated_text_file_reports_line(dataset, tmp_path):
    path = tmp_path / "traces.txt"
    write_text(path, [dataset.profiling])
    lines = path.read_text().splitlines()
    path.write_text("\n".join(lines[:-3]) + "\n")
    with pytest.raises(TraceFormatError) as excinfo:
        read_text(path)
    assert excinfo.value.unit == "linha"
    assert excinfo.value.position == len(lines) - 2


def test_bad_record_reports_line_and_record(dataset, tmp_path):
    path = tmp_path / "traces.txt"
    write_text(path, [dataset.attack])
    lines = path.read_text().splitlines()
    lines[3] = lines[3].replace(",", ",abc,", 1).rsplit(",", 1)[0]
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(TraceFormatError) as excinfo:
        read_text(path)
    assert excinfo.value.position == 4
    assert "abc" in excinfo.value.record


def test_text_rejects_undeclared_key_and_bad_header(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("TRACESET v1 m=2 B=1 role=raw counts=0:1\n1,0.5,0.5\n")
    with pytest.raises(TraceFormatError):
        read_text(path)
    path.write_text("TRACESET v9 m=2 B=1 role=raw counts=0:1\n0,0.5,0.5\n")
    with pytest.raises(TraceFormatError):
        read_text(path)


def test_binary_format_quantizes_within_half_step(dataset, tmp_path):
    path = tmp_path / "traces.bin"
    write_binary(path, [dataset.profiling, dataset.attack])
    profiling, attack = read_binary(path)
    step = max(np.max(np.abs(s.stacked()[0])) for s in (dataset.profiling, dataset.attack)) / 32767.0
    for key in dataset.profiling.keys:
        np.testing.assert_allclose(profiling.get(key), dataset.profiling.get(key), atol=step / 2 + 1e-12)
    assert attack.role == "attack"
    assert attack.counts == dataset.attack.counts


def test_truncated_binary_reports_offset(dataset, tmp_path):
    path = tmp_path / "traces.bin"
    write_binary(path, [dataset.attack])
    blob = path.read_bytes()
    path.write_bytes(blob[:-10])
    with pytest.raises(TraceFormatError) as excinfo:
        read_binary(path)
    assert excinfo.value.unit == "byte"
    path.write_bytes(b"XXXX" + blob[4:])
    with pytest.raises(TraceFormatError):
        read_binary(path)


def test_grizzly_small_layout(tmp_path, rng):
    samples = rng.integers(-500, 500, size=(4, 6, 10))
    path = tmp_path / "grizzly.raw"
    write_grizzly(path, samples)
    dataset = read_grizzly(path, keys=4, traces_per_key=6, samples=10)
    assert dataset.B == 2
    assert dataset.profiling.counts == {0: 3, 1: 3, 2: 3, 3: 3}
    assert dataset.attack.counts == {0: 3, 1: 3, 2: 3, 3: 3}
    np.testing.assert_array_equal(dataset.attack.get(2), samples[2, 3:])

    split = read_grizzly(path, keys=4, traces_per_key=6, samples=10, profiling_count=2, attack_count=1)
    assert split.profiling.counts[0] == 2
    assert split.attack.counts[0] == 1
    np.testing.assert_array_equal(split.attack.get(1), samples[1, 2:3])


def test_grizzly_layout_errors(tmp_path):
    path = tmp_path / "grizzly.raw"
    write_grizzly(path, np.zeros((4, 6, 10)))
    with pytest.raises(TraceFormatError):
        read_grizzly(path, keys=4, traces_per_key=6, samples=11)
    with pytest.raises(DomainError):
        read_grizzly(path, keys=3, traces_per_key=8, samples=10)
    with pytest.raises(DomainError):
        read_grizzly(path, keys=4, traces_per_key=6, samples=10, profiling_count=4, attack_count=3)


def test_ingest_single_section_splits_in_half(dataset, tmp_path):
    path = tmp_path / "single.txt"
    write_text(path, [dataset.profiling.with_role("raw")])
    loaded = ingest(path)
    assert set(loaded.profiling.counts.values()) == {2}
    assert set(loaded.attack.counts.values()) == {2}
    assert loaded.provenance["format"] == "canonical-text"
    explicit = ingest(path, profiling_count=3)
    assert set(explicit.attack.counts.values()) == {1}


def test_ingest_errors(tmp_path):
    with pytest.raises(DomainError):
        ingest(tmp_path / "missing.txt")
    with pytest.raises(DomainError):
        ingest(tmp_path / "missing.txt", fmt="hdf5")


def test_trace_store_save_and_load(dataset, tmp_path):
    store = TraceStore(str(tmp_path / "store"))
    path = store.save(dataset, "bench", "canonical-binary")
    assert path.endswith("bench.bin")
    loaded = store.load("bench", "canonical-binary")
    assert loaded.profiling.counts == dataset.profiling.counts
    with pytest.raises(DomainError):
        store.save(dataset, "bench", "grizzly-adapter")


def test_binary_file_shares_one_scale(dataset, tmp_path):
    loud = TraceSet(dataset.m, dataset.B, {k: 100.0 * v for k, v in dataset.attack.traces.items()}, "attack")
    path = tmp_path / "traces.bin"
    write_binary(path, [dataset.profiling, loud])
    blob = path.read_bytes()
    header = "<4sHBHIId"
    second = struct.calcsize(header) + 8 * len(dataset.profiling.keys) + 2 * dataset.profiling.n_traces * dataset.m
    first_scale = struct.unpack_from(header, blob, 0)[-1]
    assert struct.unpack_from(header, blob, second)[-1] == first_scale
    assert first_scale == pytest.approx(np.max(np.abs(loud.stacked()[0])) / 32767.0)


def test_binary_sections_with_different_scales_are_rejected(dataset, tmp_path):
    quiet, loud = tmp_path / "quiet.bin", tmp_path / "loud.bin"
    write_binary(quiet, [dataset.profiling])
    write_binary(loud, [TraceSet(dataset.m, dataset.B, {k: 10.0 * v for k, v in dataset.attack.traces.items()})])
    path = tmp_path / "mixed.bin"
    path.write_bytes(quiet.read_bytes() + loud.read_bytes())
    with pytest.raises(TraceFormatError) as excinfo:
        read_binary(path)
    assert excinfo.value.unit == "byte"


def test_grizzly_blocks_stay_on_disk(tmp_path, rng):
    samples = rng.integers(-500, 500, size=(4, 10, 50))
    path = tmp_path / "grizzly.raw"
    write_grizzly(path, samples)
    dataset = read_grizzly(path, keys=4, traces_per_key=10, samples=50)
    block = dataset.profiling.get(2)
    assert isinstance(block, np.memmap)
    assert block.dtype == np.int16
    rows = dataset.attack.take(2, np.array([4, 0]))
    assert rows.dtype == np.float64
    np.testing.assert_array_equal(rows, samples[2, [9, 5]])
    np.testing.assert_allclose(dataset.profiling.mean_traces()[1][1], samples[1, :5].mean(axis=0))


def test_ingest_rejects_split_without_attack_traces(dataset, tmp_path):
    path = tmp_path / "single.txt"
    write_text(path, [dataset.profiling.with_role("raw")])
    with pytest.raises(DomainError):
        ingest(path, profiling_count=4)
