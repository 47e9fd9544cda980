import struct

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hashcube.codes import HashCode
from hashcube.hamming_index import (
    CodeTable,
    DuplicateName,
    Neighbor,
    RadiusTooLarge,
    ball_size,
    enumerate_ball,
    hamming_distance,
    load_code_table,
    save_code_table,
)


def _brute_force(codes: dict[str, int], query: int, radius: int) -> list[Neighbor]:
    hits = sorted(
        (dist, name)
        for name, value in codes.items()
        if (dist := (value ^ query).bit_count()) <= radius
    )
    return [Neighbor(name, dist) for dist, name in hits]


def _random_table(rng, count, width, ball_cap=2):
    table = CodeTable(width=width, ball_cap=ball_cap)
    codes = {}
    for i in range(count):
        name = f"patch_{i:05d}"
        value = int(rng.integers(0, 1 << 63)) if width > 63 else int(rng.integers(0, 1 << width))
        if width > 63:  # compose wide values from two draws
            value = (value << (width - 63)) | int(rng.integers(0, 1 << (width - 63)))
        table.insert(name, HashCode(value, width))
        codes[name] = value
    return table, codes


class TestHammingDistance:
    def test_identity(self):
        code = HashCode(0xDEADBEEF, 32)
        assert hamming_distance(code, code) == 0

    def test_all_bits_differ(self):
        assert hamming_distance(HashCode.zeros(128), HashCode.ones(128)) == 128

    def test_specific_positions(self):
        a = HashCode.zeros(128)
        b = HashCode((1 << 3) | (1 << 17) | (1 << 90), 128)
        assert hamming_distance(a, b) == 3

    def test_width_mismatch_rejected(self):
        with pytest.raises(ValueError):
            hamming_distance(HashCode.zeros(8), HashCode.zeros(16))

    @given(st.integers(0, 2**16 - 1), st.integers(0, 2**16 - 1), st.integers(0, 2**16 - 1))
    def test_metric_properties(self, a, b, c):
        ca, cb, cc = (HashCode(v, 16) for v in (a, b, c))
        assert hamming_distance(ca, cb) == hamming_distance(cb, ca)
        assert hamming_distance(ca, cb) <= hamming_distance(ca, cc) + hamming_distance(cc, cb)


class TestEnumerateBall:
    def test_radius_zero_is_center(self):
        center = HashCode(0b1010, 4)
        assert enumerate_ball(center, 0) == {center}

    def test_sizes_at_128_bits(self):
        center = HashCode.zeros(128)
        assert len(enumerate_ball(center, 1)) == 129
        assert len(enumerate_ball(center, 2)) == 8257

    def test_size_formula(self):
        assert ball_size(128, 2) == 1 + 128 + 128 * 127 // 2

    def test_contents_are_exactly_the_ball(self):
        center = HashCode(0b10110100, 8)
        ball = enumerate_ball(center, 2)
        expect = {
            HashCode(v, 8)
            for v in range(256)
            if (v ^ center.value).bit_count() <= 2
        }
        assert ball == expect

    def test_cap_enforced(self):
        with pytest.raises(RadiusTooLarge):
            enumerate_ball(HashCode.zeros(128), 3)
        assert len(enumerate_ball(HashCode.zeros(8), 3, cap=3)) == ball_size(8, 3)


class TestCodeTable:
    def test_insert_lookup_roundtrip(self):
        table = CodeTable(width=16)
        code = HashCode(0xABCD, 16)
        table.insert("p1", code)
        assert table.lookup("p1") == code
        assert "p1" in table
        assert len(table) == 1

    def test_duplicate_name_rejected(self):
        table = CodeTable(width=16)
        table.insert("p1", HashCode(1, 16))
        with pytest.raises(DuplicateName):
            table.insert("p1", HashCode(2, 16))

    def test_same_code_shares_bucket(self):
        table = CodeTable(width=16)
        code = HashCode(0x00FF, 16)
        table.insert("b", code)
        table.insert("a", code)
        result = table.query_radius(code, 0)
        assert result == [Neighbor("a", 0), Neighbor("b", 0)]

    def test_size_counts_inserts(self):
        table, _ = _random_table(np.random.default_rng(0), 50, 16)
        assert len(table) == 50

    def test_width_checked(self):
        table = CodeTable(width=16)
        with pytest.raises(ValueError):
            table.insert("x", HashCode(0, 8))
        with pytest.raises(ValueError):
            table.query_radius(HashCode(0, 8), 1)

    def test_audit_passes_and_detects_corruption(self):
        table, _ = _random_table(np.random.default_rng(1), 100, 16)
        table.audit()
        table._block_tables[2] = {0: ["patch_00000"]}
        with pytest.raises(AssertionError):
            table.audit()


class TestQueryRadius:
    def test_empty_table(self):
        table = CodeTable(width=16)
        assert table.query_radius(HashCode(0, 16), 5) == []

    def test_constructed_distances(self):
        table = CodeTable(width=16)
        query = HashCode(0, 16)
        table.insert("x", HashCode(0, 16))
        table.insert("y", HashCode(0b11111, 16))  # distance 5
        assert table.query_radius(query, 2) == [Neighbor("x", 0)]

    def test_matches_brute_force_across_radii(self):
        rng = np.random.default_rng(2)
        table, codes = _random_table(rng, 2000, 64)
        table.freeze()
        for _ in range(10):
            q = int(rng.integers(0, 1 << 63)) << 1
            query = HashCode(q, 64)
            for radius in range(0, 9):
                assert table.query_radius(query, radius) == _brute_force(codes, q, radius)

    def test_monotone_in_radius(self):
        rng = np.random.default_rng(3)
        table, _ = _random_table(rng, 500, 32)
        query = HashCode(int(rng.integers(0, 1 << 32)), 32)
        previous: set = set()
        for radius in range(0, 33, 4):
            current = {(n.patch_name, n.distance) for n in table.query_radius(query, radius)}
            assert previous <= current
            previous = current

    def test_enumeration_blocks_and_scan_agree(self):
        rng = np.random.default_rng(4)
        table, _ = _random_table(rng, 800, 32, ball_cap=2)
        table.freeze()
        query = int(rng.integers(0, 1 << 32))
        for radius in (0, 1, 2):
            a = sorted(table._radius_by_enumeration(query, radius))
            b = sorted(table._radius_by_blocks(query, radius))
            c = sorted(table._radius_by_scan(query, radius))
            assert a == b == c
        for radius in (4, 6, 8, 12):
            b = sorted(table._radius_by_blocks(query, radius))
            c = sorted(table._radius_by_scan(query, radius))
            assert b == c

    def test_ordering_is_distance_then_name(self):
        table = CodeTable(width=16)
        table.insert("zz", HashCode(0, 16))
        table.insert("aa", HashCode(0, 16))
        table.insert("mm", HashCode(1, 16))
        result = table.query_radius(HashCode(0, 16), 1)
        assert [n.patch_name for n in result] == ["aa", "zz", "mm"]

    def test_radius_bounds_checked(self):
        table = CodeTable(width=16)
        with pytest.raises(ValueError):
            table.query_radius(HashCode(0, 16), -1)
        with pytest.raises(ValueError):
            table.query_radius(HashCode(0, 16), 17)


class TestQueryKnn:
    def test_small_table_returns_everything(self):
        table = CodeTable(width=16)
        for i in range(3):
            table.insert(f"p{i}", HashCode(i, 16))
        assert len(table.query_knn(HashCode(0, 16), 10)) == 3

    def test_exact_match_first(self):
        table = CodeTable(width=16)
        table.insert("far", HashCode(0xFFFF, 16))
        table.insert("self_b", HashCode(5, 16))
        table.insert("self_a", HashCode(5, 16))
        result = table.query_knn(HashCode(5, 16), 1)
        assert result == [Neighbor("self_a", 0)]

    def test_matches_brute_force_top_k(self):
        rng = np.random.default_rng(5)
        table, codes = _random_table(rng, 400, 32)
        table.freeze()
        query = int(rng.integers(0, 1 << 32))
        got = table.query_knn(HashCode(query, 32), 25)
        want = _brute_force(codes, query, 32)[:25]
        assert got == want

    def test_k_validated(self):
        table = CodeTable(width=16)
        with pytest.raises(ValueError):
            table.query_knn(HashCode(0, 16), 0)


class TestCodeStoreFile:
    def test_roundtrip_preserves_queries(self, tmp_path):
        rng = np.random.default_rng(6)
        table, codes = _random_table(rng, 300, 32)
        table.freeze()
        path = tmp_path / "codes.bin"
        save_code_table(table, path)
        loaded = load_code_table(path)
        assert len(loaded) == 300
        query = HashCode(int(rng.integers(0, 1 << 32)), 32)
        for radius in (0, 2, 6):
            assert loaded.query_radius(query, radius) == table.query_radius(query, radius)

    def test_file_layout(self, tmp_path):
        table = CodeTable(width=16)
        table.insert("ab", HashCode(0x1234, 16))
        path = tmp_path / "codes.bin"
        save_code_table(table, path)
        raw = path.read_bytes()
        assert raw[:4] == b"HQCT"
        version, width, count = struct.unpack("<HIQ", raw[4:18])
        assert (version, width, count) == (1, 16, 1)
        name_len = struct.unpack("<H", raw[18:20])[0]
        assert raw[20 : 20 + name_len] == b"ab"
        assert raw[20 + name_len :] == (0x1234).to_bytes(2, "little")

    def test_save_is_deterministic(self, tmp_path):
        rng = np.random.default_rng(7)
        table, _ = _random_table(rng, 100, 64)
        save_code_table(table, tmp_path / "a.bin")
        save_code_table(table, tmp_path / "b.bin")
        assert (tmp_path / "a.bin").read_bytes() == (tmp_path / "b.bin").read_bytes()
