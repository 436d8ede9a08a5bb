import sys
import threading

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import ORACLE_SCRIPT, additive_game, majority_game, pattern_game, random_game
from ordershap.games import (
    Coalition,
    GameConfigError,
    GameSpec,
    MaskFormatError,
    OracleError,
    TableFormatError,
    augment_dummy,
    build_game,
    coalition_from_mask_string,
    delta_S,
    delta_i,
    delta_ij,
    mask_to_string,
    merge_coalition,
    parse_game_spec,
    read_table,
    table_lines,
)


class TestCoalition:
    def test_from_mask_string_empty(self):
        assert coalition_from_mask_string("000", 3) == Coalition(0, 3)

    def test_from_mask_string_members(self):
        c = coalition_from_mask_string("101", 3)
        assert c.members() == (0, 2)

    def test_length_mismatch(self):
        with pytest.raises(MaskFormatError, match="length 2, expected 3"):
            coalition_from_mask_string("10", 3)

    def test_illegal_character_names_position(self):
        with pytest.raises(MaskFormatError, match="position 1"):
            coalition_from_mask_string("0x1", 3)

    def test_mask_outside_player_set(self):
        with pytest.raises(ValueError):
            Coalition(0b100, 2)

    def test_roundtrip_exhaustive_n6(self):
        for mask in range(1 << 6):
            s = mask_to_string(mask, 6)
            assert coalition_from_mask_string(s, 6).mask == mask

    @given(st.integers(min_value=1, max_value=10), st.data())
    def test_roundtrip_property(self, n, data):
        mask = data.draw(st.integers(min_value=0, max_value=(1 << n) - 1))
        c = Coalition(mask, n)
        assert coalition_from_mask_string(c.to_mask_string(), n) == c

    def test_size_is_popcount(self):
        c = coalition_from_mask_string("1101", 4)
        assert c.size() == 3 == len(c.members())


class TestEvaluate:
    def test_additive_example(self):
        g = additive_game(2, 3, 5)
        assert g.evaluate(Coalition.of((0, 2), 3)) == 7.0

    def test_majority_below_threshold(self):
        g = majority_game()
        assert g.evaluate(Coalition.of((1,), 3)) == 0.0

    def test_pattern_superset(self):
        g = pattern_game(3, 0b011, 1.0)
        assert g.evaluate(Coalition.full(3)) == 1.0

    def test_wrong_player_count(self):
        g = majority_game()
        with pytest.raises(ValueError):
            g.evaluate(Coalition.of((0,), 4))

    def test_cache_counts_misses_only(self):
        g = additive_game(1, 1)
        assert g.eval_count == 0
        g.value(0b01)
        g.value(0b01)
        assert g.eval_count == 1
        g.value(0b10)
        assert g.eval_count == 2

    def test_purity_and_eval_budget(self):
        g = random_game(5, 11)
        first = [g.value(m) for m in range(32)]
        second = [g.value(m) for m in range(32)]
        assert first == second
        assert g.eval_count <= 32

    def test_concurrent_evaluate(self):
        g = random_game(8, 3)
        results = []

        def worker():
            results.append([g.value(m) for m in range(256)])

        threads = [threading.Thread(target=worker) for _ in range(8)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert all(r == results[0] for r in results)
        assert g.eval_count == 256


class TestDeltas:
    def test_delta_i_additive(self):
        g = additive_game(2, 3, 5)
        assert delta_i(g, 1, Coalition.empty(3)) == 3.0

    def test_delta_i_majority_crossing(self):
        g = majority_game()
        assert delta_i(g, 0, Coalition.of((1,), 3)) == 1.0
        assert delta_i(g, 0, Coalition.of((1, 2), 3)) == 0.0

    def test_delta_i_member_rejected(self):
        g = majority_game()
        with pytest.raises(ValueError):
            delta_i(g, 1, Coalition.of((1,), 3))

    def test_delta_ij_majority(self):
        g = majority_game()
        assert delta_ij(g, 0, 1, Coalition.empty(3)) == 1.0
        assert delta_ij(g, 0, 1, Coalition.of((2,), 3)) == -1.0

    def test_delta_ij_additive_vanishes(self):
        g = additive_game(2, 3, 5, 7)
        for mask in (0, 0b1000):
            assert delta_ij(g, 0, 1, Coalition(mask, 4)) == 0.0

    def test_delta_ij_bad_indices(self):
        g = majority_game()
        with pytest.raises(ValueError):
            delta_ij(g, 1, 1, Coalition.empty(3))
        with pytest.raises(ValueError):
            delta_ij(g, 0, 1, Coalition.of((1,), 3))

    def test_delta_S_majority_full(self):
        g = majority_game()
        assert delta_S(g, Coalition.full(3), Coalition.empty(3)) == -2.0

    def test_delta_S_empty_rejected(self):
        g = majority_game()
        with pytest.raises(ValueError):
            delta_S(g, Coalition.empty(3), Coalition.empty(3))
        with pytest.raises(ValueError):
            delta_S(g, Coalition.of((0,), 3), Coalition.of((0,), 3))

    def test_delta_S_specializations(self):
        g = random_game(6, 21)
        n = 6
        for i in range(n):
            for tmask in (0, 0b110000 & ~(1 << i)):
                T = Coalition(tmask & ~(1 << i), n)
                one = delta_S(g, Coalition.of((i,), n), T)
                assert abs(one - delta_i(g, i, T)) <= 1e-12
        for tmask in (0, 0b100100):
            T = Coalition(tmask & ~0b011, n)
            two = delta_S(g, Coalition.of((0, 1), n), T)
            assert abs(two - delta_ij(g, 0, 1, T)) <= 1e-12


class TestBuildGame:
    def test_additive_pair(self):
        g = additive_game(1, 1)
        assert g.value(0b11) == 2.0

    def test_random_deterministic(self):
        a = random_game(5, 7)
        b = random_game(5, 7)
        assert [a.value(m) for m in range(32)] == [b.value(m) for m in range(32)]

    def test_random_dense_matches_singles_bitwise(self):
        g = random_game(8, 13)
        singles = [g.value(m) for m in range(256)]
        table = random_game(8, 13).dense_table()
        assert [float(x) for x in table] == singles

    def test_random_values_in_range(self):
        table = random_game(10, 0).dense_table()
        assert table.min() >= -1.0 and table.max() <= 1.0

    def test_additive_dense_matches_singles_bitwise(self):
        singles = [additive_game(0.1, 0.2, 0.3, 0.7).value(m) for m in range(16)]
        table = additive_game(0.1, 0.2, 0.3, 0.7).dense_table()
        assert [float(x) for x in table] == singles

    def test_pattern_indicator_exhaustive(self):
        for n in (4, 6, 8):
            tmask = 0b101
            for c in (1.0, -2.5):
                g = pattern_game(n, tmask, c)
                for mask in range(1 << n):
                    expected = c if (mask & tmask) == tmask else 0.0
                    assert g.value(mask) == expected

    def test_pattern_rejects_empty_or_nonfinite(self):
        with pytest.raises(GameConfigError):
            build_game(GameSpec("pattern", n=3, pattern_mask=0, constant=1.0))
        with pytest.raises(GameConfigError):
            build_game(
                GameSpec("pattern", n=3, pattern_mask=1, constant=float("inf"))
            )

    def test_majority_threshold_validated(self):
        with pytest.raises(GameConfigError):
            build_game(GameSpec("majority", n=3, threshold=4))

    def test_parse_spec_forms(self):
        assert parse_game_spec("additive:2,3,5").weights == (2.0, 3.0, 5.0)
        assert parse_game_spec("majority:4,2").threshold == 2
        spec = parse_game_spec("pattern:3,110,1.5")
        assert spec.pattern_mask == 0b011 and spec.constant == 1.5
        assert parse_game_spec("random:6,9").seed == 9
        assert parse_game_spec("table:/tmp/x.csv").path == "/tmp/x.csv"
        assert parse_game_spec("exec:3,python3 oracle.py 1 2 3").command.startswith(
            "python3"
        )

    def test_parse_spec_errors(self):
        for bad in ("nosuch:1", "majority:3", "random:xx,3", "plain"):
            with pytest.raises(GameConfigError):
                parse_game_spec(bad)


class TestTable:
    def _write(self, tmp_path, lines):
        path = tmp_path / "game.csv"
        path.write_text("\n".join(lines) + "\n")
        return str(path)

    def test_roundtrip(self, tmp_path):
        g = random_game(3, 5)
        path = self._write(tmp_path, list(table_lines(g)))
        loaded = build_game(GameSpec("table", path=path))
        assert loaded.n == 3
        for mask in range(8):
            assert loaded.value(mask) == g.value(mask)

    def test_duplicate_mask(self, tmp_path):
        path = self._write(
            tmp_path,
            ["mask,value", "00,0.0", "01,1.0", "01,2.0", "11,3.0"],
        )
        with pytest.raises(TableFormatError, match="duplicate mask '01'"):
            read_table(path)

    def test_missing_mask(self, tmp_path):
        path = self._write(tmp_path, ["mask,value", "00,0.0", "01,1.0", "11,3.0"])
        with pytest.raises(TableFormatError, match="missing"):
            read_table(path)

    def test_bad_value(self, tmp_path):
        path = self._write(
            tmp_path, ["mask,value", "00,zero", "01,1.0", "10,2.0", "11,3.0"]
        )
        with pytest.raises(TableFormatError, match="decimal"):
            read_table(path)

    def test_bad_header(self, tmp_path):
        path = self._write(tmp_path, ["m,v", "00,0.0"])
        with pytest.raises(TableFormatError, match="header"):
            read_table(path)

    def test_bad_mask_character(self, tmp_path):
        path = self._write(
            tmp_path, ["mask,value", "00,0.0", "0x,1.0", "10,2.0", "11,3.0"]
        )
        with pytest.raises(TableFormatError, match="position 1"):
            read_table(path)


class TestExecOracle:
    def _game(self, *weights):
        cmd = f"{sys.executable} {ORACLE_SCRIPT} " + " ".join(map(str, weights))
        return build_game(GameSpec("exec", n=len(weights), command=cmd))

    def test_values_match_in_process(self):
        with self._game(2.0, 3.0, 5.0) as g:
            ref = additive_game(2, 3, 5)
            for mask in range(8):
                assert g.value(mask) == ref.value(mask)

    def test_bulk_matches(self):
        with self._game(1.0, 0.5) as g:
            table = g.dense_table()
            assert list(table) == [0.0, 1.0, 0.5, 1.5]

    def test_early_exit_is_oracle_error(self):
        cmd = f"{sys.executable} -c 'import sys; sys.exit(3)'"
        with build_game(GameSpec("exec", n=3, command=cmd)) as g:
            with pytest.raises(OracleError, match="exited"):
                g.value(0b101)

    def test_nonnumeric_response(self):
        cmd = f"{sys.executable} -c 'print(\"nan-sense\"); import sys; sys.stdout.flush(); sys.stdin.read()'"
        with build_game(GameSpec("exec", n=2, command=cmd)) as g:
            with pytest.raises(OracleError, match="non-numeric"):
                g.value(0b01)

    def test_concurrent_access_is_serialized(self):
        # weights 1,2,4 make v(mask) equal the mask itself
        with self._game(1.0, 2.0, 4.0) as g:
            results = []

            def worker():
                results.append([g.value(m) for m in range(8)])

            threads = [threading.Thread(target=worker) for _ in range(4)]
            for t in threads:
                t.start()
            for t in threads:
                t.join()
            assert all(r == [float(m) for m in range(8)] for r in results)


class TestDerivedGames:
    def test_merge_coalition_semantics(self):
        g = random_game(5, 2)
        block = Coalition.of((1, 3), 5)
        merged = merge_coalition(g, block)
        assert merged.n == 4
        # merged player 0 carries {1,3}; players 1,2,3 are base 0,2,4
        assert merged.value(0b0001) == g.value(0b01010)
        assert merged.value(0b0110) == g.value(0b00101)
        assert merged.value(0b1111) == g.value(0b11111)
        assert merged.value(0) == g.value(0)

    def test_augment_dummy(self):
        g = majority_game()
        aug = augment_dummy(g, 0.25)
        for mask in range(8):
            assert aug.value(mask) == g.value(mask)
            assert aug.value(mask | 0b1000) == g.value(mask) + 0.25
