"""Tests for rauzy_lab.measures module."""

import pytest

from rauzy_lab.exceptions import ConfigurationError
from rauzy_lab.language import LanguageSlice, prolongation_census
from rauzy_lab.measures import (
    MAX_OSCILLATION_PREFIX,
    OscillationResult,
    ck_oscillation,
    cylinder_estimate,
    left_special_report,
    oscillation_prefix_length,
    oscillation_rows,
    shift_invariance_gap,
    sliding_frequency,
    subsequence_near,
    uniform_frequency_profile,
    word_oscillation,
)
from rauzy_lab.wordgen import ASYMPTOTIC_SCHEDULE, DESK_SCHEDULE, Alphabet, CassaigneKabore, prefix
from tests.conftest import make_prefix, make_slices, make_sturmian_slices


@pytest.fixture(scope="module")
def desk_oscillation() -> OscillationResult:
    return ck_oscillation(DESK_SCHEDULE, 0, [18, 320])


class TestCylinders:
    def test_suffix_frequency_matches_sliding_frequency(self) -> None:
        estimate = cylinder_estimate(make_sturmian_slices(200)[200], "0")
        assert abs(estimate.suffix_frequency - sliding_frequency(make_prefix(), "0")) <= 0.02

    @pytest.mark.parametrize("u", ["0", "1", "01"])
    def test_shift_invariance(self, u: str) -> None:
        estimate = cylinder_estimate(make_sturmian_slices(200)[200], u)
        assert shift_invariance_gap(estimate) <= 0.02

    def test_suffix_counts_split_by_preceding_letter(self) -> None:
        slice_ = make_sturmian_slices(40)[40]
        whole = cylinder_estimate(slice_, "01").suffix_count
        parts = [cylinder_estimate(slice_, a + "01").suffix_count for a in "01"]
        assert whole == sum(parts)

    def test_offset_counts(self) -> None:
        slice_ = LanguageSlice(3, ("001", "010", "100"), Alphabet.binary())
        estimate = cylinder_estimate(slice_, "0")
        assert estimate.offset_counts == [2, 2, 2]
        assert estimate.suffix_count == 2
        assert shift_invariance_gap(estimate) == 0.0

    def test_word_longer_than_n(self) -> None:
        with pytest.raises(ConfigurationError):
            cylinder_estimate(make_sturmian_slices(3)[3], "0101")

    def test_single_offset_has_no_gap(self) -> None:
        estimate = cylinder_estimate(make_sturmian_slices(2)[2], "01")
        with pytest.raises(ConfigurationError):
            shift_invariance_gap(estimate)


class TestFrequencyProfile:
    def test_periodic_word_is_uniform(self) -> None:
        profile = uniform_frequency_profile("01" * 500, "0", 9)
        assert profile.inf == profile.sup == 0.5
        assert profile.windows == 1000 - 9

    def test_sturmian_windows_concentrate(self) -> None:
        word = make_prefix()[:20_000]
        small = uniform_frequency_profile(word, "0", 10)
        large = uniform_frequency_profile(word, "0", 160)
        assert large.spread < small.spread

    def test_ck_profile_does_not_shrink(self) -> None:
        word = prefix(CassaigneKabore(DESK_SCHEDULE), oscillation_prefix_length(DESK_SCHEDULE, 0))
        spreads = [uniform_frequency_profile(word, "0", n).spread for n in (32, 64, 128, 256, 512)]
        assert all(spread >= 0.05 for spread in spreads)

    def test_prefix_too_short(self) -> None:
        with pytest.raises(ConfigurationError):
            uniform_frequency_profile("0101", "0", 10)


class TestLeftSpecial:
    def test_sturmian(self) -> None:
        slices = make_sturmian_slices(50, 51)
        report = left_special_report(slices[50], slices[51])
        assert len(report.words) == 1
        assert report.extensions == [2]
        assert report.increment == 1
        assert report.excess == 1

    def test_full_shift_excess(self) -> None:
        lower = LanguageSlice(1, ("0", "1"), Alphabet.binary())
        upper = LanguageSlice(2, ("00", "01", "10", "11"), Alphabet.binary())
        report = left_special_report(lower, upper)
        assert report.excess == report.increment == 2


class TestOscillation:
    def test_prefix_length(self) -> None:
        assert oscillation_prefix_length(DESK_SCHEDULE, 0) == 4 * 19072

    @pytest.mark.parametrize("depth", [1, 2, 3])
    def test_deep_prefixes_are_capped(self, depth: int) -> None:
        assert oscillation_prefix_length(DESK_SCHEDULE, depth) == MAX_OSCILLATION_PREFIX

    def test_increments_stay_small(self, desk_oscillation: OscillationResult) -> None:
        assert desk_oscillation.max_increment <= 3
        assert all(row.increment <= 3 for row in desk_oscillation.rows)

    def test_three_left_special_words(self, desk_oscillation: OscillationResult) -> None:
        assert [row.left_special for row in desk_oscillation.rows] == [3, 3]

    def test_regimes_oscillate(self, desk_oscillation: OscillationResult) -> None:
        first, second = desk_oscillation.rows
        assert first.regime_tag == "first@0"
        assert second.regime_tag == "second@0"
        assert abs(first.frequency - second.frequency) >= 0.05
        assert first.frequency > second.frequency

    def test_predicted_levels(self, desk_oscillation: OscillationResult) -> None:
        regime = desk_oscillation.regimes[0]
        assert desk_oscillation.rows[0].frequency == pytest.approx(regime.first_predicted, abs=0.05)
        assert desk_oscillation.rows[1].frequency == pytest.approx(regime.second_predicted, abs=0.1)

    def test_subsequence_near(self, desk_oscillation: OscillationResult) -> None:
        regime = desk_oscillation.regimes[0]
        assert subsequence_near(desk_oscillation.rows, regime.first_predicted, 0.05) == [18]

    def test_truncation_guard(self) -> None:
        with pytest.raises(ConfigurationError):
            ck_oscillation(DESK_SCHEDULE, 0, [1000])

    def test_empty_regimes_are_flagged(self) -> None:
        result = ck_oscillation(ASYMPTOTIC_SCHEDULE, 0, [10], prefix_length=2000, truncation_ratio=10)
        assert result.problems
        assert result.rows[0].regime_tag == "none"

    def test_empty_grid(self) -> None:
        with pytest.raises(ConfigurationError):
            ck_oscillation(DESK_SCHEDULE, 0, [])


class TestOscillationRows:
    @pytest.mark.parametrize("source", ["sturmian:golden", "substitution:0>01,1>10", "ck:desk"])
    def test_matches_slices(self, source: str) -> None:
        word = make_prefix(source, 20_000)
        grid = [3, 16, 17, 90]
        slices = make_slices(word, 3, 4, 16, 17, 18, 90, 91)
        for row in oscillation_rows(word, grid):
            lower, upper = slices[row.n], slices[row.n + 1]
            assert row.p == lower.p
            assert row.increment == upper.p - lower.p
            assert row.zero_suffix_count == sum(factor.endswith("0") for factor in lower)
            assert row.left_special == prolongation_census(lower, upper).s_l
            assert row.regime_tag == "none"

    def test_other_letter(self) -> None:
        rows = oscillation_rows("01" * 100, [4], letter="1")
        assert rows[0].zero_suffix_count == 1
        assert rows[0].frequency == 0.5

    def test_missing_letter(self) -> None:
        with pytest.raises(ConfigurationError):
            oscillation_rows("02" * 50, [4], letter="1")

    def test_word_without_schedule(self) -> None:
        result = word_oscillation(make_prefix(), [10, 100])
        assert result.schedule is None
        assert result.regimes == []
        assert [row.regime_tag for row in result.rows] == ["none", "none"]
        assert result.max_increment == 1

    def test_word_with_schedule_is_tagged(self) -> None:
        word = prefix(CassaigneKabore(DESK_SCHEDULE), 40_000)
        result = word_oscillation(word, [18, 320], schedule=DESK_SCHEDULE)
        assert [row.regime_tag for row in result.rows] == ["first@0", "second@0"]
        assert result.depth == 0

    def test_depth_one_midpoints_on_capped_prefix(self) -> None:
        result = ck_oscillation(DESK_SCHEDULE, 1, [18, 320, 6400])
        assert result.prefix_length == MAX_OSCILLATION_PREFIX
        assert [row.regime_tag for row in result.rows] == ["first@0", "second@0", "first@1"]
        assert [row.level for row in result.rows] == [0, 0, 1]
        assert result.max_increment <= 3
