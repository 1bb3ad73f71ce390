import itertools

import pytest

from spiderlab.spider import (
    ATTRIBUTE_MAXES,
    N_STATES,
    RADICES,
    VALID_SLOTS,
    AttributeAction,
    InvalidActionError,
    SpiderAttributes,
    all_states,
    apply_action,
    decode,
    encode,
    valid_actions,
    visual_parameters,
)


def brute_force_edits(spider):
    """Independent enumeration of every in-bounds single-attribute edit."""
    edits = []
    values = spider.as_tuple()
    for attr in range(6):
        for step in (1, -1):
            target = values[attr] + step
            if 0 <= target < RADICES[attr]:
                edits.append((attr, step))
    return edits


class TestEncodeDecode:
    def test_zero_state(self):
        assert encode(SpiderAttributes(0, 0, 0, 0, 0, 0)) == 0

    def test_max_state(self):
        assert encode(SpiderAttributes(2, 2, 2, 2, 1, 2)) == 485

    def test_least_significant_digit(self):
        assert encode(SpiderAttributes(0, 0, 0, 0, 0, 1)) == 1

    def test_decode_zero(self):
        assert decode(0) == SpiderAttributes(0, 0, 0, 0, 0, 0)

    def test_decode_max(self):
        assert decode(485) == SpiderAttributes(2, 2, 2, 2, 1, 2)

    def test_decode_three(self):
        # 3 = 1 * 3 + 0 in the last two digits: hairiness 1, color 0
        assert decode(3) == SpiderAttributes(0, 0, 0, 0, 1, 0)

    def test_bijection_over_all_states(self):
        seen = set()
        for index in range(N_STATES):
            spider = decode(index)
            assert encode(spider) == index
            seen.add(spider.as_tuple())
        assert len(seen) == N_STATES

    def test_exhaustive_tuple_enumeration_matches(self):
        combos = set(itertools.product(*[range(r) for r in RADICES]))
        assert len(combos) == 486
        assert {s.as_tuple() for s in all_states()} == combos

    @pytest.mark.parametrize("index", [-1, 486, 1000])
    def test_decode_out_of_range(self, index):
        with pytest.raises(ValueError):
            decode(index)

    def test_field_bounds_enforced(self):
        with pytest.raises(ValueError):
            SpiderAttributes(3, 0, 0, 0, 0, 0)
        with pytest.raises(ValueError):
            SpiderAttributes(0, 0, 0, 0, 2, 0)


class TestActions:
    def test_all_zero_has_six_increments(self):
        actions = valid_actions(SpiderAttributes.all_zero())
        assert len(actions) == 6
        assert all(a.direction == 1 for a in actions)

    def test_all_max_has_six_decrements(self):
        actions = valid_actions(SpiderAttributes.all_max())
        assert len(actions) == 6
        assert all(a.direction == -1 for a in actions)

    def test_mid_state_has_eleven(self):
        # five 3-valued attributes at a midpoint give 2 each, hairiness at 1 gives 1
        assert len(valid_actions(SpiderAttributes(1, 1, 1, 1, 1, 1))) == 11

    def test_ordering_attribute_ascending_increment_first(self):
        actions = valid_actions(SpiderAttributes(1, 1, 1, 1, 1, 1))
        keys = [(a.attribute_index, 0 if a.direction == 1 else 1) for a in actions]
        assert keys == sorted(keys)

    def test_matches_brute_force_everywhere(self):
        for spider in all_states():
            expected = brute_force_edits(spider)
            got = [(a.attribute_index, a.direction) for a in valid_actions(spider)]
            assert got == expected

    def test_apply_action_worked_example(self):
        # increase Amount of Movement from the mixed state
        start = SpiderAttributes(1, 0, 1, 1, 1, 1)
        out = apply_action(start, AttributeAction(1, 1))
        assert out == SpiderAttributes(1, 1, 1, 1, 1, 1)

    def test_apply_action_boundary_rejected(self):
        with pytest.raises(InvalidActionError):
            apply_action(SpiderAttributes.all_zero(), AttributeAction(4, -1))

    def test_apply_action_decrement(self):
        out = apply_action(SpiderAttributes(2, 2, 1, 0, 0, 1), AttributeAction(0, -1))
        assert out == SpiderAttributes(1, 2, 1, 0, 0, 1)

    def test_apply_changes_exactly_one_field(self):
        for spider in list(all_states())[::23]:
            for action in valid_actions(spider):
                after = apply_action(spider, action)
                diffs = [
                    abs(a - b) for a, b in zip(spider.as_tuple(), after.as_tuple())
                ]
                assert sum(diffs) == 1

    def test_slot_round_trip(self):
        for slot in range(12):
            assert AttributeAction.from_slot(slot).slot == slot

    def test_valid_slot_total(self):
        # four 3-valued and one 2-valued and color: average 23/3 edits per state
        assert int(VALID_SLOTS.sum()) == 486 * 23 // 3


class TestVisualParameters:
    def test_movement_detail_row_for_level_two(self):
        vp = visual_parameters(SpiderAttributes(0, 2, 0, 0, 0, 0))
        assert vp.speed == 3.0
        assert vp.waiting_time_s == 1.0
        assert vp.walking_duration_s == 12.0

    def test_closeness_far_radii(self):
        vp = visual_parameters(SpiderAttributes(0, 0, 0, 0, 0, 0))
        assert (vp.inner_radius_r1, vp.outer_radius_r2) == (7.0, 9.0)

    def test_appearance_minimums(self):
        vp = visual_parameters(SpiderAttributes(0, 0, 0, 0, 0, 0))
        assert vp.scale == 0.25
        assert vp.fur_length == 0.0
        assert vp.color_rgb == (123, 113, 113)

    def test_total_and_pure_with_r1_below_r2(self):
        for spider in all_states():
            vp1 = visual_parameters(spider)
            vp2 = visual_parameters(spider)
            assert vp1 == vp2
            assert vp1.inner_radius_r1 < vp1.outer_radius_r2

    def test_remaining_lookup_rows(self):
        assert visual_parameters(SpiderAttributes(0, 1, 0, 0, 0, 0)).speed == 1.5
        assert visual_parameters(SpiderAttributes(0, 0, 1, 0, 0, 0)).inner_radius_r1 == 5.0
        assert visual_parameters(SpiderAttributes(0, 0, 2, 0, 0, 0)).outer_radius_r2 == 5.0
        assert visual_parameters(SpiderAttributes(0, 0, 0, 1, 0, 0)).scale == 0.5
        assert visual_parameters(SpiderAttributes(0, 0, 0, 2, 0, 0)).scale == 1.0
        assert visual_parameters(SpiderAttributes(0, 0, 0, 0, 1, 0)).fur_length == 0.08
        assert visual_parameters(SpiderAttributes(0, 0, 0, 0, 0, 1)).color_rgb == (77, 40, 42)
        assert visual_parameters(SpiderAttributes(0, 0, 0, 0, 0, 2)).color_rgb == (0, 0, 0)


def test_attribute_maxes_table():
    assert list(ATTRIBUTE_MAXES) == [2, 2, 2, 2, 1, 2]
