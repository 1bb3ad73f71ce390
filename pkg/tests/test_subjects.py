import csv

import numpy as np
import pytest

from spiderlab.spider import SpiderAttributes, valid_actions, apply_action
from spiderlab.subjects import (
    SubjectPopulationConfig,
    SubjectResponder,
    VirtualSubject,
    default_population_config,
    discretize_anxiety,
    evaluate,
    export_population_csv,
    sample_population,
)


def make_subject(weights, noise=0.0, decay=None):
    return VirtualSubject(weights=tuple(weights), noise_sigma=noise,
                          subject_seed=1, habituation_decay=decay)


class TestEvaluate:
    def test_all_max_hits_ten(self):
        s = make_subject((1, 1, 1, 1, 1, 1))
        assert evaluate(s, SpiderAttributes.all_max()) == 10

    def test_all_zero_is_zero(self):
        s = make_subject((0.3, 2.0, 1.0, 0.5, 0.2, 0.7))
        assert evaluate(s, SpiderAttributes.all_zero()) == 0

    def test_mid_state_equal_weights(self):
        # sum a_i = 6, sum a_i^max = 11 -> round(60/11) = round(5.45) = 5
        s = make_subject((1, 1, 1, 1, 1, 1))
        assert evaluate(s, SpiderAttributes(1, 1, 1, 1, 1, 1)) == 5

    def test_output_bounds_over_random_inputs(self):
        rng = np.random.default_rng(0)
        s = make_subject((3, 1, 2, 0.5, 0.1, 0.4), noise=2.0)
        for _ in range(300):
            spider = SpiderAttributes.from_tuple(
                [int(rng.integers(r)) for r in (3, 3, 3, 3, 2, 3)]
            )
            assert 0 <= evaluate(s, spider, rng) <= 10

    def test_monotone_in_every_attribute_without_noise(self):
        rng = np.random.default_rng(4)
        for _ in range(40):
            weights = rng.uniform(0, 3, size=6)
            if weights.sum() == 0:
                continue
            s = make_subject(weights)
            spider = SpiderAttributes.from_tuple(
                [int(rng.integers(r)) for r in (3, 3, 3, 3, 2, 3)]
            )
            base = evaluate(s, spider)
            for action in valid_actions(spider):
                stepped = evaluate(s, apply_action(spider, action))
                if action.direction == 1:
                    assert stepped >= base
                else:
                    assert stepped <= base

    def test_noise_requires_rng(self):
        s = make_subject((1, 1, 1, 1, 1, 1), noise=0.5)
        with pytest.raises(ValueError):
            evaluate(s, SpiderAttributes.all_zero())

    def test_noisy_outputs_reproducible_for_same_stream(self):
        s = make_subject((1, 1, 1, 1, 1, 1), noise=0.8)
        spiders = [SpiderAttributes(1, 1, 1, 1, 1, 1), SpiderAttributes.all_max()]
        out1 = [evaluate(s, sp, np.random.default_rng(5)) for sp in spiders]
        out2 = [evaluate(s, sp, np.random.default_rng(5)) for sp in spiders]
        assert out1 == out2

    def test_unresponsive_subject_rejected(self):
        with pytest.raises(ValueError):
            make_subject((0, 0, 0, 0, 0, 0))
        with pytest.raises(ValueError):
            make_subject((1, -0.1, 1, 1, 1, 1))


class TestDiscretization:
    def test_round_half_up(self):
        assert discretize_anxiety(5.4545) == 5
        assert discretize_anxiety(4.5) == 5
        assert discretize_anxiety(4.4999) == 4

    def test_clamped(self):
        assert discretize_anxiety(-3.2) == 0
        assert discretize_anxiety(12.7) == 10


class TestPopulation:
    def test_sampling_is_bit_reproducible(self):
        cfg = default_population_config(n_subjects=100, master_seed=77)
        pop1 = sample_population(cfg)
        pop2 = sample_population(cfg)
        assert len(pop1) == 100
        assert pop1 == pop2

    def test_zero_stds_give_mean_weights(self):
        cfg = SubjectPopulationConfig(
            impact_means=(2, 1, 1, 1, 0.5, 0.5),
            impact_stds=(0, 0, 0, 0, 0, 0),
            n_subjects=5,
            master_seed=1,
        )
        for subject in sample_population(cfg):
            assert subject.weights == (2, 1, 1, 1, 0.5, 0.5)

    def test_different_master_seeds_differ(self):
        pop1 = sample_population(default_population_config(n_subjects=5, master_seed=1))
        pop2 = sample_population(default_population_config(n_subjects=5, master_seed=2))
        assert pop1[0].weights != pop2[0].weights

    def test_negative_draws_clamped_to_zero(self):
        cfg = SubjectPopulationConfig(
            impact_means=(0.01, 0.01, 0.01, 0.01, 0.01, 5.0),
            impact_stds=(1.0, 1.0, 1.0, 1.0, 1.0, 0.1),
            n_subjects=50,
            master_seed=3,
        )
        pop = sample_population(cfg)
        assert all(w >= 0 for s in pop for w in s.weights)
        assert any(w == 0 for s in pop for w in s.weights)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            SubjectPopulationConfig(impact_means=(0,) * 6, impact_stds=(0,) * 6)
        with pytest.raises(ValueError):
            SubjectPopulationConfig(
                impact_means=(1,) * 6, impact_stds=(-1,) * 6
            )
        with pytest.raises(ValueError):
            default_population_config(n_subjects=0)

    def test_export_csv(self, tmp_path):
        pop = sample_population(default_population_config(n_subjects=7, master_seed=5))
        path = tmp_path / "population.csv"
        export_population_csv(pop, path)
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        assert len(rows) == 8
        assert rows[0][0] == "subject"
        assert float(rows[1][1]) == pop[0].weights[0]


class TestResponder:
    def test_matches_pure_evaluate_without_noise(self):
        s = make_subject((2, 1, 1, 0.5, 0.2, 0.3))
        responder = SubjectResponder(s)
        for spider in (SpiderAttributes.all_zero(), SpiderAttributes(1, 0, 2, 1, 1, 2)):
            assert responder.anxiety(spider) == evaluate(s, spider)

    def test_habituation_never_increases_on_repeats(self):
        s = make_subject((2, 2, 2, 1, 0.5, 0.5), decay=0.95)
        responder = SubjectResponder(s)
        spider = SpiderAttributes.all_max()
        levels = [responder.anxiety(spider) for _ in range(12)]
        assert all(b <= a for a, b in zip(levels, levels[1:]))
        assert levels[-1] < levels[0]

    def test_no_habituation_is_stationary(self):
        s = make_subject((2, 2, 2, 1, 0.5, 0.5))
        responder = SubjectResponder(s)
        spider = SpiderAttributes(2, 1, 1, 0, 1, 2)
        assert len({responder.anxiety(spider) for _ in range(5)}) == 1

    def test_anxiety_table_matches_pointwise(self):
        s = make_subject((3, 1, 0.5, 0.7, 0.2, 0.9))
        table = s.anxiety_table()
        for index in (0, 17, 123, 485):
            from spiderlab.spider import decode

            assert table[index] == pytest.approx(s.continuous_anxiety(decode(index)))
