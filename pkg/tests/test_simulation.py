import json

import numpy as np
import pytest

from ordagree.index import CategoryDistribution, DomainError, RatingMatrix, estimate_agreement, theoretical_d
from ordagree.simulation import (
    DEFAULT_P,
    PopulationSpec,
    StudyConfig,
    draw_two_stage_sample,
    export_report,
    generate_population,
    mix_to_dispersion,
    population_d,
    run_study,
    score_intervals,
)


@pytest.fixture(scope="module")
def population():
    return generate_population(PopulationSpec(seed=1))


@pytest.fixture(scope="module")
def small_report(population):
    return run_study(population, StudyConfig(S=12, B=60, seed=4))


def test_point_mass_population():
    pop = generate_population(PopulationSpec(N_T=10, N_R=5, p=(0, 0, 1, 0), seed=0))
    assert pop.d == 0
    assert np.all(pop.matrix.cells == 3)


def test_population_value(population):
    assert population.matrix.shape == (150, 28)
    corrected = population_d(population.matrix, census_correction=True)
    assert corrected == pytest.approx(population.d * 28 / 27)
    assert theoretical_d(CategoryDistribution(DEFAULT_P)) == pytest.approx(0.6175)


def test_population_seed_determinism():
    a = generate_population(PopulationSpec(seed=9))
    b = generate_population(PopulationSpec(seed=9))
    np.testing.assert_array_equal(a.matrix.cells, b.matrix.cells)


class TestMixToDispersion:
    @pytest.mark.parametrize("target", [0.41, 0.2, 0.05])
    def test_hits_target(self, target):
        q = mix_to_dispersion(DEFAULT_P, target)
        assert theoretical_d(q) == pytest.approx(target, abs=1e-3)
        assert np.argmax(q.p) == 2

    def test_cannot_raise(self):
        with pytest.raises(DomainError):
            mix_to_dispersion(DEFAULT_P, 0.9)


class TestTwoStageSample:
    def test_shape(self, population):
        s = draw_two_stage_sample(population.matrix, 50, 7, np.random.default_rng(0))
        assert s.shape == (50, 7)

    def test_census_is_permutation(self, population):
        s = draw_two_stage_sample(population.matrix, 150, 28, np.random.default_rng(0))
        a, b = estimate_agreement(s), estimate_agreement(population.matrix)
        assert a.d_hat == pytest.approx(b.d_hat, abs=1e-12)

    def test_shortfall(self, population):
        with pytest.raises(DomainError):
            draw_two_stage_sample(population.matrix, 151, 7, np.random.default_rng(0))

    def test_rater_inclusion_probability(self):
        # tag each population column by its index so selected raters are observable
        pop = RatingMatrix(np.tile(np.arange(1, 29), (150, 1)), 28)
        rng = np.random.default_rng(3)
        n = 4000
        hits = np.zeros(28)
        for _ in range(n):
            hits[draw_two_stage_sample(pop, 50, 7, rng).cells[0] - 1] += 1
        share = hits / n
        assert np.all(np.abs(share - 0.25) < 3 * np.sqrt(0.25 * 0.75 / n) + 0.01)
        assert share.mean() == pytest.approx(0.25)


class TestScoring:
    def test_forced_unit_intervals(self):
        cell = score_intervals(np.zeros(30), np.ones(30), 0.61)
        assert (cell.ECP, cell.LE, cell.RE, cell.AL) == (100.0, 0.0, 0.0, 1.0)

    def test_closed_interval_and_partition(self):
        lower = np.array([0.5, 0.62, 0.3, 0.61])
        upper = np.array([0.7, 0.8, 0.6, 0.61])
        cell = score_intervals(lower, upper, 0.61)
        assert cell.ECP == 50 and cell.LE == 25 and cell.RE == 25
        assert cell.ECP + cell.LE + cell.RE == pytest.approx(100, abs=1e-9)


class TestRunStudy:
    def test_arity_and_partition(self, small_report):
        rows = small_report.rows()
        assert len(rows) == 12
        for r in rows:
            assert r["ECP"] + r["LE"] + r["RE"] == pytest.approx(100, abs=1e-9)
            assert r["AL"] >= 0
        assert small_report.sample_estimates.shape == (12,)

    def test_normal_rows_identical(self, small_report):
        normal = [c for (s, m), c in small_report.cells.items() if m == "normal"]
        assert len(normal) == 3 and all(c == normal[0] for c in normal)

    def test_deterministic_and_worker_independent(self, population, small_report):
        again = run_study(population, StudyConfig(S=12, B=60, seed=4), workers=2)
        assert again.to_csv() == small_report.to_csv()
        np.testing.assert_array_equal(again.sample_estimates, small_report.sample_estimates)

    def test_seed_changes_result(self, population, small_report):
        other = run_study(population, StudyConfig(S=12, B=60, seed=5))
        assert not np.array_equal(other.sample_estimates, small_report.sample_estimates)

    def test_normal_only_needs_no_bootstrap(self, population):
        rep = run_study(population, StudyConfig(S=5, B=1, methods=("normal",), schemes=("parametric",)))
        assert list(rep.cells) == [("parametric", "normal")]
        assert rep.bias == {}

    def test_constant_population_falls_back(self):
        pop = generate_population(PopulationSpec(N_T=20, N_R=8, p=(0, 1, 0), seed=0))
        rep = run_study(pop, StudyConfig(S=3, B=20, n_T=5, n_R=3))
        assert rep.fallbacks == 3 * 3
        assert all(c.ECP == 100 for c in rep.cells.values())

    def test_config_validation(self):
        with pytest.raises(DomainError):
            StudyConfig(methods=("bca",))
        with pytest.raises(DomainError):
            StudyConfig(B=1)
        pop = generate_population(PopulationSpec(N_T=10, N_R=5, seed=0))
        with pytest.raises(DomainError):
            run_study(pop, StudyConfig(S=2, B=10))


class TestExport:
    def test_files(self, small_report, tmp_path):
        paths = export_report(small_report, tmp_path, raw=True)
        lines = paths["csv"].read_text().splitlines()
        assert lines[0] == "scheme,method,ECP,LE,RE,AL" and len(lines) == 13
        raw = paths["raw"].read_text().splitlines()
        assert len(raw) == 1 + small_report.config.S
        data = json.loads(paths["json"].read_text())
        assert data["population_d"] == small_report.population_d
        for row, orig in zip(data["scoreboard"], small_report.rows()):
            assert row == orig
        assert [float(r.split(",")[1]) for r in raw[1:]] == small_report.sample_estimates.tolist()

    def test_empty_method_set(self, population, tmp_path):
        rep = run_study(population, StudyConfig(S=2, B=10, methods=()))
        paths = export_report(rep, tmp_path, raw=False)
        assert paths["csv"].read_text() == "scheme,method,ECP,LE,RE,AL\n"
        assert "raw" not in paths
