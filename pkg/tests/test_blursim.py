import math

import numpy as np
import pytest

from blurmm.blursim import (
    DEFAULT_GROUPS,
    BlurGroup,
    Scenario,
    apply_fixed_blur,
    apply_scenario,
    assign_group,
    assign_groups,
    plan_scenario,
    sample_sigma,
    scenario_table,
    sigma_grid,
)
from blurmm.raster import read_pnm
from blurmm.records import TileRecord, read_manifest
from blurmm.rng import tile_rng
from blurmm.synth import CorpusSpec, gen_corpus


def make_records(n_slides=4, tiles_per_slide=5):
    records = []
    for s in range(n_slides):
        for t in range(tiles_per_slide):
            records.append(
                TileRecord(tile_id=f"s{s}_t{t}", slide_id=f"s{s}", label=s % 2, g=0.0)
            )
    return records


class TestGridAndTable:
    def test_sigma_grid_values(self):
        grid = sigma_grid()
        assert grid == [0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0]
        assert grid == sorted(grid)
        assert 0.0 not in grid

    def test_scenario_table(self):
        table = scenario_table()
        assert len(table) == 8
        assert [s.id for s in table] == list(range(1, 9))
        assert (table[7].p_a, table[7].p_b, table[7].p_c) == (0.80, 0.15, 0.05)
        assert (table[2].p_a, table[2].p_b, table[2].p_c) == (0.0, 0.0, 1.0)
        for s in table:
            assert abs(s.p_a + s.p_b + s.p_c - 1.0) <= 1e-12

    def test_scenario_validation(self):
        with pytest.raises(ValueError):
            Scenario(1, 0.5, 0.2, 0.2)
        with pytest.raises(ValueError):
            Scenario(1, 1.5, -0.5, 0.0)

    def test_default_groups(self):
        assert [(g.name, g.sigma_lo, g.sigma_hi) for g in DEFAULT_GROUPS] == [
            ("A", 0.0, 1.5), ("B", 1.5, 6.0), ("C", 6.0, 10.0),
        ]

    def test_group_validation(self):
        with pytest.raises(ValueError):
            BlurGroup("X", 2.0, 1.0)
        with pytest.raises(ValueError):
            BlurGroup("X", -1.0, 1.0)


class TestAssignment:
    def test_scenario_1_all_group_a(self):
        records = make_records()
        assert set(assign_groups(records, scenario_table()[0], 2)) == {"A"}

    def test_empty_records(self):
        assert assign_groups([], scenario_table()[0], 2) == []

    def test_proportions_binomial_bound(self):
        records = make_records(n_slides=100, tiles_per_slide=100)
        names = assign_groups(records, scenario_table()[7], 2)
        n = len(names)
        for name, p in (("A", 0.80), ("B", 0.15), ("C", 0.05)):
            count = names.count(name)
            bound = 4 * math.sqrt(n * p * (1 - p))
            assert abs(count - n * p) <= bound, (name, count)

    def test_sample_sigma_in_range(self):
        group = DEFAULT_GROUPS[1]
        rng = np.random.default_rng(0)
        draws = [sample_sigma(group, rng) for _ in range(10_000)]
        assert min(draws) >= 1.5 and max(draws) < 6.0
        assert abs(np.mean(draws) - 3.75) < 0.05

    def test_assign_group_uses_cumulative_split(self):
        class FixedRng:
            def __init__(self, u):
                self.u = u

            def random(self):
                return self.u

        scenario = Scenario(0, 0.5, 0.3, 0.2)
        assert assign_group(scenario, DEFAULT_GROUPS, FixedRng(0.0)).name == "A"
        assert assign_group(scenario, DEFAULT_GROUPS, FixedRng(0.49)).name == "A"
        assert assign_group(scenario, DEFAULT_GROUPS, FixedRng(0.5)).name == "B"
        assert assign_group(scenario, DEFAULT_GROUPS, FixedRng(0.79)).name == "B"
        assert assign_group(scenario, DEFAULT_GROUPS, FixedRng(0.8)).name == "C"


class TestPlanning:
    def test_plan_is_deterministic(self):
        records = make_records()
        scenario = scenario_table()[4]
        a = plan_scenario(records, scenario, 7)
        b = plan_scenario(records, scenario, 7)
        assert a == b

    def test_plan_bookkeeping(self):
        records = [r for r in make_records()]
        for r in records:
            r.g = 0.25
        ranges = {g.name: (g.sigma_lo, g.sigma_hi) for g in DEFAULT_GROUPS}
        for plan in plan_scenario(records, scenario_table()[4], 7):
            lo, hi = ranges[plan.group]
            assert lo <= plan.g_i < hi
            assert plan.g_hat == plan.g + plan.g_i

    def test_group_draw_matches_assign_groups(self):
        records = make_records()
        scenario = scenario_table()[5]
        names = assign_groups(records, scenario, 11)
        plans = plan_scenario(records, scenario, 11)
        assert [p.group for p in plans] == names

    def test_scenario_3_heavy_only(self):
        for plan in plan_scenario(make_records(), scenario_table()[2], 3):
            assert plan.group == "C" and 6.0 <= plan.g_i < 10.0


@pytest.fixture(scope="module")
def corpus_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("corpus")
    spec = CorpusSpec(n_slides=4, tiles_per_slide=2, tile_size=48)
    gen_corpus(spec, 2, out)
    return out


class TestApply:
    def test_fixed_blur_zero_bit_identity(self, corpus_dir, tmp_path):
        out = apply_fixed_blur(corpus_dir / "manifest.csv", tmp_path, 0.0)
        for rec in out:
            original = (corpus_dir / rec.path).read_bytes()
            assert (tmp_path / rec.path).read_bytes() == original

    def test_fixed_blur_records_and_images(self, corpus_dir, tmp_path):
        out = apply_fixed_blur(corpus_dir / "manifest.csv", tmp_path, 2.0)
        assert all(r.g_i == 2.0 and r.g_hat == 2.0 for r in out)
        assert read_manifest(tmp_path / "manifest.csv") == out
        blurred = read_pnm(tmp_path / out[0].path)
        sharp = read_pnm(corpus_dir / out[0].path)
        assert blurred.data.std() < sharp.data.std()

    def test_fixed_blur_rejects_negative(self, corpus_dir, tmp_path):
        with pytest.raises(ValueError):
            apply_fixed_blur(corpus_dir / "manifest.csv", tmp_path, -1.0)

    def test_scenario_threads_identical(self, corpus_dir, tmp_path):
        scenario = scenario_table()[4]
        out1 = apply_scenario(corpus_dir / "manifest.csv", tmp_path / "t1", scenario, 5)
        out8 = apply_scenario(
            corpus_dir / "manifest.csv", tmp_path / "t8", scenario, 5, threads=8
        )
        assert out1 == out8
        for rec in out1:
            assert (tmp_path / "t1" / rec.path).read_bytes() == (
                tmp_path / "t8" / rec.path
            ).read_bytes()
        assert (tmp_path / "t1" / "manifest.csv").read_bytes() == (
            tmp_path / "t8" / "manifest.csv"
        ).read_bytes()

    def test_missing_tile_reports_path(self, corpus_dir, tmp_path):
        records = read_manifest(corpus_dir / "manifest.csv")
        bad = tmp_path / "bad"
        bad.mkdir()
        (bad / "manifest.csv").write_text((corpus_dir / "manifest.csv").read_text())
        with pytest.raises(OSError, match=records[0].tile_id):
            apply_fixed_blur(bad / "manifest.csv", tmp_path / "out", 1.0)
