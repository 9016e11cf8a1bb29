"""Dataset generation fidelity: bucket proportions, bounds, determinism.

The mixture-mean oracle integrates x * pdf(x) numerically per bucket rather
than reusing the library's closed form, so the two derivations check each
other.
"""
import math

import pytest
from scipy import integrate, stats

from coldbench.datagen import (
    DSDA_MAIN,
    FIRST_BUCKET_FLOOR,
    GIB,
    KIB,
    MIB,
    DatasetSpec,
    FileSizeDistribution,
    expected_bucket_counts,
    generate_dataset,
    load_manifest,
    preset_distribution,
    sample_file_size,
    save_manifest,
    scale_distribution,
)
from coldbench.sim import RngStream

DSDA_WEIGHTS = [77_540_744, 4_719_466, 2_387_125, 2_095_864, 2_748_315,
                1_616_620, 1_991_281, 993_066, 1_586_496, 184_138]
DSDA_TOTAL = sum(DSDA_WEIGHTS)


def quadrature_mixture_mean(dist: FileSizeDistribution) -> float:
    """Numeric oracle: E[X] = sum_i w_i * Int x/(x ln(b/a)) dx / W."""
    total = sum(b.weight for b in dist.histogram)
    mean = 0.0
    for b in dist.histogram:
        lo, hi = b.bounds(dist.top_cap_bytes)
        log_range = math.log(hi / lo)
        value, _err = integrate.quad(lambda x: 1.0 / log_range, lo, hi)
        mean += (b.weight / total) * value
    return mean


class TestPreset:
    def test_dsda_bucket_weights(self):
        dist = preset_distribution("dsda-main")
        assert [b.weight for b in dist.histogram] == DSDA_WEIGHTS
        edges = [(b.lo, b.hi) for b in dist.histogram]
        assert edges[0] == (0, 8 * MIB)
        assert edges[-2] == (1024 * MIB, 2048 * MIB)
        assert edges[-1] == (2048 * MIB, None)
        assert dist.top_cap_bytes == 4 * GIB

    def test_first_bucket_share_is_81_percent(self):
        assert DSDA_WEIGHTS[0] / DSDA_TOTAL == pytest.approx(0.809, abs=0.001)

    def test_unknown_preset(self):
        with pytest.raises(KeyError):
            preset_distribution("lofar-main")


class TestSampling:
    def test_fixed_distribution_is_constant(self):
        dist = FileSizeDistribution.fixed(1 * MIB)
        rng = RngStream(1, "datagen")
        assert all(sample_file_size(dist, rng) == 1_048_576 for _ in range(100))

    def test_first_bucket_fraction_at_100k_draws(self):
        rng = RngStream(11, "datagen")
        hits = sum(
            1 for _ in range(100_000) if sample_file_size(DSDA_MAIN, rng) < 8 * MIB
        )
        assert hits / 100_000 == pytest.approx(DSDA_WEIGHTS[0] / DSDA_TOTAL, abs=0.01)

    def test_sizes_stay_inside_bucket_bounds(self):
        rng = RngStream(2, "datagen")
        for _ in range(20_000):
            size = sample_file_size(DSDA_MAIN, rng)
            idx = DSDA_MAIN.bucket_of(size)
            lo, hi = DSDA_MAIN.histogram[idx].bounds(DSDA_MAIN.top_cap_bytes)
            assert lo <= size < hi

    def test_minimum_size_is_one_kib_in_zero_based_bucket(self):
        rng = RngStream(3, "datagen")
        smallest = min(sample_file_size(DSDA_MAIN, rng) for _ in range(50_000))
        assert smallest >= FIRST_BUCKET_FLOOR

    def test_empirical_mean_within_two_percent_of_quadrature_oracle(self):
        oracle = quadrature_mixture_mean(DSDA_MAIN)
        closed_form = DSDA_MAIN.expected_mean_bytes()
        assert closed_form == pytest.approx(oracle, rel=1e-9)
        rng = RngStream(5, "datagen")
        n = 1_000_000
        total = sum(sample_file_size(DSDA_MAIN, rng) for _ in range(n))
        assert total / n == pytest.approx(oracle, rel=0.02)

    def test_lognormal_clamped_to_one_byte(self):
        dist = FileSizeDistribution.lognormal(mu=0.0, sigma=3.0)
        rng = RngStream(6, "datagen")
        sizes = [sample_file_size(dist, rng) for _ in range(10_000)]
        assert min(sizes) >= 1

    def test_lognormal_mean_matches_theory(self):
        dist = FileSizeDistribution.lognormal(mu=12.0, sigma=0.5)
        rng = RngStream(7, "datagen")
        n = 200_000
        mean = sum(sample_file_size(dist, rng) for _ in range(n)) / n
        assert mean == pytest.approx(math.exp(12.0 + 0.125), rel=0.02)

    def test_malformed_histograms_rejected(self):
        with pytest.raises(ValueError):
            FileSizeDistribution.from_buckets([(0, 10, 5), (5, 20, 5)])  # overlap
        with pytest.raises(ValueError):
            FileSizeDistribution.from_buckets([(0, 10, 0)])  # zero weight
        with pytest.raises(ValueError):
            FileSizeDistribution.from_buckets([(0, None, 1), (10, 20, 1)])  # open middle


class TestGenerate:
    def test_all_static_when_fraction_is_one(self):
        manifest = generate_dataset(DatasetSpec(
            total_files=10, distribution=FileSizeDistribution.fixed(KIB),
            static_fraction=1.0, seed=1,
        ))
        assert all(r.set_name == "static" for r in manifest.records)

    def test_static_count_is_ceiling(self):
        manifest = generate_dataset(DatasetSpec(
            total_files=10, distribution=FileSizeDistribution.fixed(KIB),
            static_fraction=0.25, seed=1,
        ))
        assert len(manifest.static_records) == 3
        assert [r.set_name for r in manifest.records[:3]] == ["static"] * 3

    def test_chi_square_on_bucket_proportions(self):
        spec = DatasetSpec(total_files=100_000, distribution=DSDA_MAIN, seed=13)
        manifest = generate_dataset(spec)
        observed = manifest.summary.bucket_counts
        expected = expected_bucket_counts(DSDA_MAIN, 100_000)
        statistic = sum((o - e) ** 2 / e for o, e in zip(observed, expected))
        p_value = stats.chi2.sf(statistic, df=len(expected) - 1)
        assert p_value > 0.001
        for o, e in zip(observed, expected):
            assert abs(o - e) / 100_000 <= 0.01  # within 1 percentage point

    def test_same_seed_reproduces_manifest(self):
        spec = DatasetSpec(total_files=2_000, distribution=DSDA_MAIN,
                           mission_count=5, mission_skew_s=1.0, seed=99)
        a = generate_dataset(spec)
        b = generate_dataset(spec)
        assert a.records == b.records

    def test_mission_assignment_uses_zipf_skew(self):
        spec = DatasetSpec(total_files=50_000, distribution=FileSizeDistribution.fixed(KIB),
                           mission_count=4, mission_skew_s=0.0, seed=3)
        manifest = generate_dataset(spec)
        counts = [0, 0, 0, 0]
        for r in manifest.records:
            counts[r.mission] += 1
        for c in counts:  # uniform when s=0
            assert c / 50_000 == pytest.approx(0.25, abs=0.01)

    def test_summary_mean_is_exact_arithmetic_mean(self):
        manifest = generate_dataset(DatasetSpec(
            total_files=777, distribution=DSDA_MAIN, seed=21,
        ))
        sizes = [r.size_bytes for r in manifest.records]
        assert manifest.summary.mean_bytes == sum(sizes) / len(sizes)
        assert manifest.summary.max_bytes == max(sizes)

    def test_zero_files_rejected(self):
        with pytest.raises(ValueError):
            DatasetSpec(total_files=0, distribution=DSDA_MAIN)


class TestScale:
    def test_top_bucket_expectation_at_1000_files(self):
        spec = scale_distribution(DSDA_MAIN, 1_000)
        expected = expected_bucket_counts(spec.distribution, 1_000)
        assert expected[-1] == pytest.approx(1_000 * 184_138 / DSDA_TOTAL, rel=1e-12)
        assert expected[-1] == pytest.approx(1.92, abs=0.01)

    def test_identity_scale_preserves_proportions(self):
        spec = scale_distribution(DSDA_MAIN, DSDA_TOTAL)
        assert spec.distribution.bucket_probabilities() == DSDA_MAIN.bucket_probabilities()

    def test_probability_ordering_preserved(self):
        small = scale_distribution(DSDA_MAIN, 100).distribution.bucket_probabilities()
        large = DSDA_MAIN.bucket_probabilities()
        order = sorted(range(10), key=large.__getitem__)
        assert order == sorted(range(10), key=small.__getitem__)

    def test_target_below_bucket_count_rejected(self):
        with pytest.raises(ValueError):
            scale_distribution(DSDA_MAIN, 5)


class TestSerialization:
    def test_manifest_round_trip(self, tmp_path):
        spec = DatasetSpec(total_files=250, distribution=DSDA_MAIN,
                           static_fraction=0.8, mission_count=3,
                           mission_skew_s=1.1, seed=17)
        manifest = generate_dataset(spec)
        save_manifest(manifest, tmp_path)
        loaded = load_manifest(tmp_path)
        assert loaded.records == manifest.records
        assert loaded.spec == spec
        assert loaded.summary.bucket_counts == manifest.summary.bucket_counts

    def test_summary_json_is_versioned(self, tmp_path):
        import json

        manifest = generate_dataset(DatasetSpec(
            total_files=5, distribution=FileSizeDistribution.fixed(KIB), seed=1,
        ))
        _, summary_path = save_manifest(manifest, tmp_path)
        payload = json.loads(summary_path.read_text())
        assert payload["format"] == "coldbench-manifest/1"


class TestPayloadMaterialization:
    def test_payload_files_match_sizes_and_reproduce(self, tmp_path):
        from coldbench.datagen import write_payload_files

        manifest = generate_dataset(DatasetSpec(
            total_files=4, distribution=FileSizeDistribution.fixed(3 * KIB), seed=5,
        ))
        written = write_payload_files(manifest, tmp_path / "a")
        assert written == 4 * 3 * KIB
        for r in manifest.records:
            assert (tmp_path / "a" / r.file_id).stat().st_size == r.size_bytes
        write_payload_files(manifest, tmp_path / "b")
        fid = manifest.records[0].file_id
        assert (tmp_path / "a" / fid).read_bytes() == (tmp_path / "b" / fid).read_bytes()
