"""Run execution, aggregation, sweeps, and CSV persistence."""

import math

import numpy as np
import pytest

from welfarist_bandits.harness import (
    CSV_HEADER,
    ExperimentConfig,
    RegretRow,
    RegretTable,
    RunTrajectory,
    TableFormatError,
    estimate_round_means,
    read_table,
    run_batch,
    run_single,
    run_stream,
    sweep,
    write_table,
)
from welfarist_bandits.policies import PolicyKind
from welfarist_bandits.rewards import InstanceSpec, make_instance
from welfarist_bandits.rng import RngStream

WF = PolicyKind(variant="welfarist_ucb")
ALL_POLICIES = tuple(PolicyKind(variant=v) for v in ("welfarist_ucb", "ucb", "ncb", "explore_then_ucb"))


def _gaussian_instance(k=5, seed=3, low=10.0, high=100.0, std=20.0):
    return make_instance("gaussian", k, low, high, std=std, rng=RngStream(seed))


def _bernoulli_instance(k=5, seed=3):
    return make_instance("bernoulli", k, 0.05, 0.95, rng=RngStream(seed))


class TestRunSingle:
    def test_single_arm_plays_it_forever(self):
        inst = make_instance("bernoulli", 1, 0.7, 0.7, rng=RngStream(1))
        traj = run_single(WF, inst, 10, 0.0, RngStream(2))
        assert np.all(traj.chosen == 0)
        assert np.all(traj.true_means == 0.7)

    def test_counts_conservation(self):
        inst = _bernoulli_instance()
        for policy in ALL_POLICIES:
            traj = run_single(policy, inst, 300, 0.0, RngStream(4))
            assert int(traj.final_counts.sum()) == 300
            assert np.array_equal(
                np.bincount(traj.chosen, minlength=inst.k), traj.final_counts
            )

    def test_deterministic_given_stream(self):
        inst = _gaussian_instance()
        a = run_single(WF, inst, 500, -0.5, RngStream(8), audit=True)
        b = run_single(WF, inst, 500, -0.5, RngStream(8), audit=True)
        assert np.array_equal(a.chosen, b.chosen)
        assert np.array_equal(a.snap_means, b.snap_means)
        assert a.tau == b.tau

    def test_phase_tags_consistent_with_tau(self):
        inst = _gaussian_instance()
        traj = run_single(WF, inst, 2000, 0.0, RngStream(5))
        if traj.tau is None:
            assert not traj.index_phase.any()
        else:
            assert not traj.index_phase[: traj.tau].any()
            assert traj.index_phase[traj.tau:].all()

    def test_horizon_below_k_rejected(self):
        inst = _gaussian_instance(k=5)
        with pytest.raises(ValueError):
            run_single(WF, inst, 3, 0.0, RngStream(1))


class TestRunBatch:
    @pytest.mark.parametrize("kind", ["gaussian", "bernoulli"])
    @pytest.mark.parametrize("variant", ["welfarist_ucb", "ucb", "ncb", "explore_then_ucb"])
    def test_batch_matches_single_bitwise(self, kind, variant):
        if kind == "gaussian":
            inst = _gaussian_instance(k=4)
        else:
            inst = _bernoulli_instance(k=4)
        policy = PolicyKind(variant=variant)
        p = -1.5
        streams = [run_stream(77, policy, p, 400, r) for r in range(5)]
        batch = run_batch(policy, inst, 400, p, streams, audit=True)
        for stream, got in zip(streams, batch):
            ref = run_single(policy, inst, 400, p, stream, audit=True)
            assert np.array_equal(ref.chosen, got.chosen)
            assert np.array_equal(ref.true_means, got.true_means)
            assert np.array_equal(ref.index_phase, got.index_phase)
            assert np.array_equal(ref.final_counts, got.final_counts)
            assert np.array_equal(ref.snap_counts, got.snap_counts)
            assert np.array_equal(ref.snap_means, got.snap_means)
            assert ref.tau == got.tau

    def test_mixed_arm_kinds_supported(self):
        from welfarist_bandits.rewards import BanditInstance, RewardDistribution

        inst = BanditInstance.from_arms(
            [RewardDistribution.bernoulli(0.9), RewardDistribution.gaussian(0.5, 1.0)]
        )
        policy = PolicyKind(variant="ucb")
        streams = [run_stream(5, policy, 0.0, 100, r) for r in range(3)]
        batch = run_batch(policy, inst, 100, 0.0, streams)
        for stream, got in zip(streams, batch):
            ref = run_single(policy, inst, 100, 0.0, stream)
            assert np.array_equal(ref.chosen, got.chosen)


class TestEstimateRoundMeans:
    def _traj(self, true_means):
        tm = np.asarray(true_means, dtype=np.float64)
        return RunTrajectory(
            chosen=np.zeros(tm.size, dtype=np.int32),
            true_means=tm,
            index_phase=np.ones(tm.size, dtype=bool),
            tau=0,
            final_counts=np.array([tm.size]),
        )

    def test_single_run_identity(self):
        traj = self._traj([0.3, 0.7, 0.1])
        assert np.array_equal(estimate_round_means([traj]), traj.true_means)

    def test_two_run_average(self):
        est = estimate_round_means([self._traj([1.0, 0.0]), self._traj([0.0, 1.0])])
        assert np.array_equal(est, [0.5, 0.5])

    def test_uniform_choices_concentrate(self):
        # 50 i.i.d. {0,1} picks per round: mean within 0.2 of 0.5 has
        # failure probability < 0.01 per round (Hoeffding), and this seed
        # is frozen anyway.
        gen = np.random.default_rng(13)
        trajs = [self._traj(gen.integers(0, 2, size=40).astype(float)) for _ in range(50)]
        est = estimate_round_means(trajs)
        assert np.all(np.abs(est - 0.5) <= 0.2)

    def test_mismatched_horizons_rejected(self):
        with pytest.raises(ValueError):
            estimate_round_means([self._traj([1.0]), self._traj([1.0, 2.0])])

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            estimate_round_means([])


def _tiny_config(**over):
    base = dict(
        instance_spec=InstanceSpec(kind="gaussian", k=3, mean_low=10.0, mean_high=100.0,
                                   std=20.0, seed=5),
        policy_specs=(WF, PolicyKind(variant="ucb")),
        p_values=(0.0, -1.5),
        horizon_grid=(100, 200),
        runs=6,
        base_seed=99,
    )
    base.update(over)
    return ExperimentConfig(**base)


class TestSweep:
    def test_single_arm_sweep_has_zero_regret(self):
        config = _tiny_config(
            instance_spec=InstanceSpec(kind="bernoulli", k=1, mean_low=0.7, mean_high=0.7, seed=1),
            policy_specs=(WF,),
            p_values=(0.0,),
            horizon_grid=(100,),
            runs=1,
        )
        table = sweep(config)
        assert len(table.rows) == 1
        assert table.rows[0].regret == pytest.approx(0.0, abs=1e-12)

    def test_row_per_cell_in_config_order(self):
        table = sweep(_tiny_config())
        assert len(table.rows) == 8
        keys = [(r.policy, r.p, r.horizon) for r in table.rows]
        assert keys == sorted(keys, key=lambda key: (
            [p.display_name() for p in _tiny_config().policy_specs].index(key[0]),
            [0.0, -1.5].index(key[1]),
            key[2],
        ))

    def test_sweep_is_reproducible(self):
        a = sweep(_tiny_config())
        b = sweep(_tiny_config())
        assert a == b

    def test_parallel_equals_serial(self):
        serial = sweep(_tiny_config(), workers=1)
        parallel = sweep(_tiny_config(), workers=4)
        assert serial == parallel

    def test_regret_sanity_bounds(self):
        instance = _tiny_config().instance_spec.build()
        for row in sweep(_tiny_config()).rows:
            assert row.regret <= instance.mu_star + 3.0 * row.std_error
            assert row.regret >= -3.0 * row.std_error  # p <= 1

    def test_tau_mean_reported_for_two_phase_policy(self):
        # Horizon long enough for the stopping rule to fire on this instance
        # (the theoretical floor 32 k S is ~150 rounds here).
        table = sweep(_tiny_config(policy_specs=(WF,), p_values=(0.0,), horizon_grid=(2000,)))
        row = table.rows[0]
        assert math.isfinite(row.tau_mean) and row.tau_mean >= 3.0

    def test_jackknife_error_is_nonnegative_and_reasonable(self):
        table = sweep(_tiny_config(runs=10))
        for row in table.rows:
            assert row.std_error >= 0.0
            assert row.std_error < 100.0  # instance scale


class TestConfigValidation:
    def test_json_round_trip(self):
        config = _tiny_config()
        assert ExperimentConfig.from_json(config.to_json()) == config

    def test_horizon_grid_must_ascend(self):
        with pytest.raises(ValueError):
            _tiny_config(horizon_grid=(200, 100))

    def test_horizon_must_cover_arms(self):
        with pytest.raises(ValueError):
            _tiny_config(horizon_grid=(2, 100))

    def test_runs_must_be_positive(self):
        with pytest.raises(ValueError):
            _tiny_config(runs=0)

    def test_unknown_fields_rejected(self):
        doc = _tiny_config().to_json()
        doc["horizons"] = [1, 2]
        with pytest.raises(ValueError):
            ExperimentConfig.from_json(doc)


class TestTableIO:
    def _table(self):
        return RegretTable(rows=(
            RegretRow("a", 0.0, 100, 0.123456789, 50, 0.01, 42.0, 0),
            RegretRow("b", -1.5, 200, 1.5e-9, 50, 0.0, math.nan, 3),
        ))

    def test_round_trip_equality(self, tmp_path):
        path = tmp_path / "out.csv"
        write_table(self._table(), path)
        got = read_table(path)
        a, b = got.rows
        assert a == self._table().rows[0]
        assert b.policy == "b" and b.horizon == 200 and math.isnan(b.tau_mean)
        assert b.regret == 1.5e-9

    def test_empty_table_is_header_only(self, tmp_path):
        path = tmp_path / "empty.csv"
        write_table(RegretTable(rows=()), path)
        assert path.read_text() == ",".join(CSV_HEADER) + "\n"
        assert read_table(path).rows == ()

    def test_floats_survive_at_full_precision(self, tmp_path):
        path = tmp_path / "p.csv"
        write_table(self._table(), path)
        assert read_table(path).rows[0].regret == 0.123456789

    def test_malformed_row_reports_line(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text(",".join(CSV_HEADER) + "\nucb,0.0,100,oops,5,0.0,1.0,0\n")
        with pytest.raises(TableFormatError, match="line 2"):
            read_table(path)

    def test_bad_header_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("policy,p\n")
        with pytest.raises(TableFormatError, match="line 1"):
            read_table(path)

    def test_write_is_atomic_no_temp_left_behind(self, tmp_path):
        path = tmp_path / "out.csv"
        write_table(self._table(), path)
        write_table(self._table(), path)  # overwrite in place
        assert [p.name for p in tmp_path.iterdir()] == ["out.csv"]


class TestSeedDerivation:
    def test_distinct_cells_get_distinct_streams(self):
        seen = set()
        for p in (0.0, -1.5):
            for h in (100, 200):
                for r in range(3):
                    seen.add(run_stream(1, WF, p, h, r))
        assert len(seen) == 12

    def test_policy_identity_enters_the_mix(self):
        a = run_stream(1, WF, 0.0, 100, 0)
        b = run_stream(1, PolicyKind(variant="ucb"), 0.0, 100, 0)
        assert a != b
