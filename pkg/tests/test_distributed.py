import math
from fractions import Fraction

import numpy as np
import pytest

from edgesim.channel import TxSnr, draw_block
from edgesim.dataset import Dataset, SplitSpec, synth_blobs
from edgesim.distributed import (
    AllocationPlan,
    DegenerateAllocationError,
    ModelCopies,
    aggregate_equal,
    aggregate_importance,
    allocate_blocks,
    local_train,
    plan_for,
    run_distributed,
    transmit_model,
    write_run_csv,
)
from edgesim.learner import LinearModel, TrainConfig, evaluate, predict_batch
from edgesim.rng import stream


class TestAllocateBlocks:
    def test_symmetric(self):
        assert allocate_blocks((30000, 30000), 200).counts == (100, 100)

    def test_floor_formula(self):
        assert allocate_blocks((1, 2), 200).counts == (66, 133)

    def test_matches_exact_rational_oracle(self):
        rng = stream(31, "data")
        for _ in range(10_000):
            k = int(rng.integers(1, 9))
            sizes = rng.integers(0, 5000, k)
            if sizes.sum() == 0:
                sizes[0] = 1
            n = int(rng.integers(1, 3000))
            plan = allocate_blocks(sizes, n)
            expected = tuple(
                math.floor(Fraction(int(s) * n, int(sizes.sum()))) for s in sizes
            )
            assert plan.counts == expected
            assert sum(plan.counts) <= n

    def test_zero_total_rejected(self):
        with pytest.raises(ValueError):
            allocate_blocks((0, 0), 10)

    def test_negative_size_rejected(self):
        with pytest.raises(ValueError):
            allocate_blocks((-1, 5), 10)

    def test_budget_validated(self):
        with pytest.raises(ValueError):
            allocate_blocks((1, 2), 0)


class TestLocalTrain:
    def test_fits_separable_blobs(self, small_blobs):
        train, _ = small_blobs
        model = local_train(train, TrainConfig(lam=1e-3, epochs=30), stream(1, "train"))
        assert evaluate(model, train.features, train.labels) == 1.0

    def test_deterministic(self, small_blobs):
        train, _ = small_blobs
        a = local_train(train, TrainConfig(), stream(2, "train"))
        b = local_train(train, TrainConfig(), stream(2, "train"))
        assert np.array_equal(a.weights, b.weights)

    def test_single_class_dataset(self):
        rng = stream(3, "data")
        feats = rng.standard_normal((30, 8)) + 2.0
        ds = Dataset(feats, np.full(30, 2, dtype=np.int64), 5)
        model = local_train(ds, TrainConfig(epochs=10), stream(3, "train"))
        assert np.all(predict_batch(model, ds.features) == 2)

    def test_empty_dataset_gives_zero_model(self):
        ds = Dataset(np.empty((0, 6)), np.empty(0, dtype=np.int64), 4)
        model = local_train(ds, TrainConfig(), stream(4, "train"))
        assert np.array_equal(model.weights, np.zeros((4, 7)))


class TestTransmitModel:
    def make_model(self, seed=5):
        return LinearModel(stream(seed, "data").standard_normal((3, 9)))

    def test_zero_copies(self):
        copies = transmit_model(self.make_model(), 0, TxSnr(100.0),
                                stream(1, "fading"), stream(1, "noise"))
        assert copies == []

    def test_vanishing_noise(self):
        model = self.make_model()
        copies = transmit_model(model, 8, TxSnr(1e14), stream(2, "fading"),
                                stream(2, "noise"))
        assert len(copies) == 8
        for c in copies:
            assert np.max(np.abs(c - model.weights.ravel())) < 1e-5

    def test_zero_model_transmits_exact_zeros(self):
        model = LinearModel.zeros(3, 8)
        copies = transmit_model(model, 3, TxSnr(1.0), stream(3, "fading"),
                                stream(3, "noise"))
        for c in copies:
            assert np.array_equal(c, np.zeros(27))

    def test_copy_error_variance_matches_gain_oracle(self):
        # given the fading gains, the mean-copy error variance is exactly
        # scale^2 * sum(1/snr_n) / N_k^2; replay the gains and compare
        model = LinearModel(stream(7, "data").standard_normal((10, 785)))
        tx = TxSnr.from_db(20.0)
        flat = model.weights.ravel()
        scale2 = float(np.mean(flat ** 2))
        variances = {}
        for n_copies, seed in ((10, 8), (100, 8)):
            copies = transmit_model(model, n_copies, tx, stream(seed, "fading"),
                                    stream(seed, "noise"))
            err = np.mean(copies, axis=0) - flat
            gains_rng = stream(seed, "fading")
            snrs = [draw_block(gains_rng, tx).received_snr for _ in range(n_copies)]
            oracle_var = scale2 * sum(1.0 / s for s in snrs) / n_copies ** 2
            variances[n_copies] = (float(np.var(err)), oracle_var)
        for n_copies, (measured, oracle) in variances.items():
            assert measured == pytest.approx(oracle, rel=0.10)
        # a tenfold copy count shrinks the oracle variance accordingly
        assert variances[100][1] < variances[10][1]

    def test_negative_count_rejected(self):
        with pytest.raises(ValueError):
            transmit_model(self.make_model(), -1, TxSnr(1.0),
                           stream(0, "fading"), stream(0, "noise"))


class TestAggregateEqual:
    def test_idempotent_on_identical_models(self):
        m = LinearModel(stream(9, "data").standard_normal((4, 6)))
        out = aggregate_equal([m, LinearModel(m.weights.copy()), m])
        assert np.allclose(out.weights, m.weights, atol=1e-15)

    def test_opposite_models_cancel(self):
        w = stream(10, "data").standard_normal((2, 5))
        out = aggregate_equal([LinearModel(w), LinearModel(-w)])
        assert np.array_equal(out.weights, np.zeros((2, 5)))

    def test_matches_recompute_oracle(self):
        rng = stream(11, "data")
        for _ in range(50):
            models = [LinearModel(rng.standard_normal((3, 7))) for _ in range(4)]
            out = aggregate_equal(models)
            expected = sum(m.weights for m in models) / 4.0
            assert np.max(np.abs(out.weights - expected)) < 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            aggregate_equal([LinearModel.zeros(2, 3), LinearModel.zeros(2, 4)])

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            aggregate_equal([])


def exact_copies(models, counts):
    per_device = [[m.weights.ravel().copy() for _ in range(c)]
                  for m, c in zip(models, counts)]
    return ModelCopies(per_device, models[0].weights.shape)


class TestAggregateImportance:
    def test_noiseless_weighted_sum(self):
        w1 = LinearModel(stream(12, "data").standard_normal((2, 4)))
        w2 = LinearModel(stream(13, "data").standard_normal((2, 4)))
        out = aggregate_importance(exact_copies([w1, w2], (1, 2)), 3)
        expected = (w1.weights + 2 * w2.weights) / 3.0
        assert np.max(np.abs(out.weights - expected)) < 1e-12

    def test_underspent_budget_scales_down(self):
        w = LinearModel(stream(14, "data").standard_normal((2, 4)))
        out = aggregate_importance(exact_copies([w], (7,)), 10)
        assert np.max(np.abs(out.weights - 0.7 * w.weights)) < 1e-12

    def test_matches_double_sum_oracle(self):
        rng = stream(15, "data")
        for _ in range(50):
            shape = (3, 5)
            per_device = [
                [rng.standard_normal(15) for _ in range(int(rng.integers(0, 4)))]
                for _ in range(3)
            ]
            if all(len(d) == 0 for d in per_device):
                per_device[0].append(rng.standard_normal(15))
            n = int(rng.integers(max(1, sum(map(len, per_device))), 20))
            out = aggregate_importance(ModelCopies(per_device, shape), n)
            total = np.zeros(shape)
            for dev in per_device:
                for c in dev:
                    total = total + c.reshape(shape)
            assert np.max(np.abs(out.weights - total / n)) < 1e-12

    def test_linearity_over_concatenated_copy_sets(self):
        rng = stream(16, "data")
        shape = (2, 6)
        a = [[rng.standard_normal(12) for _ in range(2)] for _ in range(2)]
        b = [[rng.standard_normal(12) for _ in range(3)] for _ in range(2)]
        merged = ModelCopies([a[0] + b[0], a[1] + b[1]], shape)
        n = 20
        whole = aggregate_importance(merged, n).weights
        parts = (aggregate_importance(ModelCopies(a, shape), n).weights
                 + aggregate_importance(ModelCopies(b, shape), n).weights)
        assert np.max(np.abs(whole - parts)) < 1e-12

    def test_all_zero_counts_rejected(self):
        with pytest.raises(DegenerateAllocationError):
            aggregate_importance(ModelCopies([[], []], (2, 3)), 5)


class TestPositiveScalingInvariance:
    def test_predictions_unchanged(self):
        rng = stream(17, "data")
        model = LinearModel(rng.standard_normal((4, 9)))
        feats = rng.standard_normal((60, 8))
        base = predict_batch(model, feats)
        for c in (0.1, 0.5, 7.0, 1234.5):
            scaled = LinearModel(c * model.weights)
            assert np.array_equal(predict_batch(scaled, feats), base)


class TestNoiseAveraging:
    def test_aggregate_converges_to_weighted_mean(self):
        # with fixed locals, growing N shrinks the deviation from the
        # noiseless weighted combination
        rng = stream(18, "data")
        models = [LinearModel(rng.standard_normal((3, 11))) for _ in range(2)]
        sizes = (300, 100)
        tx = TxSnr.from_db(20.0)
        devs = {}
        for n, seed in ((40, 19), (400, 19)):
            plan = allocate_blocks(sizes, n)
            per_device = [
                transmit_model(m, c, tx, stream(seed, "fading"), stream(seed, "noise"))
                for m, c in zip(models, plan.counts)
            ]
            agg = aggregate_importance(ModelCopies(per_device, (3, 11)), n)
            clean = aggregate_importance(exact_copies(models, plan.counts), n)
            devs[n] = float(np.sqrt(np.mean((agg.weights - clean.weights) ** 2)))
        assert devs[400] < devs[40]


class TestPlanFor:
    def test_equal_allocation_floor(self):
        plan = plan_for("equal_allocation", (10, 20, 30), 100)
        assert plan.counts == (33, 33, 33)

    def test_equal_allocation_needs_enough_blocks(self):
        with pytest.raises(ValueError):
            plan_for("equal_allocation", (1, 1, 1), 2)

    def test_largest_only_ties_to_lowest_index(self):
        plan = plan_for("largest_only", (5, 5, 3), 50)
        assert plan.counts == (50, 0, 0)

    def test_unknown_scheme(self):
        with pytest.raises(ValueError):
            plan_for("bogus", (1, 2), 10)


def blobs_pair(seed, n_per_class=40, dim=16, classes=4):
    rng = stream(seed, "data")
    train = synth_blobs(classes, dim, n_per_class, 8.0, rng)
    test = synth_blobs(classes, dim, n_per_class // 2, 8.0, rng)
    return train, test


class TestRunDistributed:
    def test_equal_ratio_matches_equal_allocation_bitwise(self):
        train, test = blobs_pair(20)
        args = dict(dataset=train, testset=test, split_spec=SplitSpec.size_ratio(1.0),
                    n_blocks=60, tx_snr=TxSnr.from_db(20.0), cfg=TrainConfig(epochs=5),
                    seed=21)
        a = run_distributed(scheme="proposed", **args)
        b = run_distributed(scheme="equal_allocation", **args)
        assert a.plan.counts == b.plan.counts
        assert a.accuracy == b.accuracy
        assert a.global_model.weights.tobytes() == b.global_model.weights.tobytes()

    def test_one_device_holding_all_data_matches_largest_only(self):
        train, test = blobs_pair(22)
        args = dict(dataset=train, testset=test,
                    split_spec=SplitSpec.size_ratio(1e9), n_blocks=40,
                    tx_snr=TxSnr.from_db(20.0), cfg=TrainConfig(epochs=5), seed=23)
        a = run_distributed(scheme="proposed", **args)
        b = run_distributed(scheme="largest_only", **args)
        assert a.plan.counts == b.plan.counts == (40, 0)
        assert a.degenerate_devices == (1,)
        assert a.accuracy == b.accuracy

    def test_noiseless_single_device_equals_local_accuracy(self):
        train, test = blobs_pair(24)
        res = run_distributed(train, test, SplitSpec.random(1), 10, TxSnr(1e14),
                              "proposed", TrainConfig(epochs=5), seed=25)
        local_acc = evaluate(res.local_models[0], test.features, test.labels)
        assert res.accuracy == local_acc

    def test_deterministic(self):
        train, test = blobs_pair(26)
        args = (train, test, SplitSpec.random(3), 50, TxSnr.from_db(20.0),
                "proposed", TrainConfig(epochs=3))
        a = run_distributed(*args, seed=27)
        b = run_distributed(*args, seed=27)
        assert a.accuracy == b.accuracy
        assert a.global_model.weights.tobytes() == b.global_model.weights.tobytes()

    def test_unknown_scheme_rejected(self):
        train, test = blobs_pair(28)
        with pytest.raises(ValueError):
            run_distributed(train, test, SplitSpec.random(2), 10, TxSnr(1.0),
                            "bogus", TrainConfig(), seed=0)

    def test_run_csv_format(self, tmp_path):
        import csv

        train, test = blobs_pair(29)
        results = [
            run_distributed(train, test, SplitSpec.size_ratio(2.0), 30,
                            TxSnr.from_db(20.0), scheme, TrainConfig(epochs=3), seed=30)
            for scheme in ("proposed", "largest_only")
        ]
        path = str(tmp_path / "runs.csv")
        write_run_csv(results, path)
        with open(path) as f:
            reader = csv.DictReader(f)
            rows = list(reader)
        assert reader.fieldnames == ["scheme", "K", "ratio", "N", "tx_snr_db",
                                     "seed", "accuracy"]
        assert [r["scheme"] for r in rows] == ["proposed", "largest_only"]
        assert all(r["K"] == "2" and r["N"] == "30" for r in rows)
        assert float(rows[0]["accuracy"]) == results[0].accuracy

    def test_plan_csv(self, tmp_path):
        plan = AllocationPlan((3, 1), (30, 10), 4)
        path = str(tmp_path / "plan.csv")
        plan.write_csv(path)
        with open(path) as f:
            assert f.read() == "k,D_k,N_k\n0,30,3\n1,10,1\n"
