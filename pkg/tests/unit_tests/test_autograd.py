"""Tests for the tensor, reverse-mode differentiation and optimizer."""

import numpy as np
import pytest

from durspoof.autograd import ops
from durspoof.autograd.checkpoint import MAGIC, load_checkpoint, save_checkpoint
from durspoof.autograd.optim import Adam, AdamState, adam_step
from durspoof.autograd.tensor import ComputationRecord, Tensor, backward, is_grad_enabled, no_grad
from durspoof.errors import (
    ConfigurationError,
    DimensionError,
    GradientContractError,
    InputError,
    NonFiniteError,
)


def leaf(values, dtype=np.float64):
    return Tensor(np.asarray(values, dtype=dtype), requires_grad=True, dtype=dtype)


class TestTensor:
    """Construction rules of Tensor."""

    def test_python_values_default_to_float32(self):
        assert Tensor([1, 2, 3]).dtype == np.float32

    def test_float64_arrays_keep_their_dtype(self):
        assert Tensor(np.zeros(3)).dtype == np.float64

    def test_zero_sized_dimension_rejected(self):
        with pytest.raises(InputError, match="positive"):
            Tensor(np.zeros((0, 3)))

    def test_non_finite_input_rejected(self):
        with pytest.raises(NonFiniteError):
            Tensor([1.0, np.nan])

    def test_item_needs_one_element(self):
        assert Tensor([2.5]).item() == 2.5
        with pytest.raises(InputError):
            Tensor([1.0, 2.0]).item()

    def test_constructor_copies(self):
        data = np.ones(3)
        t = Tensor(data)
        data[0] = 5.0
        assert t.data[0] == 1.0

    def test_numpy_on_the_left(self):
        x = leaf([1.0, 2.0])
        y = np.array([3.0, 3.0]) - x
        assert isinstance(y, Tensor)
        np.testing.assert_allclose(y.data, [2.0, 1.0])
        z = np.array([4.0, 4.0]) / x
        np.testing.assert_allclose(z.data, [4.0, 2.0])


class TestBackward:
    """Backward pass contract."""

    def test_square_sum(self):
        x = leaf([1.0, -2.0, 3.0])
        backward(ops.sum(x * x))
        np.testing.assert_allclose(x.grad, [2.0, -4.0, 6.0])

    def test_fan_out_accumulates(self):
        x = leaf([1.0, 2.0])
        y = x * 2.0
        backward(ops.sum(y + y))
        np.testing.assert_allclose(x.grad, [4.0, 4.0])

    def test_broadcast_gradients_are_reduced(self):
        a = leaf(np.ones((3, 1)))
        b = leaf(np.ones((1, 4)))
        backward(ops.sum(a + b))
        np.testing.assert_allclose(a.grad, np.full((3, 1), 4.0))
        np.testing.assert_allclose(b.grad, np.full((1, 4), 3.0))

    def test_returns_touched_leaves(self):
        a = leaf([1.0])
        b = leaf([2.0])
        constant = Tensor(np.array([3.0]))
        touched = backward(ops.sum(a * b * constant))
        assert {id(t) for t in touched} == {id(a), id(b)}
        assert constant.grad is None

    def test_second_backward_rejected(self):
        x = leaf([1.0, 2.0])
        loss = ops.sum(x * x)
        backward(loss)
        with pytest.raises(GradientContractError, match="already ran"):
            backward(loss)

    def test_non_scalar_rejected(self):
        x = leaf([1.0, 2.0])
        with pytest.raises(GradientContractError, match="scalar"):
            backward(x * 2.0)

    def test_unrecorded_tensor_rejected(self):
        with pytest.raises(GradientContractError):
            backward(Tensor([1.0]))

    def test_replay_is_reverse_execution_order(self):
        x = leaf([0.5, 1.5])
        loss = ops.sum(ops.exp(ops.neg(x)))
        record = ComputationRecord.from_root(loss)
        assert [node.op for node in record.nodes] == ["neg", "exp", "sum"]
        assert [node.op for node in record.replay_order()] == ["sum", "exp", "neg"]
        seqs = [node.seq for node in record.nodes]
        assert seqs == sorted(seqs)

    def test_gradients_accumulate_until_zeroed(self):
        x = leaf([1.0])
        backward(ops.sum(x * 3.0))
        backward(ops.sum(x * 3.0))
        np.testing.assert_allclose(x.grad, [6.0])
        x.zero_grad()
        assert x.grad is None


class TestNoGrad:
    def test_disables_recording(self):
        x = leaf([1.0, 2.0])
        with no_grad():
            y = ops.sum(x * x)
            assert not is_grad_enabled()
        assert is_grad_enabled()
        assert not y.requires_grad
        with pytest.raises(GradientContractError):
            backward(y)

    def test_nesting_restores_state(self):
        with no_grad():
            with no_grad():
                pass
            assert not is_grad_enabled()
        assert is_grad_enabled()


class TestOpErrors:
    """Ops fail loudly on bad shapes and non-finite results."""

    def test_overflow_names_the_op(self):
        with pytest.raises(NonFiniteError, match="exp"):
            ops.exp(Tensor(np.array([1000.0])))

    def test_log_of_non_positive(self):
        with pytest.raises(InputError):
            ops.log(Tensor(np.array([0.0, 1.0])))

    def test_division_by_zero(self):
        with pytest.raises(InputError):
            ops.div(Tensor(np.ones(2)), Tensor(np.array([1.0, 0.0])))

    def test_matmul_shape_mismatch(self):
        with pytest.raises(DimensionError, match="matmul"):
            ops.matmul(Tensor(np.ones((2, 3))), Tensor(np.ones((2, 3))))

    def test_add_not_broadcastable(self):
        with pytest.raises(DimensionError):
            ops.add(Tensor(np.ones((2, 3))), Tensor(np.ones((4,))))

    def test_split_needs_divisible_axis(self):
        with pytest.raises(DimensionError):
            ops.split(Tensor(np.ones((1, 5, 2, 2))), 2, axis=1)

    def test_conv_channel_mismatch(self):
        with pytest.raises(DimensionError):
            ops.conv2d(Tensor(np.ones((1, 2, 4, 4))), Tensor(np.ones((3, 1, 3, 3))))


class TestOpValues:
    """Forward values of the less obvious primitives."""

    def test_selu_constants(self):
        out = ops.selu(Tensor(np.array([1.0, -1.0]))).data
        assert out[0] == pytest.approx(1.0507009873554805)
        assert out[1] == pytest.approx(1.0507009873554805 * 1.6732632423543772 * (np.exp(-1.0) - 1.0))

    def test_conv2d_matches_direct_sum(self):
        rng = np.random.default_rng(0)
        x = rng.standard_normal((1, 2, 4, 5))
        k = rng.standard_normal((3, 2, 3, 3))
        out = ops.conv2d(Tensor(x), Tensor(k), padding=1).data
        padded = np.pad(x, ((0, 0), (0, 0), (1, 1), (1, 1)))
        expected = np.zeros((1, 3, 4, 5))
        for o in range(3):
            for i in range(4):
                for j in range(5):
                    expected[0, o, i, j] = np.sum(padded[0, :, i : i + 3, j : j + 3] * k[o])
        np.testing.assert_allclose(out, expected, atol=1e-12)

    def test_max_pool_frequency_only(self):
        x = np.arange(16, dtype=np.float64).reshape(1, 1, 2, 8)
        out = ops.max_pool2d(Tensor(x), (1, 2)).data
        np.testing.assert_array_equal(out, x[..., 1::2])

    def test_batch_norm_updates_running_stats(self):
        stats = ops.RunningStats.initial(1, np.float64)
        x = Tensor(np.array([1.0, 3.0]).reshape(2, 1))
        out = ops.batch_norm(x, Tensor(np.ones(1)), Tensor(np.zeros(1)), stats, mode="train")
        np.testing.assert_allclose(out.data.ravel(), [-1.0, 1.0], atol=1e-5)
        assert stats.mean[0] == pytest.approx(0.1 * 2.0)
        assert stats.var[0] == pytest.approx(0.9 + 0.1 * 2.0)

    def test_linear_weight_layout(self):
        x = np.array([[1.0, 2.0, 3.0]])
        weight = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 1.0]])
        out = ops.linear(Tensor(x), Tensor(weight), Tensor(np.array([0.5, -1.0]))).data
        np.testing.assert_array_equal(out, [[1.5, 4.0]])
        with pytest.raises(DimensionError):
            ops.linear(Tensor(x), Tensor(weight.T))
        with pytest.raises(DimensionError, match="bias length"):
            ops.linear(Tensor(x), Tensor(weight), Tensor(np.zeros(3)))

    def test_l2_normalize_unit_norm(self):
        rng = np.random.default_rng(1)
        out = ops.l2_normalize(Tensor(rng.standard_normal((4, 6))), axis=1).data
        np.testing.assert_allclose(np.linalg.norm(out, axis=1), 1.0, atol=1e-12)

    def test_l2_normalize_zero_row_stays_zero(self):
        out = ops.l2_normalize(Tensor(np.zeros((1, 3))), axis=1).data
        np.testing.assert_array_equal(out, 0.0)


class TestAdam:
    def test_first_step_moves_by_learning_rate(self):
        params = {"w": np.array([1.0, -2.0, 0.5])}
        grads = {"w": np.array([0.3, -4.0, 1e-3])}
        new, state = adam_step(params, grads, AdamState(), lr=0.01, eps=0.0)
        np.testing.assert_allclose(new["w"], params["w"] - 0.01 * np.sign(grads["w"]), atol=1e-12)
        assert state.step == 1

    def test_inputs_not_mutated(self):
        params = {"w": np.ones(2)}
        grads = {"w": np.ones(2)}
        state = AdamState()
        adam_step(params, grads, state, lr=0.1)
        np.testing.assert_array_equal(params["w"], np.ones(2))
        assert state.step == 0 and not state.m

    def test_bias_corrected_second_step(self):
        lr, b1, b2, eps = 0.1, 0.9, 0.999, 1e-8
        p = {"w": np.array([0.0])}
        p, s = adam_step(p, {"w": np.array([1.0])}, AdamState(), lr, (b1, b2), eps)
        p, s = adam_step(p, {"w": np.array([2.0])}, s, lr, (b1, b2), eps)
        m = b1 * (1 - b1) * 1.0 + (1 - b1) * 2.0
        v = b2 * (1 - b2) * 1.0 + (1 - b2) * 4.0
        second = lr * (m / (1 - b1**2)) / (np.sqrt(v / (1 - b2**2)) + eps)
        first = lr * 1.0 / (1.0 + eps)
        np.testing.assert_allclose(p["w"], [-(first + second)], rtol=1e-12)

    def test_invalid_learning_rate(self):
        with pytest.raises(ConfigurationError):
            adam_step({"w": np.ones(1)}, {"w": np.ones(1)}, AdamState(), lr=0.0)

    def test_gradient_shape_mismatch(self):
        with pytest.raises(DimensionError):
            adam_step({"w": np.ones(2)}, {"w": np.ones(3)}, AdamState(), lr=0.1)

    def test_optimizer_updates_in_place_and_serializes(self):
        w = leaf([1.0, 1.0])
        unused = leaf([5.0])
        opt = Adam({"w": w, "unused": unused}, lr=0.5)
        backward(ops.sum(w * w))
        opt.step()
        np.testing.assert_allclose(w.data, [0.5, 0.5], atol=1e-6)
        np.testing.assert_array_equal(unused.data, [5.0])

        flat = opt.state_dict()
        assert flat["adam.step"].tolist() == [1]
        restored = Adam({"w": w, "unused": unused}, lr=0.5)
        restored.load_state_dict(flat)
        assert restored.state.step == 1
        np.testing.assert_array_equal(restored.state.m["w"], opt.state.m["w"])

        opt.zero_grad()
        assert w.grad is None


class TestCheckpoint:
    def test_round_trip(self, tmp_path):
        arrays = {
            "a": np.arange(6, dtype=np.float32).reshape(2, 3),
            "b": np.array([1.5, -2.5]),
            "step": np.array([7], dtype=np.int64),
        }
        path = save_checkpoint(tmp_path / "ckpt.dspk", arrays, {"epoch": 3, "note": "x"})
        loaded, metadata = load_checkpoint(path)
        assert list(loaded) == ["a", "b", "step"]
        for name, value in arrays.items():
            np.testing.assert_array_equal(loaded[name], value)
            assert loaded[name].dtype == value.dtype
        assert metadata == {"epoch": 3, "note": "x"}

    def test_bytes_are_deterministic(self, tmp_path):
        arrays = {"w": np.linspace(0, 1, 10)}
        first = save_checkpoint(tmp_path / "one.dspk", arrays, {"b": 1, "a": 2}).read_bytes()
        second = save_checkpoint(tmp_path / "two.dspk", arrays, {"a": 2, "b": 1}).read_bytes()
        assert first == second
        assert first[:4] == MAGIC

    def test_rejects_foreign_file(self, tmp_path):
        path = tmp_path / "junk.bin"
        path.write_bytes(b"NOPE" + bytes(20))
        with pytest.raises(InputError, match="not a checkpoint"):
            load_checkpoint(path)

    def test_rejects_truncated_file(self, tmp_path):
        path = save_checkpoint(tmp_path / "ckpt.dspk", {"w": np.ones(100)})
        path.write_bytes(path.read_bytes()[:-8])
        with pytest.raises(InputError, match="truncated"):
            load_checkpoint(path)
