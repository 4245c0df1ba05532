import numpy as np
import pytest

from deepexplain.attribution import GridSpec
from deepexplain.deep import (
    ContributionMatrix,
    ThresholdSpec,
    deep_explain,
    domains_from_data,
    explain_dataset,
    layer_attribute,
    to_share_matrix,
)
from deepexplain.errors import ChainingLimitExceeded, InfeasibleTarget, OutOfDomain
from deepexplain.links import LinkFunction
from deepexplain.model import Layer, MlpModel, collapse_linear, forward, random_model
from deepexplain.rootfind import InputDomain, RootTarget
from oracles import regime_collapse

# tanh(1) - tanh(-1) and tanh(-1), mpmath at 30 digits
TANH_SPAN_1 = 1.52318831191152977623891656521
TANH_M1 = -0.761594155955764888119458282605


def setup(sizes, links, seed, n_ref=200):
    rng = np.random.default_rng(seed)
    model = random_model(sizes, links, rng)
    X = rng.normal(size=(n_ref, sizes[0]))
    return model, X, domains_from_data(model, X)


class TestLayerAttribute:
    def test_linear_row(self):
        layer = Layer([[1.0, 2.0]], [0.0], "linear")
        m = layer_attribute(layer, [3.0, 4.0], InputDomain.box(0, 5, 2))
        np.testing.assert_array_equal(m.entries, [[3.0, 8.0, 0.0]])
        assert m.kind == "raw"

    def test_dead_relu(self):
        layer = Layer([[1.0, 1.0]], [-5.0], "relu")
        m = layer_attribute(layer, [0.0, 0.0], InputDomain.box(-1, 1, 2))
        assert np.all(m.entries == 0)

    def test_tanh_from_corner_root(self):
        layer = Layer([[1.0]], [0.0], "tanh")
        m = layer_attribute(layer, [1.0], InputDomain.box(-1, 1, 1), tol=1e-8)
        assert m.roots[0].theta[0] == -1.0
        assert m.entries[0, 0] == pytest.approx(TANH_SPAN_1, abs=1e-4)
        assert m.entries[0, 1] == pytest.approx(TANH_M1, abs=1e-15)
        assert m.entries[0].sum() == pytest.approx(np.tanh(1.0), abs=1e-8)

    def test_rows_sum_to_outputs(self):
        model, X, doms = setup([4, 5, 1], ["sigmoid", "linear"], 3)
        h = X[0]
        m = layer_attribute(model.layers[0], h, doms[0], tol=1e-7)
        out = forward(model, h).post[0]
        np.testing.assert_allclose(m.entries.sum(axis=1), out, atol=1e-7)

    def test_leaky_negative_regime(self):
        layer = Layer([[1.0, -2.0]], [0.5], LinkFunction("leaky_relu", 0.1))
        m = layer_attribute(layer, [0.0, 1.0], InputDomain.box(-1, 1, 2))
        np.testing.assert_allclose(m.entries, [[0.0, -0.2, 0.05]])

    def test_infeasible_carries_position(self):
        layer = Layer([[1.0], [1.0]], [0.0, 5.0], "sigmoid")
        with pytest.raises(InfeasibleTarget) as exc:
            layer_attribute(layer, [0.0], InputDomain.box(-1, 1, 1), target=RootTarget.explicit(0.5),
                            layer_index=3)
        assert (exc.value.layer, exc.value.neuron) == (3, 1)


class TestShareMatrix:
    def test_example(self):
        raw = ContributionMatrix(np.array([[3.0, 8.0, 0.0]]), 0)
        s = to_share_matrix(raw, [11.0])
        np.testing.assert_allclose(s.entries, [[3 / 11, 8 / 11, 0.0]], atol=1e-16)
        assert s.kind == "share"

    def test_dead_row(self):
        raw = ContributionMatrix(np.array([[0.0, 0.0, 0.0], [1.0, 1.0, 0.0]]), 0)
        s = to_share_matrix(raw, [0.0, 2.0])
        assert np.all(s.entries[0] == 0)
        np.testing.assert_allclose(s.entries[1], [0.5, 0.5, 0.0])

    def test_residual_goes_to_bias(self):
        raw = ContributionMatrix(np.array([[0.4, 0.59999, 0.0]]), 0)
        s = to_share_matrix(raw, [1.0])
        assert s.entries[0].sum() == pytest.approx(1.0, abs=1e-15)
        assert s.entries[0, -1] == pytest.approx(1e-5, abs=1e-15)
        assert s.entries[0, 0] == 0.4


class TestDeepExplain:
    def test_all_linear(self):
        model, X, doms = setup([5, 4, 1], ["linear", "linear"], 1)
        W, b = collapse_linear(model)
        for x in X[:10]:
            r = deep_explain(model, x, doms, GridSpec.fixed(1), tol=1e-12)
            np.testing.assert_allclose(r.feature_contributions, W[0] * x, atol=1e-12)
            assert r.bias_total == pytest.approx(b[0], abs=1e-12)
            assert r.reference_value == 0.0
            assert r.reconstruction_error <= 1e-12

    def test_relu_regime_oracle(self):
        model, X, doms = setup([6, 8, 1], ["relu", "linear"], 2)
        for x in X[:20]:
            A, c = regime_collapse(model, x)
            r = deep_explain(model, x, doms)
            np.testing.assert_allclose(r.feature_contributions, A[0] * x, atol=1e-10)
            assert r.bias_total == pytest.approx(c[0], abs=1e-10)

    def test_pima_shape_threshold_conservation(self):
        model, X, doms = setup([8, 6, 4, 1], ["linear", "relu", "sigmoid"], 11)
        ok = 0
        for x in X[:40]:
            try:
                r = deep_explain(model, x, doms, mode=ThresholdSpec(0.5))
            except InfeasibleTarget:
                continue
            ok += 1
            total = r.feature_contributions.sum() + r.bias_total
            assert abs(total - (forward(model, x).output - 0.5)) <= 1e-6
            assert r.reference_value == 0.5
        assert ok > 0

    def test_single_layer_model(self):
        model, X, doms = setup([3, 1], ["sigmoid"], 4)
        r = deep_explain(model, X[0], doms)
        assert abs(r.feature_contributions.sum() + r.bias_total - (r.predicted - r.reference_value)) <= 1e-6
        assert r.bias_total == 0.0

    def test_exact_and_shared_agree_with_trivial_hidden(self):
        model, X, doms = setup([5, 4, 3, 1], ["leaky_relu", "relu", "tanh"], 5)
        for x in X[:5]:
            a = deep_explain(model, x, doms, chaining="exact")
            b = deep_explain(model, x, doms, chaining="shared")
            np.testing.assert_allclose(a.feature_contributions, b.feature_contributions, atol=1e-14)

    def test_exact_chaining_builds_per_neuron_matrices(self):
        model, X, doms = setup([3, 4, 2, 1], ["tanh", "tanh", "sigmoid"], 6)
        r = deep_explain(model, X[0], doms, chaining="exact")
        layer0 = [m for m in r.matrices if m.layer_index == 0]
        # one upstream matrix per root vector of the middle layer (2 neurons)
        assert len(layer0) == 2
        s = deep_explain(model, X[0], doms, chaining="shared")
        assert len([m for m in s.matrices if m.layer_index == 0]) == 1
        for res in (r, s):
            assert abs(res.explained() - res.predicted) <= 1e-6

    def test_chaining_limit(self):
        model, X, doms = setup([3, 4, 4, 1], ["tanh", "tanh", "sigmoid"], 7)
        with pytest.raises(ChainingLimitExceeded):
            deep_explain(model, X[0], doms, max_matrices=2)

    def test_redistribution(self):
        model, X, doms = setup([4, 3, 1], ["tanh", "sigmoid"], 8)
        r = deep_explain(model, X[0], doms, redistribute=True)
        assert r.redistributed
        base = r.baseline_shares.sum() + r.baseline_bias
        assert base == pytest.approx(r.reference_value, abs=1e-12)
        assert r.explained() == pytest.approx(r.predicted, abs=1e-6)

    def test_relu_output_threshold_with_mask_flip(self):
        # dead observation (preactivation -1.3) against a root at preactivation
        # 0.5: the path crosses the relu kink
        w = np.array([[1.0, -1.0]])
        model = MlpModel((Layer(w, [0.0], "relu"),), 2)
        doms = [InputDomain.box(-2, 2, 2)]
        r = deep_explain(model, np.array([0.2, 1.5]), doms, mode=0.5, tol=1e-6)
        assert r.predicted == 0.0
        assert abs(r.feature_contributions.sum() + r.bias_total - (0.0 - 0.5)) <= 1e-6
        assert r.grid_points_used > 50

    def test_out_of_domain(self):
        model, X, doms = setup([3, 1], ["sigmoid"], 9)
        with pytest.raises(OutOfDomain):
            deep_explain(model, X[0] + 100, doms)

    def test_bad_threshold(self):
        model, X, doms = setup([3, 1], ["sigmoid"], 9)
        with pytest.raises(ValueError):
            deep_explain(model, X[0], doms, mode=1.5)

    def test_unreasonable_threshold_infeasible(self):
        model, X, doms = setup([8, 6, 4, 1], ["linear", "relu", "sigmoid"], 11)
        with pytest.raises(InfeasibleTarget) as exc:
            deep_explain(model, X[0], doms, mode=ThresholdSpec(0.99999))
        assert exc.value.layer == 2


class TestProperties:
    FAMILIES = {
        "tanh": ([5, 4, 3, 1], ["tanh", "tanh", "linear"]),
        "relu": ([5, 6, 4, 1], ["relu", "relu", "linear"]),
        "sigmoid-output": ([5, 4, 3, 1], ["linear", "tanh", "sigmoid"]),
    }

    @pytest.mark.parametrize("family", FAMILIES)
    def test_deep_conservation(self, family):
        sizes, links = self.FAMILIES[family]
        for seed in range(100):
            model, X, doms = setup(sizes, links, 1000 + seed, n_ref=50)
            for x in X[:2]:
                r = deep_explain(model, x, doms, tol=1e-6)
                total = r.feature_contributions.sum() + r.bias_total
                assert abs(total - (r.predicted - r.reference_value)) <= 1e-6

    def test_linear_collapse(self):
        for seed in range(20):
            model, X, doms = setup([4, 5, 3, 1], ["linear"] * 3, 2000 + seed)
            W, b = collapse_linear(model)
            x = X[0]
            single = MlpModel((Layer(W, b, "linear"),), 4)
            r1 = deep_explain(model, x, doms)
            r2 = deep_explain(single, x, [doms[0]])
            np.testing.assert_allclose(r1.feature_contributions, r2.feature_contributions, atol=1e-10)
            assert r1.bias_total == pytest.approx(r2.bias_total, abs=1e-10)

    def test_share_rows_stochastic(self):
        model, X, doms = setup([4, 5, 3, 1], ["tanh", "relu", "sigmoid"], 3000)
        for x in X[:10]:
            r = deep_explain(model, x, doms)
            trace = forward(model, x)
            for m in r.matrices:
                if m.kind != "share":
                    continue
                live = np.abs(trace.post[m.layer_index]) > 1e-12
                np.testing.assert_allclose(m.entries[live].sum(axis=1), 1.0, atol=1e-9)
                assert np.all(m.entries[~live] == 0)

    def test_threshold_sign_consistency(self):
        model, X, doms = setup([8, 6, 4, 1], ["linear", "relu", "sigmoid"], 11)
        for x in X[:50]:
            try:
                r = deep_explain(model, x, doms, mode=0.5)
            except InfeasibleTarget:
                continue
            gap = r.predicted - 0.5
            if abs(gap) > 1e-5:
                assert np.sign(r.feature_contributions.sum() + r.bias_total) == np.sign(gap)


class TestExplainDataset:
    def test_empty(self):
        model, _, doms = setup([3, 1], ["sigmoid"], 0)
        assert explain_dataset(model, np.empty((0, 3)), doms) == []

    def test_twenty_rows(self):
        model, X, doms = setup([4, 3, 1], ["relu", "sigmoid"], 0)
        out = explain_dataset(model, X[:20], doms)
        assert len(out) == 20
        assert all(abs(r.explained() - r.predicted) < 1e-6 for r in out)

    def test_duplicates_identical(self):
        model, X, doms = setup([4, 3, 1], ["tanh", "sigmoid"], 0)
        a, b = explain_dataset(model, np.vstack([X[3], X[3]]), doms)
        assert a.feature_contributions.tobytes() == b.feature_contributions.tobytes()
        assert a.bias_total == b.bias_total

    def test_errors_collected(self):
        model, X, doms = setup([8, 6, 4, 1], ["linear", "relu", "sigmoid"], 11)
        out = explain_dataset(model, X[:5], doms, mode=0.99999)
        assert len(out) == 5
        assert all(isinstance(e, InfeasibleTarget) for e in out)

    def test_default_domains(self):
        model, X, _ = setup([4, 3, 1], ["relu", "sigmoid"], 0)
        out = explain_dataset(model, X[:7])
        assert len(out) == 7
