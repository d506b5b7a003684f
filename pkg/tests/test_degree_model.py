import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spectracl.degree_model import (
    BiDegreeSequence, ModelValidationError, PartitionSpec, cl_predictor, edge_probability, ensure_valid,
    load_model, p_max, save_model, validate,
)
from spectracl.random_models import random_sequence, random_spec


def test_uniform_sequence_validates():
    seq = BiDegreeSequence([1, 1, 1], [1, 1, 1])
    assert validate(seq).ok
    assert seq.S == 3


def test_probability_above_one_is_reported():
    rep = validate(BiDegreeSequence([3, 0], [1, 2]))
    assert not rep.ok
    assert any("p_ij>1 possible" in p for p in rep.problems)


def test_sum_mismatch_is_reported():
    rep = validate(BiDegreeSequence([1, 2], [2, 2]))
    assert any("Σa≠Σb" in p for p in rep.problems)


def test_negative_and_nonfinite_entries_are_reported():
    assert not validate(BiDegreeSequence([-1, 2], [0.5, 0.5])).ok
    assert not validate(BiDegreeSequence([np.inf, 1], [1, 1])).ok


def test_sum_tolerance_is_relative():
    a = np.array([1.0, 1.5, 2.0])
    assert validate(BiDegreeSequence(a, a * (1 + 1e-11))).ok
    assert not validate(BiDegreeSequence(a, a * (1 + 1e-7))).ok


def test_ensure_valid_raises_with_report():
    with pytest.raises(ModelValidationError) as info:
        ensure_valid(BiDegreeSequence([1, 3], [2, 2]))
    assert not info.value.report.ok


def test_uniform_edge_probability():
    seq = BiDegreeSequence([2] * 4, [2] * 4)
    assert all(edge_probability(seq, i, j) == 0.5 for i in range(4) for j in range(4))


def test_invalid_model_probability_is_rejected():
    # b_1·a_2/S = 2·3/4 exceeds one; validation stops such a model before any sampling
    rep = validate(BiDegreeSequence([1, 3], [2, 2]))
    assert any("p_ij>1" in p for p in rep.problems)


def test_partitioned_edge_probability():
    # node 0 in group 1 with b=1, node 4 in group 2 with a=2, S_12 = 4
    spec = PartitionSpec(2, [1, 1, 1, 1, 2, 2], {(1, 2): [0, 0, 0, 0, 2, 2]}, {(1, 2): [1, 1, 1, 1, 0, 0]})
    assert validate(spec).ok
    assert spec.S_block(1, 2) == 4
    assert edge_probability(spec, 0, 4) == 0.5
    assert edge_probability(spec, 4, 0) == 0.0


def test_empty_block_gives_zero_probability():
    spec = PartitionSpec(2, [1, 2], {(1, 1): [1, 0]}, {(1, 1): [1, 0]})
    assert edge_probability(spec, 0, 1) == 0.0
    assert edge_probability(spec, 1, 0) == 0.0


def test_predictor_examples():
    assert cl_predictor(BiDegreeSequence([2] * 4, [2] * 4)) == 2.0
    assert cl_predictor(BiDegreeSequence([1, 0], [0, 1])) == 0.0
    with pytest.raises(ValueError, match="empty model"):
        cl_predictor(BiDegreeSequence([0, 0], [0, 0]))


def test_p_max_examples():
    assert p_max(BiDegreeSequence([2] * 4, [2] * 4)) == 0.5
    assert p_max(BiDegreeSequence([1, 1], [1, 1])) == 0.5
    assert not validate(BiDegreeSequence([1, 2], [2, 1])).ok
    spec = PartitionSpec.uniform_blocks([3, 3], np.full((2, 2), 0.3 * 9))
    assert p_max(spec) == pytest.approx(0.3)


def test_p_max_matches_enumeration(rng):
    for _ in range(30):
        model = random_spec(rng, 9, 3, zero_prob=0.3) if rng.random() < 0.5 else random_sequence(rng, 9)
        assert p_max(model) == pytest.approx(model.probability_matrix().max(), rel=1e-12)


def test_support_violation_is_reported():
    spec = PartitionSpec(2, [1, 2], {(1, 2): [1, 1]}, {(1, 2): [2, 0]})
    assert not validate(spec).ok


def test_from_chung_lu_reproduces_probabilities(rng):
    seq = random_sequence(rng, 10)
    groups = rng.integers(1, 4, 10)
    groups[:3] = [1, 2, 3]
    spec = PartitionSpec.from_chung_lu(seq, groups)
    assert validate(spec).ok
    np.testing.assert_allclose(spec.probability_matrix(), seq.probability_matrix(), rtol=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 12), st.integers(0, 2 ** 32 - 1))
def test_probabilities_bounded_by_p_max(N, seed):
    seq = random_sequence(np.random.default_rng(seed), N)
    P = seq.probability_matrix()
    assert P.min() >= 0 and P.max() <= 1
    assert P.max() <= p_max(seq) * (1 + 1e-12)
    np.testing.assert_allclose(P.sum(axis=1), seq.b, rtol=1e-10)
    np.testing.assert_allclose(P.sum(axis=0), seq.a, rtol=1e-10)


def test_csv_and_json_round_trip(tmp_path, rng):
    seq = random_sequence(rng, 7)
    save_model(seq, tmp_path / "seq.csv")
    back = load_model(tmp_path / "seq.csv")
    assert np.array_equal(back.a, seq.a) and np.array_equal(back.b, seq.b)

    spec = random_spec(rng, 8, 2, zero_prob=0.3)
    save_model(spec, tmp_path / "spec.json")
    back = load_model(tmp_path / "spec.json")
    assert back.K == spec.K and np.array_equal(back.groups, spec.groups)
    for key in spec.blocks():
        assert np.array_equal(back.a_blocks[key], spec.a_blocks[key])
    data = json.loads((tmp_path / "spec.json").read_text())
    assert set(data) == {"K", "groups", "blocks"} and "1,2" in data["blocks"]


def test_csv_needs_consecutive_ids(tmp_path):
    (tmp_path / "bad.csv").write_text("node_id,a,b\n0,1,1\n2,1,1\n")
    with pytest.raises(ValueError):
        load_model(tmp_path / "bad.csv")


def test_sequences_are_immutable():
    seq = BiDegreeSequence([1.0, 1.0], [1.0, 1.0])
    with pytest.raises(ValueError):
        seq.a[0] = 5.0
