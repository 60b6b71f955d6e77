import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from crowdmle.core import (
    ConfusionMatrix,
    Dataset,
    Mapping,
    argmax_lex,
    bucketize,
    counts_from_ratings,
    log_likelihood_given_matrix,
    majority_vote,
    profile_logliks,
    tallies,
)
from crowdmle.errors import InputError

from .strategies import rating_datasets, stochastic_matrices


def test_bucketize_groups_identical_response_sets(four_items):
    buckets = bucketize(four_items)
    assert buckets == [((3, 0), ["I1"]), ((2, 1), ["I3", "I4"]), ((1, 2), ["I2"])]


def test_bucketize_empty_and_single():
    assert bucketize(Dataset(3, [])) == []
    data = Dataset(3, [(f"i{k}", (3, 0, 0)) for k in range(500)])
    [(key, ids)] = bucketize(data)
    assert key == (3, 0, 0) and len(ids) == 500


def test_bucketize_names_item_with_wrong_total():
    data = Dataset(2, [("a", (2, 1)), ("odd", (1, 1))])
    with pytest.raises(InputError, match="odd"):
        bucketize(data)


@given(rating_datasets(max_n=15))
def test_bucketize_partitions_items(data):
    buckets = bucketize(data)
    members = [i for _, ids in buckets for i in ids]
    assert sorted(members) == sorted(data.item_ids)
    keys = [k for k, _ in buckets]
    assert keys == sorted(set(keys), reverse=True)


def test_three_rating_example_likelihood(three_rating_example):
    data, p = three_rating_example
    f = Mapping({(1, 1, 0): 2, (1, 0, 1): 2})
    # responses 3 and 2 for I1, 3 and 1 for I2, everything true rating 2
    expected = Fraction(1, 10) * Fraction(8, 10) * Fraction(1, 10) * Fraction(1, 10)
    assert expected == Fraction(8, 10**4)
    got = log_likelihood_given_matrix(data, f, p)
    assert abs(got - math.log(8e-4)) < 1e-12


def _four_items_exact(e0, e1):
    # I1 (3 ones, truth 1), I2 (1 one, truth 0), I3, I4 (2 ones, truth 1)
    return (1 - e1) ** 3 * (e0 * (1 - e0) ** 2) * ((1 - e1) ** 2 * e1) ** 2


@pytest.mark.parametrize("e0, e1, approx", [
    (Fraction(2, 9), Fraction(1, 3), 8.743e-4),  # the same two rates attached to the other classes
    (Fraction(1, 3), Fraction(2, 9), 1.2597e-3),  # closed-form rates for this mapping
])
def test_four_items_likelihood(four_items, e0, e1, approx):
    f = Mapping({(3, 0): 2, (1, 2): 1, (2, 1): 2})
    exact = _four_items_exact(e0, e1)
    got = log_likelihood_given_matrix(four_items, f, ConfusionMatrix.from_error_rates(float(e0), float(e1)))
    assert math.isclose(got, math.log(exact), rel_tol=0, abs_tol=1e-12)
    assert math.isclose(float(exact), approx, rel_tol=1e-3)


def test_zero_probability_response_gives_minus_inf():
    data = Dataset(2, [("a", (1, 0))])
    p = ConfusionMatrix.from_error_rates(0.0, 0.0)
    assert log_likelihood_given_matrix(data, Mapping({(1, 0): 1}), p) == -math.inf
    # unused zero entries cost nothing
    assert log_likelihood_given_matrix(data, Mapping({(1, 0): 2}), p) == 0.0


def test_empty_dataset_likelihood_is_zero():
    p = ConfusionMatrix(np.full((3, 3), 1 / 3))
    assert log_likelihood_given_matrix(Dataset(3, []), Mapping({}), p) == 0.0


def test_dimension_mismatch():
    with pytest.raises(InputError):
        log_likelihood_given_matrix(Dataset(2, []), Mapping({}), ConfusionMatrix(np.eye(3)))


@settings(max_examples=50)
@given(rating_datasets(max_n=10), stochastic_matrices(), st.randoms(use_true_random=False))
def test_likelihood_is_additive_and_order_free(data, p, rnd):
    labels = {k: rnd.randint(1, 3) for k, _ in bucketize(data)}
    f = Mapping(labels)
    whole = log_likelihood_given_matrix(data, f, p)
    ids = data.item_ids
    rnd.shuffle(ids)
    cut = len(ids) // 2
    parts = sum(log_likelihood_given_matrix(data.subset(s), f, p) for s in (ids[:cut], ids[cut:]))
    assert math.isclose(whole, parts, rel_tol=1e-12, abs_tol=1e-12)
    shuffled = Dataset(3, [(i, dict(data.items)[i]) for i in ids])
    assert math.isclose(whole, log_likelihood_given_matrix(shuffled, f, p), rel_tol=1e-12, abs_tol=1e-12)


def test_confusion_matrix_validation():
    with pytest.raises(InputError):
        ConfusionMatrix(np.array([[0.5, 0.5], [0.6, 0.5]]))
    with pytest.raises(InputError):
        ConfusionMatrix(np.array([[1.2, 0.5], [-0.2, 0.5]]))
    p = ConfusionMatrix.from_error_rates(0.1, 0.3)
    assert p.e0 == pytest.approx(0.1) and p.e1 == pytest.approx(0.3)


def test_dataset_validation():
    with pytest.raises(InputError, match="duplicate"):
        Dataset(2, [("a", (1, 0)), ("a", (0, 1))])
    with pytest.raises(InputError):
        Dataset(3, [("a", (1, 0))])
    with pytest.raises(InputError):
        Dataset(2, [("a", (1, 0))], truth={"a": 3})
    with pytest.raises(InputError, match="disagree"):
        Dataset(2, [("a", (1, 0))], raw=[("a", "w", 1)])
    assert counts_from_ratings([3, 3, 1], 3) == (2, 0, 1)
    with pytest.raises(InputError):
        counts_from_ratings([4], 3)


def test_profile_loglik_matches_direct_evaluation():
    rng = np.random.default_rng(0)
    data = Dataset(3, [(f"i{k}", tuple(rng.multinomial(4, [0.2, 0.3, 0.5]))) for k in range(30)])
    buckets = bucketize(data)
    labels = rng.integers(1, 4, size=(20, len(buckets)))
    fast = profile_logliks(tallies(buckets), labels, 3)
    for row, val in zip(labels, fast):
        f = Mapping({k: int(v) for (k, _), v in zip(buckets, row)})
        S = np.zeros((3, 3))
        for (k, ids), v in zip(buckets, row):
            S[:, v - 1] += np.array(k[::-1]) * len(ids)
        tot = S.sum(axis=0)
        p = np.where(tot > 0, S / np.where(tot > 0, tot, 1), 1 / 3)
        assert math.isclose(val, log_likelihood_given_matrix(data, f, ConfusionMatrix(p)), abs_tol=1e-9)


def test_argmax_lex_prefers_first_of_ties():
    assert argmax_lex(np.array([-2.0, -1.0, -1.0 + 1e-15, -3.0])) == 1
    assert argmax_lex(np.array([-np.inf, -np.inf])) == 0


def test_majority_vote_ties_go_low():
    data = Dataset(3, [("a", (1, 1, 0)), ("b", (0, 0, 2))])
    f = majority_vote(data)
    assert f[(1, 1, 0)] == 2 and f[(0, 0, 2)] == 1
