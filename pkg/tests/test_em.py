import numpy as np
import pytest
from hypothesis import given, settings

from crowdmle.core import ConfusionMatrix, Dataset, log_likelihood_given_matrix
from crowdmle.em import EmInit, em_run, em_star, filter_presets, rating_presets
from crowdmle.errors import InputError
from crowdmle.filtering import filter_opt
from crowdmle.oracle import brute_force_filter

from .strategies import binary_datasets, rating_datasets


def test_presets_are_stochastic():
    for R in (2, 3, 4, 5):
        inits = rating_presets(R)
        assert [i.name for i in inits] == ["EM1", "EM2", "EM3"]
        for init in inits:
            assert np.allclose(init.matrix.p.sum(axis=0), 1)
    assert [round(i.matrix.e0, 2) for i in filter_presets()] == [0.25, 0.5, 0.75]
    assert rating_presets(3)[2].matrix.p[2, 1] == pytest.approx(0.33)


@settings(max_examples=60, deadline=None)
@given(rating_datasets(max_n=15, max_m=4))
def test_likelihood_never_decreases(data):
    for init in rating_presets(3):
        result = em_run(data, init)
        assert all(b >= a - 1e-9 for a, b in zip(result.history, result.history[1:]))
        again = log_likelihood_given_matrix(data, result.mapping, result.matrix)
        assert again == pytest.approx(result.loglik, abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(binary_datasets(max_n=20, max_m=5))
def test_star_is_best_of_inits(data):
    best = em_star(data)
    assert all(best.loglik >= em_run(data, i).loglik for i in filter_presets())


def test_unanimous_data_converges_to_perfect_workers():
    data = Dataset(2, [(f"i{k}", (3, 0)) for k in range(4)] + [(f"j{k}", (0, 3)) for k in range(4)])
    result = em_run(data, filter_presets()[0])
    assert result.converged and result.loglik == 0
    assert {result.mapping[(3, 0)], result.mapping[(0, 3)]} == {1, 2}


def test_four_items_from_low_error_start(four_items):
    result = em_run(four_items, filter_presets()[0])
    # EM searches unrestricted labellings, so only the exhaustive optimum bounds it
    assert result.loglik <= brute_force_filter(four_items, "all").best_loglik + 1e-9
    assert result.iterations <= 100 and result.converged
    assert filter_opt(four_items).loglik <= brute_force_filter(four_items, "all").best_loglik


def test_ties_keep_lower_rating():
    data = Dataset(2, [("a", (1, 1))])
    result = em_run(data, EmInit("flat", ConfusionMatrix(np.full((2, 2), 0.5))))
    assert result.mapping[(1, 1)] == 1


def test_bad_arguments():
    data = Dataset(2, [("a", (1, 1))])
    with pytest.raises(InputError):
        em_run(data, rating_presets(3)[0])
    with pytest.raises(InputError):
        em_run(data, filter_presets()[0], max_iter=0)


def test_empty_dataset():
    assert em_star(Dataset(3, [])).loglik == 0.0
