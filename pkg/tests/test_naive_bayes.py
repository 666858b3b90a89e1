import math

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from mgtdetect.features import SparseVector
from mgtdetect.models import NaiveBayesModel, nb_fit, nb_log_posterior
from oracles import dense_naive_bayes


def _two_doc_model():
    X = [SparseVector(2, ((0, 1.0),)), SparseVector(2, ((1, 1.0),))]
    return nb_fit(X, [0, 1], alpha=1.0)


def test_closed_form_feature_log_prob():
    m = _two_doc_model()
    assert np.allclose(m.feature_log_prob[0], np.log([2 / 3, 1 / 3]), atol=1e-12)
    assert np.allclose(m.feature_log_prob[1], np.log([1 / 3, 2 / 3]), atol=1e-12)


def test_single_class_prior_is_zero():
    m = nb_fit(np.array([[1.0, 2.0], [0.0, 1.0]]), [0, 0], n_classes=1)
    assert m.class_log_prior.tolist() == [0.0]


def test_heavy_smoothing_tends_to_uniform():
    X = np.array([[5.0, 0.0, 1.0], [0.0, 3.0, 0.0]])
    m = nb_fit(X, [0, 1], alpha=1e9)
    assert np.allclose(m.feature_log_prob, math.log(1 / 3), atol=1e-3)


def test_rows_are_distributions():
    rng = np.random.default_rng(0)
    X = rng.integers(0, 4, size=(20, 7)).astype(float)
    m = nb_fit(X, rng.integers(0, 3, size=20), n_classes=3)
    assert np.allclose(np.exp(m.feature_log_prob).sum(axis=1), 1.0, atol=1e-9)


def test_errors():
    with pytest.raises(ValueError, match="nonnegative"):
        nb_fit(np.array([[-1.0, 0.0]]), [0])
    with pytest.raises(ValueError, match="empty"):
        nb_fit(np.zeros((0, 2)), [])
    m = _two_doc_model()
    with pytest.raises(ValueError, match="dimension"):
        nb_log_posterior(m, np.zeros(3))


def test_zero_vector_scores_are_priors():
    m = _two_doc_model()
    assert nb_log_posterior(m, np.zeros(2)).tolist() == m.class_log_prior.tolist()


def test_oracle_arithmetic_example():
    m = _two_doc_model()
    scores = nb_log_posterior(m, SparseVector(2, ((0, 3.0),)))
    # oracle: ln(1/2) + 3 ln(2/3) vs ln(1/2) + 3 ln(1/3)
    assert scores[0] == pytest.approx(math.log(0.5) + 3 * math.log(2 / 3))
    assert scores[1] == pytest.approx(math.log(0.5) + 3 * math.log(1 / 3))
    assert int(np.argmax(scores)) == 0


def test_symmetric_tie_goes_to_class_zero():
    m = _two_doc_model()
    assert m.predict(np.array([[1.0, 1.0]])).tolist() == [0]


def test_tfidf_like_inputs_accepted():
    X = sp.csr_matrix(np.array([[0.3, 0.0], [0.0, 0.7]]))
    m = nb_fit(X, [0, 1])
    assert m.predict(X).tolist() == [0, 1]


def test_absent_class_never_predicted():
    m = nb_fit(np.array([[1.0, 0.0], [0.0, 1.0]]), [0, 2], n_classes=3)
    assert m.class_log_prior[1] == -np.inf
    p = m.predict_proba(np.array([[1.0, 1.0]]))
    assert p[0, 1] == 0.0 and p.sum() == pytest.approx(1.0)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000))
def test_matches_dense_bayes(seed):
    rng = np.random.default_rng(seed)
    n, d, c = int(rng.integers(1, 15)), int(rng.integers(1, 10)), int(rng.integers(1, 5))
    X = rng.integers(0, 5, size=(n, d)).astype(float)
    y = rng.integers(0, c, size=n)
    alpha = float(rng.uniform(0.1, 2.0))
    prior, logp, scores = dense_naive_bayes(X, y, c, alpha)
    m = nb_fit(sp.csr_matrix(X), y, alpha=alpha, n_classes=c)
    assert np.allclose(m.class_log_prior, prior, atol=1e-9, rtol=0)
    assert np.allclose(m.feature_log_prob, logp, atol=1e-9, rtol=0)
    assert np.allclose(m.joint_log_likelihood(X), scores, atol=1e-9, rtol=0)


def test_state_round_trip():
    m = _two_doc_model()
    again = NaiveBayesModel.from_state(m.get_state())
    assert np.array_equal(again.feature_log_prob, m.feature_log_prob)
