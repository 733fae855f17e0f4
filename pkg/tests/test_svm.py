import numpy as np
import pytest

from tabmlkit.classify import rbf_kernel, svm_fit, svm_predict, svm_score
from tabmlkit.errors import SingleClass
from tabmlkit.rng import Stream


def kkt_violation(x, y01, model, tol):
    """Maximum KKT violation over the training set, given the fitted model."""
    y = np.where(np.asarray(y01) == 1, 1.0, -1.0)
    f = svm_score(model, x)
    alphas = np.zeros(len(y))
    alphas[model.support_indices] = model.dual_coef * y[model.support_indices]
    worst = 0.0
    for i in range(len(y)):
        margin = y[i] * f[i]
        if alphas[i] <= 1e-10:
            worst = max(worst, 1.0 - margin)  # need margin >= 1
        elif alphas[i] >= model.c - 1e-10:
            worst = max(worst, margin - 1.0)  # need margin <= 1
        else:
            worst = max(worst, abs(margin - 1.0))
    return worst


def random_instance(seed, n=30, separable=True):
    stream = Stream(seed)
    x = stream.normal(n * 2, 0, 1).reshape(n, 2)
    if separable:
        y = (x[:, 0] + x[:, 1] > 0).astype(int)
        x[y == 1] += 1.5
        x[y == 0] -= 1.5
    else:
        y = (x[:, 0] + 0.8 * stream.normal(n, 0, 1) > 0).astype(int)
    if len(np.unique(y)) < 2:
        y[0] = 1 - y[0]
    return x, y


def test_kernel_unit_diagonal():
    x = Stream(1).normal(10, 0, 2).reshape(5, 2)
    k = rbf_kernel(x, x, gamma=0.7)
    assert np.allclose(np.diag(k), 1.0)


def test_two_point_midpoint_boundary():
    x = np.array([[1.0, 0.0], [-1.0, 0.0]])
    y = np.array([1, 0])
    for c in (0.1, 1.0, 100.0):
        m = svm_fit(x, y, c=c, gamma=1.0)
        mid = (x[0] + x[1]) / 2.0
        assert abs(svm_score(m, mid.reshape(1, -1))[0]) <= 1e-9
        assert svm_predict(m, x)[0] in (0, 1)


def test_two_point_closed_form_alpha():
    x = np.array([[1.0, 0.0], [-1.0, 0.0]])
    y = np.array([1, 0])
    gamma = 0.5
    k12 = float(np.exp(-gamma * 4.0))
    m = svm_fit(x, y, c=1e6, gamma=gamma)
    # unconstrained optimum alpha = 1 / (1 - K12), both points margin SVs
    alpha = np.abs(m.dual_coef)
    assert np.allclose(alpha, 1.0 / (1.0 - k12), rtol=1e-6)
    assert np.allclose(svm_score(m, x), [1.0, -1.0], atol=1e-6)


def test_dual_feasibility_and_kkt_on_random_instances():
    for i, separable in [(s, sep) for s in range(5) for sep in (True, False)]:
        x, y = random_instance(100 + i, n=26, separable=separable)
        m = svm_fit(x, y, c=1.0, gamma="scale", tol=1e-3)
        assert m.converged
        yy = np.where(y == 1, 1.0, -1.0)
        alphas = np.zeros(len(y))
        alphas[m.support_indices] = m.dual_coef * yy[m.support_indices]
        assert np.all(alphas >= -1e-12)
        assert np.all(alphas <= m.c + 1e-12)
        assert abs(float((alphas * yy).sum())) <= 1e-6
        assert kkt_violation(x, y, m, 1e-3) <= 1e-3


def test_dual_objective_nondecreasing():
    x, y = random_instance(7, n=24, separable=False)
    m = svm_fit(x, y, c=2.0, gamma="auto", track_objective=True)
    path = np.array(m.objective_path)
    assert len(path) > 0
    assert np.all(np.diff(path) >= -1e-9)


def test_label_flip_flips_scores():
    x, y = random_instance(9, n=20)
    a = svm_fit(x, y, c=1.0, gamma="scale")
    b = svm_fit(x, 1 - y, c=1.0, gamma="scale")
    assert np.allclose(svm_score(a, x), -svm_score(b, x), atol=1e-6)


def test_margin_support_vector_scores_near_one():
    x, y = random_instance(11, n=30, separable=True)
    m = svm_fit(x, y, c=10.0, gamma="scale", tol=1e-4)
    yy = np.where(y == 1, 1.0, -1.0)
    alphas = np.zeros(len(y))
    alphas[m.support_indices] = m.dual_coef * yy[m.support_indices]
    margin_idx = np.nonzero((alphas > 1e-6) & (alphas < m.c - 1e-6))[0]
    if len(margin_idx):
        f = svm_score(m, x)
        assert np.max(np.abs(yy[margin_idx] * f[margin_idx] - 1.0)) <= 1e-3


def test_gamma_rules():
    x = Stream(2).normal(40, 0, 3).reshape(20, 2)
    y = (x[:, 0] > 0).astype(int)
    m_scale = svm_fit(x, y, c=1.0, gamma="scale")
    m_auto = svm_fit(x, y, c=1.0, gamma="auto")
    assert m_scale.gamma == pytest.approx(1.0 / (2 * x.var()))
    assert m_auto.gamma == pytest.approx(0.5)


def test_predict_is_sign_of_score():
    x, y = random_instance(13, n=30, separable=False)
    m = svm_fit(x, y, c=1.0)
    s = svm_score(m, x)
    assert np.array_equal(svm_predict(m, x), (s > 0).astype(int))


def test_single_class_rejected():
    with pytest.raises(SingleClass):
        svm_fit(np.ones((4, 2)), np.ones(4))
