import numpy as np
import pytest

from tabmlkit.errors import (
    ColumnNotCategorical,
    CountMismatch,
    DimensionMismatch,
    EmptyMatrix,
    LabelNotBinary,
    RatioSumInvalid,
    TooFewValues,
    UnseenLevel,
)
from tabmlkit.preprocess import (
    EncodingMap,
    apply_encoding,
    iqr_cap,
    one_hot,
    standardize_apply,
    standardize_fit,
    stratified_split,
)
from tabmlkit.rng import Stream
from tabmlkit.tabular import CategoricalColumn, NumericColumn, Table

from test_tabular import make_table


def test_standardize_simple_column():
    z, params = standardize_fit(np.array([[1.0], [2.0], [3.0]]))
    assert np.allclose(z.ravel(), [-1.0, 0.0, 1.0])
    assert params.zero_variance_columns == ()


def test_standardize_constant_column_flagged():
    z, params = standardize_fit(np.array([[7.0, 1.0], [7.0, 2.0], [7.0, 3.0], [7.0, 4.0]]))
    assert np.all(z[:, 0] == 0.0)
    assert params.zero_variance_columns == (0,)


def test_standardize_apply_identity_on_means():
    x = Stream(3).uniform(40, -5, 5).reshape(10, 4)
    z, params = standardize_fit(x)
    assert np.allclose(standardize_apply(params, params.means.reshape(1, -1)), 0.0)
    assert np.allclose(z.mean(axis=0), 0.0, atol=1e-12)
    assert np.allclose(z.std(axis=0, ddof=1), 1.0, atol=1e-12)


def test_standardize_apply_explicit_params():
    from tabmlkit.preprocess import ScalerParams

    params = ScalerParams(np.array([0.0]), np.array([2.0]))
    assert standardize_apply(params, np.array([[4.0]]))[0, 0] == pytest.approx(2.0)


def test_standardize_dimension_mismatch():
    _, params = standardize_fit(np.eye(3))
    with pytest.raises(DimensionMismatch):
        standardize_apply(params, np.ones((2, 2)))


def test_standardize_needs_rows():
    with pytest.raises(EmptyMatrix):
        standardize_fit(np.ones((1, 3)))


def test_standardize_apply_is_affine():
    x = Stream(11).uniform(30, -2, 2).reshape(10, 3)
    y = Stream(12).uniform(30, -2, 2).reshape(10, 3)
    _, params = standardize_fit(x)
    for alpha in (0.0, 0.25, 0.8, 1.0):
        mixed = standardize_apply(params, alpha * x + (1 - alpha) * y)
        direct = alpha * standardize_apply(params, x) + (1 - alpha) * standardize_apply(params, y)
        assert np.allclose(mixed, direct, atol=1e-12)


def test_one_hot_two_levels():
    t = make_table(App=["Instagram", "TikTok", "Instagram"])
    out, em = one_hot(t, "App", drop_first=False)
    assert out.column_names == ["App_Instagram", "App_TikTok"]
    assert np.array_equal(out.column("App_TikTok").values, [0.0, 1.0, 0.0])
    assert em.levels == ("Instagram", "TikTok")


def test_one_hot_drop_first_drops_alphabetical_first():
    t = make_table(App=["B", "A", "C"])
    out, em = one_hot(t, "App", drop_first=True)
    assert out.column_names == ["App_B", "App_C"]
    row_sums = out.matrix().sum(axis=1)
    assert list(row_sums) == [1.0, 0.0, 1.0]


def test_one_hot_missing_encodes_all_zero():
    col = CategoricalColumn("App", np.array([0, -1], dtype=np.int32), ("X",))
    t = Table("t", (col,))
    out, _ = one_hot(t, "App")
    assert np.array_equal(out.column("App_X").values, [1.0, 0.0])


def test_one_hot_requires_categorical():
    t = make_table(x=[1.0, 2.0])
    with pytest.raises(ColumnNotCategorical):
        one_hot(t, "x")


def test_one_hot_row_sums_bounded():
    levels = ["a", "b", "c", "d"]
    stream = Stream(9)
    values = [levels[stream.next_below(4)] for _ in range(50)]
    t = make_table(App=values)
    for drop_first in (False, True):
        out, _ = one_hot(t, "App", drop_first=drop_first)
        sums = out.matrix().sum(axis=1)
        assert np.all(sums <= 1.0)
        if not drop_first:
            assert np.all(sums == 1.0)


def test_apply_encoding_unseen_level_strict_and_lenient():
    t = make_table(App=["A", "B"])
    _, em = one_hot(t, "App")
    t2 = make_table(App=["A", "Z"])
    with pytest.raises(UnseenLevel):
        apply_encoding(em, t2, strict=True)
    with pytest.warns(UserWarning):
        out = apply_encoding(em, t2, strict=False)
    assert out.matrix()[1].sum() == 0.0


def test_iqr_cap_hand_computed():
    capped = iqr_cap(np.array([1.0, 2.0, 3.0, 4.0, 100.0]))
    assert np.array_equal(capped, [1.0, 2.0, 3.0, 4.0, 7.0])


def test_iqr_cap_leaves_inliers_alone():
    values = np.array([1.0, 2.0, 3.0, 4.0, 5.0])
    assert np.array_equal(iqr_cap(values), values)


def test_iqr_cap_constant_unchanged():
    values = np.array([3.0, 3.0, 3.0, 3.0])
    assert np.array_equal(iqr_cap(values), values)


def test_iqr_cap_too_few():
    with pytest.raises(TooFewValues):
        iqr_cap(np.array([1.0, 2.0, 3.0]))


def test_iqr_cap_idempotent():
    values = Stream(21).normal(200, 0, 5.0)
    once = iqr_cap(values)
    assert np.array_equal(iqr_cap(once), once)


def label_table(n0: int, n1: int, extra=None) -> Table:
    codes = np.array([0] * n0 + [1] * n1, dtype=np.int32)
    cols = [CategoricalColumn("label", codes, ("neg", "pos"))]
    cols.insert(0, NumericColumn("x", np.arange(n0 + n1, dtype=np.float64)))
    return Table("t", tuple(cols))


def test_split_ratios_exact_on_balanced_100():
    t = label_table(50, 50)
    s = stratified_split(t, "label", (0.7, 0.1, 0.2), seed=5)
    assert (len(s.train), len(s.validation), len(s.test)) == (70, 10, 20)
    codes = t.column("label").codes
    for part, expect in ((s.train, 35), (s.validation, 5), (s.test, 10)):
        assert int((codes[part] == 0).sum()) == expect


def test_split_counts_override_1092():
    t = label_table(546, 546)
    s = stratified_split(t, "label", seed=1, counts_override=(764, 65, 263))
    assert (len(s.train), len(s.validation), len(s.test)) == (764, 65, 263)


def test_split_deterministic():
    t = label_table(30, 20)
    a = stratified_split(t, "label", (0.7, 0.1, 0.2), seed=9)
    b = stratified_split(t, "label", (0.7, 0.1, 0.2), seed=9)
    assert np.array_equal(a.train, b.train)
    assert np.array_equal(a.validation, b.validation)
    assert np.array_equal(a.test, b.test)


def test_split_partition_property():
    stream = Stream(77)
    for trial in range(10):
        n0 = 20 + stream.next_below(40)
        n1 = 20 + stream.next_below(40)
        t = label_table(n0, n1)
        s = stratified_split(t, "label", (0.6, 0.2, 0.2), seed=trial)
        merged = np.concatenate([s.train, s.validation, s.test])
        assert len(merged) == n0 + n1
        assert len(np.unique(merged)) == n0 + n1
        codes = t.column("label").codes
        global_p = n1 / (n0 + n1)
        for part in (s.train, s.validation, s.test):
            if len(part) == 0:
                continue
            frac = float((codes[part] == 1).mean())
            assert abs(frac - global_p) <= 1.0 / len(part) + 1e-12


def test_split_rejects_bad_ratios_and_counts():
    t = label_table(10, 10)
    with pytest.raises(RatioSumInvalid):
        stratified_split(t, "label", (0.5, 0.2, 0.2), seed=1)
    with pytest.raises(CountMismatch):
        stratified_split(t, "label", seed=1, counts_override=(10, 5, 4))


def test_split_rejects_nonbinary():
    codes = np.zeros(10, dtype=np.int32)
    t = Table("t", (CategoricalColumn("label", codes, ("only",)),))
    with pytest.raises(LabelNotBinary):
        stratified_split(t, "label", (0.7, 0.1, 0.2), seed=1)
