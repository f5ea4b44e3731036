import numpy as np
import pytest

from geodescent.dataio import (
    SparseDataset,
    load_libsvm,
    parse_libsvm,
    save_libsvm,
    serialize_libsvm,
    synthetic_classification,
)
from geodescent.errors import (
    AmbiguousLabels,
    EmptyInput,
    InvalidParameter,
    MalformedLine,
    ParseError,
    TooManyClasses,
)


def random_dataset(rng):
    n_features = int(rng.integers(1, 12))
    n_samples = int(rng.integers(1, 15))
    rows = []
    for _ in range(n_samples):
        k = int(rng.integers(0, n_features + 1))
        idxs = sorted(rng.choice(n_features, size=k, replace=False) + 1)
        rows.append([(int(i), float(v)) for i, v in zip(idxs, rng.standard_normal(k))])
    labels = np.where(rng.random(n_samples) < 0.5, -1.0, 1.0)
    max_idx = max((r[-1][0] for r in rows if r), default=0)
    return SparseDataset(n_samples, max(max_idx, 1), rows, labels)


class TestParse:
    def test_basic_example(self):
        ds = parse_libsvm("+1 1:0.5 3:-1.2\n-1 2:2.0\n")
        assert ds.n_samples == 2
        assert ds.n_features == 3
        assert list(ds.labels) == [1.0, -1.0]
        assert ds.rows[0] == [(1, 0.5), (3, -1.2)]
        assert ds.rows[1] == [(2, 2.0)]

    def test_non_increasing_indices_rejected(self):
        with pytest.raises(MalformedLine) as exc:
            parse_libsvm("1 2:1 1:1")
        assert exc.value.line_no == 1

    def test_duplicate_index_rejected(self):
        with pytest.raises(MalformedLine):
            parse_libsvm("1 2:1 2:3")

    def test_missing_colon(self):
        with pytest.raises(MalformedLine):
            parse_libsvm("1 2=0.5")

    def test_non_numeric_tokens(self):
        with pytest.raises(MalformedLine):
            parse_libsvm("abc 1:1")
        with pytest.raises(MalformedLine):
            parse_libsvm("1 x:1")
        with pytest.raises(MalformedLine):
            parse_libsvm("1 1:zz")

    def test_zero_index_rejected(self):
        with pytest.raises(MalformedLine):
            parse_libsvm("1 0:2.0")

    def test_empty_input(self):
        with pytest.raises(EmptyInput):
            parse_libsvm("\n   \n# only a comment\n")

    def test_comments_stripped(self):
        ds = parse_libsvm("+1 1:1 # trailing words\n# full comment line\n-1 1:2\n")
        assert ds.n_samples == 2

    def test_label_only_line_is_valid(self):
        ds = parse_libsvm("+1\n-1 1:1\n")
        assert ds.rows[0] == []

    def test_zero_one_labels_mapped(self):
        ds = parse_libsvm("0 1:1\n1 1:2\n")
        assert list(ds.labels) == [-1.0, 1.0]

    def test_two_arbitrary_labels_sorted_order(self):
        ds = parse_libsvm("3 1:1\n7 1:2\n3 1:3\n")
        assert list(ds.labels) == [-1.0, 1.0, -1.0]

    def test_single_class_pm_one_allowed(self):
        ds = parse_libsvm("+1 1:1\n+1 1:2\n")
        assert list(ds.labels) == [1.0, 1.0]

    def test_single_nonstandard_label_rejected(self):
        with pytest.raises(AmbiguousLabels):
            parse_libsvm("5 1:1\n5 1:2\n")

    def test_three_classes_rejected(self):
        with pytest.raises(TooManyClasses):
            parse_libsvm("1 1:1\n2 1:1\n3 1:1\n")

    def test_exponent_values_accepted(self):
        ds = parse_libsvm("+1 1:1e-3 2:2E+4\n-1 1:5\n")
        assert ds.rows[0] == [(1, 1e-3), (2, 2e4)]

    def test_n_features_override_upward(self):
        ds = parse_libsvm("+1 1:1\n-1 2:1\n", n_features=10)
        assert ds.n_features == 10

    def test_n_features_override_below_max_rejected(self):
        with pytest.raises(InvalidParameter):
            parse_libsvm("+1 5:1\n-1 1:1\n", n_features=3)

    def test_bytes_input(self):
        ds = parse_libsvm(b"+1 1:0.5\n-1 2:1.0\n")
        assert ds.n_samples == 2


class TestRoundTrip:
    def test_serialize_parse_identity(self):
        rng = np.random.default_rng(31)
        for _ in range(100):
            ds = random_dataset(rng)
            text = serialize_libsvm(ds)
            back = parse_libsvm(text, n_features=ds.n_features)
            assert back.n_samples == ds.n_samples
            assert back.n_features == ds.n_features
            assert list(back.labels) == list(ds.labels)
            for r1, r2 in zip(ds.rows, back.rows):
                assert [i for i, _ in r1] == [i for i, _ in r2]
                for (_, v1), (_, v2) in zip(r1, r2):
                    assert v2 == pytest.approx(v1, rel=1e-15, abs=0.0)

    def test_file_round_trip(self, tmp_path):
        ds = random_dataset(np.random.default_rng(32))
        path = tmp_path / "data.libsvm"
        save_libsvm(ds, path)
        back = load_libsvm(path, n_features=ds.n_features)
        assert back.n_samples == ds.n_samples
        assert serialize_libsvm(back) == serialize_libsvm(ds)


class TestFuzz:
    def test_mutations_never_crash(self):
        rng = np.random.default_rng(33)
        base = serialize_libsvm(random_dataset(rng)).encode()
        alphabet = b"0123456789.:+-eE \n#abc"
        for _ in range(10_000):
            data = bytearray(base)
            for _ in range(int(rng.integers(1, 6))):
                pos = int(rng.integers(0, len(data)))
                data[pos] = alphabet[int(rng.integers(0, len(alphabet)))]
            try:
                parse_libsvm(bytes(data))
            except ParseError:
                pass


class TestSynthetic:
    def test_deterministic(self):
        a = synthetic_classification(30, 10, density=0.3, seed=5)
        b = synthetic_classification(30, 10, density=0.3, seed=5)
        assert serialize_libsvm(a) == serialize_libsvm(b)
        assert np.array_equal(a.labels, b.labels)

    def test_single_sample(self):
        ds = synthetic_classification(1, 4, density=0.5, seed=6)
        assert ds.n_samples == 1
        assert len(ds.rows) == 1

    def test_invalid_parameters(self):
        with pytest.raises(InvalidParameter):
            synthetic_classification(0, 4)
        with pytest.raises(InvalidParameter):
            synthetic_classification(5, 4, density=0.0)
        with pytest.raises(InvalidParameter):
            synthetic_classification(5, 4, density=1.5)

    def test_indices_sorted_and_in_range(self):
        ds = synthetic_classification(50, 20, density=0.2, seed=7)
        for row in ds.rows:
            idxs = [i for i, _ in row]
            assert idxs == sorted(idxs)
            assert all(1 <= i <= 20 for i in idxs)
        assert set(np.unique(ds.labels)) <= {-1.0, 1.0}

    def test_high_separation_is_nearly_separable(self):
        from geodescent.objectives import smoothed_hinge_erm_oracle
        from geodescent.optimizers import StoppingRule, run_geod

        ds = synthetic_classification(20, 2, density=1.0, separation=1e3, seed=9)
        lam = 1e-5
        oracle = smoothed_hinge_erm_oracle(ds, lam)
        trace = run_geod(oracle, np.zeros(2), StoppingRule(max_iters=3000))
        x = trace.final_point
        reg = 0.5 * lam * float(x @ x)
        loss = trace.final_f - reg
        assert loss <= max(reg, 1e-3)
