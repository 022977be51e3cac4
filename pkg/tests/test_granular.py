import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gbtsvm import granular, svm
from gbtsvm.errors import DomainError, TrainingError
from gbtsvm.features import fit_scaler


@pytest.mark.parametrize("n_maj,n_min,expected", [(150, 30, 5), (7, 2, 3), (10, 10, 1),
                                                  (3, 10, 1), (31, 30, 1)])
def test_granule_count_examples(n_maj, n_min, expected):
    assert granular.granule_count(n_maj, n_min) == expected


def test_granule_count_rejects_zero():
    with pytest.raises(DomainError):
        granular.granule_count(0, 3)
    with pytest.raises(DomainError):
        granular.granule_count(3, 0)


def test_granule_count_floor_property_1000_pairs():
    rng = np.random.default_rng(0)
    for n_maj, n_min in rng.integers(1, 5000, (1000, 2)):
        k = granular.granule_count(int(n_maj), int(n_min))
        assert k >= 1
        if n_maj >= n_min:
            assert k * n_min <= n_maj < (k + 1) * n_min
        else:
            assert k == 1


def test_split_examples():
    s = granular.split_major(6, 2)
    assert [g.tolist() for g in s.granules] == [[0, 2, 4], [1, 3, 5]]
    assert [g.tolist() for g in granular.split_major(5, 1).granules] == [[0, 1, 2, 3, 4]]
    assert granular.split_major(7, 3).sizes == [3, 2, 2]
    with pytest.raises(DomainError):
        granular.split_major(5, 0)


def check_partition(n_maj, n_gra):
    split = granular.split_major(n_maj, n_gra)
    assert len(split) == n_gra
    flat = np.concatenate(split.granules) if n_maj else np.array([], int)
    assert len(flat) == len(set(flat.tolist())) == n_maj
    assert set(flat.tolist()) == set(range(n_maj))
    assert max(split.sizes) - min(split.sizes) <= 1


def test_partition_1000_random():
    rng = np.random.default_rng(1)
    for _ in range(1000):
        n_gra = int(rng.integers(1, 40))
        n_maj = int(rng.integers(n_gra, 2000))
        check_partition(n_maj, n_gra)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 3000), st.integers(1, 3000))
def test_submodel_count_matches_split(n_maj, n_min):
    check_partition(n_maj, granular.granule_count(n_maj, n_min))


def blobs(rng, n_maj, n_min, dim=3):
    return rng.normal(-1.0, 1.0, (n_maj, dim)), rng.normal(1.0, 1.0, (n_min, dim))


def test_150_30_gives_five_balanced_submodels(monkeypatch):
    rng = np.random.default_rng(2)
    major, minor = blobs(rng, 150, 30)
    seen = []
    real_train = svm.train

    def spy(X, y, config):
        seen.append((np.array(X), np.array(y), config.seed))
        return real_train(X, y, config)

    monkeypatch.setattr(svm, "train", spy)
    model = granular.train_granular(major, minor, svm.TrainConfig(seed=10))
    assert model.n_submodels == 5
    assert [int((y < 0).sum()) for _, y, _ in seen] == [30] * 5
    assert [int((y > 0).sum()) for _, y, _ in seen] == [30] * 5
    assert [s for _, _, s in seen] == [10, 11, 12, 13, 14]

    # bookkeeping: majors used exactly once overall, minors in every submodel
    scaler = fit_scaler(np.vstack([major, minor]))
    S_maj, S_min = scaler.transform(major), scaler.transform(minor)
    used = np.vstack([X[y < 0] for X, y, _ in seen])
    assert sorted(map(tuple, used)) == sorted(map(tuple, S_maj))
    for X, y, _ in seen:
        assert np.array_equal(X[y > 0], S_min)


def test_scaler_fit_on_union():
    rng = np.random.default_rng(3)
    major, minor = blobs(rng, 40, 10)
    model = granular.train_granular(major, minor)
    union = np.vstack([major, minor])
    assert np.allclose(model.scaler.mean, union.mean(0))
    assert np.allclose(model.scaler.stddev, union.std(0))


def test_empty_class_rejected():
    with pytest.raises(TrainingError):
        granular.train_granular(np.empty((0, 2)), np.ones((3, 2)))


def test_training_error_tagged_with_granule(monkeypatch):
    rng = np.random.default_rng(4)
    major, minor = blobs(rng, 30, 10)
    real_train = svm.train

    def flaky(X, y, config):
        if config.seed == 2:
            raise TrainingError("boom")
        return real_train(X, y, config)

    monkeypatch.setattr(svm, "train", flaky)
    with pytest.raises(TrainingError) as info:
        granular.train_granular(major, minor)
    assert info.value.granule == 2 and "granule 2" in str(info.value)


@pytest.mark.parametrize("votes,expected", [
    ((1, 1, 1, -1, -1), 1), ((-1, -1, -1, 1, 1), -1), ((1,), 1), ((-1,), -1),
    ((1, 1, -1, -1), 1), ((1, -1), 1),
])
def test_vote_examples(votes, expected):
    assert granular.vote(votes) == expected


def stub(bias, dim=2):
    return svm.TrainedSVM(np.empty((0, dim)), np.empty(0), bias, 1.0)


def stub_model(biases, dim=2):
    scaler = fit_scaler([[0.0] * dim, [1.0] * dim])
    return granular.GranularModel(tuple(stub(b, dim) for b in biases), scaler)


def test_vote_predict_tie_and_permutation():
    x = np.zeros(2)
    assert granular.vote_predict(stub_model([1, 1, -1, -1]), x) == 1
    assert granular.vote_predict(stub_model([-1, -1, -1, 1, 1]), x) == -1
    rng = np.random.default_rng(5)
    for _ in range(50):
        b = rng.choice([-1.0, 1.0], int(rng.integers(1, 9)))
        ref = granular.vote_predict(stub_model(b), x)
        assert granular.vote_predict(stub_model(rng.permutation(b)), x) == ref
        assert granular.vote_predict_many(stub_model(b), [x])[0] == ref


def test_vote_predict_deterministic_and_batch_consistent():
    rng = np.random.default_rng(6)
    major, minor = blobs(rng, 90, 20)
    model = granular.train_granular(major, minor)
    probes = rng.normal(0, 2, (200, 3))
    single = [granular.vote_predict(model, p) for p in probes]
    assert single == [granular.vote_predict(model, p) for p in probes]
    assert granular.vote_predict_many(model, probes).tolist() == single


def test_single_granule_equals_plain_svm_on_20_datasets():
    rng = np.random.default_rng(7)
    cfg = svm.TrainConfig(C=2.0)
    for _ in range(20):
        n = int(rng.integers(5, 25))
        major, minor = blobs(rng, n, n)
        model = granular.train_granular(major, minor, cfg)
        assert model.n_submodels == 1
        X = model.scaler.transform(np.vstack([major, minor]))
        y = np.concatenate([-np.ones(n), np.ones(n)])
        plain = svm.train(X, y, cfg)
        probes = rng.normal(0, 2, (50, 3))
        for p in probes:
            assert granular.vote_predict(model, p) == svm.predict(plain, model.scaler.transform(p))
