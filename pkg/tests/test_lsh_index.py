import json
import math

import numpy as np
import pytest

from errors import DimensionError, ParameterError, TensorFormatError
from index.lsh_index import MANIFEST_NAME, IndexParams, LshIndex, band_key
from tensors.formats import DenseTensor
from validation.generators import planted_angle_pair, random_cp, random_dense
from validation.oracles import amplified_probability, srp_collision_oracle

SHAPE = (4, 4, 4)


def _params(**overrides):
    values = dict(
        family_kind="cp-e2lsh", shape=SHAPE, rank=2, K_per_band=4, L_bands=8, w=4.0, seed=3
    )
    values.update(overrides)
    return IndexParams(**values)


def _bucket_count(index: LshIndex, item_id: int) -> int:
    return sum(bucket.count(item_id) for table in index.tables for bucket in table.values())


# --- Tests for IndexParams ---


def test_params_validation():
    """Tests positive band sizes and the E2LSH width requirement."""
    with pytest.raises(ParameterError):
        _params(K_per_band=0)
    with pytest.raises(ParameterError):
        _params(L_bands=0)
    with pytest.raises(ParameterError):
        _params(w=None)
    assert _params(family_kind="tt-srp", w=None).w is None


def test_params_dict_round_trip():
    """Tests that params survive the manifest representation."""
    params = _params(distribution="gaussian", rerank=False)
    assert IndexParams.from_dict(params.to_dict()) == params


def test_band_key_depends_on_codes():
    """Tests that band keys are stable and distinguish code tuples."""
    assert band_key((1, -2, 3)) == band_key([1, -2, 3])
    assert band_key((1, -2, 3)) != band_key((1, -2, 4))


# --- Tests for insert and query ---


def test_query_on_empty_index_returns_nothing():
    """Tests the empty index."""
    index = LshIndex(_params())
    assert index.query(random_dense(SHAPE, 1)) == []


def test_query_rejects_wrong_shape():
    """Tests the shape precondition on query and insert."""
    index = LshIndex(_params())
    with pytest.raises(DimensionError):
        index.query(random_dense((4, 4), 1))
    with pytest.raises(DimensionError):
        index.insert(0, random_dense((4, 4), 1))


def test_every_item_retrieves_itself_first():
    """Tests self-retrieval over 1000 items with L=8 bands of K=4."""
    index = LshIndex(_params())
    items = [random_dense(SHAPE, (i, 5)) for i in range(1000)]
    for i, x in enumerate(items):
        index.insert(i, x)
    assert len(index) == 1000
    for i, x in enumerate(items):
        assert i in index.candidates(x)
        assert index.query(x, max_candidates=1) == [i]


def test_factored_items_are_indexed_like_dense_ones():
    """Tests that a CP item and its query hash into the same buckets."""
    index = LshIndex(_params(family_kind="tt-srp", w=None))
    x = random_cp(SHAPE, 3, 7)
    index.insert(42, x)
    assert index.query(x) == [42]


def test_reinsert_replaces_the_previous_placement():
    """Tests that an id occupies exactly one bucket per band after re-insertion."""
    index = LshIndex(_params())
    x, y = random_dense(SHAPE, 1), random_dense(SHAPE, 2)
    index.insert(0, x)
    index.insert(0, y)
    assert len(index) == 1
    assert _bucket_count(index, 0) == index.params.L_bands
    assert index.band_keys(y) == [next(k for k, b in t.items() if 0 in b) for t in index.tables]
    assert index.catalog[0] is y


def test_identical_params_build_identical_buckets():
    """Tests that two indexes with the same seed hash identically."""
    x = random_dense(SHAPE, 9)
    assert LshIndex(_params()).band_keys(x) == LshIndex(_params()).band_keys(x)
    assert LshIndex(_params()).band_keys(x) != LshIndex(_params(seed=4)).band_keys(x)


def test_rerank_orders_by_distance():
    """Tests that E2LSH re-ranking sorts candidates by Frobenius distance."""
    index = LshIndex(_params(w=1e6))
    base = random_dense(SHAPE, 1)
    near = DenseTensor(base.shape, base.values + 0.01)
    far = DenseTensor(base.shape, base.values + 1.0)
    index.insert(0, far)
    index.insert(1, base)
    index.insert(2, near)
    # A huge width puts all three in one bucket.
    assert index.query(base) == [1, 2, 0]
    assert index.query(base, rerank=False) == [0, 1, 2]
    assert index.query(base, max_candidates=2) == [1, 2]


def test_srp_rerank_breaks_ties_by_id():
    """Tests that parallel items tie on cosine and fall back to id order."""
    index = LshIndex(_params(family_kind="cp-srp", w=None))
    x = DenseTensor.from_array(np.ones(SHAPE))
    index.insert(5, x.scaled(2.0))
    index.insert(4, x)
    assert index.query(x) == [4, 5]


def test_max_candidates_must_be_non_negative():
    """Tests that a negative limit is rejected and zero returns nothing."""
    index = LshIndex(_params())
    x = random_dense(SHAPE, 1)
    index.insert(0, x)
    index.insert(1, x)
    assert index.query(x) == [0, 1]
    assert index.query(x, max_candidates=0) == []
    with pytest.raises(ParameterError):
        index.query(x, max_candidates=-1)


# --- Tests for persistence ---


def test_save_and_load_reproduce_queries(tmp_path):
    """Tests that a reloaded index answers queries identically."""
    index = LshIndex(_params(family_kind="tt-e2lsh"))
    items = [random_dense(SHAPE, (i, 8)) for i in range(20)]
    for i, x in enumerate(items):
        index.insert(i, x)
    index.save(tmp_path / "idx")
    loaded = LshIndex.load(tmp_path / "idx")
    assert loaded.params == index.params
    assert len(loaded) == 20
    for x in items[:5]:
        assert loaded.query(x) == index.query(x)
    assert loaded.catalog[3].values.tobytes() == items[3].values.tobytes()


def test_inserts_write_through_to_the_index_directory(tmp_path):
    """Tests that every insert on an attached index updates the files on disk."""
    directory = tmp_path / "idx"
    index = LshIndex(_params(), directory=directory)
    assert json.loads((directory / MANIFEST_NAME).read_text())["items"] == []

    x, y = random_dense(SHAPE, 1), random_dense(SHAPE, 2)
    index.insert(7, x)
    index.insert(3, y)
    manifest = json.loads((directory / MANIFEST_NAME).read_text())
    assert sorted(item_id for item_id, _ in manifest["items"]) == [3, 7]
    assert all((directory / filename).exists() for _, filename in manifest["items"])

    # A loaded index keeps writing through.
    reloaded = LshIndex.load(directory)
    reloaded.insert(9, random_dense(SHAPE, 3))
    assert len(LshIndex.load(directory)) == 3
    assert LshIndex.load(directory).query(x, max_candidates=1) == [7]


def test_corrupt_manifest_is_a_format_error(tmp_path):
    """Tests malformed JSON, missing keys and bad params in the manifest."""
    index = LshIndex(_params())
    index.insert(0, random_dense(SHAPE, 1))
    path = index.save(tmp_path)
    good = json.loads(path.read_text())

    path.write_text('{"params": {,}')
    with pytest.raises(TensorFormatError):
        LshIndex.load(tmp_path)

    path.write_text(json.dumps({"items": good["items"]}))
    with pytest.raises(TensorFormatError):
        LshIndex.load(tmp_path)

    good["params"]["K_per_band"] = 0
    path.write_text(json.dumps(good))
    with pytest.raises(TensorFormatError):
        LshIndex.load(tmp_path)


# --- Tests for amplification ---


def _retrieval_frequency(theta: float, builds: int) -> float:
    x, y = planted_angle_pair(SHAPE, theta, 12)
    hits = 0
    for build in range(builds):
        index = LshIndex(_params(family_kind="naive-srp", w=None, K_per_band=8, L_bands=16, seed=build))
        index.insert(0, y)
        hits += 0 in index.candidates(x)
    return hits / builds


def test_close_pair_is_almost_always_retrieved():
    """Tests retrieval at theta = 0.1 with K=8, L=16."""
    expected = amplified_probability(srp_collision_oracle(0.1), 8, 16)
    assert expected > 0.99
    assert _retrieval_frequency(0.1, 100) >= 0.95


@pytest.mark.slow
def test_orthogonal_pair_is_rarely_retrieved():
    """Tests retrieval at theta = pi/2 against 1 - (1 - 0.5^8)^16."""
    expected = amplified_probability(0.5, 8, 16)
    assert expected == pytest.approx(0.0607, abs=1e-4)
    assert _retrieval_frequency(math.pi / 2, 300) <= expected + 0.05


def test_amplification_rejects_bad_parameters():
    """Tests the K, L and p preconditions of the amplification law."""
    with pytest.raises(ParameterError):
        amplified_probability(1.5, 4, 4)
    with pytest.raises(ParameterError):
        amplified_probability(0.5, 0, 4)
    assert np.isclose(amplified_probability(1.0, 3, 2), 1.0)
