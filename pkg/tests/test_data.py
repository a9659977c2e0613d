import json

import numpy as np
import pytest

from distrank.data import (
    AMBIGUOUS,
    CLEAN,
    GenConfig,
    RankingDataset,
    feature_map,
    generate,
    load_jsonl,
    save_jsonl,
    split,
)
from distrank.errors import DatasetFormatError, DegenerateSplitError, UnsupportedRelationError
from distrank.ranking import OrdinalPair


def agreement(ds):
    i, j, r, _ = ds.pair_arrays()
    return np.where(ds.depths[i] > ds.depths[j], 1, -1) == r


class TestGenerate:
    def test_noise_free_labels_agree(self, small_dataset):
        assert agreement(small_dataset).all()

    def test_shape(self):
        ds = generate(GenConfig(item_count=100, pairs_per_item=5, seed=0))
        assert len(ds.pairs) == 500
        i, j, _, w = ds.pair_arrays()
        assert i.max() < 100 and j.max() < 100
        assert np.all(i != j)
        assert np.all(w == 1.0)
        assert ds.features.shape == (100, 5)

    def test_depth_range_and_no_ties(self, small_dataset):
        d = small_dataset.depths
        assert d.min() >= 1.0 and d.max() <= 10.0
        i, j, _, _ = small_dataset.pair_arrays()
        assert np.all(d[i] != d[j])

    def test_flip_rate(self):
        ds = generate(GenConfig(item_count=10_000, pairs_per_item=10, label_flip_prob=0.1, seed=11))
        assert len(ds.pairs) == 100_000
        assert abs((~agreement(ds)).mean() - 0.10) <= 0.005
        assert ds.label_flip_prob == 0.1

    def test_deterministic(self):
        cfg = GenConfig(item_count=300, label_flip_prob=0.2, ambiguous_fraction=0.3, seed=5)
        assert generate(cfg).equals(generate(cfg))
        assert not generate(cfg).equals(generate(GenConfig(item_count=300, seed=6)))

    def test_feature_map(self):
        f = feature_map(np.array([1.0, 10.0]), 4)
        np.testing.assert_allclose(f, [[1, 0.1, 0, 0], [10, 10, np.log(10), 0]])

    def test_ambiguous_items_noisier(self):
        cfg = GenConfig(item_count=4000, ambiguous_fraction=0.3, base_noise_scale=0.02, ambiguous_noise_scale=0.1)
        ds = generate(cfg)
        resid = ds.features - feature_map(ds.depths, cfg.feature_dim)
        amb = np.array([c == AMBIGUOUS for c in ds.noise_class])
        assert 0.25 < amb.mean() < 0.35
        assert resid[amb].std() == pytest.approx(0.1, rel=0.05)
        assert resid[~amb].std() == pytest.approx(0.02, rel=0.05)
        assert set(ds.noise_class) == {CLEAN, AMBIGUOUS}

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"label_flip_prob": 0.5},
            {"label_flip_prob": -0.1},
            {"ambiguous_fraction": 1.5},
            {"item_count": 1},
            {"feature_dim": 2},
            {"pairs_per_item": 0},
            {"ambiguous_noise_scale": -1},
        ],
    )
    def test_invalid_config(self, kwargs):
        with pytest.raises(ValueError):
            GenConfig(**kwargs)


class TestSplit:
    def test_half_split(self):
        ds = generate(GenConfig(item_count=100, pairs_per_item=5, seed=1))
        tr, te = split(ds, 0.5, seed=0)
        assert tr.n_items == te.n_items == 50
        assert tr.split == "train" and te.split == "test"

    def test_disjoint_and_consistent(self, small_dataset):
        tr, te = split(small_dataset, 0.3, seed=2)
        assert set(tr.depths.tolist()).isdisjoint(te.depths.tolist())
        assert tr.n_items + te.n_items == small_dataset.n_items
        for side in (tr, te):
            assert agreement(side).all()
        original = {(small_dataset.depths[p.i], small_dataset.depths[p.j]) for p in small_dataset.pairs}
        tr_keys = {(tr.depths[p.i], tr.depths[p.j]) for p in tr.pairs}
        te_keys = {(te.depths[p.i], te.depths[p.j]) for p in te.pairs}
        assert tr_keys.isdisjoint(te_keys)
        assert tr_keys | te_keys <= original

    @pytest.mark.parametrize("f", [0.2, 0.5])
    def test_surviving_fraction(self, f):
        ds = generate(GenConfig(item_count=5000, pairs_per_item=5, seed=4))
        tr, te = split(ds, f, seed=9)
        kept = (len(tr.pairs) + len(te.pairs)) / len(ds.pairs)
        assert kept == pytest.approx((1 - f) ** 2 + f**2, abs=0.01)

    def test_deterministic(self, small_dataset):
        a = split(small_dataset, 0.2, seed=5)
        b = split(small_dataset, 0.2, seed=5)
        assert a[0].equals(b[0]) and a[1].equals(b[1])

    def test_degenerate(self):
        ds = RankingDataset(np.zeros((4, 3)), [OrdinalPair(0, 1, 1)])
        with pytest.raises(DegenerateSplitError):
            split(ds, 0.5, seed=0)

    def test_bad_fraction(self, small_dataset):
        with pytest.raises(ValueError):
            split(small_dataset, 1.0)


class TestJsonl:
    def test_round_trip(self, tmp_path):
        ds = generate(GenConfig(item_count=50, ambiguous_fraction=0.5, seed=2))
        ds.pairs[0] = OrdinalPair(ds.pairs[0].i, ds.pairs[0].j, ds.pairs[0].relation, 0.37)
        save_jsonl(ds, tmp_path / "d.jsonl")
        back = load_jsonl(tmp_path / "d.jsonl")
        assert back.equals(ds)
        assert back.pairs[0].weight == 0.37

    def _write(self, tmp_path, lines):
        path = tmp_path / "d.jsonl"
        path.write_text("\n".join(json.dumps(x) if not isinstance(x, str) else x for x in lines) + "\n")
        return path

    ITEMS = [{"type": "item", "id": 0, "features": [1.0, 2.0]}, {"type": "item", "id": 1, "features": [0.0, 1.5]}]

    def test_missing_weight_defaults(self, tmp_path):
        ds = load_jsonl(self._write(tmp_path, self.ITEMS + [{"type": "pair", "i": 0, "j": 1, "r": -1}]))
        assert ds.pairs == [OrdinalPair(0, 1, -1, 1.0)]
        assert ds.depths is None

    def test_equal_relation_names_line(self, tmp_path):
        path = self._write(tmp_path, self.ITEMS + [{"type": "pair", "i": 0, "j": 1, "r": 0}])
        with pytest.raises(UnsupportedRelationError, match="line 3"):
            load_jsonl(path)

    @pytest.mark.parametrize(
        "bad, line",
        [
            ('{"type": "pair", "i": 0,', 3),
            ({"type": "pair", "i": 0, "j": 1, "r": 2}, 3),
            ({"type": "pair", "i": 0, "j": 5, "r": 1}, 3),
            ({"type": "pair", "i": 0, "r": 1}, 3),
            ({"type": "pair", "i": 0, "j": 1, "r": 1, "w": -1}, 3),
            ({"type": "thing"}, 3),
        ],
    )
    def test_schema_errors(self, tmp_path, bad, line):
        path = self._write(tmp_path, self.ITEMS + [bad])
        with pytest.raises(DatasetFormatError, match=f"line {line}") as exc:
            load_jsonl(path)
        assert exc.value.line == line

    def test_non_consecutive_ids(self, tmp_path):
        path = self._write(tmp_path, [{"type": "item", "id": 3, "features": [1.0]}])
        with pytest.raises(DatasetFormatError, match="line 1"):
            load_jsonl(path)
