"""Embedding model: composition, queries, persistence, and trainer math."""

import math

import numpy as np
import pytest

from conftest import TOY_CONFIG, make_model, unit_circle_vectors
from varfam.embeddings import EmbeddingConfig, EmbeddingModel, ModelError, ZeroVectorError
from varfam.ngrams import extract_ngrams, hash_ngram
from varfam.training import (
    apply_pair_update,
    build_vocabulary,
    negative_sampling_loss,
    train,
)


class TestConfigValidation:
    def test_defaults_valid(self):
        EmbeddingConfig().validate()

    @pytest.mark.parametrize(
        "field,value",
        [
            ("epochs", 0),
            ("vector_size", 0),
            ("window", 0),
            ("min_count", 0),
            ("min_n", 0),
            ("max_n", 2),  # below min_n default of 3
            ("sg", 0),
            ("bucket_count", 0),
        ],
    )
    def test_invalid_rejected(self, field, value):
        config = EmbeddingConfig(**{field: value})
        with pytest.raises(ModelError):
            config.validate()


class TestWordVector:
    def test_shape_and_finite(self, toy_model):
        vec = toy_model.word_vector("muer")
        assert vec.shape == (TOY_CONFIG["vector_size"],)
        assert np.all(np.isfinite(vec))

    def test_oov_composition_is_ngram_mean(self):
        rng = np.random.default_rng(0)
        model = make_model(["mat"], rng.normal(size=(1, 4)), min_n=3, max_n=5, bucket_count=64)
        model.ngram_vectors[:] = rng.normal(size=model.ngram_vectors.shape).astype(np.float32)
        grams = extract_ngrams("zut", 3, 5)
        ids = [hash_ngram(g, 64) for g in grams]
        expected = model.ngram_vectors[ids].sum(axis=0, dtype=np.float64) / len(ids)
        assert np.array_equal(model.word_vector("zut"), expected)

    def test_oov_same_ngram_multiset_same_vector(self):
        # with 1-grams only, "ab" and "ba" wrap to the same character multiset
        rng = np.random.default_rng(1)
        model = make_model(["xx"], rng.normal(size=(1, 4)), min_n=1, max_n=1, bucket_count=64)
        model.ngram_vectors[:] = rng.normal(size=model.ngram_vectors.shape).astype(np.float32)
        assert np.array_equal(model.word_vector("ab"), model.word_vector("ba"))

    def test_no_ngrams_oov_zero_vector(self, caplog):
        model = make_model(["mat"], np.ones((1, 4)), min_n=4, max_n=7)
        with caplog.at_level("WARNING"):
            vec = model.word_vector("a")  # wrapped length 3 < min_n
        assert np.array_equal(vec, np.zeros(4))
        assert any("zero vector" in r.message for r in caplog.records)

    def test_in_vocab_includes_word_vector(self):
        model = make_model(["mat"], np.ones((1, 4)))
        ids = model.vocab_ngram_ids(0)
        assert np.allclose(model.word_vector("mat"), 1.0 / (1 + ids.size))


class TestCosine:
    def test_self_similarity(self, toy_model):
        for token in ("muer", "zäit", "laang"):
            assert toy_model.cosine(token, token) == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal(self):
        model = make_model(["aa", "bb"], unit_circle_vectors([0, 90]))
        assert model.cosine("aa", "bb") == pytest.approx(0.0, abs=1e-12)

    def test_closed_form_45_degrees(self):
        model = make_model(["aa", "bb"], np.array([[1.0, 1.0], [1.0, 0.0]]))
        assert model.cosine("aa", "bb") == pytest.approx(math.sqrt(2) / 2, abs=1e-12)

    def test_symmetry_exact(self, toy_model):
        assert toy_model.cosine("muer", "zäit") == toy_model.cosine("zäit", "muer")

    def test_zero_vector_raises(self):
        model = make_model(["mat"], np.ones((1, 4)), min_n=4, max_n=7)
        with pytest.raises(ZeroVectorError):
            model.cosine("mat", "a")


class TestTopNeighbors:
    def oracle(self, model, w, n):
        scores = []
        query = model.word_vector(w)
        query = query / np.linalg.norm(query)
        for token in model.tokens:
            if token == w:
                continue
            vec = model.word_vector(token)
            vec = vec / np.linalg.norm(vec)
            scores.append((token, float(query @ vec)))
        scores.sort(key=lambda tc: (-tc[1], tc[0]))
        return scores[:n]

    def test_matches_bruteforce_on_200_token_model(self):
        rng = np.random.default_rng(23)
        tokens = sorted(f"tok{i:03d}" for i in range(200))
        model = make_model(tokens, rng.normal(size=(200, 16)))
        for w in ("tok000", "tok077", "tok199"):
            got = model.top_neighbors(w, 10)
            expected = self.oracle(model, w, 10)
            assert [t for t, _ in got] == [t for t, _ in expected]
            assert np.allclose([s for _, s in got], [s for _, s in expected], atol=1e-12)

    def test_n_larger_than_vocab(self):
        model = make_model(["aa", "bb", "cc"], np.eye(3))
        result = model.top_neighbors("aa", 100)
        assert sorted(t for t, _ in result) == ["bb", "cc"]

    def test_never_contains_self(self, toy_model):
        assert all(t != "muer" for t, _ in toy_model.top_neighbors("muer", 50))

    def test_nonpositive_n_empty(self, toy_model):
        assert toy_model.top_neighbors("muer", 0) == []
        assert toy_model.top_neighbors("muer", -3) == []

    def test_tie_break_lexicographic(self):
        # three identical vectors: neighbors must come back in token order
        model = make_model(["cc", "aa", "bb"], np.ones((3, 2)))
        assert [t for t, _ in model.top_neighbors("cc", 2)] == ["aa", "bb"]

    def test_batch_matches_single(self, toy_model):
        tokens = toy_model.tokens[:5]
        batched = toy_model.top_neighbors_many(tokens, 7)
        for token, rows in zip(tokens, batched):
            assert rows == toy_model.top_neighbors(token, 7)


class TestTraining:
    def test_build_vocabulary_filters_and_orders(self):
        records = [["b", "a", "b"], ["a", "b", "c"]]
        tokens, freqs, total = build_vocabulary(records, min_count=2)
        assert tokens == ["b", "a"]  # descending frequency, ties by token
        assert freqs.tolist() == [3, 2]
        assert total == 5

    def test_empty_vocabulary_fatal(self):
        with pytest.raises(ModelError, match="empty vocabulary"):
            train([["rare"]], EmbeddingConfig(min_count=10, bucket_count=16))

    def test_shared_slot_tokens_converge(self, toy_model):
        assert toy_model.cosine("muer", "muar") > toy_model.cosine("muer", "apel")
        assert toy_model.cosine("zäit", "zeit") > toy_model.cosine("zäit", "rout")

    def test_fixed_seed_bit_reproducible(self, toy_corpus):
        from varfam.ingest import TokenizedCorpus

        corpus = TokenizedCorpus(toy_corpus)
        config = EmbeddingConfig(
            vector_size=16, min_count=5, epochs=2, bucket_count=1000, rng_seed=3
        )
        m1 = train(corpus, config)
        m2 = train(corpus, config)
        assert np.array_equal(m1.word_vectors, m2.word_vectors)
        assert np.array_equal(m1.ngram_vectors, m2.ngram_vectors)
        assert m1.tokens == m2.tokens

    def test_norms_sane_after_training(self, toy_model):
        assert np.all(np.isfinite(toy_model.word_vectors))
        assert np.all(np.isfinite(toy_model.ngram_vectors))
        composed = toy_model.composed_matrix()
        norms = np.linalg.norm(composed, axis=1)
        assert np.all(np.isfinite(norms))
        assert norms.max() < 1e3

    def test_multiworker_trains(self, toy_corpus):
        from varfam.ingest import TokenizedCorpus

        corpus = TokenizedCorpus(toy_corpus)
        config = EmbeddingConfig(
            vector_size=16, min_count=5, epochs=2, bucket_count=1000, rng_seed=3
        )
        model = train(corpus, config, workers=2)
        assert np.all(np.isfinite(model.word_vectors))


class TestGradients:
    def setup_mini(self, seed=3):
        rng = np.random.default_rng(seed)
        vocab, buckets, dim = 8, 12, 4
        word = rng.normal(0, 0.5, (vocab, dim))
        ngram = rng.normal(0, 0.5, (buckets, dim))
        out = rng.normal(0, 0.5, (vocab, dim))
        ngram_ids = np.array([1, 4, 7], dtype=np.int32)
        negatives = np.array([0, 3, 6], dtype=np.int32)
        return word, ngram, out, 2, ngram_ids, 5, negatives

    def test_analytic_matches_finite_differences(self):
        word, ngram, out, wid, ngram_ids, target, negatives = self.setup_mini()
        w2, n2, o2 = word.copy(), ngram.copy(), out.copy()
        apply_pair_update(w2, n2, o2, wid, ngram_ids, target, negatives, alpha=1.0)
        grads = {"word": word - w2, "ngram": ngram - n2, "out": out - o2}

        def loss(w, n, o):
            return negative_sampling_loss(w, n, o, wid, ngram_ids, target, negatives)

        eps = 1e-6
        worst = 0.0
        for name, base in (("word", word), ("ngram", ngram), ("out", out)):
            for idx in np.ndindex(base.shape):
                plus, minus = base.copy(), base.copy()
                plus[idx] += eps
                minus[idx] -= eps
                args_plus = {name: plus}
                args_minus = {name: minus}
                fd = (
                    loss(args_plus.get("word", word), args_plus.get("ngram", ngram),
                         args_plus.get("out", out))
                    - loss(args_minus.get("word", word), args_minus.get("ngram", ngram),
                           args_minus.get("out", out))
                ) / (2 * eps)
                analytic = grads[name][idx]
                if fd == 0.0 and analytic == 0.0:
                    continue
                worst = max(worst, abs(analytic - fd) / max(abs(fd), 1e-12))
        assert worst <= 1e-4, f"gradient mismatch: relative error {worst:.2e}"

    def test_update_scales_linearly_with_alpha(self):
        word, ngram, out, wid, ngram_ids, target, negatives = self.setup_mini(seed=9)
        w1, n1, o1 = word.copy(), ngram.copy(), out.copy()
        apply_pair_update(w1, n1, o1, wid, ngram_ids, target, negatives, alpha=1.0)
        w2, n2, o2 = word.copy(), ngram.copy(), out.copy()
        apply_pair_update(w2, n2, o2, wid, ngram_ids, target, negatives, alpha=0.5)
        assert np.allclose(word - w2, 0.5 * (word - w1), atol=1e-12)

    def test_float32_kernel_matches_float64(self):
        word, ngram, out, wid, ngram_ids, target, negatives = self.setup_mini(seed=4)
        w64, n64, o64 = word.copy(), ngram.copy(), out.copy()
        apply_pair_update(w64, n64, o64, wid, ngram_ids, target, negatives, alpha=0.1)
        w32 = word.astype(np.float32)
        n32 = ngram.astype(np.float32)
        o32 = out.astype(np.float32)
        apply_pair_update(w32, n32, o32, wid, ngram_ids, target, negatives, alpha=0.1)
        assert np.allclose(w32, w64, atol=1e-5)
        assert np.allclose(n32, n64, atol=1e-5)
        assert np.allclose(o32, o64, atol=1e-5)


class TestPersistence:
    def test_roundtrip(self, toy_model, tmp_path):
        path = tmp_path / "model.bin"
        toy_model.save(path)
        loaded = EmbeddingModel.load(path)
        assert loaded.tokens == toy_model.tokens
        assert np.array_equal(loaded.word_vectors, toy_model.word_vectors)
        assert np.array_equal(loaded.ngram_vectors, toy_model.ngram_vectors)
        assert loaded.config == toy_model.config
        assert np.array_equal(loaded.frequencies, toy_model.frequencies)

    def test_saved_files_byte_identical(self, toy_model, tmp_path):
        a, b = tmp_path / "a.bin", tmp_path / "b.bin"
        toy_model.save(a)
        toy_model.save(b)
        assert a.read_bytes() == b.read_bytes()

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "junk.bin"
        path.write_bytes(b"NOPE" + b"\0" * 64)
        with pytest.raises(ModelError, match="magic"):
            EmbeddingModel.load(path)

    def test_truncated_file_rejected(self, toy_model, tmp_path):
        path = tmp_path / "model.bin"
        toy_model.save(path)
        clipped = tmp_path / "clipped.bin"
        clipped.write_bytes(path.read_bytes()[: path.stat().st_size // 2])
        with pytest.raises(ModelError, match="corrupt"):
            EmbeddingModel.load(clipped)

    def test_vec_export(self, toy_model, tmp_path):
        path = tmp_path / "model.vec"
        toy_model.export_vec(path)
        lines = path.read_text(encoding="utf-8").splitlines()
        header = lines[0].split()
        assert int(header[0]) == len(toy_model)
        assert int(header[1]) == toy_model.config.vector_size
        assert len(lines) == len(toy_model) + 1
        first = lines[1].split()
        assert first[0] in toy_model.token_index
        assert len(first) == 1 + toy_model.config.vector_size
