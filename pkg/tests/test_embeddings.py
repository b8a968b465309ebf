import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adaptest.embeddings import (
    EmbeddingModel,
    embed_response,
    fit_lsa,
    fit_projection,
    load_embeddings,
    project_embeddings,
    save_embeddings,
    _log_entropy_matrix,
)
from adaptest.errors import (
    AllWordsOutOfVocabulary,
    DegenerateInput,
    EmptyCorpus,
    MalformedRow,
    RankTooLarge,
)


def random_corpus(rng, n_docs=50, vocab_size=30, doc_len=12):
    words = [f"w{i}" for i in range(vocab_size)]
    return [
        [words[k] for k in rng.integers(0, vocab_size, size=doc_len)]
        for _ in range(n_docs)
    ]


class TestLogEntropyWeighting:
    def test_uniform_term_gets_zero_weight(self):
        # a word appearing once in every document has maximal entropy
        corpus = [["filler", f"unique{i}"] for i in range(5)]
        weighted, vocab = _log_entropy_matrix(corpus)
        assert np.allclose(weighted[vocab["filler"]], 0.0, atol=1e-12)
        # a word confined to one document keeps full weight log(1+tf)
        assert weighted[vocab["unique0"], 0] == pytest.approx(np.log(2.0))

    def test_single_document_corpus(self):
        weighted, vocab = _log_entropy_matrix([["a", "a", "b"]])
        assert weighted[vocab["a"], 0] == pytest.approx(np.log(3.0))
        assert weighted[vocab["b"], 0] == pytest.approx(np.log(2.0))


class TestFitLsa:
    def test_empty_corpus(self):
        with pytest.raises(EmptyCorpus):
            fit_lsa([])
        with pytest.raises(EmptyCorpus):
            fit_lsa([[], []])

    def test_rank_too_large(self):
        corpus = [["a", "b"], ["b", "c"]]
        with pytest.raises(RankTooLarge):
            fit_lsa(corpus, d=1, rank=5)
        with pytest.raises(RankTooLarge):
            fit_lsa(corpus, d=3, rank=2)

    def test_disjoint_documents_give_orthogonal_words(self):
        model = fit_lsa([["apple"], ["stone"]], d=2)
        dot = float(model.vector("apple") @ model.vector("stone"))
        assert abs(dot) < 1e-10

    def test_full_rank_svd_reconstructs_weighted_matrix(self):
        rng = np.random.default_rng(0)
        corpus = random_corpus(rng)
        weighted, vocab = _log_entropy_matrix(corpus)
        r = min(weighted.shape)
        u, s, vt = np.linalg.svd(weighted, full_matrices=False)
        recon = (u[:, :r] * s[:r]) @ vt[:r]
        assert np.max(np.abs(recon - weighted)) <= 1e-6

    def test_truncated_factors_are_orthonormal(self):
        rng = np.random.default_rng(1)
        weighted, _ = _log_entropy_matrix(random_corpus(rng))
        u, s, vt = np.linalg.svd(weighted, full_matrices=False)
        k = 10
        assert np.allclose(u[:, :k].T @ u[:, :k], np.eye(k), atol=1e-8)
        assert np.allclose(vt[:k] @ vt[:k].T, np.eye(k), atol=1e-8)

    def test_scaling_flag(self):
        rng = np.random.default_rng(2)
        corpus = random_corpus(rng, n_docs=20, vocab_size=15)
        scaled = fit_lsa(corpus, d=3)
        unscaled = fit_lsa(corpus, d=3, scale_singular=False)
        # unscaled columns are unit-norm left-singular coordinates
        norms = np.linalg.norm(unscaled.vectors, axis=0)
        assert np.allclose(norms, 1.0, atol=1e-8)
        ratios = np.linalg.norm(scaled.vectors, axis=0) / norms
        assert ratios[0] >= ratios[1] >= ratios[2] > 0

    def test_vector_count_matches_vocab(self):
        rng = np.random.default_rng(3)
        corpus = random_corpus(rng, n_docs=12, vocab_size=9)
        model = fit_lsa(corpus, d=4)
        assert model.vectors.shape == (9, 4)
        assert model.d == 4
        assert model.provenance == "lsa"


class TestFitProjection:
    def test_line_in_3d_recovers_direction(self):
        rng = np.random.default_rng(0)
        direction = np.array([1.0, 2.0, -2.0]) / 3.0
        t = rng.normal(size=200)
        points = np.outer(t, direction)
        proj = fit_projection(points, 1)
        cosine = abs(float(proj.components[:, 0] @ direction))
        assert cosine >= 1 - 1e-8

    def test_full_dimension_preserves_distances(self):
        rng = np.random.default_rng(1)
        x = rng.normal(size=(40, 5))
        proj = fit_projection(x, 5)
        z = np.vstack([proj.apply(row) for row in x])
        for i in (0, 7, 23):
            for j in (3, 11, 39):
                orig = np.linalg.norm(x[i] - x[j])
                new = np.linalg.norm(z[i] - z[j])
                assert new == pytest.approx(orig, abs=1e-8)

    def test_isotropic_gaussian_evens_out_variance(self):
        rng = np.random.default_rng(2)
        d_in = 5
        x = rng.normal(size=(10_000, d_in))
        proj = fit_projection(x, 2)
        total = x.var(axis=0, ddof=1).sum()
        ratios = proj.explained_variance / total
        assert np.all(np.abs(ratios - 1 / d_in) < 0.03)

    def test_orthonormal_columns(self):
        rng = np.random.default_rng(3)
        proj = fit_projection(rng.normal(size=(50, 6)), 3)
        gram = proj.components.T @ proj.components
        assert np.allclose(gram, np.eye(3), atol=1e-8)

    def test_variance_non_increasing(self):
        rng = np.random.default_rng(4)
        x = rng.normal(size=(300, 6)) * np.array([5, 4, 3, 2, 1, 0.5])
        proj = fit_projection(x, 4)
        ev = proj.explained_variance
        assert np.all(np.diff(ev) <= 1e-12)

    def test_zero_variance_rejected(self):
        with pytest.raises(DegenerateInput):
            fit_projection(np.ones((10, 3)), 1)

    def test_dimension_guards(self):
        rng = np.random.default_rng(5)
        with pytest.raises(RankTooLarge):
            fit_projection(rng.normal(size=(10, 3)), 4)
        with pytest.raises(RankTooLarge):
            fit_projection(rng.normal(size=(3, 5)), 3)

    def test_projection_idempotence(self):
        rng = np.random.default_rng(6)
        x = rng.normal(size=(60, 4))
        proj = fit_projection(x, 4)
        z = np.vstack([proj.apply(row) for row in x])
        proj2 = fit_projection(z, 4)
        z2 = np.vstack([proj2.apply(row) for row in z])
        # centered orthonormal change of basis: distances unchanged both times
        d1 = np.linalg.norm(z[0] - z[1])
        d2 = np.linalg.norm(z2[0] - z2[1])
        assert d2 == pytest.approx(d1, abs=1e-8)

    def test_project_embeddings(self):
        rng = np.random.default_rng(7)
        vocab = {f"w{i}": i for i in range(30)}
        model = EmbeddingModel(vocab, rng.normal(size=(30, 8)), provenance="lsa")
        proj = fit_projection(model.vectors, 2)
        small = project_embeddings(model, proj)
        assert small.d == 2
        assert small.provenance == "projected"
        assert np.allclose(small.vector("w3"), proj.apply(model.vector("w3")))


class TestEmbedResponse:
    def make_model(self):
        vocab = {"sad": 0, "tired": 1, "calm": 2}
        vectors = np.array([[1.0, 0.0], [0.0, 2.0], [3.0, 3.0]])
        return EmbeddingModel(vocab, vectors)

    def test_single_word_is_its_vector(self):
        model = self.make_model()
        assert np.array_equal(embed_response(model, ["sad"]), model.vector("sad"))

    def test_repeats_do_not_change_mean(self):
        model = self.make_model()
        assert np.array_equal(
            embed_response(model, ["sad", "sad"]), embed_response(model, ["sad"])
        )

    def test_oov_words_skipped(self):
        model = self.make_model()
        got = embed_response(model, ["sad", "tired", "zzz"])
        assert np.allclose(got, [0.5, 1.0])

    def test_all_oov_raises(self):
        with pytest.raises(AllWordsOutOfVocabulary):
            embed_response(self.make_model(), ["zzz", "yyy"])
        with pytest.raises(AllWordsOutOfVocabulary):
            embed_response(self.make_model(), [])

    @given(st.permutations(["sad", "tired", "calm", "zzz"]))
    @settings(max_examples=24, deadline=None)
    def test_permutation_invariant(self, words):
        model = self.make_model()
        base = embed_response(model, ["sad", "tired", "calm", "zzz"])
        assert np.allclose(embed_response(model, list(words)), base)


class TestEmbeddingIo:
    def test_round_trip_exact(self, tmp_path):
        rng = np.random.default_rng(0)
        vocab = {f"word{i}": i for i in range(20)}
        model = EmbeddingModel(vocab, rng.normal(size=(20, 10)))
        path = tmp_path / "emb.csv"
        save_embeddings(path, model)
        again = load_embeddings(path)
        assert again.vocabulary == model.vocabulary
        assert np.array_equal(again.vectors, model.vectors)

    def test_header_validation(self, tmp_path):
        p = tmp_path / "emb.csv"
        p.write_text("term,v1\nhello,1.0\n")
        with pytest.raises(MalformedRow):
            load_embeddings(p)

    def test_duplicate_word(self, tmp_path):
        p = tmp_path / "emb.csv"
        p.write_text("word,v1\na,1.0\na,2.0\n")
        with pytest.raises(MalformedRow):
            load_embeddings(p)

    def test_bad_number(self, tmp_path):
        p = tmp_path / "emb.csv"
        p.write_text("word,v1\na,oops\n")
        with pytest.raises(MalformedRow):
            load_embeddings(p)

    def test_empty_table(self, tmp_path):
        p = tmp_path / "emb.csv"
        p.write_text("word,v1\n")
        with pytest.raises(EmptyCorpus):
            load_embeddings(p)
