import subprocess
import sys

import numpy as np
import pytest

from specrag.embeddings import HashEmbedder, cosine, l2_normalize, tokenize
from specrag.errors import IntegrityError


class TestTokenize:
    def test_words_lowercased(self):
        assert tokenize("Home Subscriber Server") == ["home", "subscriber", "server"]

    def test_case_folding(self):
        assert tokenize("HSS hss") == ["hss", "hss"]

    def test_punctuation_splits(self):
        assert tokenize("The HSS, stores; data!") == ["the", "hss", "stores", "data"]

    def test_dotted_numbers_stay_whole(self):
        assert tokenize("see TS 23.002 clause 4.1.2") == ["see", "ts", "23.002", "clause", "4.1.2"]

    def test_intra_word_hyphens_kept(self):
        assert tokenize("e-UTRAN inter-working") == ["e-utran", "inter-working"]


class TestCosine:
    def test_identity(self):
        assert cosine([1, 0], [1, 0]) == 1.0

    def test_orthogonal(self):
        assert cosine([1, 0], [0, 1]) == 0.0

    def test_analytic_value(self):
        assert cosine([1, 1], [1, 0]) == pytest.approx(1 / np.sqrt(2), abs=1e-9)

    def test_zero_vector_scores_zero(self):
        assert cosine([0, 0], [1, 0]) == 0.0

    def test_dimension_mismatch(self):
        with pytest.raises(IntegrityError):
            cosine([1, 0], [1, 0, 0])

    def test_self_similarity_is_one(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            v = rng.standard_normal(32)
            assert cosine(v, v) == pytest.approx(1.0, abs=1e-9)

    def test_symmetric_exactly(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            u, v = rng.standard_normal((2, 48))
            assert cosine(u, v) == cosine(v, u)

    def test_scale_invariance(self):
        rng = np.random.default_rng(3)
        for alpha in (0.001, 0.5, 3.0, 1e6):
            u, v = rng.standard_normal((2, 16))
            assert cosine(alpha * u, v) == pytest.approx(cosine(u, v), abs=1e-9)


class TestHashEmbedder:
    def test_same_text_same_vector(self):
        e = HashEmbedder(dim=64, seed=0)
        v1, v2 = e.embed_texts(["the same text", "the same text"])
        assert np.array_equal(v1, v2)

    def test_dim_and_unit_norm(self):
        e = HashEmbedder(dim=64, seed=0)
        (v,) = e.embed_texts(["any text at all"])
        assert v.shape == (64,)
        assert np.linalg.norm(v) == pytest.approx(1.0, abs=1e-6)

    def test_distinct_tokens_not_identical(self):
        e = HashEmbedder(dim=64, seed=0)
        va, vb = e.embed_texts(["a", "b"])
        assert cosine(va, vb) < 1.0
        # near-orthogonal: |cos| is O(1/sqrt(dim))
        assert abs(cosine(va, vb)) < 0.5

    def test_embed_tokens_counts_and_case_fold(self):
        e = HashEmbedder(dim=32, seed=0)
        pairs = e.embed_tokens("Home Subscriber Server")
        assert [t for t, _ in pairs] == ["home", "subscriber", "server"]
        pairs2 = e.embed_tokens("HSS hss")
        assert len(pairs2) == 2
        assert np.array_equal(pairs2[0][1], pairs2[1][1])

    def test_token_vector_stable_across_calls(self):
        e = HashEmbedder(dim=32, seed=5)
        a = dict(e.embed_tokens("the server responds"))["server"]
        b = dict(e.embed_tokens("another server"))["server"]
        assert np.array_equal(a, b)

    def test_cross_process_reproducible(self):
        e = HashEmbedder(dim=16, seed=42)
        local = e.token_vector("server").tobytes().hex()
        code = (
            "from specrag.embeddings import HashEmbedder;"
            "print(HashEmbedder(dim=16, seed=42).token_vector('server').tobytes().hex())"
        )
        remote = subprocess.run(
            [sys.executable, "-c", code], capture_output=True, text=True, check=True
        ).stdout.strip()
        assert remote == local

    def test_seed_changes_vectors(self):
        v0 = HashEmbedder(dim=32, seed=0).token_vector("server")
        v1 = HashEmbedder(dim=32, seed=1).token_vector("server")
        assert not np.array_equal(v0, v1)

    def test_empty_inputs_rejected(self):
        e = HashEmbedder(dim=8)
        with pytest.raises(ValueError):
            e.embed_texts([])
        with pytest.raises(ValueError):
            e.embed_texts(["ok", ""])
        with pytest.raises(ValueError):
            e.embed_tokens("")

    def test_tokenless_text_gets_zero_vector(self):
        e = HashEmbedder(dim=8)
        (v,) = e.embed_texts(["!!!"])
        assert np.linalg.norm(v) == 0.0

    def test_text_vector_is_normalized_token_mean(self):
        e = HashEmbedder(dim=32, seed=0)
        (v,) = e.embed_texts(["home subscriber server"])
        mean = np.mean(
            [e.token_vector(t) for t in ("home", "subscriber", "server")], axis=0
        )
        assert np.allclose(v, l2_normalize(mean), atol=1e-12)
