import math

import numpy as np
import pytest

from sigrep.bounds import (
    HWeightConfig,
    a_norm_pathwise,
    ah_norm,
    h_weight,
    l2_bound,
    level_h_weights,
    lp_bound,
    truncation_tail,
)
from sigrep.brownian import TimeGrid, sample_brownian
from sigrep.signature import signature_stream
from sigrep.tensor import TruncatedTensor, concat_mul
from sigrep.words import Word, iter_words

from oracles import random_tensor
from test_tensor import word_tensor


class TestHWeight:
    def test_config_validation(self):
        with pytest.raises(ValueError):
            HWeightConfig(1.5)

    def test_empty_word_is_the_constant(self):
        cfg = HWeightConfig(2.5)
        assert h_weight((), 0.7, cfg) == pytest.approx(2.5)
        assert h_weight((), 0.0, cfg) == pytest.approx(2.5)

    def test_single_noise_letter(self):
        t, c = 0.9, 2.0
        expected = c * (2 * t) ** 0.5 / 2**0.25
        assert h_weight((2,), t, HWeightConfig(c)) == pytest.approx(expected, rel=1e-13)

    def test_direct_formula_round_trip(self):
        # log-space evaluation matches the plain formula where it is safe
        cfg = HWeightConfig(2.0)
        for letters in [(1,), (1, 2), (2, 2, 1), (1, 1, 1, 2)]:
            w = Word(letters)
            n, x = w.n, w.ones
            plain = (
                cfg.c / (n + 1) ** 0.25 * (2 * 0.8) ** (0.5 * (n + x))
                / math.sqrt(max(1, math.factorial(n + x - 1)))
            )
            assert h_weight(w, 0.8, cfg) == pytest.approx(plain, rel=1e-12)

    def test_submultiplicative_over_concatenation(self):
        rng = np.random.default_rng(0)
        cfg = HWeightConfig(2.0)
        for _ in range(200):
            nu, nv = rng.integers(0, 5, size=2)
            u = Word(tuple(rng.integers(1, 3, size=nu)))
            v = Word(tuple(rng.integers(1, 3, size=nv)))
            assert h_weight(u + v, 1.0, cfg) <= h_weight(u, 1.0, cfg) * h_weight(v, 1.0, cfg) * (1 + 1e-12)

    def test_level_weights_match_scalar(self):
        cfg = HWeightConfig(2.0)
        weights = level_h_weights(2, 3, 0.6, cfg)
        for w in iter_words(2, 3):
            assert weights[w.index(2)] == pytest.approx(h_weight(w, 0.6, cfg))


class TestAhNorm:
    def test_zero_and_unit(self):
        cfg = HWeightConfig(2.0)
        assert ah_norm(TruncatedTensor.zeros(2, 4), 1.0, cfg) == 0.0
        assert ah_norm(TruncatedTensor.unit(2, 4), 1.0, cfg) == pytest.approx(2.0)

    def test_submultiplicative_for_concat(self):
        rng = np.random.default_rng(1)
        cfg = HWeightConfig(2.0)
        for _ in range(500):
            a = random_tensor(rng, 2, 6)
            b = random_tensor(rng, 2, 6)
            lhs = ah_norm(concat_mul(a, b), 1.0, cfg)
            assert lhs <= ah_norm(a, 1.0, cfg) * ah_norm(b, 1.0, cfg) * (1 + 1e-12)


class TestTruncationTail:
    def test_zero_at_full_cap(self):
        rng = np.random.default_rng(2)
        t = random_tensor(rng, 2, 5)
        assert truncation_tail(t, 5, 1.0) == 0.0

    def test_monotone_in_keep_level(self):
        rng = np.random.default_rng(3)
        t = random_tensor(rng, 2, 6)
        tails = [truncation_tail(t, m, 1.0) for m in range(7)]
        assert all(a >= b for a, b in zip(tails, tails[1:]))

    def test_validation(self):
        with pytest.raises(ValueError):
            truncation_tail(TruncatedTensor.zeros(2, 3), 4, 1.0)


class TestMomentBounds:
    def test_l2_examples(self):
        t = 0.73
        assert l2_bound((2,), t) == pytest.approx(t, rel=1e-13)
        assert l2_bound((), t) == 1.0
        assert l2_bound((1, 2), t) == pytest.approx(t**3 / 2, rel=1e-13)

    def test_l2_attained_by_brownian_square(self):
        # E W_t^2 equals the bound for the single noise letter
        grid = TimeGrid(1.0, 64)
        draws = [
            sample_brownian(grid, 1, 5, i).values()[-1, 0] ** 2 for i in range(4000)
        ]
        est = np.mean(draws)
        assert est <= l2_bound((2,), 1.0) * (1 + 4 / math.sqrt(len(draws)) * np.std(draws))

    def test_lp_unit_word(self):
        for p in range(1, 7):
            assert lp_bound((), 0.9, p) == 1.0

    def test_lp_even_reduces_to_l2(self):
        for letters in [(2,), (1, 2), (2, 2, 1)]:
            assert lp_bound(letters, 0.8, 2) == pytest.approx(l2_bound(letters, 0.8), rel=1e-12)

    def test_lp_odd_jensen_interpolation(self):
        w = (1, 2)
        assert lp_bound(w, 0.8, 3) == pytest.approx(lp_bound(w, 0.8, 4) ** 0.75, rel=1e-12)

    def test_lp_validation(self):
        with pytest.raises(ValueError):
            lp_bound((2,), 1.0, 0)

    def test_fourth_moment_bound_attained(self):
        # the p = 4 closed form for the noise letter is exactly E W_t^4 = 3 t^2
        assert lp_bound((2,), 1.0, 4) == pytest.approx(3.0, rel=1e-12)
        assert lp_bound((2,), 0.5, 4) == pytest.approx(3.0 * 0.25, rel=1e-12)


class TestANormPathwise:
    def test_single_letter_is_abs_path(self):
        grid = TimeGrid(1.0, 50)
        path = sample_brownian(grid, 1, 9, 0)
        stream = signature_stream(path, 3)
        series = a_norm_pathwise(word_tensor(2, 3, (2,)), stream)
        np.testing.assert_allclose(series, np.abs(path.values()[:, 0]), atol=1e-12)

    def test_levels_add_in_absolute_value(self):
        grid = TimeGrid(1.0, 20)
        path = sample_brownian(grid, 1, 10, 0)
        stream = signature_stream(path, 3)
        ell = TruncatedTensor.unit(2, 3) + word_tensor(2, 3, (2,))
        series = a_norm_pathwise(ell, stream)
        np.testing.assert_allclose(series, 1.0 + np.abs(path.values()[:, 0]), atol=1e-12)

    def test_dominates_plain_evaluation(self):
        rng = np.random.default_rng(11)
        grid = TimeGrid(1.0, 30)
        path = sample_brownian(grid, 1, 12, 0)
        stream = signature_stream(path, 4)
        from sigrep.signature import evaluate

        ell = random_tensor(rng, 2, 4)
        norm_series = a_norm_pathwise(ell, stream)
        assert np.all(norm_series >= np.abs(evaluate(ell, stream)) - 1e-12)
