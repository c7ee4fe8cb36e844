import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qdistill import (
    DenseCapExceededError,
    DimsProfile,
    Family,
    GhzSpec,
    InvalidSpecError,
    Operator,
    WSpec,
    compact_to_dense,
    make_compact,
    make_ghz_dense,
    make_w_dense,
    partial_trace,
    perfect_ghz,
    perfect_w,
    pure_target_fidelity,
    state_fidelity,
)

from conftest import random_ghz_spec, random_w_spec


def coeff_lists(size):
    return st.lists(
        st.floats(0.05, 1.0, allow_nan=False), min_size=size, max_size=size
    ).map(lambda v: tuple(x / math.sqrt(sum(y * y for y in v)) for x in v))


class TestSpecValidation:
    def test_rejects_small_d_or_p(self):
        with pytest.raises(InvalidSpecError):
            GhzSpec(1, 2, (1.0,))
        with pytest.raises(InvalidSpecError):
            GhzSpec(2, 1, (0.6, 0.8))
        with pytest.raises(InvalidSpecError):
            WSpec(1, (1.0,))

    def test_rejects_wrong_length(self):
        with pytest.raises(InvalidSpecError):
            GhzSpec(3, 2, (0.6, 0.8))

    def test_rejects_nonpositive(self):
        with pytest.raises(InvalidSpecError):
            GhzSpec(2, 2, (1.0, 0.0))
        with pytest.raises(InvalidSpecError):
            WSpec(2, (-0.6, 0.8))

    def test_rejects_complex(self):
        with pytest.raises(InvalidSpecError):
            GhzSpec(2, 2, (0.6 + 0.1j, 0.8))

    def test_renormalizes_near_unit(self):
        eps = 4e-10
        spec = GhzSpec(2, 2, (0.6 * (1 + eps), 0.8 * (1 + eps)))
        assert sum(a * a for a in spec.alphas) == pytest.approx(1.0, abs=1e-15)

    def test_rejects_far_from_unit(self):
        with pytest.raises(InvalidSpecError):
            GhzSpec(2, 2, (0.7, 0.8))

    @given(coeff_lists(3))
    def test_spec_roundtrips_normalized(self, coeffs):
        spec = GhzSpec(3, 2, coeffs)
        assert sum(a * a for a in spec.alphas) == pytest.approx(1.0, abs=1e-12)


class TestDenseConstruction:
    def test_bell(self):
        spec = perfect_ghz(2, 2)
        ket = make_ghz_dense(spec)
        expected = np.zeros(4)
        expected[0] = expected[3] = 1 / np.sqrt(2)
        assert np.allclose(ket.amplitudes, expected)

    def test_ghz3_placement(self, rng):
        spec = random_ghz_spec(rng, 3, 3)
        ket = make_ghz_dense(spec)
        # alpha_i sits at |iii>, global index 13*i
        for i in range(3):
            assert ket.amplitudes[13 * i] == spec.alphas[i]
        assert np.count_nonzero(ket.amplitudes) == 3

    def test_w3_placement(self, rng):
        spec = random_w_spec(rng, 3)
        ket = make_w_dense(spec)
        # beta_0 |001>, beta_1 |010>, beta_2 |100>
        assert ket.amplitudes[1] == spec.betas[0]
        assert ket.amplitudes[2] == spec.betas[1]
        assert ket.amplitudes[4] == spec.betas[2]
        assert np.count_nonzero(ket.amplitudes) == 3

    def test_w2(self):
        ket = make_w_dense(perfect_w(2))
        expected = np.zeros(4)
        expected[1] = expected[2] = 1 / np.sqrt(2)
        assert np.allclose(ket.amplitudes, expected)

    def test_norms(self, rng):
        for _ in range(100):
            d = int(rng.integers(2, 5))
            p = int(rng.integers(2, 5))
            ket = make_ghz_dense(random_ghz_spec(rng, d, p))
            assert np.linalg.norm(ket.amplitudes) == pytest.approx(1.0, abs=1e-12)
            wket = make_w_dense(random_w_spec(rng, p + 1))
            assert np.linalg.norm(wket.amplitudes) == pytest.approx(1.0, abs=1e-12)

    def test_nonzero_counts(self, rng):
        spec = random_ghz_spec(rng, 4, 3)
        assert np.count_nonzero(make_ghz_dense(spec).amplitudes) == 4
        wspec = random_w_spec(rng, 5)
        assert np.count_nonzero(make_w_dense(wspec).amplitudes) == 5

    def test_dense_cap(self, monkeypatch):
        monkeypatch.delenv("QDISTILL_DENSE_CAP", raising=False)
        with pytest.raises(DenseCapExceededError):
            make_ghz_dense(perfect_ghz(4, 7))  # 16384 > 4096
        monkeypatch.setenv("QDISTILL_DENSE_CAP", "16384")
        make_ghz_dense(perfect_ghz(4, 7))


class TestCompact:
    def test_ghz_coeffs(self, rng):
        spec = random_ghz_spec(rng, 3, 3)
        cs = make_compact(spec)
        assert cs.family is Family.GHZ_DIAGONAL
        assert tuple(cs.coeffs) == spec.alphas

    def test_w_coeffs(self, rng):
        spec = random_w_spec(rng, 3)
        cs = make_compact(spec)
        assert cs.family is Family.W_SINGLE_EXCITATION
        assert tuple(cs.coeffs) == spec.betas

    def test_compact_dense_agree_exactly(self, rng):
        for _ in range(25):
            d = int(rng.integers(2, 5))
            p = int(rng.integers(2, 6))
            if d**p > 4096:
                continue
            spec = random_ghz_spec(rng, d, p)
            assert np.array_equal(
                compact_to_dense(make_compact(spec)).amplitudes,
                make_ghz_dense(spec).amplitudes,
            )
            wspec = random_w_spec(rng, p)
            assert np.array_equal(
                compact_to_dense(make_compact(wspec)).amplitudes,
                make_w_dense(wspec).amplitudes,
            )


class TestPerfectTargets:
    def test_perfect_ghz_uniform(self):
        spec = perfect_ghz(3, 4)
        assert all(a == pytest.approx(1 / math.sqrt(3)) for a in spec.alphas)

    def test_perfect_w_uniform(self):
        spec = perfect_w(3)
        assert all(b == pytest.approx(1 / math.sqrt(3)) for b in spec.betas)

    def test_perfect_self_fidelity(self):
        ket = make_ghz_dense(perfect_ghz(2, 3))
        rho = Operator(np.outer(ket.amplitudes, ket.amplitudes.conj()), density=True)
        assert state_fidelity(rho, rho) == pytest.approx(1.0, abs=1e-12)
        assert pure_target_fidelity(rho, ket) == pytest.approx(1.0, abs=1e-12)

    def test_reduced_single_party_is_maximally_mixed(self):
        d, p = 3, 3
        ket = make_ghz_dense(perfect_ghz(d, p))
        rho = Operator(np.outer(ket.amplitudes, ket.amplitudes.conj()), density=True)
        reduced = partial_trace(rho, DimsProfile.uniform(d, p), [0, 1])
        assert np.allclose(reduced.entries, np.eye(d) / d, atol=1e-12)
