import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eigenuq import (
    AnisotropyEigenvalues,
    DegenerateTKE,
    EigenFrame,
    InvalidFrame,
    InvalidMagnitude,
    NonFiniteError,
    OrderingError,
    RealizabilityError,
    ShapeError,
    SymTensor3,
    anisotropy_from_stress,
    realizability_check,
    stress_from_eigen,
    symmetric_eigen,
    turbulent_kinetic_energy,
)

from conftest import random_stress_matrices

finite = st.floats(
    min_value=-10.0, max_value=10.0, allow_nan=False, allow_infinity=False
)


class TestSymTensor3:
    def test_roundtrip_matrix(self):
        t = SymTensor3(1.0, 2.0, 3.0, 0.1, -0.2, 0.3)
        m = t.as_matrix()
        assert m.shape == (3, 3)
        assert np.array_equal(m, m.T)
        assert SymTensor3.from_matrix(m) == t

    def test_roundtrip_six(self):
        t = SymTensor3(1.0, 2.0, 3.0, 0.1, -0.2, 0.3)
        assert SymTensor3.from_six(t.as_six()) == t

    def test_trace(self):
        assert SymTensor3(1.0, 2.0, 3.0).trace() == 6.0

    def test_nonfinite_rejected(self):
        with pytest.raises(NonFiniteError):
            SymTensor3(float("nan"), 0.0, 0.0)
        with pytest.raises(NonFiniteError):
            SymTensor3(float("inf"), 0.0, 0.0)

    def test_from_matrix_shape(self):
        with pytest.raises(ShapeError):
            SymTensor3.from_matrix(np.zeros((2, 2)))

    def test_from_matrix_symmetrizes_small_asymmetry(self):
        m = np.diag([1.0, 2.0, 3.0])
        m[0, 1] = 1e-9
        t = SymTensor3.from_matrix(m)
        assert t.xy == pytest.approx(5e-10)

    def test_from_matrix_rejects_large_asymmetry(self):
        m = np.diag([1.0, 2.0, 3.0])
        m[0, 1] = 0.5
        with pytest.raises(ValueError):
            SymTensor3.from_matrix(m)

    @given(finite, finite, finite, finite, finite, finite)
    def test_six_roundtrip_property(self, xx, yy, zz, xy, xz, yz):
        t = SymTensor3(xx, yy, zz, xy, xz, yz)
        assert SymTensor3.from_matrix(t.as_matrix()) == t


class TestEigenFrame:
    def test_requires_descending(self):
        with pytest.raises(OrderingError):
            EigenFrame((0.0, 1.0, 2.0), np.eye(3))

    def test_requires_orthonormal(self):
        v = np.eye(3)
        v[0, 0] = 1.5
        with pytest.raises(InvalidFrame):
            EigenFrame((2.0, 1.0, 0.0), v)

    def test_reconstruct(self):
        f = EigenFrame((3.0, 2.0, 1.0), np.eye(3))
        assert f.reconstruct() == SymTensor3(3.0, 2.0, 1.0)

    def test_vectors_read_only(self):
        f = EigenFrame((1.0, 0.0, -1.0), np.eye(3))
        with pytest.raises(ValueError):
            f.eigenvectors[0, 0] = 2.0


class TestSymmetricEigen:
    def test_diagonal(self):
        f = symmetric_eigen(SymTensor3(3.0, 1.0, 2.0))
        assert f.eigenvalues == (3.0, 2.0, 1.0)

    def test_reconstruction_random(self, rng):
        for _ in range(200):
            vals = rng.uniform(-1, 1, 6)
            t = SymTensor3(*vals)
            f = symmetric_eigen(t)
            r = f.reconstruct()
            scale = max(1.0, max(abs(v) for v in vals))
            assert abs(r.xx - t.xx) < 1e-12 * scale
            assert abs(r.xy - t.xy) < 1e-12 * scale

    def test_deterministic_on_repeats(self):
        t = SymTensor3(1.0, 1.0, 1.0, 0.3, 0.0, 0.0)
        f1 = symmetric_eigen(t)
        f2 = symmetric_eigen(t)
        assert f1.eigenvalues == f2.eigenvalues
        assert np.array_equal(f1.eigenvectors, f2.eigenvectors)

    def test_sign_convention(self, rng):
        # largest-magnitude entry of each eigenvector is positive
        for _ in range(50):
            t = SymTensor3(*rng.uniform(-1, 1, 6))
            v = symmetric_eigen(t).eigenvectors
            for j in range(3):
                col = v[:, j]
                assert col[np.argmax(np.abs(col))] > 0

    def test_isotropic_gives_identity(self):
        f = symmetric_eigen(SymTensor3(2.0, 2.0, 2.0))
        assert np.array_equal(f.eigenvectors, np.eye(3))

    def test_double_eigenvalue(self):
        # axisymmetric tensor: eigenvalues (2, 2, -1) along z
        f = symmetric_eigen(SymTensor3(2.0, 2.0, -1.0))
        assert f.eigenvalues == pytest.approx((2.0, 2.0, -1.0), abs=1e-12)
        r = f.reconstruct()
        assert r.xx == pytest.approx(2.0, abs=1e-12)
        assert r.zz == pytest.approx(-1.0, abs=1e-12)


class TestAnisotropy:
    def test_kinetic_energy(self):
        assert turbulent_kinetic_energy(SymTensor3(1.0, 2.0, 3.0)) == 3.0

    def test_isotropic_maps_to_zero(self):
        k, b = anisotropy_from_stress(SymTensor3(2.0, 2.0, 2.0))
        assert k == 3.0
        assert b == SymTensor3(0.0, 0.0, 0.0)

    def test_degenerate_k_raises(self):
        with pytest.raises(DegenerateTKE):
            anisotropy_from_stress(SymTensor3(0.0, 0.0, 0.0))

    def test_split_recompose(self, rng):
        r = random_stress_matrices(rng, 50)
        for m in r:
            t = SymTensor3.from_matrix(m)
            k, b = anisotropy_from_stress(t)
            f = symmetric_eigen(b)
            back = stress_from_eigen(k, f.eigenvalues, f.eigenvectors)
            assert np.allclose(back.as_six(), t.as_six(), atol=1e-12 * max(1, k))


class TestAnisotropyEigenvalues:
    def test_ordering_enforced(self):
        with pytest.raises(OrderingError):
            AnisotropyEigenvalues(-0.1, 0.0, 0.1)

    def test_range_enforced(self):
        with pytest.raises(RealizabilityError):
            AnisotropyEigenvalues(0.7, 0.0, -0.7)

    def test_trace_free_enforced(self):
        with pytest.raises(RealizabilityError):
            AnisotropyEigenvalues(0.3, 0.2, 0.1)

    def test_limiting_states_accepted(self):
        AnisotropyEigenvalues(2 / 3, -1 / 3, -1 / 3)
        AnisotropyEigenvalues(1 / 6, 1 / 6, -1 / 3)
        AnisotropyEigenvalues(0.0, 0.0, 0.0)


class TestStressFromEigen:
    def test_negative_k_rejected(self):
        with pytest.raises(InvalidMagnitude):
            stress_from_eigen(-1.0, (0.0, 0.0, 0.0), np.eye(3))

    def test_non_orthonormal_rejected(self):
        v = np.eye(3) * 1.1
        with pytest.raises(InvalidFrame):
            stress_from_eigen(1.0, (0.0, 0.0, 0.0), v)

    def test_isotropic(self):
        r = stress_from_eigen(1.5, (0.0, 0.0, 0.0), np.eye(3))
        assert r == SymTensor3(1.0, 1.0, 1.0)


class TestRealizability:
    def test_realizable_psd(self, rng):
        for m in random_stress_matrices(rng, 100):
            rep = realizability_check(SymTensor3.from_matrix(m))
            assert rep.realizable
            assert rep.k_nonnegative
            assert rep.eigenvalues_in_range
            assert rep.inside_triangle
            assert sum(rep.weights) == pytest.approx(1.0, abs=1e-12)
            assert min(rep.weights) >= -1e-10

    def test_unrealizable_detected(self):
        # negative-definite direction: eigenvalue of R below zero
        rep = realizability_check(SymTensor3(-1.0, 2.0, 2.0))
        assert not rep.realizable

    def test_vertex_detection(self):
        one = stress_from_eigen(1.0, (2 / 3, -1 / 3, -1 / 3), np.eye(3))
        two = stress_from_eigen(1.0, (1 / 6, 1 / 6, -1 / 3), np.eye(3))
        iso = stress_from_eigen(1.0, (0.0, 0.0, 0.0), np.eye(3))
        assert realizability_check(one).vertex == "1c"
        assert realizability_check(two).vertex == "2c"
        assert realizability_check(iso).vertex == "3c"
        generic = realizability_check(SymTensor3(2.0, 1.0, 0.5, 0.1, 0.0, 0.0))
        assert generic.vertex is None

    def test_zero_energy_is_isotropic(self):
        rep = realizability_check(SymTensor3(0.0, 0.0, 0.0))
        assert rep.realizable
        assert rep.vertex == "3c"


@settings(max_examples=60)
@given(st.lists(finite, min_size=6, max_size=6))
def test_eigen_reconstruction_property(vals):
    t = SymTensor3(*vals)
    f = symmetric_eigen(t)
    scale = max(1.0, max(abs(v) for v in vals))
    assert np.allclose(
        f.reconstruct().as_matrix(), t.as_matrix(), atol=1e-11 * scale
    )
    assert f.eigenvalues[0] >= f.eigenvalues[1] >= f.eigenvalues[2]
    v = f.eigenvectors
    assert np.allclose(v.T @ v, np.eye(3), atol=1e-12)
    # eigenvalue sum equals the trace
    assert math.isclose(sum(f.eigenvalues), t.trace(), abs_tol=1e-11 * scale)
