import numpy as np
import pytest

import oracles
from dmfkit import (
    BasisSpec,
    InterchangeFormatError,
    LinearDependenceError,
    build_even_tempered,
    load_interchange,
    save_interchange,
)


def single(alpha=1.0, Z=1.0):
    return build_even_tempered(BasisSpec(count=1, alpha0=alpha, beta=2.0, Z=Z, q=1))


class TestClosedForms:
    def test_single_gaussian_reference_values(self):
        s = single(alpha=1.0, Z=1.0)
        # T = 3 alpha / 2, <1/r> = 2 sqrt(2 alpha / pi), (11|11) = 2 sqrt(alpha/pi)
        np.testing.assert_allclose(s.h[0, 0], 1.5 - 2.0 * np.sqrt(2.0 / np.pi), rtol=1e-14)
        np.testing.assert_allclose(s.eri[0, 0, 0, 0], 2.0 / np.sqrt(np.pi), rtol=1e-14)

    def test_pure_kinetic_at_zero_charge(self):
        s = single(alpha=1.0, Z=0.0)
        assert s.h[0, 0] == pytest.approx(1.5, abs=1e-14)

    def test_against_quadrature_oracle(self):
        spec = BasisSpec(count=3, alpha0=0.3, beta=2.7, Z=1.5, q=1)
        a = spec.exponents
        s = build_even_tempered(spec)
        # compare in the primitive basis: undo the orthonormalization
        ai, aj = a[:, None], a[None, :]
        S = (4 * ai * aj / (ai + aj) ** 2) ** 0.75
        ss, U = np.linalg.eigh(S)
        Xh = (U * ss**0.5) @ U.T  # S^(1/2) maps back to primitives
        h_prim = Xh @ s.h @ Xh
        for i in range(3):
            for j in range(3):
                t = oracles.kinetic_quadrature(a[i], a[j])
                v = oracles.nuclear_quadrature(a[i], a[j])
                np.testing.assert_allclose(h_prim[i, j], t - spec.Z * v, rtol=1e-9)
        eri_prim = np.einsum(
            "pi,qj,rk,sl,ijkl->pqrs", Xh, Xh, Xh, Xh, s.eri, optimize=True
        )
        np.testing.assert_allclose(
            eri_prim[0, 1, 2, 1], oracles.eri_quadrature(a[0], a[1], a[2], a[1]), rtol=1e-6
        )
        np.testing.assert_allclose(
            eri_prim[2, 2, 0, 0], oracles.eri_quadrature(a[2], a[2], a[0], a[0]), rtol=1e-6
        )


class TestInvariants:
    @pytest.mark.parametrize("n", [4, 8, 12])
    def test_structure_and_kernel_positivity(self, n):
        s = build_even_tempered(BasisSpec(count=n, alpha0=0.05, beta=2.2, Z=2.0, q=2))
        s.validate()  # h symmetry, 8-fold symmetry, pair-matrix PSD to -1e-10
        w = np.linalg.eigvalsh(s.pair_matrix())
        assert w[0] >= -1e-10

    def test_exponent_scaling(self):
        # scaling exponents by s^2: kinetic elements scale by s^2, nuclear
        # and repulsion elements by s (in the orthonormal basis, since the
        # overlap only depends on exponent ratios)
        sfac = 2.0
        base = build_even_tempered(BasisSpec(count=5, alpha0=0.1, beta=2.3, Z=0.0, q=1))
        scaled = build_even_tempered(BasisSpec(count=5, alpha0=0.1 * sfac**2, beta=2.3, Z=0.0, q=1))
        np.testing.assert_allclose(scaled.h, sfac**2 * base.h, rtol=1e-10)
        withZ = build_even_tempered(BasisSpec(count=5, alpha0=0.1, beta=2.3, Z=1.0, q=1))
        withZ_s = build_even_tempered(BasisSpec(count=5, alpha0=0.1 * sfac**2, beta=2.3, Z=1.0, q=1))
        nuclear = withZ.h - base.h
        nuclear_s = withZ_s.h - scaled.h
        np.testing.assert_allclose(nuclear_s, sfac * nuclear, rtol=1e-10)
        np.testing.assert_allclose(scaled.eri, sfac * base.eri, rtol=1e-10)

    @pytest.mark.parametrize("count,alpha0,beta", [(6, 0.05, 2.0), (10, 0.02, 2.5), (8, 0.2, 3.0)])
    def test_hydrogen_variational_bound(self, count, alpha0, beta):
        s = build_even_tempered(BasisSpec(count=count, alpha0=alpha0, beta=beta, Z=1.0, q=1))
        assert np.linalg.eigvalsh(s.h)[0] >= -0.5

    def test_near_linear_dependence_rejected(self):
        with pytest.raises(LinearDependenceError, match="condition number"):
            build_even_tempered(BasisSpec(count=40, alpha0=0.01, beta=1.05, Z=1.0, q=1))


class TestBasisSpec:
    @pytest.mark.parametrize(
        "kw",
        [
            {"count": 0},
            {"alpha0": -1.0},
            {"beta": 0.9},
            {"Z": -1.0},
            {"q": 3},
        ],
    )
    def test_rejects_invalid(self, kw):
        base = dict(count=4, alpha0=0.1, beta=2.0, Z=1.0, q=1)
        base.update(kw)
        with pytest.raises(ValueError):
            BasisSpec(**base)

    def test_exponents_increasing(self):
        spec = BasisSpec(count=5, alpha0=0.1, beta=2.0)
        assert np.all(np.diff(spec.exponents) > 0)


class TestInterchange:
    def test_roundtrip_identity(self, tmp_path, helium8):
        path = tmp_path / "he8.ints"
        save_interchange(helium8, str(path))
        back = load_interchange(str(path))
        np.testing.assert_array_equal(back.h, helium8.h)
        np.testing.assert_array_equal(back.eri, helium8.eri)
        assert (back.n, back.Z, back.q) == (helium8.n, helium8.Z, helium8.q)

    def test_pair_eigenvalues_preserved(self, tmp_path, helium8):
        path = tmp_path / "he8.ints"
        save_interchange(helium8, str(path))
        back = load_interchange(str(path))
        w0 = np.linalg.eigvalsh(helium8.pair_matrix())
        w1 = np.linalg.eigvalsh(back.pair_matrix())
        np.testing.assert_allclose(w1, w0, atol=1e-12)

    def test_single_element_file_has_one_line_per_section(self, tmp_path):
        s = single(alpha=1.0, Z=1.0)
        path = tmp_path / "one.ints"
        save_interchange(s, str(path))
        lines = [ln for ln in path.read_text().splitlines() if ln and not ln.startswith("#")]
        ih = lines.index("H")
        ie = lines.index("ERI")
        assert ie - ih == 2  # exactly one h line
        assert len(lines) - ie == 2  # exactly one eri line

    def test_saves_are_byte_identical(self, tmp_path, helium8):
        p1, p2 = tmp_path / "a.ints", tmp_path / "b.ints"
        save_interchange(helium8, str(p1))
        save_interchange(helium8, str(p2))
        assert p1.read_bytes() == p2.read_bytes()

    def test_header_only_file_gives_zeros(self, tmp_path):
        path = tmp_path / "zeros.ints"
        path.write_text("2 2.0 2 1\n")
        s = load_interchange(str(path))
        assert s.n == 2 and s.Z == 2.0 and s.q == 2
        assert not s.h.any() and not s.eri.any()

    def test_out_of_range_index_names_line(self, tmp_path):
        path = tmp_path / "bad.ints"
        path.write_text("4 1.0 1 1\nH\n1 5 1.0\n")
        with pytest.raises(InterchangeFormatError, match=r":3: index out of range"):
            load_interchange(str(path))

    def test_malformed_line_and_missing_header(self, tmp_path):
        p = tmp_path / "m.ints"
        p.write_text("4 1.0 1 1\nH\n1 x 1.0\n")
        with pytest.raises(InterchangeFormatError, match=":3:"):
            load_interchange(str(p))
        p2 = tmp_path / "empty.ints"
        p2.write_text("# nothing\n")
        with pytest.raises(InterchangeFormatError, match="missing header"):
            load_interchange(str(p2))

    def test_comments_ignored_and_symmetry_completed(self, tmp_path):
        path = tmp_path / "c.ints"
        path.write_text("# a comment\n2 0.0 1 0\nH\n1 2 0.25\nERI\n1 2 1 2 0.125\n")
        s = load_interchange(str(path))
        assert s.h[1, 0] == 0.25
        assert s.eri[1, 0, 0, 1] == 0.125 and s.eri[0, 1, 1, 0] == 0.125

    def test_data_before_section_marker_rejected(self, tmp_path):
        path = tmp_path / "d.ints"
        path.write_text("2 0.0 1 0\n1 1 0.5\n")
        with pytest.raises(InterchangeFormatError, match="section marker"):
            load_interchange(str(path))


def test_provenance_tags(helium8):
    assert "even-tempered" in helium8.provenance
