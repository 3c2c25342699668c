import dataclasses
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dmfkit import (
    BasisSpec,
    DensityMatrix,
    FunctionalKind,
    ball_intersection_volume,
    build_even_tempered,
    energy,
    fci2_energy,
    fdl_reconstruct,
    fdl_suite,
    lemma_gap,
    lemma_suite,
    minimize,
    psd_suite,
    sandwich_suite,
)
from dmfkit.verify import lens_volume_mc


class TestLemma:
    def test_boundary_and_equality_cases(self):
        assert lemma_gap(0.0, 0.0) == 0.0
        assert lemma_gap(1.0, 1.0) == 0.0
        for lam in np.linspace(0.0, 1.0, 101):
            assert abs(lemma_gap(lam, lam)) <= 1e-15

    def test_reference_value(self):
        assert lemma_gap(0.9, 0.1) == pytest.approx(0.12, abs=1e-15)

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError, match=r"\[0, 1\]"):
            lemma_gap(1.2, 0.5)
        with pytest.raises(ValueError):
            lemma_gap(0.5, -0.1)

    @given(st.floats(0.0, 1.0), st.floats(0.0, 1.0))
    @settings(deadline=None, max_examples=500)
    def test_nonnegative_everywhere(self, lam, mu):
        assert lemma_gap(lam, mu) >= -1e-15

    def test_suite_passes(self):
        rep = lemma_suite(trials=200_000, seed=11, grid=500)
        assert rep.passed
        assert rep.worst_margin >= -1e-15
        assert not rep.failures


class TestBallDecomposition:
    def test_full_ball_at_zero_distance(self):
        r = 1.3
        assert ball_intersection_volume(r, 0.0) == pytest.approx(4 / 3 * np.pi * r**3, rel=1e-14)

    def test_disjoint_balls(self):
        assert ball_intersection_volume(1.0, 2.0) == 0.0
        assert ball_intersection_volume(1.0, 5.0) == 0.0

    def test_unit_lens_value(self):
        assert ball_intersection_volume(1.0, 1.0) == pytest.approx(np.pi / 12 * 5, rel=1e-14)

    def test_monte_carlo_oracle(self):
        est, se = lens_volume_mc(1.0, 1.0, samples=1_000_000, seed=4)
        assert abs(est - ball_intersection_volume(1.0, 1.0)) < 3.0 * se

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            ball_intersection_volume(-1.0, 0.5)
        with pytest.raises(ValueError):
            ball_intersection_volume(1.0, -0.5)

    @pytest.mark.parametrize("d", [0.1, 0.5, 1.0, 2.0, 10.0])
    def test_kernel_reconstruction(self, d):
        assert fdl_reconstruct(d) * d == pytest.approx(1.0, abs=1e-8)

    def test_reconstruction_homogeneity(self):
        # both sides scale as 1/s
        base = fdl_reconstruct(0.7)
        assert fdl_reconstruct(7.0) == pytest.approx(base / 10.0, rel=1e-8)

    def test_rejects_nonpositive_distance(self):
        with pytest.raises(ValueError):
            fdl_reconstruct(0.0)

    def test_suite_passes(self):
        rep = fdl_suite(mc_samples=1_000_000, seed=2)
        assert rep.passed


class TestPsdSuite:
    def test_builtin_bases_pass(self):
        sets = [build_even_tempered(BasisSpec(n, 0.05, 2.2, Z=2.0, q=2)) for n in (4, 8)]
        rep = psd_suite(sets)
        assert rep.passed and rep.worst_margin >= -1e-10

    def test_detects_corruption(self, helium8):
        eri = helium8.eri.copy()
        # push an off-diagonal pair element past its Schwarz bound
        eri[0, 0, 1, 1] += 1.0
        eri[1, 1, 0, 0] += 1.0
        bad = dataclasses.replace(helium8, eri=eri)
        rep = psd_suite([bad])
        assert not rep.passed


class TestSandwichSuite:
    def test_passes_on_helium(self, helium8):
        rep = sandwich_suite(helium8, N=8.0, trials=200, seed=1)
        assert rep.passed
        assert rep.worst_margin >= -1e-10
        assert rep.trials == 201  # includes the adversarial boundary point

    def test_idempotent_inputs_are_equalities(self, helium8, rng):
        from dmfkit.rdm import random_orthogonal

        Q = random_orthogonal(8, rng)
        lam = np.zeros(8)
        lam[:2] = 1.0
        g = DensityMatrix.from_spectrum(lam, Q)
        es = [energy(helium8, g, k).total for k in FunctionalKind]
        assert max(es) - min(es) < 1e-10

    def test_report_serialization(self, helium8):
        rep = sandwich_suite(helium8, N=8.0, trials=10, seed=0)
        doc = json.loads(rep.to_json())
        assert doc["suite"] == "sandwich"
        assert doc["passed"] is True
        assert doc["trials"] == 11
        assert isinstance(doc["worst_margin"], float)


class TestFci2:
    def test_noninteracting_pair(self, helium8):
        s = dataclasses.replace(helium8, eri=np.zeros_like(helium8.eri))
        e = fci2_energy(s)
        assert e == pytest.approx(2.0 * np.linalg.eigvalsh(s.h)[0], abs=1e-12)

    def test_single_function_reference(self):
        s = build_even_tempered(BasisSpec(count=1, alpha0=1.0, beta=2.0, Z=2.0, q=2))
        # pair Hamiltonian is the scalar 2 h11 + (11|11)
        expected = 2.0 * s.h[0, 0] + s.eri[0, 0, 0, 0]
        assert fci2_energy(s) == pytest.approx(expected, abs=1e-13)
        assert expected == pytest.approx(-2.254697, abs=1e-6)

    def test_variational_dominance(self, helium10):
        e_hf = minimize(helium10, 2.0, FunctionalKind.HF).energy.total
        assert fci2_energy(helium10) <= e_hf + 1e-8

    def test_preconditions(self, helium8):
        with pytest.raises(ValueError, match="q=2"):
            fci2_energy(dataclasses.replace(helium8, q=1))
        big = dataclasses.replace(
            helium8, n=21, h=np.zeros((21, 21)), eri=np.zeros((21,) * 4)
        )
        with pytest.raises(ValueError, match="capped"):
            fci2_energy(big)
