import warnings

import numpy as np
import pytest

from orthoplate.fields import Grid, GridError, modal_field, simpson_2d
from orthoplate.plate import boundary_residuals, h2star_inner, interior_residual, l2_inner, total_energy
from orthoplate.spectral import (
    IncompleteSpectrumError,
    Parity,
    characteristic_structure,
    discretization_oracle,
    frequency,
    mode_determinant,
    reduce_mode,
    solve_mode_bvp_fem,
    solve_mode_eigs,
)
from orthoplate.spectral.spectrum import eigenvalue_for_frequency, find_eigenvalues, frequencies
from orthoplate.spectral.static import (
    FunctionLoad,
    GridLoad,
    ModeLoad,
    SineLoad,
    TruncationWarning,
    UniformLoad,
    solve_mode_bvp,
    static_solve,
)
from orthoplate.spectral.sweep2d import plate_eigenvalues_2d

from helpers import random_modal_field


def gauss(ell, n=400):
    g, w = np.polynomial.legendre.leggauss(n)
    return g * ell, w * ell


class TestParity:
    @pytest.mark.parametrize("text,expected", [("even", Parity.EVEN), ("vertical", Parity.EVEN),
                                               ("Odd", Parity.ODD), ("tors", Parity.ODD)])
    def test_parse(self, text, expected):
        assert Parity.parse(text) is expected

    def test_parse_rejects(self):
        with pytest.raises(ValueError):
            Parity.parse("sideways")


class TestReduceMode:
    def test_unit_length(self, tacoma):
        from orthoplate.plate import PlateModel

        m = PlateModel.build(np.pi, 1.0, tacoma.material, 1.0, R=1.0)
        assert reduce_mode(m, 1).mu == 1.0

    def test_tacoma(self, tacoma):
        assert reduce_mode(tacoma, 1).mu == pytest.approx(3.6810e-3, rel=1e-4)

    @pytest.mark.parametrize("m", [0, -1, 1.5])
    def test_rejects_bad_index(self, tacoma, m):
        with pytest.raises(ValueError):
            reduce_mode(tacoma, m)

    def test_substitution_matches_plate_operator(self, tacoma):
        mode = reduce_mode(tacoma, 3)
        g = Grid(tacoma.L, tacoma.ell, 51, 21)
        s = g.y / tacoma.ell
        D = np.vstack([
            1 + s**2 + s**5,
            (2 * s + 5 * s**4) / tacoma.ell,
            (2 + 20 * s**3) / tacoma.ell**2,
            (60 * s**2) / tacoma.ell**3,
            (120 * s) / tacoma.ell**4,
        ])
        lam = 7.5
        f = modal_field(g.x, g.y, [(mode.mu, 1.0, D)])
        r = interior_residual(tacoma, f, lam * f.u)
        expected = np.sin(mode.mu * g.x)[:, None] * mode.ode_residual(D, lam)[None, :]
        assert np.abs(r - expected[1:-1, 1:-1]).max() <= 1e-12 * np.abs(expected).max()


class TestCharacteristicStructure:
    def test_degenerate_zero_root(self, tacoma):
        mode = reduce_mode(tacoma, 1)
        rs = characteristic_structure(mode, mode.beam_estimate)
        assert rs.degenerate
        assert min(abs(t) for t in rs.t2) <= 1e-10 * mode.mu2

    def test_degenerate_double_root(self, tacoma):
        mode = reduce_mode(tacoma, 1)
        rs = characteristic_structure(mode, mode.R * mode.kappa * mode.mu4)
        assert rs.degenerate
        assert rs.t2[0] == pytest.approx(mode.mu2) and rs.t2[1] == pytest.approx(mode.mu2)

    def test_regimes(self, tacoma):
        mode = reduce_mode(tacoma, 2)
        r4 = mode.R * mode.mu4
        assert characteristic_structure(mode, 0.5 * mode.kappa * r4).regime == "complex"
        assert characteristic_structure(mode, (mode.kappa + 0.5) * r4).regime == "two_positive"
        assert characteristic_structure(mode, (mode.kappa + 2.0) * r4).regime == "mixed"

    def test_roots_solve_quartic(self, tacoma):
        mode = reduce_mode(tacoma, 1)
        for lam in (mode.R * (mode.kappa * mode.mu4 + 1.0), 0.1 * mode.beam_estimate, 3 * mode.beam_estimate):
            c = (1 + mode.kappa) * mode.mu4 - lam / mode.R
            for t2 in characteristic_structure(mode, lam).t2:
                val = t2**2 - 2 * mode.mu2 * t2 + c
                assert abs(val) <= 1e-12 * max(abs(t2) ** 2, abs(c))


class TestDeterminant:
    def test_brackets_first_vertical(self, tacoma):
        mode = reduce_mode(tacoma, 1)
        target = eigenvalue_for_frequency(0.0045, tacoma.M, tacoma.ell)
        assert target == pytest.approx(0.4795, rel=1e-3)
        a, b = mode_determinant(mode, "even", 0.47), mode_determinant(mode, "even", 0.49)
        assert a * b < 0

    def test_nonzero_near_zero(self, tacoma):
        mode = reduce_mode(tacoma, 1)
        for parity in Parity:
            # both free-edge rows scale like mu^2, so the natural size of the determinant is mu^4
            first = find_eigenvalues(mode, parity, 1)[0]
            lams = np.geomspace(1e-8 * mode.R * mode.mu4, 0.999 * first, 200)
            d = np.array([mode_determinant(mode, parity, lam) for lam in lams])
            assert abs(d[0]) > mode.mu4
            assert np.all(np.sign(d) == np.sign(d[0]))

    def test_parities_differ(self, tacoma):
        mode = reduce_mode(tacoma, 1)
        assert mode_determinant(mode, "even", 1.0) != pytest.approx(mode_determinant(mode, "odd", 1.0))

    def test_finite_for_large_lambda(self, tacoma):
        mode = reduce_mode(tacoma, 12)
        assert np.isfinite(mode_determinant(mode, "even", 1e6))


class TestModeEigs:
    def test_first_vertical(self, tacoma):
        (p,) = solve_mode_eigs(tacoma, 1, "even", 1)
        assert round(p.nu_hz, 4) == 0.0045
        assert p.lam == pytest.approx(0.4819, rel=1e-3)

    def test_first_torsional(self, tacoma):
        (p,) = solve_mode_eigs(tacoma, 1, "odd", 1)
        assert round(p.nu_hz, 4) == 0.0404

    def test_above_lower_bound(self, tacoma):
        for m in (1, 4, 9):
            mode = reduce_mode(tacoma, m)
            for parity in Parity:
                lams = find_eigenvalues(mode, parity, 4)
                assert np.all(lams >= mode.lower_bound)
                assert np.all(np.diff(lams) > 0)

    def test_incomplete(self, tacoma):
        mode = reduce_mode(tacoma, 1)
        with pytest.raises(IncompleteSpectrumError) as info:
            find_eigenvalues(mode, "even", 2, ceiling=1.0)
        assert info.value.ceiling == 1.0

    def test_rejects_k(self, tacoma):
        with pytest.raises(ValueError):
            solve_mode_eigs(tacoma, 1, "even", 0)

    @pytest.mark.parametrize("m", [1, 3, 5])
    @pytest.mark.parametrize("parity", list(Parity))
    def test_oracle_agreement(self, tacoma, m, parity):
        pairs = solve_mode_eigs(tacoma, m, parity, 5)
        ref = discretization_oracle(reduce_mode(tacoma, m), parity, n=200, k=5)
        assert np.abs(np.array([p.lam for p in pairs]) / ref - 1).max() <= 1e-3


class TestEigenpairs:
    def test_rayleigh_per_mode(self, spectrum):
        assert max(p.rayleigh_residual for p in spectrum) <= 1e-8

    def test_rayleigh_2d(self, spectrum, tacoma):
        g = Grid(tacoma.L, tacoma.ell, 201, 401)
        for p in spectrum.certified:
            U = p.field(g.x, g.y)
            lhs = p.lam * l2_inner(U, U)
            assert lhs == pytest.approx(tacoma.R * h2star_inner(tacoma, U, U), rel=1e-8), p.label

    def test_normalized(self, spectrum, tacoma):
        g = Grid(tacoma.L, tacoma.ell, 201, 401)
        for p in spectrum.certified[:6]:
            U = p.field(g.x, g.y)
            assert l2_inner(U, U) == pytest.approx(1.0, rel=1e-8)
            assert p.samples(tacoma.ell)[0] > 0 or p.samples(tacoma.ell)[0] == pytest.approx(0, abs=1e-12)

    def test_parity_purity(self, spectrum, tacoma):
        y = np.linspace(0, tacoma.ell, 31)
        for p in spectrum:
            assert np.abs(p.samples(-y) - p.parity.sign * p.samples(y)).max() <= 1e-10

    def test_orthogonality(self, spectrum, tacoma):
        y, w = gauss(tacoma.ell)
        for m in (1, 2, 6, 12):
            for parity in Parity:
                Y = np.array([spectrum.find(m, parity, i).samples(y) for i in range(1, 5)])
                G = tacoma.L / 2 * (Y * w) @ Y.T
                assert np.abs(G - np.eye(4)).max() <= 1e-8

    def test_pde_residual(self, spectrum, tacoma):
        g = Grid(tacoma.L, tacoma.ell)
        for p in spectrum.certified:
            U = p.field(g.x, g.y)
            r = interior_residual(tacoma, U, p.lam * U.u)
            assert np.abs(r).max() <= 1e-6 * p.lam * np.abs(U.u).max(), p.label

    def test_free_edges(self, spectrum, tacoma):
        g = Grid(tacoma.L, tacoma.ell)
        for p in spectrum.certified:
            U = p.field(g.x, g.y)
            b = boundary_residuals(tacoma, U)
            assert b.navier_value <= 1e-12 * np.abs(U.u).max()
            assert b.free_moment <= 1e-9 * np.abs(U.d("yy")).max() + 1e-9 * tacoma.nu * np.abs(U.d("xx")).max()
            assert b.free_shear <= 1e-9 * (np.abs(U.d("yyy")).max() + np.abs(U.d("xxy")).max())


class TestMonotonicity:
    def test_vertical_grows_with_kappa(self, tacoma):
        for m in (1, 2, 3):
            prev = 0.0
            for kappa in (0.0, 10.0, 60.0, tacoma.kappa, 200.0):
                lam = solve_mode_eigs(tacoma.with_kappa(kappa), m, "even", 1)[0].lam
                assert lam >= prev
                prev = lam


class TestOracle:
    def test_too_few_elements(self, tacoma):
        with pytest.raises(ValueError):
            discretization_oracle(reduce_mode(tacoma, 1), "even", n=20)

    def test_fourth_order(self, tacoma):
        mode = reduce_mode(tacoma, 2)
        exact = find_eigenvalues(mode, "even", 5)[-1]
        e1 = abs(discretization_oracle(mode, "even", 100, 5)[-1] - exact)
        e2 = abs(discretization_oracle(mode, "even", 200, 5)[-1] - exact)
        assert np.log2(e1 / e2) >= 3.5

    def test_isotropic_limit(self, tacoma):
        iso = tacoma.with_kappa(0.0)
        mode = reduce_mode(iso, 40)
        for parity in Parity:
            ref = find_eigenvalues(mode, parity, 3)
            assert np.allclose(discretization_oracle(mode, parity, 200, 3), ref, rtol=1e-6)

    def test_raw_values_close(self, tacoma):
        mode = reduce_mode(tacoma, 1)
        raw = discretization_oracle(mode, "odd", 100, 3, refine=False)
        assert np.allclose(raw, find_eigenvalues(mode, "odd", 3), rtol=1e-5)


class TestSpectrum:
    def test_sorted_and_sized(self, spectrum):
        lam = spectrum.eigenvalues
        assert len(spectrum) == 12 * 2 * 4
        assert np.all(np.diff(lam) >= 0)

    def test_first_eighteen_in_families(self, spectrum):
        fam = {(p.m, p.parity) for p in spectrum.lowest(18)}
        assert all(spectrum.find(m, par, 1).index == 1 for m, par in fam)
        assert all(p.index == 1 for p in spectrum.lowest(18))

    def test_certificate(self, spectrum, tacoma):
        assert spectrum.cutoff <= reduce_mode(tacoma, 13).lower_bound
        for p in spectrum.pairs:
            if p.index == 4:
                assert p.lam < spectrum.cutoff or p not in spectrum.certified
        with pytest.raises(IncompleteSpectrumError):
            spectrum.lowest(len(spectrum.certified) + 1)

    def test_small_spectrum(self, tacoma):
        from orthoplate.spectral import assemble_spectrum

        s = assemble_spectrum(tacoma, m_max=1, k_per_mode=2)
        assert len(s) == 4 and set(s.vertical) == {1}
        assert s.cutoff <= reduce_mode(tacoma, 2).lower_bound

    def test_frequency_inversion(self, tacoma):
        lam = 2 * tacoma.M * np.pi**2 / tacoma.ell
        assert frequency(lam, tacoma.M, tacoma.ell) == pytest.approx(1.0, rel=1e-15)
        assert eigenvalue_for_frequency(1.0, tacoma.M, tacoma.ell) == pytest.approx(lam, rel=1e-15)

    def test_frequencies_table(self, spectrum):
        fr = frequencies(spectrum)
        assert len(fr["vertical_hz"]) == 12 and len(fr["torsional_hz"]) == 12
        assert fr["all_hz"][0] == fr["vertical_hz"][0]
        assert np.allclose(fr["omega"], 2 * np.pi * fr["all_hz"])

    def test_find_missing(self, spectrum):
        with pytest.raises(KeyError):
            spectrum.find(13, "even")


class TestStatic:
    def test_zero_load(self, tacoma):
        sol = static_solve(tacoma, UniformLoad(0.0))
        assert np.all(sol.field.u == 0) and sol.modes == ()
        assert sol.energies()["total"] == 0.0

    @pytest.mark.filterwarnings("ignore::orthoplate.spectral.static.TruncationWarning")
    def test_linearity(self, tacoma):
        a = static_solve(tacoma, UniformLoad(1.0), m_max=9)
        b = static_solve(tacoma, UniformLoad(-3.5), m_max=9)
        assert np.allclose(b.field.u, -3.5 * a.field.u, rtol=0, atol=1e-13 * np.abs(b.field.u).max())

    def test_uniform_load(self, tacoma):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", TruncationWarning)
            sol = static_solve(tacoma, UniformLoad(1000.0))
        u = sol.field.u
        assert np.abs(u - u[:, ::-1]).max() <= 1e-12 * np.abs(u).max()
        assert u[100, 20] > 0
        assert sol.energies()["total"] < 0
        assert sol.interior_residual() <= 1e-6
        assert max(sol.boundary_residuals().values()) <= 1e-6

    def test_truncation_warning(self, tacoma):
        with pytest.warns(TruncationWarning):
            static_solve(tacoma, UniformLoad(1.0), m_max=1)

    def test_eigen_consistency(self, spectrum, tacoma):
        g = Grid(tacoma.L, tacoma.ell)
        hard = [spectrum.find(3, "odd", 2), spectrum.find(7, "even", 4), spectrum.find(12, "odd", 4)]
        for p in list(spectrum.certified) + hard:
            sol = static_solve(tacoma, ModeLoad(p, p.lam), m_max=12)
            U = p.field(g.x, g.y).u
            assert np.abs(sol.field.u - U).max() <= 1e-6 * np.abs(U).max(), p.label

    def test_eigen_consistency_conditioning(self, spectrum, tacoma):
        # a load error eps reaches the lowest mode of the same m amplified by lam / lam_1(m)
        g = Grid(tacoma.L, tacoma.ell)
        eps = np.finfo(float).eps
        for m, parity in ((1, "odd"), (2, "even"), (4, "odd")):
            p = spectrum.find(m, parity, 4)
            cond = p.lam / spectrum.find(m, "even", 1).lam
            sol = static_solve(tacoma, ModeLoad(p, p.lam), m_max=12)
            U = p.field(g.x, g.y).u
            assert np.abs(sol.field.u - U).max() <= 1e4 * eps * cond * np.abs(U).max(), p.label

    def test_smooth_load_converges_without_warning(self, tacoma):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            static_solve(tacoma, SineLoad(3, 1.0, tacoma.L))

    def test_random_loads(self, tacoma, rng):
        for _ in range(3):
            c = rng.normal(size=4)
            load = FunctionLoad(lambda x, y: np.sin(np.pi * x / tacoma.L) ** 2 * (c[0] + c[1] * y + c[2] * np.cos(y) + c[3] * y**3))
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", TruncationWarning)
                sol = static_solve(tacoma, load, m_max=15)
            assert sol.interior_residual() <= 1e-6
            assert max(sol.boundary_residuals().values()) <= 1e-6

    def test_minimizer(self, tacoma, rng):
        sol = static_solve(tacoma, SineLoad(2, 500.0, tacoma.L))
        E0 = total_energy(tacoma, sol.field, sol.load_values)
        for _ in range(5):
            v = random_modal_field(rng, tacoma.L, tacoma.ell, nx=201, ny=41)
            v = v * (0.01 * np.abs(sol.field.u).max() / np.abs(v.u).max())
            assert total_energy(tacoma, sol.field + v, sol.load_values) > E0

    def test_matches_fem(self, tacoma):
        mode = reduce_mode(tacoma, 2)
        rhs = lambda y: 100.0 * (1 + 0.3 * y + 0.05 * y**2)  # noqa: E731
        y = np.linspace(-tacoma.ell, tacoma.ell, 161)
        states, _ = solve_mode_bvp(mode, y, rhs(y) / tacoma.R)
        fem = solve_mode_bvp_fem(mode, rhs, n=200)(y)
        assert np.abs(states[0] - fem).max() <= 1e-8 * np.abs(fem).max()

    def test_sine_load_single_mode(self, tacoma):
        sol = static_solve(tacoma, SineLoad(1, 10.0, tacoma.L))
        assert sol.modes == (1,)
        mode = reduce_mode(tacoma, 1)
        fem = solve_mode_bvp_fem(mode, lambda y: 10.0 + 0 * y)(sol.field.y)
        assert np.allclose(sol.field.u[100], fem, rtol=1e-8)

    def test_grid_load(self, tacoma):
        g = Grid(tacoma.L, tacoma.ell)
        X, Y = g.mesh()
        f = 50.0 * np.sin(np.pi * X / tacoma.L) * (1 + Y / tacoma.ell)
        sol = static_solve(tacoma, GridLoad(g.x, g.y, f), m_max=3)
        assert sol.truncation <= 1e-10
        assert sol.interior_residual() <= 1e-6
        with pytest.raises(GridError):
            static_solve(tacoma, GridLoad(g.x, g.y, f), grid=Grid(tacoma.L, tacoma.ell, 201, 21))

    def test_fourth_order_y_refinement(self, tacoma):
        mode = reduce_mode(tacoma, 1)
        g = lambda y: np.exp(y / 3.0)  # noqa: E731
        exact = solve_mode_bvp(mode, np.linspace(-6, 6, 1281), g(np.linspace(-6, 6, 1281)))[0][0][::64]
        errs = []
        for n in (21, 41):
            y = np.linspace(-6, 6, n)
            errs.append(np.abs(solve_mode_bvp(mode, y, g(y))[0][0][:: (n - 1) // 20] - exact).max())
        assert errs[0] / errs[1] > 12


@pytest.mark.slow
class TestSweep2D:
    def test_no_missing_eigenvalues(self, tacoma, spectrum):
        res = plate_eigenvalues_2d(tacoma, k=22)
        union = spectrum.eigenvalues[:22]
        assert np.abs(res.eigenvalues / union - 1).max() <= 1e-3
