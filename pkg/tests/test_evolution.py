import numpy as np
import pytest

from cshlab.grid import Grid2D, LieFieldGrid, SPECTRAL, random_band_limited
from cshlab.evolution import (
    BlowUpError,
    ConstraintError,
    EvolutionConfig,
    FieldState,
    InitialData,
    SmallnessError,
    constraint_residual,
    curvature_constraint_residuals,
    evolve,
    homogeneous_solution,
    initial_time_derivatives,
    make_abelian_pair_data,
    make_initial_state,
    merge_halfwaves,
    monitor,
    picard_iterate,
    rhs_A,
    rhs_phi,
    split_to_halfwaves,
    state_distance_h1,
    step,
    _Stepper,
    _EPS3,
)
from cshlab.lie import PhysicsParams, build_su_n_basis


@pytest.fixture(scope="module")
def su2():
    return build_su_n_basis(2)


@pytest.fixture(scope="module")
def params():
    return PhysicsParams(v=1.0)


def lie_zero(grid, g):
    return LieFieldGrid(grid, np.zeros((g.dim, grid.M, grid.M), dtype=complex), SPECTRAL)


def random_state(grid, g, seed, band=3, amp=0.1):
    rng = np.random.default_rng(seed)

    def fld():
        comps = [random_band_limited(grid, rng, band, amplitude=amp).values
                 for _ in range(g.dim)]
        return LieFieldGrid(grid, np.array(comps), SPECTRAL)

    return FieldState(phi=fld(), dphi=fld(), A=[fld() for _ in range(3)],
                      dA=[fld() for _ in range(3)], t=0.0)


class TestRhs:
    def test_zero_state(self, su2, params):
        grid = Grid2D(16)
        z = lie_zero(grid, su2)
        state = FieldState(phi=z, dphi=z.copy(), A=[z.copy() for _ in range(3)],
                           dA=[z.copy() for _ in range(3)])
        assert rhs_phi(state, su2, params).l2_norm() == 0.0
        for mu in range(3):
            assert rhs_A(state, mu, su2).l2_norm() == 0.0

    def test_constant_phi_mass_term(self, su2, params):
        # A = 0, phi = c T^1 constant: rhs reduces to -2 v^4 c T^1 pointwise
        grid = Grid2D(16)
        c = 0.4
        vals = np.zeros((3, 16, 16), dtype=complex)
        vals[0] = c
        phi = LieFieldGrid(grid, vals)
        z = lie_zero(grid, su2).to_physical()
        state = FieldState(phi=phi, dphi=z, A=[z.copy() for _ in range(3)],
                           dA=[z.copy() for _ in range(3)])
        out = rhs_phi(state, su2, params).to_physical()
        assert np.max(np.abs(out.values[0] - (-2.0 * c))) < 1e-12
        assert np.max(np.abs(out.values[1:])) < 1e-12

    def test_higgs_sign_switch(self, su2, params):
        grid = Grid2D(16)
        state = random_state(grid, su2, 0)
        minus = rhs_phi(state, su2, params, higgs_sign=-1.0)
        plus = rhs_phi(state, su2, params, higgs_sign=+1.0)
        diff = LieFieldGrid(grid, plus.values - minus.values, SPECTRAL)
        assert diff.l2_norm() > 0  # the switch changes only the potential part

    def test_abelian_direction_reduction(self, su2, params):
        # all fields along T^1: every commutator vanishes identically
        grid = Grid2D(16)
        rng = np.random.default_rng(1)

        def fld():
            comps = np.zeros((3, 16, 16), dtype=complex)
            comps[0] = random_band_limited(grid, rng, 3, amplitude=0.2).values
            return LieFieldGrid(grid, comps, SPECTRAL)

        state = FieldState(phi=fld(), dphi=fld(), A=[fld() for _ in range(3)],
                           dA=[fld() for _ in range(3)])
        f_phi = rhs_phi(state, su2, params)
        # pure potential: compare against -grad evaluated directly
        from cshlab.lie import higgs_fields
        phi_p = state.phi.to_physical().values
        grad, _ = higgs_fields(phi_p, su2, params)
        target = LieFieldGrid(grid, -np.fft.fft2(grad, axes=(-2, -1)) / 16 ** 2, SPECTRAL)
        num = LieFieldGrid(grid, f_phi.values - target.values, SPECTRAL).l2_norm()
        assert num <= 1e-10 * max(target.l2_norm(), 1e-30)
        for mu in range(3):
            assert rhs_A(state, mu, su2).l2_norm() < 1e-12

    def test_rhs_A_matrix_oracle(self, su2, params):
        # independent dense-matrix assembly of all index contractions, 8x8 grid
        grid = Grid2D(8)
        state = random_state(grid, su2, 2, band=1, amp=0.5).to_spectral()
        mask = grid.dealias_mask(5)
        T = su2.generators

        def mats(spec_vals):
            phys = np.fft.ifft2(spec_vals * mask, axes=(-2, -1)) * grid.M ** 2
            return np.einsum("axy,aij->xyij", phys, T)

        def dx_mat(spec_vals, axis):
            comp = grid.k1 if axis == 1 else grid.k2
            return mats(1j * comp * spec_vals)

        def mm(a, b):
            return np.einsum("xyij,xyjk->xyik", a, b)

        def dag(a):
            return np.conj(np.transpose(a, (0, 1, 3, 2)))

        def to_spec(matfield):
            coeffs = np.einsum("xyij,aji->axy", matfield, T) / 2.0
            return np.fft.fft2(coeffs, axes=(-2, -1)) / grid.M ** 2 * mask

        phi_m = mats(state.phi.values)
        dphi_m = mats(state.dphi.values)
        A_m = [mats(f.values) for f in state.A]
        dA_m = [mats(f.values) for f in state.dA]
        eta = np.array([1.0, -1.0, -1.0])

        def d_mu(mu, which):
            base, dbase = which
            return dbase if mu == 0 else dx_mat(base, mu)

        phi_pair = (state.phi.values, dphi_m)
        A_pairs = [(state.A[m].values, dA_m[m]) for m in range(3)]

        for mu in range(3):
            acc = np.zeros_like(phi_m)
            # [d^nu A_mu, A_nu]
            for nu in range(3):
                dnu_Amu = d_mu(nu, A_pairs[mu]) * eta[nu]
                acc += mm(dnu_Amu, A_m[nu]) - mm(A_m[nu], dnu_Amu)
            # - eps Q^{nu al}(phi+, phi) + (phi, phi+)
            for nu in range(3):
                for al in range(3):
                    e = _EPS3[mu, nu, al]
                    if e == 0.0:
                        continue
                    dn_phi = d_mu(nu, phi_pair) * eta[nu]
                    da_phi = d_mu(al, phi_pair) * eta[al]
                    q1 = mm(dag(dn_phi), da_phi) - mm(dag(da_phi), dn_phi)
                    q2 = mm(dn_phi, dag(da_phi)) - mm(da_phi, dag(dn_phi))
                    acc -= e * (q1 + q2)
            # - eps d^nu ([phi+, [A^al, phi]] - [[A^al, phi]+, phi])
            S_specs = []
            dS_mats = []
            for al in range(3):
                Aalm = eta[al] * A_m[al]
                dAalm = eta[al] * dA_m[al]
                inner = mm(Aalm, phi_m) - mm(phi_m, Aalm)
                dinner = (mm(dAalm, phi_m) - mm(phi_m, dAalm)
                          + mm(Aalm, dphi_m) - mm(dphi_m, Aalm))
                s = (mm(dag(phi_m), inner) - mm(inner, dag(phi_m))
                     - mm(dag(inner), phi_m) + mm(phi_m, dag(inner)))
                ds = (mm(dag(dphi_m), inner) - mm(inner, dag(dphi_m))
                      + mm(dag(phi_m), dinner) - mm(dinner, dag(phi_m))
                      - mm(dag(dinner), phi_m) + mm(phi_m, dag(dinner))
                      - mm(dag(inner), dphi_m) + mm(dphi_m, dag(inner)))
                S_specs.append(to_spec(s))
                dS_mats.append(ds)
            for nu in range(3):
                for al in range(3):
                    e = _EPS3[mu, nu, al]
                    if e == 0.0:
                        continue
                    if nu == 0:
                        acc -= e * dS_mats[al]
                    else:
                        comp = grid.k1 if nu == 1 else grid.k2
                        dS_coeff = np.fft.ifft2(1j * comp * S_specs[al] * mask,
                                                axes=(-2, -1)) * grid.M ** 2
                        acc += e * np.einsum("axy,aij->xyij", dS_coeff, T)
            oracle = to_spec(acc)
            mine = rhs_A(state, mu, su2).values
            num = LieFieldGrid(grid, mine - oracle, SPECTRAL).l2_norm()
            den = max(LieFieldGrid(grid, oracle, SPECTRAL).l2_norm(), 1e-30)
            assert num / den < 1e-10


class TestInitialData:
    def test_all_zero(self, su2):
        grid = Grid2D(16)
        z = lie_zero(grid, su2)
        data = InitialData(f=z, g=z.copy(), a=[z.copy() for _ in range(3)])
        dA0, dAj = initial_time_derivatives(data, su2)
        assert dA0.l2_norm() == 0.0
        assert all(f.l2_norm() == 0.0 for f in dAj)
        assert constraint_residual(data, su2) == 0.0

    def test_single_generator_current_vanishes(self, su2):
        grid = Grid2D(16)
        rng = np.random.default_rng(3)
        comps = np.zeros((3, 16, 16), dtype=complex)
        comps[0] = random_band_limited(grid, rng, 3, real=True).values
        f = LieFieldGrid(grid, comps, SPECTRAL)
        a0 = lie_zero(grid, su2)
        a0v = a0.values.copy()
        a0v[1] = random_band_limited(grid, rng, 3).values
        a0 = LieFieldGrid(grid, a0v, SPECTRAL)
        z = lie_zero(grid, su2)
        data = InitialData(f=f, g=z, a=[a0, z.copy(), z.copy()])
        dA0, dAj = initial_time_derivatives(data, su2)
        assert dA0.l2_norm() < 1e-14
        for j, f_j in enumerate(dAj, start=1):
            comp = grid.k1 if j == 1 else grid.k2
            target = 1j * comp * a0.values
            diff = LieFieldGrid(grid, f_j.values - target, SPECTRAL).l2_norm()
            assert diff < 1e-12

    def test_dA0_is_divergence(self, su2):
        grid = Grid2D(16)
        rng = np.random.default_rng(4)

        def fld():
            comps = [random_band_limited(grid, rng, 3).values for _ in range(3)]
            return LieFieldGrid(grid, np.array(comps), SPECTRAL)

        data = InitialData(f=fld(), g=fld(), a=[fld() for _ in range(3)])
        dA0, _ = initial_time_derivatives(data, su2)
        div = 1j * (grid.k1 * data.a[1].values + grid.k2 * data.a[2].values)
        assert LieFieldGrid(grid, dA0.values - div, SPECTRAL).l2_norm() < 1e-13

    def test_constraint_zero_for_trivial_gauge(self, su2):
        grid = Grid2D(16)
        rng = np.random.default_rng(5)
        comps = [random_band_limited(grid, rng, 3).values for _ in range(3)]
        f = LieFieldGrid(grid, np.array(comps), SPECTRAL)
        z = lie_zero(grid, su2)
        data = InitialData(f=f, g=z, a=[z.copy(), z.copy(), z.copy()])
        assert constraint_residual(data, su2) < 1e-14

    def test_abelian_pair_satisfies_constraint(self, su2):
        grid = Grid2D(32)
        data = make_abelian_pair_data(grid, su2, seed=6, band=4, amplitude=0.05)
        scale = data.f.l2_norm() + data.g.l2_norm() + sum(f.l2_norm() for f in data.a)
        assert constraint_residual(data, su2) < 1e-13 * max(scale, 1.0)

    def test_constraint_pointwise_oracle(self, su2):
        grid = Grid2D(16)
        rng = np.random.default_rng(7)

        def fld():
            comps = [random_band_limited(grid, rng, 2).values for _ in range(3)]
            return LieFieldGrid(grid, np.array(comps), SPECTRAL)

        data = InitialData(f=fld(), g=fld(), a=[fld() for _ in range(3)])
        got = constraint_residual(data, su2)
        # independent pointwise assembly through matrices
        T = su2.generators

        def mats(f):
            return np.einsum("axy,aij->xyij", f.to_physical().values, T)

        def mm(a, b):
            return np.einsum("xyij,xyjk->xyik", a, b)

        def comm(a, b):
            return mm(a, b) - mm(b, a)

        def dag(a):
            return np.conj(np.transpose(a, (0, 1, 3, 2)))

        a1, a2, a0 = mats(data.a[1]), mats(data.a[2]), mats(data.a[0])
        fm, gm = mats(data.f), mats(data.g)
        d1a2 = np.einsum("axy,aij->xyij",
                         (np.fft.ifft2(1j * grid.k1 * data.a[2].values, axes=(-2, -1))
                          * grid.M ** 2), T)
        d2a1 = np.einsum("axy,aij->xyij",
                         (np.fft.ifft2(1j * grid.k2 * data.a[1].values, axes=(-2, -1))
                          * grid.M ** 2), T)
        dcov = gm + comm(a0, fm)
        res_m = d1a2 - d2a1 + comm(a1, a2) - comm(dag(fm), dcov) + comm(dag(dcov), fm)
        coeffs = np.einsum("xyij,aji->axy", res_m, T) / 2.0
        oracle = LieFieldGrid(grid, np.fft.fft2(coeffs, axes=(-2, -1)) / grid.M ** 2,
                              SPECTRAL).l2_norm()
        assert abs(got - oracle) <= 1e-12 * max(oracle, 1.0)


class TestHalfWaves:
    def test_round_trip(self, su2):
        grid = Grid2D(16)
        state = random_state(grid, su2, 8)
        back = merge_halfwaves(split_to_halfwaves(state))
        for a, b in [(state.phi, back.phi), (state.dphi, back.dphi)]:
            assert LieFieldGrid(grid, a.values - b.values, SPECTRAL).l2_norm() < 1e-12
        for mu in range(3):
            assert LieFieldGrid(grid, state.A[mu].values - back.A[mu].values,
                                SPECTRAL).l2_norm() < 1e-12

    def test_static_split(self, su2):
        grid = Grid2D(16)
        state = random_state(grid, su2, 9)
        z = lie_zero(grid, su2)
        state = FieldState(phi=state.phi, dphi=z, A=state.A,
                           dA=[z.copy() for _ in range(3)])
        hw = split_to_halfwaves(state)
        half = 0.5 * state.phi.values
        assert np.max(np.abs(hw.phi_plus.values - half)) < 1e-13
        assert np.max(np.abs(hw.phi_minus.values - half)) < 1e-13

    def test_pure_velocity_split(self, su2):
        grid = Grid2D(16)
        rng = np.random.default_rng(10)
        comps = [random_band_limited(grid, rng, 3).values for _ in range(3)]
        dphi = LieFieldGrid(grid, np.array(comps), SPECTRAL)
        z = lie_zero(grid, su2)
        state = FieldState(phi=z, dphi=dphi, A=[z.copy() for _ in range(3)],
                           dA=[z.copy() for _ in range(3)])
        hw = split_to_halfwaves(state)
        k = grid.kmag
        inv = np.where(k > 0, 1.0 / np.where(k > 0, k, 1.0), 0.0)
        target = 0.5 * (-1j) * inv * dphi.values
        assert np.max(np.abs(hw.phi_plus.values - target)) < 1e-13
        assert np.max(np.abs(hw.phi_minus.values + target)) < 1e-13


class TestHomogeneous:
    def test_sum_at_zero(self, su2):
        grid = Grid2D(16)
        rng = np.random.default_rng(11)
        u0 = LieFieldGrid(grid, np.array(
            [random_band_limited(grid, rng, 3).values for _ in range(3)]), SPECTRAL)
        du0 = LieFieldGrid(grid, np.array(
            [random_band_limited(grid, rng, 3).values for _ in range(3)]), SPECTRAL)
        total = (homogeneous_solution(u0, du0, 0.0, +1).values
                 + homogeneous_solution(u0, du0, 0.0, -1).values)
        assert np.max(np.abs(total - u0.values)) < 1e-13

    def test_single_mode_phase(self, su2):
        grid = Grid2D(16)
        vals = np.zeros((3, 16, 16), dtype=complex)
        vals[0, 1, 0] = 1.0  # |xi| = 1
        u0 = LieFieldGrid(grid, vals, SPECTRAL)
        z = lie_zero(grid, su2)
        for sign in (+1, -1):
            out = homogeneous_solution(u0, z, np.pi, sign)
            assert abs(out.values[0, 1, 0] - 0.5 * np.exp(sign * 1j * np.pi)) < 1e-13
            assert abs(out.values[0, 1, 0] + 0.5) < 1e-12

    def test_l2_conservation(self, su2):
        grid = Grid2D(16)
        rng = np.random.default_rng(12)
        u0 = LieFieldGrid(grid, np.array(
            [random_band_limited(grid, rng, 4).values for _ in range(3)]), SPECTRAL)
        du0 = LieFieldGrid(grid, np.array(
            [random_band_limited(grid, rng, 4).values for _ in range(3)]), SPECTRAL)
        n0 = homogeneous_solution(u0, du0, 0.0, +1).l2_norm()
        for t in (0.3, 1.7, 9.1):
            nt = homogeneous_solution(u0, du0, t, +1).l2_norm()
            assert abs(nt - n0) < 1e-12 * max(n0, 1.0)


class TestStepping:
    def test_zero_data_stays_zero(self, su2, params):
        grid = Grid2D(16)
        z = lie_zero(grid, su2)
        data = InitialData(f=z, g=z.copy(), a=[z.copy() for _ in range(3)])
        times, frames = evolve(data, 0.02, su2, params,
                               EvolutionConfig(dt=5e-3))
        assert frames[-1].phi.l2_norm() == 0.0

    def test_linear_regime_matches_homogeneous(self, su2, params, monkeypatch):
        grid = Grid2D(16)
        data = make_abelian_pair_data(grid, su2, seed=13, band=3, amplitude=0.05)
        monkeypatch.setattr(_Stepper, "nonlinear",
                            lambda self, y: np.zeros_like(y))
        cfg = EvolutionConfig(dt=1e-2)
        times, frames = evolve(data, 0.1, su2, params, cfg)
        state0 = make_initial_state(data, su2)
        t = times[-1]
        target = (homogeneous_solution(state0.phi, state0.dphi, t, +1).values
                  + homogeneous_solution(state0.phi, state0.dphi, t, -1).values)
        got = frames[-1].phi.values
        assert np.max(np.abs(got - target)) < 1e-12

    def test_temporal_order(self, su2, params):
        grid = Grid2D(32)
        data = make_abelian_pair_data(grid, su2, seed=14, band=3, amplitude=0.2)
        T = 0.08
        ends = []
        for dt in (T / 5, T / 10, T / 20):
            _, frames = evolve(data, T, su2, params, EvolutionConfig(dt=dt),
                               stride=10 ** 6)
            ends.append(frames[-1])
        e1 = state_distance_h1(ends[0], ends[1])
        e2 = state_distance_h1(ends[1], ends[2])
        order = np.log2(e1 / e2)
        assert order >= 2.0

    def test_blowup_detection(self, su2, params):
        grid = Grid2D(16)
        z = lie_zero(grid, su2)
        bad = z.values.copy()
        bad[0, 1, 0] = np.nan
        data = InitialData(f=LieFieldGrid(grid, bad, SPECTRAL), g=z,
                           a=[z.copy() for _ in range(3)])
        with pytest.raises(BlowUpError):
            evolve(data, 0.01, su2, params, EvolutionConfig(dt=5e-3))


class TestPicard:
    def test_zero_data(self, su2, params):
        grid = Grid2D(16)
        z = lie_zero(grid, su2)
        data = InitialData(f=z, g=z.copy(), a=[z.copy() for _ in range(3)])
        rep = picard_iterate(data, 0.1, 3, su2, params,
                             EvolutionConfig(picard_mesh=8))
        assert rep["differences"][0] < 1e-14

    def test_contraction_and_amplitude_scaling(self, su2, params):
        grid = Grid2D(32)
        ratios = []
        for amp in (0.02, 0.04):
            data = make_abelian_pair_data(grid, su2, seed=15, band=3, amplitude=amp)
            rep = picard_iterate(data, 0.1, 6, su2, params,
                                 EvolutionConfig(picard_mesh=16))
            assert rep["contracting"]
            assert max(rep["ratios"][:2]) < 0.5
            ratios.append(rep["ratios"][0])
        assert ratios[1] > 1.2 * ratios[0]  # contraction rate grows with data size

    def test_agrees_with_stepping(self, su2, params):
        grid = Grid2D(32)
        data = make_abelian_pair_data(grid, su2, seed=16, band=3, amplitude=0.02)
        cfg = EvolutionConfig(dt=0.1 / 32, picard_mesh=32)
        rep = picard_iterate(data, 0.1, 12, su2, params, cfg)
        times, frames = evolve(data, 0.1, su2, params, cfg, stride=1)
        dist = max(state_distance_h1(a, b)
                   for a, b in zip(rep["states"], frames))
        assert dist <= 1e-6

    def test_smallness_gate(self, su2, params):
        grid = Grid2D(16)
        data = make_abelian_pair_data(grid, su2, seed=17, band=3, amplitude=10.0)
        with pytest.raises(SmallnessError):
            picard_iterate(data, 0.1, 3, su2, params, EvolutionConfig())

    def test_constraint_gate(self, su2, params):
        grid = Grid2D(16)
        rng = np.random.default_rng(18)

        def fld():
            comps = [random_band_limited(grid, rng, 2, amplitude=0.01).values
                     for _ in range(3)]
            return LieFieldGrid(grid, np.array(comps), SPECTRAL)

        data = InitialData(f=fld(), g=fld(), a=[fld() for _ in range(3)])
        with pytest.raises(ConstraintError):
            picard_iterate(data, 0.1, 3, su2, params, EvolutionConfig())


class TestMonitor:
    def test_zero_trajectory(self, su2, params):
        grid = Grid2D(16)
        z = lie_zero(grid, su2)
        state = FieldState(phi=z, dphi=z.copy(), A=[z.copy() for _ in range(3)],
                           dA=[z.copy() for _ in range(3)])
        rows = monitor([0.0], [state], su2, params)
        assert rows[0]["gauge_residual"] == 0.0
        assert rows[0]["constraint_residual"] == 0.0

    def test_initial_consistency(self, su2, params):
        grid = Grid2D(32)
        data = make_abelian_pair_data(grid, su2, seed=19, band=3, amplitude=0.05)
        state = make_initial_state(data, su2)
        res, _ = curvature_constraint_residuals(state, su2)
        # all three pairs vanish for this family at t = 0
        assert res <= 1e-12

    def test_t0_equals_constraint_residual(self, su2, params):
        # with a_mu = 0 the (0, j) curvature pairs vanish by construction of
        # the initial time derivatives, so the monitor's t = 0 residual is
        # exactly the data-constraint norm even when the data violates it
        grid = Grid2D(16)
        rng = np.random.default_rng(23)

        def fld():
            comps = [random_band_limited(grid, rng, 3, amplitude=0.3).values
                     for _ in range(3)]
            return LieFieldGrid(grid, np.array(comps), SPECTRAL)

        z = lie_zero(grid, su2)
        data = InitialData(f=fld(), g=fld(), a=[z, z.copy(), z.copy()])
        res0, _ = curvature_constraint_residuals(make_initial_state(data, su2), su2)
        target = constraint_residual(data, su2)
        assert target > 1e-6  # data genuinely violates the constraint
        assert abs(res0 - target) <= 1e-12 * target

    def test_residuals_stay_small(self, su2, params):
        grid = Grid2D(32)
        data = make_abelian_pair_data(grid, su2, seed=20, band=3, amplitude=0.02)
        times, frames = evolve(data, 0.05, su2, params, EvolutionConfig(dt=2.5e-3),
                               stride=5)
        rows = monitor(times, frames, su2, params)
        assert max(r["gauge_relative"] for r in rows) <= 1e-4
        assert max(r["constraint_relative"] for r in rows) <= 1e-4
