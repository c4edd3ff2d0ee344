"""Two-potential solver: stepping, coupled boundary solves, verification."""

import numpy as np
import pytest

from eoscatter.grid import GridSpec, Material2
from eoscatter.history import DelayBuffer
from eoscatter.mms import ManufacturedFields2
from eoscatter.model2 import (
    BoundaryMatrices,
    DivergenceError,
    Scenario2,
    State2,
    boundary_update_m2,
    interior_step_m2,
    run_m2,
)
from eoscatter.sources import GaussianSource

from oracles import reference_step_m2

MAT = Material2(mu1=2.0, nu1=2.0, mu0=1.0, nu0=1.0, alpha=-1.0, beta=0.3, gamma=8.0)
MATCHED = Material2(
    mu1=1.0, nu1=1.0, mu0=1.0, nu0=1.0, alpha=0.0, beta=0.0, gamma=0.0
)
PULSE = GaussianSource(
    amplitude=1.0, x_center=4.0, space_rate=36.0, t_center=1.0, time_rate=4.0
)


def scenario(n=100, mat=MAT, cfl=0.4, t_end=2.0, **kw):
    grid = GridSpec(0.0, 3.0, n)
    dt = cfl * grid.dx / mat.c1
    return Scenario2(grid=grid, mat=mat, dt=dt, t_end=t_end, **kw)


def test_boundary_matrices_share_their_determinant():
    bm = BoundaryMatrices(MAT)
    assert bm.det == pytest.approx(8.0, rel=1e-14)
    det_left = np.linalg.det(bm.left)
    det_right = np.linalg.det(bm.right)
    assert det_left == pytest.approx(bm.det, rel=1e-14)
    assert det_right == pytest.approx(bm.det, rel=1e-14)
    assert np.allclose(bm.left_inv @ bm.left, np.eye(2), atol=1e-14)
    assert np.allclose(bm.right_inv @ bm.right, np.eye(2), atol=1e-14)


def test_null_run_is_exactly_zero():
    res = run_m2(scenario(n=16, t_end=1.0))
    for series in (res.phi_a0, res.psi_a0, res.phi_a1, res.psi_a1):
        assert np.all(series == 0.0)
    for arr in (res.final.phi, res.final.psi, res.final.rho, res.final.j):
        assert np.all(arr == 0.0)


def test_quadratic_profile_steps_exactly():
    free = Material2(mu1=2.0, nu1=2.0, mu0=1.0, nu0=1.0,
                     alpha=0.0, beta=0.0, gamma=0.0)
    scn = scenario(n=20, mat=free)
    g = scn.grid
    state = State2(
        phi=g.x**2, psi=g.x**2, rho=np.zeros(g.n), j=np.zeros(g.n),
        phi_a0=g.a0**2, psi_a0=g.a0**2, phi_a1=g.a1**2, psi_a1=g.a1**2,
        n=0, t=0.0,
    )
    phi, psi, rho, j = interior_step_m2(state, scn)
    dt = scn.dt
    want_phi = g.x**2 + dt * free.mu1 * 2.0 * g.x + 0.5 * dt**2 * (
        free.mu1 * free.nu1 * 2.0
    )
    want_psi = g.x**2 + dt * free.nu1 * 2.0 * g.x + 0.5 * dt**2 * (
        free.mu1 * free.nu1 * 2.0
    )
    assert np.max(np.abs(phi - want_phi)) < 1e-12
    assert np.max(np.abs(psi - want_psi)) < 1e-12
    assert np.all(rho == 0.0) and np.all(j == 0.0)


def test_single_step_matches_longhand_oracle():
    scn = scenario(n=40)
    g = scn.grid
    rng = np.random.default_rng(11)
    state = State2(
        phi=rng.standard_normal(g.n), psi=rng.standard_normal(g.n),
        rho=rng.standard_normal(g.n), j=rng.standard_normal(g.n),
        phi_a0=0.21, psi_a0=-0.4, phi_a1=0.9, psi_a1=0.05, n=0, t=0.0,
    )
    got = interior_step_m2(state, scn)
    want = reference_step_m2(
        state.phi, state.psi, state.rho, state.j,
        state.phi_a0, state.phi_a1, state.psi_a0, state.psi_a1,
        MAT.mu1, MAT.nu1, MAT.alpha, MAT.beta, MAT.gamma, g.dx, scn.dt,
    )
    for a, b in zip(got, want):
        assert np.max(np.abs(a - b)) < 1e-13


def histories(scn, fill_j=0.0, fill_pair=(0.0, 0.0), levels=6):
    g = scn.grid
    window = scn.transit + 2 * scn.dt
    j_hist = DelayBuffer(scn.t0, scn.dt, window, shape=(g.n,))
    p0 = DelayBuffer(scn.t0, scn.dt, window, shape=(2,))
    p1 = DelayBuffer(scn.t0, scn.dt, window, shape=(2,))
    for _ in range(levels):
        j_hist.append(np.full(g.n, fill_j))
        p0.append(np.array(fill_pair))
        p1.append(np.array(fill_pair))
    return j_hist, p0, p1


def test_boundary_update_zero_histories_zero_incident():
    g = GridSpec(0.0, 3.0, 8)
    scn = Scenario2(grid=g, mat=MAT, dt=0.3, t_end=2.0)
    bm = BoundaryMatrices(MAT)
    j_hist, p0, p1 = histories(scn)
    got = boundary_update_m2(scn, bm, j_hist, p0, p1, 1.2)
    assert got == (0.0, 0.0, 0.0, 0.0)


def test_boundary_update_constant_incident_pair(monkeypatch):
    g = GridSpec(0.0, 3.0, 8)
    mat = MAT
    scn = Scenario2(grid=g, mat=mat, dt=0.3, t_end=2.0, source=PULSE)
    bm = BoundaryMatrices(mat)
    j_hist, p0, p1 = histories(scn)
    monkeypatch.setattr(
        "eoscatter.model2.incident_pair",
        lambda *a, **kw: (1.0, mat.nu0 / mat.c0),
    )
    got = boundary_update_m2(scn, bm, j_hist, p0, p1, 1.2)
    assert got[:2] == (0.0, 0.0)
    rhs = 2.0 * mat.c0 * np.array([1.0, mat.nu0 / mat.c0])
    want = np.linalg.solve(bm.right, rhs)
    assert got[2] == pytest.approx(want[0], rel=1e-13)
    assert got[3] == pytest.approx(want[1], rel=1e-13)


def test_mms_step_local_error_is_third_order():
    errs = {}
    for n in (100, 200):
        scn = scenario(n=n, mms=ManufacturedFields2.demo())
        g, t = scn.grid, 1.9
        mms = scn.mms
        state = State2(
            phi=mms.phi.value(g.x, t), psi=mms.psi.value(g.x, t),
            rho=mms.rho.value(g.x, t), j=mms.j.value(g.x, t),
            phi_a0=float(mms.phi.value(g.a0, t)),
            psi_a0=float(mms.psi.value(g.a0, t)),
            phi_a1=float(mms.phi.value(g.a1, t)),
            psi_a1=float(mms.psi.value(g.a1, t)), n=0, t=t,
        )
        out = interior_step_m2(state, scn)
        t1 = t + scn.dt
        exact = (
            mms.phi.value(g.x, t1), mms.psi.value(g.x, t1),
            mms.rho.value(g.x, t1), mms.j.value(g.x, t1),
        )
        errs[n] = [np.max(np.abs(a - b)) for a, b in zip(out, exact)]
    assert 6.0 < errs[100][0] / errs[200][0] < 10.0
    assert 6.0 < errs[100][1] / errs[200][1] < 10.0
    assert errs[100][2] / errs[200][2] > 4.0
    assert errs[100][3] / errs[200][3] > 4.0


def test_mms_run_tracks_exact_solution():
    scn = scenario(n=100, mms=ManufacturedFields2.demo(), t_end=2.0)
    res = run_m2(scn)
    g, t = scn.grid, res.final.t
    for name in ("phi", "psi"):
        num = getattr(res.final, name)
        ex = getattr(scn.mms, name).value(g.x, t)
        ref = np.max(np.abs(ex))
        assert ref > 0.5
        assert np.max(np.abs(num - ex)) < 0.05 * ref


def test_divergence_error_names_step():
    grid = GridSpec(0.0, 3.0, 16)
    dt = 3.0 * grid.dx / MAT.c1
    scn = Scenario2(
        grid=grid, mat=MAT, dt=dt, t_end=500 * dt, mms=ManufacturedFields2.demo()
    )
    with np.errstate(over="ignore", invalid="ignore"):
        with pytest.raises(DivergenceError, match="step"):
            run_m2(scn)


def test_impedance_matched_medium_is_transparent():
    scn = scenario(n=200, mat=MATCHED, t_end=4.0, source=PULSE)
    res = run_m2(scn)
    peak = np.max(np.abs(res.phi_a1))
    assert peak > 0.1
    # no reflection: the left-going component at the right boundary stays tiny
    reflected = (MATCHED.c0 * res.phi_a1 - MATCHED.mu0 * res.psi_a1) / (
        2.0 * MATCHED.c0
    )
    assert np.max(np.abs(reflected)) < 2e-2 * peak
    # interior field equals the freely propagating incident wave
    g = scn.grid
    t = res.final.t
    delays = (g.a1 - g.x) / MATCHED.c0
    want = np.interp(t - delays, res.times, res.phi_a1)
    err = np.max(np.abs(res.final.phi - want))
    assert err < 2e-2 * peak
