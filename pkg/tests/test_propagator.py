from types import SimpleNamespace

import numpy as np
import pytest

import dicke_stirap.propagator as prop
from dicke_stirap.darkstate import dark_trajectory
from dicke_stirap.errors import AccuracyError, DomainError, StiffnessError
from dicke_stirap.hamiltonian import DriveParams
from dicke_stirap.propagator import (
    adiabatic_projection,
    dark_overlap,
    default_endpoints,
    fidelity,
    manifold_populations,
    prepare_dicke,
    propagate,
    renormalized_fidelity,
    representative_populations,
    transfer,
)
from dicke_stirap.symbasis import enumerate_basis, expand_to_computational


@pytest.fixture(scope="module")
def benchmark_run():
    b = enumerate_basis(5, 2)
    p = DriveParams(omega0=50.0, tau=-0.6, gamma=2.0)
    return propagate(b.basis_vector(2, 0), 5, 2, p, target=b.basis_vector(0, 0))


def test_constant_when_pulses_off():
    b = enumerate_basis(4, 2)
    p = DriveParams(omega0=10.0, tau=0.0, delta=3.0)
    psi0 = np.zeros(len(b), dtype=complex)
    psi0[b.manifold(0)] = np.array([0.6, 0.0, 0.8j])
    traj = propagate(psi0, 4, 2, p, window=(60.0, 70.0), n_report=11)
    np.testing.assert_allclose(traj.amplitudes, np.tile(psi0, (11, 1)), atol=1e-14)


def test_benchmark_run(benchmark_run):
    assert benchmark_run.dark_retention == pytest.approx(0.985, abs=0.005)
    assert benchmark_run.fidelity_vs_target[-1] == pytest.approx(0.985, abs=0.005)
    assert benchmark_run.fidelity_vs_target[0] == 0.0
    pops = benchmark_run.manifold_pops
    np.testing.assert_allclose(pops.sum(axis=1), benchmark_run.norm**2, atol=1e-10)
    np.testing.assert_allclose(pops, manifold_populations(benchmark_run))
    # decay only removes population
    assert np.all(np.diff(benchmark_run.norm) <= 1e-9)


def test_single_string_share_of_dicke_population(benchmark_run):
    # |11000>|0> carries 1/10 of |W_2^5>|0>
    rep = representative_populations(benchmark_run)[-1]
    b = benchmark_run.basis
    assert rep[b.index(0, 0)] == pytest.approx(benchmark_run.fidelity_vs_target[-1] / 10, rel=1e-12)
    assert rep[b.index(0, 0)] == pytest.approx(0.1, abs=0.002)
    full = expand_to_computational(5, 2, (0, 0), 0)
    assert abs(full[0b1 + 3]) ** 2 == pytest.approx(0.1)


def test_adiabatic_projection_benchmark(benchmark_run):
    proj = adiabatic_projection(benchmark_run)
    assert proj[0] == pytest.approx(1.0, abs=1e-6)
    assert proj.min() > 1 - 0.015 - 1e-3
    ref = dark_trajectory(5, 2, benchmark_run.params, benchmark_run.times)
    np.testing.assert_allclose(proj, adiabatic_projection(benchmark_run, ref))
    with pytest.raises(DomainError):
        dark_overlap(benchmark_run, ref[:-1])


def test_non_adiabatic_run_dips():
    b = enumerate_basis(5, 2)
    slow = propagate(b.basis_vector(2, 0), 5, 2, DriveParams(50.0, -0.6))
    fast = propagate(b.basis_vector(2, 0), 5, 2, DriveParams(5.0, -0.6))
    assert adiabatic_projection(fast).min() < 0.7
    assert adiabatic_projection(slow).min() > adiabatic_projection(fast).min() + 0.2


def test_unitarity_without_decay():
    b = enumerate_basis(6, 3)
    p = DriveParams(omega0=30.0, tau=-0.6, delta=4.0)
    traj = propagate(b.basis_vector(3, 0), 6, 3, p)
    assert np.max(np.abs(traj.norm - 1)) <= 10 * traj.tol
    np.testing.assert_allclose(traj.manifold_pops.sum(axis=1), 1.0, atol=1e-9)


def test_classic_stirap_against_fine_reference():
    p = DriveParams(omega0=50.0, tau=-0.6)
    fid, _ = transfer(1, 1, p, (1, 0), (0, 0))
    ref, _ = transfer(1, 1, p, (1, 0), (0, 0), tol=1e-13)
    assert fid > 0.999
    assert fid == pytest.approx(ref, abs=1e-8)


def test_fidelity_conventions(benchmark_run):
    b = benchmark_run.basis
    start = fidelity(benchmark_run, b.basis_vector(2, 0))
    assert start[0] == pytest.approx(1.0)
    renorm = renormalized_fidelity(benchmark_run, b.basis_vector(0, 0))
    assert renorm[-1] > benchmark_run.fidelity_vs_target[-1]
    with pytest.raises(DomainError):
        fidelity(benchmark_run, np.ones(3))
    with pytest.raises(DomainError):
        fidelity(benchmark_run, 2 * b.basis_vector(0, 0))


def test_intuitive_order_with_decay_fails():
    # pulse a first on the Fock -> Dicke transfer
    fid, _ = transfer(5, 2, DriveParams(50.0, 0.6, gamma=2.0), (2, 0), (0, 0))
    assert fid < 0.01


def test_grid_and_tolerance_convergence():
    b = enumerate_basis(5, 2)
    p = DriveParams(omega0=50.0, tau=-0.6, gamma=2.0)
    a = propagate(b.basis_vector(2, 0), 5, 2, p, n_report=401)
    c = propagate(b.basis_vector(2, 0), 5, 2, p, n_report=201, tol=1e-11)
    assert abs(abs(a.final_state[0]) ** 2 - abs(c.final_state[0]) ** 2) < 1e-6
    np.testing.assert_allclose(a.amplitudes[::2], c.amplitudes, atol=1e-8)


def test_transfer_agrees_with_propagate(benchmark_run):
    fid, ret = transfer(5, 2, benchmark_run.params, (2, 0), (0, 0))
    assert fid == pytest.approx(benchmark_run.fidelity_vs_target[-1], abs=1e-8)
    assert ret == pytest.approx(benchmark_run.dark_retention, abs=1e-8)


def test_input_validation():
    p = DriveParams(omega0=5.0, tau=-0.6)
    with pytest.raises(DomainError):
        propagate(np.ones(3), 5, 2, p)
    with pytest.raises(DomainError):
        propagate(np.ones(6), 5, 2, p)


def test_default_endpoints():
    assert default_endpoints(2, DriveParams(1.0, -0.6)) == ((2, 0), (0, 0))
    assert default_endpoints(2, DriveParams(1.0, 0.6)) == ((0, 0), (2, 0))


@pytest.mark.parametrize(
    "message, error",
    [("Required step size is less than spacing between numbers.", StiffnessError), ("failed", AccuracyError)],
)
def test_integration_failures(monkeypatch, message, error):
    fake = SimpleNamespace(status=-1, message=message, y=np.zeros((1, 2)))
    monkeypatch.setattr(prop, "solve_ivp", lambda *a, **k: fake)
    with pytest.raises(error):
        prop.integrate(lambda t, y: y, np.array([1.0]), (0.0, 1.0), np.array([0.0, 1.0]))


def test_nonfinite_solution_is_rejected(monkeypatch):
    fake = SimpleNamespace(status=0, message="ok", y=np.array([[1.0, np.nan]]))
    monkeypatch.setattr(prop, "solve_ivp", lambda *a, **k: fake)
    with pytest.raises(AccuracyError):
        prop.integrate(lambda t, y: y, np.array([1.0]), (0.0, 1.0), np.array([0.0, 1.0]))


def test_prepare_dicke_small_lossless():
    res = prepare_dicke(3, 1, DriveParams(50.0, 0.6), DriveParams(50.0, -0.6))
    assert res.final_fidelity > 0.99
    assert res.dark_retention >= res.final_fidelity - 1e-12


def test_prepare_dicke_benchmark_stage_two():
    fwd = DriveParams(50.0, 0.6, delta=20.0)
    rev = DriveParams(50.0, -0.6, gamma=2.0)
    res = prepare_dicke(5, 2, fwd, rev)
    assert res.stage2_fidelity == pytest.approx(0.985, abs=0.005)
    assert res.final_fidelity == pytest.approx(res.stage1_fidelity * res.stage2_fidelity)
    assert 0 <= res.final_fidelity <= res.dark_retention + 1e-12
    assert res.final_fidelity > 0.98


def test_prepare_dicke_all_ions_addressed():
    # N = m: the Dicke target is the product state |1..1>|0> that stage 1 started from
    res = prepare_dicke(2, 2, DriveParams(50.0, 0.6, delta=20.0), DriveParams(50.0, -0.6, delta=20.0))
    assert 0.99 < res.final_fidelity <= 1.0


def test_prepare_dicke_validation():
    with pytest.raises(DomainError):
        prepare_dicke(3, 1, DriveParams(5.0, -0.6), DriveParams(5.0, -0.6))
    with pytest.raises(DomainError):
        prepare_dicke(2, 3, DriveParams(5.0, 0.6), DriveParams(5.0, -0.6))
