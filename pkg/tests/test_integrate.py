import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import exact_flow
from dec_phs.errors import BlockStructureMissing
from dec_phs.integrate import (
    Constant,
    InputSignal,
    PiecewiseConstant,
    Sinusoid,
    leapfrog_stability_limit,
    simulate,
    step_leapfrog,
    step_midpoint,
)
from dec_phs.models import Causality, discrete_spectrum, telegraph_line
from dec_phs.phs import Controller, close_loop, conservation_laws


def test_signals():
    assert Sinusoid(2.0, 0.25)(1.0) == pytest.approx(2.0)
    pw = PiecewiseConstant((0.0, 1.0), (3.0, -1.0))
    assert [pw(-0.1), pw(0.0), pw(0.99), pw(1.0), pw(5.0)] == [0.0, 3.0, 3.0, -1.0, -1.0]
    with pytest.raises(ValueError):
        PiecewiseConstant((1.0, 0.5), (1.0, 2.0))
    sig = InputSignal.from_ports(3, {1: Constant(4.0)})
    assert sig(0.3).tolist() == [0.0, 4.0, 0.0]
    with pytest.raises(ValueError):
        InputSignal.from_ports(2, {2: Constant(1.0)})


@settings(max_examples=20, deadline=None)
@given(st.floats(1e-4, 0.5), st.sampled_from(list(Causality)), st.integers(0, 2**32 - 1))
def test_midpoint_conserves_quadratic_energy(dt, causality, seed):
    sys_ = telegraph_line(6, causality=causality)
    x = np.random.default_rng(seed).standard_normal(sys_.nx)
    H0 = sys_.energy(x)
    for _ in range(20):
        x = step_midpoint(sys_, x, np.zeros(sys_.nu), dt)
    assert abs(sys_.energy(x) - H0) <= 1e-12 * H0


@pytest.mark.parametrize("method,order", [("midpoint", 2), ("leapfrog", 2)])
def test_convergence_against_exact_flow(method, order):
    sys_ = telegraph_line(6, causality=Causality.VOLTAGE_INPUT)
    x0 = np.random.default_rng(2).standard_normal(sys_.nx)
    exact = exact_flow(sys_.A, x0, 0.5)
    errs = []
    for dt in (0.01, 0.005):
        traj = simulate(sys_, None, 0.5, dt, method=method, x0=x0)
        errs.append(np.linalg.norm(traj.states[-1] - exact))
    assert np.log2(errs[0] / errs[1]) == pytest.approx(order, abs=0.1)


def test_leapfrog_stability_limit_matches_spectrum():
    sys_ = telegraph_line(20, causality=Causality.CURRENT_INPUT)
    omega_max = discrete_spectrum(sys_).max()
    assert leapfrog_stability_limit(sys_) == pytest.approx(2.0 / omega_max, rel=1e-6)
    with pytest.warns(RuntimeWarning):
        step_leapfrog(sys_, np.zeros(sys_.nx), np.zeros(2), 1.2 * 2.0 / omega_max)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        step_leapfrog(sys_, np.zeros(sys_.nx), np.zeros(2), 0.5 * 2.0 / omega_max)


def test_leapfrog_needs_two_blocks():
    closed = close_loop(telegraph_line(3, causality=Causality.CURRENT_INPUT), Controller([[1.0, 1.0]], [1.0]))
    with pytest.raises(BlockStructureMissing):
        simulate(closed, None, 0.1, 0.01, method="leapfrog")


def test_simulate_validation():
    sys_ = telegraph_line(3)
    with pytest.raises(ValueError):
        simulate(sys_, None, 1.0, 0.3)
    with pytest.raises(ValueError):
        simulate(sys_, None, 1.0, 0.1, method="euler")
    with pytest.raises(ValueError):
        simulate(sys_, InputSignal.zero(3), 1.0, 0.1)
    with pytest.raises(ValueError):
        simulate(sys_, None, 1.0, 0.1, x0=np.zeros(2))


def test_driven_energy_balance_and_supply():
    sys_ = telegraph_line(20, causality=Causality.CURRENT_INPUT)
    sig = InputSignal.from_ports(2, {0: Sinusoid(1.0, 2.0), 1: Constant(-0.3)})
    law = conservation_laws(sys_)[0]
    traj = simulate(sys_, sig, 1.0, 1e-3, invariants=[law])
    assert np.abs(traj.balance_residual).max() < 1e-12
    assert traj.H[-1] == pytest.approx(np.sum(traj.dt * traj.power[1:]), rel=1e-10)
    assert traj.invariants[-1, 0] == pytest.approx(traj.integrated_supply(law.boundary_map), abs=1e-12)


def test_csv_schema_and_determinism(tmp_path):
    sys_ = telegraph_line(3, causality=Causality.CURRENT_INPUT)
    x0 = np.random.default_rng(0).standard_normal(sys_.nx)
    a = simulate(sys_, None, 0.05, 0.01, x0=x0, invariants=conservation_laws(sys_))
    b = simulate(sys_, None, 0.05, 0.01, x0=x0, invariants=conservation_laws(sys_))
    a.write_csv(tmp_path / "a.csv")
    b.write_csv(tmp_path / "b.csv")
    text = (tmp_path / "a.csv").read_text()
    assert text == (tmp_path / "b.csv").read_text()
    header = text.splitlines()[0].split(",")
    assert header[:2] == ["t", "q_hat[0]"] and "phi[2]" in header
    assert header[-5:] == ["y[1]", "H", "power", "C_1", "balance_residual"]
    assert len(text.splitlines()) == 7
