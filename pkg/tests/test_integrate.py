import numpy as np
import pytest

from rumorsim.integrate import (
    HORIZON,
    STEADY,
    IntegrationOptions,
    NotConvergedError,
    NumericalInstabilityError,
    final_state,
    integrate,
    integrate_batch,
    read_trajectory_csv,
    trajectory_to_csv,
)
from rumorsim.model import FIG2_PARAMS, FIG11_PARAMS, StateVector


@pytest.fixture(scope="module")
def fig2_traj():
    return integrate(FIG2_PARAMS, StateVector.two_seed(FIG2_PARAMS.n))


def test_fig2_reaches_steady_state(fig2_traj):
    tr = fig2_traj
    assert tr.terminated_by == STEADY
    assert tr.final.active < 1e-10
    assert tr.final.i + tr.final.r1 + tr.final.r2 == pytest.approx(1.0, abs=1e-9)
    s1 = tr.column("S1")
    peak = int(np.argmax(s1))
    # one rise, one decay
    assert np.all(np.diff(s1[: peak + 1]) >= 0)
    assert np.all(np.diff(s1[peak:]) <= 0)
    assert s1[-1] < 1e-6


def test_fig2_sample_invariants(fig2_traj):
    tr = fig2_traj
    assert np.all(np.diff(tr.times) > 0)
    assert np.abs(tr.states.sum(axis=1) - 1.0).max() <= 1e-9
    assert tr.states.min() >= -1e-12
    assert np.all(np.diff(tr.column("I")) <= 0)
    r = tr.column("R1") + tr.column("R2")
    assert np.all(np.diff(r) >= -1e-15)


def test_absorbing_start_stops_immediately():
    tr = integrate(FIG2_PARAMS, StateVector(1, 0, 0, 0, 0, 0))
    assert tr.terminated_by == STEADY
    assert tr.t_final == 0.0
    assert tuple(tr.final) == (1, 0, 0, 0, 0, 0)


def test_step_halving_changes_final_size_little(fig2_traj):
    half = integrate(FIG2_PARAMS, StateVector.two_seed(FIG2_PARAMS.n), IntegrationOptions(step=0.005))
    assert abs(half.final.r - fig2_traj.final.r) < 1e-6


def test_fourth_order_self_convergence():
    init = StateVector.two_seed(FIG2_PARAMS.n)
    finals = []
    for h in (0.04, 0.02, 0.01):
        tr = integrate(FIG2_PARAMS, init, IntegrationOptions(step=h, t_max=20.0, sample_every=100))
        assert tr.terminated_by == HORIZON and tr.t_final == pytest.approx(20.0)
        finals.append(np.array(tr.final))
    e1 = np.abs(finals[0] - finals[1]).max()
    e2 = np.abs(finals[1] - finals[2]).max()
    assert e1 / e2 >= 8.0


def test_final_state_requires_convergence(fig2_traj):
    assert final_state(fig2_traj).s1 < 1e-10
    short = integrate(FIG2_PARAMS, StateVector.two_seed(FIG2_PARAMS.n), IntegrationOptions(t_max=1.0))
    assert short.terminated_by == HORIZON
    with pytest.raises(NotConvergedError):
        final_state(short)


def test_rumor_only_final_normalisation():
    p = FIG2_PARAMS.with_(theta2=0.0)
    fin = final_state(integrate(p, StateVector.rumor_seed(p.n)))
    assert fin.s2 == fin.r2 == 0.0
    assert fin.i == pytest.approx(1.0 - fin.r1, abs=1e-9)


def test_oversized_step_is_reported():
    p = FIG2_PARAMS.with_(k_avg=200.0)
    with pytest.raises(NumericalInstabilityError) as err:
        integrate(p, StateVector(0.5, 0.5, 0, 0, 0, 0), IntegrationOptions(step=0.5, t_max=50))
    assert err.value.t > 0


@pytest.mark.parametrize("kw", [dict(step=0), dict(step=2, t_max=1), dict(sample_every=0)])
def test_bad_options(kw):
    with pytest.raises(ValueError):
        IntegrationOptions(**kw)


def test_csv_roundtrip(fig2_traj):
    text = trajectory_to_csv(fig2_traj, ["comment"])
    assert text.splitlines()[1] == "t,I,S1,S2,H,R1,R2"
    t, y = read_trajectory_csv(text)
    assert np.array_equal(t, fig2_traj.times)
    assert np.array_equal(y, fig2_traj.states)


def test_batch_matches_scalar():
    cells = [FIG11_PARAMS.with_(lambda1=l1, lambda2=l2) for l1, l2 in [(0.3, 0.05), (0.05, 0.3), (0.0, 0.0)]]
    init = StateVector.two_seed(FIG11_PARAMS.n)
    batch = integrate_batch(cells, init)
    for j, p in enumerate(cells):
        tr = integrate(p, init)
        assert batch.converged[j] == tr.converged
        np.testing.assert_allclose(batch.final[j], np.array(tr.final), atol=1e-13)
        assert batch.peak_s1[j] == pytest.approx(tr.peak_s1, abs=1e-15)
