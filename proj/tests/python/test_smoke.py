import math
import os
from pathlib import Path

import pytest

import acmpc

FIXTURES = Path(os.environ.get("ACMPC_FIXTURE_DIR", Path(__file__).resolve().parents[2] / "fixtures"))


def reference():
    return acmpc.ModelParams.reference(), acmpc.PowerParams.reference()


def test_model_worked_values():
    p, q = reference()
    assert acmpc.inlet_air_temperature(5.0, 0.1, p) == pytest.approx(160.27179, abs=1e-9)
    x = acmpc.model_step(acmpc.State(30.0, 5.0), acmpc.ControlInput(0.1, 5.0),
                         acmpc.Exogenous(30.0, 30.0, 30.0), p)
    assert x.T_cab == pytest.approx(30.0 + 1.2999 * 0.1 * 130.27179 - 0.1842, abs=1e-12)
    assert x.T_evap == pytest.approx(3.7009, abs=1e-12)
    assert acmpc.evaporator_fixed_point(10.0, p) == pytest.approx(3.8534 / 0.5129, abs=1e-9)
    assert acmpc.blower_power(0.1, q) == pytest.approx(93.458, abs=1e-9)


def test_open_loop_matches_repeated_steps():
    p, _ = reference()
    u = [acmpc.ControlInput(0.1, 6.0)] * 5
    w = [acmpc.Exogenous(30.0, 31.0, 30.0)] * 5
    states, T_ain = acmpc.simulate_open_loop(acmpc.State(28.0, 7.0), u, w, p)
    assert len(states) == 6 and len(T_ain) == 5
    x = acmpc.State(28.0, 7.0)
    for k in range(5):
        x = acmpc.model_step(x, u[k], w[k], p)
    assert states[-1].T_cab == x.T_cab


def test_qcqp_shapes():
    C, A1, A2, c = acmpc.qcqp_matrices(acmpc.ModelParams.reference())
    assert C.shape == (9, 9) and A1.shape == (1, 9) and A2.shape == (2, 9)
    assert (C == C.T).all()
    assert len(c) == 3


def instance(params):
    inst = acmpc.OcpInstance()
    inst.model = params.model
    inst.power = params.power
    inst.x0 = acmpc.State(26.0, 8.0)
    inst.u_prev = acmpc.ControlInput(0.1, 6.0)
    inst.w = acmpc.Exogenous(30.0, 30.0, 30.0)
    inst.horizon = acmpc.HorizonConfig(1, 1, 1, 5.0)
    inst.schedule = acmpc.ConstraintSchedule.uniform(
        inst.horizon, acmpc.State(20.0, 0.0), acmpc.State(25.0, 12.0),
        acmpc.ControlInput(0.05, 3.0), acmpc.ControlInput(0.15, 10.0), [1e5, 1e5])
    return inst


def test_solver_agrees_with_brute_force():
    params = acmpc.load_params(FIXTURES / "params_surrogate.json")
    inst = instance(params)
    s = acmpc.solve_ocp(inst)
    assert s.converged
    bf = acmpc.brute_force_ocp(inst)
    assert abs(s.cost - bf.cost) <= 1e-3 * abs(bf.cost)
    assert abs(s.U[0].W_bl - bf.U[0].W_bl) <= 0.001 + 1e-12
    cost, grad = acmpc.evaluate_nlp(inst, s.U)
    assert cost == pytest.approx(s.cost, rel=1e-10)
    assert grad.shape == (2,)


def test_bad_instance_raises_value_error():
    params = acmpc.load_params(FIXTURES / "params_surrogate.json")
    inst = instance(params)
    inst.horizon = acmpc.HorizonConfig(1, 2, 1, 5.0)
    with pytest.raises(ValueError):
        acmpc.check_instance(inst)


def test_closed_loop_on_prediction_model():
    params = acmpc.load_params(FIXTURES / "params_surrogate.json")
    sc = acmpc.load_scenario(FIXTURES / "fig7_30.json")
    tr = acmpc.run_closed_loop(sc, "nmpc", "model", params)
    assert tr["capped_steps"] == 0
    assert len(tr["t"]) == len(tr["T_cab"])
    assert abs(tr["T_cab"][-1] - tr["T_cab_ub"][-1]) <= 0.5
    assert all(0.05 - 1e-9 <= w <= 0.15 + 1e-9 for w in tr["W_bl"])
    assert tr["energy_MJ"] > 0.0


def test_missing_file_raises():
    with pytest.raises(ValueError):
        acmpc.load_scenario(FIXTURES / "does_not_exist.json")


def test_band_schedule():
    ub = acmpc.bound_schedule_from_speed([0.0, 10.0, 20.0, 30.0])
    assert ub == pytest.approx([26.0, 24.0, 22.0, 22.0])
    assert all(math.isfinite(v) for v in ub)
