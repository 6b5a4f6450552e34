import numpy as np
import pytest

from vp1d.characteristics import (CharacteristicPoint, FieldSampler, Trajectory, evolve_weight,
                                  lemma2_monitor, trace, trace_with_tangent, write_trajectory_csv)
from vp1d.errors import OutOfDomainError
from vp1d.profiles import BackgroundProfile, Grid
from vp1d.theory import TheoryParams, exterior_shift

XG = Grid(20.0, 401)
TIMES = np.linspace(0.0, 4.0, 401)


def sampler_of(efun, rhofun=None):
    x = XG.nodes
    E = np.array([efun(t, x) for t in TIMES])
    rho = None if rhofun is None else np.array([rhofun(t, x) for t in TIMES])
    return FieldSampler(TIMES, XG, E, rho)


def test_free_streaming_backward():
    smp = sampler_of(lambda t, x: 0 * x)
    p = CharacteristicPoint.anchor([1.0, -2.0, 0.5], [0.3, -0.7, 0.0], 3.0)
    out = trace(p, smp, 0.0, 0.05)
    assert np.allclose(out.X, p.X - 3.0 * p.V, atol=1e-13)
    assert np.array_equal(out.V, p.V)
    assert out.s == 0.0


def test_constant_field_kinematics_are_exact():
    ec = 0.2
    smp = sampler_of(lambda t, x: ec + 0 * x)
    x, v, t = 1.5, 0.4, 2.5
    out = trace(CharacteristicPoint.anchor(x, v, t), smp, 0.0, 0.1)
    s = 0.0
    assert out.V == pytest.approx(v - ec * (s - t), abs=1e-13)
    assert out.X == pytest.approx(x + v * (s - t) - 0.5 * ec * (s - t) ** 2, abs=1e-12)


def test_exterior_characteristic_recovers_velocity_shift():
    e0, w = 0.05, 1.0
    smp = sampler_of(lambda t, x: e0 * np.sign(x) * np.cos(w * t))
    x = np.array([12.0, -12.0])
    v = np.array([0.2, -0.1])
    t = 3.7
    out = trace(CharacteristicPoint.anchor(x, v, t), smp, 0.0, 0.01)
    params = TheoryParams(e0=e0, omega=w, radius=1.0)
    assert np.allclose(out.V - v, exterior_shift(t, x, params), atol=1e-6)


def test_time_reversal_returns_to_anchor():
    smp = sampler_of(lambda t, x: 0.1 * np.sin(x) * np.cos(t))
    p = CharacteristicPoint.anchor([0.5, 3.0], [0.2, -0.4], 3.0)
    back = trace(p, smp, 0.5, 0.01)
    fwd = trace(back, smp, 3.0, 0.01)
    assert np.allclose(fwd.X, p.X, atol=1e-6)
    assert np.allclose(fwd.V, p.V, atol=1e-6)


def test_tangent_without_density_is_shear():
    smp = sampler_of(lambda t, x: 0 * x, lambda t, x: 0 * x)
    out = trace_with_tangent(CharacteristicPoint.anchor(1.0, 0.3, 2.0), smp, 0.0, 0.1)
    assert out.dVdv == pytest.approx(1.0)
    assert out.dXdv == pytest.approx(-2.0)


def test_tangent_matches_finite_difference():
    a = 0.3
    smp = sampler_of(lambda t, x: a * np.sin(x), lambda t, x: a * np.cos(x))
    x, v, t, dt, h = 0.7, 0.25, 3.0, 0.01, 1e-5
    out = trace_with_tangent(CharacteristicPoint.anchor(x, v, t), smp, 0.0, dt)
    plus = trace(CharacteristicPoint.anchor(x, v + h, t), smp, 0.0, dt)
    minus = trace(CharacteristicPoint.anchor(x, v - h, t), smp, 0.0, dt)
    assert out.dVdv == pytest.approx((plus.V - minus.V) / (2 * h), abs=1e-5)
    assert out.dXdv == pytest.approx((plus.X - minus.X) / (2 * h), abs=1e-5)
    assert abs(out.dVdv - 1.0) > 1e-2


def test_weight_increment_telescopes_to_background_difference():
    bg = BackgroundProfile.quartic()
    smp = sampler_of(lambda t, x: 0.1 * np.sin(x) * np.cos(t))
    p = CharacteristicPoint.anchor([0.5, -1.0], [0.3, 0.8], 0.0, w=0.0)
    out = evolve_weight(p, smp, 3.5, 0.05, bg)
    assert np.allclose(out.w, bg(out.V) - bg(p.V), rtol=0, atol=1e-15)


def test_recorded_trajectory_and_csv(tmp_path):
    smp = sampler_of(lambda t, x: 0 * x)
    p = CharacteristicPoint.anchor([5.0, -5.0], [0.1, 0.2], 1.0)
    out, traj = trace(p, smp, 0.0, 0.25, record=True)
    assert traj.s.shape == (5,) and traj.X.shape == (5, 2)
    assert traj.s[0] == 1.0 and traj.s[-1] == 0.0
    one = traj.column(1)
    path = tmp_path / "traj.csv"
    write_trajectory_csv(path, one)
    lines = path.read_text().splitlines()
    assert lines[0] == "s,X,V,dXdv,dVdv,w"
    assert len(lines) == 6
    with pytest.raises(ValueError):
        write_trajectory_csv(path, traj)


def test_lemma2_monitor_detects_entry_into_support():
    s = np.linspace(0.0, 1.0, 11)
    X = np.column_stack([3.0 - 2.5 * s, 4.0 + 0 * s])
    traj = Trajectory(s, X, 0 * X, 0 * X, 1 + 0 * X, 0 * X)
    rep = lemma2_monitor(traj, lambda t: 1.0 + 0 * t)
    assert not rep.passed
    assert rep.first_violation_point == 0
    assert rep.first_violation_s == pytest.approx(0.9)
    assert lemma2_monitor(traj, lambda t: 1.0 + 0 * t, tol=0.6).passed
    ok = lemma2_monitor(traj.column(1), lambda t: 1.0 + 0 * t)
    assert ok.passed and ok.min_margin == pytest.approx(3.0)


def test_out_of_domain():
    smp = sampler_of(lambda t, x: 0 * x)
    with pytest.raises(OutOfDomainError):
        trace(CharacteristicPoint.anchor(19.9, 1.0, 0.0), smp, 1.0, 0.1)
    with pytest.raises(OutOfDomainError):
        trace(CharacteristicPoint.anchor(0.0, 0.0, 5.0), smp, 0.0, 0.1)
    with pytest.raises(ValueError):
        smp.density(0.0, 0.0)
    with pytest.raises(ValueError):
        trace(CharacteristicPoint.anchor(0.0, 0.0, 1.0), smp, 0.0, 0.0)


def test_sampler_validates_shapes():
    with pytest.raises(ValueError):
        FieldSampler(TIMES, XG, np.zeros((3, XG.n)))
    with pytest.raises(ValueError):
        FieldSampler([0.0, 0.0], XG, np.zeros((2, XG.n)))
