import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm
from scipy.optimize import brentq

from oracles import generator_matrix, min_choi_eig, semigroup_closed
from phasecov.channel import PhaseCovChannel, is_cp, pauli_transfer
from phasecov.dynamics import (RateTriple, Trajectory, blp_monotone_at, classify_intervals, derivative,
                               first_order_propagator, generator_pauli_transfer, identity_trajectory,
                               intermediate_map, is_cp_divisible_at, is_p_divisible_at, p_divisibility_margin,
                               population, rates_from_spec, rates_from_trajectory, trajectory_from_rates,
                               trajectory_from_spec)
from phasecov.errors import DomainError, SingularChannel
from phasecov.families import eternal_commutative, eternal_noncommutative, nonmonotone_population, semigroup

rate = st.floats(0, 3)


def test_derivative_central_and_one_sided():
    assert derivative(math.sin, 1.0) == pytest.approx(math.cos(1.0), abs=1e-9)
    assert derivative(math.exp, 0.0) == pytest.approx(1.0, abs=1e-8)


def test_zero_rates_give_identity():
    tr = trajectory_from_rates(RateTriple.constant(0, 0, 0))
    for t in (0.0, 1.3, 7.0):
        assert tr.values(t) == (1.0, 1.0, 0.0)


def test_semigroup_example():
    tr = trajectory_from_rates(RateTriple.constant(2, 1, 0.25))
    lam, lz, tz = tr.values(1.0)
    assert lam == pytest.approx(0.135335, abs=1e-6)
    assert lz == pytest.approx(0.049787, abs=1e-6)
    assert tz == pytest.approx(0.316738, abs=1e-6)
    assert tr.values(1.0) == pytest.approx(semigroup_closed(2, 1, 0.25, 1.0), abs=1e-12)


@settings(max_examples=40)
@given(rate, rate, rate, st.floats(0, 6))
def test_semigroup_closed_form_and_expm(gp, gm, gz, t):
    tr = trajectory_from_rates(RateTriple.constant(gp, gm, gz))
    assert tr.values(t) == pytest.approx(semigroup_closed(gp, gm, gz, t), abs=1e-9)
    ref = expm(t * generator_matrix(gp, gm, gz))
    assert np.abs(pauli_transfer(tr.channel_at(t)) - ref).max() < 1e-9


def test_generator_matrix_layout():
    assert np.array_equal(generator_pauli_transfer(2, 1, 0.25), generator_matrix(2, 1, 0.25))


def test_oscillating_rates_recover_trajectory():
    _, rates = nonmonotone_population(1, 2)
    tr = trajectory_from_rates(rates)
    for t in np.linspace(0, 6, 13):
        assert tr.values(t) == pytest.approx(
            (math.exp(-t), math.exp(-2 * t), math.sin(2 * t) / math.sqrt(2)), abs=1e-8)


def test_rates_from_trajectory_examples():
    tr, _ = semigroup(2, 1, 0.25)
    for t in (0.0, 0.5, 3.0):
        assert rates_from_trajectory(tr, t) == pytest.approx((2, 1, 0.25), abs=1e-12)
    tr, _ = eternal_commutative(0.5, 1.0)
    for t in (0.3, 1.0, 2.5):
        gz = -0.75 * math.sinh(2 * t) / (2 * (1.25 + 0.75 * math.cosh(2 * t)))
        assert rates_from_trajectory(tr, t) == pytest.approx((1.5, 0.5, gz), abs=1e-12)
    assert rates_from_trajectory(identity_trajectory(), 0.0) == (0.0, 0.0, 0.0)


def test_rates_from_finite_differences():
    tr, rates = eternal_noncommutative(0.5, 1.0)
    fd = tr.without_derivatives()
    for t in (0.0, 0.7, 2.0):
        assert rates_from_trajectory(fd, t) == pytest.approx(rates(t), abs=1e-7)


def test_rates_need_invertible_channel():
    tr = Trajectory(lambda t: 0.0, lambda t: 1.0, lambda t: 0.0, lambda t: 0.0, lambda t: 0.0, lambda t: 0.0)
    with pytest.raises(SingularChannel):
        rates_from_trajectory(tr, 1.0)


@settings(max_examples=25)
@given(st.floats(0.2, 2), st.floats(0.2, 2), st.floats(-0.3, 0.3), st.floats(0.5, 4))
def test_round_trip_smooth_rates(a, b, c, w):
    rates = RateTriple(lambda t: a + 0.5 * a * np.sin(w * np.asarray(t)),
                       lambda t: b + 0.0 * np.asarray(t),
                       lambda t: c * np.cos(np.asarray(t)))
    tr = trajectory_from_rates(rates)
    for t in np.linspace(0, 5, 11):
        assert rates_from_trajectory(tr, t) == pytest.approx(rates(t), abs=1e-7)


def test_intermediate_map_examples():
    tr, _ = semigroup(2, 1, 0.25)
    assert intermediate_map(tr, 0.7, 0.7).as_tuple() == pytest.approx((1, 1, 0))
    assert intermediate_map(tr, 0.5, 1.0).as_tuple() == pytest.approx(tr.values(0.5), abs=1e-12)
    tr, _ = eternal_commutative(0.5, 1.0)
    lam = intermediate_map(tr, 0.1, 0.2)
    assert is_cp(lam).fails
    assert min_choi_eig(*lam.as_tuple()) < 0
    with pytest.raises(DomainError):
        intermediate_map(tr, 0.3, 0.2)


@settings(max_examples=30)
@given(rate, rate, rate, st.floats(0, 3), st.floats(0, 3))
def test_semigroup_intermediate_map(gp, gm, gz, t1, dt):
    tr = trajectory_from_rates(RateTriple.constant(gp, gm, gz))
    lam = intermediate_map(tr, t1, t1 + dt)
    assert lam.as_tuple() == pytest.approx(tr.values(dt), abs=1e-9)
    assert (lam @ tr.channel_at(t1)).as_tuple() == pytest.approx(tr.values(t1 + dt), abs=1e-10)


def test_cp_divisible_rates_give_cp_intermediate_maps():
    tr, rates = nonmonotone_population(1.0, 2.0)
    grid = np.linspace(0, 4, 17)
    assert all(is_cp_divisible_at(rates, t).satisfied for t in grid)
    for i, t1 in enumerate(grid):
        for t2 in grid[i:]:
            assert is_cp(intermediate_map(tr, t1, t2)).satisfied


def test_population_examples():
    assert population(identity_trajectory(), 1.0, 3.0) == 1.0
    tr, _ = nonmonotone_population(1, 2)
    assert population(tr, 0.0, math.pi / 4) == pytest.approx(0.5 * (1 + 1 / math.sqrt(2)), abs=1e-12)
    with pytest.raises(DomainError):
        population(tr, 1.5, 0.0)


def test_divisibility_examples():
    c = RateTriple.constant
    assert is_cp_divisible_at(c(1, 1, 0), 0.0).satisfied
    assert is_p_divisible_at(c(1, 1, -0.4), 0.0).holds
    assert is_cp_divisible_at(c(1, 1, -0.4), 0.0).fails
    assert is_p_divisible_at(c(1, 1, -0.6), 0.0).fails
    assert is_p_divisible_at(c(0, 1, 0.5), 0.0).satisfied
    assert blp_monotone_at(c(1, 1, -0.6), 0.0).fails
    assert blp_monotone_at(c(4, 1, -0.6), 0.0).holds
    assert is_p_divisible_at(c(4, 1, -0.6), 0.0).holds


def test_first_order_propagator_tracks_p_divisibility():
    # (1,1,-0.4) keeps the Bloch ball inside itself to first order, (1,1,-0.6) does not
    from phasecov.channel import r_max
    dt = 1e-4
    assert r_max(first_order_propagator(1, 1, -0.4, dt)) < 1
    assert r_max(first_order_propagator(1, 1, -0.6, dt)) > 1


def test_second_order_condition():
    # sqrt(g+ g-) + 2 gz = 0 exactly at t = 0; the sign of d gz/dt - gz (g+ + g-) decides
    rising = RateTriple(lambda t: 1.0, lambda t: 1.0, lambda t: -0.5 + t, d_gamma_z=lambda t: 1.0)
    falling = RateTriple(lambda t: 1.0, lambda t: 1.0, lambda t: -0.5 - 2 * t, d_gamma_z=lambda t: -2.0)
    assert is_p_divisible_at(rising, 0.0).holds
    assert is_p_divisible_at(rising, 0.0).margin == pytest.approx(1.0 + 0.5 * 2)
    assert is_p_divisible_at(falling, 0.0).fails
    # both orders at equality: dgz/dt = gz (g+ + g-) = -1
    flat = RateTriple(lambda t: 1.0, lambda t: 1.0, lambda t: -0.5, d_gamma_z=lambda t: -1.0)
    assert is_p_divisible_at(flat, 0.0).marginal
    # finite-difference derivative when none is supplied
    fd = RateTriple(lambda t: 1.0, lambda t: 1.0, lambda t: -0.5 + t)
    assert is_p_divisible_at(fd, 0.0).holds


@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(-1, 1))
def test_divisibility_chain(gp, gm, gz):
    r = RateTriple.constant(gp, gm, gz)
    if is_cp_divisible_at(r, 0).holds:
        assert not is_p_divisible_at(r, 0).fails
    if is_p_divisible_at(r, 0).holds:
        assert not blp_monotone_at(r, 0).fails


def test_p_margin_negative_rate_first():
    assert p_divisibility_margin(-0.5, 1.0, 3.0) == -0.5


def test_classify_intervals_oscillating():
    _, rates = nonmonotone_population(1, 2)
    rep = classify_intervals(rates, 10, 201)
    assert all(v.satisfied for v in rep.cp_divisible)
    assert rep.chain_violations == []


def test_classify_intervals_eternal_crossing():
    a, nu = 0.5, 1.0
    _, rates = eternal_commutative(a, nu)
    rep = classify_intervals(rates, 5, 101)
    assert all(v.fails for v in rep.cp_divisible[1:])
    gz = rates.gamma_z
    root = brentq(lambda t: math.sqrt(1 - a**2) * nu + 2 * float(gz(t)), 0.01, 5, xtol=1e-14)
    assert len(rep.crossings["p_divisible"]) == 1
    assert rep.crossings["p_divisible"][0] == pytest.approx(root, abs=1e-8)
    assert rep.intervals["p_divisible"]["holds"][0][0] == 0.0
    assert rep.intervals["p_divisible"]["fails"][-1][1] == 5.0
    d = rep.to_dict()
    assert d["schema"] == "phasecov/1"
    assert set(d["properties"]) == {"cp_divisible", "p_divisible", "blp_monotone"}


def test_classify_intervals_zero_rates():
    rep = classify_intervals(RateTriple.constant(0, 0, 0), 1, 5)
    for name in ("cp_divisible", "p_divisible", "blp_monotone"):
        assert all(v.satisfied for v in rep.verdicts[name])


def test_classify_intervals_validation():
    with pytest.raises(DomainError):
        classify_intervals(RateTriple.constant(1, 1, 1), 0, 5)
    with pytest.raises(DomainError):
        classify_intervals(RateTriple.constant(1, 1, 1), 1, 1)


def test_classifier_errors_carry_time():
    bad = RateTriple(lambda t: 1.0, lambda t: 1.0, lambda t: 1 / (t - 0.5) if t != 0.5 else float("nan"))
    with pytest.raises(ValueError, match="at t=0.5"):
        classify_intervals(bad, 1.0, 3)


def test_specs():
    r = rates_from_spec({"kind": "constant", "params": {"gamma_plus": 1, "gamma_minus": 2, "gamma_z": 0.5}})
    assert r(3.0) == (1.0, 2.0, 0.5)
    t = np.linspace(0, 2, 21)
    s = rates_from_spec({"kind": "samples", "t": t.tolist(), "gamma_plus": (1 + t).tolist(),
                         "gamma_minus": np.ones_like(t).tolist(), "gamma_z": (0 * t).tolist()})
    assert s(0.55)[0] == pytest.approx(1.55, abs=1e-12)
    tr = trajectory_from_spec({"kind": "samples", "t": t.tolist(), "lambda": np.exp(-t).tolist(),
                               "lambda_z": np.exp(-t).tolist(), "t_z": (0 * t).tolist()})
    assert tr.values(1.0)[0] == pytest.approx(math.exp(-1), abs=1e-4)
    with pytest.raises(DomainError):
        rates_from_spec({"kind": "constant", "params": {}})
    with pytest.raises(DomainError):
        rates_from_spec({"kind": "weird"})
    with pytest.raises(DomainError):
        RateTriple.from_samples([0.0, 0.0], [1, 1], [1, 1], [1, 1])


def test_negative_time_rejected():
    tr = trajectory_from_rates(RateTriple.constant(1, 1, 1))
    with pytest.raises(DomainError):
        tr.values(-0.1)
