from dataclasses import replace

import numpy as np
import pytest

from conftest import make_scenario
from gridbalance.agent import AgentParams, BuildingState
from gridbalance.consensus import best_constant_weights
from gridbalance.errors import AveragingError
from gridbalance.pricing import PricingParams, price
from gridbalance.protocol import ProtocolConfig, dynamic_slot, run, static_slot
from gridbalance.topology import generate

K2_PRICING = PricingParams(capacity=150, a=1, k=4, sigmoid_kind="zero_centered", tau=10)
AGENT = AgentParams(alpha=0.05)
# (160/150)^4 + tanh(0.5) and 80 + 0.05 * (72 - 80 * p), from mpmath
K2_PRICE = 1.756655428864948
K2_NEXT = 76.57337828454021


def k2_states(demands=(80.0, 80.0), estimates=None):
    estimates = demands if estimates is None else estimates
    return [BuildingState(i, d, 72.0, e) for i, (d, e) in enumerate(zip(demands, estimates))]


def bisect(f, lo, hi, iters=200):
    for _ in range(iters):
        mid = (lo + hi) / 2
        if f(lo) * f(mid) <= 0:
            hi = mid
        else:
            lo = mid
    return (lo + hi) / 2


def test_static_slot_k2_by_hand():
    wm = best_constant_weights(generate("complete", 2))
    new, out = static_slot(k2_states(), wm, K2_PRICING, AGENT, ProtocolConfig())
    np.testing.assert_allclose(out.estimates, [80, 80])
    np.testing.assert_allclose(out.prices, [K2_PRICE, K2_PRICE], rtol=1e-12)
    assert [s.demand for s in new] == pytest.approx([K2_NEXT, K2_NEXT], rel=1e-12)
    assert out.total_true == 160
    assert not out.constraint_ok
    np.testing.assert_array_equal(out.totals_estimated, 2 * out.estimates)


def test_static_slot_at_fixed_point():
    # x = [30, 50], total 80 < capacity 100, p = 0.8^4, w = x * p
    p = 0.8**4
    pricing = PricingParams(capacity=100, a=1, k=4)
    states = [BuildingState(0, 30.0, 30 * p), BuildingState(1, 50.0, 50 * p)]
    wm = best_constant_weights(generate("complete", 2))
    _, out = static_slot(states, wm, pricing, AGENT, ProtocolConfig())
    assert np.max(np.abs(out.deltas)) < 1e-9
    assert out.constraint_ok


def test_static_slot_reference_first_slot(preset):
    wm = best_constant_weights(preset.build_graph())
    states = [BuildingState(i, x, w, x) for i, (x, w) in
              enumerate(zip(preset.initial_demand, preset.wtp))]
    _, out = static_slot(states, wm, preset.pricing, preset.agent, preset.protocol)
    assert np.all(out.prices > 1)
    assert np.all(out.deltas < 0)
    mean = np.mean(out.demands)
    assert np.max(np.abs(out.estimates - mean)) <= 1e-9 * (1 + mean)
    assert out.consensus_rounds > 0


def test_static_slot_dimension_mismatch():
    wm = best_constant_weights(generate("complete", 3))
    with pytest.raises(ValueError):
        static_slot(k2_states(), wm, K2_PRICING, AGENT, ProtocolConfig())


def test_dynamic_slot_matches_static_when_estimates_exact(preset):
    wm = best_constant_weights(preset.build_graph())
    mean = float(np.mean(preset.initial_demand))
    states = [BuildingState(i, x, w, mean) for i, (x, w) in
              enumerate(zip(preset.initial_demand, preset.wtp))]
    s_new, s_out = static_slot(states, wm, preset.pricing, preset.agent, preset.protocol)
    d_new, d_out = dynamic_slot(states, wm, preset.pricing, preset.agent, preset.protocol)
    # static estimates sit within 1e-9 * (1 + mean) of the mean, so prices differ at ~1e-8
    np.testing.assert_allclose(d_out.prices, s_out.prices, rtol=1e-7)
    np.testing.assert_allclose([s.demand for s in d_new], [s.demand for s in s_new], rtol=1e-7)


def test_dynamic_slot_k2_by_hand():
    wm = best_constant_weights(generate("complete", 2))
    new, out = dynamic_slot(k2_states(), wm, K2_PRICING, AGENT, ProtocolConfig(mode="dynamic"))
    assert [s.demand for s in new] == pytest.approx([K2_NEXT] * 2, rel=1e-12)
    np.testing.assert_allclose(out.deltas, [K2_NEXT - 80] * 2, rtol=1e-12)
    est = [s.estimate for s in new]
    assert est == pytest.approx([K2_NEXT] * 2, rel=1e-12)
    assert sum(est) == pytest.approx(sum(s.demand for s in new), rel=1e-14)
    assert sum(est) == pytest.approx(153.14675656908042, rel=1e-12)


@pytest.mark.parametrize("kind", ["ring", "complete"])
def test_dynamic_zero_delta_contracts_estimates(kind):
    # wtp chosen so every agent sits on the fixed point of its own estimated price
    n = 6
    g = generate(kind, n)
    wm = best_constant_weights(g)
    pricing = PricingParams(capacity=600)
    est = np.array([90.0, 110.0, 95.0, 105.0, 100.0, 80.0])
    demands = np.array([90.0, 110.0, 95.0, 105.0, 100.0, 100.0])
    prices = [price(pricing, n * e) for e in est]
    states = [BuildingState(i, demands[i], demands[i] * prices[i], est[i]) for i in range(n)]
    new, out = dynamic_slot(states, wm, pricing, AGENT, ProtocolConfig(mode="dynamic"))
    assert np.max(np.abs(out.deltas)) < 1e-12
    np.testing.assert_allclose([s.demand for s in new], demands, rtol=1e-14)
    new_est = np.array([s.estimate for s in new])
    before = np.linalg.norm(est - est.mean())
    after = np.linalg.norm(new_est - new_est.mean())
    assert after <= wm.rho * before + 1e-9
    new_prices = [price(pricing, n * e) for e in new_est]
    if kind == "complete":
        assert np.ptp(new_prices) <= wm.rho * np.ptp(prices) + 1e-9


def test_single_agent_converges_to_oracle():
    x_star = bisect(lambda x: x * (x / 100) ** 4 - 50, 1, 100)
    sc = make_scenario([50.0], [80.0], 100, kind="edges")
    rec = run(sc)
    assert rec.converged
    assert abs(rec.final_demands[0] - x_star) <= 1e-2
    assert rec.final_price_mean == pytest.approx(50 / x_star, rel=1e-3)


def test_run_records_cut_down_and_optimal(preset):
    rec = run(preset)
    np.testing.assert_array_equal(rec.cut_down, np.array(preset.initial_demand) - rec.final_demands)
    np.testing.assert_allclose(rec.optimal_demands, np.array(preset.wtp) / rec.final_prices)
    assert rec.slots[0].slot == 1
    assert rec.slots[0].total_true == pytest.approx(sum(preset.initial_demand))
    assert rec.equilibrium_slot == len(rec.slots)


def test_run_equilibrium_identity(preset):
    rec = run(preset)
    assert rec.converged
    last = rec.slots[-1]
    gap = abs(sum(preset.wtp) - np.mean(last.prices) * np.sum(last.demands))
    assert gap <= len(preset.wtp) * preset.protocol.eq_tolerance / preset.agent.alpha


def test_run_not_converged_is_reported():
    sc = make_scenario([45.0, 60.0], [80.0, 80.0], 100, max_slots=3)
    rec = run(sc)
    assert not rec.converged
    assert len(rec.slots) == 3


def test_run_mode_override(preset):
    rec = run(replace(preset, protocol=replace(preset.protocol, max_slots=5)), mode="dynamic")
    assert rec.mode == "dynamic"
    assert all(o.consensus_rounds == 0 for o in rec.slots)


def test_dynamic_sum_conservation_every_slot(preset):
    rec = run(preset, mode="dynamic")
    for out in rec.slots:
        total = np.sum(out.demands)
        assert abs(np.sum(out.estimates) - total) <= 1e-7 * (1 + total)
        np.testing.assert_array_equal(out.totals_estimated, 10 * out.estimates)


def test_static_estimates_within_band_every_slot(preset):
    rec = run(preset)
    for out in rec.slots:
        mean = np.mean(out.demands)
        assert np.max(np.abs(out.estimates - mean)) <= 1e-9 * (1 + abs(mean))


def test_averaging_failure_keeps_partial_record():
    sc = make_scenario([45.0] * 8, [80.0] * 7 + [60.0], 1000, kind="path",
                       avg_max_rounds=1)
    with pytest.raises(AveragingError) as info:
        run(sc)
    rec = info.value.record
    assert rec is not None
    assert rec.slots == []
    np.testing.assert_array_equal(rec.final_demands, sc.initial_demand)


def test_run_is_deterministic(preset):
    a = run(preset)
    b = run(preset)
    assert len(a.slots) == len(b.slots)
    for x, y in zip(a.slots, b.slots):
        assert x.demands.tobytes() == y.demands.tobytes()
        assert x.prices.tobytes() == y.prices.tobytes()
        assert x.estimates.tobytes() == y.estimates.tobytes()


def test_clamp_events_counted():
    # huge alpha and a large overload push the low-wtp building to the floor
    sc = make_scenario([1.0, 1.0], [400.0, 400.0], 100, alpha=0.9, max_slots=2)
    rec = run(sc)
    assert rec.clamp_total >= 2
    assert np.all(rec.final_demands >= sc.agent.demand_floor)


def test_protocol_config_validation():
    with pytest.raises(ValueError):
        ProtocolConfig(mode="async")
    with pytest.raises(ValueError):
        ProtocolConfig(max_slots=0)
    with pytest.raises(ValueError):
        ProtocolConfig(eq_tolerance=0)
