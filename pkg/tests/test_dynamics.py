import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import brute_step, random_graph
from signedbc import dynamics
from signedbc import (
    ModelParams,
    build_signed_graph,
    complete_signed,
    generate_er_signed,
    run,
    signed_offset,
    step,
    step_hk,
    step_naive,
)
from signedbc._kernels import HAVE_NUMBA
from signedbc.dynamics import _CycleDetector, _kernel, step_variant
from signedbc.errors import DimensionMismatch, InvalidParameter, NegativeEdgePresent
from signedbc.rng import make_rng

seeds = st.integers(0, 2**32 - 1)
REP2 = build_signed_graph(2, [(0, 1, -1)])
ATT2 = build_signed_graph(2, [(0, 1, 1)])


# -- signed offset ----------------------------------------------------


def test_offset_self_is_zero(fig2):
    assert signed_offset(1, 1, [1.0, 0.5, 0.0], fig2, 0.6) == 0.0


def test_offset_repulsive_scaled():
    x = [0.0, 0.3]
    assert signed_offset(0, 1, x, REP2, 0.5) == pytest.approx(0.2, abs=1e-15)
    assert signed_offset(1, 0, x, REP2, 0.5) == pytest.approx(-0.2, abs=1e-15)


def test_offset_repulsive_tie_uses_index_order():
    x = [0.7, 0.7]
    assert signed_offset(0, 1, x, REP2, 0.5) == 0.5
    assert signed_offset(1, 0, x, REP2, 0.5) == -0.5


def test_offset_attractive_is_plain_difference():
    assert signed_offset(0, 1, [0.1, 0.4], ATT2, 0.5) == pytest.approx(0.3)


# -- single steps -----------------------------------------------------


def test_two_node_repulsive_step_reaches_c():
    out = step([0.0, 0.3], REP2, ModelParams(c=0.5))
    assert out == pytest.approx([-0.1, 0.4], abs=1e-15)
    assert out[1] - out[0] == pytest.approx(0.5, abs=1e-15)


def test_two_node_attractive_step_averages():
    assert step([0.0, 0.3], ATT2, ModelParams(c=0.5)) == pytest.approx([0.15, 0.15])


def test_equal_opinion_repulsive_pair_splits_by_index():
    out = step([0.7, 0.7], REP2, ModelParams(c=0.5))
    assert out == pytest.approx([0.45, 0.95])


def test_no_edges_leaves_state_unchanged():
    g = build_signed_graph(4, [])
    x = np.array([0.3, 0.1, 0.9, 0.2])
    assert np.array_equal(step(x, g, ModelParams(c=1.0)), x)


def test_out_of_confidence_pair_is_ignored():
    assert np.array_equal(step([0.0, 0.6], REP2, ModelParams(c=0.5)), [0.0, 0.6])
    assert np.array_equal(step([0.0, 0.5], REP2, ModelParams(c=0.5)), [0.0, 0.5])  # strict bound


def test_hk_examples():
    p = ModelParams(c=0.5)
    assert np.array_equal(step_hk([0.4, 0.4], ATT2, p), [0.4, 0.4])
    assert step_hk([0.0, 0.3], ATT2, p) == pytest.approx([0.15, 0.15])
    assert np.array_equal(step_hk([0.0, 1.0], ATT2, p), [0.0, 1.0])


def test_hk_refuses_repulsive_edges(fig2):
    with pytest.raises(NegativeEdgePresent):
        step_hk([0.0, 0.1, 0.2], fig2, ModelParams(c=0.5))
    with pytest.raises(NegativeEdgePresent):
        run([0.0, 0.1, 0.2], fig2, ModelParams(c=0.5, variant="hk"))


def test_naive_repulsive_pair_uses_raw_difference():
    # raw push: 0 moves by -0.3/2, 0.3 by +0.3/2
    assert step_naive([0.0, 0.3], REP2, ModelParams(c=0.5)) == pytest.approx([-0.15, 0.45])


def test_wrong_state_length(fig2):
    with pytest.raises(DimensionMismatch):
        step([0.0, 1.0], fig2, ModelParams(c=0.5))


def test_non_finite_state_rejected(fig2):
    with pytest.raises(InvalidParameter):
        step([0.0, np.nan, 1.0], fig2, ModelParams(c=0.5))


@pytest.mark.parametrize(
    "kw",
    [dict(c=0.0), dict(c=-1.0), dict(c=float("inf")), dict(c=1.0, tol=0.0),
     dict(c=1.0, max_iter=0), dict(c=1.0, variant="other")],
)
def test_invalid_params(kw):
    with pytest.raises(InvalidParameter):
        ModelParams(**kw)


# -- properties of the step -------------------------------------------


@settings(max_examples=150, deadline=None)
@given(seed=seeds, c=st.floats(0.01, 1.5), scaled=st.booleans())
def test_step_matches_per_node_reference_in_any_order(seed, c, scaled):
    g = random_graph(seed)
    r = make_rng(seed)
    x = r.random(g.n)
    if g.n > 1:
        x[1] = x[0]  # exercise the tie rule
    order = r.permutation(g.n)
    ref = brute_step(x, g.adjacency, c, scaled=scaled, order=order)
    got = (step if scaled else step_naive)(x, g, ModelParams(c=c))
    assert np.allclose(got, ref, rtol=0, atol=1e-12)


@settings(max_examples=150, deadline=None)
@given(seed=seeds, c=st.floats(0.01, 1.5), scaled=st.booleans())
def test_compiled_and_numpy_paths_are_bit_identical(seed, c, scaled):
    g = random_graph(seed, n_max=40)
    x = make_rng(seed).random(g.n)
    kern = _kernel(g)
    assert np.array_equal(kern.update(x, c, scaled), kern.update_numpy(x, c, scaled))


def test_numba_is_in_use():
    assert HAVE_NUMBA


@settings(max_examples=100, deadline=None)
@given(seed=seeds, c=st.floats(0.02, 1.0))
def test_hk_reduction_without_repulsive_edges(seed, c):
    r = make_rng(seed)
    n = int(r.integers(1, 25))
    g = generate_er_signed(n, float(r.random()), 0.0, r)
    x = r.random(n)
    p = ModelParams(c=c)
    assert np.max(np.abs(step(x, g, p) - step_hk(x, g, p)), initial=0.0) <= 1e-12
    assert np.array_equal(step(x, g, p), step_naive(x, g, p))


@settings(max_examples=60, deadline=None)
@given(seed=seeds, c=st.floats(0.02, 1.0))
def test_single_step_motion_is_at_most_c(seed, c):
    g = random_graph(seed, n_max=15)
    x0 = make_rng(seed).random(g.n)
    traj = run(x0, g, ModelParams(c=c, max_iter=300))
    moves = np.abs(np.diff(traj.states, axis=0))
    assert np.all(moves <= c * (1 + 1e-12))


@settings(max_examples=60, deadline=None)
@given(seed=seeds, c=st.floats(0.02, 1.0), shift=st.floats(-50, 50))
def test_translation_equivariance(seed, c, shift):
    g = random_graph(seed)
    x = make_rng(seed).random(g.n)
    p = ModelParams(c=c)
    # keep clear of the strict boundary, where rounding could flip an indicator
    d = np.abs(x[:, None] - x[None, :])
    if np.any(np.abs(d - c) < 1e-9):
        return
    assert np.allclose(step(x + shift, g, p), step(x, g, p) + shift, rtol=0, atol=1e-9)


def test_translation_equivariance_of_whole_run():
    g = generate_er_signed(30, 0.5, 0.3, make_rng(8))
    x = make_rng(9).random(30)
    a = run(x, g, ModelParams(c=0.3))
    b = run(x + 3.25, g, ModelParams(c=0.3))
    assert a.stopping_time == b.stopping_time
    assert np.allclose(b.final, a.final + 3.25, atol=1e-9)


# -- run --------------------------------------------------------------


def test_no_edges_converges_at_one():
    g = build_signed_graph(5, [])
    x0 = make_rng(0).random(5)
    traj = run(x0, g, ModelParams(c=0.5))
    assert traj.converged and traj.stopping_time == 1
    assert np.array_equal(traj.final, x0)


def test_three_node_complete_repulsive_width():
    x0 = [0.0, 0.1, 0.3]
    traj = run(x0, complete_signed(3), ModelParams(c=0.4))
    assert traj.converged
    assert np.ptp(traj.final) == pytest.approx(0.8, abs=1e-6)


def test_three_node_example_scaled_converges(fig2):
    traj = run([1.0, 0.5, 0.0], fig2, ModelParams(c=0.6))
    assert traj.converged and traj.stopping_time == 3
    assert traj.final == pytest.approx([0.7, 0.5, 0.3])
    d = np.abs(traj.final[:, None] - traj.final[None, :])[~np.eye(3, dtype=bool)]
    assert np.all(d < 0.6) and np.all(d > 0)


def test_three_node_example_naive_never_settles(fig2):
    traj = run([1.0, 0.5, 0.0], fig2, ModelParams(c=0.6, variant="naive"), record=False)
    assert not traj.converged
    assert traj.steps == traj.stopping_time == 10_000


def test_three_node_example_naive_cycle_is_flagged(fig2):
    traj = run([1.0, 0.5, 0.0], fig2, ModelParams(c=0.6, variant="naive", detect_cycles=True))
    assert traj.cycle_detected and not traj.converged
    assert traj.cycle_kind == "pattern" and traj.cycle_length == 3


def test_detector_flags_exact_revisit(fig2):
    det = _CycleDetector(fig2, ModelParams(c=0.6, detect_cycles=True))
    a, b = np.array([1.0, 0.5, 0.0]), np.array([0.9, 0.5, 0.1])
    assert det.observe(a, 0, np.inf) is None
    assert det.observe(b, 1, 0.1) is None
    assert det.observe(a + 1e-14, 2, 0.1) == ("state", 2)


def test_converging_run_is_not_flagged_as_a_cycle():
    traj = run([0.0, 0.1], REP2, ModelParams(c=0.5, variant="naive", detect_cycles=True))
    assert traj.converged and not traj.cycle_detected


def test_converged_run_satisfies_the_tolerance():
    g = generate_er_signed(40, 0.5, 0.2, make_rng(4))
    traj = run(make_rng(5).random(40), g, ModelParams(c=0.4))
    assert traj.converged
    T = traj.stopping_time
    assert len(traj.states) == T + 1
    assert np.max(np.abs(traj.states[T] - traj.states[T - 1])) < traj.params.tol
    assert np.max(np.abs(traj.states[T - 1] - traj.states[T - 2])) >= traj.params.tol


def test_max_iter_caps_the_run():
    g = complete_signed(6)
    traj = run(np.linspace(0, 0.01, 6), g, ModelParams(c=1.0, max_iter=3))
    assert not traj.converged
    assert traj.stopping_time == 3 and len(traj.states) == 4


def test_run_all_steps_keeps_first_stopping_time():
    g = build_signed_graph(2, [(0, 1, 1)])
    traj = run([0.0, 0.2], g, ModelParams(c=0.5, max_iter=20, early_stop=False))
    assert traj.steps == 20 and len(traj.states) == 21
    assert traj.converged and traj.stopping_time == 2


def test_record_false_keeps_endpoints():
    g = generate_er_signed(20, 0.5, 0.2, make_rng(1))
    x0 = make_rng(2).random(20)
    full = run(x0, g, ModelParams(c=0.3))
    lean = run(x0, g, ModelParams(c=0.3), record=False)
    assert lean.states.shape == (2, 20)
    assert np.array_equal(lean.final, full.final)
    assert lean.stopping_time == full.stopping_time


def test_runs_are_bit_identical():
    g = generate_er_signed(50, 0.4, 0.4, make_rng(3))
    x0 = make_rng(4).random(50)
    a = run(x0, g, ModelParams(c=0.5))
    b = run(x0.copy(), g, ModelParams(c=0.5))
    assert np.array_equal(a.states, b.states)


def test_numpy_path_gives_the_same_run(monkeypatch):
    g = generate_er_signed(50, 0.4, 0.4, make_rng(3))
    x0 = make_rng(4).random(50)
    a = run(x0, g, ModelParams(c=0.5))
    monkeypatch.setattr(dynamics, "USE_COMPILED", False)
    b = run(x0, g, ModelParams(c=0.5))
    assert np.array_equal(a.states, b.states)


def test_step_variant_dispatch(fig2):
    x = [1.0, 0.5, 0.0]
    assert np.array_equal(step_variant(x, fig2, ModelParams(c=0.6, variant="naive")),
                          step_naive(x, fig2, ModelParams(c=0.6)))


def test_naive_matches_hk_without_repulsion():
    g = build_signed_graph(3, [(0, 1, 1), (1, 2, 1)])
    a = run([1.0, 0.5, 0.0], g, ModelParams(c=0.6, variant="naive"))
    b = run([1.0, 0.5, 0.0], g, ModelParams(c=0.6, variant="hk"))
    assert a.converged and a.stopping_time == b.stopping_time
    assert np.allclose(a.final, b.final, atol=1e-12)
