import numpy as np
import pytest

from blindptycho import (DivergenceError, Rng, ShiftSet, SolverConfig,
                         gd_step_sizes, gradient, run, run_epie, run_gd,
                         run_interval, run_sgd, sample_indices, sgd_max_step,
                         step_curvature_bound, stochastic_gradient,
                         synthesize_problem, trace_to_csv)
from blindptycho.objective import GradientPair
from blindptycho.solvers import TRACE_HEADER

from conftest import np_pair


# ---------------------------------------------------------------------------
# step sizes

def test_gd_step_zero_gradient_uses_curvature_bound():
    prob = synthesize_problem(8, seed=1, alpha=0.2, beta=0.1)
    z, v = np_pair(8, 2)
    zero = GradientPair(np.zeros(8, complex), np.zeros(8, complex))
    mu, nu = gd_step_sizes(prob, z, v, zero)
    assert mu == nu == pytest.approx(1.0 / step_curvature_bound(prob, z, v))


def test_gd_step_gradient_branch():
    # zeroed measurements, zero iterates, no Tikhonov: the curvature bound
    # vanishes and only the gradient-norm branches remain
    from blindptycho import MeasurementSet, Problem
    base = synthesize_problem(4, seed=3)
    zeroed = MeasurementSet(np.zeros_like(base.y), base.shifts)
    prob = Problem(d=4, measurements=zeroed, epsilon=0.0, alpha=0.0, beta=0.0,
                   p=base.p, batch_size=1)
    zeros = np.zeros(4, complex)
    g = np.zeros(4, complex)
    g[0] = 2.0
    pair = GradientPair(g, 0.5 * g)
    mu, nu = gd_step_sizes(prob, zeros, zeros, pair)
    scale = (15.0 * 4 / 4.0) ** (-1 / 3)
    assert mu == pytest.approx(scale * 2.0 ** (-2 / 3), rel=1e-12)
    assert nu == mu


def test_gd_step_arithmetic_example():
    from blindptycho import MeasurementSet, Problem
    base = synthesize_problem(4, seed=4)
    zeroed = MeasurementSet(np.zeros_like(base.y), base.shifts)
    prob = Problem(d=4, measurements=zeroed, epsilon=0.0, alpha=1.0, beta=1.0,
                   p=base.p, batch_size=1)
    zeros = np.zeros(4, complex)
    pair = GradientPair(zeros, zeros)
    mu, _ = gd_step_sizes(prob, zeros, zeros, pair)
    assert mu == pytest.approx(1.0 / 3.0)
    assert mu <= 1.0 / 3.0 + 1e-15


# ---------------------------------------------------------------------------
# gradient descent

def test_gd_fixed_point_at_truth():
    prob = synthesize_problem(8, seed=5, alpha=0.0, beta=0.0)
    x, w = prob.truth
    res = run_gd(prob, x, w, SolverConfig(algorithm="gd", max_iters=20))
    assert np.array_equal(res.z, x)
    assert np.array_equal(res.v, w)
    assert all(r.J == res.trace[0].J for r in res.trace)


def test_gd_monotone_descent_500_iters():
    prob = synthesize_problem(16, seed=6)
    z0, v0 = np_pair(16, 60)
    res = run_gd(prob, z0, v0, SolverConfig(algorithm="gd", max_iters=500))
    tr = res.trace
    assert len(tr) == 501
    for a, b in zip(tr, tr[1:]):
        assert b.J <= a.J + 1e-10 * (1 + a.J)


def test_gd_update_rule_matches_trace():
    prob = synthesize_problem(8, seed=7)
    z0, v0 = np_pair(8, 70)
    cfg = SolverConfig(algorithm="gd", max_iters=5, record_iterates=True)
    res = run_gd(prob, z0, v0, cfg)
    z = np.array(z0)
    v = np.array(v0)
    for t, (zt, vt) in enumerate(res.iterates[1:]):
        g = gradient(prob, z, v)
        z = z - res.trace[t].mu_t * g.z
        v = v - res.trace[t].nu_t * g.v
        assert np.array_equal(z, zt)
        assert np.array_equal(v, vt)


def test_gd_cap_mode_scales_steps_and_still_descends():
    prob = synthesize_problem(8, seed=10)
    z0, v0 = np_pair(8, 90)
    rate = run_gd(prob, z0, v0, SolverConfig(algorithm="gd", max_iters=50))
    cap = run_gd(prob, z0, v0, SolverConfig(algorithm="gd", max_iters=50,
                                            step_mode="cap", mu=0.5, nu=0.25))
    assert cap.trace[0].mu_t == pytest.approx(0.5 * rate.trace[0].mu_t)
    assert cap.trace[0].nu_t == pytest.approx(0.25 * rate.trace[0].nu_t)
    for a, b in zip(cap.trace, cap.trace[1:]):
        assert b.J <= a.J + 1e-10 * (1 + a.J)


def test_gd_grad_tol_stop():
    prob = synthesize_problem(8, seed=8, alpha=0.0, beta=0.0)
    x, w = prob.truth
    res = run_gd(prob, x, w, SolverConfig(algorithm="gd", max_iters=50,
                                          grad_tol=1e-12))
    assert len(res.trace) == 1


def test_gd_divergence_diagnostic():
    prob = synthesize_problem(4, seed=9)
    bad = np.full(4, np.nan, dtype=complex)
    with pytest.raises(DivergenceError, match="iteration 0"):
        run_gd(prob, bad, bad, SolverConfig(algorithm="gd", max_iters=3))


# ---------------------------------------------------------------------------
# sampling and the stochastic gradient

def test_sample_indices_point_mass_and_k1():
    rng = Rng(0)
    assert sample_indices(np.array([1.0]), (5,), 4, rng) == [5, 5, 5, 5]
    assert len(sample_indices(np.array([0.5, 0.5]), (0, 1), 1, rng)) == 1


def test_sample_indices_frequencies():
    rng = Rng(11)
    p = np.full(8, 1.0 / 8)
    draws = sample_indices(p, tuple(range(8)), 100_000, rng)
    counts = np.bincount(draws, minlength=8) / 100_000
    sigma = np.sqrt((1 / 8) * (7 / 8) / 100_000)
    assert np.all(np.abs(counts - 1 / 8) < 5 * sigma)


def test_sample_indices_nonuniform():
    rng = Rng(12)
    p = np.array([0.7, 0.2, 0.1])
    draws = sample_indices(p, (0, 1, 2), 50_000, rng)
    freq = np.bincount(draws, minlength=3) / 50_000
    assert np.all(np.abs(freq - p) < 0.01)


def test_sample_indices_deterministic():
    p = np.full(4, 0.25)
    a = sample_indices(p, (0, 1, 2, 3), 50, Rng(13))
    b = sample_indices(p, (0, 1, 2, 3), 50, Rng(13))
    assert a == b


def test_stochastic_gradient_k1_uniform_scaling(small_problem):
    z, v = np_pair(8, 14)
    from blindptycho import gradient_region
    g = stochastic_gradient(small_problem, z, v, [3])
    part = gradient_region(small_problem, z, v, 3)
    assert np.allclose(g.z, 8 * part.z, rtol=1e-12)
    assert np.allclose(g.v, 8 * part.v, rtol=1e-12)


def test_stochastic_gradient_full_pass_recovers_gradient(small_problem):
    z, v = np_pair(8, 15)
    g = stochastic_gradient(small_problem, z, v, list(small_problem.offsets))
    full = gradient(small_problem, z, v)
    norm = 1 + max(np.max(np.abs(full.z)), np.max(np.abs(full.v)))
    assert np.max(np.abs(g.z - full.z)) / norm < 1e-12
    assert np.max(np.abs(g.v - full.v)) / norm < 1e-12


def test_unbiasedness_enumeration(small_problem):
    z, v = np_pair(8, 16)
    acc_z = np.zeros(8, complex)
    acc_v = np.zeros(8, complex)
    for i, r in enumerate(small_problem.offsets):
        g = stochastic_gradient(small_problem, z, v, [r])
        acc_z += small_problem.p[i] * g.z
        acc_v += small_problem.p[i] * g.v
    full = gradient(small_problem, z, v)
    norm = 1 + max(np.max(np.abs(full.z)), np.max(np.abs(full.v)))
    assert np.max(np.abs(acc_z - full.z)) / norm < 1e-12
    assert np.max(np.abs(acc_v - full.v)) / norm < 1e-12


# ---------------------------------------------------------------------------
# sgd

def test_sgd_max_step_cases():
    prob = synthesize_problem(8, seed=17)
    z, v = np_pair(8, 18)
    from blindptycho import stochastic_gradient_bounds
    bound = step_curvature_bound(prob, z, v)
    b_z, b_v = stochastic_gradient_bounds(prob, z, v)
    theta = 0.5
    # K = 1 drops the (1 - 1/K) branch
    m = sgd_max_step(prob, z, v, t=0, theta=theta, kappa=0.2, k=1)
    expected = min(bound ** (-2.0), b_z ** (-0.8), b_v ** (-0.8))
    assert m == pytest.approx(expected, rel=1e-12)
    # K = 2, theta = 1/2: the last branch equals 4
    m2 = sgd_max_step(prob, z, v, t=0, theta=theta, kappa=0.2, k=2)
    assert m2 == pytest.approx(min(expected, 4.0), rel=1e-12)
    # t scales only the curvature branch
    m_t = sgd_max_step(prob, z, v, t=9, theta=theta, kappa=0.2, k=1)
    expected_t = min(10 ** (-0.8) * bound ** (-2.0), b_z ** (-0.8), b_v ** (-0.8))
    assert m_t == pytest.approx(expected_t, rel=1e-12)


def test_sgd_max_step_zero_branches_drop_out():
    # zero iterates with no Tikhonov weight zero out the sampled-gradient
    # envelopes; only the curvature branch survives
    prob = synthesize_problem(8, seed=44, alpha=0.0, beta=0.0)
    zeros = np.zeros(8, complex)
    m = sgd_max_step(prob, zeros, zeros, t=0, theta=0.5, kappa=0.2, k=1)
    assert m == pytest.approx(step_curvature_bound(prob, zeros, zeros) ** -2.0,
                              rel=1e-12)


def test_sgd_max_step_theta_zero_drops_last_branch():
    prob = synthesize_problem(8, seed=19)
    z, v = np_pair(8, 20)
    m = sgd_max_step(prob, z, v, t=0, theta=0.0, kappa=-0.5, k=4)
    bound = step_curvature_bound(prob, z, v)
    from blindptycho import stochastic_gradient_bounds
    b_z, b_v = stochastic_gradient_bounds(prob, z, v)
    expected = min(bound ** (-1.0), b_z ** (-2 / 3), b_v ** (-2 / 3))
    assert m == pytest.approx(expected, rel=1e-12)


def test_sgd_seed_determinism():
    prob = synthesize_problem(8, seed=21)
    z0, v0 = np_pair(8, 22)
    cfg = SolverConfig(algorithm="sgd", max_iters=100, seed=5)
    a = run_sgd(prob, z0, v0, cfg)
    b = run_sgd(prob, z0, v0, cfg)
    assert np.array_equal(a.z, b.z) and np.array_equal(a.v, b.v)
    assert trace_to_csv(a.trace).split() != []  # smoke: serializable
    for ra, rb in zip(a.trace, b.trace):
        assert (ra.t, ra.J, ra.mu_t) == (rb.t, rb.J, rb.mu_t)


def test_sgd_single_region_matches_gd_with_same_steps():
    # R = 1 and p = (1): sampling is degenerate, the stochastic gradient is
    # the full gradient, so sgd and gd agree once the steps are identical
    prob = synthesize_problem(8, shifts=ShiftSet((0,)), seed=23)
    z0, v0 = np_pair(8, 24)
    cfg = SolverConfig(algorithm="sgd", max_iters=40, seed=3,
                       record_iterates=True)
    sgd_res = run_sgd(prob, z0, v0, cfg)
    z = np.array(z0)
    v = np.array(v0)
    for t in range(40):
        g = gradient(prob, z, v)
        z = z - sgd_res.trace[t].mu_t * g.z
        v = v - sgd_res.trace[t].nu_t * g.v
        assert np.allclose(z, sgd_res.iterates[t + 1][0], rtol=0, atol=1e-13)
        assert np.allclose(v, sgd_res.iterates[t + 1][1], rtol=0, atol=1e-13)


def test_sgd_update_norm_identity():
    prob = synthesize_problem(8, seed=25)
    z0, v0 = np_pair(8, 26)
    cfg = SolverConfig(algorithm="sgd", max_iters=30, seed=7,
                       record_iterates=True)
    res = run_sgd(prob, z0, v0, cfg)
    rng = Rng(7)
    z, v = np.array(z0), np.array(v0)
    for t in range(30):
        drawn = sample_indices(prob.p, prob.offsets, 1, rng)
        g = stochastic_gradient(prob, z, v, drawn)
        gz = float(np.linalg.norm(g.z))
        # recovering the step from iterate differences cancels ~1e-11 of
        # relative precision; the identity itself is exact
        step = float(np.linalg.norm(res.iterates[t + 1][0] - z))
        assert step == pytest.approx(res.trace[t].mu_t * gz, rel=1e-9, abs=1e-300)
        z, v = res.iterates[t + 1]


def test_sgd_config_validation():
    with pytest.raises(ValueError, match="theta"):
        SolverConfig(algorithm="sgd", theta=0.0).validate()
    with pytest.raises(ValueError, match="kappa"):
        SolverConfig(algorithm="sgd", theta=0.5, kappa=0.4).validate()
    with pytest.raises(ValueError, match="mu"):
        SolverConfig(algorithm="sgd", mu=1.5).validate()


# ---------------------------------------------------------------------------
# epie

def test_epie_fixed_point_at_truth():
    prob = synthesize_problem(8, seed=27, epsilon=0.0, alpha=0.0, beta=0.0)
    x, w = prob.truth
    res = run_epie(prob, x, w, SolverConfig(algorithm="epie", max_iters=100, seed=1))
    assert np.allclose(res.z, x, rtol=0, atol=1e-12)
    assert np.allclose(res.v, w, rtol=0, atol=1e-12)


def test_epie_zero_steps_freeze_iterates():
    prob = synthesize_problem(8, seed=28, epsilon=0.0, alpha=0.0, beta=0.0)
    z0, v0 = np_pair(8, 29)
    cfg = SolverConfig(algorithm="epie", max_iters=20, seed=2,
                       epie_alpha=1e-300, epie_beta=1e-300)
    res = run_epie(prob, z0, v0, cfg)
    assert np.allclose(res.z, z0, rtol=0, atol=1e-290)
    assert np.allclose(res.v, v0, rtol=0, atol=1e-290)


def test_epie_zero_iterate_aborts():
    prob = synthesize_problem(8, seed=30, epsilon=0.0, alpha=0.0, beta=0.0)
    zeros = np.zeros(8, complex)
    with pytest.raises(DivergenceError, match="iteration 0"):
        run_epie(prob, zeros, np.ones(8, complex),
                 SolverConfig(algorithm="epie", max_iters=5))


def test_epie_matches_sgd_with_mapped_steps():
    prob = synthesize_problem(8, seed=31, epsilon=0.0, alpha=0.0, beta=0.0)
    z0, v0 = np_pair(8, 32)
    kwargs = dict(max_iters=300, seed=4, epie_alpha=0.4, epie_beta=0.6,
                  record_iterates=True)
    res_e = run_epie(prob, z0, v0, SolverConfig(algorithm="epie", **kwargs))
    res_s = run_sgd(prob, z0, v0, SolverConfig(algorithm="sgd",
                                               sgd_step_rule="epie_scaled",
                                               **kwargs))
    for (za, va), (zb, vb) in zip(res_e.iterates, res_s.iterates):
        assert np.max(np.abs(za - zb)) <= 1e-12
        assert np.max(np.abs(va - vb)) <= 1e-12


def test_epie_seed_determinism():
    prob = synthesize_problem(8, seed=47, epsilon=0.0, alpha=0.0, beta=0.0)
    z0, v0 = np_pair(8, 48)
    cfg = SolverConfig(algorithm="epie", max_iters=100, seed=6, epie_alpha=0.3,
                       epie_beta=0.3)
    a = run_epie(prob, z0, v0, cfg)
    b = run_epie(prob, z0, v0, cfg)
    assert np.array_equal(a.z, b.z) and np.array_equal(a.v, b.v)
    assert [r.J for r in a.trace] == [r.J for r in b.trace]


def test_epie_shuffled_schedule_covers_all_regions():
    prob = synthesize_problem(8, seed=33, epsilon=0.0, alpha=0.0, beta=0.0)
    z0, v0 = np_pair(8, 34)
    cfg = SolverConfig(algorithm="epie", max_iters=16, seed=5,
                       epie_schedule="shuffled", epie_alpha=0.1, epie_beta=0.1)
    res = run_epie(prob, z0, v0, cfg)
    # one full pass every R iterations: step sizes reflect 16 region visits
    assert len(res.trace) == 17


# ---------------------------------------------------------------------------
# interval descent

def test_interval_requires_positive_weights():
    prob = synthesize_problem(8, seed=35, alpha=0.0, beta=0.0)
    z0, v0 = np_pair(8, 36)
    with pytest.raises(ValueError, match="Tikhonov"):
        run_interval(prob, z0, v0, SolverConfig(algorithm="interval", max_iters=1))


def test_interval_endpoint_selection():
    prob = synthesize_problem(8, seed=37)
    z0, v0 = np_pair(8, 38)
    cfg = SolverConfig(algorithm="interval", max_iters=100, gamma_grid=2)
    res = run_interval(prob, z0, v0, cfg)
    for step in res.interval_steps:
        assert step.gamma in (0.0, 1.0)
        assert step.loss_selected == min(step.loss_object_endpoint,
                                         step.loss_window_endpoint)


def test_interval_decrease_bounds():
    prob = synthesize_problem(16, seed=39)
    z0, v0 = np_pair(16, 40)
    cfg = SolverConfig(algorithm="interval", max_iters=200, gamma_grid=5)
    res = run_interval(prob, z0, v0, cfg)
    for rec, step in zip(res.trace, res.interval_steps):
        assert step.loss_selected <= min(step.loss_object_endpoint,
                                         step.loss_window_endpoint)
        assert step.decrease >= step.bound_crossed - 1e-9 * (1 + rec.J)
        assert step.decrease >= step.bound_matched - 1e-9 * (1 + rec.J)


def test_interval_finer_grid_never_worse():
    prob = synthesize_problem(8, seed=41)
    z0, v0 = np_pair(8, 42)
    coarse = run_interval(prob, z0, v0,
                          SolverConfig(algorithm="interval", max_iters=1,
                                       gamma_grid=2))
    fine = run_interval(prob, z0, v0,
                        SolverConfig(algorithm="interval", max_iters=1,
                                     gamma_grid=9))
    assert fine.interval_steps[0].loss_selected <= \
        coarse.interval_steps[0].loss_selected + 1e-12


# ---------------------------------------------------------------------------
# dispatch and trace format

def test_run_dispatch():
    prob = synthesize_problem(8, seed=43)
    z0, v0 = np_pair(8, 44)
    for algo in ("gd", "sgd", "epie", "interval"):
        res = run(prob, z0, v0, SolverConfig(algorithm=algo, max_iters=3))
        assert len(res.trace) == 4


def test_trace_csv_format():
    prob = synthesize_problem(8, seed=45)
    z0, v0 = np_pair(8, 46)
    res = run_gd(prob, z0, v0, SolverConfig(algorithm="gd", max_iters=3))
    text = trace_to_csv(res.trace)
    lines = text.strip().split("\n")
    assert lines[0] == TRACE_HEADER
    assert len(lines) == 5
    first = lines[1].split(",")
    assert first[0] == "0"
    assert float(first[1]) == res.trace[0].J
