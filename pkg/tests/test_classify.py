"""Verdict logic, threshold bracketing, and sweep plumbing.

Certificate logic is exercised on hand-crafted trajectories so each
branch is hit exactly, then on real runs for end-to-end agreement.
"""

import math
from types import SimpleNamespace

import numpy as np
import pytest

from frontlab import (
    CERT_A_RATE,
    CERT_ELL_STAR,
    CERT_HORIZON,
    CERT_PI_SQRT_D2,
    CERT_PLATEAU,
    PHASE_COLUMNS,
    SPREADING,
    UNDECIDED,
    VANISHING,
    ClassifyTolerances,
    InconclusiveError,
    InitialData,
    ModelParams,
    RegimeError,
    RunControl,
    ScanControl,
    SweepPlan,
    classify,
    ell_star_cached,
    estimate_threshold,
    make_dichotomy_stop,
    make_kernel,
    run,
    spreading_length_threshold,
    sweep,
)
from frontlab.output import phase_csv
from frontlab.solver import Trajectory

TENT = make_kernel("tent", 1.0)


def _params(kind="competition", **kw):
    base = dict(kind=kind, d1=1.0, d2=1.0, a=0.5, b=0.5, c=0.5, mu=0.1, rho=0.1)
    base.update(kw)
    return ModelParams(**base)


def _traj(t, half_lengths, sup_u, sup_v, speeds, n=100):
    t = np.asarray(t, dtype=float)
    h = np.asarray(half_lengths, dtype=float)
    sup_u = np.asarray(sup_u, dtype=float)
    sup_v = np.asarray(sup_v, dtype=float)
    speeds = np.asarray(speeds, dtype=float)
    return Trajectory(
        t=t,
        g=-h,
        h=h,
        gdot=-speeds,
        hdot=speeds,
        sup_u=sup_u,
        sup_v=sup_v,
        u_center=sup_u,
        v_center=sup_v,
        termination="horizon",
        n=n,
    )


def test_a_rate_certificate_on_real_run():
    p = _params(a=1.0)
    init = InitialData.cosine(h0=0.2, amp_u=1e-3, amp_v=1e-3)
    traj = run(p, init, TENT, RunControl(horizon=1.0, n=64, record_every=5))
    cls = classify(traj, p, TENT)
    assert cls.verdict == SPREADING
    assert cls.certificate == CERT_A_RATE
    assert cls.fired_at == traj.t[0]


def test_pi_bound_certificate_crafted():
    # pi*sqrt(0.5) = 2.2214 < ell*(a=0.1) = 2.3374: a crossing in between
    # must cite the pi bound, not the critical length
    p = _params(a=0.1, d2=0.5)
    t = np.arange(5.0)
    half = np.array([1.0, 1.05, 1.16, 1.16, 1.16])  # length crosses 2.2214 at t=2
    traj = _traj(t, half, [0.5] * 5, [0.5] * 5, [0.1] * 5)
    cls = classify(traj, p, TENT)
    assert cls.verdict == SPREADING
    assert cls.certificate == CERT_PI_SQRT_D2
    assert cls.fired_at == 2.0


def test_ell_star_certificate_crafted():
    p = _params(a=0.1, d2=0.5)
    ell = ell_star_cached(1.0, 0.1, "tent", 1.0).ell_star
    t = np.arange(4.0)
    half = np.array([1.0, 1.05, 0.51 * ell + 0.01, 0.51 * ell + 0.01])
    traj = _traj(t, half, [0.5] * 4, [0.5] * 4, [0.1] * 4)
    cls = classify(traj, p, TENT)
    assert cls.verdict == SPREADING
    assert cls.certificate == CERT_ELL_STAR
    assert cls.fired_at == 2.0


def test_override_crossing_without_true_bound_stays_undecided():
    # spread_length pulled below both proven bounds: crossing it alone
    # is not evidence, so no spreading certificate may be issued
    p = _params(a=0.5)
    tols = ClassifyTolerances(spread_length=0.5)
    t = np.arange(4.0)
    half = np.array([0.2, 0.24, 0.275, 0.275])  # crosses 0.5 in length, below 0.632
    traj = _traj(t, half, [0.5] * 4, [0.5] * 4, [0.1] * 4)
    cls = classify(traj, p, TENT, tols)
    assert cls.verdict == UNDECIDED
    assert cls.certificate == CERT_HORIZON


def test_vanishing_plateau_crafted():
    p = _params(a=0.5)
    t = np.linspace(0.0, 100.0, 21)
    half = np.full(21, 0.25)
    sup = np.geomspace(1e-2, 1e-5, 21)
    speeds = np.full(21, 1e-7)
    traj = _traj(t, half, sup, sup, speeds)
    cls = classify(traj, p, TENT)
    assert cls.verdict == VANISHING
    assert cls.certificate == CERT_PLATEAU
    assert "heuristic" in cls.note
    assert cls.fired_at >= 90.0
    assert cls.final_length == pytest.approx(0.5)
    assert cls.lambda_p_final < 0.0


def test_plateau_rejected_when_eigenvalue_positive():
    # same decay profile, but the habitat is long enough to sustain
    # growth (lambda_p + a > 0): the dichotomy audit forbids Vanishing
    p = _params(a=0.5)
    tols = ClassifyTolerances(spread_length=10.0)  # suppress the length route
    t = np.linspace(0.0, 100.0, 21)
    half = np.full(21, 1.25)  # length 2.5 < pi, but well above ell* = 0.632
    sup = np.geomspace(1e-2, 1e-5, 21)
    traj = _traj(t, half, sup, sup, np.full(21, 1e-7))
    cls = classify(traj, p, TENT, tols)
    assert cls.verdict == UNDECIDED
    assert cls.lambda_p_final > tols.eigen_slack


def test_undecided_when_norms_still_large():
    p = _params(a=0.5)
    t = np.linspace(0.0, 50.0, 11)
    traj = _traj(t, np.full(11, 0.25), np.full(11, 0.3), np.full(11, 0.3), np.full(11, 1e-7))
    cls = classify(traj, p, TENT)
    assert cls.verdict == UNDECIDED
    assert cls.certificate == CERT_HORIZON
    assert cls.fired_at is None


def test_spreading_length_threshold():
    p = _params(a=0.5, d2=1.0)
    ell = ell_star_cached(1.0, 0.5, "tent", 1.0).ell_star
    assert spreading_length_threshold(p, TENT) == pytest.approx(min(math.pi, ell))
    assert spreading_length_threshold(_params(a=2.0, d2=0.25), TENT) == pytest.approx(
        math.pi * 0.5
    )


def test_ell_star_cache_hits():
    ell_star_cached.cache_clear()
    first = ell_star_cached(1.0, 0.5, "tent", 1.0)
    again = ell_star_cached(1.0, 0.5, "tent", 1.0)
    assert again is first
    assert ell_star_cached.cache_info().hits >= 1


def test_dichotomy_stop_rule_reasons():
    p = _params(a=0.5)
    rule = make_dichotomy_stop(p, TENT, horizon=40.0, tols=ClassifyTolerances())
    grow = SimpleNamespace(
        t=[0.0, 1.0], g=[-0.25, -0.4], h=[0.25, 0.4],
        gdot=[-0.1, -0.1], hdot=[0.1, 0.1], sup_u=[0.5, 0.5], sup_v=[0.5, 0.5],
    )
    assert rule(grow) == "spreading-length"  # 0.8 > 0.632
    flat = SimpleNamespace(
        t=[0.0, 6.0, 8.0, 10.0], g=[-0.25] * 4, h=[0.25] * 4,
        gdot=[1e-6] * 4, hdot=[1e-6] * 4, sup_u=[1e-4] * 4, sup_v=[1e-4] * 4,
    )
    assert rule(flat) == "vanishing-plateau"
    young = SimpleNamespace(
        t=[0.0, 2.0], g=[-0.25] * 2, h=[0.25] * 2,
        gdot=[1e-6] * 2, hdot=[1e-6] * 2, sup_u=[1e-4] * 2, sup_v=[1e-4] * 2,
    )
    assert rule(young) is None
    fast_rule = make_dichotomy_stop(_params(a=2.0), TENT, horizon=40.0)
    assert fast_rule(young) == "a-rate-dominates"


def test_threshold_preconditions():
    init = InitialData.cosine(h0=0.25, amp_u=1e-3, amp_v=1e-3)
    with pytest.raises(RegimeError):
        estimate_threshold(_params(a=1.2), init, TENT)
    wide = InitialData.cosine(h0=0.32, amp_u=1e-3, amp_v=1e-3)
    with pytest.raises(RegimeError) as err:
        estimate_threshold(_params(a=0.5), wide, TENT)
    msg = str(err.value)
    assert "pi*sqrt(d2)" in msg and "critical length" in msg


def test_threshold_bad_ray():
    init = InitialData.cosine(h0=0.25, amp_u=1e-3, amp_v=1e-3)
    with pytest.raises(ValueError):
        estimate_threshold(_params(), init, TENT, ray=(0.0, 0.0))
    with pytest.raises(ValueError):
        estimate_threshold(_params(), init, TENT, ray=(-0.5, 1.0))


def test_threshold_all_undecided_inconclusive():
    init = InitialData.cosine(h0=0.25, amp_u=1e-2, amp_v=1e-2)
    ctrl = ScanControl(s_min=1e-8, s_max=1e-7, points=2, horizon=3.0, n=64, record_every=5)
    with pytest.raises(InconclusiveError) as err:
        estimate_threshold(_params(a=0.45), init, TENT, ctrl=ctrl)
    assert "horizon" in str(err.value)


def test_threshold_one_sided_scans_inconclusive():
    init = InitialData.cosine(h0=0.25, amp_u=1e-3, amp_v=1e-3)
    spread_only = ScanControl(s_min=200.0, s_max=1000.0, points=2, horizon=20.0, n=64, record_every=5)
    with pytest.raises(InconclusiveError) as err:
        estimate_threshold(_params(a=0.5), init, TENT, ctrl=spread_only)
    assert "extend the scan downward" in str(err.value)
    vanish_only = ScanControl(s_min=1e-6, s_max=1e-5, points=2, horizon=40.0, n=64, record_every=5)
    with pytest.raises(InconclusiveError) as err:
        estimate_threshold(_params(a=0.5), init, TENT, ctrl=vanish_only)
    assert "extend the scan upward" in str(err.value)


def _base(**kw):
    base = dict(
        kind="competition", d1=1.0, d2=1.0, a=0.5, b=0.5, c=0.5, mu=0.1, rho=0.1,
        h0=0.25, amp_u=1e-3, amp_v=1e-3, kernel_family="tent", kernel_radius=1.0,
        horizon=20.0, n=64, dt=None, record_every=10,
    )
    base.update(kw)
    return base


def test_single_cell_sweep_matches_classify():
    plan = SweepPlan(base=_base(), axes={"a": [0.5]})
    table = sweep(plan)
    assert len(table.rows) == 1
    row = table.rows[0]

    p = _params(a=0.5)
    init = InitialData.cosine(h0=0.25, amp_u=1e-3, amp_v=1e-3)
    stop = make_dichotomy_stop(p, TENT, 20.0)
    traj = run(p, init, TENT, RunControl(horizon=20.0, n=64, record_every=10, stop_rule=stop))
    cls = classify(traj, p, TENT)
    assert row["verdict"] == cls.verdict
    assert row["certificate"] == cls.certificate
    assert row["final_length"] == pytest.approx(cls.final_length, rel=1e-12)


def test_sweep_row_major_order_and_columns():
    plan = SweepPlan(base=_base(), axes={"mu": [0.1, 0.2], "a": [0.4, 0.5]})
    table = sweep(plan)
    assert table.columns == PHASE_COLUMNS
    combos = [(row["a"], row["mu"]) for row in table.rows]
    assert combos == [(0.4, 0.1), (0.4, 0.2), (0.5, 0.1), (0.5, 0.2)]


def test_sweep_deterministic_across_worker_counts():
    plan = SweepPlan(base=_base(horizon=10.0), axes={"a": [0.5, 1.0], "mu": [1e-6, 10.0]})
    serial = phase_csv(sweep(plan, workers=1))
    parallel = phase_csv(sweep(plan, workers=3))
    assert serial == parallel  # byte-identical


def test_sweep_a_rate_row_all_spreading():
    plan = SweepPlan(base=_base(horizon=10.0), axes={"a": [0.5, 1.0], "mu": [1e-6, 10.0]})
    table = sweep(plan)
    for row in table.rows:
        if row["a"] == 1.0:
            assert row["verdict"] == SPREADING
            assert row["certificate"] == CERT_A_RATE


def test_sweep_records_failures_without_aborting():
    plan = SweepPlan(base=_base(horizon=5.0), axes={"a": [0.5, -0.5]})
    table = sweep(plan)
    assert len(table.rows) == 2
    good, bad = table.rows
    assert good["verdict"] in (SPREADING, VANISHING, UNDECIDED)
    assert bad["verdict"] == "Failed"
    assert bad["certificate"] == "ValueError"
    assert math.isnan(bad["final_length"])


def test_sweep_rejects_unknown_axis():
    with pytest.raises(ValueError):
        SweepPlan(base=_base(), axes={"b": [0.1, 0.2]})
