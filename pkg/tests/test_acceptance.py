"""End-to-end acceptance criteria.

Each test certifies one numbered claim about the package as a whole; the
terminal summary hook in conftest.py prints one PASS/FAIL line per
criterion.  Frozen regression constants come from oracle-backed reference
runs of this package (tight tolerances, closed forms or independent
summation routes where available) and guard against silent behavior
changes; they are not tuned to the integrator defaults.
"""

import math
import time

import numpy as np
import pytest

from onsim.analysis import beat_report, extract_envelope
from onsim.cli import main
from onsim.dynamics import (
    IntegratorConfig,
    integrate,
    linearized_frequency,
    time_reversal_roundtrip,
)
from onsim.floquet import (
    compute_monodromy,
    find_inner_turning_point,
    period_by_events,
    period_by_quadrature,
)
from onsim.potential import Potential
from onsim.scan import GridSpec, _point_args, default_grid, records_to_csv, run_scan
from onsim.thermal import build_setup, matsubara_x0, solve_gap_equation

TIGHT = IntegratorConfig(rtol=1e-12, atol=1e-14)

# w=1, lambda=1, beta=0.5, s=1: the worked example used across the suite
DEMO = (1.0, 1.0, 0.5, 1.0)


def _demo():
    w, lam, beta, s = DEMO
    model = Potential.from_w_lambda(w, lam)
    return model, build_setup(model, beta, s)


@pytest.fixture(scope="module")
def grid_sweep():
    """One pass over the standard 192-point grid at default tolerances.

    Per point: period by events and by quadrature, monodromy over one
    period, and a 100-period integration for the energy drift.  Failures
    are recorded per point so a single bad corner names itself instead of
    aborting the sweep.
    """
    rows = []
    for w, lam, coeffs, beta, s, config in _point_args(default_grid()):
        point = {"w": w, "lam": lam, "beta": beta, "s": s, "error": None}
        try:
            model = Potential.from_w_lambda(w, lam)
            setup = build_setup(model, beta, s)
            est = period_by_events(setup, model, config)
            x_f = find_inner_turning_point(setup, model)
            quad = period_by_quadrature(setup, model, x_f)
            mono = compute_monodromy(setup, model, config, est.period)
            traj = integrate(setup, model, config, 100.0 * est.period)
            point.update(
                period_events=est.period,
                period_quad=quad.period,
                det_error=mono.det_error,
                symmetry_error=mono.symmetry_error,
                classification=mono.classification,
                drift=traj.stats.max_energy_drift,
            )
        except Exception as exc:  # report the point, fail the criterion
            point["error"] = f"{type(exc).__name__}: {exc}"
        rows.append(point)
    return rows


def _good(grid_sweep):
    failed = [p for p in grid_sweep if p["error"] is not None]
    assert not failed, f"{len(failed)} grid points failed; first: {failed[0]}"
    return grid_sweep


def test_criterion_01_gap_free_theory():
    start = time.perf_counter()
    for w in (0.5, 1.0, 2.0):
        model = Potential.from_w_lambda(w, 0.0)
        for beta in (0.25, 0.5, 1.0, 2.0):
            x0 = solve_gap_equation(model, beta)
            closed = 1.0 / (2.0 * w * math.tanh(0.5 * beta * w))
            assert abs(x0 - closed) < 1e-10
            # summation route with tail correction, cutoff 1e5
            assert abs(matsubara_x0(w, beta, 100_000) - x0) < 1e-5
    assert time.perf_counter() - start < 1.0


def test_criterion_02_equilibrium_identity():
    config = IntegratorConfig()
    for w, lam in ((1.0, 0.0), DEMO[:2]):
        model = Potential.from_w_lambda(w, lam)
        setup = build_setup(model, 0.5, 0.0)
        t_end = 50.0 * 2.0 * math.pi / setup.omega_eff
        traj = integrate(setup, model, config, t_end)
        assert float(np.max(np.abs(traj.x - setup.x0))) < 1e-10


def test_criterion_03_free_theory_dynamics():
    config = IntegratorConfig()
    for w in (0.5, 1.0, 2.0):
        model = Potential.from_w_lambda(w, 0.0)
        setup = build_setup(model, 0.5, 1.0)
        est = period_by_events(setup, model, config)
        assert abs(est.period - math.pi / w) < 1e-9

    model = Potential.from_w_lambda(1.0, 0.0)
    setup = build_setup(model, 0.5, 1.0)
    traj = integrate(setup, model, TIGHT, 50.0 * math.pi)
    x_exact = setup.x0 + setup.s * np.cos(traj.t) ** 2
    assert float(np.max(np.abs(traj.x - x_exact))) < 1e-8
    assert float(np.max(np.abs(traj.u - np.cos(traj.t)))) < 1e-8

    est = period_by_events(setup, model, config)
    mono = compute_monodromy(setup, model, config, est.period)
    deviation = np.abs(np.asarray(mono.matrix) + np.eye(2))
    assert float(np.max(deviation)) < 1e-7
    assert mono.classification == "boundary"


def test_criterion_04_energy_conservation(grid_sweep):
    drifts = [p["drift"] for p in _good(grid_sweep)]
    assert max(drifts) < 1e-8


def test_criterion_05_period_cross_method(grid_sweep):
    rels = [
        abs(p["period_events"] - p["period_quad"]) / p["period_events"]
        for p in _good(grid_sweep)
    ]
    assert max(rels) < 1e-7


def test_criterion_06_monodromy_structure(grid_sweep):
    points = _good(grid_sweep)
    assert max(p["det_error"] for p in points) < 1e-8
    assert max(p["symmetry_error"] for p in points) < 1e-8


def test_criterion_07_small_shift_linearization():
    config = IntegratorConfig()
    for w in (0.5, 1.0, 2.0):
        for lam in (0.0, 0.1, 1.0, 10.0):
            model = Potential.from_w_lambda(w, lam)
            setup = build_setup(model, 0.5, 1e-6)
            t_lin = 2.0 * math.pi / linearized_frequency(setup, model)
            est = period_by_events(setup, model, config)
            assert abs(est.period - t_lin) / t_lin < 1e-4


def test_criterion_08_no_resonance_scan(tmp_path):
    out = tmp_path / "scan.csv"
    start = time.perf_counter()
    code = main(["scan", "--default-grid", "--assert-stable", "--out", str(out)])
    elapsed = time.perf_counter() - start
    assert code == 0  # the stability gate itself certifies tol 1e-6
    assert elapsed < 60.0
    rows = [line.split(",") for line in out.read_text().strip().split("\n")[1:]]
    assert len(rows) == 192
    classes = {r[9] for r in rows}
    assert "resonant" not in classes and "error" not in classes
    assert max(float(r[8]) for r in rows) < 1e-6


def test_criterion_09_time_reversal_roundtrip():
    model, setup = _demo()
    config = IntegratorConfig()
    period = period_by_events(setup, model, config).period
    assert time_reversal_roundtrip(setup, model, config, period, 10) < 1e-7


def test_criterion_10_beat_envelope_regression():
    model, setup = _demo()
    period = period_by_events(setup, model, IntegratorConfig()).period
    traj = integrate(setup, model, TIGHT, 50.0 * period)
    envelope = extract_envelope(traj)
    report = beat_report(envelope)

    # qualitative claims: the envelope dips well below 1 and recovers
    assert report.modulation_depth > 0.1
    assert report.recurrence_ratio >= 0.5

    # frozen reference-run regression values
    assert len(envelope) == 44
    assert report.min_envelope == pytest.approx(0.6488864896036882, abs=1e-9)
    assert report.max_envelope_late == pytest.approx(0.9999953158123932, abs=1e-9)
    assert report.modulation_depth == pytest.approx(0.3511135103963118, abs=1e-9)
    assert report.n_envelope_cycles == 10

    control = integrate(
        setup, model, IntegratorConfig(), 50.0 * period, freeze_u_coefficient=True
    )
    control_report = beat_report(extract_envelope(control))
    assert control_report.modulation_depth < 1e-6


def test_criterion_11_determinism(capsys):
    """Representative outputs from the other criteria, re-run and compared
    bit for bit; includes a concurrent scan.  The full suite is not
    executed twice here for runtime reasons."""
    model, setup = _demo()
    config = IntegratorConfig()

    first = period_by_events(setup, model, config)
    second = period_by_events(setup, model, config)
    assert first.period == second.period and first.x_f == second.x_f

    m1 = compute_monodromy(setup, model, config, first.period)
    m2 = compute_monodromy(setup, model, config, second.period)
    assert m1.matrix == m2.matrix and m1.trace == m2.trace

    t1 = integrate(setup, model, config, 5.0 * first.period)
    t2 = integrate(setup, model, config, 5.0 * second.period)
    assert np.array_equal(t1.x, t2.x) and np.array_equal(t1.u, t2.u)

    grid = GridSpec(
        w=(1.0,), lam=(0.0, 1.0), beta=(0.5, 2.0), s=(0.1, 1.0), config=config
    )
    sequential = run_scan(grid, jobs=1)
    assert run_scan(grid, jobs=1) == sequential
    concurrent = run_scan(grid, jobs=2)
    assert concurrent == sequential
    assert records_to_csv(concurrent) == records_to_csv(sequential)

    for args in (
        ["floquet", "--w", "1", "--lambda", "1", "--beta", "0.5", "--s", "1"],
        ["gap", "--w", "1", "--lambda", "1", "--beta", "0.5", "--oracle", "1000"],
    ):
        assert main(args) == 0
        out1 = capsys.readouterr()
        assert main(args) == 0
        assert capsys.readouterr() == out1
