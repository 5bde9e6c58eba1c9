import math

import numpy as np
import pytest

from attswitch.harness import (
    REFERENCE_ICS,
    SWITCHING_GAINS,
    PerturbationSpec,
    RunResult,
    Scenario,
    control_effort,
    effort_comparison,
    export_run,
    format_comparison_report,
    format_run_report,
    lyapunov_ic_table,
    make_ic_scenario,
    run_scenario,
    scenario_to_text,
)
from attswitch.reference import ManeuverSpec
from attswitch.rigid_body import SimulationError

TABLE_TARGETS = {
    (2.0, 150.0): (-1, 7.97),
    (3.0, 120.0): (-1, 7.60),
    (4.0, 100.0): (-1, 7.24),
    (2.0, 100.0): (+1, 6.10),
    (2.0, 210.0): (-1, 5.90),
}


def fake_run(t, tau):
    n = len(t)
    sc = make_ic_scenario(2.0, 100.0)
    return RunResult(
        scenario=sc,
        t=np.asarray(t, dtype=float),
        q=np.tile([1.0, 0.0, 0.0, 0.0], (n, 1)),
        w=np.zeros((n, 3)),
        m_e=np.ones(n),
        n_e=np.zeros((n, 3)),
        w_e=np.zeros((n, 3)),
        tau=np.asarray(tau, dtype=float),
        sigma=np.ones(n, dtype=int),
        lam=np.zeros(n),
        V=np.zeros(n),
        t0=float(t[0]) if n else 0.0,
        tf=float(t[-1]) if n else 0.0,
        gamma_tau=0.0,
        switch_times=(),
        final_yaw_error=0.0,
    )


class TestControlEffort:
    def test_zero_torque(self):
        t = np.arange(0.0, 3.001, 1e-3)
        run = fake_run(t, np.zeros((len(t), 3)))
        assert control_effort(run, 0.0, 3.0) == 0.0

    def test_constant_torque_rms(self):
        t = np.arange(0.0, 3.001, 1e-3)
        tau = np.tile([0.0, 0.0, 2.0], (len(t), 1))
        assert control_effort(fake_run(t, tau), 0.0, 3.0) == pytest.approx(2.0, rel=1e-12)

    def test_sinusoid_rms(self):
        # analytic oracle: RMS of sin(2 pi t) over one period is 1/sqrt(2)
        t = np.arange(0.0, 1.0 + 1e-9, 1e-3)
        tau = np.zeros((len(t), 3))
        tau[:, 2] = np.sin(2.0 * math.pi * t)
        assert control_effort(fake_run(t, tau), 0.0, 1.0) == pytest.approx(
            1.0 / math.sqrt(2.0), abs=1e-6
        )

    def test_window_outside_run_rejected(self):
        t = np.arange(0.0, 1.001, 1e-3)
        run = fake_run(t, np.zeros((len(t), 3)))
        with pytest.raises(ValueError):
            control_effort(run, 0.0, 2.0)
        with pytest.raises(ValueError):
            control_effort(run, -1.0, 0.5)

    def test_quadrature_is_second_order(self):
        # non-periodic smooth torque t^2: trapezoid error scales as dt^2
        def gamma_at(dt):
            t = np.arange(0.0, 1.0 + dt / 2, dt)
            tau = np.zeros((len(t), 3))
            tau[:, 2] = t**2
            return control_effort(fake_run(t, tau), 0.0, 1.0)

        exact = math.sqrt(0.2)
        e1 = abs(gamma_at(1e-2) - exact)
        e2 = abs(gamma_at(5e-3) - exact)
        assert 3.5 < e1 / e2 < 4.5


class TestRunScenario:
    def test_slow_spin_never_switches(self):
        run = run_scenario(make_ic_scenario(2.0, 100.0, "switching"))
        assert run.switch_times == ()
        assert np.all(run.sigma == 1)

    def test_fast_spin_switches_once_at_start(self):
        run = run_scenario(make_ic_scenario(4.0, 100.0, "switching"))
        assert run.switch_times == (0.0,)
        assert np.all(run.sigma == -1)

    def test_regulation_achieved(self):
        for wz, psi in REFERENCE_ICS:
            run = run_scenario(make_ic_scenario(wz, psi, "switching"))
            assert np.linalg.norm(run.n_e[-1]) < 1e-3
            assert np.linalg.norm(run.w_e[-1]) < 1e-2
            assert abs(math.degrees(run.final_yaw_error)) < 0.5

    def test_roa_membership_at_t0(self):
        for wz, psi in REFERENCE_ICS:
            run = run_scenario(make_ic_scenario(wz, psi, "switching"))
            assert run.V[0] < 4.0 * SWITCHING_GAINS.c

    def test_consecutive_switches_separated(self):
        # empirical dwell: any two switches sit further apart than 10 dt
        for wz, psi in REFERENCE_ICS:
            run = run_scenario(make_ic_scenario(wz, psi, "switching"))
            times = np.array(run.switch_times)
            if len(times) > 1:
                assert np.min(np.diff(times)) > 10 * run.scenario.dt

    def test_full_mode_reaches_target_then_regulates(self):
        sc = Scenario(
            name="full",
            maneuver=ManeuverSpec(w0=np.array([0.0, 0.0, 2.0]), psi0=math.radians(100.0)),
            controller="switching",
            gains=SWITCHING_GAINS,
        )
        run = run_scenario(sc)
        # trigger a bit after stage1 + psi0/rate (tracking lag)
        nominal = 1.0 + math.radians(100.0) / 2.0
        assert nominal <= run.t0 < nominal + 0.2
        assert abs(math.degrees(run.final_yaw_error)) < 0.5

    def test_full_mode_needs_nonzero_rate(self):
        sc = Scenario(
            name="stuck",
            maneuver=ManeuverSpec(w0=np.zeros(3), psi0=1.0),
            controller="switching",
            gains=SWITCHING_GAINS,
        )
        with pytest.raises(SimulationError):
            run_scenario(sc)

    def test_determinism_bit_identical(self):
        r1 = run_scenario(make_ic_scenario(3.0, 120.0, "switching"))
        r2 = run_scenario(make_ic_scenario(3.0, 120.0, "switching"))
        for field in ("t", "q", "w", "tau", "V", "lam"):
            assert np.array_equal(getattr(r1, field), getattr(r2, field))
        assert r1.gamma_tau == r2.gamma_tau

    def test_gamma_nonnegative_and_sampling_monotone(self):
        run = run_scenario(make_ic_scenario(2.0, 150.0, "benchmark"))
        assert run.gamma_tau >= 0.0
        assert np.all(np.diff(run.t) > 0.0)


class TestIcTable:
    def test_reproduces_reference_values(self):
        rows = lyapunov_ic_table()
        assert len(rows) == 5
        for row in rows:
            sigma, v = TABLE_TARGETS[(row["wz"], row["psi0_deg"])]
            assert row["sigma"] == sigma
            assert row["V"] == pytest.approx(v, abs=0.005)
            assert row["in_roa"]

    def test_runs_under_a_millisecond_scale(self):
        # closed form; generous wall-clock bound to catch accidental simulation
        import time

        t0 = time.perf_counter()
        lyapunov_ic_table()
        assert time.perf_counter() - t0 < 0.05


class TestEffortComparison:
    def test_direction_flags_and_strict_ordering(self):
        report = effort_comparison(repeats=2, seed=3)
        flags = [r.direction_agreement for r in report.rows]
        assert flags == [False, False, False, True, True]
        for row in report.rows:
            if not row.direction_agreement:
                assert np.all(row.gamma_switching < row.gamma_benchmark)
        # agreement rows stay close relative to the mismatch reduction
        mismatch = report.mean_mismatch_reduction
        assert mismatch > 10.0
        for row in report.rows:
            if row.direction_agreement:
                assert abs(row.percent_reduction) < mismatch / 2.0

    def test_zero_perturbation_zero_esd(self):
        report = effort_comparison(
            repeats=3, perturbation=PerturbationSpec(psi0_deg=0.0, wz=0.0), ics=REFERENCE_ICS[:1]
        )
        row = report.rows[0]
        assert row.esd_benchmark == 0.0
        assert row.esd_switching == 0.0
        assert np.all(row.gamma_switching == row.gamma_switching[0])

    def test_seeded_determinism(self):
        r1 = effort_comparison(repeats=2, seed=11, ics=REFERENCE_ICS[:2])
        r2 = effort_comparison(repeats=2, seed=11, ics=REFERENCE_ICS[:2])
        for a, b in zip(r1.rows, r2.rows):
            assert np.array_equal(a.gamma_benchmark, b.gamma_benchmark)
            assert np.array_equal(a.gamma_switching, b.gamma_switching)

    def test_rejects_zero_repeats(self):
        with pytest.raises(ValueError):
            effort_comparison(repeats=0)


class TestExport:
    def test_empty_run_header_only(self, tmp_path):
        run = fake_run(np.array([]), np.zeros((0, 3)))
        path = tmp_path / "empty.csv"
        export_run(run, path)
        lines = path.read_text().splitlines()
        assert len(lines) == 1
        assert lines[0].startswith("t,qw,qx,qy,qz,")

    def test_single_sample_two_lines(self, tmp_path):
        run = fake_run(np.array([0.0]), np.zeros((1, 3)))
        path = tmp_path / "one.csv"
        export_run(run, path)
        assert len(path.read_text().splitlines()) == 2

    def test_round_trip(self, tmp_path):
        run = run_scenario(make_ic_scenario(4.0, 100.0, "switching", horizon=0.25))
        path = tmp_path / "run.csv"
        export_run(run, path)
        data = np.genfromtxt(path, delimiter=",", names=True)
        assert np.max(np.abs(data["t"] - run.t)) <= 1e-12
        assert np.max(np.abs(data["qw"] - run.q[:, 0])) <= 1e-12
        assert np.max(np.abs(data["wz"] - run.w[:, 2])) <= 1e-12
        assert np.max(np.abs(data["tauz"] - run.tau[:, 2])) <= 1e-12
        assert np.max(np.abs(data["V"] - run.V)) <= 1e-12
        assert np.max(np.abs(data["sigma"] - run.sigma)) == 0.0

    def test_byte_stable(self, tmp_path):
        run1 = run_scenario(make_ic_scenario(2.0, 100.0, "switching", horizon=0.1))
        run2 = run_scenario(make_ic_scenario(2.0, 100.0, "switching", horizon=0.1))
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        export_run(run1, p1)
        export_run(run2, p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_unwritable_path_raises_oserror(self, tmp_path):
        run = fake_run(np.array([0.0]), np.zeros((1, 3)))
        with pytest.raises(OSError):
            export_run(run, tmp_path / "missing_dir" / "x.csv")


class TestReports:
    def test_run_report_fields(self):
        run = run_scenario(make_ic_scenario(4.0, 100.0, "switching", horizon=0.5))
        text = format_run_report(run)
        assert "gamma_tau = " in text
        assert "switch_count = 1" in text
        assert "sigma_t0 = -1" in text
        assert "in_roa_at_t0 = true" in text

    def test_comparison_report_columns(self):
        report = effort_comparison(repeats=1, ics=REFERENCE_ICS[:1])
        text = format_comparison_report(report)
        assert "scenario,controller,mean_gamma,esd_gamma,percent_reduction,switches" in text
        assert "ic_2_150,benchmark," in text
        assert "ic_2_150,switching," in text

    def test_scenario_echo_round_trips_keys(self):
        sc = make_ic_scenario(3.0, 120.0, "benchmark", dt=5e-4, horizon=1.5)
        text = scenario_to_text(sc)
        assert "controller = benchmark" in text
        assert "wz = 3" in text
        assert "psi0_deg = 120" in text
        assert "dt = 0.0005" in text
