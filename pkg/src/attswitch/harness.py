"""Scenario runner, effort metrics, benchmark comparisons, and CSV export.

A Scenario pins everything a run needs (maneuver, controller, gains,
inertia, step size, seed); run_scenario wires the reference generator, the
chosen control law, and the integrator together and returns the full
telemetry as flat arrays.  The performance figure of merit is the RMS of
the torque 2-norm over the evaluation window [t0, t0 + horizon].
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import stability
from .controllers import (
    BenchmarkController,
    ContinuousController,
    GainSet,
    SwitchingController,
    SwitchState,
    attitude_error,
    switch_function,
    update_sigma,
)
from .quat import IDENTITY, yaw_of
from .reference import MODE_STAGE3, ManeuverSpec, ManeuverTracker, stage3_initial_state
from .rigid_body import (
    DEFAULT_DT,
    DEFAULT_INERTIA,
    BodyState,
    SimulationError,
    simulate,
    validate_inertia,
)

# The five benchmark initial conditions {wz rad/s, psi0 deg} exercised by the
# comparison harness, ordered so the first three make the shorter-path law
# and the switching law pick opposite torque directions.
REFERENCE_ICS = (
    (2.0, 150.0),
    (3.0, 120.0),
    (4.0, 100.0),
    (2.0, 100.0),
    (2.0, 210.0),
)

SWITCHING_GAINS = GainSet(kq=10.0, kw=100.0, kn=10.0, c=2.0, delta=0.1)
BENCHMARK_GAINS = GainSet(kq=1000.0, kw=100.0, kn=10.0, c=2.0, delta=0.1)

CONTROLLERS = {
    "continuous": ContinuousController,
    "benchmark": BenchmarkController,
    "switching": SwitchingController,
}

CSV_HEADER = (
    "t,qw,qx,qy,qz,wx,wy,wz,me,nex,ney,nez,wex,wey,wez,"
    "taux,tauy,tauz,sigma,lambda,V"
)


@dataclass
class Scenario:
    name: str
    maneuver: ManeuverSpec
    controller: str
    gains: GainSet
    inertia: np.ndarray = field(default_factory=lambda: DEFAULT_INERTIA.copy())
    dt: float = DEFAULT_DT
    horizon_after_t0: float = 3.0
    seed: int = 0

    def __post_init__(self):
        if self.controller not in CONTROLLERS:
            raise ValueError(f"unknown controller {self.controller!r}")
        if self.horizon_after_t0 <= 0.0:
            raise ValueError("horizon_after_t0 must be positive")
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        self.inertia = validate_inertia(self.inertia)


@dataclass
class RunResult:
    scenario: Scenario
    t: np.ndarray        # (N,)
    q: np.ndarray        # (N, 4)
    w: np.ndarray        # (N, 3)
    m_e: np.ndarray      # (N,)
    n_e: np.ndarray      # (N, 3)
    w_e: np.ndarray      # (N, 3)
    tau: np.ndarray      # (N, 3)
    sigma: np.ndarray    # (N,) int
    lam: np.ndarray      # (N,)
    V: np.ndarray        # (N,)
    t0: float
    tf: float
    gamma_tau: float
    switch_times: tuple
    final_yaw_error: float


def control_effort(run: RunResult, t0: float, tf: float) -> float:
    """RMS torque norm over [t0, tf] by trapezoidal quadrature."""
    t = run.t
    if t0 < t[0] - 1e-9 or tf > t[-1] + 1e-9 or tf <= t0:
        raise ValueError(f"window [{t0}, {tf}] not covered by run [{t[0]}, {t[-1]}]")
    mask = (t >= t0 - 1e-12) & (t <= tf + 1e-12)
    tw = t[mask]
    sq = np.einsum("ij,ij->i", run.tau[mask], run.tau[mask])
    return math.sqrt(float(np.trapezoid(sq, tw)) / (tf - t0))


def make_controller(scenario: Scenario):
    tracker = ManeuverTracker(scenario.maneuver)
    return CONTROLLERS[scenario.controller](scenario.gains, scenario.inertia, tracker)


def run_scenario(scenario: Scenario) -> RunResult:
    """Simulate a scenario and assemble the full telemetry."""
    controller = make_controller(scenario)
    spec = scenario.maneuver
    if spec.mode == MODE_STAGE3:
        state = stage3_initial_state(spec)
        duration = scenario.horizon_after_t0
    else:
        rate = math.sqrt(float(spec.w0 @ spec.w0))
        if rate < 1e-12:
            raise SimulationError("full-mode maneuver needs a nonzero stage-2 rate")
        state = BodyState(q=IDENTITY.copy(), w=np.zeros(3))
        stage2_allowance = 1.5 * spec.psi0 / rate + 0.5
        duration = spec.stage1_duration + stage2_allowance + scenario.horizon_after_t0
    samples = simulate(state, controller, scenario.inertia, scenario.dt, duration)

    t0 = controller.tracker.t0
    if t0 is None:
        raise SimulationError("stage-2 -> stage-3 transition never triggered")
    tf = t0 + scenario.horizon_after_t0

    n = len(samples)
    t = np.empty(n)
    q = np.empty((n, 4))
    w = np.empty((n, 3))
    m_e = np.empty(n)
    n_e = np.empty((n, 3))
    w_e = np.empty((n, 3))
    tau = np.empty((n, 3))
    sigma = np.empty(n, dtype=int)
    lam = np.empty(n)
    for i, (ti, s, taui, tel) in enumerate(samples):
        t[i] = ti
        q[i] = s.q
        w[i] = s.w
        m_e[i] = tel.m_e
        n_e[i] = tel.n_e
        w_e[i] = tel.w_err
        tau[i] = taui
        sigma[i] = tel.sigma
        lam[i] = tel.lam
    V = stability.lyapunov_series(m_e, n_e, w_e, sigma, scenario.gains)

    if tf > t[-1] + 1e-9:
        raise SimulationError(
            f"stage-3 window [{t0}, {tf}] overruns the simulated horizon {t[-1]}"
        )
    i_f = int(np.searchsorted(t, tf - 1e-12))
    switch_times = (
        controller.switch_state.switch_times
        if isinstance(controller, SwitchingController)
        else ()
    )
    run = RunResult(
        scenario=scenario,
        t=t, q=q, w=w, m_e=m_e, n_e=n_e, w_e=w_e, tau=tau,
        sigma=sigma, lam=lam, V=V,
        t0=t0, tf=tf,
        gamma_tau=0.0,
        switch_times=switch_times,
        final_yaw_error=yaw_of(q[i_f]),
    )
    run.gamma_tau = control_effort(run, t0, tf)
    return run


def make_ic_scenario(
    wz: float,
    psi0_deg: float,
    controller: str = "switching",
    gains: GainSet | None = None,
    inertia: np.ndarray | None = None,
    dt: float = DEFAULT_DT,
    horizon: float = 3.0,
    name: str | None = None,
) -> Scenario:
    """Stage3-mode scenario for an initial condition {wz rad/s, psi0 deg}."""
    if gains is None:
        gains = BENCHMARK_GAINS if controller == "benchmark" else SWITCHING_GAINS
    maneuver = ManeuverSpec(
        w0=np.array([0.0, 0.0, wz]), psi0=math.radians(psi0_deg), mode=MODE_STAGE3
    )
    return Scenario(
        name=name or f"ic_{wz:g}_{psi0_deg:g}_{controller}",
        maneuver=maneuver,
        controller=controller,
        gains=gains,
        inertia=DEFAULT_INERTIA.copy() if inertia is None else inertia,
        dt=dt,
        horizon_after_t0=horizon,
    )


def initial_error_state(wz: float, psi0_deg: float):
    """Closed-form error state at the stage-3 step for an IC pair."""
    spec = ManeuverSpec(
        w0=np.array([0.0, 0.0, wz]), psi0=math.radians(psi0_deg), mode=MODE_STAGE3
    )
    s0 = stage3_initial_state(spec)
    return attitude_error(s0.q, IDENTITY, s0.w, np.zeros(3))


def lyapunov_ic_table(gains: GainSet | None = None, ics=REFERENCE_ICS):
    """Switch sign and Lyapunov value at t0 for each benchmark IC.

    The sign is selected by one hysteretic update from sigma = +1, exactly
    as the running controller would at its first stage-3 step; everything
    is closed form, no simulation.
    """
    gains = gains or SWITCHING_GAINS
    rows = []
    for wz, psi0_deg in ics:
        err = initial_error_state(wz, psi0_deg)
        lam = switch_function(err, gains)
        sigma = update_sigma(SwitchState(sigma=+1), lam, gains.delta).sigma
        V = stability.lyapunov_value(err, sigma, gains)
        rows.append(
            {
                "wz": wz,
                "psi0_deg": psi0_deg,
                "sigma": sigma,
                "lam": lam,
                "V": V,
                "in_roa": stability.roa_contains(err, sigma, gains),
            }
        )
    return rows


@dataclass
class PerturbationSpec:
    """Trial-to-trial initial-condition spread (uniform, symmetric)."""

    psi0_deg: float = 1.0
    wz: float = 0.05


@dataclass
class IcComparison:
    wz: float
    psi0_deg: float
    direction_agreement: bool
    gamma_benchmark: np.ndarray
    gamma_switching: np.ndarray
    switches: int

    @property
    def mean_benchmark(self) -> float:
        return float(np.mean(self.gamma_benchmark))

    @property
    def mean_switching(self) -> float:
        return float(np.mean(self.gamma_switching))

    @staticmethod
    def _esd(g: np.ndarray) -> float:
        # identical repeats must report exactly zero spread
        if len(g) < 2 or np.ptp(g) == 0.0:
            return 0.0
        return float(np.std(g, ddof=1))

    @property
    def esd_benchmark(self) -> float:
        return self._esd(self.gamma_benchmark)

    @property
    def esd_switching(self) -> float:
        return self._esd(self.gamma_switching)

    @property
    def percent_reduction(self) -> float:
        return 100.0 * (self.mean_benchmark - self.mean_switching) / self.mean_benchmark


@dataclass
class ComparisonReport:
    repeats: int
    perturbation: PerturbationSpec
    rows: list

    @property
    def mean_mismatch_reduction(self) -> float:
        vals = [r.percent_reduction for r in self.rows if not r.direction_agreement]
        return float(np.mean(vals)) if vals else 0.0


def effort_comparison(
    repeats: int = 10,
    perturbation: PerturbationSpec | None = None,
    gains_switching: GainSet | None = None,
    gains_benchmark: GainSet | None = None,
    inertia: np.ndarray | None = None,
    dt: float = DEFAULT_DT,
    horizon: float = 3.0,
    seed: int = 0,
    ics=REFERENCE_ICS,
) -> ComparisonReport:
    """Paired effort comparison of the shorter-path and switching laws.

    Each repeat perturbs the IC (same draw for both controllers, so the
    comparison is paired) and runs both laws from the stage-3 state.
    """
    if repeats < 1:
        raise ValueError("repeats must be at least 1")
    pert = perturbation or PerturbationSpec()
    gsw = gains_switching or SWITCHING_GAINS
    gbm = gains_benchmark or BENCHMARK_GAINS
    rows = []
    for i, (wz, psi0_deg) in enumerate(ics):
        err0 = initial_error_state(wz, psi0_deg)
        lam0 = switch_function(err0, gsw)
        sigma0 = update_sigma(SwitchState(sigma=+1), lam0, gsw.delta).sigma
        sign_m = 1 if err0.m_e >= 0.0 else -1
        g_b = np.empty(repeats)
        g_s = np.empty(repeats)
        switches = 0
        for r in range(repeats):
            rng = np.random.default_rng([seed, i, r])
            wz_r = wz + rng.uniform(-pert.wz, pert.wz)
            psi_r = psi0_deg + rng.uniform(-pert.psi0_deg, pert.psi0_deg)
            run_b = run_scenario(
                make_ic_scenario(wz_r, psi_r, "benchmark", gbm, inertia, dt, horizon)
            )
            run_s = run_scenario(
                make_ic_scenario(wz_r, psi_r, "switching", gsw, inertia, dt, horizon)
            )
            g_b[r] = run_b.gamma_tau
            g_s[r] = run_s.gamma_tau
            switches = max(switches, len(run_s.switch_times))
        rows.append(
            IcComparison(
                wz=wz,
                psi0_deg=psi0_deg,
                direction_agreement=(sign_m == sigma0),
                gamma_benchmark=g_b,
                gamma_switching=g_s,
                switches=switches,
            )
        )
    return ComparisonReport(repeats=repeats, perturbation=pert, rows=rows)


def export_run(run: RunResult, path) -> None:
    """Write the run telemetry as CSV (17 significant digits, byte-stable)."""
    cols = np.column_stack(
        [
            run.t,
            run.q,
            run.w,
            run.m_e,
            run.n_e,
            run.w_e,
            run.tau,
            run.sigma.astype(float),
            run.lam,
            run.V,
        ]
    )
    try:
        with open(path, "w") as f:
            f.write(CSV_HEADER + "\n")
            for row in cols:
                f.write(",".join(f"{v:.17g}" for v in row) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write telemetry to {path}: {exc}") from exc


def format_run_report(run: RunResult) -> str:
    sc = run.scenario
    i0 = int(np.searchsorted(run.t, run.t0 - 1e-12))
    lines = [
        "# run report",
        f"scenario = {sc.name}",
        f"controller = {sc.controller}",
        f"mode = {sc.maneuver.mode}",
        f"t0 = {run.t0:.6f}",
        f"tf = {run.tf:.6f}",
        f"gamma_tau = {run.gamma_tau:.9g}",
        f"switch_count = {len(run.switch_times)}",
        f"switch_times = {','.join(f'{s:.6f}' for s in run.switch_times)}",
        f"sigma_t0 = {int(run.sigma[i0]):+d}",
        f"lambda_t0 = {run.lam[i0]:.6f}",
        f"V_t0 = {run.V[i0]:.6f}",
        f"in_roa_at_t0 = {str(bool(run.V[i0] < 4.0 * sc.gains.c)).lower()}",
        f"final_yaw_error_rad = {run.final_yaw_error:.9g}",
        f"final_yaw_error_deg = {math.degrees(run.final_yaw_error):.9g}",
    ]
    return "\n".join(lines) + "\n"


def format_comparison_report(report: ComparisonReport) -> str:
    lines = [
        "# controller effort comparison",
        f"repeats = {report.repeats}",
        f"perturbation_psi0_deg = {report.perturbation.psi0_deg:g}",
        f"perturbation_wz = {report.perturbation.wz:g}",
        f"mean_mismatch_reduction_percent = {report.mean_mismatch_reduction:.3f}",
        "",
        "[results]",
        "scenario,controller,mean_gamma,esd_gamma,percent_reduction,switches",
    ]
    for r in report.rows:
        name = f"ic_{r.wz:g}_{r.psi0_deg:g}"
        lines.append(
            f"{name},benchmark,{r.mean_benchmark:.9g},{r.esd_benchmark:.9g},,0"
        )
        lines.append(
            f"{name},switching,{r.mean_switching:.9g},{r.esd_switching:.9g},"
            f"{r.percent_reduction:.3f},{r.switches}"
        )
    return "\n".join(lines) + "\n"


def scenario_to_text(scenario: Scenario) -> str:
    """Flat key-value echo of a scenario, readable back as a scenario file."""
    j = np.diag(scenario.inertia)
    lines = [
        f"name = {scenario.name}",
        f"mode = {scenario.maneuver.mode}",
        f"controller = {scenario.controller}",
        f"wz = {scenario.maneuver.w0[2]:.12g}",
        f"psi0_deg = {math.degrees(scenario.maneuver.psi0):.12g}",
        f"stage1_duration = {scenario.maneuver.stage1_duration:.12g}",
        f"kq = {scenario.gains.kq:.12g}",
        f"kw = {scenario.gains.kw:.12g}",
        f"kn = {scenario.gains.kn:.12g}",
        f"c = {scenario.gains.c:.12g}",
        f"delta = {scenario.gains.delta:.12g}",
        f"dt = {scenario.dt:.12g}",
        f"horizon = {scenario.horizon_after_t0:.12g}",
        f"seed = {scenario.seed}",
        f"j_diag = {j[0]:.12g},{j[1]:.12g},{j[2]:.12g}",
    ]
    return "\n".join(lines) + "\n"
