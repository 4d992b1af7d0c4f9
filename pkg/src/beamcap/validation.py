"""End-to-end verification checks shared by the CLI and the test suite.

Each check compares library output against an independent route (explicit
products, direct summation, quadrature, the second engine) and reports a
measured figure against a pinned tolerance.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from . import cli_rows, queueing, simulator, throughput
from .queueing import ChainParams, Variant
from .radio import beam_area, coverage_radius
from .scenario import Scenario, load_scenario


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    measured: float
    tolerance: float
    detail: str = ""

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return (f"[{verdict}] {self.name}: measured={self.measured:.6g} "
                f"tolerance={self.tolerance:.6g} {self.detail}".rstrip())


def check_telescoping() -> CheckResult:
    """Acceptance product against its telescoped exponential form.

    The product of the chain's per-state acceptance factors is accumulated
    in the log domain (deep tails underflow any linear representation);
    |expm1(delta-log)| is exactly the relative disagreement of the values.
    """
    worst = 0.0
    for gamma in (1e-4, 1e-2, 0.1, 1.0):
        for m in range(2, 201):
            factors = [math.exp(queueing._log_accept(n, gamma, Variant.EXPONENTIAL))
                       for n in range(1, m)]
            product_log = math.fsum(math.log(f) for f in factors)
            telescoped_log = -gamma * m * (m - 1)
            worst = max(worst, abs(math.expm1(product_log - telescoped_log)))
    return CheckResult("telescoping-identity", worst <= 1e-12, worst, 1e-12,
                       "m<=200, gamma in {1e-4,1e-2,0.1,1}")


def check_mminf_reduction() -> CheckResult:
    """Zero-footprint chain must collapse to the Poisson distribution."""
    worst = 0.0
    for a in (0.5, 5.0, 50.0):
        params = ChainParams(a, 1.0, 0.0)
        ss = queueing.steady_state(params, epsilon=1e-12)
        n = np.arange(ss.probs.size)
        pois = np.exp(n * math.log(a) - a - np.array([math.lgamma(k + 1) for k in n]))
        worst = max(worst, float(np.max(np.abs(ss.probs - pois))))
        worst = max(worst, abs(queueing.mean_pairs(ss) - a))
    return CheckResult("poisson-reduction", worst <= 1e-9, worst, 1e-9,
                       "load in {0.5, 5, 50}")


def check_lambert() -> CheckResult:
    grid = np.geomspace(1e-12, 1e9, 300)
    worst = 0.0
    for x in grid:
        w = queueing.lambert_w0(float(x))
        worst = max(worst, abs(w * math.exp(w) - x) / max(1.0, x))
    w1_err = abs(queueing.lambert_w0(1.0) - 0.56714329)
    ok = worst <= 1e-12 and w1_err <= 1e-8
    return CheckResult("lambert-w-residual", ok, worst, 1e-12,
                       f"|W(1)-0.56714329|={w1_err:.2e}")


def check_beam_area() -> CheckResult:
    """Closed form against adaptive quadrature of the border integral."""
    worst = 0.0
    r = 44.5
    for kappa in (2.0, 3.0, 4.0):
        for theta in (math.radians(t) for t in (4, 15, 30, 52)):
            def d(a):
                return r * (1.0 - a / theta) ** (1.0 / kappa)

            def dprime(a):
                return -r / (kappa * theta) * (1.0 - a / theta) ** (1.0 / kappa - 1.0)

            def f(a):
                return d(a) * math.cos(a) * (dprime(a) * math.sin(a) + d(a) * math.cos(a))

            with warnings.catch_warnings():
                warnings.simplefilter("ignore", integrate.IntegrationWarning)
                val, _ = integrate.quad(f, 0.0, theta, limit=400, epsabs=1e-13, epsrel=1e-13)
            closed = beam_area(r, theta, kappa)
            worst = max(worst, abs(2.0 * val - closed) / closed)
    return CheckResult("beam-area-quadrature", worst <= 1e-6, worst, 1e-6,
                       "kappa in {2,3,4}, theta in {4,15,30,52} deg")


def check_closed_vs_series() -> CheckResult:
    """Lambert-W mean against the summed series in the dense regime."""
    cases = [(g, x / (2.0 * g)) for g in (1e-4, 1e-2, 0.1, 0.2) for x in (10.0, 100.0, 1e4)]
    cases.append((6.3528955286054768e-5, 2.0 * math.pi * 3000.0 ** 2))
    worst = 0.0
    for gamma, a in cases:
        params = ChainParams(a, 1.0, gamma)
        series = queueing.mean_pairs(queueing.steady_state(params))
        closed = queueing.mean_pairs_closed_form(params)
        worst = max(worst, abs(closed - series) / series)
    return CheckResult("closed-form-vs-series", worst <= 0.05, worst, 0.05,
                       "2*gamma*load >= 10, bell-shaped regime")


def desk_scenario(seed: int | None = None) -> Scenario:
    overrides = {} if seed is None else {"seed": str(seed)}
    return load_scenario(preset="desk-fig4", overrides=overrides)


def analytic_reference(scn: Scenario) -> tuple[float, float, float]:
    """(gamma, series mean pairs, acceptance probability) for a scenario."""
    r = coverage_radius(scn.radio)
    gamma = queueing.gamma_from_geometry(r, scn.radio.kappa, scn.radio.theta,
                                         scn.deployment.area)
    params = ChainParams(scn.deployment.lambda_total, scn.deployment.mu, gamma, scn.variant)
    ss = queueing.steady_state(params)
    return gamma, queueing.mean_pairs(ss), queueing.acceptance_prob(ss)


def check_cross_engine(scn: Scenario | None = None, jobs: int = 1,
                       stats: simulator.SimStats | None = None) -> list[CheckResult]:
    """Desk-scale simulator run against the analytic chain."""
    scn = scn or desk_scenario()
    _, e_n, p_acc = analytic_reference(scn)
    if stats is None:
        stats = simulator.run(scn.sim_config(), jobs=jobs)
    rel = abs(stats.mean_pairs - e_n) / e_n
    absd = abs(stats.p_accept - p_acc)
    return [
        CheckResult("cross-engine-mean-pairs", rel <= 0.15, rel, 0.15,
                    f"sim={stats.mean_pairs:.2f} analytic={e_n:.2f}"),
        CheckResult("cross-engine-p-accept", absd <= 0.05, absd, 0.05,
                    f"sim={stats.p_accept:.4f} analytic={p_acc:.4f}"),
    ]


def check_monotonicity() -> CheckResult:
    """Load sweep monotonicity and footprint ordering across beamwidths."""
    scn = desk_scenario()
    lams = np.linspace(3.33e-5, 6.66e-4, 10)
    e_prev, p_prev = -math.inf, math.inf
    ok = True
    for lam in lams:
        _, e_n, p_acc = analytic_reference(scn.with_value("lambda_per_m2", float(lam)))
        ok = ok and e_n >= e_prev - 1e-12 and p_acc <= p_prev + 1e-12
        e_prev, p_prev = e_n, p_acc
    # high-load beamwidth ordering: wider beams have smaller footprints here
    full = load_scenario(preset="paper-fig4", overrides={"lambda_per_m2": "2.0",
                                                         "sweep_param": "", "sweep_values": ""})
    gs, es = [], []
    for theta in (8.0, 30.0, 52.0):
        g, e_n, _ = analytic_reference(full.with_value("theta_deg", theta))
        gs.append(g)
        es.append(e_n)
    order_ok = all(gs[i] > gs[i + 1] for i in range(2)) and all(es[i] < es[i + 1] for i in range(2))
    ok = ok and order_ok
    return CheckResult("monotonicity-suite", ok, float(ok), 1.0,
                       f"gamma(8,30,52deg)={gs[0]:.3g},{gs[1]:.3g},{gs[2]:.3g}")


def check_power_optimum() -> list[CheckResult]:
    """Interior optimum for the dense sweep and density ordering of optima."""
    base = load_scenario(preset="paper-fig5")
    dense = base.with_value("lambda_per_m2", 2.0).rate_scenario()
    sparse = base.with_value("lambda_per_m2", 0.5).rate_scenario()
    grid = np.arange(-20.0, 20.0 + 1e-9, 0.5)
    vals = [throughput.area_rate(dense, float(p)) for p in grid]
    i = int(np.argmax(vals))
    interior = 0 < i < len(grid) - 1 and vals[i] > vals[0] and vals[i] > vals[-1]
    opt_dense = throughput.optimize_power(dense, -20.0, 20.0, tol_db=0.1)
    opt_sparse = throughput.optimize_power(sparse, -20.0, 20.0, tol_db=0.1)
    ordered = opt_dense.p_tx_dbm <= opt_sparse.p_tx_dbm + 0.1
    return [
        CheckResult("power-interior-maximum", interior, float(grid[i]), 20.0,
                    f"argmax={grid[i]:.1f} dBm of [-20,20]"),
        CheckResult("power-optimum-density-ordering", ordered,
                    opt_dense.p_tx_dbm - opt_sparse.p_tx_dbm, 0.1,
                    f"p_opt(2/m2)={opt_dense.p_tx_dbm:.2f} <= p_opt(0.5/m2)={opt_sparse.p_tx_dbm:.2f}"),
    ]


def check_determinism(jobs: int = 1) -> CheckResult:
    """Byte-identical simulate output for a repeated fixed-seed run."""
    scn = load_scenario(preset="desk-fig4", overrides={
        "replications": "4", "horizon_s": "40", "warmup_s": "10", "seed": "99",
    })
    out1 = cli_rows.render_csv(cli_rows.simulate_rows(scn, jobs=jobs))
    out2 = cli_rows.render_csv(cli_rows.simulate_rows(scn, jobs=jobs))
    same = out1.encode() == out2.encode()
    return CheckResult("simulate-determinism", same, float(same), 1.0,
                       f"{len(out1.encode())} bytes compared")


def run_all(scn: Scenario | None = None, jobs: int = 1) -> list[CheckResult]:
    results = [
        check_telescoping(),
        check_mminf_reduction(),
        check_lambert(),
        check_beam_area(),
        check_closed_vs_series(),
    ]
    results.extend(check_cross_engine(scn, jobs=jobs))
    results.append(check_monotonicity())
    results.extend(check_power_optimum())
    results.append(check_determinism(jobs=jobs))
    return results
