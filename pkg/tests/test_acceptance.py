"""Acceptance suite: one test per criterion, each at its stated tolerance.

Every test prints a ``criterion N: PASS`` or ``criterion N: FAIL`` line (use
``pytest -s`` to see them inline); the terminal summary repeats them.
"""
import math
import os
import time

import numpy as np
import sympy as sp

from liouville_lab import classification as C
from liouville_lab import cli
from liouville_lab import doubling as D
from liouville_lab import elliptic_radial as ER
from liouville_lab import estimates as ES
from liouville_lab import ode_blowup as OB
from liouville_lab import parabolic_fd as PF
from liouville_lab.nonlinearity import build_example, parse_nonlinearity, slow_variation_catalog

from . import oracles as O


def _verdict(n, checks):
    """Print the verdict line, then fail with every unmet check listed."""
    bad = [msg for ok, msg in checks if not ok]
    print(f"criterion {n}: {'FAIL' if bad else 'PASS'}")
    for msg in bad:
        print("   ", msg)
    assert not bad, "; ".join(bad)


def test_criterion_01_ode_sharp_rate():
    checks = []
    for p in (1.5, 2.0, 3.0):
        f = parse_nonlinearity(f"pow(s,{p})")
        t0 = time.perf_counter()
        rc = OB.verify_rate(f, 1.0, decades=8.0)
        el = time.perf_counter() - t0
        T = rc.profile.T
        tau = rc.profile.tau
        target = 1 / (p - 1)
        err = max(abs(rc.rho_min / target - 1), abs(rc.rho_max / target - 1))
        checks += [(err <= 1e-6, f"p={p}: rho rel err {err:.3g}"),
                   (tau.min() <= 1e-8 * T * (1 + 1e-9) and tau.max() >= 0.5 * T * (1 - 1e-9),
                    f"p={p}: window [{tau.min():.3g}, {tau.max():.3g}]"),
                   (el < 1.0, f"p={p}: {el:.2f} s")]
    _verdict(1, checks)


def test_criterion_02_blowup_time_quadrature():
    T2 = OB.blowup_time(parse_nonlinearity("pow(s,2)"), 1.0)
    T3 = OB.blowup_time(parse_nonlinearity("pow(s,3)"), 1.0)
    _verdict(2, [(abs(T2 - 1.0) <= 1e-10, f"s^2: T={T2!r}"),
                 (abs(T3 - 0.5) <= 1e-10, f"s^3: T={T3!r}")])


def _numeric_residual(res, r_vals):
    g = sp.lambdify(O.r, res, "mpmath")
    return max(abs(float(g(rv))) for rv in r_vals)


def test_criterion_03_closed_form_elliptic_regressions():
    r_check = np.concatenate([np.linspace(0.0, 1.0, 11), np.logspace(0.1, 2, 60)])
    r_res = [0.01, 0.5, 1.0, 7.0, 50.0, 100.0]
    checks = []
    u, res_u = O.aubin_talenti(3)
    v, res_v = O.counterexample(5, 2, 2, 8)
    for name, res in (("Aubin-Talenti", res_u), ("counter-example", res_v)):
        checks.append((res == 0 or _numeric_residual(res, r_res) < 1e-10,
                       f"{name}: closed form residual"))
    cases = (("Aubin-Talenti", parse_nonlinearity("pow(s,5)"), 3, u),
             ("counter-example", build_example("estimate_counterexample", p=2.0, n=5), 5, v))
    for name, f, n, exact in cases:
        shot = ER.shoot(f, n, 1.0, r_max=100.0)
        err = float(np.max(np.abs(shot.at(r_check) / exact(r_check) - 1)))
        checks += [(shot.outcome == ER.POSITIVE_GLOBAL, f"{name}: outcome {shot.outcome}"),
                   (err <= 1e-8, f"{name}: rel err {err:.3g}")]
    _verdict(3, checks)


def test_criterion_04_subcritical_liouville_corroboration():
    checks = []
    for text in ("pow(s,3)", "pow(s,3)*log(2+s)", "pow(s,2)*log(2+s)"):
        f = parse_nonlinearity(text)
        for v0 in (0.1, 1.0, 10.0):
            t0 = time.perf_counter()
            shot = ER.shoot(f, 3, v0)
            el = time.perf_counter() - t0
            checks += [(shot.outcome == ER.CROSSES_ZERO, f"{text}, v0={v0}: {shot.outcome}"),
                       (el < 1.0, f"{text}, v0={v0}: {el:.2f} s")]
    f = build_example("power_log_entire", p=5.0, q=1.0, K=1.0, n=3)
    t0 = time.perf_counter()
    outcomes = [ER.shoot(f, 3, v0, r_max=1e3).outcome for v0 in (0.1, 1.0, 10.0)]
    el = (time.perf_counter() - t0) / 3
    checks += [(ER.POSITIVE_GLOBAL in outcomes, f"supercritical log: {outcomes}"),
               (el < 1.0, f"supercritical log: {el:.2f} s per run")]
    _verdict(4, checks)


def test_criterion_05_singular_state_sharpness():
    sol = ER.singular_steady_state(4.0, 3)
    f = parse_nonlinearity("pow(s,4)")
    model = ES.DistanceModel("elliptic", ES.Domain("punctured_ball", 0.0, 1.0))
    worst = 0.0
    for r in np.linspace(1e-3, 0.5, 200):
        rep = ES.interior_constant(sol(np.array([r])), np.array([r]), f, model)
        worst = max(worst, abs(rep.sup / (2 / 9) - 1))
    beta = sol.beta
    _verdict(5, [(worst <= 1e-10, f"max rel deviation {worst:.3g}"),
                 (abs(beta * (3 - 2 - beta) - 2 / 9) < 1e-15, "closed-form constant")])


def test_criterion_06_doubling_lemma():
    rng = np.random.default_rng(0)
    t0 = time.perf_counter()
    held = fails = over = 0
    for _ in range(1000):
        space, M, k, y = D.random_instance(rng, n_max=200)
        assert space.n_points <= 200
        if not M[y] * space.dist_to_gamma()[y] > 2 * k:
            continue
        held += 1
        res = D.doubling_select(space, M, k, y)
        a, b, c = O.doubling_brute(space.dist, M, sorted(space.domain), sorted(space.gamma),
                                   k, y, res.x)
        bound = math.ceil(math.log2(max(M[i] for i in space.domain) / M[y])) + 1
        fails += not (a and b and c)
        over += res.iterations > bound
    el = time.perf_counter() - t0
    _verdict(6, [(held > 0, "no instance met the precondition"),
                 (fails == 0, f"{fails} conclusion failures"),
                 (over == 0, f"{over} iteration-bound violations"),
                 (el < 30.0, f"{el:.1f} s")])


def test_criterion_07_integral_inequality():
    checks = []
    for n in (1, 2):
        h = 1 / 32
        X = ES.box_grid(n, h)
        res = ES.gs_inequality_check(2.5 + 0 * X[0], ES.bump(np.sqrt(sum(x * x for x in X))),
                                     0.7, 1.5, h)
        checks.append((res.slack == 0.0, f"v = const, n={n}: slack {res.slack!r}"))
    rng = np.random.default_rng(20240)
    for i in range(20):
        n = 1 + i % 2
        v, phi, q, k = ES.random_gs_case(rng, n)
        out = []
        for h in (1 / 128, 1 / 256):
            X = ES.box_grid(n, h)
            out.append(ES.gs_inequality_check(v(*X), phi(*X), q, k, h))
        a, b = out
        tag = f"case {i} (n={n}, q={q:.3f}, k={k:.3f})"
        checks += [(a.passed, f"{tag}: slack {a.slack:.3e} < -C_disc h^2 = {-a.C_disc * a.h ** 2:.3e}"),
                   (b.slack >= a.slack,
                    f"{tag}: slack {a.slack:.6e} at h=1/128 did not improve at h=1/256 ({b.slack:.6e})")]
    _verdict(7, checks)


def test_criterion_08_parabolic_blowup_rate():
    checks = []
    h = 1 / 512
    f2 = parse_nonlinearity("pow(s,2)")
    t0 = time.perf_counter()
    tr = PF.simulate(f2, PF.Geometry.line(), "neumann", lambda x: np.ones_like(x),
                     PF.SimOptions(h=h))
    el = time.perf_counter() - t0
    T, unc = PF.estimate_blowup_time(tr, f2)
    rep = PF.rate_report(tr, f2, T, unc)
    checks += [(abs(T - 1.0) <= 0.01, f"flat: T_hat={T!r}"),
               (abs(rep["sup"] - 1) <= 0.01 and abs(rep["inf"] - 1) <= 0.01,
                f"flat: rho in [{rep['inf']:.5f}, {rep['sup']:.5f}]"),
               (el < 60.0, f"flat run {el:.1f} s")]
    flog = parse_nonlinearity("pow(s,2)*log(2+s)")
    sups = {}
    for hh in (1 / 256, 1 / 512):
        for A in (20, 50, 100):
            t0 = time.perf_counter()
            tr = PF.simulate(flog, PF.Geometry.interval(0, 1), "dirichlet",
                             lambda x: A * np.sin(math.pi * x), PF.SimOptions(h=hh))
            el = time.perf_counter() - t0
            T, unc = PF.estimate_blowup_time(tr, flog)
            sups[hh, A] = PF.rate_report(tr, flog, T, unc)["sup"]
            checks += [(tr.termination == PF.BLOW_UP, f"A={A}, h={hh}: {tr.termination}"),
                       (math.isfinite(sups[hh, A]) and sups[hh, A] > 0, f"A={A}: sup {sups[hh, A]}"),
                       (el < 60.0, f"A={A}, h={hh}: {el:.1f} s")]
    fine = [sups[h, A] for A in (20, 50, 100)]
    spread = max(fine) / min(fine)
    checks.append((spread <= 4.0, f"spread {spread:.3f}"))
    drift = max(abs(sups[1 / 512, A] / sups[1 / 256, A] - 1) for A in (20, 50, 100))
    checks.append((drift <= 0.01, f"refinement drift of sup rho {drift:.3g}"))
    _verdict(8, checks)


def test_criterion_09_classification_suite():
    checks = []
    for p in (1.5, 2.0, 3.0):
        for location in ("inf", "0"):
            for kind, f in slow_variation_catalog(p).items():
                rep = C.estimate_rv_index(f, location, deep=True)
                ok = rep.verdict == "regular" and abs(rep.index - p) <= 0.05
                checks.append((ok, f"p={p}, {kind} at {location}: {rep.verdict} {rep.index}"))
    f = build_example("oscillating_exponent", p=2.0, a=0.5)
    checks += [(C.estimate_rv_index(f).verdict == "inconclusive", "oscillating exponent: regular variation"),
               (C.controlled_variation_inf(f).verdict == "positive", "oscillating exponent: controlled variation")]
    g = build_example("two_branch", m=2.0, q=9.0, n=3)
    p_B = 15 / 4
    grid = 1 + (p_B - 1) * (np.arange(64) + 0.5) / 64
    s = np.logspace(-3, 1, 20001)
    checks += [(any(C.quotient_bound_check(g, p).passed for p in grid),
                "transformed-quotient monotonicity holds for no sampled p"),
               (not any(C.monotone_quotient_check(g, p, s).passed for p in grid),
                "f-quotient monotonicity holds for some sampled p")]
    _verdict(9, checks)


def _artifacts(root):
    found = {}
    for dirpath, _, names in os.walk(root):
        for name in names:
            if name.endswith((".json", ".csv")):
                path = os.path.join(dirpath, name)
                with open(path, "rb") as fh:
                    found[os.path.relpath(path, root)] = fh.read()
    return found


def test_criterion_10_cli_determinism(tmp_path, capsys):
    sim = tmp_path / "sim"
    experiments = {
        "classify": ["classify", "--f", "pow(s,2)*log(2+s)"],
        "classify-hyp": ["classify", "--catalog", "oscillating_exponent", "--catalog-params",
                         "{'p': 2.0, 'a': 0.5}", "--check", "hypotheses"],
        "blowup": ["blowup", "--f", "pow(s,2)"],
        "shoot": ["shoot", "--f", "pow(s,3)"],
        "simulate": ["simulate", "--f", "pow(s,2)*log(2+s)", "--grid", "64"],
        "verify-singular": ["verify-estimate", "--source", "singular"],
        "verify-snapshots": ["verify-estimate", "--input", str(sim / "1" / "snapshots"),
                             "--f", "pow(s,2)*log(2+s)"],
        "doubling": ["doubling-demo", "--instances", "50"],
        "sweep": ["sweep", "--family", "pow(s,3)*pow(log(1+s),a)", "--iters", "3"],
        "report": ["report", "--input", str(sim / "1")],
    }
    checks = []
    for name, argv in experiments.items():
        root = sim if name == "simulate" else tmp_path / name
        codes = [cli.main(argv + ["--out", str(root / k)]) for k in ("1", "2")]
        capsys.readouterr()
        a, b = _artifacts(root / "1"), _artifacts(root / "2")
        checks += [(codes == [0, 0], f"{name}: exit codes {codes}"),
                   (bool(a) and a == b, f"{name}: artifacts differ between reruns")]
    _verdict(10, checks)
