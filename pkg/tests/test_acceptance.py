"""Acceptance criteria, one test per criterion.

Each test prints a single ``[PASS]``/``[FAIL]`` line with the measured
quantity next to its pinned tolerance, then asserts it.
"""

from __future__ import annotations

import collections
import filecmp
import math
import subprocess
import sys
import time

import numpy as np
import pytest
from oracles import dual_basis_enumeration, elimination_transport

from weighted_ckp import (MetricSpace, dominated, estimate_best_k, extremizer, k_p, lp_norm, make_space,
                          maximize_r, necessary_conditions, pearson_vajda, r_functional, solve_c,
                          theoretical_interval, total_variation, tsallis, wasserstein)
from weighted_ckp.constants import kp_objective
from weighted_ckp.harness import REGISTRY, generate, instance_from_dict
from weighted_ckp.harness.suite import SuiteConfig, evaluate_instance, run_suite
from weighted_ckp.transport import solve_transport

ALPHAS = (1.2, 1.5, 2.0, 3.0, 6.0)
ORACLE_SIGN_TOL = 1e-6
EXTREMIZER_TOL = 1e-6
NORMALIZATION_TOL = 1e-9
INTERVAL_TOL = 1e-8
ALPHA2_TOL = 1e-4
CONSTANT_C_TOL = 1e-10
TWO_POINT_W_TOL = 1e-10
CHI_T_TOL = 1e-12
PINSKER_TOL = 1e-6
TRANSPORT_TOL = 1e-8
SLACKNESS_TOL = 1e-9
KP_TOL = 1e-10

# sum mu f log f for f = (3/2, 1/2) on two equal atoms, from a 30-digit mpmath evaluation
KL_THREE_HALVES = 0.130812035941137


@pytest.fixture
def line(capsys):
    def emit(number: int, ok: bool, text: str) -> None:
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number}: {text}")

    return emit


@pytest.fixture(scope="module")
def instances():
    """500 seeded instances: n <= 12, alpha from the grid, every generator profile."""
    cfg = SuiteConfig(seeds=tuple(range(500)), n_max=12, alphas=ALPHAS)
    return [cfg.instance(s) for s in cfg.seeds]


def test_domination_agrees_with_oracle(instances, line):
    start = time.perf_counter()
    disagreements = []
    for inst in instances:
        cert = dominated(inst.space, inst.g, inst.order)
        _, best = maximize_r(inst.space, inst.g, inst.order)
        if (cert.dominated and best > ORACLE_SIGN_TOL) or (not cert.dominated and best < -ORACLE_SIGN_TOL):
            disagreements.append(inst.seed)
    elapsed = time.perf_counter() - start
    ok = not disagreements and elapsed < 60.0
    line(1, ok, f"domination decision vs oracle sign on {len(instances)} instances: "
                f"{len(disagreements)} disagreements (oracle tol {ORACLE_SIGN_TOL:g}), {elapsed:.1f} s (< 60 s)")
    assert not disagreements, disagreements
    assert elapsed < 60.0


def test_extremizer_is_optimal(instances, line):
    worst_gap = worst_mass = 0.0
    for inst in instances:
        f = extremizer(inst.space, inst.g, inst.order)
        _, best = maximize_r(inst.space, inst.g, inst.order)
        worst_gap = max(worst_gap, abs(r_functional(inst.space, inst.g, inst.order, f) - best))
        worst_mass = max(worst_mass, abs(inst.space.integrate(f) - 1.0))
    ok = worst_gap <= EXTREMIZER_TOL and worst_mass <= NORMALIZATION_TOL
    line(2, ok, f"max |R(extremizer) - oracle| = {worst_gap:.2e} (<= {EXTREMIZER_TOL:g}), "
                f"max normalization error = {worst_mass:.2e} (<= {NORMALIZATION_TOL:g})")
    assert worst_gap <= EXTREMIZER_TOL
    assert worst_mass <= NORMALIZATION_TOL


def test_best_k_interval_containment(line):
    outside, worst_alpha2, count = [], 0.0, 0
    seed = 0
    while count < 300:
        inst = SuiteConfig(alphas=ALPHAS).instance(seed)
        seed += 1
        u = np.asarray(inst.u)
        if np.max(np.abs(u)) == 0.0:
            continue  # one-atom spaces: the centered function vanishes
        count += 1
        lower, upper = theoretical_interval(inst.space, u, inst.order)
        k = estimate_best_k(inst.space, u, inst.order)
        if not lower - INTERVAL_TOL <= k <= upper + INTERVAL_TOL:
            outside.append((inst.seed, lower, k, upper))
        if inst.alpha == 2.0:
            worst_alpha2 = max(worst_alpha2, abs(k - lp_norm(inst.space, u, 2.0)))
    ok = not outside and worst_alpha2 <= ALPHA2_TOL
    line(3, ok, f"estimate outside [lower, upper] +- {INTERVAL_TOL:g} on {len(outside)} of {count} centered "
                f"instances; alpha = 2 max |K_est - ||u||_2| = {worst_alpha2:.2e} (<= {ALPHA2_TOL:g})")
    assert not outside, outside
    assert worst_alpha2 <= ALPHA2_TOL


def test_inequality_suite_is_green(line):
    # every check on seeds 0..499; checks that need a metric only see the
    # euclidean profile (every fourth seed), so they continue along the same
    # seed stream until they too have 500 instances
    base = SuiteConfig(seeds=tuple(range(500)))
    reports = run_suite(base)
    metric_ids = tuple(cid for cid, check in REGISTRY.items() if "metric" in check.needs)
    extra_seeds = tuple(s for s in range(500, 2000) if base.instance(s).has("metric"))
    reports += run_suite(SuiteConfig(seeds=extra_seeds, checks=metric_ids))
    counts = collections.Counter(r.check_id for r in reports)
    failures = collections.Counter(r.check_id for r in reports if r.failed)
    short = {cid: counts[cid] for cid in REGISTRY if counts[cid] < 500}

    witness = instance_from_dict({"mu": [0.5, 0.5], "f": [1.5, 0.5], "g": [1.0, -1.0], "alpha": 2.0})
    nec = necessary_conditions(witness.space, witness.g, witness.order)
    witness_ok = nec.cond_82_ok and not dominated(witness.space, witness.g, witness.order).dominated
    witness_reports = evaluate_instance(witness, list(REGISTRY))
    witness_ok = witness_ok and not any(r.failed for r in witness_reports)

    ok = not failures and not short and witness_ok
    detail = ", ".join(f"{cid} x{n}" for cid, n in sorted(failures.items())) or "none"
    line(4, ok, f"{len(REGISTRY)} checks, {len(reports)} reports, >= 500 instances per check: {not short}; "
                f"failing checks: {detail}; g = (1, -1) witness (necessary condition holds, "
                f"not dominated): {witness_ok}")
    assert not short, short
    assert witness_ok
    assert not failures, {cid: [r.seed for r in reports if r.check_id == cid and r.failed] for cid in failures}


def test_closed_form_regressions(line):
    rng = np.random.default_rng(5)
    worst_c = 0.0
    for alpha in ALPHAS:
        for n in (1, 2, 5, 12):
            space = make_space(rng.dirichlet(np.ones(n)))
            g0 = float(rng.normal() * 3)
            beta = alpha / (alpha - 1.0)
            worst_c = max(worst_c, abs(solve_c(space, np.full(n, g0), alpha) - (g0 - beta)))

    worst_w = 0.0
    for moved in (0.1, 0.25, 0.4, 0.5):
        for d in (0.5, 1.0, 3.0):
            ms = MetricSpace(make_space([0.5, 0.5]), np.array([[0.0, d], [d, 0.0]]))
            f = [1.0 + 2 * moved, 1.0 - 2 * moved]
            for p in (1.0, 1.5, 2.0, 3.0):
                worst_w = max(worst_w, abs(wasserstein(ms, f, p)[0] - moved ** (1 / p) * d))

    worst_chi = 0.0
    for _ in range(200):
        n = int(rng.integers(1, 13))
        space = make_space(rng.dirichlet(np.ones(n)))
        f = rng.dirichlet(np.ones(n)) / space.weights
        worst_chi = max(worst_chi, abs(pearson_vajda(space, f, 2.0) - tsallis(space, f, 2.0)))

    uniform = make_space([0.5, 0.5])
    lhs = total_variation(uniform, [1.5, 0.5])
    rhs = math.sqrt(2.0 * KL_THREE_HALVES)
    reports = evaluate_instance(instance_from_dict({"mu": [0.5, 0.5], "f": [1.5, 0.5], "alpha": 2.0}), ["pinsker"])
    pinsker_err = max(abs(reports[0].lhs - 0.5), abs(reports[0].rhs - rhs))

    ok = (worst_c <= CONSTANT_C_TOL and worst_w <= TWO_POINT_W_TOL and worst_chi <= CHI_T_TOL
          and pinsker_err <= PINSKER_TOL and lhs <= rhs)
    line(5, ok, f"constant g: max |c - (g0 - beta)| = {worst_c:.1e} (<= {CONSTANT_C_TOL:g}); "
                f"two-point W_p max err = {worst_w:.1e} (<= {TWO_POINT_W_TOL:g}); "
                f"max |chi_2 - T_2| = {worst_chi:.1e} (<= {CHI_T_TOL:g}); Pinsker lhs {reports[0].lhs:.7f} "
                f"vs rhs {reports[0].rhs:.7f}, err vs oracle sqrt(2 * {KL_THREE_HALVES}) = {pinsker_err:.1e} "
                f"(<= {PINSKER_TOL:g}); the rounded value 0.1308023 has a digit slip "
                f"(sqrt(2 * 0.1308023) = {math.sqrt(2 * 0.1308023):.7f})")
    assert worst_c <= CONSTANT_C_TOL
    assert worst_w <= TWO_POINT_W_TOL
    assert worst_chi <= CHI_T_TOL
    assert pinsker_err <= PINSKER_TOL and lhs <= rhs


def test_transport_is_exact(line):
    rng = np.random.default_rng(6)
    worst_enum = worst_elim = 0.0
    cases = 0
    for n in range(1, 8):
        for trial in range(12):
            a = rng.dirichlet(np.ones(n))
            b = rng.dirichlet(np.ones(n))
            if trial % 2:
                pts = rng.random((n, 2))
                C = np.linalg.norm(pts[:, None] - pts[None], axis=2) ** rng.choice([1.0, 2.0, 3.0])
            else:
                C = rng.random((n, n)) * 4
            value = solve_transport(a, b, C).cost
            worst_enum = max(worst_enum, abs(value - dual_basis_enumeration(a, b, C)[0]))
            if n <= 4:
                worst_elim = max(worst_elim, abs(value - elimination_transport(a, b, C)))
            cases += 1

    worst_slack = 0.0
    for n in (10, 50, 200):
        space = make_space(rng.dirichlet(np.ones(n)))
        pts = rng.random((n, 2))
        ms = MetricSpace(space, np.linalg.norm(pts[:, None] - pts[None], axis=2))
        f = rng.dirichlet(np.ones(n)) / space.weights
        for p in (1.0, 2.0):
            _, plan = wasserstein(ms, f, p)
            worst_slack = max(worst_slack, plan.slackness_violation(ms.dist**p),
                              abs(plan.dual_value(space.weights, space.weights * f) - plan.cost))

    ok = worst_enum <= TRANSPORT_TOL and worst_elim <= TRANSPORT_TOL and worst_slack <= SLACKNESS_TOL
    line(6, ok, f"{cases} instances n <= 7: max |LP - exhaustive basis search| = {worst_enum:.1e}, "
                f"max |LP - vertex elimination (n <= 4)| = {worst_elim:.1e} (<= {TRANSPORT_TOL:g}); "
                f"slackness and duality gap up to n = 200: {worst_slack:.1e} (<= {SLACKNESS_TOL:g})")
    assert worst_enum <= TRANSPORT_TOL
    assert worst_elim <= TRANSPORT_TOL
    assert worst_slack <= SLACKNESS_TOL


def test_kp_matches_grid(line):
    rng = np.random.default_rng(7)
    worst, above_norm = 0.0, 0
    for _ in range(200):
        n = int(rng.integers(2, 13))
        space = make_space(rng.dirichlet(np.ones(n)))
        u = rng.normal(size=n) * rng.choice([0.1, 1.0, 5.0])
        u -= space.integrate(u)
        p = float(rng.choice([2.0, 2.5, 3.0, 4.0, 6.0]))
        a = np.abs(u)
        # 10^4 dense points plus the atom values themselves
        rs = np.concatenate([np.linspace(a.max() * 1e-4, a.max(), 10_000), a[a > 0]])
        grid = max(kp_objective(space, u, p, r) for r in rs) ** (1.0 / (2.0 * p - 2.0))
        value = k_p(space, u, p)
        worst = max(worst, abs(value - grid) / max(grid, 1e-300))
        if value > lp_norm(space, u, 2.0 * p - 2.0) * (1 + 1e-12):
            above_norm += 1
    ok = worst <= KP_TOL and above_norm == 0
    line(7, ok, f"200 instances: max relative |K_p - grid| = {worst:.1e} (<= {KP_TOL:g}); "
                f"K_p > ||u||_(2p-2) in {above_norm} cases")
    assert worst <= KP_TOL
    assert above_norm == 0


def test_suite_output_is_deterministic(tmp_path, line):
    outputs = []
    for k in range(2):
        target = tmp_path / f"report{k}.json"
        proc = subprocess.run([sys.executable, "-m", "weighted_ckp.cli", "suite", "--seeds", "0..99",
                               "--out", str(target), "--quiet"], capture_output=True, text=True)
        assert proc.returncode in (0, 1), proc.stderr
        outputs.append(target)
    same = filecmp.cmp(outputs[0], outputs[1], shallow=False)
    line(8, same, f"two runs of 'suite --seeds 0..99' byte-identical: {same} "
                  f"({outputs[0].stat().st_size} bytes)")
    assert same


def test_generator_contract_for_criteria():
    # the acceptance instances really span n <= 12 and the whole alpha grid
    cfg = SuiteConfig(seeds=tuple(range(500)), alphas=ALPHAS)
    seen = {(cfg.instance(s).n, cfg.instance(s).alpha) for s in range(0, 500, 7)}
    assert max(n for n, _ in seen) <= 12
    assert {a for _, a in seen} == set(ALPHAS)
    assert generate(0, 3).g is not None
