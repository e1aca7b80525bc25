"""Run the check registry over seeded instances, and hunt for tight instances."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import shortest_path

from ..errors import CKPError, ConfigError
from ..report import BUG_SUSPECTED, FAIL, PASS, VACUOUS, CheckReport
from .checks import REGISTRY, Context
from .generate import DEFAULT_ALPHAS, DEFAULT_PS, PROFILES, generate
from .instance import Instance, instance_from_dict


@dataclass(frozen=True)
class SuiteConfig:
    """Seeds, sizes and grids for a suite run.

    Seed ``s`` uses profile ``profiles[s % len(profiles)]`` and
    ``n = n_min + (s // len(profiles)) % (n_max - n_min + 1)``, so consecutive
    seeds sweep profiles and sizes. ``checks=None`` selects every registered
    check; an explicit empty allowlist is a configuration error.
    """

    seeds: tuple[int, ...] = tuple(range(100))
    n_min: int = 1
    n_max: int = 12
    alphas: tuple[float, ...] = DEFAULT_ALPHAS
    ps: tuple[float, ...] = DEFAULT_PS
    checks: tuple[str, ...] | None = None
    profiles: tuple[str, ...] = PROFILES
    tolerance_scale: float = 1.0
    workers: int = 1

    def validate(self) -> tuple[str, ...]:
        if self.checks is not None and len(self.checks) == 0:
            raise ConfigError("check allowlist is empty")
        ids = tuple(self.checks) if self.checks is not None else tuple(REGISTRY)
        unknown = [c for c in ids if c not in REGISTRY]
        if unknown:
            raise ConfigError(f"unknown check ids: {', '.join(unknown)}")
        if not self.seeds:
            raise ConfigError("seed range is empty")
        if not 1 <= self.n_min <= self.n_max:
            raise ConfigError(f"bad n range [{self.n_min}, {self.n_max}]")
        if not self.alphas or not self.ps or not self.profiles:
            raise ConfigError("alpha grid, p grid and profile list must be nonempty")
        if not self.tolerance_scale > 0:
            raise ConfigError("tolerance scale must be positive")
        return ids

    def instance(self, seed: int) -> Instance:
        profile = self.profiles[seed % len(self.profiles)]
        span = self.n_max - self.n_min + 1
        n = self.n_min + (seed // len(self.profiles)) % span
        return generate(seed, n, profile, self.alphas, self.ps)


def evaluate_instance(inst: Instance, check_ids, tolerance_scale: float = 1.0) -> list[CheckReport]:
    """Every applicable check on one instance; fail reports embed the instance."""
    ctx = Context(inst)
    reports = []
    for cid in check_ids:
        check = REGISTRY[cid]
        if not check.applies_to(inst):
            continue
        report = check.run(inst, tolerance_scale, ctx)
        if report.failed:
            report.instance = inst.to_dict()
        reports.append(report)
    return reports


def _seed_job(args) -> list[CheckReport]:
    config, ids, seed = args
    return evaluate_instance(config.instance(seed), ids, config.tolerance_scale)


def sort_reports(reports: list[CheckReport]) -> list[CheckReport]:
    return sorted(reports, key=lambda r: (r.check_id, -1 if r.seed is None else r.seed, r.instance_digest))


def run_suite(config: SuiteConfig) -> list[CheckReport]:
    """One report per (applicable check, instance), sorted by check id then seed."""
    ids = config.validate()
    jobs = [(config, ids, int(s)) for s in config.seeds]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            chunks = list(pool.map(_seed_job, jobs, chunksize=8))
    else:
        chunks = [_seed_job(job) for job in jobs]
    return sort_reports([r for chunk in chunks for r in chunk])


def replay(report: CheckReport, tolerance_scale: float = 1.0) -> CheckReport:
    """Re-run a report's check on its embedded instance."""
    if report.instance is None:
        raise ConfigError("report carries no instance to replay")
    inst = instance_from_dict(report.instance, seed=report.seed)
    return REGISTRY[report.check_id].run(inst, tolerance_scale)


def summarize(reports: list[CheckReport]) -> dict[str, int]:
    counts = {PASS: 0, FAIL: 0, VACUOUS: 0, BUG_SUSPECTED: 0}
    for r in reports:
        counts[r.status] = counts.get(r.status, 0) + 1
    return counts


# --- adversarial search ----------------------------------------------------------------


@dataclass(frozen=True)
class SearchConfig:
    """Hill-climbing search for the smallest margin of one check.

    Each start seed generates an instance (profile/size as in the suite, or
    fixed by ``n``/``profile``); ``steps`` random perturbations are proposed
    and kept whenever they lower the relative margin.
    """

    check: str
    seeds: tuple[int, ...] = tuple(range(4))
    steps: int = 200
    n: int | None = None
    profile: str | None = None
    alphas: tuple[float, ...] = DEFAULT_ALPHAS
    ps: tuple[float, ...] = DEFAULT_PS
    tolerance_scale: float = 1.0
    step_size: float = 0.3
    rng_seed: int = 0

    def validate(self) -> None:
        if self.check not in REGISTRY:
            raise ConfigError(f"unknown check id {self.check!r}")
        if not self.seeds:
            raise ConfigError("no start seeds")
        if self.steps < 0:
            raise ConfigError("steps must be >= 0")
        if self.n is not None and self.n < 1:
            raise ConfigError("n must be >= 1")
        if self.profile is not None and self.profile not in PROFILES:
            raise ConfigError(f"unknown profile {self.profile!r}")

    def start(self, seed: int) -> Instance:
        check = REGISTRY[self.check]
        profiles = (self.profile,) if self.profile else (
            ("euclidean",) if "metric" in check.needs else PROFILES)
        profile = profiles[seed % len(profiles)]
        n = self.n if self.n is not None else 1 + (seed // len(profiles)) % 8
        return generate(seed, n, profile, self.alphas, self.ps)


def relative_margin(report: CheckReport) -> float:
    if report.status == VACUOUS or math.isnan(report.margin):
        return math.inf
    scale = max(abs(report.lhs), abs(report.rhs))
    if scale == 0.0:
        return math.inf  # 0 <= 0 says nothing about tightness
    return report.margin / scale if math.isfinite(report.margin) else report.margin


def _perturb(inst: Instance, rng: np.random.Generator, size: float) -> Instance | None:
    d = inst.to_dict()
    n = inst.n

    def jitter(key, positive=False):
        a = np.asarray(d[key], dtype=float)
        if positive:
            return a * np.exp(size * rng.normal(size=a.shape))
        return a + size * (np.abs(a).mean() + 1e-3) * rng.normal(size=a.shape)

    mu = jitter("mu", positive=True)
    mu /= mu.sum()
    nu = np.asarray(d["f"]) * np.asarray(d["mu"]) * np.exp(size * rng.normal(size=n))
    # occasionally kill or revive an atom of nu
    if n > 1 and rng.random() < 0.2:
        k = int(rng.integers(n))
        nu[k] = 0.0 if nu[k] > 0 else rng.exponential() * nu.mean()
    if nu.sum() <= 0:
        return None
    nu = nu / nu.sum()
    d["mu"] = mu
    d["f"] = nu / mu
    for key in ("g", "u"):
        if key in d:
            d[key] = jitter(key)
    if "u" in d:
        d["u"] = np.asarray(d["u"]) - float(np.sum(mu * np.asarray(d["u"])))
    if "w" in d:
        d["w"] = np.abs(jitter("w", positive=True))
    if "dist" in d:
        dist = np.asarray(d["dist"], dtype=float) * np.exp(size * rng.normal(size=(n, n)))
        dist = 0.5 * (dist + dist.T)
        np.fill_diagonal(dist, 0.0)
        dist = shortest_path(dist, method="FW", directed=False)
        d["dist"] = 0.5 * (dist + dist.T)
    try:
        return instance_from_dict(d, seed=inst.seed)
    except CKPError:
        return None


def search_counterexamples(config: SearchConfig) -> list[CheckReport]:
    """Smallest-margin instance found for one check, as a single report.

    A proved inequality is never reported as failed: a margin below
    ``-tolerance`` is marked ``bug_suspected`` (it indicates an implementation
    error, not a counterexample). The report always embeds its instance.
    """
    config.validate()
    check = REGISTRY[config.check]
    rng = np.random.default_rng(config.rng_seed)
    best: tuple[float, CheckReport, Instance] | None = None
    for seed in config.seeds:
        inst = config.start(int(seed))
        if not check.applies_to(inst):
            continue
        report = check.run(inst, config.tolerance_scale)
        score = relative_margin(report)
        size = config.step_size
        for _ in range(config.steps):
            cand = _perturb(inst, rng, size)
            if cand is None:
                continue
            cand_report = check.run(cand, config.tolerance_scale)
            cand_score = relative_margin(cand_report)
            if cand_score < score:
                inst, report, score = cand, cand_report, cand_score
            else:
                size = max(size * 0.97, 1e-4)
        if best is None or (score, report.margin) < (best[0], best[1].margin):
            best = (score, report, inst)
    if best is None:
        raise ConfigError(f"check {config.check!r} does not apply to any generated start instance")
    _, report, inst = best
    if report.status == FAIL:
        report.status = BUG_SUSPECTED
    report.instance = inst.to_dict()
    return [report]
