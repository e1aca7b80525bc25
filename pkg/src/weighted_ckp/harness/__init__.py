"""Seeded instances, the inequality check registry, suite runner and search."""

from .checks import REGISTRY, Check, Context, covered
from .generate import PROFILES, generate
from .instance import Instance, dump_instance, instance_from_dict, load_instance
from .suite import SearchConfig, SuiteConfig, replay, run_suite, search_counterexamples

__all__ = [
    "REGISTRY", "Check", "Context", "covered", "PROFILES", "generate", "Instance", "dump_instance",
    "instance_from_dict", "load_instance", "SearchConfig", "SuiteConfig", "replay", "run_suite",
    "search_counterexamples",
]
