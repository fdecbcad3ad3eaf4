"""Convergence census over every small configuration."""
from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from ..generators import enumerate_configs
from ..model import config_to_json
from .simulate import simulate


@dataclass
class CensusReport:
    n: int
    mult_cap: int
    total_cap: int
    seeds: int
    budget: int
    configs: int = 0
    runs: int = 0
    converged: int = 0
    max_steps: int = 0
    total_steps: int = 0
    violation_runs: int = 0
    failures: list = field(default_factory=list)

    @property
    def rate(self) -> float:
        return self.converged / self.runs if self.runs else 1.0

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "caps": {"msg_multiplicity": self.mult_cap, "msg_total": self.total_cap},
            "seeds_per_config": self.seeds,
            "budget": self.budget,
            "configs": self.configs,
            "runs": self.runs,
            "converged": self.converged,
            "rate": self.rate,
            "max_steps": self.max_steps,
            "mean_steps": self.total_steps / self.runs if self.runs else 0.0,
            "violation_runs": self.violation_runs,
            "failures": self.failures,
        }


def _record_failure(report, c, seed, outcome, names, trace_dir, idx):
    entry = {"config": config_to_json(c), "seed": seed, "outcome": outcome, "violations": names}
    if trace_dir is not None:
        os.makedirs(trace_dir, exist_ok=True)
        path = os.path.join(trace_dir, f"census_n{c.n}_cfg{idx}_seed{seed}.jsonl")
        with open(path, "w") as fh:
            simulate(c, seed=seed, budget=report.budget, tail=0, trace=fh, meta={"census_index": idx})
        entry["trace"] = path
    report.failures.append(entry)


def converge_census(
    n: int = 3,
    mult_cap: int = 1,
    total_cap: int = 6,
    seeds: int = 50,
    budget: int = 10**5,
    seed_base: int = 0,
    fast: bool = True,
    trace_dir=None,
    batch: int = 4096,
    limit: int | None = None,
) -> CensusReport:
    """Run ``seeds`` fair, oracle-free simulations from every connected configuration.

    Run ``k`` of a configuration uses seed ``seed_base + k`` and takes the
    same steps as ``simulate(config, seed=seed_base + k, tail=0)``.  With
    ``fast`` the compiled kernel does the work; otherwise the Python engine
    is used.  Non-converged runs are re-simulated with a trace written to
    ``trace_dir``.
    """
    report = CensusReport(n, mult_cap, total_cap, seeds, budget)
    seed_arr = np.arange(seed_base, seed_base + seeds, dtype=np.int64)
    pending = []
    offset = 0

    def flush():
        nonlocal offset
        if not pending:
            return
        if fast:
            from .census_kernel import VIOLATION_NAMES, encode, run_batch

            nbs, msgs, adds = encode(pending, pending[0].universe)
            shape = (len(pending), seeds)
            conv = np.zeros(shape, np.int64)
            viols = np.zeros(shape, np.int64)
            steps = np.zeros(shape, np.int64)
            run_batch(nbs, msgs, adds, n, seed_arr, budget, 1, conv, viols, steps)
            for i, c in enumerate(pending):
                for k in range(seeds):
                    _tally(report, c, int(seed_arr[k]), int(conv[i, k]), int(steps[i, k]),
                           [name for bit, name in VIOLATION_NAMES.items() if viols[i, k] & bit],
                           trace_dir, offset + i)
        else:
            for i, c in enumerate(pending):
                for k in range(seeds):
                    r = simulate(c, seed=int(seed_arr[k]), budget=budget, tail=0)
                    names = sorted({v[1] for v in r.violations})
                    conv = r.converged_at if r.outcome == "converged" else -1
                    _tally(report, c, int(seed_arr[k]), conv, r.steps, names, trace_dir, offset + i)
        offset += len(pending)
        pending.clear()

    for c in enumerate_configs(n, mult_cap, total_cap):
        report.configs += 1
        pending.append(c)
        if len(pending) >= batch:
            flush()
        if limit is not None and report.configs >= limit:
            break
    flush()
    return report


def _tally(report, c, seed, conv, steps, names, trace_dir, idx):
    report.runs += 1
    report.total_steps += steps
    report.max_steps = max(report.max_steps, steps)
    if names:
        report.violation_runs += 1
    if conv >= 0 and not names:
        report.converged += 1
    else:
        outcome = "violation" if names else "budget_exhausted"
        _record_failure(report, c, seed, outcome, names, trace_dir, idx)
