"""Single simulation runs."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from ..model import Configuration, config_to_json, require_valid
from ..potentials import PotentialReport
from ..predicates import HorizonWatch
from ..schedulers import Oracle, make_scheduler
from ..semantics import KeepAlive, make_strategy, step_to_json
from .engine import Engine
from .trace import TraceWriter

CONVERGED, BUDGET, VIOLATION = "converged", "budget_exhausted", "violation"


@dataclass
class RunResult:
    outcome: str
    steps: int
    converged_at: int | None
    kind_counts: dict
    final: PotentialReport
    violations: list = field(default_factory=list)  # (step index, property, evidence)
    horizon: dict | None = None

    @property
    def converged(self) -> bool:
        return self.outcome == CONVERGED

    def summary(self) -> dict:
        return {
            "outcome": self.outcome,
            "steps": self.steps,
            "converged_at": self.converged_at,
            "kind_counts": dict(self.kind_counts),
            "final": self.final.to_json(),
            "violations": [list(v) for v in self.violations[:20]],
            "horizon": self.horizon,
        }


def simulate(
    init: Configuration,
    scheduler="fair",
    strategy="all-min",
    oracle: bool = False,
    budget: int = 10**6,
    seed: int = 0,
    tail: int | None = None,
    trace=None,
    monitors: bool = True,
    horizon: bool = False,
    meta: dict | None = None,
    fixed_steps: int | None = None,
    **sched_opts,
) -> RunResult:
    """Run from ``init`` until first correct (plus ``tail`` steps) or ``budget`` steps.

    ``scheduler`` and ``strategy`` may be names or ready-made objects.
    ``trace`` is a text stream receiving JSONL records.  The budget counts
    steps taken before convergence; the tail defaults to ``10 * n``.
    With ``fixed_steps`` the run takes exactly that many steps (unless a
    monitor fires), whether or not it converges on the way.
    """
    require_valid(init)
    if budget <= 0:
        raise ValueError("budget must be positive")
    if isinstance(strategy, str):
        strategy = make_strategy(strategy, seed, init.universe)
    if isinstance(scheduler, str):
        scheduler = make_scheduler(scheduler, seed, **sched_opts)
    if tail is None:
        tail = 10 * init.n
    eng = Engine(init, strategy)
    scheduler.start(init)
    orc = Oracle() if oracle else None
    watch = HorizonWatch(init.universe, init.nb) if horizon else None
    writer = TraceWriter(trace) if trace is not None else None
    if writer:
        header = {
            "init": config_to_json(init),
            "potentials": eng.report().to_json(),
            "flags": eng.flags(),
            "scheduler": getattr(scheduler, "name", str(scheduler)),
            "select": getattr(strategy, "name", str(strategy)),
            "seed": seed,
            "oracle": oracle,
        }
        header.update(meta or {})
        writer.write({"header": header})

    counts = Counter()
    violations = []
    converged_at = 0 if eng.correct else None
    outcome = None
    i = 0
    while True:
        if fixed_steps is not None:
            if i >= fixed_steps:
                outcome = CONVERGED if converged_at is not None else BUDGET
                break
        elif converged_at is not None:
            if i >= converged_at + tail:
                outcome = CONVERGED
                break
        elif i >= budget:
            outcome = BUDGET
            break
        enabled = eng.enabled()
        if orc is not None:
            enabled = orc.filter(eng, enabled, eng.out)
        s = scheduler.choose(enabled)
        scheduler.observe(s, eng)
        if watch is not None:
            nb_before = frozenset(eng.nb[s.actor])
        psi0 = eng.psi
        bad = eng.apply(s, monitor=monitors)
        if orc is not None:
            if eng.psi > psi0 and not (orc.state.mode == "grant" and isinstance(s, KeepAlive)):
                bad.append(("oracle_psi_increase", f"psi {psi0} -> {eng.psi} on {s}"))
            if orc.state.mode == "suppress" and isinstance(s, KeepAlive):
                bad.append(("oracle_suppress", f"keep-alive {s} let through"))
            decision = orc.decision()
            orc.commit(s)
        if watch is not None:
            watch.observe(i, s, nb_before, eng.nb[s.actor])
        counts[s.kind] += 1
        if writer:
            rec = {
                "i": i,
                "step": step_to_json(s),
                "potentials": eng.report().to_json(),
                "flags": eng.flags(),
                "monitor_violations": [name for name, _ in bad],
            }
            if orc is not None:
                rec["oracle"] = decision
            writer.write(rec)
        for name, ev in bad:
            violations.append((i, name, ev))
        i += 1
        if bad:
            outcome = VIOLATION
            break
        if converged_at is None and eng.correct:
            converged_at = i
    result = RunResult(outcome, i, converged_at, dict(counts), eng.report(), violations)
    if watch is not None:
        result.horizon = watch.report()
        if any(v == "violated" for v in result.horizon.values()):
            result.outcome = VIOLATION
    return result
