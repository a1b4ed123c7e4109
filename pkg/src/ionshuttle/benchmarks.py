"""Benchmark circuits, ordering sweeps, circuit-fit analysis and the
exhaustive placement oracle.

The cost of a compiled circuit is its split/merge count.  The circuit fit
C = cost / two-qubit-gate count measures mean cost per gate; for circuits
where one ion interacts with a run of others (the all-pairs structure) it
approaches the limit L = 6/K for K ions per crystal, so L = 3 here.
"""
from __future__ import annotations

import itertools
import math
import random
import statistics
from dataclasses import dataclass, field

from .commands import cost as sequence_cost
from .commands import replay
from .ordering import (Ordering, increase_pairwise_order, order_as_is,
                       order_inputs_randomly, place_in_the_model)
from .qasm import Circuit, build_circuit, decompose_gate, Gate
from .scheduler import ScheduleResult, schedule
from .trap import TrapConfig, TrapState


class InvalidShape(Exception):
    pass


class TooLarge(Exception):
    pass


ORACLE_MAX_QUBITS = 8


# -- circuit generators --------------------------------------------------------


def gen_random_circuit(n: int, n_gates: int, seed: int) -> Circuit:
    """Two-qubit gates on uniformly random ordered pairs of distinct qubits."""
    if n < 2:
        raise ValueError("random circuits need at least 2 qubits")
    rng = random.Random(seed)
    specs = []
    for _ in range(n_gates):
        a, b = rng.sample(range(n), 2)
        specs.append(("cz", (a, b), ()))
    return build_circuit(n, specs)


def gen_qft(n: int) -> Circuit:
    """All-pairs interaction circuit in block order: qubit 0 with 1..n-1,
    then 1 with 2..n-1, and so on (n(n-1)/2 two-qubit gates, no 1-qubit
    gates: they never move an ion and would dilute the fit)."""
    if n < 2:
        raise ValueError("need at least 2 qubits")
    specs = []
    for i in range(n - 1):
        for j in range(i + 1, n):
            specs.append(("cp", (i, j), (math.pi / 2 ** (j - i),)))
    return build_circuit(n, specs)


def gen_toffoli(n: int) -> Circuit:
    """Generalized Toffoli ladder on n = c controls + (c-1) ancillas + 1
    target, with every doubly-controlled step expanded to two-qubit gates."""
    if n < 4 or n % 2:
        raise InvalidShape(
            f"{n} qubits do not split into c controls, c-1 ancillas and a target")
    c = n // 2
    ctrl = list(range(c))
    anc = list(range(c, 2 * c - 1))
    target = n - 1
    steps = [("ccx", (ctrl[0], ctrl[1], anc[0]))]
    for i in range(2, c):
        steps.append(("ccx", (ctrl[i], anc[i - 2], anc[i - 1])))
    steps.append(("cx", (anc[c - 2], target)))
    steps.extend(reversed(steps[:-1]))
    specs = []
    for kind, qubits in steps:
        if kind == "ccx":
            for g in decompose_gate(Gate(0, "ccx", qubits)):
                specs.append((g.kind, g.operands, g.params))
        else:
            specs.append((kind, qubits, ()))
    return build_circuit(n, specs)


# -- compilation helpers ---------------------------------------------------------


def bench_config(n: int) -> TrapConfig:
    """Default trap for small registers; a proportionally larger trap once
    the packed register plus transport slack no longer fits 32 segments."""
    if n <= 8:
        return TrapConfig()
    return TrapConfig(n_segments=4 * n, liz=2 * n)


def make_ordering(circuit: Circuit, method: str, seed: int | None = None) -> Ordering:
    if method == "oai":
        return order_as_is(circuit)
    if method == "oir":
        if seed is None:
            raise ValueError("oir needs a seed")
        return order_inputs_randomly(circuit, seed)
    if method == "ipo":
        return increase_pairwise_order(circuit)
    raise ValueError(f"unknown ordering method {method!r}")


def compile_ordering(circuit: Circuit, ordering: Ordering,
                     config: TrapConfig | None = None,
                     verify: bool = False) -> ScheduleResult:
    """Place an ordering and schedule the circuit; with ``verify`` the
    emitted sequence is replayed against a fresh trap and must be clean."""
    cfg = config or bench_config(circuit.n_qubits)
    state = TrapState(cfg)
    place_in_the_model(state, ordering, circuit)
    result = schedule(circuit, state)
    if verify:
        report = replay(result.sequence, cfg)
        if report.violations:
            raise RuntimeError(f"replay violations: {report.violations[:3]}")
        if report.s_count + report.m_count != result.cost:
            raise RuntimeError("replay cost disagrees with scheduler cost")
    return result


# -- circuit fit -----------------------------------------------------------------


def circuit_fit(cost: int, n_gates: int) -> float:
    """Mean split/merge cost per two-qubit gate."""
    return cost / n_gates


def theoretical_limit(k: int) -> float:
    """Asymptotic fit limit 6/K for K ions per crystal (3 when K = 2)."""
    if k < 1:
        raise ValueError("crystal size must be at least 1")
    return 6 / k


@dataclass(frozen=True)
class FitReport:
    n_qubits: int
    total_cost: int
    n_two_qubit_gates: int
    circuit_fit: float
    theoretical_limit: float


def qft_fit(n: int, method: str = "oai", seed: int | None = None,
            config: TrapConfig | None = None, verify: bool = True) -> FitReport:
    """Compile the all-pairs circuit and report its fit."""
    circuit = gen_qft(n)
    result = compile_ordering(circuit, make_ordering(circuit, method, seed),
                              config, verify=verify)
    n2q = len(circuit.two_qubit_gates())
    return FitReport(n, result.cost, n2q, circuit_fit(result.cost, n2q),
                     theoretical_limit(TrapConfig().max_ions_per_crystal))


# -- sweeps ----------------------------------------------------------------------


@dataclass(frozen=True)
class CompileRecord:
    suite: str
    n: int
    method: str
    trial: int
    seed: int | None
    cost: int
    gates: int
    fit: float


@dataclass(frozen=True)
class SweepRow:
    suite: str
    n: int
    method: str
    trials: int
    seed: int
    min_cost: int
    mean_cost: float
    max_cost: int


@dataclass
class SweepReport:
    rows: list[SweepRow] = field(default_factory=list)
    records: list[CompileRecord] = field(default_factory=list)

    def to_csv(self) -> str:
        lines = ["suite,n,method,trial,seed,cost,gates,fit"]
        for r in self.records:
            seed = "" if r.seed is None else str(r.seed)
            lines.append(f"{r.suite},{r.n},{r.method},{r.trial},{seed},"
                         f"{r.cost},{r.gates},{r.fit:.6f}")
        return "\n".join(lines) + "\n"


def _suite_circuit(suite: str, n: int, n_gates: int, seed: int) -> Circuit:
    if suite == "random":
        return gen_random_circuit(n, n_gates, seed + 7919 * n)
    if suite == "qft":
        return gen_qft(n)
    if suite == "toffoli":
        return gen_toffoli(n)
    raise ValueError(f"unknown suite {suite!r}")


_WORKER_JOB: tuple[Circuit, TrapConfig, bool] | None = None


def _sweep_init(circuit: Circuit, cfg: TrapConfig, verify: bool) -> None:
    global _WORKER_JOB
    _WORKER_JOB = (circuit, cfg, verify)


def _sweep_trial(trial_seed: int) -> int:
    circuit, cfg, verify = _WORKER_JOB
    return compile_ordering(circuit, order_inputs_randomly(circuit, trial_seed),
                            cfg, verify=verify).cost


def oir_costs(circuit: Circuit, seeds, config: TrapConfig | None = None,
              verify: bool = True, workers: int = 1) -> list[int]:
    """Compile one randomized layout per seed; independent trials fan out
    over ``workers`` processes (results stay in seed order)."""
    cfg = config or bench_config(circuit.n_qubits)
    seeds = list(seeds)
    if workers > 1 and len(seeds) > 1:
        import multiprocessing

        ctx = multiprocessing.get_context("fork")
        with ctx.Pool(workers, initializer=_sweep_init,
                      initargs=(circuit, cfg, verify)) as pool:
            return pool.map(_sweep_trial, seeds,
                            chunksize=max(1, len(seeds) // (4 * workers)))
    return [compile_ordering(circuit, order_inputs_randomly(circuit, s), cfg,
                             verify=verify).cost for s in seeds]


def run_sweep(suite: str, n_list, method_list=("oai", "oir", "ipo"),
              trials: int = 1, seed: int = 0, n_gates: int = 1000,
              config: TrapConfig | None = None, verify: bool = True,
              workers: int = 1) -> SweepReport:
    """Compile each suite circuit under each ordering method.

    Deterministic methods run once; the randomized one runs ``trials`` times
    with seeds derived from the master seed by counter.  Trials are
    independent (each compile owns its trap), so ``workers`` > 1 fans them
    out over processes; records stay keyed by trial index, keeping the
    report identical to a serial run.
    """
    report = SweepReport()
    for n in n_list:
        circuit = _suite_circuit(suite, n, n_gates, seed)
        cfg = config or bench_config(n)
        n2q = len(circuit.two_qubit_gates())
        for method in method_list:
            if method == "oir":
                runs: list[tuple[int, int | None]] = [(t, seed + t) for t in range(trials)]
                costs = oir_costs(circuit, [ts for _, ts in runs], cfg,
                                  verify=verify, workers=workers)
            else:
                runs = [(0, None)]
                costs = [compile_ordering(circuit, make_ordering(circuit, method),
                                          cfg, verify=verify).cost]
            for (trial, trial_seed), c in zip(runs, costs):
                report.records.append(CompileRecord(
                    suite, n, method, trial, trial_seed, c, n2q,
                    circuit_fit(c, n2q)))
            report.rows.append(SweepRow(
                suite, n, method, len(costs), seed,
                min(costs), statistics.fmean(costs), max(costs)))
    return report


# -- exhaustive placement oracle ----------------------------------------------


def _pairwise_layout(perm: tuple[int, ...]) -> Ordering:
    groups = tuple(perm[i:i + 2] for i in range(0, len(perm), 2))
    return Ordering(groups, "oracle")


def enumerate_orderings(n: int):
    """One representative per reversal class (n!/2 classes for n >= 2), in
    lexicographic order of the flat permutation, paired left to right."""
    for perm in itertools.permutations(range(1, n + 1)):
        if perm <= perm[::-1]:
            yield _pairwise_layout(perm)


def ordering_cost(circuit: Circuit, ordering: Ordering,
                  config: TrapConfig | None = None, verify: bool = False) -> int:
    return compile_ordering(circuit, ordering, config, verify=verify).cost


def brute_force_best_ordering(circuit: Circuit,
                              config: TrapConfig | None = None,
                              verify: bool = False) -> tuple[Ordering, int]:
    """Schedule every reversal class and return the cheapest layout.

    Mirroring a layout end to end (groups and intra-group order reversed)
    never changes the cost, so classes pair each permutation with its
    reverse.  For an odd register the two members chunk to layouts with the
    lone ion paired differently, which do differ in cost, so both
    representatives are scheduled; for an even register the second member's
    layout is exactly the mirror and one schedule suffices.  Ties keep the
    first hit in enumeration order.
    """
    n = circuit.n_qubits
    if n > ORACLE_MAX_QUBITS:
        raise TooLarge(
            f"exhaustive search capped at {ORACLE_MAX_QUBITS} qubits")
    best: tuple[Ordering, int] | None = None
    for perm in itertools.permutations(range(1, n + 1)):
        if perm > perm[::-1]:
            continue
        reps = (perm,) if n % 2 == 0 else (perm, perm[::-1])
        for rep in reps:
            ordering = _pairwise_layout(rep)
            c = ordering_cost(circuit, ordering, config, verify=verify)
            if best is None or c < best[1]:
                best = (ordering, c)
    assert best is not None
    return best
