"""Scenario files: a sectioned key-value format for driving computations.

A scenario opens with a header (primes, depth, precision) followed by
named blocks.  Rationals are written "num/den" and balls "a+p^n"; decimal
floats are rejected everywhere.  Blocks may only reference blocks defined
above them.

    prime_p = 2
    prime_s = 3
    depth = 3

    [measure m1]
    kind = haar

    [kernel k1]
    semigroup = true
    step = m1
    times = 0 1 2 3 4 5

    [check c1]
    kind = chapman
    kernel = k1
    t1 = 0
    z = 1
    t2 = 2
"""

from __future__ import annotations

import re
from typing import Dict, List, Optional, Tuple

from .clopen import ClopenSet, DepthSpace, parse_ball
from .errors import PadicProbError, ScenarioParseError
from .markov import (HomogeneousKernel, TransitionKernel, boundedness_criterion,
                     build_cylinder, chapman_check, increment_independence,
                     projection_consistency, psi_factorization_check)
from .measure import Measure, haar, parse_rational
from .poisson import (PoissonMeasureTruncated, idempotence_check,
                      levy_psi, levy_semigroup_check, poisson_consistency,
                      poisson_event_check)
from .scalar import ScalarKs

_SECTION_RE = re.compile(r"^\[(\w[\w-]*)(?:\s+(\S+))?\]$")

_BLOCK_KINDS = ("measure", "kernel", "check", "poisson", "levy", "report")


class Block:
    __slots__ = ("kind", "name", "entries", "line")

    def __init__(self, kind: str, name: Optional[str], line: int) -> None:
        self.kind = kind
        self.name = name
        self.entries: List[Tuple[str, str, int]] = []
        self.line = line

    def get(self, key: str, default=None) -> Optional[str]:
        for k, v, _ in self.entries:
            if k == key:
                return v
        return default

    def require(self, key: str) -> str:
        v = self.get(key)
        if v is None:
            raise ScenarioParseError(
                "block [%s %s] misses key %r" % (self.kind, self.name, key),
                line=self.line)
        return v

    def items_prefixed(self, prefix: str):
        for k, v, line in self.entries:
            if k.startswith(prefix):
                yield k[len(prefix):].strip(), v, line


class Scenario:
    __slots__ = ("prime_p", "prime_s", "depth", "precision", "blocks")

    def __init__(self, prime_p: int, prime_s: int, depth: int,
                 precision: int, blocks: List[Block]) -> None:
        self.prime_p = prime_p
        self.prime_s = prime_s
        self.depth = depth
        self.precision = precision
        self.blocks = blocks

    @property
    def space(self) -> DepthSpace:
        return DepthSpace(self.prime_p, self.depth)


def parse_scenario(text: str) -> Scenario:
    header: Dict[str, str] = {}
    blocks: List[Block] = []
    current: Optional[Block] = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        m = _SECTION_RE.match(line.strip())
        if m:
            kind, name = m.group(1), m.group(2)
            if kind not in _BLOCK_KINDS:
                raise ScenarioParseError("unknown block kind %r" % kind,
                                         line=lineno, column=2)
            if kind != "report" and name is None:
                raise ScenarioParseError("block [%s] needs a name" % kind,
                                         line=lineno)
            current = Block(kind, name, lineno)
            blocks.append(current)
            continue
        if "=" not in line:
            raise ScenarioParseError("expected key = value",
                                     line=lineno, column=1)
        key, val = (part.strip() for part in line.split("=", 1))
        if current is None:
            header[key] = val
        else:
            current.entries.append((key, val, lineno))
    try:
        prime_p = int(header["prime_p"])
        prime_s = int(header["prime_s"])
        depth = int(header["depth"])
    except KeyError as exc:
        raise ScenarioParseError("header misses %s" % exc)
    precision = int(header.get("precision", "32"))
    if prime_p == prime_s:
        raise ScenarioParseError("prime_p and prime_s must differ")
    if depth < 1:
        raise ScenarioParseError("depth must be >= 1")
    if precision < 8:
        raise ScenarioParseError("precision must be >= 8")
    names = set()
    for b in blocks:
        if b.name is not None:
            if b.name in names:
                raise ScenarioParseError("duplicate block name %r" % b.name,
                                         line=b.line)
            names.add(b.name)
    return Scenario(prime_p, prime_s, depth, precision, blocks)


class TaskRecord:
    """One report line: task id, status, optional value/detail."""

    __slots__ = ("task", "status", "value", "detail")

    def __init__(self, task: str, status: str, value: str = "",
                 detail: str = "") -> None:
        self.task = task
        self.status = status  # "pass" | "fail" | "value"
        self.value = value
        self.detail = detail

    @property
    def ok(self) -> bool:
        return self.status != "fail"


def _parse_times(text: str) -> List[int]:
    return [int(tok) for tok in text.split()]


def _scalar(scn: Scenario, text: str) -> ScalarKs:
    return ScalarKs.exact(parse_rational(text), scn.prime_s)


class _Env:
    def __init__(self, scn: Scenario, budget: int) -> None:
        self.scn = scn
        self.budget = budget
        self.measures: Dict[str, Measure] = {}
        self.kernels: Dict[str, TransitionKernel] = {}
        self.kernel_steps: Dict[str, Measure] = {}

    def measure(self, name: str, block: Block) -> Measure:
        if name not in self.measures:
            raise ScenarioParseError("unknown measure %r (must be defined above)"
                                     % name, line=block.line)
        return self.measures[name]

    def kernel(self, name: str, block: Block) -> TransitionKernel:
        if name not in self.kernels:
            raise ScenarioParseError("unknown kernel %r (must be defined above)"
                                     % name, line=block.line)
        return self.kernels[name]


def _run_measure(env: _Env, b: Block) -> TaskRecord:
    scn = env.scn
    kind = b.get("kind", "leaves")
    if kind == "haar":
        mu = haar(scn.space, scn.prime_s)
    elif kind == "leaves":
        vals = {}
        for idx, v, line in b.items_prefixed("leaf "):
            try:
                vals[int(idx)] = parse_rational(v)
            except (ValueError, ScenarioParseError):
                raise ScenarioParseError("bad leaf entry", line=line)
        mu = Measure(scn.space, scn.prime_s, vals)
    else:
        raise ScenarioParseError("unknown measure kind %r" % kind, line=b.line)
    env.measures[b.name] = mu
    f = mu.total().as_fraction()
    return TaskRecord(b.name, "value", "total=%d/%d" % (f.numerator, f.denominator))


def _run_kernel(env: _Env, b: Block) -> TaskRecord:
    scn = env.scn
    times = _parse_times(b.require("times"))
    if b.get("semigroup", "false").lower() in ("true", "1", "yes"):
        step = env.measure(b.require("step"), b)
        env.kernels[b.name] = TransitionKernel.from_step(step, times)
        env.kernel_steps[b.name] = step
        return TaskRecord(b.name, "value", "semigroup over %d times" % len(times))
    slices = {}
    for spec_key, v, line in b.items_prefixed("slice "):
        parts = spec_key.split()
        if len(parts) != 3:
            raise ScenarioParseError("slice key needs 't1 x1 t2'", line=line)
        t1, x1, t2 = (int(tok) for tok in parts)
        slices[(t1, x1, t2)] = env.measure(v, b)
    env.kernels[b.name] = TransitionKernel.from_slices(
        scn.space, scn.prime_s, times, slices)
    return TaskRecord(b.name, "value", "%d explicit slices" % len(slices))


def _verdict_record(name: str, verdict) -> TaskRecord:
    if verdict.ok:
        return TaskRecord(name, "pass")
    return TaskRecord(name, "fail",
                      "worst_ord=%s" % verdict.worst_valuation, verdict.detail)


def _run_check(env: _Env, b: Block) -> TaskRecord:
    scn = env.scn
    kind = b.require("kind")
    if kind == "chapman":
        k = env.kernel(b.require("kernel"), b)
        v = chapman_check(k, int(b.require("t1")), int(b.require("z")),
                          int(b.require("t2")))
        return _verdict_record(b.name, v)
    if kind == "projection":
        k = env.kernel(b.require("kernel"), b)
        q = _parse_times(b.require("q"))
        sub = _parse_times(b.require("v"))
        cyl = build_cylinder(k, int(b.require("x0")), q, budget=env.budget)
        return _verdict_record(
            b.name, projection_consistency(k, cyl, sub, budget=env.budget))
    if kind == "boundedness":
        k = env.kernel(b.require("kernel"), b)
        q = _parse_times(b.require("q"))
        rep = boundedness_criterion(k, int(b.require("x0")), q,
                                    budget=env.budget)
        rec = TaskRecord(b.name, "pass" if rep.ok else "fail",
                         "C_q=%.6f rectangles=%d" % (rep.c_q, rep.rectangles_checked))
        return rec
    if kind == "idempotence":
        mu = env.measure(b.require("measure"), b)
        return _verdict_record(b.name, idempotence_check(mu))
    if kind == "independence":
        k = env.kernel(b.require("kernel"), b)
        q = _parse_times(b.require("q"))
        cyl = build_cylinder(k, int(b.require("x0")), q, budget=env.budget)
        pair1 = tuple(_parse_times(b.require("pair1")))
        pair2 = tuple(_parse_times(b.require("pair2")))
        return _verdict_record(b.name, increment_independence(cyl, pair1, pair2))
    if kind == "charfactor":
        name = b.require("kernel")
        env.kernel(name, b)
        step = env.kernel_steps.get(name)
        if step is None:
            raise ScenarioParseError("charfactor needs a semigroup kernel",
                                     line=b.line)
        h = HomogeneousKernel(step)
        v = psi_factorization_check(h, int(b.require("gamma")),
                                    int(b.require("t1")), int(b.require("t2")),
                                    int(b.get("x1", "0")))
        return _verdict_record(b.name, v)
    raise ScenarioParseError("unknown check kind %r" % kind, line=b.line)


def _run_poisson(env: _Env, b: Block) -> List[TaskRecord]:
    scn = env.scn
    base = env.measure(b.require("base"), b)
    region = parse_ball(b.require("region"), scn.prime_p)
    pm = PoissonMeasureTruncated(base, region,
                                 n_max=int(b.get("n_max", "6")),
                                 variant=b.get("variant", "tuples"),
                                 precision=scn.precision)
    records = []
    min_val = scn.precision - 4
    for idx, spec_text, line in b.items_prefixed("event"):
        events = []
        for part in spec_text.split(";"):
            ball_text, count = part.rsplit(":", 1)
            events.append((ClopenSet.from_ball(parse_ball(ball_text, scn.prime_p)),
                           int(count)))
        v = poisson_event_check(pm, events, min_valuation=min_val)
        records.append(_verdict_record("%s.event%s" % (b.name, idx or ""), v))
    sub = b.get("restrict")
    if sub is not None:
        v = poisson_consistency(pm, parse_ball(sub, scn.prime_p),
                                min_valuation=min_val)
        records.append(_verdict_record("%s.restrict" % b.name, v))
    if not records:
        records.append(TaskRecord(b.name, "value",
                                  "tail_ord>=%s" % pm.tail_valuation()))
    return records


def _run_levy(env: _Env, b: Block) -> List[TaskRecord]:
    scn = env.scn
    m0 = _scalar(scn, b.require("m0"))
    jump = env.measure(b.require("jump"), b)
    rho = _scalar(scn, b.require("rho"))
    psi0 = levy_psi(m0, jump, ScalarKs.exact(0, scn.prime_s),
                    precision=scn.precision)
    records = [TaskRecord("%s.psi0" % b.name,
                          "pass" if psi0.is_exact_zero else "fail")]
    psi = levy_psi(m0, jump, rho, precision=scn.precision)
    times = _parse_times(b.get("times", "1 2 3"))
    worst_ok = True
    for i, t1 in enumerate(times):
        for t2 in times[i:]:
            v = levy_semigroup_check(psi, t1, t2, precision=scn.precision)
            if not v.ok:
                worst_ok = False
    records.append(TaskRecord("%s.semigroup" % b.name,
                              "pass" if worst_ok else "fail"))
    return records


def run_scenario(scn: Scenario, budget: int = 10 ** 6) -> List[TaskRecord]:
    env = _Env(scn, budget)
    records: List[TaskRecord] = []
    for b in scn.blocks:
        try:
            if b.kind == "measure":
                records.append(_run_measure(env, b))
            elif b.kind == "kernel":
                records.append(_run_kernel(env, b))
            elif b.kind == "check":
                records.append(_run_check(env, b))
            elif b.kind == "poisson":
                records.extend(_run_poisson(env, b))
            elif b.kind == "levy":
                records.extend(_run_levy(env, b))
            elif b.kind == "report":
                pass
        except ScenarioParseError:
            raise
        except PadicProbError as exc:
            records.append(TaskRecord(b.name or b.kind, "fail",
                                      detail="%s: %s" % (type(exc).__name__, exc)))
    return records
