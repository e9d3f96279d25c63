"""Model families: typed random graphs and their multi-block extension.

Vertices are laid out in contiguous label ranges, type 1 first. Edge
``xy`` with ``x`` of type ``k`` and ``y`` of type ``l`` is present with
probability ``min(1, c[k][l] * p(n))``, independently.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
import yaml

from .errors import (AsymmetricC, DisconnectedCollapse, IndexOutOfRange,
                     ModelError, NegativeC, NonPositiveA)


# ---------------------------------------------------------------- schedules

@dataclass(frozen=True)
class LambdaOverN:
    lam: float

    def __call__(self, n, b=None):
        return self.lam / n


@dataclass(frozen=True)
class AlphaLogNOverN:
    alpha: float

    def __call__(self, n, b=None):
        return self.alpha * math.log(n) / n


@dataclass(frozen=True)
class CriticalWindow:
    """p(n) = (log n + c_shift) / (b n); ``b`` must be supplied by the caller."""
    c_shift: float

    def __call__(self, n, b=None):
        if b is None:
            raise ModelError("critical-window schedule needs the constant b", field="schedule")
        return max(0.0, (math.log(n) + self.c_shift) / (b * n))


@dataclass(frozen=True)
class PowerLaw:
    gamma: float

    def __call__(self, n, b=None):
        return float(n) ** (-self.gamma)


@dataclass(frozen=True)
class LogSqOverN2:
    def __call__(self, n, b=None):
        return math.log(n) ** 2 / float(n) ** 2


@dataclass(frozen=True)
class Custom:
    """Tabulated p'(n); only the listed n are defined."""
    table: tuple

    def __call__(self, n, b=None):
        for n_i, p_i in self.table:
            if int(n_i) == int(n):
                return float(p_i)
        raise ModelError(f"custom schedule has no entry for n={n}", field="inter_schedule")


Schedule = LambdaOverN | AlphaLogNOverN | CriticalWindow
InterSchedule = PowerLaw | LogSqOverN2 | Custom


# ---------------------------------------------------------------- specs

@dataclass(frozen=True)
class ModelSpec:
    m: int
    a: tuple
    c: tuple
    schedule: Schedule

    @classmethod
    def make(cls, a, c, schedule):
        a = tuple(float(x) for x in a)
        c = tuple(tuple(float(x) for x in row) for row in c)
        return cls(len(a), a, c, schedule)

    @property
    def a_array(self):
        return np.asarray(self.a, dtype=float)

    @property
    def c_array(self):
        return np.asarray(self.c, dtype=float)

    def with_schedule(self, schedule):
        return ModelSpec(self.m, self.a, self.c, schedule)


@dataclass(frozen=True)
class BlockModelSpec:
    blocks: tuple            # tuple of ModelSpec sharing one intra-block schedule
    d: tuple                 # M_r x M_r, M_r = sum of block type counts
    inter_schedule: InterSchedule

    @property
    def r(self):
        return len(self.blocks)

    @property
    def schedule(self):
        return self.blocks[0].schedule

    @property
    def type_offsets(self):
        return np.concatenate([[0], np.cumsum([b.m for b in self.blocks])]).astype(int)

    def with_schedules(self, schedule=None, inter_schedule=None):
        blocks = self.blocks if schedule is None else tuple(b.with_schedule(schedule) for b in self.blocks)
        return BlockModelSpec(blocks, self.d, inter_schedule or self.inter_schedule)


@dataclass(frozen=True)
class ValidatedModel:
    spec: ModelSpec
    collapsed: np.ndarray = field(repr=False, compare=False)
    collapsed_connected: bool = True

    @property
    def m(self):
        return self.spec.m

    @property
    def a(self):
        return self.spec.a_array

    @property
    def c(self):
        return self.spec.c_array

    @property
    def schedule(self):
        return self.spec.schedule

    def __eq__(self, other):
        return (isinstance(other, ValidatedModel) and self.spec == other.spec
                and self.collapsed_connected == other.collapsed_connected
                and np.array_equal(self.collapsed, other.collapsed))

    __hash__ = None


@dataclass(frozen=True)
class ValidatedBlockModel:
    spec: BlockModelSpec
    blocks: tuple                      # ValidatedModel per block
    block_collapsed: np.ndarray = field(repr=False, compare=False)
    block_collapsed_connected: bool = True

    @property
    def r(self):
        return self.spec.r

    @property
    def d(self):
        return np.asarray(self.spec.d, dtype=float)


def _connected(adj):
    m = adj.shape[0]
    seen = {0}
    queue = deque([0])
    while queue:
        k = queue.popleft()
        for l in np.flatnonzero(adj[k]):
            if l not in seen:
                seen.add(int(l))
                queue.append(int(l))
    return len(seen) == m


def validate(spec: ModelSpec) -> ValidatedModel:
    a = spec.a_array
    c = spec.c_array
    if spec.m < 1 or a.shape != (spec.m,):
        raise ModelError(f"a must have length m={spec.m}", field="a")
    if c.shape != (spec.m, spec.m):
        raise ModelError(f"c must be {spec.m}x{spec.m}", field="c")
    if not np.all(np.isfinite(a)) or np.any(a <= 0):
        raise NonPositiveA("all type proportions a_k must be positive", field="a")
    if not np.all(np.isfinite(c)) or np.any(c < 0):
        raise NegativeC("c entries must be non-negative", field="c")
    if not np.array_equal(c, c.T):
        raise AsymmetricC("c must be symmetric", field="c")
    if not np.any(c > 0):
        raise DisconnectedCollapse("c has no positive entry", field="c")
    collapsed = c > 0
    if not _connected(collapsed):
        raise DisconnectedCollapse("collapsed type graph G' is not connected", field="c")
    _check_schedule(spec.schedule)
    return ValidatedModel(spec, collapsed, True)


def _check_schedule(s):
    if isinstance(s, LambdaOverN) and not s.lam >= 0:
        raise ModelError("lambda must be non-negative", field="schedule")
    if isinstance(s, AlphaLogNOverN) and not s.alpha >= 0:
        raise ModelError("alpha must be non-negative", field="schedule")


def validate_blocks(spec: BlockModelSpec) -> ValidatedBlockModel:
    blocks = []
    for i, b in enumerate(spec.blocks):
        try:
            blocks.append(validate(b))
        except ModelError as exc:
            raise type(exc)(f"block {i}: {exc}", field=f"blocks[{i}].{exc.field}") from exc
    d = np.asarray(spec.d, dtype=float)
    offsets = spec.type_offsets
    M = offsets[-1]
    if d.shape != (M, M):
        raise ModelError(f"d must be {M}x{M}", field="d")
    if np.any(d < 0) or not np.all(np.isfinite(d)):
        raise NegativeC("d entries must be non-negative", field="d")
    if not np.array_equal(d, d.T):
        raise AsymmetricC("d must be symmetric", field="d")
    r = spec.r
    collapsed = np.zeros((r, r), dtype=bool)
    for i in range(r):
        for j in range(r):
            if i != j:
                collapsed[i, j] = np.any(d[offsets[i]:offsets[i + 1], offsets[j]:offsets[j + 1]] > 0)
    if not _connected(collapsed):
        raise DisconnectedCollapse("collapsed block graph G'' is not connected", field="d")
    return ValidatedBlockModel(spec, tuple(blocks), collapsed, True)


# ---------------------------------------------------------------- evaluation

def edge_probability(model: ValidatedModel, k: int, l: int, n: int, b: float | None = None) -> float:
    """Clamped edge probability between a type-k and a type-l vertex (0-based types)."""
    if not (0 <= k < model.m and 0 <= l < model.m):
        raise IndexOutOfRange(f"type index out of range: ({k}, {l}) with m={model.m}")
    return min(1.0, model.spec.c[k][l] * model.schedule(n, b))


def probability_matrix(model: ValidatedModel, n: int, b: float | None = None) -> np.ndarray:
    return np.minimum(1.0, model.c * model.schedule(n, b))


def type_counts(a: Sequence[float] | ValidatedModel, n: int) -> np.ndarray:
    """Integer type sizes by largest-remainder rounding of ``a_k n``.

    Target total is ``round(sum(a) n)``; leftover units go to the largest
    fractional parts, ties to the lower type index.
    """
    if isinstance(a, ValidatedModel):
        a = a.a
    a = np.asarray(a, dtype=float)
    exact = a * n
    base = np.floor(exact).astype(np.int64)
    total = int(round(float(exact.sum())))
    short = total - int(base.sum())
    if short > 0:
        frac = exact - base
        order = sorted(range(len(a)), key=lambda k: (-frac[k], k))
        for k in order[:short]:
            base[k] += 1
    return base


def type_ranges(counts) -> list[tuple[int, int]]:
    """1-based inclusive label ranges per type."""
    ends = np.cumsum(counts)
    starts = ends - np.asarray(counts)
    return [(int(s) + 1, int(e)) for s, e in zip(starts, ends)]


# ---------------------------------------------------------------- config io

def _schedule_from(obj, field_name="schedule"):
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ModelError("schedule must be a mapping with a 'kind' key", field=field_name)
    kind = obj["kind"]
    try:
        if kind == "lambda":
            return LambdaOverN(float(obj["value"]))
        if kind == "alpha_log":
            return AlphaLogNOverN(float(obj["value"]))
        if kind == "critical":
            return CriticalWindow(float(obj.get("c_shift", obj.get("value", 0.0))))
        if kind == "power":
            return PowerLaw(float(obj.get("gamma", obj.get("value"))))
        if kind == "logsq":
            return LogSqOverN2()
        if kind == "custom":
            return Custom(tuple((int(n), float(p)) for n, p in obj["table"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelError(f"bad {field_name} parameters: {exc}", field=field_name) from exc
    raise ModelError(f"unknown {field_name} kind {kind!r}", field=field_name)


def _schedule_to(s):
    if isinstance(s, LambdaOverN):
        return {"kind": "lambda", "value": s.lam}
    if isinstance(s, AlphaLogNOverN):
        return {"kind": "alpha_log", "value": s.alpha}
    if isinstance(s, CriticalWindow):
        return {"kind": "critical", "c_shift": s.c_shift}
    if isinstance(s, PowerLaw):
        return {"kind": "power", "gamma": s.gamma}
    if isinstance(s, LogSqOverN2):
        return {"kind": "logsq"}
    return {"kind": "custom", "table": [list(t) for t in s.table]}


def _model_from(obj, schedule, where=""):
    for key in ("a", "c"):
        if key not in obj:
            raise ModelError(f"missing key {where}{key}", field=f"{where}{key}")
    spec = ModelSpec.make(obj["a"], obj["c"], schedule)
    if "m" in obj and int(obj["m"]) != spec.m:
        raise ModelError(f"m={obj['m']} disagrees with len(a)={spec.m}", field=f"{where}m")
    return spec


def spec_from_dict(obj) -> ModelSpec | BlockModelSpec:
    if not isinstance(obj, dict):
        raise ModelError("config must be a mapping", field="<root>")
    schedule = _schedule_from(obj.get("schedule", {"kind": "lambda", "value": 1.0}))
    if "blocks" in obj:
        blocks = tuple(_model_from(b, schedule, f"blocks[{i}].") for i, b in enumerate(obj["blocks"]))
        if "d" not in obj:
            raise ModelError("block config needs d", field="d")
        inter = obj.get("inter_schedule", {"kind": "logsq"})
        if isinstance(inter, list):
            inter = inter[0]
        d = tuple(tuple(float(x) for x in row) for row in obj["d"])
        return BlockModelSpec(blocks, d, _schedule_from(inter, "inter_schedule"))
    return _model_from(obj, schedule)


def inter_schedules_from_dict(obj) -> list:
    """All p'(n) schedules listed in a block config (a single one or a list)."""
    inter = obj.get("inter_schedule", {"kind": "logsq"})
    if not isinstance(inter, list):
        inter = [inter]
    return [_schedule_from(s, "inter_schedule") for s in inter]


def spec_to_dict(spec) -> dict:
    if isinstance(spec, BlockModelSpec):
        return {"schedule": _schedule_to(spec.schedule),
                "blocks": [{"m": b.m, "a": list(b.a), "c": [list(r) for r in b.c]} for b in spec.blocks],
                "d": [list(r) for r in spec.d],
                "inter_schedule": _schedule_to(spec.inter_schedule)}
    return {"m": spec.m, "a": list(spec.a), "c": [list(r) for r in spec.c],
            "schedule": _schedule_to(spec.schedule)}


def load_config(path) -> dict:
    """Read a YAML (or JSON) config file into a plain dict."""
    text = Path(path).read_text()
    obj = yaml.safe_load(text)
    if not isinstance(obj, dict):
        raise ModelError("config must be a mapping", field="<root>")
    return obj


def load_spec(path):
    return spec_from_dict(load_config(path))
