"""Monte Carlo runs of the colored process: hitting times, threshold laws, persistence.

Thresholds are parametrized by a constant ``c``:

* connectivity at ``m = (n/2)(ln n + c)`` with limit ``exp(-exp(-c))``,
* full color coverage at ``m = (n/k)(ln n + c)`` with limit ``exp(-exp(-c))``,
* a rainbow spanning tree at ``m = (n/2)(ln n + c)`` for ``k >= 2``, with
  limit ``exp(-2 exp(-c))`` for ``k = 2`` (both thresholds coincide there)
  and ``exp(-exp(-c))`` for ``k >= 3`` (coverage comes first, connectivity
  decides).
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import __version__
from .hitting import DisjointSets, HittingTimes, connect_time_of_edges
from .intersection import first_rainbow_time
from .process import GENERATOR_ID, ProcessConfig, ProcessStream, num_pairs

FORMAT_VERSION = 1

EVENTS = ("connectivity", "coverage", "rainbow")
_ALIASES = {"C": "connectivity", "N": "coverage", "R": "rainbow"}


class UnsupportedCaseError(ValueError):
    pass


def event_name(event: str) -> str:
    name = _ALIASES.get(event, event)
    if name not in EVENTS:
        raise ValueError(f"unknown event {event!r}")
    return name


# -- threshold arithmetic ------------------------------------------------------


def omega(n: int) -> float:
    """Window width ln ln n (zero when that is not positive)."""
    return max(0.0, math.log(math.log(n))) if n > 2 else 0.0


def m_window(n: int, w: float | None = None) -> tuple[int, int]:
    """``(floor((n/2)(ln n - w)), ceil((n/2)(ln n + w)))`` clipped to ``[0, N]``."""
    w = omega(n) if w is None else w
    lo = math.floor(n / 2 * (math.log(n) - w))
    hi = math.ceil(n / 2 * (math.log(n) + w))
    return max(0, lo), min(num_pairs(n), hi)


def threshold_scale(n: int, k: int, event: str) -> float:
    event = event_name(event)
    if event == "coverage":
        return n / k
    if event == "rainbow" and k == 1:
        raise UnsupportedCaseError("no rainbow threshold law for k = 1")
    return n / 2


def m_for_c(c: float, n: int, k: int, event: str = "coverage") -> int:
    m = round(threshold_scale(n, k, event) * (math.log(n) + c))
    return min(max(m, 0), num_pairs(n))


def c_for_m(m: int, n: int, k: int, event: str = "coverage") -> float:
    return m / threshold_scale(n, k, event) - math.log(n)


def c_transform(m: int, n: int, k: int) -> float:
    """``c = k m / n - ln n``, the inverse of ``m = (n/k)(ln n + c)``."""
    if n < 2:
        raise ValueError("n must be >= 2")
    return k * m / n - math.log(n)


def limit_cdf(c: float, k: int, event: str) -> float:
    event = event_name(event)
    if k < 1:
        raise ValueError("k must be >= 1")
    if event == "rainbow":
        if k == 1:
            raise UnsupportedCaseError("no rainbow limit law for k = 1")
        if k == 2:
            return math.exp(-2 * math.exp(-c))
    return math.exp(-math.exp(-c))


def default_c_grid(n: int, k: int, event: str = "coverage", points: int = 9) -> list[float]:
    """Evenly spaced ``c`` over [-w, w], with ``m`` clipped to the window."""
    w = omega(n)
    lo, hi = m_window(n, w)
    grid = np.linspace(-w, w, points) if points > 1 else np.zeros(1)
    out = []
    for c in grid.tolist():
        m = min(max(m_for_c(c, n, k, event), lo), hi)
        out.append(round(c_for_m(m, n, k, event), 12))
    return sorted(set(out))


# -- trials --------------------------------------------------------------------


@dataclass(frozen=True)
class TrialResult:
    seed: int
    n: int
    k: int
    w_size: int
    m_C: int | None
    m_N: int | None
    m_R: int | None
    length: int
    identity_holds: bool | None

    @property
    def hitting_times(self) -> HittingTimes:
        return HittingTimes(self.m_C, self.m_N, self.m_R, self.length)

    def time_of(self, event: str) -> int | None:
        return {"connectivity": self.m_C, "coverage": self.m_N, "rainbow": self.m_R}[
            event_name(event)
        ]


def trial_seed(master: int, n: int, k: int, trial: int) -> int:
    """Per-trial seed as a pure function of its coordinates."""
    ss = np.random.SeedSequence([master, n, k, trial])
    return int(ss.generate_state(1, np.uint64)[0])


def initial_window(n: int, k: int) -> int:
    """Steps generated up front; far past where all three events usually occur."""
    scale = max(n / 2, n / k)
    return min(num_pairs(n), math.ceil(scale * (math.log(n) + 3 + 2 * omega(n))))


def _connect_time(stream: ProcessStream, window: int) -> int | None:
    n, cap = stream.n, stream.limit
    dsu = DisjointSets(n)
    done = 0
    upto = min(window, cap)
    while True:
        us, vs = stream.edges_upto(upto)
        t, dsu = connect_time_of_edges(n, us, vs, start=done, dsu=dsu)
        if t is not None:
            return t
        if upto == cap:
            return None
        done, upto = upto, min(cap, 2 * upto)


def _coverage_time(stream: ProcessStream) -> int | None:
    w = stream.config.colors
    seen = np.zeros(w, dtype=bool)
    unseen = w
    offset = 0
    for block in stream.color_blocks():
        values, first = np.unique(block.ravel(), return_index=True)
        new = ~seen[values]
        if new.any():
            seen[values] = True
            unseen -= int(new.sum())
            if unseen == 0:
                return offset + int(first[new].max()) // block.shape[1] + 1
        offset += len(block)
    return None


def run_trial(config: ProcessConfig, events: str = "CNR") -> TrialResult:
    """Hitting times of one seeded process; ``config.m_max`` caps the length.

    ``events`` selects which of C, N, R to compute; the others come back as
    None and ``identity_holds`` is None unless all three were computed.
    """
    events = {event_name(e) for e in events}
    stream = ProcessStream(config)
    n, k, cap = config.n, config.k, config.length
    window = initial_window(n, k)
    need_c = "connectivity" in events or "rainbow" in events
    need_n = "coverage" in events or "rainbow" in events
    m_C = _connect_time(stream, window) if need_c else None
    m_N = _coverage_time(stream) if need_n else None
    m_R = None
    identity = None
    if "rainbow" in events:
        if m_C is not None and m_N is not None:
            start = max(m_C, m_N)
            length = min(cap, max(window, start + n))
            m_R = first_rainbow_time(stream.trace(length), start=start)
            if m_R is None and length < cap:
                m_R = first_rainbow_time(stream.trace(cap), start=start)
        if m_C is not None:
            identity = m_N is not None and m_R == max(m_C, m_N)
    return TrialResult(
        seed=config.seed,
        n=n,
        k=k,
        w_size=config.colors,
        m_C=m_C,
        m_N=m_N,
        m_R=m_R,
        length=cap,
        identity_holds=identity,
    )


# -- sweeps --------------------------------------------------------------------


@dataclass(frozen=True)
class SweepSpec:
    n_values: tuple[int, ...]
    k: int
    c_values: tuple[float, ...] | None = None
    trials: int = 100
    master_seed: int = 0
    events: tuple[str, ...] = EVENTS
    w_size: int | None = None

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.n_values:
            raise ValueError("need at least one n")
        object.__setattr__(self, "events", tuple(event_name(e) for e in self.events))

    def c_grid(self, n: int, event: str) -> list[float]:
        if self.c_values is not None:
            return list(self.c_values)
        return default_c_grid(n, self.k, event)


@dataclass(frozen=True)
class CellEstimate:
    n: int
    k: int
    c: float
    m: int
    event: str
    p_hat: float
    trials: int
    stderr: float
    limit: float | None


@dataclass
class BatchResult:
    cells: list[CellEstimate]
    trials: list[TrialResult]
    meta: dict = field(default_factory=dict)


def _trial_job(args: tuple) -> TrialResult:
    n, k, w_size, seed, events = args
    return run_trial(ProcessConfig(n, k, w_size, seed), events)


def estimate_cells(
    trials: Sequence[TrialResult], n: int, k: int, event: str, c_values: Iterable[float]
) -> list[CellEstimate]:
    event = event_name(event)
    times = [t.time_of(event) for t in trials]
    T = len(times)
    cells = []
    for c in c_values:
        m = m_for_c(c, n, k, event)
        p = sum(1 for x in times if x is not None and x <= m) / T
        try:
            lim = limit_cdf(c, k, event)
        except UnsupportedCaseError:
            lim = None
        cells.append(CellEstimate(n, k, float(c), m, event, p, T, math.sqrt(p * (1 - p) / T), lim))
    return cells


def metadata(sweep: SweepSpec | None = None, **extra) -> dict:
    meta = {
        "generator": GENERATOR_ID,
        "format_version": FORMAT_VERSION,
        "package_version": __version__,
        "omega": "ln ln n",
    }
    if sweep is not None:
        meta["master_seed"] = sweep.master_seed
        meta["k"] = sweep.k
        meta["w_size"] = "n-1" if sweep.w_size is None else sweep.w_size
        meta["default_palette"] = sweep.w_size is None
    meta.update(extra)
    return meta


def run_batch(sweep: SweepSpec, workers: int = 1) -> BatchResult:
    """Run every trial of a sweep and aggregate per (n, event, c) cell.

    All ``c`` values for one ``n`` are read off the same trials, since each
    event is monotone along a single trace.
    """
    code = "".join({"connectivity": "C", "coverage": "N", "rainbow": "R"}[e] for e in sweep.events)
    jobs = [
        (n, sweep.k, sweep.w_size, trial_seed(sweep.master_seed, n, sweep.k, t), code)
        for n in sweep.n_values
        for t in range(sweep.trials)
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_trial_job, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        results = [_trial_job(job) for job in jobs]
    cells = []
    for i, n in enumerate(sweep.n_values):
        chunk = results[i * sweep.trials : (i + 1) * sweep.trials]
        for event in sweep.events:
            if event == "rainbow" and sweep.k == 1:
                continue
            cells.extend(estimate_cells(chunk, n, sweep.k, event, sweep.c_grid(n, event)))
    return BatchResult(cells, results, metadata(sweep))


def ks_distance(cells: Sequence[CellEstimate]) -> float:
    """Largest gap between empirical and limiting probabilities over a c-grid."""
    if len(cells) < 2:
        raise ValueError("need at least two cells")
    gaps = [abs(c.p_hat - c.limit) for c in cells if c.limit is not None]
    if not gaps:
        raise ValueError("no cell has a limit law")
    return max(gaps)


def identity_rate(trials: Sequence[TrialResult]) -> tuple[float, float]:
    """Fraction of trials with m_R = max(m_C, m_N), and its standard error."""
    flags = [t.identity_holds for t in trials]
    if any(f is None for f in flags):
        raise ValueError("identity needs all three hitting times")
    p = sum(flags) / len(flags)
    return p, math.sqrt(p * (1 - p) / len(flags))


# -- persistence ---------------------------------------------------------------

TRIAL_FIELDS = ("seed", "n", "k", "w_size", "m_C", "m_N", "m_R", "length", "identity_holds")
CELL_FIELDS = ("n", "k", "c", "m", "event", "p_hat", "trials", "stderr", "limit")
_TYPES = {
    "seed": int, "n": int, "k": int, "w_size": int, "m_C": int, "m_N": int, "m_R": int,
    "length": int, "identity_holds": bool, "c": float, "m": int, "event": str,
    "p_hat": float, "trials": int, "stderr": float, "limit": float,
}


def _csv_value(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    return repr(x) if isinstance(x, float) else str(x)


def _parse_value(name: str, s: str):
    if s == "":
        return None
    t = _TYPES[name]
    if t is bool:
        return s == "true"
    return t(s)


def dump_records(records: Sequence, fields: Sequence[str], meta: dict, fmt: str) -> str:
    rows = [asdict(r) for r in records]
    if fmt == "jsonl":
        lines = [json.dumps({"meta": meta}, sort_keys=True)]
        lines += [json.dumps({f: row[f] for f in fields}) for row in rows]
        return "\n".join(lines) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        for key in sorted(meta):
            buf.write(f"# {key}={json.dumps(meta[key])}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(fields)
        for row in rows:
            writer.writerow([_csv_value(row[f]) for f in fields])
        return buf.getvalue()
    raise ValueError(f"unknown format {fmt!r}")


def load_records(text: str, cls, fields: Sequence[str], fmt: str) -> tuple[list, dict]:
    if fmt == "jsonl":
        lines = [line for line in text.splitlines() if line.strip()]
        meta = json.loads(lines[0])["meta"]
        return [cls(**json.loads(line)) for line in lines[1:]], meta
    if fmt == "csv":
        meta = {}
        body = []
        for line in text.splitlines():
            if line.startswith("# "):
                key, _, val = line[2:].partition("=")
                meta[key] = json.loads(val)
            else:
                body.append(line)
        reader = csv.reader(body)
        header = next(reader)
        if tuple(header) != tuple(fields):
            raise ValueError(f"unexpected columns {header}")
        return [cls(**{f: _parse_value(f, v) for f, v in zip(fields, row)}) for row in reader], meta
    raise ValueError(f"unknown format {fmt!r}")


def format_for(path: str | Path) -> str:
    return "jsonl" if str(path).endswith(".jsonl") else "csv"


def write_trials(path: str | Path, trials: Sequence[TrialResult], meta: dict, fmt: str | None = None) -> None:
    Path(path).write_text(dump_records(trials, TRIAL_FIELDS, meta, fmt or format_for(path)))


def read_trials(path: str | Path, fmt: str | None = None) -> tuple[list[TrialResult], dict]:
    return load_records(Path(path).read_text(), TrialResult, TRIAL_FIELDS, fmt or format_for(path))


def write_cells(path: str | Path, cells: Sequence[CellEstimate], meta: dict, fmt: str | None = None) -> None:
    Path(path).write_text(dump_records(cells, CELL_FIELDS, meta, fmt or format_for(path)))


def read_cells(path: str | Path, fmt: str | None = None) -> tuple[list[CellEstimate], dict]:
    return load_records(Path(path).read_text(), CellEstimate, CELL_FIELDS, fmt or format_for(path))
