"""Colored Erdős–Rényi graph process.

A trace is the prefix of a uniformly random ordering of the edges of K_n,
where every edge independently carries a uniform k-subset of the colors
``0..w_size-1``.

Randomness is drawn block by block: block ``b`` of edge positions uses its
own PCG64 stream keyed on ``(seed, stream, b)``.  Because of that, the first
``m`` edges of a trace never depend on how far the trace is generated, and
extending a stream is the same as regenerating it longer.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

BLOCK = 4096
EDGE_STREAM = 0
COLOR_STREAM = 1
GENERATOR_ID = f"pcg64-seedsequence-block{BLOCK}-fisher-yates/numpy-{np.__version__}"

# below this fraction of N the permutation state lives in a dict, above it in a list
DENSE_FRACTION = 0.25

_SORT_KEY_ROWS = 1 << 20


class InvalidConfigError(ValueError):
    pass


def num_pairs(n: int) -> int:
    return n * (n - 1) // 2


@dataclass(frozen=True)
class ProcessConfig:
    n: int
    k: int
    w_size: int | None = None
    seed: int = 0
    m_max: int | None = None

    def __post_init__(self) -> None:
        if self.n < 2:
            raise InvalidConfigError(f"n must be >= 2, got {self.n}")
        w = self.colors
        if w < 1:
            raise InvalidConfigError(f"w_size must be >= 1, got {w}")
        if not 1 <= self.k <= w:
            raise InvalidConfigError(f"k must lie in [1, {w}], got {self.k}")
        if not 0 <= self.seed < 2**64:
            raise InvalidConfigError("seed must be a 64-bit unsigned integer")
        if self.m_max is not None and not 0 <= self.m_max <= num_pairs(self.n):
            raise InvalidConfigError(
                f"m_max must lie in [0, {num_pairs(self.n)}], got {self.m_max}"
            )

    @property
    def colors(self) -> int:
        """Number of colors |W|; defaults to n - 1."""
        return self.n - 1 if self.w_size is None else self.w_size

    @property
    def length(self) -> int:
        return num_pairs(self.n) if self.m_max is None else self.m_max

    @property
    def default_palette(self) -> bool:
        return self.colors == self.n - 1

    def with_length(self, m_max: int | None) -> ProcessConfig:
        return ProcessConfig(self.n, self.k, self.w_size, self.seed, m_max)


@dataclass(frozen=True)
class TimedEdge:
    index: int
    u: int
    v: int
    colors: tuple[int, ...]


@dataclass(frozen=True, eq=False)
class ProcessTrace:
    """First ``len(trace)`` steps of the colored process.

    Edges are stored column-wise; ``trace[i]`` materializes the 1-based edge
    ``e_{i+1}`` as a :class:`TimedEdge`.
    """

    config: ProcessConfig
    u: np.ndarray
    v: np.ndarray
    colors: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return len(self.u)

    def __getitem__(self, i: int) -> TimedEdge:
        if i < 0:
            i += len(self)
        return TimedEdge(
            i + 1, int(self.u[i]), int(self.v[i]), tuple(int(c) for c in self.colors[i])
        )

    def __iter__(self) -> Iterator[TimedEdge]:
        for i in range(len(self)):
            yield self[i]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ProcessTrace):
            return NotImplemented
        return (
            self.config == other.config
            and np.array_equal(self.u, other.u)
            and np.array_equal(self.v, other.v)
            and np.array_equal(self.colors, other.colors)
        )

    @property
    def n(self) -> int:
        return self.config.n

    @property
    def k(self) -> int:
        return self.config.k

    @property
    def w_size(self) -> int:
        return self.config.colors

    @property
    def edges(self) -> list[TimedEdge]:
        return list(self)

    def prefix(self, m: int) -> ProcessTrace:
        if not 0 <= m <= len(self):
            raise ValueError(f"prefix length {m} outside [0, {len(self)}]")
        return ProcessTrace(self.config.with_length(m), self.u[:m], self.v[:m], self.colors[:m])

    @classmethod
    def from_edges(
        cls,
        n: int,
        k: int,
        edges: Sequence[tuple[int, int, Sequence[int]]],
        w_size: int | None = None,
        seed: int = 0,
    ) -> ProcessTrace:
        """Build a hand-made trace from ``(u, v, colors)`` triples."""
        config = ProcessConfig(n, k, w_size, seed, len(edges))
        w = config.colors
        u = np.empty(len(edges), dtype=np.int64)
        v = np.empty(len(edges), dtype=np.int64)
        colors = np.empty((len(edges), k), dtype=np.int64)
        seen = set()
        for i, (a, b, cs) in enumerate(edges):
            a, b = min(a, b), max(a, b)
            if not 0 <= a < b < n:
                raise ValueError(f"edge {i + 1}: bad endpoints ({a}, {b})")
            if (a, b) in seen:
                raise ValueError(f"edge {i + 1}: duplicate pair ({a}, {b})")
            seen.add((a, b))
            cs = sorted(cs)
            if len(cs) != k or len(set(cs)) != k or not all(0 <= c < w for c in cs):
                raise ValueError(f"edge {i + 1}: colors {cs} are not a {k}-subset of [0, {w})")
            u[i], v[i] = a, b
            colors[i] = cs
        return cls(config, u, v, colors)


def _block_rng(seed: int, stream: int, block: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(stream, block))
    return np.random.Generator(np.random.PCG64(ss))


def sample_color_sets(rng: np.random.Generator, count: int, k: int, w_size: int) -> np.ndarray:
    """Draw ``count`` independent uniform k-subsets of ``range(w_size)``.

    Returns an int64 array of shape ``(count, k)`` with each row sorted.
    """
    if not 1 <= k <= w_size:
        raise InvalidConfigError(f"k must lie in [1, {w_size}], got {k}")
    if k * k <= w_size:
        # uniform k-tuples conditioned on distinctness; acceptance >= 1/2
        out = np.sort(rng.integers(0, w_size, size=(count, k)), axis=1)
        bad = np.flatnonzero((np.diff(out, axis=1) == 0).any(axis=1))
        while bad.size:
            redraw = np.sort(rng.integers(0, w_size, size=(bad.size, k)), axis=1)
            out[bad] = redraw
            bad = bad[(np.diff(redraw, axis=1) == 0).any(axis=1)]
        return out
    # k smallest of w_size iid keys
    out = np.empty((count, k), dtype=np.int64)
    rows = max(1, _SORT_KEY_ROWS // w_size)
    for start in range(0, count, rows):
        keys = rng.random((min(rows, count - start), w_size))
        if k < w_size:
            picked = np.argpartition(keys, k - 1, axis=1)[:, :k]
        else:
            picked = np.broadcast_to(np.arange(w_size), keys.shape)
        out[start : start + len(keys)] = np.sort(picked, axis=1)
    return out


def sample_color_set(rng: np.random.Generator, k: int, w_size: int) -> tuple[int, ...]:
    return tuple(int(c) for c in sample_color_sets(rng, 1, k, w_size)[0])


class PairCodec:
    """Bijection between pair indices ``0..N-1`` and pairs ``u < v``, in lex order."""

    def __init__(self, n: int) -> None:
        self.n = n
        u = np.arange(n, dtype=np.int64)
        self.offsets = u * n - u * (u + 1) // 2

    def decode(self, p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        u = np.searchsorted(self.offsets, p, side="right") - 1
        v = p - self.offsets[u] + u + 1
        return u, v

    def encode(self, u: int, v: int) -> int:
        return int(self.offsets[u]) + v - u - 1


class ProcessStream:
    """Incrementally generated colored process for one ``(n, k, w_size, seed)``.

    ``edges_upto(m)`` / ``colors_upto(m)`` return the first ``m`` steps,
    generating further blocks on demand.  The edge order and the colors come
    from separate streams, so color-only statistics never pay for edges.
    """

    def __init__(self, config: ProcessConfig) -> None:
        self.config = config
        self.n = config.n
        self.total = num_pairs(config.n)
        self.limit = config.length
        self._codec = PairCodec(config.n)
        # an uncapped stream starts sparse and densifies once it gets that far
        dense = config.m_max is not None and config.m_max >= DENSE_FRACTION * self.total
        self._perm: list[int] | dict[int, int] = list(range(self.total)) if dense else {}
        self._pairs: list[np.ndarray] = []
        self._npairs = 0
        self._color_blocks: list[np.ndarray] = []
        self._ncolors = 0
        self._u = np.empty(0, dtype=np.int64)
        self._v = np.empty(0, dtype=np.int64)
        self._colors = np.empty((0, config.k), dtype=np.int64)

    def _check(self, m: int) -> None:
        if not 0 <= m <= self.limit:
            raise InvalidConfigError(f"requested {m} steps, limit is {self.limit}")

    def _next_pair_block(self) -> None:
        b = len(self._pairs)
        lo = b * BLOCK
        hi = min(lo + BLOCK, self.total)
        draws = _block_rng(self.config.seed, EDGE_STREAM, b).integers(
            np.arange(lo, hi, dtype=np.int64), self.total
        )
        perm = self._perm
        if isinstance(perm, dict) and lo >= DENSE_FRACTION * self.total:
            dense = list(range(self.total))
            for key, val in perm.items():
                dense[key] = val
            perm = self._perm = dense
        out = [0] * (hi - lo)
        if isinstance(perm, list):
            for t, j in enumerate(draws.tolist()):
                i = lo + t
                out[t] = perm[j]
                perm[j] = perm[i]
        else:
            get = perm.get
            for t, j in enumerate(draws.tolist()):
                i = lo + t
                out[t] = get(j, j)
                perm[j] = get(i, i)
                # position i is never read again
                perm.pop(i, None)
        self._pairs.append(np.asarray(out, dtype=np.int64))
        self._npairs = hi

    def _next_color_block(self) -> None:
        b = len(self._color_blocks)
        count = min(BLOCK, self.total - b * BLOCK)
        rng = _block_rng(self.config.seed, COLOR_STREAM, b)
        self._color_blocks.append(sample_color_sets(rng, count, self.config.k, self.config.colors))
        self._ncolors += count

    def edges_upto(self, m: int) -> tuple[np.ndarray, np.ndarray]:
        self._check(m)
        if len(self._u) < m:
            while self._npairs < m:
                self._next_pair_block()
            pairs = np.concatenate(self._pairs)
            self._u, self._v = self._codec.decode(pairs)
        return self._u[:m], self._v[:m]

    def colors_upto(self, m: int) -> np.ndarray:
        self._check(m)
        if len(self._colors) < m:
            while self._ncolors < m:
                self._next_color_block()
            self._colors = np.concatenate(self._color_blocks)
        return self._colors[:m]

    def color_blocks(self) -> Iterator[np.ndarray]:
        """Yield color blocks in order until the process is exhausted."""
        b = 0
        while b * BLOCK < self.limit:
            if b == len(self._color_blocks):
                self._next_color_block()
            block = self._color_blocks[b]
            yield block[: self.limit - b * BLOCK]
            b += 1

    def trace(self, m: int) -> ProcessTrace:
        u, v = self.edges_upto(m)
        colors = self.colors_upto(m)
        return ProcessTrace(self.config.with_length(m), u, v, colors)


def generate_trace(config: ProcessConfig) -> ProcessTrace:
    return ProcessStream(config).trace(config.length)


# -- text format ------------------------------------------------------------


def format_trace(trace: ProcessTrace) -> str:
    c = trace.config
    lines = [
        f"# n={c.n} k={c.k} w_size={c.colors} seed={c.seed} generator={GENERATOR_ID}"
    ]
    for i, (a, b) in enumerate(zip(trace.u.tolist(), trace.v.tolist())):
        cs = ",".join(str(x) for x in trace.colors[i].tolist())
        lines.append(f"{i + 1} {a} {b} {cs}")
    return "\n".join(lines) + "\n"


def write_trace(trace: ProcessTrace, path: str | Path) -> None:
    Path(path).write_text(format_trace(trace), encoding="ascii")


class TraceFormatError(ValueError):
    pass


def parse_trace(text: str) -> ProcessTrace:
    lines = text.splitlines()
    if not lines or not lines[0].startswith("#"):
        raise TraceFormatError("missing header line")
    header = {}
    for tok in lines[0][1:].split():
        key, sep, val = tok.partition("=")
        if not sep:
            raise TraceFormatError(f"bad header token {tok!r}")
        header[key] = val
    try:
        n, k, w, seed = (int(header[x]) for x in ("n", "k", "w_size", "seed"))
    except (KeyError, ValueError) as exc:
        raise TraceFormatError(f"bad header: {exc}") from None
    edges = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split()
        try:
            idx, a, b = int(parts[0]), int(parts[1]), int(parts[2])
            cs = [int(x) for x in parts[3].split(",")]
        except (IndexError, ValueError):
            raise TraceFormatError(f"line {lineno}: cannot parse {line!r}") from None
        if len(parts) != 4 or idx != len(edges) + 1:
            raise TraceFormatError(f"line {lineno}: expected edge index {len(edges) + 1}")
        edges.append((a, b, cs))
    try:
        return ProcessTrace.from_edges(n, k, edges, w_size=w, seed=seed)
    except ValueError as exc:
        raise TraceFormatError(str(exc)) from None


def read_trace(path: str | Path) -> ProcessTrace:
    return parse_trace(Path(path).read_text(encoding="ascii"))

