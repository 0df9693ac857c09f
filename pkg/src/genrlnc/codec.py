"""Random linear coding over disjoint generations of a packet block.

The source splits N packets into n = N/h generations of h packets each.
Every transmission picks a generation uniformly at random, draws a coding
vector with i.i.d. uniform GF(q) entries, and sends the linear combination
together with the vector and the generation index.  The receiver runs one
incremental Gauss-Jordan elimination per generation; a packet is
*innovative* when it raises its generation's rank, and the block decodes
once every generation reaches rank h.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotDecodableError
from .gf import FieldSpec


@dataclass(frozen=True)
class GenerationConfig:
    """Block layout: N packets of d symbols each, generations of size h."""

    N: int
    h: int
    field: FieldSpec
    d: int = 1

    def __post_init__(self):
        if self.N < 1 or self.h < 1 or self.d < 1:
            raise ValueError("N, h and d must all be >= 1")
        if self.N % self.h:
            raise ValueError(f"N={self.N} is not divisible by generation size h={self.h}")

    @property
    def n(self) -> int:
        return self.N // self.h


@dataclass(frozen=True)
class SourceBlock:
    """Packet columns: packets[:, i] is packet i+1, shape (d, N)."""

    packets: np.ndarray

    def generation(self, config: GenerationConfig, j: int) -> np.ndarray:
        """Columns of generation j (1-based), a view of shape (d, h)."""
        if not 1 <= j <= config.n:
            raise ValueError(f"generation index {j} outside [1, {config.n}]")
        return self.packets[:, (j - 1) * config.h : j * config.h]


@dataclass(frozen=True)
class CodedPacket:
    generation_index: int  # 1-based
    coding_vector: np.ndarray  # (h,)
    payload: np.ndarray | None  # (d,), absent in rank-only trials


@dataclass(frozen=True)
class InnovationReport:
    innovative: bool
    generation_index: int
    rank: int
    generation_complete: bool


@dataclass(frozen=True)
class TrialRecord:
    """One complete-decode run: total packets, and per-generation draw counts
    frozen at the moment each generation reached full rank."""

    total_packets: int
    generation_draws: tuple[int, ...]


def partition(symbols, config: GenerationConfig) -> SourceBlock:
    """Lay out N*d field symbols as sequential packet columns.

    Symbols fill packet 1 first, then packet 2, and so on; zero-padding to a
    multiple of N*d is the caller's job.
    """
    arr = np.asarray(symbols)
    if arr.size != config.N * config.d:
        raise ValueError(f"expected {config.N * config.d} symbols, got {arr.size}")
    if arr.size and (arr.min() < 0 or arr.max() >= config.field.q):
        raise ValueError(f"symbols outside [0, {config.field.q})")
    packets = arr.reshape(config.N, config.d).T.astype(config.field.dtype)
    return SourceBlock(packets)


def random_source(config: GenerationConfig, rng: np.random.Generator) -> SourceBlock:
    """Uniform random block, the usual test payload."""
    return SourceBlock(config.field.random_vector(rng, (config.d, config.N)))


def encode_next(source: SourceBlock, config: GenerationConfig, rng: np.random.Generator) -> CodedPacket:
    """Draw one coded packet: uniform generation, i.i.d. uniform coding vector.

    The all-zero coding vector is a legal (non-innovative) draw.
    """
    j = int(rng.integers(1, config.n + 1))
    e = config.field.random_vector(rng, config.h)
    payload = config.field.combine(source.generation(config, j), e)
    return CodedPacket(j, e, payload)


def _encode_rank_only(config: GenerationConfig, rng: np.random.Generator) -> CodedPacket:
    j = int(rng.integers(1, config.n + 1))
    e = config.field.random_vector(rng, config.h)
    return CodedPacket(j, e, None)


class _GenerationDecoder:
    """Incremental Gauss-Jordan elimination for one generation.

    Accepted coding vectors are kept in reduced row-echelon form, so reducing
    an incoming vector is a single linear combination over the pivot rows and
    decoding is just a row permutation once rank reaches h.
    """

    __slots__ = ("field", "h", "rank", "rows", "pivot_cols", "payloads")

    def __init__(self, field: FieldSpec, h: int, payload_dim: int | None):
        self.field = field
        self.h = h
        self.rank = 0
        self.rows = np.zeros((h, h), dtype=field.dtype)
        self.pivot_cols = np.zeros(h, dtype=np.int64)
        self.payloads = None if payload_dim is None else np.zeros((h, payload_dim), dtype=field.dtype)

    def absorb(self, vec: np.ndarray, payload: np.ndarray | None) -> bool:
        f = self.field
        v = np.array(vec, dtype=f.dtype)  # own copy; vec may be a view into a batch
        pay = None if self.payloads is None else np.array(payload, dtype=f.dtype)
        r = self.rank
        if r:
            coeffs = v[self.pivot_cols[:r]]
            if coeffs.any():
                f.isub(v, f.row_combination(coeffs, self.rows[:r]))
                if pay is not None:
                    f.isub(pay, f.row_combination(coeffs, self.payloads[:r]))
        nz = np.nonzero(v)[0]
        if nz.size == 0:
            return False
        p = int(nz[0])
        c = f.inv(int(v[p]))
        if c != 1:
            v = f.scale(v, c)
            if pay is not None:
                pay = f.scale(pay, c)
        if r:
            col = self.rows[:r, p].copy()  # snapshot: the row update zeroes this column
            if col.any():
                f.isub(self.rows[:r], f.outer(col, v))
                if pay is not None:
                    f.isub(self.payloads[:r], f.outer(col, pay))
        self.rows[r] = v
        self.pivot_cols[r] = p
        if pay is not None:
            self.payloads[r] = pay
        self.rank = r + 1
        return True


class DecoderState:
    """Per-generation reduced systems, ranks, and the absorbed-packet count."""

    def __init__(self, config: GenerationConfig, with_payload: bool = True):
        self.config = config
        self.with_payload = with_payload
        self._gens = [
            _GenerationDecoder(config.field, config.h, config.d if with_payload else None)
            for _ in range(config.n)
        ]
        self.packets_absorbed = 0

    def rank(self, j: int) -> int:
        return self._gens[j - 1].rank

    @property
    def complete(self) -> bool:
        return all(g.rank == self.config.h for g in self._gens)

    def absorb(self, pkt: CodedPacket) -> InnovationReport:
        """Feed one coded packet to its generation's elimination."""
        if not 1 <= pkt.generation_index <= self.config.n:
            raise ValueError(f"generation index {pkt.generation_index} outside [1, {self.config.n}]")
        if pkt.coding_vector.shape != (self.config.h,):
            raise ValueError(f"coding vector must have length {self.config.h}")
        if self.with_payload:
            if pkt.payload is None:
                raise ValueError("decoder carries payloads but the packet has none")
            if pkt.payload.shape != (self.config.d,):
                raise ValueError(f"payload must have length {self.config.d}")
        g = self._gens[pkt.generation_index - 1]
        self.packets_absorbed += 1
        innovative = g.absorb(pkt.coding_vector, pkt.payload if self.with_payload else None)
        return InnovationReport(innovative, pkt.generation_index, g.rank, g.rank == self.config.h)

    def decode_generation(self, j: int) -> np.ndarray:
        """Original packets of generation j as columns, shape (d, h).

        Requires rank h; with full rank the reduced rows are a permuted
        identity, so the payload rows ordered by pivot are the packets.
        """
        g = self._gens[j - 1]
        if g.rank < self.config.h:
            raise NotDecodableError(f"generation {j} has rank {g.rank} < {self.config.h}")
        if g.payloads is None:
            raise NotDecodableError("decoder ran rank-only; no payloads to decode")
        order = np.argsort(g.pivot_cols[: self.config.h], kind="stable")
        return g.payloads[order].T.copy()


def run_trial(config: GenerationConfig, rng: np.random.Generator, source: SourceBlock | None = None) -> TrialRecord:
    """Sample coded packets until every generation decodes.

    With source=None the trial is rank-only (no payload arithmetic), which is
    what large Monte Carlo sweeps use; the packet count statistic depends
    only on the coding vectors.  Generation indices and coding vectors are
    drawn in blocks; consumed draws are a prefix of the stream, so the
    statistics match one-packet-at-a-time sampling.
    """
    field = config.field
    n, h = config.n, config.h
    gens = [_GenerationDecoder(field, h, None if source is None else config.d) for _ in range(n)]
    draws = np.zeros(n + 1, dtype=np.int64)
    completed = np.zeros(n + 1, dtype=np.int64)
    remaining = n
    t = 0
    block = max(32, min(1024, config.N + n))
    while remaining:
        js = rng.integers(1, n + 1, size=block)
        vecs = field.random_vector(rng, (block, h))
        for i in range(block):
            j = int(js[i])
            t += 1
            draws[j] += 1
            g = gens[j - 1]
            if g.rank == h:
                continue
            payload = None if source is None else field.combine(source.generation(config, j), vecs[i])
            if g.absorb(vecs[i], payload) and g.rank == h:
                completed[j] = draws[j]
                remaining -= 1
                if not remaining:
                    break
    return TrialRecord(t, tuple(int(x) for x in completed[1:]))


def trial_csv_header(n: int) -> str:
    return "seed,N,h,n,q,d,T," + ",".join(f"N_{i}" for i in range(1, n + 1))


def trial_csv_row(seed: int, config: GenerationConfig, record: TrialRecord) -> str:
    head = f"{seed},{config.N},{config.h},{config.n},{config.field.q},{config.d},{record.total_packets}"
    return head + "," + ",".join(str(x) for x in record.generation_draws)
