"""Per-frame arrivals with deadline windows, and coin-toss thinning."""

from __future__ import annotations

import bisect
import itertools
import warnings
from dataclasses import dataclass
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from .errors import InputError


class Window(NamedTuple):
    """Packets arriving at ``slot`` that must go out by the end of ``deadline`` (inclusive, 0-based)."""
    slot: int
    count: int
    deadline: int


@dataclass(frozen=True)
class CountDistribution:
    """Finite distribution over nonnegative integer packet counts."""

    support: tuple[int, ...]
    probs: tuple[float, ...]

    def __post_init__(self):
        if len(self.support) != len(self.probs) or not self.support:
            raise InputError("support and probabilities must be non-empty and equal length")
        if any(int(v) != v or v < 0 for v in self.support):
            raise InputError(f"support must be nonnegative integers: {self.support}")
        if any(p < 0 for p in self.probs) or abs(sum(self.probs) - 1.0) > 1e-9:
            raise InputError(f"probabilities must be nonnegative and sum to 1: {self.probs}")
        order = sorted(range(len(self.support)), key=lambda i: self.support[i])
        object.__setattr__(self, "support", tuple(int(self.support[i]) for i in order))
        object.__setattr__(self, "probs", tuple(float(self.probs[i]) for i in order))
        object.__setattr__(self, "_cdf", tuple(itertools.accumulate(self.probs)))

    @classmethod
    def bernoulli(cls, mean: float) -> "CountDistribution":
        if not 0.0 <= mean <= 1.0:
            raise InputError(f"Bernoulli mean must lie in [0, 1], got {mean}")
        return cls((0, 1), (1.0 - mean, mean))

    @classmethod
    def constant(cls, value: int) -> "CountDistribution":
        return cls((value,), (1.0,))

    @classmethod
    def from_mapping(cls, table: Mapping) -> "CountDistribution":
        items = sorted((int(k), float(v)) for k, v in table.items())
        return cls(tuple(k for k, _ in items), tuple(v for _, v in items))

    @property
    def mean(self) -> float:
        return sum(v * p for v, p in zip(self.support, self.probs))

    @property
    def variance(self) -> float:
        m = self.mean
        return sum(p * (v - m) ** 2 for v, p in zip(self.support, self.probs))

    def prob(self, value: int) -> float:
        return sum(p for v, p in zip(self.support, self.probs) if v == value)

    def sample_from_uniform(self, u: float) -> int:
        i = bisect.bisect_right(self._cdf, u)
        return self.support[min(i, len(self.support) - 1)]

    def items(self):
        return zip(self.support, self.probs)


@dataclass(frozen=True)
class WindowSpec:
    """Arrival slot, random count and deadline (both 0-based, inclusive)."""
    slot: int
    counts: CountDistribution
    deadline: int


@dataclass(frozen=True)
class ArrivalModel:
    """Frame length and, per link, an ordered tuple of disjoint window specs.

    The "frame-start" shape is a single window ``(0, dist, T-1)``.
    """

    frame_length: int
    links: tuple[tuple[WindowSpec, ...], ...]

    def __post_init__(self):
        T = self.frame_length
        if T < 1:
            raise InputError("frame_length must be at least 1")
        for l, specs in enumerate(self.links):
            last = -1
            for w in sorted(specs, key=lambda w: w.slot):
                if not (0 <= w.slot <= w.deadline < T):
                    raise InputError(f"link {l}: window {w.slot}..{w.deadline} not inside frame 0..{T - 1}")
                if w.slot <= last:
                    raise InputError(f"link {l}: overlapping deadline windows")
                last = w.deadline
        object.__setattr__(self, "links", tuple(
            tuple(sorted(s, key=lambda w: w.slot)) for s in self.links))
        for l in range(self.link_count):
            dist = self.frame_count_distribution(l)
            if dist.prob(0) == 0 or dist.prob(1) == 0:
                warnings.warn(
                    f"link {l}: Pr(a=0) and Pr(a=1) should both be positive for the deficit "
                    "chain to be irreducible and aperiodic", stacklevel=2)

    @classmethod
    def frame_start(cls, frame_length: int, dists: Sequence[CountDistribution]) -> "ArrivalModel":
        return cls(frame_length,
                   tuple((WindowSpec(0, d, frame_length - 1),) for d in dists))

    @classmethod
    def single_packet(cls, frame_length: int, n_links: int) -> "ArrivalModel":
        """One packet per link at slot 0 with deadline at the end of the frame."""
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return cls.frame_start(frame_length, [CountDistribution.constant(1)] * n_links)

    @property
    def link_count(self) -> int:
        return len(self.links)

    def frame_count_distribution(self, link: int) -> CountDistribution:
        """Distribution of the frame total ``a_l`` (convolution over windows)."""
        table = {0: 1.0}
        for w in self.links[link]:
            nxt: dict[int, float] = {}
            for v, p in table.items():
                for c, q in w.counts.items():
                    nxt[v + c] = nxt.get(v + c, 0.0) + p * q
            table = nxt
        return CountDistribution.from_mapping(table)

    def means(self) -> np.ndarray:
        return np.array([self.frame_count_distribution(l).mean for l in range(self.link_count)])

    def variances(self) -> np.ndarray:
        return np.array([self.frame_count_distribution(l).variance for l in range(self.link_count)])

    def support(self, limit: int = 4096) -> list[tuple["FrameArrivals", float]]:
        """Exact enumeration of all frames with positive probability."""
        per_window = []
        for l, specs in enumerate(self.links):
            for w in specs:
                per_window.append([(l, w, c, q) for c, q in w.counts.items() if q > 0])
        size = 1
        for opts in per_window:
            size *= len(opts)
        if size > limit:
            raise InputError(f"arrival support has {size} points, above limit {limit}")
        out = []
        for combo in itertools.product(*per_window):
            prob = 1.0
            wins: list[list[Window]] = [[] for _ in self.links]
            for l, w, c, q in combo:
                prob *= q
                if c > 0:
                    wins[l].append(Window(w.slot, c, w.deadline))
            out.append((FrameArrivals(self.frame_length, tuple(map(tuple, wins))), prob))
        return out


@dataclass(frozen=True)
class FrameArrivals:
    """Realized arrivals for one frame: per link, windows with a positive count."""

    frame_length: int
    windows: tuple[tuple[Window, ...], ...]

    @property
    def link_count(self) -> int:
        return len(self.windows)

    def totals(self) -> np.ndarray:
        return np.array([sum(w.count for w in ws) for ws in self.windows], dtype=np.int64)

    def is_empty(self) -> bool:
        return not any(self.windows)

    def validate(self) -> None:
        for l, ws in enumerate(self.windows):
            prev = -1
            for w in ws:
                if w.count <= 0 or not (prev < w.slot <= w.deadline < self.frame_length):
                    raise InputError(f"link {l}: invalid or overlapping window {w}")
                prev = w.deadline

    @classmethod
    def from_lists(cls, frame_length: int, windows: Sequence[Sequence[tuple[int, int, int]]]) -> "FrameArrivals":
        fa = cls(frame_length, tuple(tuple(Window(*w) for w in sorted(ws)) for ws in windows))
        fa.validate()
        return fa


def generate_frame(model: ArrivalModel, rng: np.random.Generator) -> FrameArrivals:
    """Draw one frame of arrivals; one uniform per window spec."""
    n_specs = sum(len(s) for s in model.links)
    u = rng.random(n_specs).tolist()
    k = 0
    out = []
    for specs in model.links:
        wins = []
        for spec in specs:
            c = spec.counts.sample_from_uniform(u[k])
            k += 1
            if c > 0:
                wins.append(Window(spec.slot, c, spec.deadline))
        out.append(tuple(wins))
    return FrameArrivals(model.frame_length, tuple(out))


def thin(a: int, p: float, rng: np.random.Generator) -> int:
    """Count heads over ``a`` coin tosses with Pr(heads) = 1 - p."""
    if not 0.0 <= p <= 1.0:
        raise InputError(f"loss tolerance must lie in [0, 1], got {p}")
    if a <= 0:
        return 0
    return int(np.count_nonzero(rng.random(a) < 1.0 - p))


def thin_all(counts: np.ndarray, p: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Per-link :func:`thin`, using one uniform per packet across all links."""
    counts = np.asarray(counts, dtype=np.int64)
    total = int(counts.sum())
    if total == 0:
        return np.zeros_like(counts)
    owner = np.repeat(np.arange(len(counts)), counts)
    heads = rng.random(total) < (1.0 - p)[owner]
    return np.bincount(owner[heads], minlength=len(counts)).astype(np.int64)
