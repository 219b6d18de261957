"""Channel models for the three information regimes and the visibility guard.

Realizations are drawn up front for the whole frame (so a single seed fixes
them regardless of scheduler decisions) and revealed to schedulers only
through :class:`ChannelGuard`.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import InputError, VisibilityError
from .traffic import CountDistribution


class ChannelKind(str, enum.Enum):
    KNOWN = "known"
    PER_FRAME = "per_frame"
    PER_SLOT = "per_slot"

    @property
    def visibility(self) -> str:
        return {"known": "start-of-frame", "per_frame": "end-of-frame",
                "per_slot": "end-of-slot"}[self.value]


@dataclass(frozen=True)
class ChannelModel:
    kind: ChannelKind
    dists: tuple[CountDistribution, ...]

    def __post_init__(self):
        object.__setattr__(self, "kind", ChannelKind(self.kind))
        if self.kind is not ChannelKind.KNOWN:
            for l, d in enumerate(self.dists):
                if not set(d.support) <= {0, 1}:
                    raise InputError(f"link {l}: unknown-channel models are Bernoulli, got support {d.support}")

    @classmethod
    def known(cls, dists: Sequence[CountDistribution]) -> "ChannelModel":
        return cls(ChannelKind.KNOWN, tuple(dists))

    @classmethod
    def bernoulli(cls, kind: ChannelKind | str, means: Sequence[float]) -> "ChannelModel":
        return cls(ChannelKind(kind), tuple(CountDistribution.bernoulli(float(m)) for m in means))

    @property
    def link_count(self) -> int:
        return len(self.dists)

    def mean_rates(self) -> np.ndarray:
        return np.array([d.mean for d in self.dists])

    def support(self, limit: int = 4096) -> list[tuple[np.ndarray, float]]:
        """Exact enumeration of per-frame rate vectors (frame-constant kinds only)."""
        if self.kind is ChannelKind.PER_SLOT:
            raise InputError("per-slot channels have no frame-level rate support")
        opts = [[(v, p) for v, p in d.items() if p > 0] for d in self.dists]
        size = int(np.prod([len(o) for o in opts]))
        if size > limit:
            raise InputError(f"channel support has {size} points, above limit {limit}")
        out = []
        for combo in itertools.product(*opts):
            out.append((np.array([v for v, _ in combo], dtype=np.int64),
                        float(np.prod([p for _, p in combo]))))
        return out


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    """Ground truth for one frame; ``outcomes[l, t]`` is the rate of link l in slot t.

    Frame-constant kinds repeat the same column in every slot.
    """

    kind: ChannelKind
    outcomes: np.ndarray

    def __post_init__(self):
        self.outcomes.setflags(write=False)

    @classmethod
    def constant(cls, kind: ChannelKind | str, rates: Sequence[int], frame_length: int) -> "ChannelRealization":
        r = np.asarray(rates, dtype=np.int64)
        return cls(ChannelKind(kind), np.repeat(r[:, None], frame_length, axis=1))

    @classmethod
    def per_slot(cls, outcomes) -> "ChannelRealization":
        return cls(ChannelKind.PER_SLOT, np.asarray(outcomes, dtype=np.int64))

    @property
    def visibility(self) -> str:
        return self.kind.visibility

    @property
    def rates(self) -> np.ndarray:
        if self.kind is ChannelKind.PER_SLOT:
            raise InputError("per-slot realizations have no single per-frame rate")
        return self.outcomes[:, 0]

    @property
    def frame_length(self) -> int:
        return self.outcomes.shape[1]


def sample_channel(model: ChannelModel, frame_length: int, rng: np.random.Generator) -> ChannelRealization:
    n = model.link_count
    if model.kind is ChannelKind.PER_SLOT:
        means = model.mean_rates()
        out = (rng.random((n, frame_length)) < means[:, None]).astype(np.int64)
        return ChannelRealization(model.kind, out)
    u = rng.random(n).tolist()
    rates = [d.sample_from_uniform(x) for d, x in zip(model.dists, u)]
    return ChannelRealization.constant(model.kind, rates, frame_length)


@dataclass(frozen=True, eq=False)
class ChannelKnowledge:
    """What a scheduler may know at the start of a slot."""
    rates: np.ndarray | None
    history: dict[tuple[int, int], int]


def visible_information(realization: ChannelRealization, slot: int,
                        attempts: np.ndarray | None = None) -> ChannelKnowledge:
    """Channel knowledge available at the start of 0-based ``slot``.

    Known channels expose the full rate vector. Per-frame feedback exposes
    nothing during the frame. Per-slot feedback exposes the outcome of every
    attempted ``(link, slot')`` with ``slot' < slot``.
    """
    if not 0 <= slot < realization.frame_length:
        raise InputError(f"slot {slot} outside frame 0..{realization.frame_length - 1}")
    kind = realization.kind
    if kind is ChannelKind.KNOWN:
        return ChannelKnowledge(realization.rates.copy(), {})
    if kind is ChannelKind.PER_FRAME:
        return ChannelKnowledge(None, {})
    history = {}
    if attempts is not None:
        for l, t in zip(*np.nonzero(np.asarray(attempts)[:, :slot])):
            history[(int(l), int(t))] = int(realization.outcomes[l, t])
    return ChannelKnowledge(None, history)


@dataclass
class ChannelGuard:
    """Read-only, visibility-enforcing view of a realization handed to schedulers.

    Every read is appended to ``reads``; any read outside what
    :func:`visible_information` would expose raises :class:`VisibilityError`
    and is logged in ``violations``.
    """

    realization: ChannelRealization
    slot: int = 0
    reads: list = field(default_factory=list)
    violations: list = field(default_factory=list)
    _attempts: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self._attempts = np.zeros_like(self.realization.outcomes)

    def _deny(self, what: str):
        self.violations.append(what)
        raise VisibilityError(what)

    def rates(self) -> np.ndarray:
        self.reads.append(("rates", self.slot))
        if self.realization.kind is not ChannelKind.KNOWN:
            self._deny(f"rates() read on a {self.realization.kind.value} channel")
        return self.realization.rates.copy()

    def outcome(self, link: int, slot: int) -> int:
        self.reads.append(("outcome", link, slot))
        if self.realization.kind is not ChannelKind.PER_SLOT:
            self._deny(f"outcome({link}, {slot}) read during the frame on a "
                       f"{self.realization.kind.value} channel")
        if slot >= self.slot or not self._attempts[link, slot]:
            self._deny(f"outcome({link}, {slot}) not yet revealed at slot {self.slot}")
        return int(self.realization.outcomes[link, slot])

    def transmit(self, links: Iterable[int]) -> dict[int, int]:
        """Attempt ``links`` in the current slot, advance, and return their ACK outcomes."""
        t = self.slot
        if t >= self.realization.frame_length:
            self._deny("transmit() after the end of the frame")
        links = list(links)
        for l in links:
            self._attempts[l, t] = 1
        self.slot = t + 1
        return {l: self.outcome(l, t) for l in links}

    def knowledge(self) -> ChannelKnowledge:
        return visible_information(self.realization, min(self.slot, self.realization.frame_length - 1),
                                   self._attempts)
