"""TOML experiment configs.

Link and slot numbers in config files are 1-based; everything returned here
is 0-based. Example::

    frame_length = 3
    frames = 100000
    seed = 1
    epsilon = 0.1
    w = 0                 # scalar or one value per link
    loss_tolerance = 0.1  # scalar or list
    scheduler = "auto"    # auto | max_weight | per_slot_dp | greedy_colocated

    [graph]
    colocated = 3         # or: links = 10, conflicts = [[1, 2], ...]; or builtin = "ten_link"

    [arrival]             # one table for all links, or [[arrival]] once per link
    type = "bernoulli"
    mean = 0.6

    [channel]
    kind = "per_slot"
    mean = 0.96
"""

from __future__ import annotations

from pathlib import Path
from typing import Any, Mapping

import numpy as np
import tomli

from .channel import ChannelKind, ChannelModel
from .errors import InputError
from .scheduling import SchedulerConfig
from .sim import ExperimentConfig
from .topology import InterferenceGraph
from .traffic import ArrivalModel, CountDistribution, WindowSpec


def _per_link(value, n: int, name: str) -> list:
    if isinstance(value, list):
        if len(value) != n:
            raise InputError(f"{name} has {len(value)} entries for {n} links")
        return list(value)
    return [value] * n


def parse_graph(section: Mapping[str, Any]) -> InterferenceGraph:
    if "builtin" in section:
        if section["builtin"] != "ten_link":
            raise InputError(f"unknown builtin graph {section['builtin']!r}")
        return InterferenceGraph.ten_link()
    if "colocated" in section:
        return InterferenceGraph.colocated(int(section["colocated"]))
    if "links" in section:
        edges = section.get("conflicts", [])
        return InterferenceGraph.from_edges(int(section["links"]), [(i - 1, j - 1) for i, j in edges])
    raise InputError("graph needs one of 'colocated', 'links' or 'builtin'")


def parse_distribution(spec) -> CountDistribution:
    """A count distribution from a number (constant), ``{mean=..}`` (Bernoulli) or ``{support=..}``."""
    if isinstance(spec, (int, float)) and not isinstance(spec, bool):
        return CountDistribution.constant(int(spec))
    if "support" in spec:
        return CountDistribution.from_mapping({int(k): float(v) for k, v in spec["support"].items()})
    if "mean" in spec:
        return CountDistribution.bernoulli(float(spec["mean"]))
    raise InputError(f"cannot read a count distribution from {spec!r}")


def parse_link_arrivals(spec: Mapping[str, Any], T: int) -> tuple[WindowSpec, ...]:
    kind = spec.get("type", "bernoulli")
    if kind == "bernoulli":
        return (WindowSpec(0, CountDistribution.bernoulli(float(spec["mean"])), T - 1),)
    if kind == "distribution":
        return (WindowSpec(0, parse_distribution(spec), T - 1),)
    if kind == "windowed":
        return tuple(WindowSpec(int(w["slot"]) - 1, parse_distribution(w["count"]), int(w["deadline"]) - 1)
                     for w in spec["windows"])
    raise InputError(f"unknown arrival type {kind!r}")


def parse_arrivals(spec, n: int, T: int) -> ArrivalModel:
    specs = _per_link(spec, n, "arrival")
    return ArrivalModel(T, tuple(parse_link_arrivals(s, T) for s in specs))


def parse_channel(spec: Mapping[str, Any], n: int) -> ChannelModel:
    kind = ChannelKind(spec.get("kind", "known"))
    if "support" in spec:
        sup = _per_link(spec["support"], n, "channel support")
        dists = [CountDistribution.from_mapping({int(k): float(v) for k, v in s.items()}) for s in sup]
        return ChannelModel(kind, tuple(dists))
    if "mean" in spec:
        return ChannelModel.bernoulli(kind, [float(m) for m in _per_link(spec["mean"], n, "channel mean")])
    raise InputError("channel needs 'mean' or 'support'")


def from_dict(doc: Mapping[str, Any], name: str = "experiment") -> ExperimentConfig:
    try:
        T = int(doc["frame_length"])
        graph = parse_graph(doc["graph"])
        n = graph.link_count
        arrivals = parse_arrivals(doc["arrival"], n, T)
        channel = parse_channel(doc["channel"], n)
    except KeyError as exc:
        raise InputError(f"config is missing key {exc.args[0]!r}") from None
    w = np.array(_per_link(doc.get("w", 0.0), n, "w"), dtype=float)
    p = np.array(_per_link(doc.get("loss_tolerance", 0.1), n, "loss_tolerance"), dtype=float)
    cfg = SchedulerConfig(w, float(doc.get("epsilon", 0.1)), p)
    extra = {k: doc[k] for k in ("frames", "seed", "perframe_deficit", "search_node_limit",
                                 "dp_state_limit", "trajectory_stride", "out_dir") if k in doc}
    for k in ("frames", "seed", "search_node_limit", "dp_state_limit", "trajectory_stride"):
        if k in extra:
            extra[k] = int(extra[k])
    return ExperimentConfig(graph, arrivals, channel, cfg, policy=doc.get("scheduler", "auto"),
                            name=doc.get("name", name), **extra)


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    with open(path, "rb") as fh:
        doc = tomli.load(fh)
    return from_dict(doc, name=path.stem)
