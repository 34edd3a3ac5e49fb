"""
Experiment Layouts - sources, PBS gates, PCM stations and coincidence rules.

Photon ids follow the 2x2 demonstration: six EPR sources emit photons
(1,2) ... (11,12); a PBS on 5&7 fuses the two middle pairs into a GHZ4 on
5,6,7,8; PCM stations act on 2&6, 3&7, 5&9 and 8&12. A coincidence
condition says which station readings and analyzer clicks make a success
and which photons then form the final pair.

Layouts round-trip through plain dicts so they can live in JSON or YAML.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import orjson
import yaml

from core.errors import ConfigError


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SourceSpec:
    source_id: int
    photons: tuple  # (mode a, mode b)


@dataclass(frozen=True)
class PbsSpec:
    photons: tuple
    point: str = "pbs"  # overlap-point id for the visibility lookup


@dataclass(frozen=True)
class StationSpec:
    """
    A PCM on one or two photons. ``x_target`` receives the X correction of a
    psi_plus result; ``single_photon`` is the photon expected alone on a
    single-click reading (the GHZ side).
    """
    station_id: str
    photons: tuple
    x_target: Optional[int] = None
    single_photon: Optional[int] = None

    def side_of(self, photon: int) -> str:
        """CPBS input ('a' or 'b') a lone photon entered through."""
        if len(self.photons) == 1 or photon != self.photons[0]:
            return "b"
        return "a"


@dataclass(frozen=True)
class ArmSpec:
    station: str
    herald: int  # analyzer photon: clicks when this arm is the Bell arm


@dataclass(frozen=True)
class NodeSpec:
    name: str
    arms: tuple


@dataclass(frozen=True)
class CoincidenceCondition:
    """
    Success rule. Each node needs exactly one Bell arm whose herald clicks
    while every other arm gives a single click with its herald silent.
    Plain ``bell_stations`` / ``single_stations`` must read Bell / single
    and every ``analyzers`` photon must click. ``correction_target`` takes
    the Z parity correction; ``None`` means the first photon of the pair.
    """
    name: str
    sources: tuple
    nodes: tuple = ()
    bell_stations: tuple = ()
    single_stations: tuple = ()
    analyzers: tuple = ()
    correction_target: Optional[int] = None

    def stations(self) -> tuple:
        ids = [arm.station for node in self.nodes for arm in node.arms]
        return tuple(ids) + tuple(self.bell_stations) + tuple(self.single_stations)


@dataclass(frozen=True)
class ExperimentLayout:
    name: str
    sources: tuple
    elements: tuple = ()
    pcms: tuple = ()
    conditions: tuple = ()
    final_candidates: tuple = ()

    def __post_init__(self):
        validate_layout(self)

    @property
    def photons(self) -> tuple:
        return tuple(p for s in self.sources for p in s.photons)

    def source(self, source_id: int) -> SourceSpec:
        for s in self.sources:
            if s.source_id == source_id:
                return s
        raise KeyError(source_id)

    def source_of(self, photon: int) -> SourceSpec:
        for s in self.sources:
            if photon in s.photons:
                return s
        raise KeyError(photon)

    def station(self, station_id: str) -> StationSpec:
        for st in self.pcms:
            if st.station_id == station_id:
                return st
        raise KeyError(station_id)

    def condition(self, name: str) -> CoincidenceCondition:
        for c in self.conditions:
            if c.name == name:
                return c
        raise KeyError(name)

    def ghz_photons(self) -> tuple:
        """Photons of every source touched by a PBS gate."""
        out = []
        for gate in self.elements:
            for p in gate.photons:
                out.extend(self.source_of(p).photons)
        return tuple(sorted(set(out)))

    def to_dict(self) -> dict:
        return layout_to_dict(self)


def validate_layout(layout: ExperimentLayout) -> None:
    photons = layout.photons
    if len(photons) != len(set(photons)):
        raise ConfigError(f"layout {layout.name}: photon ids are not unique")
    known = set(photons)
    source_ids = [s.source_id for s in layout.sources]
    if len(source_ids) != len(set(source_ids)):
        raise ConfigError(f"layout {layout.name}: source ids are not unique")
    for s in layout.sources:
        if len(s.photons) != 2:
            raise ConfigError(f"source {s.source_id} must emit exactly two photons")
    for gate in layout.elements:
        if len(gate.photons) != 2 or not set(gate.photons) <= known:
            raise ConfigError(f"PBS {gate.photons} acts on unknown photons")
    station_inputs = set()
    station_ids = set()
    for st in layout.pcms:
        if st.station_id in station_ids:
            raise ConfigError(f"duplicate station id {st.station_id}")
        station_ids.add(st.station_id)
        if len(st.photons) not in (1, 2) or not set(st.photons) <= known:
            raise ConfigError(f"station {st.station_id}: inputs must be one or two layout photons")
        if st.x_target is not None and st.x_target not in known:
            raise ConfigError(f"station {st.station_id}: unknown correction photon {st.x_target}")
        station_inputs.update(st.photons)
    for pair in layout.final_candidates:
        if set(pair) & station_inputs:
            raise ConfigError(f"final candidate {pair} overlaps PCM inputs")
        if not set(pair) <= known:
            raise ConfigError(f"final candidate {pair} uses unknown photons")
    for cond in layout.conditions:
        for sid in cond.sources:
            if sid not in source_ids:
                raise ConfigError(f"condition {cond.name}: unknown source {sid}")
        for st in cond.stations():
            if st not in station_ids:
                raise ConfigError(f"condition {cond.name}: unknown station {st}")
        for node in cond.nodes:
            if len(node.arms) < 2:
                raise ConfigError(f"node {node.name} needs at least two arms")


# =========================
# Built-in layouts
# =========================

def _sources() -> tuple:
    return tuple(SourceSpec(i + 1, (2 * i + 1, 2 * i + 2)) for i in range(6))


_CANDIDATES = ((1, 11), (4, 11), (1, 10), (4, 10))


def layout_all_photonic_2x2() -> ExperimentLayout:
    pcms = (
        StationSpec("P2_6", (2, 6), x_target=1, single_photon=6),
        StationSpec("P3_7", (3, 7), x_target=4, single_photon=7),
        StationSpec("P5_9", (5, 9), x_target=10, single_photon=5),
        StationSpec("P8_12", (8, 12), x_target=11, single_photon=8),
    )
    condition = CoincidenceCondition(
        name="all_photonic",
        sources=(1, 2, 3, 4, 5, 6),
        nodes=(
            NodeSpec("A", (ArmSpec("P2_6", 1), ArmSpec("P3_7", 4))),
            NodeSpec("B", (ArmSpec("P5_9", 10), ArmSpec("P8_12", 11))),
        ),
    )
    return ExperimentLayout(
        name="all-photonic",
        sources=_sources(),
        elements=(PbsSpec((5, 7)),),
        pcms=pcms,
        conditions=(condition,),
        final_candidates=_CANDIDATES,
    )


def _upper() -> tuple:
    stations = (
        StationSpec("P2_6", (2, 6), x_target=1),
        StationSpec("P8_12", (8, 12), x_target=11),
        StationSpec("X7", (7,)),
        StationSpec("X5", (5,)),
    )
    condition = CoincidenceCondition(
        name="conventional_upper",
        sources=(1, 3, 4, 6),
        bell_stations=("P2_6", "P8_12"),
        single_stations=("X7", "X5"),
        analyzers=(1, 11),
        correction_target=1,
    )
    return stations, condition


def _lower() -> tuple:
    stations = (
        StationSpec("P3_7", (3, 7), x_target=4),
        StationSpec("P5_9", (5, 9), x_target=10),
        StationSpec("X6", (6,)),
        StationSpec("X8", (8,)),
    )
    condition = CoincidenceCondition(
        name="conventional_lower",
        sources=(2, 3, 4, 5),
        bell_stations=("P3_7", "P5_9"),
        single_stations=("X6", "X8"),
        analyzers=(4, 10),
        correction_target=4,
    )
    return stations, condition


def layout_conventional_2x2(channel: str = "both") -> ExperimentLayout:
    """Parallel entanglement swapping: the cross PCMs become plain X stages."""
    parts = {"upper": [_upper()], "lower": [_lower()], "both": [_upper(), _lower()]}
    if channel not in parts:
        raise ConfigError(f"unknown channel {channel!r} (upper, lower or both)")
    stations, conditions = [], []
    for st, cond in parts[channel]:
        stations.extend(st)
        conditions.append(cond)
    name = "conventional" if channel == "both" else f"conventional-{channel}"
    return ExperimentLayout(
        name=name,
        sources=_sources(),
        elements=(PbsSpec((5, 7)),),
        pcms=tuple(stations),
        conditions=tuple(conditions),
        final_candidates=_CANDIDATES,
    )


BUILTIN_LAYOUTS = {
    "all-photonic": layout_all_photonic_2x2,
    "conventional": lambda: layout_conventional_2x2("both"),
    "conventional-upper": lambda: layout_conventional_2x2("upper"),
    "conventional-lower": lambda: layout_conventional_2x2("lower"),
}


# =========================
# Serialization
# =========================

def layout_to_dict(layout: ExperimentLayout) -> dict:
    def station(st: StationSpec) -> dict:
        out = {"id": st.station_id, "photons": list(st.photons)}
        if st.x_target is not None:
            out["x_target"] = st.x_target
        if st.single_photon is not None:
            out["single_photon"] = st.single_photon
        return out

    def condition(c: CoincidenceCondition) -> dict:
        out = {"name": c.name, "sources": list(c.sources)}
        if c.nodes:
            out["nodes"] = [
                {"name": n.name, "arms": [{"station": a.station, "herald": a.herald} for a in n.arms]}
                for n in c.nodes
            ]
        for key in ("bell_stations", "single_stations", "analyzers"):
            if getattr(c, key):
                out[key] = list(getattr(c, key))
        if c.correction_target is not None:
            out["correction_target"] = c.correction_target
        return out

    return {
        "name": layout.name,
        "sources": [{"id": s.source_id, "photons": list(s.photons)} for s in layout.sources],
        "pbs": [{"photons": list(g.photons), "point": g.point} for g in layout.elements],
        "stations": [station(st) for st in layout.pcms],
        "conditions": [condition(c) for c in layout.conditions],
        "final_candidates": [list(p) for p in layout.final_candidates],
    }


def layout_from_dict(data: dict) -> ExperimentLayout:
    try:
        sources = tuple(SourceSpec(int(s["id"]), tuple(s["photons"])) for s in data["sources"])
        elements = tuple(PbsSpec(tuple(g["photons"]), g.get("point", "pbs")) for g in data.get("pbs", []))
        pcms = tuple(
            StationSpec(st["id"], tuple(st["photons"]), st.get("x_target"), st.get("single_photon"))
            for st in data.get("stations", [])
        )
        conditions = []
        for c in data.get("conditions", []):
            nodes = tuple(
                NodeSpec(n["name"], tuple(ArmSpec(a["station"], int(a["herald"])) for a in n["arms"]))
                for n in c.get("nodes", [])
            )
            conditions.append(
                CoincidenceCondition(
                    name=c["name"],
                    sources=tuple(c["sources"]),
                    nodes=nodes,
                    bell_stations=tuple(c.get("bell_stations", ())),
                    single_stations=tuple(c.get("single_stations", ())),
                    analyzers=tuple(c.get("analyzers", ())),
                    correction_target=c.get("correction_target"),
                )
            )
        return ExperimentLayout(
            name=data.get("name", "custom"),
            sources=sources,
            elements=elements,
            pcms=pcms,
            conditions=tuple(conditions),
            final_candidates=tuple(tuple(p) for p in data.get("final_candidates", [])),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"malformed layout: {e}") from e


def dump_layout(layout: ExperimentLayout, fmt: str = "yaml") -> str:
    data = layout_to_dict(layout)
    if fmt == "json":
        return orjson.dumps(data, option=orjson.OPT_INDENT_2).decode()
    return yaml.safe_dump(data, sort_keys=False)


def load_layout(spec: Union[str, Path]) -> ExperimentLayout:
    """Built-in name or path to a JSON/YAML layout file."""
    if str(spec) in BUILTIN_LAYOUTS:
        return BUILTIN_LAYOUTS[str(spec)]()
    path = Path(spec)
    if not path.exists():
        raise ConfigError(f"no built-in layout or file named {spec}")
    text = path.read_text()
    try:
        data = orjson.loads(text) if path.suffix == ".json" else yaml.safe_load(text)
    except (orjson.JSONDecodeError, yaml.YAMLError) as e:
        raise ConfigError(f"cannot parse layout file {path}: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"layout file {path} must hold a mapping")
    layout = layout_from_dict(data)
    logger.info(f"Loaded layout {layout.name} from {path}")
    return layout
