"""Scenario configuration files.

A scenario is a single human-editable text file with five sections:

    [fluxes]
    f0 = {"family": "quadratic", "a": 0.0, "c": 1.0, "f_max": 2.0}
    f1 = {"family": "quadratic", "a": 0.0, "c": 1.0, "f_max": 1.0}
    f2 = {"family": "quadratic", "a": 0.0, "c": 1.0, "f_max": 1.0}

    [signal]
    segment = {"duration": 0.5, "phase": 1, "A": 1.0}
    segment = {"duration": 0.5, "phase": 2, "A": 1.0}

    [initial]
    branch0 = [{"from": -4.0, "to": 0.0, "rho": 0.85}]
    branch1 = 0.0
    branch2 = 0.0

    [grid]
    L = 4.0
    dx = 0.0025
    cfl = 0.9

    [run]
    model = "meso"
    eps = 0.25
    T = 2.0
    snapshots = [1.0, 2.0]

Values are JSON; a key may repeat (segment) to build a list.  Parsing
validates every structural assumption (flux shape, limiter caps, initial data
inside the density boxes) with error messages naming the violated assumption.
"""

from __future__ import annotations

import json
from typing import Callable

from .flux import FluxFunction
from .fvm import Scenario
from .germs import FluxTriple
from .signals import Signal

_GRID_DEFAULTS = {"L": 2.0, "dx": 0.01, "cfl": 0.9}
_RUN_DEFAULTS = {"model": "meso", "eps": 1.0, "T": 1.0, "snapshots": [], "name": "scenario", "merge": False}


class ScenarioError(ValueError):
    """Malformed or invalid scenario file."""


def _parse_sections(text: str) -> dict[str, list[tuple[str, object]]]:
    sections: dict[str, list[tuple[str, object]]] = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            sections.setdefault(current, [])
            continue
        if "=" not in line or current is None:
            raise ScenarioError(f"line {lineno}: expected 'key = value' inside a section")
        key, _, val = line.partition("=")
        try:
            value = json.loads(val.strip())
        except json.JSONDecodeError as e:
            raise ScenarioError(f"line {lineno}: bad JSON value for {key.strip()!r}: {e}") from e
        sections[current].append((key.strip(), value))
    return sections


def _as_dict(items: list[tuple[str, object]], multi: tuple[str, ...] = ()) -> dict:
    out: dict = {k: [] for k in multi}
    for k, v in items:
        if k in multi:
            out[k].append(v)
        elif k in out:
            raise ScenarioError(f"duplicate key {k!r}")
        else:
            out[k] = v
    return out


def _build_flux(desc) -> FluxFunction:
    if not isinstance(desc, dict) or "family" not in desc:
        raise ScenarioError("flux descriptor must be an object with a 'family' key")
    if desc["family"] == "quadratic":
        return FluxFunction.quadratic(float(desc["a"]), float(desc["c"]), float(desc["f_max"]))
    if desc["family"] == "sampled":
        return FluxFunction.from_samples(desc["points"])
    raise ScenarioError(f"unknown flux family {desc['family']!r}")


def _build_init(desc, lo: float, hi: float, f: FluxFunction, label: str) -> Callable[[float], float]:
    if isinstance(desc, (int, float)):
        pieces = [{"from": lo, "to": hi, "rho": float(desc)}]
    elif isinstance(desc, list):
        pieces = desc
    else:
        raise ScenarioError(f"{label}: initial data must be a number or a list of pieces")
    for p in pieces:
        rho = float(p["rho"])
        if rho < f.a - 1e-12 or rho > f.c + 1e-12:
            raise ScenarioError(
                f"{label}: initial density {rho} outside the branch box [{f.a}, {f.c}]"
            )
    parsed = [(float(p["from"]), float(p["to"]), float(p["rho"])) for p in pieces]

    def init(x: float) -> float:
        for x0, x1, rho in parsed:
            if x0 <= x <= x1:
                return rho
        return float(parsed[0][2])

    return init


def parse_scenario(text: str) -> Scenario:
    """Parse and fully validate a scenario description."""
    sections = _parse_sections(text)
    for required in ("fluxes", "signal"):
        if required not in sections:
            raise ScenarioError(f"missing required section [{required}]")

    fl = _as_dict(sections["fluxes"])
    try:
        fluxes = FluxTriple(_build_flux(fl["f0"]), _build_flux(fl["f1"]), _build_flux(fl["f2"]))
    except KeyError as e:
        raise ScenarioError(f"[fluxes] must define f0, f1 and f2 (missing {e})") from e

    sig_items = _as_dict(sections["signal"], multi=("segment",))
    if not sig_items["segment"]:
        raise ScenarioError("[signal] needs at least one 'segment' entry")
    entries = []
    for seg in sig_items["segment"]:
        try:
            entries.append((float(seg["duration"]), float(seg["A"]), int(seg["phase"])))
        except (KeyError, TypeError) as e:
            raise ScenarioError(f"signal segment needs duration, A and phase: {seg}") from e
    signal = Signal.from_durations(entries)
    # the limiter may never exceed either adjacent road's capacity
    signal.validate_caps(fluxes.f0.f_max, fluxes.f1.f_max, fluxes.f2.f_max)

    grid = {**_GRID_DEFAULTS, **_as_dict(sections.get("grid", []))}
    run = {**_RUN_DEFAULTS, **_as_dict(sections.get("run", []))}
    if run["model"] not in ("meso", "macro"):
        raise ScenarioError("run model must be 'meso' or 'macro'")

    L = float(grid["L"])
    init_items = _as_dict(sections.get("initial", []))
    # merge orientation: road 0 leaves the node on x >= 0, roads 1-2 feed it
    if run["merge"]:
        boxes = [(0.0, L), (-L, 0.0), (-L, 0.0)]
    else:
        boxes = [(-L, 0.0), (0.0, L), (0.0, L)]
    inits = tuple(
        _build_init(init_items.get(f"branch{j}", fluxes[j].a), *boxes[j], fluxes[j], f"branch{j}")
        for j in range(3)
    )

    return Scenario(
        fluxes=fluxes,
        signal=signal,
        model=str(run["model"]),
        eps=float(run["eps"]),
        T=float(run["T"]),
        L=L,
        dx=float(grid["dx"]),
        init=inits,
        merge=bool(run["merge"]),
        cfl=float(grid["cfl"]),
        snapshot_times=tuple(float(t) for t in run["snapshots"]),
        name=str(run["name"]),
    )


def load_scenario(path) -> Scenario:
    with open(path) as fh:
        return parse_scenario(fh.read())


def serialize_scenario(text: str) -> str:
    """Canonical re-serialization of a scenario file (parse + emit).

    Round-trip property: parse(serialize(t)) describes the same scenario as
    parse(t).
    """
    sections = _parse_sections(text)
    out = []
    for name in ("fluxes", "signal", "initial", "grid", "run"):
        if name not in sections:
            continue
        out.append(f"[{name}]")
        for k, v in sections[name]:
            out.append(f"{k} = {json.dumps(v)}")
        out.append("")
    return "\n".join(out)
