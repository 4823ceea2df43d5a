"""JSON readers/writers for states, instruments, tables, process matrices and the vertex cache."""
from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Mapping

from . import __version__
from . import channels as ch
from . import process as pm
from . import tensor as tn
from . import twotime as tt
from .polytope.causal import enumerate_classical_vertices
from .polytope.table import ProbTable

CACHE_ENV = "CPK_CACHE_DIR"


def dump(obj, path=None) -> str:
    text = json.dumps(obj, indent=1, sort_keys=True) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def load(path) -> object:
    with open(path) as fh:
        return json.load(fh)


def state_to_json(state: tt.TwoTimeState) -> dict:
    return tn.to_json(state.tensor)


def state_from_json(obj: Mapping) -> tt.TwoTimeState:
    return tt.state_from_tensor(tn.from_json(obj))


def instruments_to_json(kraus: Mapping[str, Mapping[tuple[int, int], list]]) -> dict:
    return {
        party: {f"{a}|{x}": ch.kraus_to_json(k) for (a, x), k in sorted(elems.items())}
        for party, elems in kraus.items()
    }


def instruments_from_json(obj: Mapping) -> dict[str, tt.Instrument]:
    out = {}
    try:
        for party, elems in obj.items():
            kraus = {}
            for key, kj in elems.items():
                a, x = (int(v) for v in key.split("|"))
                kraus[(a, x)] = ch.kraus_from_json(kj)
            out[party] = tt.instrument_from_kraus(party, kraus)
    except (AttributeError, ValueError) as exc:
        raise ValueError(f"malformed instruments JSON: {exc}") from exc
    return out


def vertices_to_json(vertices) -> list:
    return [{"id": k, **v.to_json()} for k, v in enumerate(vertices)]


def vertices_from_json(obj) -> list[ProbTable]:
    items = sorted(obj, key=lambda d: d["id"])
    return [ProbTable.from_json(d) for d in items]


def cache_dir() -> Path | None:
    root = os.environ.get(CACHE_ENV)
    return Path(root) if root else None


def load_vertices(n_parties: int = 3) -> list[ProbTable]:
    """Classical vertices, read from the cache when a valid one exists."""
    if n_parties != 3:
        raise ValueError("vertex enumeration is implemented for three parties")
    root = cache_dir()
    path = root / f"vertices-{n_parties}.json" if root else None
    if path is not None and path.exists():
        try:
            blob = load(path)
            if blob.get("version") == __version__ and blob.get("parties") == n_parties:
                return vertices_from_json(blob["vertices"])
        except (ValueError, KeyError, TypeError):
            pass
    verts = enumerate_classical_vertices()
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        dump({"version": __version__, "parties": n_parties, "vertices": vertices_to_json(verts)}, path)
    return verts


def pm_to_json(W: pm.ProcessMatrix) -> dict:
    return pm.to_json(W)


def pm_from_json(obj: Mapping) -> pm.ProcessMatrix:
    return pm.from_json(obj)
