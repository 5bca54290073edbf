"""Chain and system documents: strict JSON with decimal-string numerics.

Every numeric value is a decimal string parsed once to a 64-bit float, and
serialization emits ``repr(float)``, so parse → serialize → parse is
bit-identical.  Unknown fields are rejected everywhere — fixture files
double as test vectors and silent extra keys would mask typos.

Chain documents (schema ``chain/1``) carry the alphabet, the states with
their output labels, the initial measure as an id → probability map (ids
omitted are zero), and transitions either as a dense row-major matrix or as
sparse ``{from, to, p}`` triplets; triplets are what the serializer emits.

System documents (schema ``system/1``) carry the box bounds, the alphabet,
and the region list; a region without a ``map`` gets the identity.  The
tiling (disjointness, exact volume coverage) and closure of the declared
maps are verified on load.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .chain import Alphabet, LabeledMarkovChain, validate_chain
from .dynsys import AffineMap, Box, PiecewiseAffineSystem, Region, check_closure, validate_system
from .errors import CoveringError, ParseError, ValidationError

CHAIN_SCHEMA = "chain/1"
SYSTEM_SCHEMA = "system/1"


def _load_document(text: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise ParseError(f"line {err.lineno}, column {err.colno}: {err.msg}") from err
    if not isinstance(doc, dict):
        raise ParseError("the document root must be an object")
    return doc


def _check_fields(obj: dict, required: set[str], optional: set[str], context: str) -> None:
    for key in obj:
        if key not in required and key not in optional:
            raise ParseError(f"{context}: unknown field {key!r}")
    for key in required:
        if key not in obj:
            raise ParseError(f"{context}: missing field {key!r}")


def _number(value: object, context: str) -> float:
    if not isinstance(value, str):
        raise ParseError(f"{context}: numbers must be decimal strings, got {value!r}")
    try:
        return float(value)
    except ValueError as err:
        raise ParseError(f"{context}: {value!r} is not a decimal number") from err


def _vector(value: object, context: str) -> tuple[float, ...]:
    if not isinstance(value, list):
        raise ParseError(f"{context}: expected a list of decimal strings")
    return tuple(_number(v, f"{context}[{i}]") for i, v in enumerate(value))


def _alphabet(doc: dict, context: str) -> Alphabet:
    symbols = doc.get("alphabet")
    if not isinstance(symbols, list) or not all(isinstance(s, str) for s in symbols):
        raise ParseError(f"{context}: alphabet must be a list of symbol names")
    try:
        return Alphabet(tuple(symbols))
    except ValueError as err:
        raise ParseError(f"{context}: {err}") from err


# --------------------------------------------------------------------------
# Chains


def parse_chain(text: str) -> LabeledMarkovChain:
    doc = _load_document(text)
    _check_fields(doc, {"schema", "alphabet", "states", "initial", "transitions"}, set(), "chain")
    if doc["schema"] != CHAIN_SCHEMA:
        raise ParseError(f"chain: unsupported schema {doc['schema']!r}")
    alphabet = _alphabet(doc, "chain")
    if not isinstance(doc["states"], list) or not doc["states"]:
        raise ParseError("chain: states must be a nonempty list")
    ids: list[str] = []
    labels: list[int] = []
    for i, state in enumerate(doc["states"]):
        context = f"states[{i}]"
        if not isinstance(state, dict):
            raise ParseError(f"{context}: expected an object")
        _check_fields(state, {"id", "label"}, set(), context)
        sid, label = state["id"], state["label"]
        if not isinstance(sid, str) or not isinstance(label, str):
            raise ParseError(f"{context}: id and label must be strings")
        if sid in ids:
            raise ParseError(f"{context}: duplicate state id {sid!r}")
        try:
            labels.append(alphabet.index(label))
        except ValueError as err:
            raise ParseError(f"{context}: {err}") from err
        ids.append(sid)
    index = {sid: k for k, sid in enumerate(ids)}
    n = len(ids)

    initial = np.zeros(n)
    if not isinstance(doc["initial"], dict):
        raise ParseError("chain: initial must be an id → probability map")
    for sid, value in doc["initial"].items():
        if sid not in index:
            raise ParseError(f"initial: unknown state id {sid!r}")
        initial[index[sid]] = _number(value, f"initial[{sid}]")

    transition = np.zeros((n, n))
    rows = doc["transitions"]
    if isinstance(rows, list) and rows and isinstance(rows[0], list):
        if len(rows) != n:
            raise ParseError(f"transitions: expected {n} rows, got {len(rows)}")
        for i, row in enumerate(rows):
            if not isinstance(row, list) or len(row) != n:
                raise ParseError(f"transitions[{i}]: expected {n} entries")
            transition[i] = [_number(v, f"transitions[{i}][{j}]") for j, v in enumerate(row)]
    elif isinstance(rows, list):
        seen: set[tuple[str, str]] = set()
        for i, entry in enumerate(rows):
            context = f"transitions[{i}]"
            if not isinstance(entry, dict):
                raise ParseError(f"{context}: expected an object")
            _check_fields(entry, {"from", "to", "p"}, set(), context)
            src, dst = entry["from"], entry["to"]
            if src not in index or dst not in index:
                raise ParseError(f"{context}: unknown state id")
            if (src, dst) in seen:
                raise ParseError(f"{context}: duplicate edge {src!r} -> {dst!r}")
            seen.add((src, dst))
            transition[index[src], index[dst]] = _number(entry["p"], context)
    else:
        raise ParseError("chain: transitions must be a matrix or a list of triplets")

    try:
        chain = LabeledMarkovChain(
            alphabet=alphabet,
            transition=transition,
            initial=initial,
            labels=np.array(labels, dtype=np.intp),
        )
    except ValueError as err:
        raise ParseError(f"chain: {err}") from err
    report = validate_chain(chain)
    if report:
        raise ValidationError("; ".join(report))
    return chain


def serialize_chain(chain: LabeledMarkovChain, state_ids: list[str] | None = None) -> str:
    ids = state_ids if state_ids is not None else [f"s{i}" for i in range(chain.n_states)]
    if len(ids) != chain.n_states or len(set(ids)) != chain.n_states:
        raise ValueError("state ids must be distinct and one per state")
    doc = {
        "schema": CHAIN_SCHEMA,
        "alphabet": list(chain.alphabet.symbols),
        "states": [
            {"id": ids[i], "label": chain.alphabet.symbols[chain.labels[i]]}
            for i in range(chain.n_states)
        ],
        "initial": {
            ids[i]: repr(float(chain.initial[i]))
            for i in range(chain.n_states)
            if chain.initial[i] != 0.0
        },
        "transitions": [
            {"from": ids[i], "to": ids[j], "p": repr(float(chain.transition[i, j]))}
            for i in range(chain.n_states)
            for j in range(chain.n_states)
            if chain.transition[i, j] != 0.0
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def load_chain(path: str | Path) -> LabeledMarkovChain:
    try:
        text = Path(path).read_text()
    except OSError as err:
        raise ParseError(f"{path}: {err}") from err
    try:
        return parse_chain(text)
    except (ParseError, ValidationError) as err:
        raise type(err)(f"{path}: {err}") from err


def save_chain(chain: LabeledMarkovChain, path: str | Path) -> None:
    Path(path).write_text(serialize_chain(chain))


# --------------------------------------------------------------------------
# Systems


def parse_system(text: str, closure_samples: int = 10_000) -> PiecewiseAffineSystem:
    doc = _load_document(text)
    _check_fields(doc, {"schema", "space", "alphabet", "regions"}, set(), "system")
    if doc["schema"] != SYSTEM_SCHEMA:
        raise ParseError(f"system: unsupported schema {doc['schema']!r}")
    alphabet = _alphabet(doc, "system")
    space_obj = doc["space"]
    if not isinstance(space_obj, dict):
        raise ParseError("system: space must be an object")
    _check_fields(space_obj, {"lower", "upper"}, set(), "space")
    try:
        space = Box(_vector(space_obj["lower"], "space.lower"),
                    _vector(space_obj["upper"], "space.upper"))
    except ValueError as err:
        raise ParseError(f"space: {err}") from err

    if not isinstance(doc["regions"], list) or not doc["regions"]:
        raise ParseError("system: regions must be a nonempty list")
    regions: list[Region] = []
    names: set[str] = set()
    for i, obj in enumerate(doc["regions"]):
        context = f"regions[{i}]"
        if not isinstance(obj, dict):
            raise ParseError(f"{context}: expected an object")
        _check_fields(obj, {"name", "lower", "upper", "label"}, {"map"}, context)
        name = obj["name"]
        if not isinstance(name, str) or name in names:
            raise ParseError(f"{context}: region names must be distinct strings")
        names.add(name)
        if not isinstance(obj["label"], str):
            raise ParseError(f"{context}: label must be a symbol name")
        try:
            label = alphabet.index(obj["label"])
        except ValueError as err:
            raise ParseError(f"{context}: {err}") from err
        try:
            box = Box(_vector(obj["lower"], f"{context}.lower"),
                      _vector(obj["upper"], f"{context}.upper"))
        except ValueError as err:
            raise ParseError(f"{context}: {err}") from err
        map_ = None
        if "map" in obj:
            map_obj = obj["map"]
            if not isinstance(map_obj, dict):
                raise ParseError(f"{context}.map: expected an object")
            _check_fields(map_obj, {"matrix", "offset"}, set(), f"{context}.map")
            if not isinstance(map_obj["matrix"], list):
                raise ParseError(f"{context}.map.matrix: expected a list of rows")
            matrix = tuple(
                _vector(row, f"{context}.map.matrix[{r}]")
                for r, row in enumerate(map_obj["matrix"])
            )
            try:
                map_ = AffineMap(matrix, _vector(map_obj["offset"], f"{context}.map.offset"))
            except ValueError as err:
                raise ParseError(f"{context}.map: {err}") from err
        try:
            regions.append(Region(name, box, label, map_))
        except ValueError as err:
            raise ParseError(f"{context}: {err}") from err

    sys = PiecewiseAffineSystem(space, alphabet, regions, validate=False)
    report = validate_system(sys)
    coverage = [line for line in report if "cover" in line]
    other = [line for line in report if "cover" not in line]
    if other:
        raise ValidationError("; ".join(other))
    if coverage:
        raise CoveringError("; ".join(coverage))
    escapes = check_closure(sys, samples=closure_samples)
    if escapes:
        raise ValidationError("; ".join(escapes))
    return sys


def serialize_system(sys: PiecewiseAffineSystem) -> str:
    def vec(values: tuple[float, ...]) -> list[str]:
        return [repr(float(v)) for v in values]

    regions = []
    for r in sys.regions:
        obj: dict = {
            "name": r.name,
            "lower": vec(r.box.lower),
            "upper": vec(r.box.upper),
            "label": sys.alphabet.symbols[r.label],
        }
        assert r.map is not None
        if r.map != AffineMap.identity(sys.dimension):
            obj["map"] = {
                "matrix": [vec(row) for row in r.map.matrix],
                "offset": vec(r.map.offset),
            }
        regions.append(obj)
    doc = {
        "schema": SYSTEM_SCHEMA,
        "space": {"lower": vec(sys.space.lower), "upper": vec(sys.space.upper)},
        "alphabet": list(sys.alphabet.symbols),
        "regions": regions,
    }
    return json.dumps(doc, indent=2) + "\n"


def load_system(path: str | Path) -> PiecewiseAffineSystem:
    try:
        text = Path(path).read_text()
    except OSError as err:
        raise ParseError(f"{path}: {err}") from err
    try:
        return parse_system(text)
    except (ParseError, ValidationError, CoveringError) as err:
        raise type(err)(f"{path}: {err}") from err


def save_system(sys: PiecewiseAffineSystem, path: str | Path) -> None:
    Path(path).write_text(serialize_system(sys))
