"""JSON instance files and inline ranking strings.

Instance file layout (elements 1-based, rationals as ``"p/q"`` strings)::

    {
      "d": 4,
      "groups": [[1, 2], [3, 4]],
      "alpha": ["1/2", "1/2"],
      "beta": ["1/2", "1/2"],
      "k": 2,
      "mode": "block",
      "block": 2,
      "rankings": [[1, 3, 2, 4]]
    }

``"block"`` is present exactly when ``"mode"`` is ``"block"``.
"""

from __future__ import annotations

import json

from fairrank.core import (
    FairnessSpec,
    GroupAssignment,
    Instance,
    Mode,
    Ranking,
    ValidationError,
    parse_rational,
)

KEYS = ("d", "groups", "alpha", "beta", "k", "mode", "block", "rankings")


class InstanceFormatError(ValidationError):
    pass


def _int(doc, key, where=None):
    value = doc[key] if where is None else where
    if isinstance(value, bool) or not isinstance(value, int):
        raise InstanceFormatError(f"field '{key}': expected an integer, got {value!r}")
    return value


def _int_list(value, field):
    if not isinstance(value, list):
        raise InstanceFormatError(f"field '{field}': expected a list of integers")
    for i, x in enumerate(value):
        if isinstance(x, bool) or not isinstance(x, int):
            raise InstanceFormatError(f"field '{field}[{i}]': expected an integer, got {x!r}")
    return value


def parse_ranking_text(text: str, d: int | None = None) -> Ranking:
    """Parse ``"3 1 2"`` (commas also accepted) as a 1-based ranking."""
    parts = text.replace(",", " ").split()
    try:
        values = [int(p) for p in parts]
    except ValueError:
        raise InstanceFormatError(f"ranking {text!r}: expected integers") from None
    r = Ranking.from_one_based(values) if values else None
    if r is None:
        raise InstanceFormatError("empty ranking")
    if d is not None and r.d != d:
        raise InstanceFormatError(f"ranking {text!r} has {r.d} elements, expected {d}")
    return r


def instance_from_dict(doc) -> Instance:
    if not isinstance(doc, dict):
        raise InstanceFormatError("top level: expected a JSON object")
    unknown = sorted(set(doc) - set(KEYS))
    if unknown:
        raise InstanceFormatError(f"field '{unknown[0]}': unknown field")
    for key in ("d", "groups", "alpha", "beta", "k", "mode", "rankings"):
        if key not in doc:
            raise InstanceFormatError(f"field '{key}': missing")
    d = _int(doc, "d")
    if d < 1:
        raise InstanceFormatError("field 'd': must be at least 1")

    groups_raw = doc["groups"]
    if not isinstance(groups_raw, list) or not groups_raw:
        raise InstanceFormatError("field 'groups': expected a nonempty list of lists")
    groups0 = []
    for i, members in enumerate(groups_raw):
        members = _int_list(members, f"groups[{i}]")
        for j, e in enumerate(members):
            if not 1 <= e <= d:
                raise InstanceFormatError(f"field 'groups[{i}][{j}]': element {e} outside 1..{d}")
        groups0.append([e - 1 for e in members])
    try:
        groups = GroupAssignment.from_groups(groups0, d)
    except ValidationError as exc:
        raise InstanceFormatError(f"field 'groups': {exc}") from None

    bounds = {}
    for key in ("alpha", "beta"):
        raw = doc[key]
        if not isinstance(raw, list):
            raise InstanceFormatError(f"field '{key}': expected a list of 'p/q' strings")
        if len(raw) != groups.g:
            raise InstanceFormatError(f"field '{key}': {len(raw)} entries for {groups.g} groups")
        vals = []
        for i, x in enumerate(raw):
            if not isinstance(x, (str, int)) or isinstance(x, bool):
                raise InstanceFormatError(f"field '{key}[{i}]': expected a 'p/q' string, got {x!r}")
            try:
                vals.append(parse_rational(x))
            except ValidationError as exc:
                raise InstanceFormatError(f"field '{key}[{i}]': {exc}") from None
        bounds[key] = tuple(vals)

    k = _int(doc, "k")
    try:
        mode = Mode(doc["mode"])
    except ValueError:
        raise InstanceFormatError(f"field 'mode': expected kfair, block or strict, got {doc['mode']!r}") from None
    block = None
    if mode is Mode.BLOCK:
        if "block" not in doc:
            raise InstanceFormatError("field 'block': required when mode is 'block'")
        block = _int(doc, "block")
    elif "block" in doc:
        raise InstanceFormatError("field 'block': only allowed when mode is 'block'")
    try:
        spec = FairnessSpec(bounds["alpha"], bounds["beta"], k, mode, block)
        spec.validate_for(groups)
    except ValidationError as exc:
        raise InstanceFormatError(f"fairness: {exc}") from None

    rankings_raw = doc["rankings"]
    if not isinstance(rankings_raw, list) or not rankings_raw:
        raise InstanceFormatError("field 'rankings': expected a nonempty list")
    rankings = []
    for i, r in enumerate(rankings_raw):
        r = _int_list(r, f"rankings[{i}]")
        if len(r) != d:
            raise InstanceFormatError(f"field 'rankings[{i}]': {len(r)} elements, expected {d}")
        try:
            rankings.append(Ranking.from_one_based(r))
        except ValidationError as exc:
            raise InstanceFormatError(f"field 'rankings[{i}]': {exc}") from None
    return Instance(tuple(rankings), groups, spec)


def parse_instance(text: str) -> Instance:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return instance_from_dict(doc)


def load_instance(path: str) -> Instance:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InstanceFormatError(f"{path}: {exc.strerror}") from None
    return parse_instance(text)


def _rational(x) -> str:
    return f"{x.numerator}/{x.denominator}"


def dump_instance(inst: Instance) -> str:
    """Canonical text: fixed key order, one key per line, sorted group members."""
    fs = inst.fairness
    fields = [
        ("d", inst.d),
        ("groups", [[e + 1 for e in members] for members in inst.groups.members]),
        ("alpha", [_rational(a) for a in fs.alpha]),
        ("beta", [_rational(b) for b in fs.beta]),
        ("k", fs.k),
        ("mode", fs.mode.value),
    ]
    if fs.mode is Mode.BLOCK:
        fields.append(("block", fs.block))
    fields.append(("rankings", [r.to_one_based() for r in inst.rankings]))
    body = ",\n".join(f"  {json.dumps(k)}: {json.dumps(v)}" for k, v in fields)
    return "{\n" + body + "\n}\n"
