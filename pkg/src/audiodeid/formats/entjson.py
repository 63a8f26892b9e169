"""Entity JSON: the interchange file between the tagging and redaction
steps, and the gold format for pipeline evaluation.

Schema (UTF-8): an array of ``{"id": str, "entities": [...]}`` objects.
Each entity carries a ``type`` code (PER, LOC, ORG, CUR, MONEY) plus either
time bounds ``start_s``/``end_s`` (seconds) or token bounds
``token_start``/``token_end`` (end exclusive).
"""

from __future__ import annotations

import json
from typing import Union

from ..core import EntitySpan, EntityType, TimedEntity, TimeInterval
from ..errors import ParseError

Entity = Union[TimedEntity, EntitySpan]
UtteranceEntities = tuple[str, list[Entity]]


def parse_entities_json(data: bytes, *, source: str = "entities") -> list[UtteranceEntities]:
    try:
        doc = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParseError(f"invalid JSON: {exc}", source=source) from None
    if not isinstance(doc, list):
        raise ParseError("top level must be an array of utterance objects", source=source)

    result: list[UtteranceEntities] = []
    for i, item in enumerate(doc):
        where = f"utterance #{i}"
        if not isinstance(item, dict) or not isinstance(item.get("id"), str):
            raise ParseError(f"{where}: expected an object with a string 'id'", source=source)
        raw_entities = item.get("entities", [])
        if not isinstance(raw_entities, list):
            raise ParseError(f"{where}: 'entities' must be an array", source=source)
        entities: list[Entity] = []
        for j, raw in enumerate(raw_entities):
            entities.append(_parse_entity(raw, f"{where} entity #{j}", source))
        result.append((item["id"], entities))
    return result


def _parse_entity(raw: object, where: str, source: str) -> Entity:
    if not isinstance(raw, dict):
        raise ParseError(f"{where}: expected an object", source=source)
    try:
        etype = EntityType.from_code(str(raw.get("type")))
    except ValueError as exc:
        raise ParseError(f"{where}: {exc}", source=source) from None

    timed = "start_s" in raw or "end_s" in raw
    token = "token_start" in raw or "token_end" in raw
    if timed == token:
        raise ParseError(
            f"{where}: need either start_s/end_s or token_start/token_end", source=source)
    try:
        if timed:
            return TimedEntity(etype, TimeInterval(float(raw["start_s"]), float(raw["end_s"])))
        return EntitySpan(etype, int(raw["token_start"]), int(raw["token_end"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{where}: {exc}", source=source) from None


def write_entities_json(items: list[UtteranceEntities]) -> bytes:
    doc = []
    for utterance_id, entities in items:
        out = []
        for entity in entities:
            if isinstance(entity, TimedEntity):
                out.append({"type": entity.entity_type.code,
                            "start_s": entity.interval.start,
                            "end_s": entity.interval.end})
            else:
                out.append({"type": entity.entity_type.code,
                            "token_start": entity.token_start,
                            "token_end": entity.token_end})
        doc.append({"id": utterance_id, "entities": out})
    return (json.dumps(doc, ensure_ascii=False, indent=2) + "\n").encode("utf-8")
