"""Published JSON schemas for the wire protocol.

Clients and conformance tests validate against these documents; the service
itself enforces the same shapes through its request models.
"""

SCORE_REQUEST_SCHEMA = {
    "type": "object",
    "required": ["prompt", "candidates"],
    "properties": {
        "prompt": {"type": "string"},
        "media_refs": {"type": "array", "items": {"type": "string"}},
        "candidates": {"type": "array", "items": {"type": "string"}, "minItems": 1},
        "temperature": {"type": "number", "exclusiveMinimum": 0},
    },
    "additionalProperties": False,
}

SCORE_RESPONSE_SCHEMA = {
    "type": "object",
    "required": ["candidates"],
    "properties": {
        "candidates": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["text", "logprob"],
                "properties": {
                    "text": {"type": "string"},
                    "logprob": {"type": "number", "maximum": 0},
                },
                "additionalProperties": False,
            },
        }
    },
    "additionalProperties": False,
}

BEAMS_REQUEST_SCHEMA = {
    "type": "object",
    "required": ["prompt", "k"],
    "properties": {
        "prompt": {"type": "string"},
        "media_refs": {"type": "array", "items": {"type": "string"}},
        "k": {"type": "integer", "minimum": 2},
    },
    "additionalProperties": False,
}

BEAMS_RESPONSE_SCHEMA = {
    "type": "object",
    "required": ["candidates", "filtered_non_numeric"],
    "properties": {
        "candidates": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["text", "value", "logprob"],
                "properties": {
                    "text": {"type": "string"},
                    "value": {"type": "number"},
                    "logprob": {"type": "number", "maximum": 0},
                },
                "additionalProperties": False,
            },
            "minItems": 2,
        },
        "filtered_non_numeric": {"type": "integer", "minimum": 0},
    },
    "additionalProperties": False,
}
