"""JSON schemas for the documents written by the command-line tool."""

from __future__ import annotations

_NUMBER_OR_STRING = {"type": ["number", "string"]}
_VECTOR = {"type": "array", "items": _NUMBER_OR_STRING}

TABLEAU_CHECK = {
    "type": "object",
    "required": ["command", "tableau", "L", "h", "mbar", "min_eigenvalue", "psd", "tolerance"],
    "properties": {
        "command": {"const": "tableau-check"},
        "tableau": {"type": "string"},
        "L": {"type": "number"},
        "h": {"type": "number"},
        "mbar": {"type": "array", "items": {"type": "array", "items": {"type": "number"}}},
        "min_eigenvalue": {"type": "number"},
        "psd": {"type": "boolean"},
        "tolerance": {"type": "number"},
    },
}

INTERVAL = {
    "type": "object",
    "required": ["command", "tableau", "L", "h_max", "empty"],
    "properties": {
        "command": {"const": "interval"},
        "tableau": {"type": "string"},
        "L": {"type": "number"},
        "h_max": {"anyOf": [{"type": "number"}, {"const": "inf"}, {"type": "null"}]},
        "empty": {"type": "boolean"},
        "disconnected": {"type": "array", "items": {"type": "number"}},
    },
}

CONFIGURATION = {
    "type": "object",
    "required": ["x0", "xt0", "xh", "xth", "x1", "xt1", "k0", "kt0", "kh", "kth", "L", "h"],
    "properties": {
        **{k: _VECTOR for k in ("x0", "xt0", "xh", "xth", "x1", "xt1", "k0", "kt0", "kh", "kth")},
        "L": _NUMBER_OR_STRING,
        "h": _NUMBER_OR_STRING,
    },
}

COUNTEREXAMPLE = {
    "type": "object",
    "required": ["command", "L", "h", "smooth", "configuration", "figure"],
    "properties": {
        "command": {"const": "counterexample"},
        "L": {"type": "number"},
        "h": {"type": "number"},
        "smooth": {"type": "boolean"},
        "configuration": CONFIGURATION,
        "constraints": {
            "type": "object",
            "required": ["slacks", "all_satisfied"],
            "properties": {
                "slacks": {"type": "array", "items": {"type": "number"}, "minItems": 6, "maxItems": 6},
                "all_satisfied": {"type": "boolean"},
            },
        },
        "dilation": {"type": "number"},
        "closed_form": {"type": "number"},
        "witness": {
            "type": "object",
            "required": ["ratio", "excess", "lam", "mu", "nu", "L_prime", "alpha", "ell"],
            "properties": {
                k: {"type": "number"}
                for k in ("ratio", "excess", "lam", "mu", "nu", "L_prime", "alpha", "ell")
            },
        },
        "figure": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["kind", "name", "x", "y", "dx", "dy"],
                "properties": {
                    "kind": {"enum": ["point", "arrow"]},
                    "name": {"type": "string"},
                    **{k: {"type": "number"} for k in ("x", "y", "dx", "dy")},
                },
            },
        },
    },
}

SEARCH = {
    "type": "object",
    "required": ["command", "L", "h", "dim", "seed", "best_ratio", "excess", "max_violation", "fit"],
    "properties": {
        "command": {"const": "search"},
        "L": {"type": "number"},
        "h": {"type": "number"},
        "dim": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer"},
        "best_ratio": {"type": "number"},
        "excess": {"type": "number"},
        "max_violation": {"type": "number"},
        "configuration": CONFIGURATION,
        "fit": {
            "type": "object",
            "required": ["coefficient", "slope", "products", "quotients"],
            "properties": {
                "coefficient": {"type": "number"},
                "slope": {"type": "number"},
                "products": {"type": "array", "items": {"type": "number"}},
                "quotients": {"type": "array", "items": {"type": "number"}},
            },
        },
    },
}

MANIFEST = {
    "type": "object",
    "required": ["command", "parameters", "artifacts", "version", "created"],
    "properties": {
        "command": {"type": "string"},
        "parameters": {"type": "object"},
        "artifacts": {"type": "array", "items": {"type": "string"}},
        "version": {"type": "string"},
        "created": {"type": "string"},
    },
}

SCHEMAS = {
    "tableau-check": TABLEAU_CHECK,
    "interval": INTERVAL,
    "counterexample": COUNTEREXAMPLE,
    "search": SEARCH,
    "manifest": MANIFEST,
}
