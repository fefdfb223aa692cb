"""
JSON schemas for every document the pipeline reads or writes.
"""

SCHEMA_VERSION = 1

_NUMBER_LIST = {"type": "array", "items": {"type": "number"}}

MANIFEST_SCHEMA = {
    "type": "object",
    "required": ["entries"],
    "properties": {
        "schema_version": {"type": "integer"},
        "entries": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["path", "scene", "intervals"],
                "properties": {
                    "path": {"type": "string", "minLength": 1},
                    "scene": {"type": "string"},
                    "frame_count": {"type": "integer", "minimum": 1},
                    "intervals": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "required": ["start", "end", "label"],
                            "properties": {
                                "start": {"type": "integer"},
                                "end": {"type": "integer"},
                                "label": {"enum": ["normal", "abnormal"]},
                            },
                            "additionalProperties": False,
                        },
                    },
                },
                "additionalProperties": False,
            },
        },
    },
    "additionalProperties": False,
}

GAUSSIAN_MODEL_SCHEMA = {
    "type": "object",
    "required": ["schema_version", "dim", "m", "mu", "sigma", "per_feature_sigma"],
    "properties": {
        "schema_version": {"type": "integer"},
        "kind": {"const": "gaussian"},
        "dim": {"type": "integer", "minimum": 1},
        "m": {"type": "integer", "minimum": 1},
        "mu": _NUMBER_LIST,
        "sigma": _NUMBER_LIST,
        "per_feature_sigma": _NUMBER_LIST,
        "detector": {
            "type": "object",
            "required": ["threshold", "percentile", "cube_p", "cube_q",
                         "spatial_stride", "temporal_stride", "state_dim"],
            "properties": {
                "threshold": {"type": "number"},
                "percentile": {"type": "number", "exclusiveMinimum": 0, "maximum": 100},
                "cube_p": {"type": "integer", "minimum": 2},
                "cube_q": {"type": "integer", "minimum": 2},
                "spatial_stride": {"type": "integer", "minimum": 1},
                "temporal_stride": {"type": "integer", "minimum": 1},
                "state_dim": {"type": "integer", "minimum": 1},
            },
            "additionalProperties": False,
        },
    },
    "additionalProperties": False,
}

MAXENT_MODEL_SCHEMA = {
    "type": "object",
    "required": ["schema_version", "labels", "w", "feature_map"],
    "properties": {
        "schema_version": {"type": "integer"},
        "kind": {"const": "maxent"},
        "labels": {"type": "array", "items": {"type": "string"}, "minItems": 2},
        "w": _NUMBER_LIST,
        "feature_map": {
            "type": "object",
            "required": ["type", "dims", "n_labels"],
            "properties": {
                "type": {"const": "label-conjunction"},
                "dims": {"type": "integer", "minimum": 1},
                "n_labels": {"type": "integer", "minimum": 2},
            },
            "additionalProperties": False,
        },
        "input_mean": _NUMBER_LIST,
        "input_scale": _NUMBER_LIST,
    },
    "additionalProperties": False,
}

EVAL_REPORT_SCHEMA = {
    "type": "object",
    "required": ["schema_version", "runs", "average_accuracy"],
    "properties": {
        "schema_version": {"type": "integer"},
        "runs": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["run_id", "accuracy", "n_frames_evaluated", "tp", "fp", "tn", "fn"],
                "properties": {
                    "run_id": {"type": "integer"},
                    "accuracy": {"type": "number", "minimum": 0, "maximum": 100},
                    "n_frames_evaluated": {"type": "integer", "minimum": 1},
                    "tp": {"type": "integer", "minimum": 0},
                    "fp": {"type": "integer", "minimum": 0},
                    "tn": {"type": "integer", "minimum": 0},
                    "fn": {"type": "integer", "minimum": 0},
                },
                "additionalProperties": False,
            },
        },
        "average_accuracy": {"type": "number"},
    },
    "additionalProperties": False,
}

PIPELINE_CONFIG_SCHEMA = {
    "type": "object",
    "properties": {
        "cube_p": {"type": "integer"},
        "cube_q": {"type": "integer"},
        "spatial_stride": {"type": "integer"},
        "temporal_stride": {"type": "integer"},
        "state_dim": {"type": "integer"},
        "percentile": {"type": "number"},
        "seed": {"type": "integer"},
        "runs": {"type": "integer"},
        "learning_rate": {"type": "number"},
        "epochs": {"type": "integer"},
        "l2": {"type": "number"},
        "width": {"type": "integer"},
        "height": {"type": "integer"},
        "particles": {"type": "integer"},
        "frames": {"type": "integer"},
        "dispersal_frame": {"type": "integer"},
        "speed_normal": {"type": "number"},
        "speed_abnormal": {"type": "number"},
    },
    "additionalProperties": False,
}
