from typing import Any
import dataclasses
import enum
import json
import logging
from pathlib import Path

import numpy as np

log = logging.getLogger(__name__)


def jsonable(obj: Any):
    """Convert obj to a JSON-ready container or object.

    Args:
        obj: numbers, strings, paths, enums, numpy arrays and scalars, and
            lists, tuples or dicts of those.

    Returns:
        The converted object. Tuples become lists.
    """
    if isinstance(obj, enum.Enum):
        return jsonable(obj.value)
    elif obj is None or isinstance(obj, (bool, str)):
        return obj
    elif isinstance(obj, (int, float)):
        return obj
    elif isinstance(obj, np.integer):
        return int(obj)
    elif isinstance(obj, np.floating):
        return float(obj)
    elif isinstance(obj, np.bool_):
        return bool(obj)
    elif isinstance(obj, Path):
        return str(obj)
    elif isinstance(obj, (list, tuple)):
        return [jsonable(x) for x in obj]
    elif isinstance(obj, dict):
        return {str(jsonable(k)): jsonable(v) for k, v in obj.items()}
    elif isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    elif dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return jsonable(dataclasses.asdict(obj))
    else:
        raise ValueError(f"Unknown type for JSON: {type(obj)}")


def dumps_json(obj: Any) -> str:
    """Serialize obj deterministically (sorted keys, trailing newline)."""
    return json.dumps(jsonable(obj), indent=4, sort_keys=True) + "\n"


def write_text(path, text: str) -> Path:
    """Write text with Unix line endings, creating parent directories."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as file:
        file.write(text)
    log.debug(f"wrote {path}")
    return path
