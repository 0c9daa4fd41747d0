import hashlib
import os
from typing import Any, Dict, List

from qha.errors import ValidationError

DEFAULT_MAX_DIM = 10000
DEFAULT_MAX_ITER = 256
DEFAULT_RESOLUTION_CAP = 32
DEFAULT_TOR_CAP = 8
DEFAULT_DEGREE_CAP = 64


def default_max_dim() -> int:
    """Dimension cap for reflections and algebra bases

    :return: ``QHA_MAX_DIM`` when set, otherwise :data:`DEFAULT_MAX_DIM`
    """
    value = os.environ.get("QHA_MAX_DIM")
    if value is None or value.strip() == "":
        return DEFAULT_MAX_DIM
    try:
        cap = int(value)
    except ValueError:
        raise ValidationError(f"QHA_MAX_DIM must be an integer, got {value!r}")
    if cap <= 0:
        raise ValidationError(f"QHA_MAX_DIM must be positive, got {cap}")
    return cap


def file_digest(filepath: str) -> str:
    with open(filepath, "rb") as f:
        return hashlib.sha256(f.read()).hexdigest()


def one_based(vertices: List[int]) -> List[int]:
    return [v + 1 for v in vertices]


def drop_none(d: Dict[str, Any]) -> Dict[str, Any]:
    return {k: v for k, v in d.items() if v is not None}
