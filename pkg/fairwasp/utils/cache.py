"""Binary cache for compressed costs.

Layout (little-endian): magic b"FWCC", uint32 n, uint32 L, then the minima as
float64 row-major, then the argmin columns as uint32 row-major.
"""
import logging
import struct
from pathlib import Path
from typing import Optional, Union

import numpy as np

from fairwasp.solver.cost import CompressedCost

logger = logging.getLogger(__name__)

MAGIC = b"FWCC"
HEADER = struct.Struct("<4sII")


def save_compressed(cc: CompressedCost, path: Union[str, Path]) -> Path:
    """Write a CompressedCost in the cache format."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, 'wb') as f:
        f.write(HEADER.pack(MAGIC, cc.n, cc.L))
        f.write(np.ascontiguousarray(cc.row_group_min, dtype='<f8').tobytes())
        f.write(np.ascontiguousarray(cc.row_group_argmin, dtype='<u4').tobytes())
    tmp.replace(path)
    logger.debug(f"Saved compressed costs to {path}")
    return path


def load_compressed(path: Union[str, Path], metric: str = "euclidean") -> Optional[CompressedCost]:
    """Read a cache file; returns None if missing or malformed."""
    path = Path(path)
    if not path.exists():
        return None
    try:
        raw = path.read_bytes()
        magic, n, L = HEADER.unpack_from(raw, 0)
        if magic != MAGIC:
            logger.warning(f"Ignoring cache file {path}: bad magic {magic!r}")
            return None
        offset = HEADER.size
        expected = offset + n * L * 8 + n * L * 4
        if len(raw) != expected:
            logger.warning(f"Ignoring cache file {path}: size {len(raw)} != {expected}")
            return None
        mins = np.frombuffer(raw, dtype='<f8', count=n * L, offset=offset).reshape(n, L)
        args = np.frombuffer(raw, dtype='<u4', count=n * L, offset=offset + n * L * 8)
        return CompressedCost(
            row_group_min=mins.astype(np.float64),
            row_group_argmin=args.reshape(n, L).astype(np.int64),
            metric=metric,
        )
    except (OSError, struct.error, ValueError) as e:
        logger.error(f"Error reading cache file {path}: {e}")
        return None


def cache_path(cache_dir: Union[str, Path], key: str) -> Path:
    return Path(cache_dir) / f"{key}.fwcc"
