"""
Checkpoint Codec

Binary layout (all integers 64-bit little-endian unsigned, values 64-bit
little-endian floats):

    b"TONETCKPT1"
    repeated until end of file:
        name length, UTF-8 name bytes, rank, dims[rank], values[prod(dims)]

Records are written in the order of the mapping passed to `save_checkpoint`;
`TONetParams.state_dict` fixes that order (groups in declaration order,
parameters before buffers, insertion order within each).
"""

import logging
import os
from collections import OrderedDict
from pathlib import Path
from typing import Dict, Mapping, Union

import numpy as np

logger = logging.getLogger(__name__)

CHECKPOINT_MAGIC = b"TONETCKPT1"

_U64 = np.dtype("<u8")
_F64 = np.dtype("<f8")


class CheckpointError(ValueError):
    """Raised for malformed or incompatible checkpoint files."""


def encode_arrays(arrays: Mapping[str, np.ndarray]) -> bytes:
    """Serialize named arrays into the checkpoint byte layout."""
    chunks = [CHECKPOINT_MAGIC]
    for name, array in arrays.items():
        array = np.asarray(array, dtype=np.float64)
        encoded = name.encode("utf-8")
        chunks.append(np.array([len(encoded)], dtype=_U64).tobytes())
        chunks.append(encoded)
        chunks.append(np.array([array.ndim], dtype=_U64).tobytes())
        chunks.append(np.array(array.shape, dtype=_U64).tobytes())
        chunks.append(np.ascontiguousarray(array, dtype=_F64).tobytes())
    return b"".join(chunks)


def decode_arrays(blob: bytes) -> "OrderedDict[str, np.ndarray]":
    """Parse the checkpoint byte layout back into named arrays."""
    if not blob.startswith(CHECKPOINT_MAGIC):
        raise CheckpointError("Not a TONet checkpoint (bad magic)")

    arrays: "OrderedDict[str, np.ndarray]" = OrderedDict()
    offset = len(CHECKPOINT_MAGIC)

    def take(count: int, dtype: np.dtype) -> np.ndarray:
        nonlocal offset
        nbytes = count * dtype.itemsize
        if offset + nbytes > len(blob):
            raise CheckpointError(f"Truncated checkpoint at byte {offset}")
        out = np.frombuffer(blob, dtype=dtype, count=count, offset=offset)
        offset += nbytes
        return out

    while offset < len(blob):
        name_len = int(take(1, _U64)[0])
        if offset + name_len > len(blob):
            raise CheckpointError(f"Truncated checkpoint at byte {offset}")
        name = blob[offset:offset + name_len].decode("utf-8")
        offset += name_len
        rank = int(take(1, _U64)[0])
        dims = tuple(int(d) for d in take(rank, _U64))
        count = int(np.prod(dims)) if dims else 1
        arrays[name] = take(count, _F64).astype(np.float64).reshape(dims)
    return arrays


def save_checkpoint(path: Union[str, Path], arrays: Mapping[str, np.ndarray]) -> Path:
    """Write arrays through a temp file and rename into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "wb") as f:
        f.write(encode_arrays(arrays))
    os.replace(tmp, path)
    logger.info("Checkpoint written: %s (%d arrays)", path, len(arrays))
    return path


def load_checkpoint(path: Union[str, Path]) -> Dict[str, np.ndarray]:
    with open(path, "rb") as f:
        return decode_arrays(f.read())
