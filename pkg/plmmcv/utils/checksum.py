import hashlib
from pathlib import Path
from typing import Union

import numpy as np


def array_checksum(*arrays: np.ndarray, algorithm: str = "sha256") -> str:
    """
    Calculate a content hash over one or more numeric arrays.

    The shape and dtype of each array enter the digest, so a transposed or
    recast array hashes differently.

    Args:
        *arrays (np.ndarray): Arrays to hash, in order.
        algorithm (str): The hash algorithm to use (default is 'sha256').

    Returns:
        str: The hexadecimal digest.
    """
    hash_func = hashlib.new(algorithm)
    for array in arrays:
        array = np.ascontiguousarray(array)
        hash_func.update(str(array.shape).encode())
        hash_func.update(array.dtype.str.encode())
        hash_func.update(array.tobytes())
    return hash_func.hexdigest()


def file_checksum(file_path: Union[str, Path], algorithm: str = "sha256") -> str:
    """
    Calculate the checksum of a file.

    Args:
        file_path (Union[str, Path]): Path to the file.
        algorithm (str): The hash algorithm to use (default is 'sha256').

    Returns:
        str: The checksum of the file.
    """
    hash_func = hashlib.new(algorithm)
    with open(file_path, "rb") as f:
        for chunk in iter(lambda: f.read(4096), b""):
            hash_func.update(chunk)
    return hash_func.hexdigest()
