from pathlib import Path

import numpy as np

from lcnf_fpm.core.exceptions import FileFormatError, ShapeMismatchError

REAL_MAGIC = "Pf"
COMPLEX_MAGIC = "PZ"


def write_float_image(path: str | Path, image: np.ndarray) -> Path:
    """
    Write a 2-D real or complex array as a single-channel float-map.
    Rows are stored bottom to top as little-endian float32 (scale field -1.0).
    Complex arrays are stored as a real plane followed by an imaginary plane.
    Args:
        path: Output file
        image: 2-D array
    Returns:
        The written path
    """
    image = np.asarray(image)
    if image.ndim != 2:
        raise ShapeMismatchError(f"float images must be 2-D, got shape {image.shape}")
    if np.iscomplexobj(image):
        magic, planes = COMPLEX_MAGIC, [image.real, image.imag]
    else:
        magic, planes = REAL_MAGIC, [image]
    rows, cols = image.shape
    header = f"{magic}\n{cols} {rows}\n-1.0\n".encode("ascii")
    path = Path(path)
    with open(path, "wb") as handle:
        handle.write(header)
        for plane in planes:
            handle.write(np.ascontiguousarray(plane[::-1], dtype="<f4").tobytes())
    return path


def _read_token(data: bytes, position: int) -> tuple[str, int]:
    while position < len(data) and data[position : position + 1].isspace():
        position += 1
    start = position
    while position < len(data) and not data[position : position + 1].isspace():
        position += 1
    if start == position:
        raise FileFormatError("float-map header ended early")
    return data[start:position].decode("ascii", errors="replace"), position


def read_float_image(path: str | Path) -> np.ndarray:
    """
    Read a float-map written by write_float_image (either endianness).
    Returns:
        float32 array for Pf files, complex64 array for PZ files
    Raises:
        FileFormatError: On an unknown magic, a malformed header or a truncated payload
    """
    try:
        data = Path(path).read_bytes()
    except FileNotFoundError as e:
        raise FileFormatError(f"float-map {path} does not exist") from e
    magic, position = _read_token(data, 0)
    if magic not in (REAL_MAGIC, COMPLEX_MAGIC):
        raise FileFormatError(f"unsupported float-map magic {magic!r} in {path}")
    cols_token, position = _read_token(data, position)
    rows_token, position = _read_token(data, position)
    scale_token, position = _read_token(data, position)
    try:
        cols, rows, scale = int(cols_token), int(rows_token), float(scale_token)
    except ValueError as e:
        raise FileFormatError(f"malformed float-map header in {path}") from e
    if scale == 0:
        raise FileFormatError(f"float-map scale field must be nonzero in {path}")
    # Exactly one whitespace byte separates the header from the payload.
    position += 1
    planes = 2 if magic == COMPLEX_MAGIC else 1
    expected = planes * rows * cols * 4
    actual = len(data) - position
    if actual < expected:
        raise FileFormatError(
            f"float-map {path} truncated: expected {expected} payload bytes, got {actual}",
            {"expected_bytes": expected, "actual_bytes": actual},
        )
    dtype = "<f4" if scale < 0 else ">f4"
    values = np.frombuffer(data, dtype=dtype, count=planes * rows * cols, offset=position)
    stack = values.reshape(planes, rows, cols)[:, ::-1].astype(np.float32)
    if planes == 2:
        return (stack[0] + 1j * stack[1]).astype(np.complex64)
    return stack[0]
