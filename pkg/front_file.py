#!/usr/bin/env python3
"""
Plain-text front files.

One box per line as whitespace-separated decimal coordinates. Lines starting
with '#' are comments and blank lines are skipped. The dimension is taken from
the first data line.
"""

import logging
import math
from pathlib import Path

from box_geometry import Front, FrontInputError, FrontParseError

logger = logging.getLogger(__name__)


def parse_front(text) -> Front:
    """
    Parse front file contents.

    Raises:
        FrontParseError: malformed or ragged line, invalid coordinate value
        FrontInputError: no data lines
    """
    rows = []
    d = None
    for line_number, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue

        fields = stripped.split()
        if d is None:
            d = len(fields)
        elif len(fields) != d:
            raise FrontParseError(line_number, f"expected {d} values, found {len(fields)}")

        try:
            values = [float(field) for field in fields]
        except ValueError:
            raise FrontParseError(line_number, f"not a decimal number in '{stripped}'") from None

        for value in values:
            if not math.isfinite(value):
                raise FrontParseError(line_number, f"non-finite coordinate {value}")
            if value < 0:
                raise FrontParseError(line_number, f"negative coordinate {value}")
        rows.append(values)

    if not rows:
        raise FrontInputError("front file holds no boxes")
    return Front(rows)


def read_front(path) -> Front:
    path = Path(path)
    logger.debug("Reading front from %s", path)
    return parse_front(path.read_text(encoding="utf-8"))


def format_front(front) -> str:
    """Front as text with 17 significant digits per value"""
    lines = [" ".join(f"{value:.17g}" for value in box) for box in front]
    return "\n".join(lines) + "\n"


def write_front(front, path, comment=None):
    """
    Write a front file.

    Args:
        front: Front
        path: output path
        comment: optional text written as a leading '#' line
    """
    path = Path(path)
    header = f"# {comment}\n" if comment else ""
    path.write_text(header + format_front(front), encoding="utf-8")
    logger.info("Front with n=%d, d=%d saved to %s", front.n, front.d, path)
