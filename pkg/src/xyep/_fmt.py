"""Parsing and deterministic serialization helpers for the CLI."""

from __future__ import annotations

import json
import re

ARTIFACT_VERSION = 1

_NUM = r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_COMPLEX_RE = re.compile(
    rf"^(?P<re>[+-]?{_NUM})?(?P<im>[+-]{_NUM})?(?P<imunit>[ij])?$")


def parse_complex(text: str) -> complex:
    """Parse 'a+bi' style literals: '0.6+0.8i', '-1.5', '2i', '0.3-0.4j'."""
    s = text.strip().replace(" ", "")
    low = s.lower()
    if low in ("i", "+i", "j", "+j"):
        return 1j
    if low in ("-i", "-j"):
        return -1j
    m = _COMPLEX_RE.match(s) if s else None
    if m is None:
        raise ValueError(f"cannot parse complex literal {text!r}")
    re_part, im_part, unit = m.group("re"), m.group("im"), m.group("imunit")
    if im_part is not None and unit is None:
        raise ValueError(f"two components need an i suffix in {text!r}")
    if unit and im_part is None:
        # forms like '2i': the single number is the imaginary part
        re_part, im_part = None, re_part
        if im_part is None:
            raise ValueError(f"cannot parse complex literal {text!r}")
    if re_part is None and im_part is None:
        raise ValueError(f"cannot parse complex literal {text!r}")
    return complex(float(re_part or 0.0), float(im_part or 0.0))


def fmt_real(x: float) -> str:
    """12 significant digits, stable across runs."""
    return f"{float(x):.12g}"


def csv_text(config: dict, columns: list[str], rows: list[list]) -> str:
    """CSV with a comment header echoing the resolved configuration."""
    lines = [f"# artifact-version: {ARTIFACT_VERSION}"]
    for key in config:
        lines.append(f"# {key}: {config[key]}")
    lines.append(",".join(columns))
    for row in rows:
        cells = []
        for cell in row:
            if isinstance(cell, float):
                cells.append(fmt_real(cell))
            else:
                cells.append(str(cell))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def json_text(config: dict, payload: dict) -> str:
    """JSON with the resolved configuration embedded under 'config'."""
    doc = {"artifact_version": ARTIFACT_VERSION, "config": config}
    doc.update(payload)
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"
