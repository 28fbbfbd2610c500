"""Scenario sample files: a JSON header line naming the variable order,
then one line of 0/1 characters per scenario in that order."""

from __future__ import annotations

import json
from typing import Optional, Sequence

from .errors import ValidationError
from .network import Scenario


def write_scenarios(
    path,
    scenarios: Sequence[Scenario],
    variable_order: Sequence[str],
    header_extra: Optional[dict] = None,
) -> None:
    header = {"variables": list(variable_order)}
    if header_extra:
        header.update(header_extra)
    with open(path, "w") as fh:
        fh.write(json.dumps(header) + "\n")
        for s in scenarios:
            fh.write("".join(str(s.states[v]) for v in variable_order) + "\n")


def read_scenarios(path):
    """Returns (scenarios, header dict)."""
    with open(path) as fh:
        first = fh.readline()
        try:
            header = json.loads(first)
            order = [str(v) for v in header["variables"]]
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise ValidationError(f"bad scenario file header: {exc}")
        scenarios = []
        for lineno, line in enumerate(fh, start=2):
            bits = line.strip()
            if not bits:
                continue
            if len(bits) != len(order) or set(bits) - {"0", "1"}:
                raise ValidationError(f"bad scenario line {lineno}")
            scenarios.append(Scenario({v: int(b) for v, b in zip(order, bits)}))
    return scenarios, header
