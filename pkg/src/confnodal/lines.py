"""Spectral line record shared by the closed-form spectra."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any


@dataclass(frozen=True)
class SpectralLine:
    """One eigenvalue with its multiplicity and eigenfunction family label."""

    eigenvalue: float
    multiplicity: int
    label: Any
    operator: str

    def __post_init__(self):
        if self.multiplicity < 1:
            raise ValueError("multiplicity must be positive")

    def to_dict(self) -> dict:
        label = self.label.to_dict() if hasattr(self.label, "to_dict") else self.label
        return {"eigenvalue": float(self.eigenvalue), "multiplicity": int(self.multiplicity),
                "label": label}


def expand(lines) -> list[float]:
    """Eigenvalues repeated by multiplicity, ascending."""
    out: list[float] = []
    for line in sorted(lines, key=lambda l: l.eigenvalue):
        out.extend([line.eigenvalue] * line.multiplicity)
    return out
