"""Export outcome: what mapped to what, with parity evidence."""

from __future__ import annotations

import json
from dataclasses import dataclass, field


class ExportError(Exception):
    """Export cannot produce a faithful interchange model."""


class UnmappableLayerError(ExportError):
    """A source layer has no interchange equivalent."""


PARITY_TOLERANCE = 1e-5  # single-precision sources dominate the budget


@dataclass
class ExportReport:
    framework: str
    source: str
    output: str
    layers: list[dict] = field(default_factory=list)  # {"source": ..., "interchange": ...}
    warnings: list[str] = field(default_factory=list)
    verify_count: int = 0
    seed: int = 0
    parity: float | None = None
    tolerance: float = PARITY_TOLERANCE

    def to_dict(self) -> dict:
        return {
            "framework": self.framework,
            "source": self.source,
            "output": self.output,
            "layers": self.layers,
            "warnings": self.warnings,
            "verify_count": self.verify_count,
            "seed": self.seed,
            "parity": self.parity,
            "tolerance": self.tolerance,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)
