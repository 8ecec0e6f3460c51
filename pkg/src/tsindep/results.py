"""Shared result container for all tests, plus canonical serialization."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class TestOutcome:
    """One test's statistic, reference distribution and p-value.

    ``statistic`` is the raw value (e.g. the HSIC estimate); ``scaled`` is
    what the decision rule compares against critical values (``n * stat``
    for the HSIC tests, the statistic itself for the asymptotic tests).
    ``critical_values`` maps significance levels to critical values on that
    scale.  ``replicates`` optionally carries the full bootstrap sample of
    scaled statistics.
    """

    __test__ = False  # not a pytest class despite the name

    name: str
    statistic: float
    scaled: float
    p_value: float
    reference: str
    n: int
    lag: int | None = None
    direction: int | None = None
    variant: int | None = None
    df: int | None = None
    n_effective: int | None = None
    critical_values: dict = field(default_factory=dict)
    replicates: np.ndarray | None = None
    n_failed: int = 0

    def rejects(self, alpha: float) -> bool:
        return self.p_value <= alpha

    def to_dict(self, include_replicates: bool = False) -> dict:
        out = {
            "name": self.name,
            "statistic": self.statistic,
            "scaled": self.scaled,
            "p_value": self.p_value,
            "reference": self.reference,
            "n": self.n,
            "lag": self.lag,
            "direction": self.direction,
            "variant": self.variant,
            "df": self.df,
            "n_effective": self.n_effective,
            "critical_values": {repr(float(a)): float(c) for a, c in self.critical_values.items()},
            "n_failed": self.n_failed,
        }
        if include_replicates and self.replicates is not None:
            out["replicates"] = [float(v) for v in self.replicates]
        return out
