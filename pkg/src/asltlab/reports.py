"""Report container for weighted condition series and criterion sums."""

from __future__ import annotations

import json
from dataclasses import dataclass, field


@dataclass
class ConditionReport:
    """Partial-sum trajectory of one weighted condition series.

    partial_sums holds (n, value) pairs at the recorded checkpoints; all
    summands of every condition series are nonnegative, so the values are
    nondecreasing in n.  `estimator` is "exact" or "monte_carlo"; stderr,
    when present, aligns with partial_sums.  `extras` carries per-condition
    detail (t grids, per-t trajectories, interpolation policies).
    """

    condition_id: str  # "A1" | "A2" | "B1" | "B2" | "IL"
    partial_sums: list[tuple[int, float]]
    parameters: dict
    estimator: str
    stderr: list[float] | None = None
    extras: dict = field(default_factory=dict)

    @property
    def final_value(self) -> float:
        return self.partial_sums[-1][1]

    def write_csv(self, f) -> None:
        """CSV columns (N, value, stderr); empty stderr for exact reports."""
        own = isinstance(f, (str, bytes))
        fh = open(f, "w", newline="\n") if own else f
        try:
            fh.write("N,value,stderr\n")
            for i, (n, v) in enumerate(self.partial_sums):
                se = "" if self.stderr is None else repr(self.stderr[i])
                fh.write(f"{n},{v!r},{se}\n")
        finally:
            if own:
                fh.close()

    def params_json(self) -> str:
        """JSON sidecar identifying the run."""
        doc = {
            "condition_id": self.condition_id,
            "estimator": self.estimator,
            "parameters": self.parameters,
            "extras_keys": sorted(self.extras.keys()),
        }
        return json.dumps(doc, sort_keys=True)
