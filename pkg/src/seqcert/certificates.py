"""Certificate records: a verified or refuted quantitative inequality."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Tuple

from .arithmetic import Real, scalar_to_json

FLOAT_WITNESS_TOL = 1e-9


@dataclass(frozen=True)
class Certificate:
    """Outcome of one certification op.

    constants holds the named scalars the op reports (d, D, L, c1, c2,
    theta, margins, ...); witness holds the coefficient vector(s) attaining
    the extreme values, keyed by role.  A stored witness re-evaluates to its
    reported constant (within 1e-9 in float mode, exactly in rational mode).
    Lower bounds obtained from evaluated points are certified; any
    heuristic upper bound is named in ``flags``.
    """

    kind: str
    constants: Dict[str, Real]
    holds: bool
    witness: Dict[str, Tuple[Real, ...]]
    mode: str
    arithmetic: str
    flags: Tuple[str, ...] = field(default_factory=tuple)

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "constants": {k: scalar_to_json(v) for k, v in sorted(self.constants.items())},
            "holds": self.holds,
            "witness": {
                k: [scalar_to_json(x) for x in v] for k, v in sorted(self.witness.items())
            },
            "mode": self.mode,
            "arithmetic": self.arithmetic,
            "flags": list(self.flags),
        }
