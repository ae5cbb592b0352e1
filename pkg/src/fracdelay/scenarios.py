"""Built-in example scenarios for the CLI.

Each scenario carries a canonical config document (materialized verbatim
by `fracdelay example`), plus the run defaults and the analysis regime
that fit its forcing.  The third scenario also pins the exact forcing
caps (F, G), which the sampled-supremum estimator can only approach.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

__all__ = ["Scenario", "SCENARIOS", "get_scenario"]


@dataclass(frozen=True)
class Scenario:
    name: str
    description: str
    config_text: str
    step: float
    t_end: float
    regime: str
    forcing_cap_f: tuple | None = None
    forcing_cap_g: tuple | None = None

    def config_doc(self) -> dict:
        return json.loads(self.config_text)

    def cap_f(self) -> np.ndarray | None:
        return None if self.forcing_cap_f is None else np.array(self.forcing_cap_f)

    def cap_g(self) -> np.ndarray | None:
        return None if self.forcing_cap_g is None else np.array(self.forcing_cap_g)


_EX1_CONFIG = """\
{
  "order": [0.45, 0.65, 0.2],
  "A": [[-2.2, 0.2, 0.1], [0.3, -2.4, 0.2], [0.5, 0.2, -2.3]],
  "B": [[0.2, 0.1, 0.3], [0.2, 0.2, 0.1], [0.1, 0.3, 0.5]],
  "E": [[0.2, 0.1], [0.2, 0.3], [0.3, 0.4]],
  "C": [[0.1, 0.2, 0.1], [0.1, 0.3, 0.1]],
  "D": [[0.1, 0.2], [0.2, 0.1]],
  "f": ["0", "0", "0"],
  "g": ["0", "0"],
  "tau1": "1 + 0.5*t*sin(t)^2",
  "tau2": "1/3 + 0.5*t",
  "tau3": "0.5 + 0.5*t*cos(t)^2",
  "r": 1.0,
  "psi": ["0.3", "0.2", "0.8"],
  "phi": "derived"
}
"""

_EX2_CONFIG = """\
{
  "order": [0.5, 0.7, 0.3],
  "A": [[-2.2, 0.2, 0.1], [0.3, -2.4, 0.2], [0.5, 0.2, -2.3]],
  "B": [[0.2, 0.1, 0.3], [0.2, 0.2, 0.1], [0.1, 0.3, 0.5]],
  "E": [[0.2, 0.1], [0.2, 0.3], [0.3, 0.4]],
  "C": [[0.1, 0.2, 0.1], [0.1, 0.3, 0.1]],
  "D": [[0.1, 0.2], [0.2, 0.1]],
  "f": ["2/(1+t)", "t/exp(t)", "sin(t)^2/(1+t)"],
  "g": ["t/(1+t^2)", "1/exp(t)"],
  "tau1": "1 + 0.5*t*sin(t)^2",
  "tau2": "1/3 + 0.5*t",
  "tau3": "0.5 + 0.5*t*cos(t)^2",
  "r": 1.0,
  "psi": ["0.5", "0.1", "1.2"],
  "phi": "derived"
}
"""

_EX3_CONFIG = """\
{
  "order": [0.55, 0.25],
  "A": [[-2.2, 0.2], [0.1, -1.4]],
  "B": [[0.2, 1.0], [0.2, 0.3]],
  "E": [[0.2, 0.5], [0.2, 0.3]],
  "C": [[0.4, 0.2], [0.2, 0.3]],
  "D": [[0.2, 0.5], [0.3, 0.1]],
  "f": ["0.02 + 0.01*sin(t)", "0.1*t/(1+t)"],
  "g": ["0.1 + 0.1*cos(t)", "0.1 + 0.25*2^(t/(t+1))"],
  "tau1": "1 + 0.5*t*sin(t)^2",
  "tau2": "0.5 + 0.3*cos(t)^2",
  "tau3": "0.5 + 0.5*t*cos(t)^2",
  "r": 1.0,
  "psi": ["0.5", "0.5"],
  "phi": "derived"
}
"""

SCENARIOS = {
    "ex1": Scenario(
        name="ex1",
        description="homogeneous 3+2 coupled system with unbounded time-varying delays",
        config_text=_EX1_CONFIG,
        step=0.01,
        t_end=50.0,
        regime="homogeneous",
    ),
    "ex2": Scenario(
        name="ex2",
        description="same coefficients under vanishing nonnegative forcing",
        config_text=_EX2_CONFIG,
        step=0.01,
        t_end=50.0,
        regime="vanishing",
    ),
    "ex3": Scenario(
        name="ex3",
        description="2+2 coupled system with bounded forcing and its asymptotic bound",
        config_text=_EX3_CONFIG,
        step=0.02,
        t_end=150.0,
        regime="bounded",
        forcing_cap_f=(0.03, 0.1),
        forcing_cap_g=(0.2, 0.6),
    ),
}


def get_scenario(name: str) -> Scenario:
    try:
        return SCENARIOS[name]
    except KeyError:
        raise KeyError(
            f"unknown scenario {name!r}; available: {', '.join(sorted(SCENARIOS))}"
        ) from None
