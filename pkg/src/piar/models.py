"""Built-in quarterly PIAR models with one, two and three simple unit roots.

Seed-vectors are stored exactly as published (two decimals); the noise
variances are the published generating values.
"""

from dataclasses import dataclass
from typing import Dict

import numpy as np

from .core import NoiseSpec, PeriodicCoefficients
from .errors import InputError
from .mcmatrix import EigenSpec
from .pifilter import theta_general

# rows are seed-vectors c_1, c_2, ... with entries c^(1..4)
_SEEDS = {
    "I": [[-0.64, 0.46, 0.65, 0.68]],
    "II": [[0.08, -0.41, 0.52, 0.40],
           [0.22, 0.29, -0.58, -0.49]],
    "III": [[-0.64, -0.46, 0.65, 0.68],
            [-0.23, 0.95, -0.83, -0.89],
            [-0.30, 0.91, 0.47, -0.15]],
}
_SIGMA2 = {
    "I": [0.15, 0.46, 0.24, 0.08],
    "II": [0.29, 0.37, 0.44, 0.02],
    "III": [0.22, 0.35, 0.25, 0.05],
}


@dataclass(frozen=True)
class BuiltinModel:
    name: str
    spec: EigenSpec
    noise: NoiseSpec

    @property
    def m1(self) -> int:
        return self.spec.m1

    @property
    def p(self) -> int:
        return self.spec.m1

    @property
    def blocks(self):
        return self.spec.blocks

    def theta(self) -> PeriodicCoefficients:
        return theta_general(self.spec)


def table2_model(name: str) -> BuiltinModel:
    key = name.split(":", 1)[1] if name.startswith("table2:") else name
    if key not in _SEEDS:
        raise InputError(f"unknown built-in model {name!r}; expected table2:I, table2:II or table2:III")
    seeds = np.array(_SEEDS[key]).T
    m1 = seeds.shape[1]
    spec = EigenSpec(d=4, m=4, blocks=(1,) * m1, seeds=seeds)
    return BuiltinModel(f"table2:{key}", spec, NoiseSpec(_SIGMA2[key]))


BUILTIN: Dict[str, str] = {f"table2:{k}": f"quarterly PIAR with {len(v)} simple unit root(s)"
                           for k, v in _SEEDS.items()}
