"""Built-in model catalog with ground-truth verdicts.

Each entry's TOML document is exactly what `load_model` accepts, so the
catalog doubles as documentation of the model-file format.  Expected
verdicts are reproduced by the conditions module under default parameters
and seed 0; that reproduction is itself a test.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .boxes import Rectangle
from .field import ModelSpec, load_model

__all__ = ["ZooEntry", "list_models", "get_model", "model_names"]


@dataclass(frozen=True)
class ZooEntry:
    name: str
    document: str
    expected_verdict: str  # quasi-positivity (or nonautonomous) verdict
    nonautonomous_interval: Optional[tuple[float, float]] = None
    expected_rectangle_verdict: Optional[str] = None
    witness_hint: Optional[tuple[float, ...]] = None
    note: str = ""
    verified_by: str = ""

    @property
    def model(self) -> ModelSpec:
        return load_model(self.document)

    @property
    def rectangle(self) -> Optional[Rectangle]:
        return self.model.rectangle


_ENTRIES = [
    ZooEntry(
        name="rotation",
        document="""\
names = ["u", "v"]
f = ["v", "-u"]
d = [1.0, 1.0]
""",
        expected_verdict="violated",
        witness_hint=(10.0, 0.0),
        note="planar rotation; vanishes at the origin yet exits the orthant",
        verified_by="f2(u,0) = -u < 0 for u > 0",
    ),
    ZooEntry(
        name="scalar-affine",
        document="""\
names = ["u"]
f = ["1 - u"]
d = [1.0]
""",
        expected_verdict="satisfied",
        note="scalar case: the face condition is just f(0) = 1 >= 0",
        verified_by="hand evaluation f(0)=1",
    ),
    ZooEntry(
        name="sir",
        document="""\
names = ["s", "i", "r"]
f = ["-0.3*s*i", "0.3*s*i - 0.1*i", "0.1*i"]
""",
        expected_verdict="satisfied",
        note="epidemic compartments; every term vanishes or is nonnegative on its face",
        verified_by="f_s(0,i,r)=0, f_i(s,0,r)=0, f_r = 0.1 i >= 0",
    ),
    ZooEntry(
        name="lotka-volterra",
        document="""\
names = ["u", "v"]
f = ["u*(1 - v)", "v*(u - 1)"]
""",
        expected_verdict="satisfied",
        note="predator-prey with unit rates; both components vanish on their faces",
        verified_by="f1(0,v)=0, f2(u,0)=0",
    ),
    ZooEntry(
        name="brusselator",
        document="""\
names = ["u", "v"]
f = ["1 - 4*u + u^2*v", "3*u - u^2*v"]
d = [1.0, 8.0]
[pde]
bc = "neumann"
length = 1.0
cells = 64
""",
        expected_verdict="satisfied",
        note="autocatalytic oscillator (a=1, b=3)",
        verified_by="f1(0,v)=1, f2(u,0)=3u >= 0 on [0,clip]",
    ),
    ZooEntry(
        name="gray-scott",
        document="""\
names = ["u", "v"]
f = ["-u*v^2 + 0.04*(1 - u)", "u*v^2 - 0.1*v"]
d = [0.2, 0.1]
[rectangle]
alpha = [0.0, 0.0]
beta = [1.0, 1.0]
[pde]
bc = "neumann"
length = 1.0
cells = 64
""",
        expected_verdict="satisfied",
        # [0,1]^2 is NOT invariant at feed 0.04 / kill 0.06: on the face
        # v=1 the second component is u - 0.1, positive for u > 0.1.
        expected_rectangle_verdict="violated",
        note="feed/kill 0.04/0.06; orthant ok, unit square exits at v=1",
        verified_by="f2(u,1) = u - 0.1 > 0 at u=1; face analysis by hand",
    ),
    ZooEntry(
        name="chafee-infante",
        document="""\
names = ["u"]
f = ["u - u^3"]
d = [1.0]
[rectangle]
alpha = [-1.0]
beta = [1.0]
""",
        expected_verdict="satisfied",
        expected_rectangle_verdict="satisfied",
        note="bistable cubic; [-1,1] is invariant (f(+-1)=0)",
        verified_by="f(0)=0; f(-1)=0 >= 0, f(1)=0 <= 0",
    ),
    ZooEntry(
        name="nonaut-gprime",
        document="""\
names = ["u"]
f = ["(1 - t)*exp(-t)"]
""",
        expected_verdict="violated",
        nonautonomous_interval=(0.0, 2.0),
        witness_hint=(0.0,),
        note="u' = g'(t) with g(t) = t exp(-t): condition fails for t > 1 "
        "yet the flow from u(0) >= 0 stays nonnegative",
        verified_by="g'(t) = (1-t)exp(-t) < 0 for t > 1; u(t) = u(0) + g(t) >= 0",
    ),
]


def list_models() -> list[ZooEntry]:
    return list(_ENTRIES)


def model_names() -> list[str]:
    return [e.name for e in _ENTRIES]


def get_model(name: str) -> ZooEntry:
    for entry in _ENTRIES:
        if entry.name == name:
            return entry
    raise KeyError(f"no zoo model named {name!r}; known: {', '.join(model_names())}")
