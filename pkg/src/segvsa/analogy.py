"""
The "dollar of Mexico" analogy as a self-checking routine.

Two country records are built from role/filler pairs:

    mexico = P_code*mex (+) P_capital*mexicoCity (+) P_currency*peso
    us     = P_code*usa (+) P_capital*dc         (+) P_currency*dollar

and a series of probes is answered by cleanup against the nine base codes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Tuple

from .algebra import bind, bundle_uniform, release
from .cleanup import Codebook, Match
from .core import Hypervector, RngStream, SpaceConfig, random_code

SYMBOLS = (
    "P_code", "P_capital", "P_currency",
    "mex", "mexicoCity", "peso",
    "usa", "dc", "dollar",
)


@dataclass(frozen=True)
class Retrieval:
    name: str
    expected: str
    matches: Tuple[Match, ...]

    @property
    def ok(self) -> bool:
        return self.matches[0].label == self.expected


def dollar_of_mexico(seed: int = 0, space: SpaceConfig = SpaceConfig(), topk: int = 3) -> List[Retrieval]:
    rng = RngStream(seed)
    c: Dict[str, Hypervector] = {name: random_code(space, rng) for name in SYMBOLS}
    book = Codebook(space)
    for name in SYMBOLS:
        book.insert(name, c[name])

    def record(code, capital, currency):
        return bundle_uniform(
            [
                bind([c["P_code"], c[code]]),
                bind([c["P_capital"], c[capital]]),
                bind([c["P_currency"], c[currency]]),
            ],
            rng,
        )

    mexico = record("mex", "mexicoCity", "peso")
    us = record("usa", "dc", "dollar")

    transfer = bundle_uniform(
        [
            release(c["usa"], c["mex"]),
            release(c["dc"], c["mexicoCity"]),
            release(c["dollar"], c["peso"]),
        ],
        rng,
    )
    us_prime = bind([mexico, transfer])

    probes = [
        ("capital of mexico", release(mexico, c["P_capital"]), "mexicoCity"),
        ("currency of us", release(us, c["P_currency"]), "dollar"),
        ("role of peso", release(mexico, c["peso"]), "P_currency"),
        ("role of usa", release(us, c["usa"]), "P_code"),
        ("dollar of mexico", release(bind([c["dollar"], mexico]), us), "peso"),
        ("dc of mexico", release(bind([c["dc"], mexico]), us), "mexicoCity"),
        ("usa of mexico", release(bind([c["usa"], mexico]), us), "mex"),
        ("transfer code", release(us_prime, c["P_code"]), "usa"),
        ("transfer capital", release(us_prime, c["P_capital"]), "dc"),
        ("transfer currency", release(us_prime, c["P_currency"]), "dollar"),
    ]
    return [Retrieval(name, want, tuple(book.nearest(q, topk))) for name, q, want in probes]
