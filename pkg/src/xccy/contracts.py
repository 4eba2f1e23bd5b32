"""Bilateral contracts as finite streams of dated cashflows.

A contract is a finite list of (time, amount) lumps in one native currency,
signed from the hedger's point of view (negative = the hedger pays). The
optional flow at time 0 is the contract's inception price.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ConfigError


@dataclass(frozen=True)
class Contract:
    native_currency: str
    flows: tuple[tuple[float, float], ...]
    initial_flow: float = 0.0

    def __init__(self, native_currency, flows, initial_flow=0.0):
        flows = tuple((float(t), float(a)) for t, a in flows)
        for t, _ in flows:
            if t <= 0:
                raise ConfigError(f"flow time {t} must be strictly positive; use initial_flow for t=0")
        flows = tuple(sorted(flows))
        object.__setattr__(self, "native_currency", native_currency)
        object.__setattr__(self, "flows", flows)
        object.__setattr__(self, "initial_flow", float(initial_flow))

    @property
    def flow_times(self) -> tuple[float, ...]:
        return tuple(t for t, _ in self.flows)

    @property
    def maturity(self) -> float:
        return self.flows[-1][0] if self.flows else 0.0

    def scaled(self, factor: float) -> "Contract":
        return Contract(
            self.native_currency,
            tuple((t, factor * a) for t, a in self.flows),
            factor * self.initial_flow,
        )

    def plus(self, other: "Contract") -> "Contract":
        if other.native_currency != self.native_currency:
            raise ConfigError("can only add contracts in the same native currency")
        return Contract(
            self.native_currency,
            self.flows + other.flows,
            self.initial_flow + other.initial_flow,
        )

    @classmethod
    def zero(cls, currency: str) -> "Contract":
        return cls(currency, ())

    @classmethod
    def from_dict(cls, doc: dict) -> "Contract":
        return cls(
            native_currency=doc["currency"],
            flows=tuple((float(t), float(a)) for t, a in doc.get("flows", [])),
            initial_flow=float(doc.get("initial_flow", 0.0)),
        )
