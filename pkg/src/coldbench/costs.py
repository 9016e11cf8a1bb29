"""Cloud archive cost model: tier pricing, total-cost equation, breakdowns,
moving-out curve, migration charges, and tier advisory.

Money is exact internally: rates are parsed into Fractions, every component
is an exact rational, and reports quantize to integer cents (banker's
rounding) only at the edge.  Totals therefore sum exactly in cents and
repeated runs produce identical output.

The built-in "azure-2019" catalog carries the three blob-storage classes
this package ships as its reference price list:

    archive: $0.0045/GB/month storage, $0.02/GB retrieval, $0.5/10k GETs, hours-class latency
    cool:    $0.0334/GB/month storage, $0.01/GB retrieval, $0.01/10k GETs, 61.4 ms
    hot:     $0.0422/GB/month storage, free retrieval,     $0.004/10k GETs, 5.3 ms
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal, ROUND_HALF_EVEN
from fractions import Fraction
from typing import Optional, Sequence, Union

RateLike = Union[int, str, float, Decimal, Fraction]

# Capacity conventions for "1 PB" style scenarios.  Binary is the default
# used by the shipped reference scenarios; decimal is available for users
# who mean 10^15 bytes.
PIB_BINARY_GB = Fraction(2**20)
PB_DECIMAL_GB = Fraction(10**6)

_CENT = Decimal("0.01")


def as_rate(value: RateLike) -> Fraction:
    """Exact Fraction from a price literal.

    Floats go through their shortest decimal repr so 0.0422 means exactly
    $0.0422, not the nearest binary double.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, Decimal):
        return Fraction(value)
    return Fraction(Decimal(str(value)))


def cents(amount: Fraction) -> Decimal:
    """Quantize an exact dollar amount to cents (banker's rounding)."""
    dec = Decimal(amount.numerator) / Decimal(amount.denominator)
    return dec.quantize(_CENT, rounding=ROUND_HALF_EVEN)


@dataclass(frozen=True)
class TierPricing:
    """Price-performance profile of one storage class.

    nominal_latency_us is None for offline (hours-class) tiers that must be
    rehydrated before data is readable.
    """

    tier_name: str
    storage_per_gb_month: Fraction
    retrieval_per_gb: Fraction
    get_per_10k_requests: Fraction
    nominal_latency_us: Optional[int] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "storage_per_gb_month", as_rate(self.storage_per_gb_month))
        object.__setattr__(self, "retrieval_per_gb", as_rate(self.retrieval_per_gb))
        object.__setattr__(self, "get_per_10k_requests", as_rate(self.get_per_10k_requests))
        for name in ("storage_per_gb_month", "retrieval_per_gb", "get_per_10k_requests"):
            if getattr(self, name) < 0:
                raise ValueError(f"{self.tier_name}: {name} must be >= 0")
        if self.nominal_latency_us is not None and self.nominal_latency_us < 0:
            raise ValueError(f"{self.tier_name}: nominal latency must be >= 0")

    @property
    def offline(self) -> bool:
        """True for tiers whose reads need an hours-class rehydration."""
        return self.nominal_latency_us is None


AZURE_2019: tuple[TierPricing, ...] = (
    TierPricing("archive", Fraction(Decimal("0.0045")), Fraction(Decimal("0.02")),
                Fraction(Decimal("0.5")), None),
    TierPricing("cool", Fraction(Decimal("0.0334")), Fraction(Decimal("0.01")),
                Fraction(Decimal("0.01")), 61_400),
    TierPricing("hot", Fraction(Decimal("0.0422")), Fraction(0),
                Fraction(Decimal("0.004")), 5_300),
)

BUILTIN_CATALOGS: dict[str, tuple[TierPricing, ...]] = {"azure-2019": AZURE_2019}


def builtin_catalog(name: str = "azure-2019") -> tuple[TierPricing, ...]:
    try:
        return BUILTIN_CATALOGS[name]
    except KeyError:
        raise KeyError(f"unknown catalog {name!r}; have {sorted(BUILTIN_CATALOGS)}") from None


def tier(name: str, catalog: Sequence[TierPricing] = AZURE_2019) -> TierPricing:
    for t in catalog:
        if t.tier_name == name:
            return t
    raise KeyError(f"unknown tier {name!r}; have {[t.tier_name for t in catalog]}")


@dataclass(frozen=True)
class CostScenario:
    """An archive sizing plus its lifetime access plan.

    months (M) counts storage months; full_reads (R) counts complete
    read-backs of the archive.  blob_size_gb sets the GET-request count:
    a full read issues one GET per stored object, partial objects billed
    as whole ones.
    """

    capacity_gb: Fraction
    months: Fraction
    full_reads: Fraction
    blob_size_gb: Fraction = Fraction(1, 4)
    egress_per_gb: Fraction = Fraction(Decimal("0.05"))

    def __post_init__(self) -> None:
        object.__setattr__(self, "capacity_gb", as_rate(self.capacity_gb))
        object.__setattr__(self, "months", as_rate(self.months))
        object.__setattr__(self, "full_reads", as_rate(self.full_reads))
        object.__setattr__(self, "blob_size_gb", as_rate(self.blob_size_gb))
        object.__setattr__(self, "egress_per_gb", as_rate(self.egress_per_gb))
        if self.capacity_gb <= 0:
            raise ValueError("capacity_gb must be > 0")
        if self.blob_size_gb <= 0:
            raise ValueError("blob_size_gb must be > 0")
        if self.months < 0 or self.full_reads < 0:
            raise ValueError("months and full_reads must be >= 0")
        if self.egress_per_gb < 0:
            raise ValueError("egress_per_gb must be >= 0")

    @property
    def blob_count(self) -> int:
        return math.ceil(self.capacity_gb / self.blob_size_gb)


@dataclass(frozen=True)
class CostReport:
    """Itemized cost, quantized to cents; total is the exact cent sum."""

    tier_name: str
    storage_cost: Decimal
    retrieval_cost: Decimal
    request_cost: Decimal
    egress_cost: Decimal
    total: Decimal
    storage_fraction: float
    access_fraction: float

    def as_dict(self) -> dict:
        return {
            "tier": self.tier_name,
            "storage_cost": str(self.storage_cost),
            "retrieval_cost": str(self.retrieval_cost),
            "request_cost": str(self.request_cost),
            "egress_cost": str(self.egress_cost),
            "total": str(self.total),
            "storage_fraction": self.storage_fraction,
            "access_fraction": self.access_fraction,
        }


def _components(
    pricing: TierPricing, scenario: CostScenario, include_egress: bool = False
) -> tuple[Fraction, Fraction, Fraction, Fraction]:
    """Exact (storage, retrieval, request, egress) dollars."""
    storage = pricing.storage_per_gb_month * scenario.capacity_gb * scenario.months
    retrieval = pricing.retrieval_per_gb * scenario.capacity_gb * scenario.full_reads
    requests = (
        pricing.get_per_10k_requests
        * Fraction(scenario.blob_count, 10_000)
        * scenario.full_reads
    )
    egress = scenario.egress_per_gb * scenario.capacity_gb if include_egress else Fraction(0)
    return storage, retrieval, requests, egress


def report_from_components(
    tier_name: str,
    storage: Fraction,
    retrieval: Fraction,
    requests: Fraction,
    egress: Fraction = Fraction(0),
) -> CostReport:
    """Build a cent-exact CostReport from exact component dollars."""
    q_storage, q_retrieval, q_requests, q_egress = (
        cents(storage), cents(retrieval), cents(requests), cents(egress),
    )
    total_exact = storage + retrieval + requests + egress
    if total_exact > 0:
        access = float((retrieval + requests + egress) / total_exact)
        storage_frac = 1.0 - access
    else:
        access = 0.0
        storage_frac = 0.0
    return CostReport(
        tier_name=tier_name,
        storage_cost=q_storage,
        retrieval_cost=q_retrieval,
        request_cost=q_requests,
        egress_cost=q_egress,
        total=q_storage + q_retrieval + q_requests + q_egress,
        storage_fraction=storage_frac,
        access_fraction=access,
    )


def total_cost(
    pricing: TierPricing, scenario: CostScenario, include_egress: bool = False
) -> CostReport:
    """Lifetime cost: storage*M + read-back costs*R (+ optional egress).

    Egress is billed separately by providers and excluded unless asked for.
    """
    storage, retrieval, requests, egress = _components(pricing, scenario, include_egress)
    return report_from_components(pricing.tier_name, storage, retrieval, requests, egress)


def exact_total_dollars(
    pricing: TierPricing, scenario: CostScenario, include_egress: bool = False
) -> Fraction:
    """Unquantized total (exact rational dollars); sums before any cent
    rounding, so algebraic identities like linearity hold exactly."""
    return sum(_components(pricing, scenario, include_egress), Fraction(0))


def access_overhead(pricing: TierPricing, scenario: CostScenario) -> float:
    """Fraction of total spend attributable to reading data back.

    Retrieval plus GET-request charges over the total; egress excluded.
    """
    if scenario.months <= 0 or scenario.full_reads <= 0:
        raise ValueError("access_overhead needs months > 0 and full_reads > 0")
    storage, retrieval, requests, _ = _components(pricing, scenario)
    total = storage + retrieval + requests
    if total == 0:
        raise ValueError("undefined for zero total cost")
    return float((retrieval + requests) / total)


def breakdown_percent(pricing: TierPricing, scenario: CostScenario) -> tuple[float, float]:
    """(storage %, access %) of the total; sums to 100."""
    access = access_overhead(pricing, scenario) * 100.0
    return 100.0 - access, access


def moveout_overhead_for_months(pricing: TierPricing, months: RateLike) -> float:
    """Forward curve: share of lifetime cost consumed by the one final
    full read needed to leave the tier after `months` of storage.

    Per-GB ratio; GET-request and egress charges excluded.
    """
    m = as_rate(months)
    if m <= 0:
        raise ValueError("months must be > 0")
    denom = pricing.storage_per_gb_month * m + pricing.retrieval_per_gb
    if denom == 0:
        raise ValueError("degenerate pricing: no storage or retrieval cost")
    return float(pricing.retrieval_per_gb / denom)


def months_for_moveout_overhead(pricing: TierPricing, overhead: RateLike) -> float:
    """Months of storage needed for the moving-out read to be at most the
    given fraction of lifetime cost.  Inverse of the forward curve."""
    o = as_rate(overhead)
    if not (0 < o < 1):
        raise ValueError("overhead must lie strictly between 0 and 1")
    if pricing.storage_per_gb_month <= 0:
        raise ValueError("degenerate pricing: storage rate must be > 0")
    return float((1 - o) / o * pricing.retrieval_per_gb / pricing.storage_per_gb_month)


@dataclass(frozen=True)
class MigrationCost:
    """One-time cost of reading the archive out of a tier."""

    tier_name: str
    cost: Decimal
    equivalent_storage_months: float
    includes_egress: bool


def migration_cost(
    pricing: TierPricing, scenario: CostScenario, include_egress: bool = False
) -> MigrationCost:
    """Cost of one full read-out (retrieval + GETs, optionally + egress),
    also expressed as how many months of storage buy the same spend."""
    retrieval = pricing.retrieval_per_gb * scenario.capacity_gb
    requests = pricing.get_per_10k_requests * Fraction(scenario.blob_count, 10_000)
    exact = retrieval + requests
    if include_egress:
        exact += scenario.egress_per_gb * scenario.capacity_gb
    monthly_storage = pricing.storage_per_gb_month * scenario.capacity_gb
    if monthly_storage <= 0:
        raise ValueError("degenerate pricing: storage rate must be > 0")
    return MigrationCost(
        tier_name=pricing.tier_name,
        cost=cents(exact),
        equivalent_storage_months=float(exact / monthly_storage),
        includes_egress=include_egress,
    )


@dataclass(frozen=True)
class TierAdvice:
    pricing: TierPricing
    report: CostReport


def advise_tier(
    catalog: Sequence[TierPricing], scenario: CostScenario
) -> list[TierAdvice]:
    """Rank catalog tiers by ascending lifetime cost for the scenario."""
    if not catalog:
        raise ValueError("catalog must not be empty")
    ranked = []
    for p in catalog:
        storage, retrieval, requests, _ = _components(p, scenario)
        exact = storage + retrieval + requests
        ranked.append((exact, p.tier_name, TierAdvice(p, total_cost(p, scenario))))
    ranked.sort(key=lambda item: (item[0], item[1]))
    return [advice for _, _, advice in ranked]


def load_catalog(path) -> tuple[TierPricing, ...]:
    """Read a pricing catalog from a TOML file of [[tier]] tables.

    Each table: name, storage_per_gb_month, retrieval_per_gb,
    get_per_10k_requests, and either latency_us or latency = "hours".
    """
    try:
        import tomllib  # Python >= 3.11
    except ModuleNotFoundError:  # pragma: no cover
        import tomli as tomllib
    with open(path, "rb") as fh:
        data = tomllib.load(fh)
    tables = data.get("tier")
    if not tables:
        raise ValueError(f"{path}: no [[tier]] tables")
    out = []
    for t in tables:
        latency_us: Optional[int]
        if "latency_us" in t:
            latency_us = int(t["latency_us"])
        elif str(t.get("latency", "")).lower() == "hours":
            latency_us = None
        else:
            raise ValueError(f"{path}: tier {t.get('name')!r} needs latency_us or latency=\"hours\"")
        out.append(
            TierPricing(
                tier_name=str(t["name"]),
                storage_per_gb_month=as_rate(str(t["storage_per_gb_month"])),
                retrieval_per_gb=as_rate(str(t["retrieval_per_gb"])),
                get_per_10k_requests=as_rate(str(t["get_per_10k_requests"])),
                nominal_latency_us=latency_us,
            )
        )
    return tuple(out)
