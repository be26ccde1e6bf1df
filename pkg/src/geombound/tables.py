"""Urn-occupancy and Erlang busy-period tables, rendered with fixed rounding."""

from __future__ import annotations

from dataclasses import dataclass
from decimal import ROUND_HALF_EVEN, Decimal

from .bounds import polya_bounds
from .metrics import tv_distance
from .pmf import geometric_pmf, polya_pmf
from .queueing import MG1System, busy_period_bound, erlang, erlang_U

POLYA_ROWS = ((200, 200), (200, 10), (10, 10), (10, 200))
ERLANG_GRID = {
    "k": (1, 5, 10),
    "lambda": (0.001, 0.005, 0.01, 0.05, 0.1),
    "beta": (0.1, 0.5, 1, 1.5, 10),
}


def fixed_dp(x: float, places: int = 4) -> str:
    return format(Decimal(x).quantize(Decimal(1).scaleb(-places), ROUND_HALF_EVEN), "f")


def sig_figs(x: float, figures: int = 4) -> str:
    """Round half-even to ``figures`` significant digits, keeping trailing zeros."""
    d = Decimal(x)
    if d == 0:
        return "0"
    q = d.quantize(Decimal(1).scaleb(d.adjusted() - figures + 1), ROUND_HALF_EVEN)
    if q.adjusted() != d.adjusted():  # rounding carried into a new digit
        q = q.quantize(Decimal(1).scaleb(q.adjusted() - figures + 1), ROUND_HALF_EVEN)
    return format(q, "f")


@dataclass(frozen=True)
class PolyaRow:
    m: int
    d: int
    p: float
    tv_lo: float
    tv_hi: float
    upper_tv: float
    upper_k: float
    lower_tv: float

    def rendered(self) -> dict:
        return {
            "m": str(self.m),
            "d": str(self.d),
            "p": fixed_dp(self.p),
            "d_tv": sig_figs(self.tv_lo),
            "upper_tv": sig_figs(self.upper_tv),
            "upper_k_obretenov": sig_figs(self.upper_k),
            "lower_tv": sig_figs(self.lower_tv),
        }


def polya_row(m: int, d: int) -> PolyaRow:
    if m == 0:
        # every ball count is zero and Geom(1) is the point mass at 0
        return PolyaRow(0, d, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    b = polya_bounds(m, d)
    tv = tv_distance(polya_pmf(m, d), geometric_pmf(b["p"]))
    return PolyaRow(m, d, b["p"], tv.lo, tv.hi, b["upper_tv"].value, b["upper_k_obretenov"].value, b["lower_tv"])


def polya_table(rows=POLYA_ROWS) -> list[PolyaRow]:
    return [polya_row(int(m), int(d)) for m, d in rows]


@dataclass(frozen=True)
class ErlangCell:
    k: int
    lam: float
    beta: float
    U: float | None  # None when the queue is unstable
    U_from_bound: float | None

    @property
    def rendered(self) -> str:
        if self.U is None:
            return "--"
        if self.U > 1:
            return ">1"
        return fixed_dp(self.U)


def erlang_cell(k: int, lam: float, beta: float, cross_check: bool = False) -> ErlangCell:
    u = erlang_U(k, lam, beta)
    via_bound = None
    if cross_check and u is not None:
        via_bound = busy_period_bound(MG1System(lam, erlang(k, beta))).ingredients["U"]
    return ErlangCell(k, lam, beta, u, via_bound)


def erlang_table(grid: dict = ERLANG_GRID, cross_check: bool = False) -> list[ErlangCell]:
    return [
        erlang_cell(int(k), float(lam), float(beta), cross_check)
        for k in grid["k"]
        for lam in grid["lambda"]
        for beta in grid["beta"]
    ]
