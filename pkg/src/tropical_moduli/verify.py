"""Verification suites: computed homology against reference values and
structural theorems.  Each target yields one ``VerificationReport``."""
from __future__ import annotations

import os
import time
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from math import factorial
from typing import Callable

from .complexes import (
    BR,
    LW,
    REP,
    W,
    K_complex,
    cellular_complex,
    marked_graph_complex,
)
from .enumeration import CapacityError
from .genus_one import cell_action_character, induced_character, top_betti_formula
from .linalg import BudgetError, betti
from .transfer import verify_transfer_identity

# reduced Betti numbers b_0 .. b_{3g-4+n} of the full moduli space
REFERENCE_BETTI: dict[tuple[int, int], tuple[int, ...]] = {
    (2, 0): (0, 0, 0),
    (2, 1): (0, 0, 0, 0),
    (2, 2): (0, 0, 0, 0, 1),
    (2, 3): (0, 0, 0, 0, 0, 0),
    (2, 4): (0, 0, 0, 0, 0, 1, 3),
    (2, 5): (0, 0, 0, 0, 0, 0, 5, 15),
    (2, 6): (0, 0, 0, 0, 0, 0, 0, 26, 86),
    (2, 7): (0, 0, 0, 0, 0, 0, 0, 0, 155, 575),
    (2, 8): (0, 0, 0, 0, 0, 0, 0, 0, 0, 1066, 4426),
    (3, 0): (0, 0, 0, 0, 0, 1),
    (3, 1): (0, 0, 0, 0, 0, 1, 0),
    (3, 2): (0, 0, 0, 0, 0, 0, 0, 0),
    (3, 3): (0, 0, 0, 0, 0, 0, 0, 0, 1),
    (3, 4): (0, 0, 0, 0, 0, 0, 0, 0, 3, 2),
    (4, 0): (0,) * 9,
    (4, 1): (0,) * 10,
    (4, 2): (0,) * 11,
    (4, 3): (0,) * 10 + (2, 1),
    (5, 0): (0,) * 9 + (1, 0, 0),
    (5, 1): (0,) * 9 + (1, 0, 0, 0),
    (6, 0): (0,) * 14 + (1,),
}

SMALL_ROWS = [(2, n) for n in range(6)] + [(3, n) for n in range(4)] + [(4, n) for n in range(3)]
LONG_ROWS = [(2, 6), (2, 7), (2, 8), (4, 3), (5, 0), (5, 1), (6, 0)]
GENUS_ONE_RANGE = range(3, 8)
CHARACTER_RANGE = range(3, 9)


def genus_one_expected(n: int) -> tuple[int, ...]:
    return (0,) * (n - 1) + (factorial(n - 1) // 2,)


def expected_betti(g: int, n: int) -> tuple[int, ...] | None:
    if g == 1 and n >= 3:
        return genus_one_expected(n)
    return REFERENCE_BETTI.get((g, n))


@dataclass
class VerificationReport:
    target: str
    computed: object
    expected: object
    status: str  # "match", "mismatch" or "skipped-capacity"
    seconds: float
    params: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.status != "mismatch"

    def line(self) -> str:
        return f"[{self.status}] {self.target}: computed {self.computed} expected {self.expected} ({self.seconds:.1f}s)"

    def to_json(self) -> dict:
        return asdict(self)


def _run(target: str, params: dict, compute: Callable[[], object], expected) -> VerificationReport:
    start = time.perf_counter()
    try:
        computed = compute()
    except (CapacityError, BudgetError) as exc:
        return VerificationReport(target, str(exc), expected, "skipped-capacity", time.perf_counter() - start, params)
    status = "match" if computed == expected else "mismatch"
    return VerificationReport(target, computed, expected, status, time.perf_counter() - start, params)


@lru_cache(maxsize=None)
def reduced_betti(g: int, n: int, selector: str = "full") -> tuple[int, ...]:
    return betti(cellular_complex(g, n, selector)).vector(0, 3 * g - 4 + n)


def _row_target(g: int, n: int) -> VerificationReport:
    return _run(
        f"betti({g},{n})",
        {"g": g, "n": n, "selector": "full"},
        lambda: reduced_betti(g, n),
        expected_betti(g, n),
    )


def suite_reference_rows(long: bool) -> list[tuple]:
    rows = SMALL_ROWS + [(1, n) for n in GENUS_ONE_RANGE]
    return [(_row_target, (g, n)) for g, n in rows]


def suite_reference_long(long: bool) -> list[tuple]:
    if not long:
        return [(_skipped, (f"betti({g},{n})", "pass --long")) for g, n in LONG_ROWS]
    return [(_row_target, (g, n)) for g, n in LONG_ROWS]


def _skipped(target: str, why: str) -> VerificationReport:
    return VerificationReport(target, why, None, "skipped-capacity", 0.0, {})


def _genus_one_homology(n: int) -> VerificationReport:
    return _row_target(1, n)


def _character(n: int) -> VerificationReport:
    def compute():
        a, b = induced_character(n), cell_action_character(n)
        return {"agree": a.values == b.values, "degree": int(b.degree)}

    return _run(
        f"character({n})",
        {"n": n},
        compute,
        {"agree": True, "degree": top_betti_formula(n)},
    )


def suite_genus1(long: bool) -> list[tuple]:
    return [(_genus_one_homology, (n,)) for n in GENUS_ONE_RANGE] + [
        (_character, (n,)) for n in CHARACTER_RANGE
    ]


def _transfer(g: int) -> VerificationReport:
    def compute():
        r = verify_transfer_identity(g)
        return {
            "t_chain_map": r.t_chain_map,
            "pi_chain_map": r.pi_chain_map,
            "pi_t_identity": r.identity_holds,
            "injective_on_homology": r.injective_on_homology,
        }

    expected = dict.fromkeys(
        ["t_chain_map", "pi_chain_map", "pi_t_identity", "injective_on_homology"], True
    )
    return _run(f"transfer(g={g})", {"g": g}, compute, expected)


def suite_transfer(long: bool) -> list[tuple]:
    return [(_transfer, (g,)) for g in (2, 3)]


def vanishing_bound(g: int, n: int) -> int:
    return max(2 * g - 1, 2 * g - 3 + n)


def _vanishing(g: int, n: int) -> VerificationReport:
    bound = vanishing_bound(g, n)
    return _run(
        f"vanishing({g},{n}) below degree {bound}",
        {"g": g, "n": n},
        lambda: reduced_betti(g, n)[:bound],
        (0,) * min(bound, 3 * g - 3 + n),
    )


def computed_rows(long: bool) -> list[tuple[int, int]]:
    rows = [(1, n) for n in GENUS_ONE_RANGE] + SMALL_ROWS
    return rows + (LONG_ROWS if long else [])


def suite_vanishing(long: bool) -> list[tuple]:
    return [(_vanishing, row) for row in computed_rows(long)]


ACYCLIC_SELECTORS = {"w": W, "lw": LW, "rep": REP, "br": BR}


def expected_empty(sel: str, g: int, n: int) -> bool:
    if sel in ("w", "br"):
        return (g, n) == (1, 1)
    if sel == "rep":
        return n <= 1
    return False


def acyclicity_rows() -> list[tuple[int, int]]:
    return [(g, n) for g in range(1, 4) for n in range(8) if 0 < 2 * g - 2 + n <= 5]


def _acyclic(g: int, n: int, sel: str) -> VerificationReport:
    def compute():
        table = betti(cellular_complex(g, n, ACYCLIC_SELECTORS[sel]))
        return {"empty": table.empty, "total_betti": table.total}

    return _run(
        f"acyclic({g},{n},{sel})",
        {"g": g, "n": n, "selector": sel},
        compute,
        {"empty": expected_empty(sel, g, n), "total_betti": 0},
    )


def suite_acyclicity(long: bool) -> list[tuple]:
    return [(_acyclic, (g, n, s)) for g, n in acyclicity_rows() for s in ACYCLIC_SELECTORS]


def shift_rows() -> list[tuple[int, int]]:
    rows = [(1, n) for n in GENUS_ONE_RANGE] + SMALL_ROWS
    return [(g, n) for g, n in rows if g >= 1 and 2 * g - 2 + n >= 2]


def _graph_homology(C, lo: int, hi: int) -> tuple[int, ...]:
    return betti(C).vector(lo, hi)


def _shift(g: int, n: int, kind: str) -> VerificationReport:
    top = 3 * g - 3 + n - 2 * g
    lo = 1 - 2 * g

    def compute():
        C = marked_graph_complex(g, n) if kind == "G" else K_complex(g, n)
        return _graph_homology(C, lo, top)

    def expected():
        full = reduced_betti(g, n)
        return tuple(full[k + 2 * g - 1] if k + 2 * g - 1 >= 0 else 0 for k in range(lo, top + 1))

    return _run(
        f"shift({g},{n},{kind})",
        {"g": g, "n": n, "complex": kind},
        compute,
        expected(),
    )


def suite_shift(long: bool) -> list[tuple]:
    out = []
    for g, n in shift_rows():
        out.append((_shift, (g, n, "G")))
        if (g, n) != (1, 1):
            out.append((_shift, (g, n, "K")))
    return out


SUITES: dict[str, Callable[[bool], list[tuple]]] = {
    "table1-small": suite_reference_rows,
    "table1-full": suite_reference_long,
    "genus1": suite_genus1,
    "transfer": suite_transfer,
    "vanishing": suite_vanishing,
    "acyclicity": suite_acyclicity,
    "shift": suite_shift,
}


def _call(job):
    fn, args = job
    return fn(*args)


def run_suite(name: str, long: bool = False) -> list[VerificationReport]:
    """Run every target of a suite; results come back in target order."""
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    jobs = SUITES[name](long)
    threads = max(1, int(os.environ.get("TROPICAL_THREADS", "1")))
    if threads > 1 and len(jobs) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(threads) as pool:
            return list(pool.map(_call, jobs))
    return [_call(job) for job in jobs]
