"""Exhaustive matchmaking cases for the mock grid.

Shared by the backend unit tests and the acceptance suite. Enumerates
every computing-element set of size 1..5 where each element draws its
MemoryMB capacity from 3 values (3^1 + ... + 3^5 = 363 sets), crosses
them with a fixed list of requirement patterns, and checks the
handler's selection against an independently coded brute-force matcher.
"""

import itertools

from forge.backends import ComputingElement
from forge.backends.mockgrid import match_ce
from forge.errors import MatchFailure

MEMORY_VALUES = (256, 512, 1024)

PATTERNS = (
    (),
    (("MinMemoryMB", ">=", 256),),
    (("MinMemoryMB", ">=", 512),),
    (("MinMemoryMB", ">=", 1024),),
    (("MemoryMB", ">=", 512),),
    (("Queue", "==", "long"),),
    (("MinMemoryMB", ">=", 512), ("Queue", "==", "long")),
    (("MinDiskMB", ">=", 1),),          # nobody advertises disk
    (("Queue", "==", "gpu"),),          # nobody advertises this queue
)


def make_ces(memories):
    """One CE per memory value; queue and slots vary by position."""
    ces = []
    for i, mem in enumerate(memories):
        ces.append(ComputingElement(
            name=f"ce-{i}",
            attributes={"MemoryMB": mem, "Queue": "long" if i % 2 == 0 else "short"},
            slots=1 + (i % 3),
        ))
    return ces


def oracle_clause(ce, attr, op, value):
    """Independent restatement of the matching rules."""
    if op == ">=":
        name = attr
        if attr.startswith("Min") and attr[3:] in ce.attributes:
            name = attr[3:]
        if name not in ce.attributes:
            return False
        actual = ce.attributes[name]
        if not isinstance(actual, (int, float)) or isinstance(actual, bool):
            return False
        return actual >= value
    return attr in ce.attributes and ce.attributes[attr] == value


def oracle_match(ces, requirements, free):
    eligible = [ce for ce in ces
                if all(oracle_clause(ce, a, o, v) for a, o, v in requirements)]
    if not eligible:
        return None
    best = max(eligible, key=lambda ce: max(free(ce.name), 0))
    best_free = max(free(best.name), 0)
    tied = [ce for ce in eligible if max(free(ce.name), 0) == best_free]
    return min(tied, key=lambda ce: ce.name)


def all_ce_sets(max_size=5):
    for size in range(1, max_size + 1):
        for memories in itertools.product(MEMORY_VALUES, repeat=size):
            yield make_ces(memories)


def run_exhaustive(max_size=5):
    """Returns the number of agreeing cases; raises on any disagreement."""
    cases = 0
    for ces in all_ce_sets(max_size):
        free = {ce.name: ce.slots for ce in ces}

        def free_slots(name, table=free):
            return table.get(name, 0)

        for pattern in PATTERNS:
            expected = oracle_match(ces, pattern, free_slots)
            try:
                got = match_ce(ces, pattern, free_slots)
            except MatchFailure:
                got = None
            assert (got.name if got else None) == (expected.name if expected else None), (
                f"CEs {[(c.name, c.attributes, c.slots) for c in ces]} "
                f"pattern {pattern}: handler {got and got.name}, "
                f"oracle {expected and expected.name}")
            cases += 1
    return cases
