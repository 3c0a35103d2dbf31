import sys
from itertools import combinations
from pathlib import Path

from hypothesis import settings, strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from hypercount import Hypergraph  # noqa: E402

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@st.composite
def hypergraphs(draw, max_n: int = 7, ks=(2, 3), min_n: int | None = None):
    k = draw(st.sampled_from(ks))
    n = draw(st.integers(min_value=k if min_n is None else max(min_n, k), max_value=max_n))
    all_sets = list(combinations(range(n), k))
    mask = draw(st.lists(st.booleans(), min_size=len(all_sets), max_size=len(all_sets)))
    return Hypergraph(n, k, [e for e, keep in zip(all_sets, mask) if keep])


@st.composite
def linear_hypergraphs(draw, max_m: int = 8, ks=(2, 3)):
    k = draw(st.sampled_from(ks))
    m = draw(st.integers(min_value=k, max_value=max_m))
    order = draw(st.permutations(list(combinations(range(m), k))))
    cap = draw(st.integers(min_value=0, max_value=len(order)))
    edges: list[tuple[int, ...]] = []
    for e in order[:cap]:
        if all(len(set(e) & set(f)) <= 1 for f in edges):
            edges.append(e)
    return Hypergraph(m, k, edges)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for _, (_, line) in sorted(mod.RESULTS.items()):
        terminalreporter.write_line(line)
