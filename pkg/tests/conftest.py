import numpy as np
from hypothesis import settings, strategies as st

from rtsched.topology import InterferenceGraph
from rtsched.traffic import FrameArrivals

RESULTS: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(RESULTS, key=lambda l: int(l.split("criterion ")[1].split()[0])):
            terminalreporter.write_line(line)


settings.register_profile("default", deadline=None, max_examples=100)
settings.load_profile("default")


@st.composite
def graphs(draw, max_links=6):
    n = draw(st.integers(1, max_links))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    edges = draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    return InterferenceGraph(n, frozenset(edges))


@st.composite
def frames(draw, n, max_slots=3, max_count=2):
    """Random disjoint deadline windows for ``n`` links."""
    T = draw(st.integers(1, max_slots))
    windows = []
    for _ in range(n):
        ws, t = [], 0
        while t < T:
            if draw(st.booleans()):
                deadline = draw(st.integers(t, T - 1))
                ws.append((t, draw(st.integers(1, max_count)), deadline))
                t = deadline + 1
            else:
                t += 1
        windows.append(ws)
    return FrameArrivals.from_lists(T, windows)


def random_frame(rng: np.random.Generator, n: int, T: int, max_count: int = 2) -> FrameArrivals:
    windows = []
    for _ in range(n):
        ws, t = [], 0
        while t < T:
            if rng.random() < 0.6:
                deadline = int(rng.integers(t, T))
                ws.append((t, int(rng.integers(1, max_count + 1)), deadline))
                t = deadline + 1
            else:
                t += 1
        windows.append(ws)
    return FrameArrivals.from_lists(T, windows)


def random_graph(rng: np.random.Generator, n: int, density: float = 0.5) -> InterferenceGraph:
    edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < density]
    return InterferenceGraph.from_edges(n, edges)


def random_static_problem(rng: np.random.Generator, epsilon: float = 0.1):
    """Up to 3 links, T <= 2, two arrival and two channel support points."""
    from rtsched.scheduling import SchedulerConfig
    from rtsched.static import StaticProblem

    L, T = int(rng.integers(1, 4)), int(rng.integers(1, 3))
    g = random_graph(rng, L)
    arr = []
    for _ in range(2):
        counts = rng.integers(0, 3, L)
        arr.append(FrameArrivals.from_lists(T, [[(0, int(c), T - 1)] if c else [] for c in counts]))
    pa = float(rng.random())
    channels = [(rng.integers(0, 3, L), 0.5), (rng.integers(1, 3, L), 0.5)]
    cfg = SchedulerConfig(rng.integers(0, 4, L).astype(float), epsilon, rng.uniform(0.3, 1, L))
    return StaticProblem(g, [(arr[0], pa), (arr[1], 1 - pa)], channels, cfg)
