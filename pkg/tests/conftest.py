import os

import numpy as np
from hypothesis import settings
from hypothesis import strategies as st

from hyperquantile.paths import CadlagPath


def random_path(rng: np.random.Generator, kind: str | None = None, k: int | None = None) -> CadlagPath:
    kind = kind or rng.choice(["step", "linear"])
    k = int(k or rng.integers(1, 12))
    gaps = rng.uniform(0.05, 1.0, size=k)
    bp = np.concatenate(([0.0], np.cumsum(gaps)))
    if rng.random() < 0.3:
        # repeated values make ties and atoms
        vals = rng.integers(-3, 4, size=k + 1).astype(float)
    else:
        vals = rng.normal(size=k + 1)
    return CadlagPath(bp, vals, kind)


@st.composite
def paths(draw, kind=None, max_k=10):
    k = draw(st.integers(1, max_k))
    gaps = draw(st.lists(st.floats(0.05, 2.0), min_size=k, max_size=k))
    ints = draw(st.booleans())
    if ints:
        vals = draw(st.lists(st.integers(-4, 4), min_size=k + 1, max_size=k + 1))
    else:
        vals = draw(st.lists(st.floats(-5, 5, allow_nan=False), min_size=k + 1, max_size=k + 1))
    interp = kind or draw(st.sampled_from(["step", "linear"]))
    bp = np.concatenate(([0.0], np.cumsum(gaps)))
    return CadlagPath(bp, np.asarray(vals, float), interp)


settings.register_profile("thorough", max_examples=2000, deadline=None)
settings.register_profile("default", deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


# one (name, passed, detail) entry per acceptance criterion, echoed after the run
ACCEPTANCE: list[tuple[str, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
