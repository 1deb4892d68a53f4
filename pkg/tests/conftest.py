"""Shared test configuration.

Property-based tests use a deterministic hypothesis profile so the suite
is reproducible and free of per-example deadlines (several properties
assemble meshes or run short solves, whose first call can be slow).
"""

from hypothesis import settings

settings.register_profile(
    "fracpot",
    deadline=None,
    max_examples=50,
    derandomize=True,
)
settings.load_profile("fracpot")
