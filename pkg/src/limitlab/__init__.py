"""limitlab: a simulation laboratory for limit learning of countable
relational structures."""

__all__ = [
    "structures",
    "catalog",
    "sigma1",
    "learners",
    "reductions",
    "adversaries",
    "harness",
]

__version__ = "0.1.0"
