"""Numerical laboratory for the functional equation f(xy) = f(x)g(y) + g(x)f(y) + h(x)h(y)."""

__version__ = "0.1.0"
