"""Wiometric navigation pipeline bindings."""

try:
    from ._wiom import *  # noqa: F401,F403 (installed layout: extension inside package)
except ImportError:
    from _wiom import *  # noqa: F401,F403 (build-tree layout: extension on sys.path)
