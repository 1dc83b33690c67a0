"""Phase-space restriction experiments on the flat circle and 2-torus."""
__version__ = "0.1.0"
