"""Non-vanishing criteria for E[p]-parts of class groups of division fields."""

__version__ = "0.1.0"
__description__ = """Exact p-adic valuations, Tate's algorithm and formal logarithms
for elliptic curves over Q, feeding two non-vanishing verdict engines"""
