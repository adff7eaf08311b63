"""Exact-arithmetic higher Hochschild complexes over simplicial surface
models: homology, genus-graded cup/surface products, and free-model
comparison maps."""

__version__ = "0.1.0"
