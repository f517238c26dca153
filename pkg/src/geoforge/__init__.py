"""geoforge: flag-transitive geometries for primitive permutation groups."""
__version__ = "0.1.0"
