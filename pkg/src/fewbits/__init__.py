"""Odd integers a, b with s(a)=l, s(b)=m and s(ab)=k, where s counts binary ones."""
from .sparsebin import ExponentMultiset, SparseBin, normalize

__version__ = "0.1.0"

__all__ = ["ExponentMultiset", "SparseBin", "normalize", "__version__"]
