"""Child-process bridge between the verse generator and a causal LM."""

__version__ = "0.1.0"
