"""Explicit cubic Chabauty-Kim computations on elliptic curves."""
