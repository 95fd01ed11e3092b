"""Thin band complexes and the chaotic plane sections of a triply periodic surface they describe."""
