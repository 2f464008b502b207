"""
hexinject Engines Module
Layout, circuit, noise, simulation, decoding and experiment engines
"""

# hexinject - Engines Package
# Each engine is a subpackage importable on its own
