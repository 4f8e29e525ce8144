"""
nanores - memristive nanowire network reservoir simulator.

This package simulates self-assembled memristive nanowire networks driven by
raw spoken-digit audio and provides the classification harness used to compare
network-processed ("hybrid") features against raw audio features.
"""

__version__ = "0.1.0"
