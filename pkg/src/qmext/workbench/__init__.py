"""Generators, I/O, brute-force oracle, experiment runner and command line."""
