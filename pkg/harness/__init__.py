"""
Kerr Fock Generation - Harness
Configuration, persistence and the command-line studies built on the algorithms package.
"""
