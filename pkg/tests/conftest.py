"""Shared test configuration.

A conftest at the tests root guarantees this directory is on sys.path, so
the exact-arithmetic oracle module imports the same way no matter where
pytest is invoked from.
"""
