"""
Test suite for the LIWC bias audit toolkit.
"""
