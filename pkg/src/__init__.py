"""LIWC bias audit toolkit - core package"""
