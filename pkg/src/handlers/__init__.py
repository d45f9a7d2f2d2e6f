"""Rewrite and pipeline stage handlers package"""
