"""LLM provider client package"""
