"""Configuration and report models"""
