"""Command-line commands"""
