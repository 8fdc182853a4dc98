"""Construction of systems from configs"""
