"""Common building blocks: orbits, conjunctions, reward, metrics and file I/O"""
