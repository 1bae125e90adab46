"""Golden regression data"""

from src.fixtures.golden import GoldenExample, golden_screening, load_golden

__all__ = ["GoldenExample", "golden_screening", "load_golden"]
