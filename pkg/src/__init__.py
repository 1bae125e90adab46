"""CAM Optimization Lab - Core Package"""

__version__ = "0.1.0"
