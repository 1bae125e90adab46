"""Benchmark harness: all algorithms over a situation set"""

from src.bench.benchmark import BenchmarkResult, run_benchmark

__all__ = ["BenchmarkResult", "run_benchmark"]
