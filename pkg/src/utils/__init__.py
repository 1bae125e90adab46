"""Run configuration and logging helpers"""
