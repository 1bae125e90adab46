"""
Optimize: 격자 탐색 / 교차 엔트로피 기동 최적화
"""
