"""
Environment: 위험 상황, 기동, 세션 시뮬레이터, 상황 생성기
"""
