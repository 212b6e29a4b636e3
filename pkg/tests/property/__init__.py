"""속성 기반 테스트 패키지"""
