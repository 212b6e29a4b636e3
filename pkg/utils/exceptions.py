class SPReachError(Exception):
    """SP 도달성 도구의 기본 예외 클래스"""
    def __init__(self, message, original_error=None, details=None):
        self.message = message
        self.original_error = original_error
        self.details = dict(details or {})
        super().__init__(self.message)

    def to_dict(self):
        """구조화된 오류 정보 (리포트/CLI 출력용)"""
        return {
            "error": type(self).__name__,
            "message": self.message,
            "details": self.details,
        }

class ValidationError(SPReachError):
    """입력 데이터 유효성 검증 오류"""
    pass

class DimensionError(ValidationError):
    """차원 불일치 오류 (details["field"]에 문제 필드 이름)"""
    pass

class DomainError(ValidationError):
    """정의역을 벗어난 입력 (eps ≤ 0, 빈 집합, 격자 밖 좌표 등)"""
    pass

class NumericalError(SPReachError):
    """비유한 값, 고유값 계산 실패 등 수치 오류"""
    pass

class DivergenceError(NumericalError):
    """PDE/ODE 적분 중 발산 (스텝 번호 또는 시각 포함)"""
    pass

class ProgressError(NumericalError):
    """CFL 시간 간격이 너무 작아 진행 불가"""
    pass

class MaximumPrincipleError(NumericalError):
    """HJ 풀이 값이 종단 보상 범위를 허용 오차 이상 벗어남 (스텝, 시각, 값 범위 포함)"""
    pass

class ConfigurationError(SPReachError):
    """설정 오류"""
    pass

class ArtifactError(SPReachError):
    """산출물 파일 읽기/쓰기 오류"""
    pass
