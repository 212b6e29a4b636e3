"""예제 SP 시스템 카탈로그

유전자 회로(음성 피드백)와 대사 반응 네트워크(MRN) 모델을 만들고,
모델 기술 문서(JSON 호환)로부터 시스템을 생성합니다.
"""

import logging
from collections import deque
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from models.box_set import BoxSet
from models.system import SPSystem, broadcast_batch
from utils.exceptions import ConfigurationError, DomainError, ValidationError
from utils.validators import ArrayValidator

logger = logging.getLogger("sp_reach")

Edge = Tuple[str, str, Optional[float]]

# 그림 캡션의 기본 집합
GENETIC_U_SET = BoxSet((0.1,), (1.0,))
GENETIC_D_SET = BoxSet((0.5, 0.5, 0.5), (2.0, 2.0, 2.0))
MRN_U_SET = BoxSet((0.0, 0.0), (1.0, 1.0))
MRN_D_SET = BoxSet((0.9,), (1.1,))
PRODUCT_NODE = "p"


def make_genetic_circuit(
    alpha: float = 1.0,
    u_set: Optional[BoxSet] = None,
    d_set: Optional[BoxSet] = None
) -> SPSystem:
    """음성 피드백 유전자 회로

        ż  = α d₁ y − d₂ z
        εẏ = d₃ u²/(u² + z²) − d₁ y

    분해: f = −d₂z, g = d₃u²/(u²+z²), M = −α, A = −d₁ (A가 z에 무관한 유일한 분해).
    """
    alpha = ArrayValidator.positive(alpha, "alpha")
    u_set = u_set or GENETIC_U_SET
    d_set = d_set or GENETIC_D_SET
    if u_set.dim != 1 or d_set.dim != 3:
        raise ValidationError(
            f"유전자 회로는 1차원 제어와 3차원 외란이 필요합니다 (u={u_set.dim}, d={d_set.dim})",
            details={"field": "u_set" if u_set.dim != 1 else "d_set"}
        )

    def f(z, u, d):
        return -d[1] * z

    def g(z, u, d):
        return d[2] * u[0] ** 2 / (u[0] ** 2 + z ** 2)

    def m(z):
        return broadcast_batch([[-alpha]], np.shape(z)[1:])

    def a(z, u, d):
        return broadcast_batch([[-d[0]]], np.shape(z)[1:])

    return SPSystem(
        name="genetic_circuit",
        n_z=1, n_y=1,
        f=f, g=g, M=m, A=a,
        u_set=u_set, d_set=d_set,
        parameters={"alpha": alpha}
    )


def random_mrn_adjacency(n_metabolites: int, seed: int, edge_probability: float = 0.2) -> List[Edge]:
    """무작위 대사 네트워크 (m₁ 상류, p 하류)

    위상 순서 m₁ → … → m_N 사슬을 기본으로, i < j인 m_i → m_j 와 m_i → p 간선을
    edge_probability로 추가합니다. m_N → p는 항상 포함되어 모든 대사물이 p로
    이어집니다. 가중치는 seed로 만든 난수의 균등분포 (0, 1) 표본입니다.
    """
    if n_metabolites < 1:
        raise ValidationError(f"n_metabolites는 1 이상이어야 합니다: {n_metabolites}",
                              details={"field": "n_metabolites"})
    rng = np.random.default_rng(seed)
    names = [f"m{i + 1}" for i in range(n_metabolites)]
    edges: List[Edge] = []
    for i in range(n_metabolites):
        if i + 1 < n_metabolites:
            edges.append((names[i], names[i + 1], None))
        for j in range(i + 2, n_metabolites):
            if rng.random() < edge_probability:
                edges.append((names[i], names[j], None))
        if i + 1 == n_metabolites or rng.random() < edge_probability:
            edges.append((names[i], PRODUCT_NODE, None))
    # 가중치는 위상을 정한 뒤 간선 순서대로 추출
    return [(src, dst, float(rng.uniform(0.0, 1.0))) for src, dst, _ in edges]


def build_mrn_matrices(adjacency: Sequence[Sequence[Any]], seed: Optional[int] = None):
    """가중 간선 목록에서 A_MRN, C_MRN 구성

    T_ij = 노드 j에서 i로 가는 간선 가중치. A_MRN은 p를 제외한 부분행렬에서
    각 대각 원소에 해당 열의 (전체) 열 합을 뺀 것이고, C_MRN은 p의 행에서 p 열을 뺀 것입니다.

    Returns:
        (A_MRN, C_MRN, metabolite_names)
    """
    rng = np.random.default_rng(seed) if seed is not None else None
    edges: List[Tuple[str, str, float]] = []
    for entry in adjacency:
        if len(entry) not in (2, 3):
            raise ValidationError(f"간선 형식 오류: {entry}", details={"field": "adjacency"})
        src, dst = str(entry[0]), str(entry[1])
        weight = entry[2] if len(entry) == 3 else None
        if weight is None:
            if rng is None:
                raise ValidationError(
                    f"가중치 없는 간선 {src}->{dst}: seed가 필요합니다",
                    details={"field": "seed"}
                )
            weight = float(rng.uniform(0.0, 1.0))
        weight = float(weight)
        if not np.isfinite(weight) or weight < 0:
            raise DomainError(f"간선 가중치는 0 이상이어야 합니다: {src}->{dst} ({weight})",
                              details={"field": "adjacency", "edge": [src, dst]})
        if src == PRODUCT_NODE:
            raise DomainError("p에서 나가는 간선은 허용되지 않습니다", details={"field": "adjacency"})
        edges.append((src, dst, weight))

    metabolites = sorted({n for e in edges for n in e[:2] if n != PRODUCT_NODE}, key=_node_order)
    if not metabolites:
        raise ValidationError("대사물 노드가 없습니다", details={"field": "adjacency"})
    index = {name: i for i, name in enumerate(metabolites)}
    index[PRODUCT_NODE] = len(metabolites)

    n = len(metabolites)
    t = np.zeros((n + 1, n + 1))
    for src, dst, weight in edges:
        t[index[dst], index[src]] += weight

    disconnected = _metabolites_without_path(metabolites, edges)
    if disconnected:
        logger.error(f"p로 연결되지 않은 대사물: {disconnected}")
        raise DomainError(
            "metabolite not connected to p",
            details={"field": "adjacency", "metabolites": disconnected}
        )

    col_sums = t.sum(axis=0)
    a_mrn = t[:n, :n] - np.diag(col_sums[:n])
    c_mrn = t[n, :n].copy()

    if np.linalg.matrix_rank(a_mrn) < n:
        raise DomainError(
            "metabolite not connected to p",
            details={"field": "adjacency", "reason": "A_MRN is singular"}
        )
    return a_mrn, c_mrn, metabolites


def make_mrn(
    adjacency: Sequence[Sequence[Any]],
    seed: Optional[int] = None,
    u_set: Optional[BoxSet] = None,
    d_set: Optional[BoxSet] = None
) -> SPSystem:
    """성장하는 세포 집단의 대사 반응 네트워크 모델

        ż₁ = C d₁ y − z₁²/(z₁+1)
        ż₂ = (z₁/(z₁+1) − z₂) z₂
        ż₃ = z₂ u₂
        εẏ = A_MRN d₁ y + ê₁ u₁

    분해: f = (−z₁²/(z₁+1), (z₁/(z₁+1) − z₂)z₂, z₂u₂), g = ê₁u₁, A = A_MRN d₁,
    M = (C A_MRN⁻¹; 0; 0).
    """
    a_mrn, c_mrn, metabolites = build_mrn_matrices(adjacency, seed)
    n_y = len(metabolites)
    u_set = u_set or MRN_U_SET
    d_set = d_set or MRN_D_SET
    if u_set.dim != 2 or d_set.dim != 1:
        raise ValidationError(
            f"MRN은 2차원 제어와 1차원 외란이 필요합니다 (u={u_set.dim}, d={d_set.dim})",
            details={"field": "u_set" if u_set.dim != 2 else "d_set"}
        )

    coupling = np.zeros((3, n_y))
    coupling[0] = c_mrn @ np.linalg.inv(a_mrn)

    def f(z, u, d):
        saturation = z[0] / (z[0] + 1.0)
        return np.stack([
            -saturation * z[0],
            (saturation - z[1]) * z[1],
            z[1] * u[1],
        ])

    def g(z, u, d):
        out = np.zeros((n_y,) + np.shape(z)[1:])
        out[0] = u[0]
        return out

    def m(z):
        return broadcast_batch(coupling, np.shape(z)[1:])

    def a(z, u, d):
        return broadcast_batch(a_mrn * d[0], np.shape(z)[1:])

    inflow_gain = float(-(c_mrn @ np.linalg.solve(a_mrn, np.eye(n_y)[:, 0])))
    logger.info(f"MRN 생성: 대사물 {n_y}개, 축약 유입 이득 {inflow_gain:.6g}")
    return SPSystem(
        name="mrn",
        n_z=3, n_y=n_y,
        f=f, g=g, M=m, A=a,
        u_set=u_set, d_set=d_set,
        parameters={
            "n_metabolites": n_y,
            "seed": seed,
            "metabolites": metabolites,
            "A_MRN": a_mrn,
            "C_MRN": c_mrn,
            # F = f − Mg 가 주는 z₁ 유입 계수 (−C A⁻¹ ê₁)와 반대 부호 표기 (+C A⁻¹ ê₁)
            "inflow_gain": inflow_gain,
            "inflow_gain_opposite_sign": -inflow_gain,
        }
    )


def make_integrator(u_set: Optional[BoxSet] = None, d_set: Optional[BoxSet] = None) -> SPSystem:
    """해석해 검증용 1차원 적분기: ż = u (빠른 상태는 분리된 ẏ = −y/ε)"""
    u_set = u_set or BoxSet((-1.0,), (1.0,))
    d_set = d_set or BoxSet((0.0,), (0.0,))

    def f(z, u, d):
        return broadcast_batch(u[:1], np.shape(z)[1:]) + 0.0 * z

    def g(z, u, d):
        return np.zeros_like(z)

    def m(z):
        return broadcast_batch([[0.0]], np.shape(z)[1:])

    def a(z, u, d):
        return broadcast_batch([[-1.0]], np.shape(z)[1:])

    return SPSystem(name="integrator", n_z=1, n_y=1, f=f, g=g, M=m, A=a,
                    u_set=u_set, d_set=d_set)


class ModelCatalog:
    """모델 기술 문서 → SPSystem 생성기

    문서 형식:
        {"kind": "genetic_circuit" | "mrn" | "custom-builtin",
         "name": "<custom-builtin 이름>",
         "parameters": {...},
         "u_set": {"lower": [...], "upper": [...], "samples": 2},
         "d_set": {...}}
    사용자 정의 동역학은 register()로 프로그램에서 등록합니다.
    """

    _registry: Dict[str, Callable[..., SPSystem]] = {
        "integrator": make_integrator,
    }

    @classmethod
    def register(cls, name: str, factory: Callable[..., SPSystem]) -> None:
        """사용자 정의 내장 모델 등록 (factory(u_set=, d_set=, **parameters))"""
        cls._registry[name] = factory
        logger.info(f"사용자 정의 모델 등록: {name}")

    @classmethod
    def registered(cls) -> List[str]:
        return sorted(cls._registry)

    @classmethod
    def build(cls, document: Dict[str, Any]) -> SPSystem:
        """모델 기술 문서로부터 시스템 생성"""
        try:
            kind = document["kind"]
            parameters = dict(document.get("parameters") or {})
            u_set = BoxSet.from_dict(document["u_set"]) if document.get("u_set") else None
            d_set = BoxSet.from_dict(document["d_set"]) if document.get("d_set") else None

            if kind == "genetic_circuit":
                return make_genetic_circuit(parameters.get("alpha", 1.0), u_set, d_set)

            if kind == "mrn":
                seed = parameters.get("seed")
                adjacency = parameters.get("adjacency")
                if adjacency is None:
                    n = parameters.get("n_metabolites", 20)
                    if seed is None:
                        raise ConfigurationError("무작위 MRN에는 seed가 필요합니다",
                                                 details={"field": "parameters.seed"})
                    adjacency = random_mrn_adjacency(int(n), int(seed))
                return make_mrn(adjacency, seed, u_set, d_set)

            if kind == "custom-builtin":
                name = document.get("name")
                if name not in cls._registry:
                    raise ConfigurationError(
                        f"등록되지 않은 모델: {name} (등록됨: {cls.registered()})",
                        details={"field": "name"}
                    )
                kwargs = {k: v for k, v in (("u_set", u_set), ("d_set", d_set)) if v is not None}
                return cls._registry[name](**kwargs, **parameters)

            raise ConfigurationError(f"알 수 없는 모델 종류: {kind}", details={"field": "kind"})

        except KeyError as e:
            raise ConfigurationError(f"모델 기술 문서에 필수 키가 없습니다: {e}",
                                     details={"field": str(e).strip("'")}, original_error=e)


def _node_order(name: str):
    """m1, m2, ..., m10 순서 (숫자 접미사 기준)"""
    digits = "".join(ch for ch in name if ch.isdigit())
    return (0, int(digits), name) if digits else (1, 0, name)


def _metabolites_without_path(metabolites: List[str], edges: List[Tuple[str, str, float]]) -> List[str]:
    """양의 가중치 간선으로 p에 도달하지 못하는 대사물 목록"""
    reverse: Dict[str, List[str]] = {}
    for src, dst, weight in edges:
        if weight > 0:
            reverse.setdefault(dst, []).append(src)
    reached = {PRODUCT_NODE}
    queue = deque([PRODUCT_NODE])
    while queue:
        node = queue.popleft()
        for prev in reverse.get(node, []):
            if prev not in reached:
                reached.add(prev)
                queue.append(prev)
    return [m for m in metabolites if m not in reached]
