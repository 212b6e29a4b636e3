"""등고선/궤적 오버레이 SVG 생성 (외부 자원 없는 고정 스타일, 결정적 출력)"""

from typing import List, Optional, Sequence, Tuple
from xml.sax.saxutils import escape

import numpy as np

from utils.exceptions import ValidationError

CANVAS = 480
MARGIN = 48

# 역할별 고정 스타일
STYLES = {
    "target": {"stroke": "#000000", "dash": "6,4", "width": 1.5},
    "inner": {"stroke": "#e6b800", "dash": None, "width": 2.0},
    "outer": {"stroke": "#cc00cc", "dash": None, "width": 2.0},
    "full_zero": {"stroke": "#1f77b4", "dash": None, "width": 1.5},
    "trajectory": {"stroke": "#333333", "dash": None, "width": 1.2},
}


class ContourOverlay:
    """2차원 평면 위 오버레이 누적 후 SVG 문자열 렌더링"""

    def __init__(
        self,
        x_range: Tuple[float, float],
        y_range: Tuple[float, float],
        x_label: str = "z1",
        y_label: str = "z2",
        title: str = ""
    ):
        if not (x_range[0] < x_range[1] and y_range[0] < y_range[1]):
            raise ValidationError("오버레이 범위가 비어 있습니다", details={"field": "range"})
        self.x_range = (float(x_range[0]), float(x_range[1]))
        self.y_range = (float(y_range[0]), float(y_range[1]))
        self.x_label = x_label
        self.y_label = y_label
        self.title = title
        self._elements: List[str] = []

    def _px(self, x: float, y: float) -> Tuple[float, float]:
        width = CANVAS - 2 * MARGIN
        px = MARGIN + (x - self.x_range[0]) / (self.x_range[1] - self.x_range[0]) * width
        py = CANVAS - MARGIN - (y - self.y_range[0]) / (self.y_range[1] - self.y_range[0]) * width
        return px, py

    def _polyline(self, points: np.ndarray, role: str) -> str:
        style = STYLES[role]
        coords = " ".join("%.3f,%.3f" % self._px(x, y) for x, y in np.asarray(points, dtype=float))
        dash = f' stroke-dasharray="{style["dash"]}"' if style["dash"] else ""
        return (f'<polyline class="{role}" points="{coords}" fill="none" '
                f'stroke="{style["stroke"]}" stroke-width="{style["width"]}"{dash}/>')

    def add_contours(self, polylines: Sequence[np.ndarray], role: str) -> "ContourOverlay":
        if role not in STYLES:
            raise ValidationError(f"알 수 없는 오버레이 역할: {role}", details={"field": "role"})
        for line in polylines:
            if len(line) >= 2:
                self._elements.append(self._polyline(line, role))
        return self

    def add_target(self, lower: Sequence[Optional[float]], upper: Sequence[Optional[float]]) -> "ContourOverlay":
        """목표 상자 윤곽 (None 경계는 그림 범위로 대체)"""
        x0 = self.x_range[0] if lower[0] is None else max(lower[0], self.x_range[0])
        x1 = self.x_range[1] if upper[0] is None else min(upper[0], self.x_range[1])
        y0 = self.y_range[0] if lower[1] is None else max(lower[1], self.y_range[0])
        y1 = self.y_range[1] if upper[1] is None else min(upper[1], self.y_range[1])
        corners = np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1], [x0, y0]])
        self._elements.append(self._polyline(corners, "target"))
        return self

    def add_trajectory(self, points: np.ndarray) -> "ContourOverlay":
        """궤적 선과 시작(◯)/끝(×) 표시"""
        points = np.asarray(points, dtype=float)
        self._elements.append(self._polyline(points, "trajectory"))
        sx, sy = self._px(*points[0])
        ex, ey = self._px(*points[-1])
        color = STYLES["trajectory"]["stroke"]
        self._elements.append(
            f'<circle class="start" cx="{sx:.3f}" cy="{sy:.3f}" r="4" fill="none" stroke="{color}"/>'
        )
        self._elements.append(
            f'<path class="end" d="M{ex - 4:.3f},{ey - 4:.3f} L{ex + 4:.3f},{ey + 4:.3f} '
            f'M{ex - 4:.3f},{ey + 4:.3f} L{ex + 4:.3f},{ey - 4:.3f}" stroke="{color}" stroke-width="1.5"/>'
        )
        return self

    def render(self) -> str:
        x_lo, y_lo = self._px(self.x_range[0], self.y_range[0])
        x_hi, y_hi = self._px(self.x_range[1], self.y_range[1])
        lines = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{CANVAS}" height="{CANVAS}" '
            f'viewBox="0 0 {CANVAS} {CANVAS}">',
            f'<rect x="0" y="0" width="{CANVAS}" height="{CANVAS}" fill="#ffffff"/>',
            f'<rect class="axes" x="{x_lo:.3f}" y="{y_hi:.3f}" width="{x_hi - x_lo:.3f}" '
            f'height="{y_lo - y_hi:.3f}" fill="none" stroke="#000000" stroke-width="1"/>',
            f'<text x="{x_lo:.3f}" y="{y_lo + 16:.3f}" font-size="11" text-anchor="middle">{self.x_range[0]:g}</text>',
            f'<text x="{x_hi:.3f}" y="{y_lo + 16:.3f}" font-size="11" text-anchor="middle">{self.x_range[1]:g}</text>',
            f'<text x="{x_lo - 6:.3f}" y="{y_lo + 4:.3f}" font-size="11" text-anchor="end">{self.y_range[0]:g}</text>',
            f'<text x="{x_lo - 6:.3f}" y="{y_hi + 4:.3f}" font-size="11" text-anchor="end">{self.y_range[1]:g}</text>',
            f'<text x="{(x_lo + x_hi) / 2:.3f}" y="{CANVAS - 12}" font-size="12" '
            f'text-anchor="middle">{escape(self.x_label)}</text>',
            f'<text x="14" y="{(y_lo + y_hi) / 2:.3f}" font-size="12" text-anchor="middle" '
            f'transform="rotate(-90 14 {(y_lo + y_hi) / 2:.3f})">{escape(self.y_label)}</text>',
        ]
        if self.title:
            lines.append(f'<text x="{CANVAS / 2:.3f}" y="24" font-size="13" text-anchor="middle">{escape(self.title)}</text>')
        lines.extend(self._elements)
        lines.append("</svg>")
        return "\n".join(lines) + "\n"
