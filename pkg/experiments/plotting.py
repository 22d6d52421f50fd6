"""
AccErr 곡선 그림

matplotlib이 없으면 그림 없이 경고만 출력합니다 (CSV는 항상 저장됨).
"""

from pathlib import Path
from typing import Mapping, Optional, Sequence, Union

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    MATPLOTLIB_AVAILABLE = True
except ImportError:
    MATPLOTLIB_AVAILABLE = False


def plot_accerr_curves(
    curves: Mapping[str, Sequence[Mapping[str, float]]],
    path: Union[str, Path],
    title: str = "Accumulated error",
) -> Optional[Path]:
    """
    AccErr 곡선을 이상적인 직선 AccErr = l과 함께 PNG로 저장

    Args:
        curves: 라벨 → AccErr CSV 행 목록 (l, AccErr 열 사용)
        path: 저장 경로
        title: 그림 제목

    Returns:
        저장된 경로 (matplotlib이 없거나 곡선이 비어 있으면 None)
    """
    if not MATPLOTLIB_AVAILABLE:
        print("⚠️ matplotlib이 설치되지 않아 AccErr 그림을 건너뜁니다")
        return None
    longest = max((row["l"] for rows in curves.values() for row in rows), default=0)
    if longest == 0:
        return None

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, rows in curves.items():
        ax.plot([row["l"] for row in rows], [row["AccErr"] for row in rows], label=label)
    ax.plot([1, longest], [1, longest], linestyle="--", color="gray", label="expected (no exposure bias)")
    ax.set_xlabel("l")
    ax.set_ylabel("AccErr(l)")
    ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)
    return path
