"""
체크포인트 아카이브 입출력

ZIP 아카이브 하나에 다음 멤버를 순서대로 저장합니다 (무압축, 고정 타임스탬프):
    config.json          ModelConfig JSON
    index.json           [{"name", "shape", "dtype"}, ...] (저장 순서)
    tensors/<name>.bin   C-order 리틀엔디언 원시 버퍼 (<f4 또는 <f8)

같은 파라미터를 두 번 저장하면 바이트 단위로 같은 파일이 나옵니다.
"""

import json
import zipfile
from pathlib import Path
from typing import Union

import numpy as np
from pydantic import ValidationError

from tensor_core import Tensor

from .config import ModelConfig
from .params import ModelParams, parameter_layout


FIXED_TIMESTAMP = (1980, 1, 1, 0, 0, 0)
CONFIG_MEMBER = "config.json"
INDEX_MEMBER = "index.json"


class CheckpointError(ValueError):
    """체크포인트를 읽을 수 없거나 설정과 맞지 않을 때"""


def _member(name: str) -> zipfile.ZipInfo:
    info = zipfile.ZipInfo(name, date_time=FIXED_TIMESTAMP)
    info.compress_type = zipfile.ZIP_STORED
    info.external_attr = 0o644 << 16
    return info


def save_checkpoint(params: ModelParams, path: Union[str, Path]) -> Path:
    """
    파라미터를 체크포인트 아카이브로 저장

    Returns:
        저장된 파일 경로
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    index = []
    with zipfile.ZipFile(path, "w") as archive:
        archive.writestr(_member(CONFIG_MEMBER), params.config.model_dump_json(indent=2))
        for name, tensor in params.named_parameters():
            index.append({"name": name, "shape": list(tensor.shape), "dtype": tensor.dtype.name})
        archive.writestr(_member(INDEX_MEMBER), json.dumps(index, indent=2))
        for name, tensor in params.named_parameters():
            little = tensor.data.astype(tensor.dtype.newbyteorder("<"), copy=False)
            archive.writestr(_member(f"tensors/{name}.bin"), np.ascontiguousarray(little).tobytes())
    return path


def load_checkpoint(path: Union[str, Path]) -> ModelParams:
    """
    체크포인트 아카이브에서 파라미터 복원

    Raises:
        FileNotFoundError: 파일이 없는 경우
        CheckpointError: 형식 오류 또는 설정과 텐서 shape 불일치
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"체크포인트를 찾을 수 없습니다: {path}")
    try:
        with zipfile.ZipFile(path, "r") as archive:
            config = ModelConfig.model_validate_json(archive.read(CONFIG_MEMBER))
            index = json.loads(archive.read(INDEX_MEMBER))
            expected = {name: shape for name, shape, _ in parameter_layout(config)}
            names = [entry["name"] for entry in index]
            if set(names) != set(expected):
                raise CheckpointError(f"체크포인트 텐서 목록이 설정과 다릅니다: {path}")
            tensors = {}
            for entry in index:
                name, shape = entry["name"], tuple(entry["shape"])
                if shape != expected[name]:
                    raise CheckpointError(f"텐서 {name}의 shape {shape}가 설정의 {expected[name]}와 다릅니다")
                if entry["dtype"] != config.dtype:
                    raise CheckpointError(f"텐서 {name}의 dtype {entry['dtype']}가 설정의 {config.dtype}와 다릅니다")
                raw = archive.read(f"tensors/{name}.bin")
                data = np.frombuffer(raw, dtype=np.dtype(config.dtype).newbyteorder("<"))
                if data.size != int(np.prod(shape)):
                    raise CheckpointError(f"텐서 {name}의 버퍼 크기가 shape {shape}와 맞지 않습니다")
                array = data.reshape(shape).astype(config.dtype)
                tensors[name] = Tensor(array, requires_grad=True, name=name)
    except (zipfile.BadZipFile, KeyError, json.JSONDecodeError, ValidationError) as e:
        raise CheckpointError(f"체크포인트 형식 오류 ({path}): {e}") from e
    ordered = {name: tensors[name] for name, _, _ in parameter_layout(config)}
    return ModelParams(config, ordered)
