"""Mask set artifact: one binary mask per character label.

Masks are stored as unions of pixel rectangles in a small JSON document, which
is enough to express any mask (one rect per row run) while keeping the mock
providers and the byte-level pipeline checks simple. An empty ``rects`` list
is an empty mask, i.e. a segmentation miss for that label.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from storyreel import canonical
from storyreel.errors import SchemaError

Rect = tuple[int, int, int, int]  # x, y, w, h in pixels


@dataclass(frozen=True)
class LabeledMask:
    label: str
    rects: tuple[Rect, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "rects", tuple(tuple(int(v) for v in r) for r in self.rects))

    @property
    def empty(self) -> bool:
        return not self.rects or all(w == 0 or h == 0 for _, _, w, h in self.rects)


@dataclass(frozen=True)
class MaskSet:
    width: int
    height: int
    masks: tuple[LabeledMask, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "masks", tuple(self.masks))

    def labels(self) -> list[str]:
        return [m.label for m in self.masks]

    def missing_labels(self) -> list[str]:
        return [m.label for m in self.masks if m.empty]

    def covered(self, x: int, y: int) -> bool:
        for mask in self.masks:
            for rx, ry, rw, rh in mask.rects:
                if rx <= x < rx + rw and ry <= y < ry + rh:
                    return True
        return False


def mask_set_to_bytes(mask_set: MaskSet) -> bytes:
    return canonical.dump_bytes(
        {
            "schema_version": 1,
            "width": mask_set.width,
            "height": mask_set.height,
            "masks": [
                {"label": m.label, "rects": [list(r) for r in m.rects]}
                for m in mask_set.masks
            ],
        }
    )


def mask_set_from_bytes(data: bytes) -> MaskSet:
    doc = canonical.loads(data)
    try:
        return MaskSet(
            width=doc["width"],
            height=doc["height"],
            masks=tuple(
                LabeledMask(label=m["label"], rects=tuple(tuple(r) for r in m["rects"]))
                for m in doc["masks"]
            ),
        )
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"malformed mask set: {exc}") from exc
