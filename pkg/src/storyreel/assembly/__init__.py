from storyreel.assembly.materials import (
    DEFAULT_MIN_SHOT_MS,
    MaterialPlan,
    MusicMaterial,
    NarrationMaterial,
    ShotMaterial,
    material_plan_from_doc,
    material_plan_to_doc,
    mood_from_title,
    plan_materials,
    shot_visual_duration,
)
from storyreel.assembly.timeline import (
    Clip,
    Timeline,
    TrackKind,
    align_timeline,
    clip_from_doc,
    timeline_from_doc,
)
from storyreel.assembly.manifest import build_render_manifest, emit_manifest

__all__ = [
    "DEFAULT_MIN_SHOT_MS",
    "MaterialPlan",
    "MusicMaterial",
    "NarrationMaterial",
    "ShotMaterial",
    "material_plan_from_doc",
    "material_plan_to_doc",
    "mood_from_title",
    "plan_materials",
    "shot_visual_duration",
    "Clip",
    "Timeline",
    "TrackKind",
    "align_timeline",
    "clip_from_doc",
    "timeline_from_doc",
    "build_render_manifest",
    "emit_manifest",
]
