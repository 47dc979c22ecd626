"""Canonical production workflow as a plain node-list document.

Nine nodes: the script chain (title, character design, action division, shot
writing), the image stages (generation, critique), and the assembly stages
(materials, timeline, export). Character design precedes action generation so
every later step reuses the same character descriptions. This document is the
single source for both the built-in planner default and the mock planner.
"""

from __future__ import annotations

import copy


def _node(node_id, kind, ref, depends_on, bindings):
    return {
        "id": node_id,
        "kind": kind,
        "ref": ref,
        "depends_on": list(depends_on),
        "input_bindings": bindings,
    }


def _from(node, key):
    return {"node": node, "key": key}


_CANONICAL_NODES = [
    _node(
        "title_generation",
        "llm",
        "title_generation",
        [],
        {"proposal": _from("inputs", "proposal")},
    ),
    _node(
        "character_design",
        "llm",
        "character_design",
        ["title_generation"],
        {
            "proposal": _from("inputs", "proposal"),
            "title": _from("title_generation", "title"),
        },
    ),
    _node(
        "action_generation",
        "llm",
        "action_planning",
        ["character_design", "title_generation"],
        {
            "proposal": _from("inputs", "proposal"),
            "title": _from("title_generation", "title"),
            "characters": _from("character_design", "characters"),
        },
    ),
    _node(
        "shot_generation",
        "llm",
        "shot_generation",
        ["action_generation", "character_design", "title_generation"],
        {
            "title": _from("title_generation", "title"),
            "characters": _from("character_design", "characters"),
            "actions": _from("action_generation", "actions"),
        },
    ),
    _node(
        "image_generation",
        "utility",
        "text_to_image",
        ["shot_generation"],
        {
            "script": _from("shot_generation", "script"),
            "style": _from("inputs", "style"),
        },
    ),
    _node(
        "image_critique",
        "utility",
        "multimodal_critique",
        ["image_generation", "shot_generation"],
        {
            "script": _from("shot_generation", "script"),
            "image_sets": _from("image_generation", "image_sets"),
            "style": _from("inputs", "style"),
        },
    ),
    _node(
        "material_generation",
        "utility",
        "text_to_speech",
        ["image_critique", "shot_generation"],
        {
            "script": _from("shot_generation", "script"),
            "image_sets": _from("image_critique", "image_sets"),
        },
    ),
    _node(
        "timeline_alignment",
        "assembly",
        "timeline_alignment",
        ["material_generation", "shot_generation"],
        {
            "script": _from("shot_generation", "script"),
            "materials": _from("material_generation", "materials"),
        },
    ),
    _node(
        "video_export",
        "assembly",
        "video_export",
        ["timeline_alignment"],
        {"timeline": _from("timeline_alignment", "timeline")},
    ),
]


def canonical_nodes_doc(include_budget_binding: bool = False) -> dict:
    """The canonical workflow as a planner-output document.

    With ``include_budget_binding`` the action-generation node additionally
    binds the run-level shot budget, making global shot planning explicit in
    the graph rather than an implicit default.
    """
    nodes = copy.deepcopy(_CANONICAL_NODES)
    if include_budget_binding:
        for node in nodes:
            if node["id"] == "action_generation":
                node["input_bindings"]["shot_budget"] = _from("inputs", "shot_budget")
    return {"nodes": nodes}
