from storyreel.prompts.script_chain import (
    DEFAULT_SHOT_BUDGET,
    ActionPlan,
    ScriptBuildResult,
    ScriptChain,
    StagePrompt,
)
from storyreel.prompts.templates import (
    EXPERIENCE_HEADER,
    KNOWLEDGE_HEADER,
    PromptTemplate,
    TemplateLibrary,
    augment_prompt,
    load_builtin_templates,
    template_from_doc,
)

__all__ = [
    "DEFAULT_SHOT_BUDGET",
    "ActionPlan",
    "ScriptBuildResult",
    "ScriptChain",
    "StagePrompt",
    "EXPERIENCE_HEADER",
    "KNOWLEDGE_HEADER",
    "PromptTemplate",
    "TemplateLibrary",
    "augment_prompt",
    "load_builtin_templates",
    "template_from_doc",
]
