from storyreel.service.config import Config
from storyreel.service.project import BUILTIN_STYLES, ProjectService, ProjectStatus

__all__ = ["Config", "ProjectService", "ProjectStatus", "BUILTIN_STYLES"]
