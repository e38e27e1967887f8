"""deeplinker: derive, release, and replay deep links for declarative app models.

The pipeline: load a model, build its navigation graph and shortcuts, crawl
activities for fragments, select locations to expose, build a release
manifest of URI templates, and replay concrete links against the built-in
simulator to verify they land where they claim.
"""

from .crawl import (
    EntryScript,
    FragmentTransitionGraph,
    crawl_ftg,
    fragment_path,
    name_fragments,
)
from .errors import DeeplinkerError
from .linker import (
    DeepLink,
    DeepLinkTemplate,
    ReleaseManifest,
    build_templates,
    export_manifest,
    import_manifest,
    make_uri_schema,
    parse_deep_link,
    render_deep_link,
)
from .model import (
    AppModel,
    count_declared_deep_links,
    load_app_model,
    validate_replayability,
)
from .navgraph import (
    NavGraph,
    Path,
    Shortcut,
    build_nav_graph,
    can_replace,
    compute_shortcuts,
    enumerate_paths,
    path_labels,
    unique_shortcuts,
)
from .replay import ReplayTrace, replay_deep_link, verify_target
from .simulator import SimSession
from .treehash import StructureHash, tree_hash

__version__ = "0.1.0"

__all__ = [
    "AppModel",
    "DeepLink",
    "DeepLinkTemplate",
    "DeeplinkerError",
    "EntryScript",
    "FragmentTransitionGraph",
    "NavGraph",
    "Path",
    "ReleaseManifest",
    "ReplayTrace",
    "Shortcut",
    "SimSession",
    "StructureHash",
    "build_nav_graph",
    "build_templates",
    "can_replace",
    "compute_shortcuts",
    "count_declared_deep_links",
    "crawl_ftg",
    "enumerate_paths",
    "export_manifest",
    "fragment_path",
    "import_manifest",
    "load_app_model",
    "make_uri_schema",
    "name_fragments",
    "parse_deep_link",
    "path_labels",
    "render_deep_link",
    "replay_deep_link",
    "tree_hash",
    "unique_shortcuts",
    "validate_replayability",
    "verify_target",
]
