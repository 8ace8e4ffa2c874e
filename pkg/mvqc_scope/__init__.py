"""
MVQC Scope - iris and signature verification from minimum-variance quadtree
components of Hu-derived moments.
"""

__version__ = "1.0.0"

from mvqc_scope.api import Verifier  # noqa: E402
from mvqc_scope.backend import Backend, FileBackend, InMemoryBackend  # noqa: E402
from mvqc_scope.config import (  # noqa: E402
    ConfigKey,
    configure_backend,
    get_option,
    load_config_file,
    option_context,
    reset_option,
    set_option,
)
from mvqc_scope.core import (  # noqa: E402
    BinaryImage,
    ClassifierKind,
    Decision,
    DecisionRecord,
    GrayImage,
    Modality,
    MomentKind,
    MvqcTemplate,
    TileOrder,
)
from mvqc_scope.errors import MvqcError  # noqa: E402
from mvqc_scope.evaluation import (  # noqa: E402
    EvalReport,
    ExperimentConfig,
    run_experiment,
    run_grid,
    write_report_csv,
    zero_counts,
)
from mvqc_scope.manifest import DatasetManifest, load_manifest  # noqa: E402
from mvqc_scope.mvqc import build_template, load_template, save_template  # noqa: E402

__all__ = [
    "Verifier",
    "Backend",
    "FileBackend",
    "InMemoryBackend",
    "ConfigKey",
    "set_option",
    "get_option",
    "reset_option",
    "option_context",
    "load_config_file",
    "configure_backend",
    "GrayImage",
    "BinaryImage",
    "Modality",
    "MomentKind",
    "ClassifierKind",
    "TileOrder",
    "MvqcTemplate",
    "Decision",
    "DecisionRecord",
    "MvqcError",
    "build_template",
    "save_template",
    "load_template",
    "DatasetManifest",
    "ExperimentConfig",
    "EvalReport",
    "load_manifest",
    "run_experiment",
    "run_grid",
    "zero_counts",
    "write_report_csv",
]
