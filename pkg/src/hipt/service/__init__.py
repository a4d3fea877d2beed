from .config import LAYOUT_HYPERPARAMS, ConfigError, RunConfig
from .runs import ManifestError, create_run_dir, persist_config, verify_manifest, write_manifest
