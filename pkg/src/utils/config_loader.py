import yaml
import os
from pathlib import Path
from typing import Dict, Any


def _find_project_root() -> Path:
    """Find project root by looking for pyproject.toml or config directory."""
    current = Path(__file__).resolve().parent

    for _ in range(5):
        if (current / "pyproject.toml").exists() or (current / "config").exists():
            return current
        current = current.parent

    return Path.cwd()


def load_env(env_path: str = None) -> None:
    """
    Load environment variables from .env file.
    Variables already set in the process environment win.
    """
    if env_path:
        path = Path(env_path)
    else:
        path = _find_project_root() / ".env"

    if not path.exists():
        return

    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" in line:
                key, value = line.split("=", 1)
                os.environ.setdefault(key.strip(), value.strip())


def load_config(config_path: str = "config/settings.yaml") -> Dict[str, Any]:
    """
    Load configuration from YAML file and merge with environment variables.

    Recognized overrides:
        SPIKECODEC_THREADS    -> app.threads
        SPIKECODEC_LOG_LEVEL  -> app.log_level
    """
    load_env()

    path = Path(config_path)
    if not path.is_absolute():
        path = _find_project_root() / config_path

    if not path.exists():
        raise FileNotFoundError(f"Configuration file not found at: {path.absolute()}")

    with open(path, "r", encoding="utf-8") as f:
        try:
            config = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise ValueError(f"Error parsing YAML configuration: {e}") from e

    app = config.setdefault("app", {})

    threads = os.environ.get("SPIKECODEC_THREADS", "")
    if threads:
        try:
            app["threads"] = int(threads)
        except ValueError as e:
            raise ValueError(f"SPIKECODEC_THREADS must be an integer, got {threads!r}") from e

    log_level = os.environ.get("SPIKECODEC_LOG_LEVEL", "")
    if log_level:
        app["log_level"] = log_level.upper()

    return config


def resolve_threads(config: Dict[str, Any] = None) -> int:
    """Effective worker count: env var first, then app.threads, then CPU count."""
    env = os.environ.get("SPIKECODEC_THREADS", "")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    configured = (config or {}).get("app", {}).get("threads")
    if configured:
        return max(1, int(configured))
    return max(1, os.cpu_count() or 1)
