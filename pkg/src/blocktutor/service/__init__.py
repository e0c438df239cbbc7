"""HTTP service wiring: config, embedded store and the FastAPI app."""
from .app import create_app
from .config import ENV_VAR, ConfigError, ServiceConfig, load_config, parse_config
from .store import DataStore, Session, StoredQuiz, build_store
