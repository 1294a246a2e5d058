"""
Configuration settings for the coalgebraic automata kit
"""

import os
import logging
from dataclasses import dataclass, fields, replace

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Caps:
    """Enumeration limits shared by every evaluator"""
    quantifier: int = 8
    support: int = 12
    moves: int = 200000
    ef_carrier: int = 5
    ef_depth: int = 3
    monotone_carrier: int = 4
    special_basic_carrier: int = 3
    stabilize_factor: int = 4
    bag_count: int = 2


def parse_caps_override(text, base=None):
    """Parse a CAK_CAPS string such as 'quantifier=10,moves=500000'"""
    base = base or Caps()
    if not text:
        return base

    known = {f.name for f in fields(Caps)}
    updates = {}
    for item in text.split(','):
        item = item.strip()
        if not item:
            continue
        if '=' not in item:
            raise ValueError(f"Malformed CAK_CAPS entry: {item}")
        name, value = (part.strip() for part in item.split('=', 1))
        if name not in known:
            raise ValueError(f"Unknown cap: {name}")
        value = int(value)
        if value < getattr(base, name):
            raise ValueError(f"CAK_CAPS may only raise caps ({name}={value})")
        updates[name] = value

    return replace(base, **updates)


class Config:
    """Base configuration class"""

    SEED = int(os.environ.get('CAK_SEED', 42))
    JOBS = int(os.environ.get('CAK_JOBS', 1))
    LOG_LEVEL = os.environ.get('CAK_LOG_LEVEL', 'INFO')
    CAPS_OVERRIDE = os.environ.get('CAK_CAPS', '')

    # Sampling budgets for property checks
    SAMPLE_BUDGET = int(os.environ.get('CAK_SAMPLE_BUDGET', 30))
    LASSO_SAMPLES = int(os.environ.get('CAK_LASSO_SAMPLES', 500))
    GAME_SAMPLES = int(os.environ.get('CAK_GAME_SAMPLES', 200))

    # Truncation defaults for uniform constructions
    DEFAULT_TRUNCATION = int(os.environ.get('CAK_TRUNCATION', 2))
    DEFAULT_DEPTH_K = int(os.environ.get('CAK_DEPTH_K', 1))
    UNRAVEL_DEPTH = int(os.environ.get('CAK_UNRAVEL_DEPTH', 6))

    # Model corpus sizes for the full self-check level
    MU_MODEL_SIZE = int(os.environ.get('CAK_MU_MODEL_SIZE', 3))
    MON_MODEL_SIZE = int(os.environ.get('CAK_MON_MODEL_SIZE', 2))

    @classmethod
    def caps(cls):
        """Caps for this configuration, raised by CAK_CAPS when set"""
        return parse_caps_override(cls.CAPS_OVERRIDE)


class DevelopmentConfig(Config):
    """Development configuration"""
    DEBUG = True


class TestingConfig(Config):
    """Testing configuration"""
    DEBUG = False
    SAMPLE_BUDGET = 10
    LASSO_SAMPLES = 100
    GAME_SAMPLES = 50


class FullCheckConfig(Config):
    """Configuration used by the full self-check level"""
    DEBUG = False
    SAMPLE_BUDGET = 30
    LASSO_SAMPLES = 500
    GAME_SAMPLES = 200


# Configuration mapping
config = {
    'development': DevelopmentConfig,
    'testing': TestingConfig,
    'full': FullCheckConfig,
    'default': DevelopmentConfig
}


def get_config(name=None):
    """Resolve a configuration class by name or CAK_ENV"""
    name = name or os.environ.get('CAK_ENV', 'default')
    if name not in config:
        logger.warning(f"Unknown configuration '{name}', using default")
        name = 'default'
    return config[name]


def current_caps():
    """Caps of the active configuration"""
    return get_config().caps()
