import os
import logging
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

logger = logging.getLogger(__name__)


class Config:
    # Predicate tolerance (overridable per call and via GAMEDECOMP_TOL)
    DEFAULT_TOL = float(os.getenv('GAMEDECOMP_TOL', '1e-9'))

    # Size guards
    MAX_PAYOFF_ENTRIES = int(os.getenv('GAMEDECOMP_MAX_ENTRIES', 50000))
    MAX_CONSTRAINT_CELLS = int(os.getenv('GAMEDECOMP_MAX_CONSTRAINT_CELLS', 20_000_000))
    MAX_CYCLE_TERMS = int(os.getenv('GAMEDECOMP_MAX_CYCLE_TERMS', 20_000_000))

    LOG_LEVEL = os.getenv('GAMEDECOMP_LOG_LEVEL', 'INFO').upper()

    # Mixed profiles
    PROFILE_SUM_TOL = 1e-12
    PROFILE_CLAMP = 1e-15

    # Solvers
    SINGULARITY_THRESHOLD = 1e-11
    TIE_TOL = 1e-9
    SOLVER_NASH_TOL = 1e-8

    # Decomposition checks
    ORTHOGONALITY_TOL = 1e-9
    RESIDUAL_TOL = 1e-9
    PYTHAGORAS_TOL = 1e-8
    CROSS_CHECK_TOL = 1e-7

    # Output
    FLOAT_DIGITS = 17

    @staticmethod
    def default_tolerance():
        """Tolerance for boolean predicates, re-read from the environment"""
        raw = os.getenv('GAMEDECOMP_TOL')
        if raw is None:
            return Config.DEFAULT_TOL
        try:
            return float(raw)
        except ValueError:
            logger.warning(f"⚠️ GAMEDECOMP_TOL={raw!r} is not a number, using {Config.DEFAULT_TOL}")
            return Config.DEFAULT_TOL

    @staticmethod
    def validate_config():
        """Validate numeric configuration"""
        issues = []

        if not Config.default_tolerance() > 0:
            issues.append("GAMEDECOMP_TOL must be positive")

        for name in ('MAX_PAYOFF_ENTRIES', 'MAX_CONSTRAINT_CELLS', 'MAX_CYCLE_TERMS'):
            if getattr(Config, name) < 1:
                issues.append(f"{name} must be at least 1")

        if not isinstance(logging.getLevelName(Config.LOG_LEVEL), int):
            issues.append(f"GAMEDECOMP_LOG_LEVEL {Config.LOG_LEVEL!r} is not a logging level")

        if issues:
            for issue in issues:
                logger.warning(f"⚠️ {issue}")
            return False

        return True
