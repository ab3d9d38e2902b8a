"""
Configuration settings for doodlekit
"""

import os
from pathlib import Path
from dotenv import load_dotenv

load_dotenv()
# A .env next to this file wins over the working directory
env_path = Path(__file__).parent / ".env"
if env_path.exists():
    load_dotenv(env_path, override=True)


class Config:
    """Experiment and search configuration"""

    # Randomness
    SEED = int(os.getenv("DOODLEKIT_SEED", 20240531))

    # Thread pool size for experiments and suites
    WORKERS = int(os.getenv("DOODLEKIT_WORKERS", 4))

    # M-search caps
    SEARCH_DEPTH = int(os.getenv("DOODLEKIT_SEARCH_DEPTH", 8))
    SEARCH_STRANDS = int(os.getenv("DOODLEKIT_SEARCH_STRANDS", 4))
    CONJ_CAP = int(os.getenv("DOODLEKIT_CONJ_CAP", 2))
    SEARCH_LETTERS = int(os.getenv("DOODLEKIT_SEARCH_LETTERS", 12))

    # Markov experiment
    NMAX = int(os.getenv("DOODLEKIT_NMAX", 3))
    LENMAX = int(os.getenv("DOODLEKIT_LENMAX", 4))
    MSEQ_MAX = int(os.getenv("DOODLEKIT_MSEQ_MAX", 5))
    FORWARD_TRIALS = int(os.getenv("DOODLEKIT_FORWARD_TRIALS", 500))

    # Output
    LOG_LEVEL = os.getenv("DOODLEKIT_LOG_LEVEL", "WARNING").upper()
    SVG_SIZE = int(os.getenv("DOODLEKIT_SVG_SIZE", 480))

    @classmethod
    def get_info(cls):
        """Get configuration info as dict"""
        return {
            "seed": cls.SEED,
            "workers": cls.WORKERS,
            "search": (f"depth {cls.SEARCH_DEPTH}, strands {cls.SEARCH_STRANDS}, "
                       f"conj cap {cls.CONJ_CAP}, letters {cls.SEARCH_LETTERS}"),
            "experiment": f"nmax {cls.NMAX}, lenmax {cls.LENMAX}, mseq {cls.MSEQ_MAX}",
            "log_level": cls.LOG_LEVEL,
        }
