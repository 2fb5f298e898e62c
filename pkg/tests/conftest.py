import sys
from pathlib import Path

from hypothesis import settings

settings.register_profile("suite", deadline=None, max_examples=50)
settings.load_profile("suite")

# make the oracle module importable as a plain module from any test
sys.path.insert(0, str(Path(__file__).parent))
