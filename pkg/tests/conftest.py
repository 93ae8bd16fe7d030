import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

from kanlab._perf import tune_allocator

tune_allocator()
